//! One-dimensional quadrature and scalar minimization.
//!
//! Three integrators live here: fixed Gauss–Legendre rules (used to build
//! product quadrature measures), adaptive Gauss–Kronrod 7/15 for smooth
//! integrands, and tanh-sinh for integrands with algebraic or logarithmic
//! endpoint singularities. The tanh-sinh integrand receives the distances to
//! both endpoints, computed without cancellation, so kernels such as
//! `(b - x)^(-0.75)` can be evaluated accurately next to the endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive Gauss–Kronrod (7/15) integration of a smooth integrand.
///
/// Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)` or after `max_segments` bisections.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let max_segments = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    for _ in 0..max_segments {
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Integral {
                value: total,
                error: total_err,
                converged: true,
            };
        }
        let seg = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (seg.a + seg.b);
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    // recompute to shed accumulated rounding in the running sums
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Integral {
        value,
        error,
        converged: error <= abs_tol.max(rel_tol * value.abs()),
    }
}

const TANH_SINH_T_MAX: f64 = 6.5;
const TANH_SINH_MIN_DIST: f64 = 1e-290;

/// Tanh-sinh integration on `[a, b]` at a fixed refinement level.
///
/// The integrand is called as `f(x, x - a, b - x)`. Level `L` uses step
/// `2^-L` in the transformed variable, so each level roughly doubles the node
/// count.
pub fn tanh_sinh_level<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, level: u32) -> f64 {
    let step = 0.5f64.powi(level as i32);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = FRAC_PI_2 * f(mid, half, half);
    let mut k = 1usize;
    loop {
        let t = k as f64 * step;
        if t > TANH_SINH_T_MAX {
            break;
        }
        match tanh_sinh_pair(&f, a, b, half, t) {
            Some(v) => sum += v,
            None => break,
        }
        k += 1;
    }
    sum * step * half
}

/// Sum of the two mirrored tanh-sinh terms at abscissa `t`, unscaled by the
/// step and half-width. `None` once the nodes are too close to the endpoints.
fn tanh_sinh_pair<F: Fn(f64, f64, f64) -> f64>(f: &F, a: f64, b: f64, half: f64, t: f64) -> Option<f64> {
    let u = FRAC_PI_2 * t.sinh();
    // 1 - tanh(u) = exp(-u) / cosh(u)
    let log_gap = -u - log_cosh(u);
    let gap = log_gap.exp();
    let dist = half * gap;
    if !(dist > TANH_SINH_MIN_DIST) {
        return None;
    }
    let x = u.tanh();
    let w = FRAC_PI_2 * t.cosh() * (-2.0 * log_cosh(u)).exp();
    let far = half * (1.0 + x);
    let right = f(b - dist, far, dist);
    let left = f(a + dist, dist, far);
    Some(w * (left + right))
}

fn log_cosh(u: f64) -> f64 {
    let au = u.abs();
    au + (-2.0 * au).exp().ln_1p() - std::f64::consts::LN_2
}

/// Adaptive tanh-sinh: refines the level until successive estimates agree
/// to `rel_tol` (relative) or `abs_tol`, up to level 12.
pub fn tanh_sinh<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral {
            value: 0.0,
            error: 0.0,
            converged: true,
        };
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // level 0: all integer abscissae
    let mut raw = FRAC_PI_2 * f(mid, half, half);
    let mut k = 1usize;
    while (k as f64) <= TANH_SINH_T_MAX {
        match tanh_sinh_pair(&f, a, b, half, k as f64) {
            Some(v) => raw += v,
            None => break,
        }
        k += 1;
    }
    let mut step = 1.0;
    let mut estimate = raw * step * half;
    let mut error = f64::INFINITY;
    for _level in 1..=12 {
        step *= 0.5;
        let mut k = 1usize;
        loop {
            let t = k as f64 * step;
            if t > TANH_SINH_T_MAX {
                break;
            }
            match tanh_sinh_pair(&f, a, b, half, t) {
                Some(v) => raw += v,
                None => break,
            }
            k += 2;
        }
        let next = raw * step * half;
        error = (next - estimate).abs();
        estimate = next;
        if error <= abs_tol.max(rel_tol * estimate.abs()) {
            return Integral {
                value: estimate,
                error,
                converged: true,
            };
        }
    }
    Integral {
        value: estimate,
        error,
        converged: false,
    }
}

/// Pairwise (cascade) summation. The split points depend only on the
/// length, so the result is reproducible bit for bit.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`; the bracket endpoints are candidates too, so a
/// monotone function converges to the lower endpoint value.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol && iterations < 200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let xm = 0.5 * (lo + hi);
    let fm = f(xm);
    let mut best = (xm, fm);
    for (x, fx) in [(x1, f1), (x2, f2)] {
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = w.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-14);
        // degree 9 is exact for 5 nodes
        let p: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert_relative_eq!(p, 2.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_legendre_large_order_weights() {
        let (x, w) = gauss_legendre(200);
        let s: f64 = w.iter().sum();
        assert_relative_eq!(s, 2.0, epsilon = 1e-12);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn kronrod_smooth() {
        let r = gauss_kronrod(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14);
        assert!(r.converged);
        assert_relative_eq!(r.value, 2.0, epsilon = 1e-13);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // Beta(0.25, 0.5) = Γ(.25)Γ(.5)/Γ(.75)
        let r = tanh_sinh(
            |_, da: f64, db: f64| da.powf(-0.75) * db.powf(-0.5),
            0.0,
            1.0,
            1e-13,
            1e-13,
        );
        assert!(r.converged, "{r:?}");
        assert_relative_eq!(r.value, 5.244_115_108_584_239, max_relative = 1e-11);
        let log = tanh_sinh(|_, da: f64, _| da.ln(), 0.0, 1.0, 1e-13, 1e-13);
        assert_relative_eq!(log.value, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn tanh_sinh_level_converges() {
        let exact = 1.0 - (-1.0f64).exp();
        let coarse = (tanh_sinh_level(|x, _, _| (-x).exp(), 0.0, 1.0, 1) - exact).abs();
        let fine = (tanh_sinh_level(|x, _, _| (-x).exp(), 0.0, 1.0, 4) - exact).abs();
        assert!(fine < coarse);
        assert!(fine < 1e-13);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert_relative_eq!(fx, 1.0, epsilon = 1e-15);
        let (x, _) = golden_section(|x| x, 0.0, 1.0, 1e-10);
        assert!(x < 1e-9);
    }
}

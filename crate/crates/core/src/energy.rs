//! Discrete Riesz energy, minimum-energy (Fekete) configurations and their
//! convergence diagnostics.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{kernel_sum, MeasureLabel, QuadratureMeasure};
use crate::optimize::{multistart, nelder_mead, projected_gradient, DescentOptions};
use crate::search::{minimize_on_set, SearchOptions};
use crate::sets::{dist, lerp, norm, Configuration, Point, SetDescriptor};
use crate::specfun::{riesz_kernel, wiener_constant, RieszParams};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyOptions {
    pub seed: u64,
    pub starts: usize,
    pub descent: DescentOptions,
    /// Infimum search for `inf_E U^{τ_n}`; the grid grows with `n`.
    pub search: SearchOptions,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 8,
            descent: DescentOptions::default(),
            search: SearchOptions::default(),
        }
    }
}

impl EnergyOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
}

/// A minimum-energy configuration with its energy and potential infimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub n: usize,
    /// `2/(n(n-1)) Σ_{j<k} |x_j - x_k|^(alpha-N)`.
    pub energy: f64,
    /// `inf_E (1/n) Σ_k |x - x_k|^(alpha-N)`.
    pub inf_potential: f64,
    pub witness: Point,
    pub config: Configuration,
    pub converged: bool,
    pub seed: u64,
    pub starts: usize,
}

/// Normalized pairwise energy of a configuration.
pub fn discrete_energy(config: &Configuration, params: &RieszParams) -> Result<f64> {
    let n = config.len();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "energy needs at least two points, got {n}"
        )));
    }
    let sum = pair_sum(config.points(), params.s());
    if !sum.is_finite() {
        return Err(Error::Singular("configuration has coincident points".into()));
    }
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

/// `Σ_{j<k} |x_j - x_k|^(-s)`.
fn pair_sum(points: &[Point], s: f64) -> f64 {
    let mut rows = Vec::with_capacity(points.len());
    for (j, p) in points.iter().enumerate() {
        let row: Vec<f64> = points[j + 1..].iter().map(|q| riesz_kernel(dist(p, q), s)).collect();
        rows.push(crate::quad::pairwise_sum(&row));
    }
    crate::quad::pairwise_sum(&rows)
}

/// Pair sum and its gradient with respect to the flattened coordinates.
fn pair_sum_grad(flat: &[f64], dim: usize, s: f64) -> (f64, Vec<f64>) {
    let n = flat.len() / dim;
    let mut f = 0.0;
    let mut g = vec![0.0; flat.len()];
    for j in 0..n {
        for k in j + 1..n {
            let mut r2 = 0.0;
            for i in 0..dim {
                let d = flat[j * dim + i] - flat[k * dim + i];
                r2 += d * d;
            }
            let r = r2.sqrt();
            let kr = riesz_kernel(r, s);
            f += kr;
            let c = -s * kr / r2;
            for i in 0..dim {
                let d = flat[j * dim + i] - flat[k * dim + i];
                g[j * dim + i] += c * d;
                g[k * dim + i] -= c * d;
            }
        }
    }
    (f, g)
}

/// Pair sum on a circle in terms of angles, with gradient.
fn circle_pair_sum_grad(theta: &[f64], radius: f64, s: f64) -> (f64, Vec<f64>) {
    let n = theta.len();
    let mut f = 0.0;
    let mut g = vec![0.0; n];
    for j in 0..n {
        for k in j + 1..n {
            let u = 0.5 * (theta[j] - theta[k]);
            let sh = u.sin();
            let kr = riesz_kernel(2.0 * radius * sh.abs(), s);
            f += kr;
            // d/dθ_j of (2r|sin u|)^(-s) = -(s/2) K cot(u)
            let d = -0.5 * s * kr * u.cos() / sh;
            g[j] += d;
            g[k] -= d;
        }
    }
    (f, g)
}

/// Minimum-energy `n`-point configuration on `set` over seeded multistarts.
///
/// Circles are parameterized by angles; spheres and balls use ambient
/// coordinates with a projection after every step; segments use the arc
/// parameter clamped to `[0, 1]`; finite sets are searched combinatorially.
pub fn minimize_discrete_energy(
    set: &SetDescriptor,
    n: usize,
    params: &RieszParams,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("need n >= 2, got {n}")));
    }
    if set.ambient_dim() != params.dim() {
        return Err(Error::InvalidParams(format!(
            "set lives in R^{} but params have N = {}",
            set.ambient_dim(),
            params.dim()
        )));
    }
    let s = params.s();
    let candidates: Vec<(Vec<Point>, bool)> = match set {
        SetDescriptor::Circle { radius } => {
            let r = *radius;
            multistart(opts.starts, opts.seed, |_, rng| {
                let theta: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
                let d = projected_gradient(|t| circle_pair_sum_grad(t, r, s), |_| {}, theta, &opts.descent);
                let pts = d.x.iter().map(|t| vec![r * t.cos(), r * t.sin()]).collect();
                (pts, d.converged)
            })
        }
        SetDescriptor::Sphere { dim, radius } => {
            let (dim, r) = (*dim, *radius);
            multistart(opts.starts, opts.seed, |_, rng| {
                let flat: Vec<f64> = (0..n).flat_map(|_| set.sample(rng)).collect();
                let fg = |x: &[f64]| {
                    let (f, mut g) = pair_sum_grad(x, dim, s);
                    tangent_project(x, &mut g, dim);
                    (f, g)
                };
                let retract = |x: &mut [f64]| {
                    for p in x.chunks_mut(dim) {
                        let k = r / norm(p);
                        p.iter_mut().for_each(|v| *v *= k);
                    }
                };
                let d = projected_gradient(fg, retract, flat, &opts.descent);
                (d.x.chunks(dim).map(|c| c.to_vec()).collect(), d.converged)
            })
        }
        SetDescriptor::Ball { dim, .. } => {
            let dim = *dim;
            multistart(opts.starts, opts.seed, |_, rng| {
                let flat: Vec<f64> = (0..n).flat_map(|_| set.sample(rng)).collect();
                let retract = |x: &mut [f64]| {
                    for p in x.chunks_mut(dim) {
                        let q = set.project(p);
                        p.copy_from_slice(&q);
                    }
                };
                let d = projected_gradient(|x| pair_sum_grad(x, dim, s), retract, flat, &opts.descent);
                (d.x.chunks(dim).map(|c| c.to_vec()).collect(), d.converged)
            })
        }
        SetDescriptor::Segment { a, b } => {
            let len = dist(a, b);
            multistart(opts.starts, opts.seed, |_, rng| {
                let t0: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let fg = |t: &[f64]| {
                    let scaled: Vec<f64> = t.iter().map(|v| v * len).collect();
                    let (f, g) = pair_sum_grad(&scaled, 1, s);
                    (f, g.iter().map(|v| v * len).collect())
                };
                let clamp = |t: &mut [f64]| t.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
                let mut d = projected_gradient(fg, clamp, t0, &opts.descent);
                if n <= 6 {
                    let obj = |t: &[f64]| {
                        let mut c = t.to_vec();
                        clamp(&mut c);
                        fg(&c).0
                    };
                    let (x, v) = nelder_mead(obj, &d.x, 1e-3, 4000, 1e-16);
                    if v < d.value {
                        d.x = x;
                        clamp(&mut d.x);
                    }
                }
                (d.x.iter().map(|t| lerp(a, b, *t)).collect(), d.converged)
            })
        }
        SetDescriptor::FinitePoints { points } => vec![finite_set_minimizer(points, n, s, opts)?],
    };
    let mut best: Option<(f64, Configuration, bool)> = None;
    for (pts, converged) in candidates {
        let config = Configuration::projected(pts, set.clone())?.canonical();
        let e = pair_sum(config.points(), s);
        if !e.is_finite() {
            continue;
        }
        let better = match &best {
            None => true,
            Some((be, bc, _)) => {
                let tie = (e - be).abs() <= 1e-14 * be.abs();
                if tie {
                    canonical_less(&config, bc)
                } else {
                    e < *be
                }
            }
        };
        if better {
            best = Some((e, config, converged));
        }
    }
    let (_, config, converged) =
        best.ok_or_else(|| Error::Singular("every start collapsed onto coincident points".into()))?;
    let energy = discrete_energy(&config, params)?;
    let search = opts.search.clone().with_grid(opts.search.grid.max(64 * n));
    let (inf_potential, witness) = counting_potential_infimum(set, &config, s, &search)?;
    Ok(EnergyReport {
        n,
        energy,
        inf_potential,
        witness,
        config,
        converged,
        seed: opts.seed,
        starts: opts.starts,
    })
}

fn canonical_less(a: &Configuration, b: &Configuration) -> bool {
    let fa = a.points().iter().flatten();
    let fb = b.points().iter().flatten();
    for (x, y) in fa.zip(fb) {
        if x != y {
            return x < y;
        }
    }
    false
}

/// Remove the radial component of each point's gradient block.
fn tangent_project(x: &[f64], g: &mut [f64], dim: usize) {
    for (p, gp) in x.chunks(dim).zip(g.chunks_mut(dim)) {
        let pp: f64 = p.iter().map(|v| v * v).sum();
        let pg: f64 = p.iter().zip(gp.iter()).map(|(a, b)| a * b).sum();
        let k = pg / pp;
        for (gi, pi) in gp.iter_mut().zip(p) {
            *gi -= k * pi;
        }
    }
}

const MAX_ENUMERATION: usize = 50_000;

fn binomial(n: usize, k: usize) -> usize {
    let mut c: usize = 1;
    for i in 0..k {
        c = c.saturating_mul(n - i) / (i + 1);
    }
    c
}

/// Best `n`-subset of a finite set: exhaustive when small, otherwise seeded
/// swap descent.
fn finite_set_minimizer(points: &[Point], n: usize, s: f64, opts: &EnergyOptions) -> Result<(Vec<Point>, bool)> {
    let mut distinct: Vec<Point> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| dist(p, q) == 0.0) {
            distinct.push(p.clone());
        }
    }
    let k = distinct.len();
    if n > k {
        return Err(Error::Precondition(format!(
            "finite set has {k} distinct points, asked for {n}"
        )));
    }
    let energy_of = |idx: &[usize]| {
        let pts: Vec<Point> = idx.iter().map(|&i| distinct[i].clone()).collect();
        pair_sum(&pts, s)
    };
    if binomial(k, n) <= MAX_ENUMERATION {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut best = (energy_of(&idx), idx.clone());
        while next_combination(&mut idx, k) {
            let e = energy_of(&idx);
            if e < best.0 {
                best = (e, idx.clone());
            }
        }
        return Ok((best.1.iter().map(|&i| distinct[i].clone()).collect(), true));
    }
    let runs = multistart(opts.starts, opts.seed, |_, rng| {
        let mut pool: Vec<usize> = (0..k).collect();
        for i in 0..n {
            let j = rng.gen_range(i..k);
            pool.swap(i, j);
        }
        let mut e = energy_of(&pool[..n]);
        loop {
            let mut improved = false;
            for i in 0..n {
                for j in n..k {
                    pool.swap(i, j);
                    let ej = energy_of(&pool[..n]);
                    if ej < e {
                        e = ej;
                        improved = true;
                    } else {
                        pool.swap(i, j);
                    }
                }
            }
            if !improved {
                break;
            }
        }
        (e, pool[..n].to_vec())
    });
    let best = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, idx)| idx)
        .unwrap_or_default();
    Ok((best.iter().map(|&i| distinct[i].clone()).collect(), false))
}

fn next_combination(idx: &mut [usize], k: usize) -> bool {
    let n = idx.len();
    let mut i = n;
    while i > 0 {
        i -= 1;
        if idx[i] < k - n + i {
            idx[i] += 1;
            for j in i + 1..n {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `inf_E (1/n) Σ_k |x - x_k|^(-s)` with its witness; atoms are excluded.
pub fn counting_potential_infimum(
    set: &SetDescriptor,
    config: &Configuration,
    s: f64,
    search: &SearchOptions,
) -> Result<(f64, Point)> {
    let mu = QuadratureMeasure::uniform(config.points().to_vec(), 1.0, MeasureLabel::FeketeApprox)?;
    let r = minimize_on_set(set, |x| kernel_sum(&mu, s, x), config.points(), search);
    Ok((r.value, r.point))
}

/// One row of the convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeRow {
    pub n: usize,
    pub energy: f64,
    pub inf_potential: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeTable {
    pub rows: Vec<FeketeRow>,
    pub wiener: Option<f64>,
    /// Energies nondecreasing along the table.
    pub monotone: bool,
    /// `E[τ_n] <= inf U^{τ_n} <= W` at every row (`None` without a closed-form `W`).
    pub sandwich: Option<bool>,
    pub violations: Vec<String>,
    pub seed: u64,
}

/// Slack allowed in the sandwich comparisons, relative to `W`.
pub const SANDWICH_TOL: f64 = 1e-9;

/// Minimum-energy configurations for each `n` with the monotonicity and
/// sandwich checks.
pub fn fekete_convergence_diagnostics(
    set: &SetDescriptor,
    params: &RieszParams,
    n_list: &[usize],
    opts: &EnergyOptions,
) -> Result<FeketeTable> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("n_list must be strictly increasing".into()));
    }
    let wiener = match wiener_constant(set, params) {
        Ok(w) => Some(w),
        Err(Error::NoClosedForm(_)) => None,
        Err(e) => return Err(e),
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let r = minimize_discrete_energy(set, n, params, opts)?;
        rows.push(FeketeRow {
            n,
            energy: r.energy,
            inf_potential: r.inf_potential,
            converged: r.converged,
        });
    }
    let mut violations = Vec::new();
    for w in rows.windows(2) {
        if w[1].energy < w[0].energy {
            violations.push(format!(
                "energy decreased from n={} ({}) to n={} ({}): optimizer failure",
                w[0].n, w[0].energy, w[1].n, w[1].energy
            ));
        }
    }
    let monotone = violations.is_empty();
    let sandwich = wiener.map(|w| {
        let tol = SANDWICH_TOL * w.abs().max(1.0);
        let mut ok = true;
        for r in &rows {
            if r.energy > r.inf_potential + tol || r.inf_potential > w + tol {
                ok = false;
                violations.push(format!(
                    "n={}: E={} inf U={} W={} breaks E <= inf U <= W",
                    r.n, r.energy, r.inf_potential, w
                ));
            }
        }
        ok
    });
    Ok(FeketeTable {
        rows,
        wiener,
        monotone,
        sandwich,
        violations,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{mat_vec, random_orthogonal};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(dim: usize, alpha: f64) -> RieszParams {
        RieszParams::new(dim, alpha).unwrap()
    }

    fn equally_spaced(n: usize) -> Configuration {
        let angles: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Configuration::on_circle(1.0, &angles).unwrap()
    }

    #[test]
    fn small_energies() {
        let two = Configuration::new(
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]],
            SetDescriptor::ball(3, 1.0).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(discrete_energy(&two, &p(3, 2.0)).unwrap(), 1.0);
        let three = equally_spaced(3);
        // brute force: all three pairs at distance √3
        assert_relative_eq!(
            discrete_energy(&three, &p(2, 1.0)).unwrap(),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-14
        );
        let dup = Configuration::new(
            vec![vec![1.0, 0.0], vec![1.0, 0.0]],
            SetDescriptor::circle(1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(discrete_energy(&dup, &p(2, 1.0)), Err(Error::Singular(_))));
    }

    #[test]
    fn circle_minimizers_are_equally_spaced() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        let params = p(2, 1.5);
        for n in 2..=12 {
            let r = minimize_discrete_energy(&circle, n, &params, &EnergyOptions::default().with_seed(7)).unwrap();
            let oracle = discrete_energy(&equally_spaced(n), &params).unwrap();
            assert!((r.energy - oracle).abs() <= 1e-8, "n={n}: {} vs {oracle}", r.energy);
            // midpoint potential oracle for the infimum
            let mid = [(PI / n as f64).cos(), (PI / n as f64).sin()];
            let mu = QuadratureMeasure::uniform(equally_spaced(n).into_points(), 1.0, MeasureLabel::Atomic).unwrap();
            assert_relative_eq!(r.inf_potential, kernel_sum(&mu, params.s(), &mid), max_relative = 1e-8);
        }
    }

    #[test]
    fn sphere_pair_is_antipodal() {
        let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
        let r = minimize_discrete_energy(&sphere, 2, &p(3, 2.0), &EnergyOptions::default()).unwrap();
        assert_relative_eq!(r.energy, 0.5, epsilon = 1e-12);
        assert!(dist(&r.config.points()[0], &r.config.points()[1]) > 2.0 - 1e-9);
    }

    #[test]
    fn segment_three_points_use_both_endpoints() {
        let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let params = p(2, 1.5);
        let r = minimize_discrete_energy(&seg, 3, &params, &EnergyOptions::default()).unwrap();
        // brute-force grid over ordered arclength triples
        let g = 400;
        let mut best = f64::INFINITY;
        for i in 0..=g {
            for j in i + 1..=g {
                for k in j + 1..=g {
                    let t = [i, j, k].map(|v| -1.0 + 2.0 * v as f64 / g as f64);
                    let e = riesz_kernel(t[1] - t[0], 0.5)
                        + riesz_kernel(t[2] - t[0], 0.5)
                        + riesz_kernel(t[2] - t[1], 0.5);
                    best = best.min(e);
                }
            }
        }
        assert!(r.energy <= 2.0 * best / 6.0 + 1e-12);
        let xs: Vec<f64> = r.config.points().iter().map(|p| p[0]).collect();
        assert!(xs.iter().any(|x| (x + 1.0).abs() < 1e-12));
        assert!(xs.iter().any(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn two_points_give_the_diameter() {
        for set in [
            SetDescriptor::ball(3, 1.0).unwrap(),
            SetDescriptor::segment(vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 2.0]).unwrap(),
            SetDescriptor::finite_points(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 4.0]]).unwrap(),
        ] {
            let params = p(3, 1.5);
            let r = minimize_discrete_energy(&set, 2, &params, &EnergyOptions::default()).unwrap();
            assert_relative_eq!(r.energy, params.kernel(set.diameter()), max_relative = 1e-10);
        }
    }

    #[test]
    fn fekete_table_circle_and_ball() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        let t = fekete_convergence_diagnostics(&circle, &p(2, 1.5), &[4, 8, 16], &EnergyOptions::default()).unwrap();
        assert!(t.monotone && t.sandwich == Some(true), "{t:?}");
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let t = fekete_convergence_diagnostics(&ball, &p(3, 2.0), &[8, 16], &EnergyOptions::default().with_starts(4))
            .unwrap();
        for r in &t.rows {
            assert!(r.inf_potential <= 1.0 + 1e-9);
        }
        assert!(fekete_convergence_diagnostics(&ball, &p(3, 2.0), &[8, 4], &EnergyOptions::default()).is_err());
    }

    #[test]
    fn selection_does_not_depend_on_threads() {
        let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
        let opts = EnergyOptions::default().with_seed(3).with_starts(4);
        let a = minimize_discrete_energy(&sphere, 6, &p(3, 1.5), &opts).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| minimize_discrete_energy(&sphere, 6, &p(3, 1.5), &opts).unwrap());
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn energy_is_homogeneous_and_isometry_invariant(seed in 0u64..10_000, lambda in 0.1f64..10.0, alpha in 0.3f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
            let pts: Vec<Point> = (0..6).map(|_| sphere.sample(&mut rng)).collect();
            let params = p(3, alpha);
            let config = Configuration::new(pts.clone(), sphere.clone()).unwrap();
            let e = discrete_energy(&config, &params).unwrap();
            let q = random_orthogonal(3, &mut rng);
            let rotated = Configuration::projected(pts.iter().map(|x| mat_vec(&q, x)).collect(), sphere).unwrap();
            let er = discrete_energy(&rotated, &params).unwrap();
            prop_assert!((e - er).abs() <= 1e-12 * e);
            let big = SetDescriptor::sphere(3, lambda).unwrap();
            let scaled = Configuration::projected(pts.iter().map(|x| x.iter().map(|v| v * lambda).collect()).collect(), big).unwrap();
            let es = discrete_energy(&scaled, &params).unwrap();
            prop_assert!((es - lambda.powf(alpha - 3.0) * e).abs() <= 1e-11 * es);
        }
    }
}

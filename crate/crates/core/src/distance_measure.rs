//! Measures whose Newtonian potential is the farthest-distance function
//! `d_E^(2-N)`, and the ball-averaging mass check.
//!
//! Ball (`N >= 3`): radial mass `(N-1) r^(N-2) (1+r)^(-N) dr`, uniform in
//! direction, obtained from `-Δ (1+|x|)^(2-N) / ((N-2) ω_N)`. With
//! `r = t/(1-t)` the radial mass becomes `(N-1) t^(N-2) dt` on `[0, 1]`.
//!
//! Segment `[-e_N, e_N]` (`N >= 3`): density `c (1+|y|^2)^(-N/2)` on the
//! hyperplane `x_N = 0` with `c = Γ(N/2) / π^(N/2)`. With `|y| = tan ψ`
//! the radial mass is proportional to `sin^(N-2) ψ dψ` on `[0, π/2]`.
//!
//! Both maps send the unbounded support to a compact parameter range, so no
//! truncation is needed.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ball_riesz_measure, sphere_rule, Density, MeasureLabel, QuadratureMeasure};
use crate::quad::{self, pairwise_sum};
use crate::sets::{add, norm, random_unit, scale, Point, SetDescriptor};
use crate::specfun::{c_factor, gamma, sine_power_integral, sphere_area, RieszParams};

/// Tanh-sinh level used for potentials when no resolution is requested.
pub const DEFAULT_LEVEL: u32 = 7;

/// Unit mass tolerance.
pub const SIGMA_MASS_TOL: f64 = 1e-8;

/// A representing measure together with its set and normalizing constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaMeasure {
    pub underlying: QuadratureMeasure,
    pub set: SetDescriptor,
    /// Constant `c` of the density (per unit radius and unit solid angle for
    /// the ball, per unit hyperplane area for the segment).
    pub normalization: f64,
}

impl SigmaMeasure {
    pub fn mass(&self) -> f64 {
        self.underlying.total_mass()
    }

    pub fn dim(&self) -> usize {
        self.set.ambient_dim()
    }

    /// Newtonian potential at `x` by one-dimensional quadrature at `level`.
    pub fn potential(&self, x: &[f64], level: u32) -> Result<f64> {
        match self.set {
            SetDescriptor::Ball { dim, .. } => Ok(sigma_ball_potential_at_level(dim, norm(x), level)),
            SetDescriptor::Segment { .. } => sigma_segment_potential(self.dim(), x, level),
            _ => Err(Error::Unsupported(
                "representing measures exist for the unit ball and segment".into(),
            )),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::Domain(format!(
            "Newtonian representing measures need N >= 3, got {dim}"
        )));
    }
    Ok(())
}

/// Representing measure of the unit ball in `R^dim` discretized with about
/// `resolution` nodes.
pub fn sigma_for_ball(dim: usize, resolution: usize) -> Result<SigmaMeasure> {
    check_dim(dim)?;
    let nr = ((resolution as f64).cbrt().round() as usize).max(4);
    let na = (resolution / nr).max(4);
    let (t, wt) = quad::gauss_legendre_on(0.0, 1.0, nr);
    let (dirs, wd) = sphere_rule(dim, 1.0, na);
    let k = dim as f64 - 1.0;
    let mut nodes = Vec::with_capacity(nr * dirs.len());
    let mut weights = Vec::with_capacity(nr * dirs.len());
    for (ti, wi) in t.iter().zip(&wt) {
        let r = ti / (1.0 - ti);
        let radial = k * ti.powi(dim as i32 - 2) * wi;
        for (d, w) in dirs.iter().zip(&wd) {
            nodes.push(scale(d, r));
            weights.push(radial * w);
        }
    }
    let underlying =
        QuadratureMeasure::new(nodes, weights, MeasureLabel::Sigma)?.with_density(Density::SigmaBall { dim });
    Ok(SigmaMeasure {
        underlying,
        set: SetDescriptor::ball(dim, 1.0)?,
        normalization: k / sphere_area(dim),
    })
}

/// Representing measure of the segment `[-e_N, e_N]` discretized with about
/// `resolution` nodes.
pub fn sigma_for_segment(dim: usize, resolution: usize) -> Result<SigmaMeasure> {
    check_dim(dim)?;
    let nr = ((resolution as f64).sqrt().round() as usize).max(4);
    let na = (resolution / nr).max(4);
    let (psi, wpsi) = quad::gauss_legendre_on(0.0, FRAC_PI_2, nr);
    let (dirs, wd) = sphere_rule(dim - 1, 1.0, na);
    let radial: Vec<f64> = psi
        .iter()
        .zip(&wpsi)
        .map(|(p, w)| p.sin().powi(dim as i32 - 2) * w)
        .collect();
    let radial_mass = pairwise_sum(&radial);
    let mut nodes = Vec::with_capacity(nr * dirs.len());
    let mut weights = Vec::with_capacity(nr * dirs.len());
    for (p, wr) in psi.iter().zip(&radial) {
        let rho = p.tan();
        for (d, w) in dirs.iter().zip(&wd) {
            let mut x = scale(d, rho);
            x.push(0.0);
            nodes.push(x);
            weights.push(wr / radial_mass * w);
        }
    }
    let n = dim as f64;
    let c = gamma(0.5 * n)? / PI.powf(0.5 * n);
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    a[dim - 1] = -1.0;
    b[dim - 1] = 1.0;
    let underlying =
        QuadratureMeasure::new(nodes, weights, MeasureLabel::Sigma)?.with_density(Density::SigmaSegment { dim });
    Ok(SigmaMeasure {
        underlying,
        set: SetDescriptor::segment(a, b)?,
        normalization: c,
    })
}

/// Closed-form potential of the ball representing measure at `|x| = r`.
pub fn sigma_ball_potential(dim: usize, r: f64) -> f64 {
    // shell theorem: U = ∫ (N-1) t^(N-2) max(r, t/(1-t))^(2-N) dt
    let k = dim as i32 - 1;
    let ts = r / (1.0 + r);
    let inner = if r > 0.0 {
        ts.powi(k) * r.powi(2 - dim as i32)
    } else {
        0.0
    };
    inner + (1.0 - ts).powi(k)
}

/// The same potential by tanh-sinh quadrature of the shell-theorem integral.
pub fn sigma_ball_potential_at_level(dim: usize, r: f64, level: u32) -> f64 {
    let k = dim as f64 - 1.0;
    let e = dim as i32 - 2;
    let ts = r / (1.0 + r);
    let inner = if ts > 0.0 {
        quad::tanh_sinh_level(|t, _, _| k * t.powi(e) * r.powi(-e), 0.0, ts, level)
    } else {
        0.0
    };
    // max(r, t/(1-t))^(2-N) t^(N-2) = (1-t)^(N-2) beyond t*
    let outer = quad::tanh_sinh_level(|_, _, rest| k * rest.powi(e), ts, 1.0, level);
    inner + outer
}

/// Potential of the segment representing measure by nested tanh-sinh
/// quadrature: an outer integral over `ψ` and the average over directions
/// in the hyperplane.
pub fn sigma_segment_potential(dim: usize, x: &[f64], level: u32) -> Result<f64> {
    check_dim(dim)?;
    if x.len() != dim {
        return Err(Error::InvalidParams(format!(
            "point has {} coordinates, expected {dim}",
            x.len()
        )));
    }
    let a = norm(&x[..dim - 1]);
    let z2 = x[dim - 1] * x[dim - 1];
    let e = -0.5 * (dim as f64 - 2.0);
    let ka = dim as i32 - 3;
    let ang_norm = sine_power_integral(dim - 3);
    let avg = |rho: f64| -> f64 {
        let diff = rho - a;
        if rho * a == 0.0 {
            return (diff * diff + z2).powf(e);
        }
        let f = |_: f64, beta: f64, rest: f64| {
            let sb = (0.5 * beta).sin();
            let q = diff * diff + z2 + 4.0 * rho * a * sb * sb;
            if q == 0.0 {
                return 0.0;
            }
            let sin_beta = if beta < rest { beta.sin() } else { rest.sin() };
            q.powf(e) * sin_beta.powi(ka)
        };
        quad::tanh_sinh_level(f, 0.0, PI, level) / ang_norm
    };
    let k = dim as i32 - 2;
    let outer = |_: f64, psi: f64, rest: f64| {
        // cos ψ = sin(π/2 - ψ), accurate near π/2
        let rho = psi.sin() / rest.sin();
        psi.sin().powi(k) * avg(rho)
    };
    let total = sine_power_integral(dim - 2) / 2.0;
    let value = if a > 0.0 {
        let split = a.atan();
        let left = quad::tanh_sinh_level(|p, _, _| outer(p, p, FRAC_PI_2 - p), 0.0, split, level);
        let right = quad::tanh_sinh_level(|p, _, rest| outer(p, p, rest), split, FRAC_PI_2, level);
        left + right
    } else {
        quad::tanh_sinh_level(|p, _, rest| outer(p, p, rest), 0.0, FRAC_PI_2, level)
    };
    Ok(value / total)
}

/// One test point of the identity check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityPoint {
    pub x: Point,
    pub potential: f64,
    pub target: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub points: Vec<IdentityPoint>,
    pub max_rel_error: f64,
    pub mass: f64,
    pub level: u32,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error <= tol && (self.mass - 1.0).abs() <= SIGMA_MASS_TOL
    }
}

/// Compare `U^σ` with `d_E^(2-N)` at each test point.
pub fn verify_potential_identity(
    sigma: &SigmaMeasure,
    params: &RieszParams,
    test_points: &[Point],
    level: u32,
) -> Result<IdentityReport> {
    if params.dim() != sigma.dim() || params.alpha() != 2.0 {
        return Err(Error::InvalidParams(format!(
            "identity check is Newtonian in R^{}; got N={}, alpha={}",
            sigma.dim(),
            params.dim(),
            params.alpha()
        )));
    }
    let mut points = Vec::with_capacity(test_points.len());
    for x in test_points {
        let potential = sigma.potential(x, level)?;
        let target = params.kernel(sigma.set.farthest_distance(x));
        points.push(IdentityPoint {
            x: x.clone(),
            potential,
            target,
            rel_error: (potential - target).abs() / target,
        });
    }
    let max_rel_error = points.iter().map(|p| p.rel_error).fold(0.0, f64::max);
    Ok(IdentityReport {
        points,
        max_rel_error,
        mass: sigma.mass(),
        level,
    })
}

/// Seeded test points uniform in the ball of the given radius.
pub fn test_points(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.gen();
            scale(&random_unit(dim, &mut rng), radius * u.powf(1.0 / dim as f64))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingRow {
    pub radius: f64,
    /// `M(R) = ∫ d_E^(alpha-N) dτ_R`.
    pub mean: f64,
    /// `R^(N-alpha) M(R) / c(N, alpha)`.
    pub ratio: f64,
    /// `(R / (R + diam))^(N-alpha) / c(N, alpha)`.
    pub lower_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingTable {
    pub rows: Vec<AveragingRow>,
    pub center: Point,
    /// Ratios increase with `R`.
    pub monotone: bool,
    /// `lower_bound <= ratio <= 1` at every row, up to quadrature error.
    pub bounded: bool,
}

/// Average `d_E^(alpha-N)` against the equilibrium measure `τ_R` of the ball
/// of radius `R` centered at a point of `E` (the origin when it lies in `E`).
pub fn averaging_mass_check(
    set: &SetDescriptor,
    params: &RieszParams,
    r_list: &[f64],
    resolution: usize,
) -> Result<AveragingTable> {
    if set.ambient_dim() != params.dim() {
        return Err(Error::InvalidParams("set and params dimensions differ".into()));
    }
    let alpha = params.alpha();
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!(
            "averaging check needs 0 < alpha <= 2, got {alpha}"
        )));
    }
    let diam = set.diameter();
    if let Some(r) = r_list.iter().find(|r| !(**r > diam)) {
        return Err(Error::Precondition(format!("radius {r} must exceed diam(E) = {diam}")));
    }
    let dim = params.dim();
    let origin = vec![0.0; dim];
    let center = if set.contains(&origin, 1e-12) {
        origin
    } else {
        set.anchor_point()
    };
    let c = c_factor(params)?;
    let s = params.s();
    let mut rows = Vec::with_capacity(r_list.len());
    for &radius in r_list {
        let tau = if alpha == 2.0 {
            let (nodes, weights) = sphere_rule(dim, radius, resolution);
            QuadratureMeasure::new(nodes, weights, MeasureLabel::BallEquilibrium)?
        } else {
            ball_riesz_measure(dim, radius, alpha, resolution)?
        };
        let terms: Vec<f64> = tau
            .nodes()
            .iter()
            .zip(tau.weights())
            .map(|(y, w)| w * set.farthest_distance(&add(&center, y)).powf(-s))
            .collect();
        let mean = pairwise_sum(&terms);
        rows.push(AveragingRow {
            radius,
            mean,
            ratio: radius.powf(s) * mean / c,
            lower_bound: (radius / (radius + diam)).powf(s) / c,
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].ratio >= w[0].ratio || w[1].radius <= w[0].radius);
    let bounded = rows
        .iter()
        .all(|r| r.ratio <= 1.0 + 1e-9 && r.ratio >= r.lower_bound - 1e-9);
    Ok(AveragingTable {
        rows,
        center,
        monotone,
        bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn newton(dim: usize) -> RieszParams {
        RieszParams::new(dim, 2.0).unwrap()
    }

    #[test]
    fn ball_sigma_values() {
        let sigma = sigma_for_ball(3, 2000).unwrap();
        assert!((sigma.mass() - 1.0).abs() < SIGMA_MASS_TOL);
        assert_relative_eq!(sigma.potential(&[0.0; 3], DEFAULT_LEVEL).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(
            sigma.potential(&[2.0, 0.0, 0.0], DEFAULT_LEVEL).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(sigma.normalization, 2.0 / (4.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn ball_radial_mass_is_a_beta_integral() {
        // ∫_0^∞ r^(N-2) (1+r)^(-N) dr = B(N-1, 1) = 1/(N-1)
        for dim in 3..=6 {
            let k = dim as i32;
            // [0, 1] directly, [1, ∞) through r = 1/v
            let near = quad::gauss_kronrod(|r| r.powi(k - 2) * (1.0 + r).powi(-k), 0.0, 1.0, 0.0, 1e-14).value;
            let far = quad::gauss_kronrod(|v| (1.0 + v).powi(-k), 0.0, 1.0, 0.0, 1e-14).value;
            let v = near + far;
            assert_relative_eq!(v, 1.0 / (dim as f64 - 1.0), max_relative = 1e-12);
            let sigma = sigma_for_ball(dim, 500).unwrap();
            assert!((sigma.mass() - 1.0).abs() < SIGMA_MASS_TOL);
        }
    }

    #[test]
    fn closed_form_and_quadrature_ball_potential_agree() {
        for dim in 3..=6 {
            for r in [0.0, 0.1, 1.0, 4.0, 1e3] {
                assert_relative_eq!(
                    sigma_ball_potential(dim, r),
                    sigma_ball_potential_at_level(dim, r, DEFAULT_LEVEL),
                    max_relative = 1e-12
                );
                assert_relative_eq!(
                    sigma_ball_potential(dim, r),
                    (1.0 + r).powi(2 - dim as i32),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn segment_sigma_values() {
        let sigma = sigma_for_segment(3, 2000).unwrap();
        assert!((sigma.mass() - 1.0).abs() < SIGMA_MASS_TOL);
        assert_relative_eq!(sigma.normalization, 1.0 / (2.0 * PI), epsilon = 1e-15);
        // ∫_0^∞ (1+u)^(-3/2) (4+u)^(-1/2) du / 2 = 1/3
        assert_relative_eq!(
            sigma.potential(&[0.0, 0.0, 2.0], DEFAULT_LEVEL).unwrap(),
            1.0 / 3.0,
            max_relative = 1e-10
        );
        let far = sigma.potential(&[1e3, 0.0, 0.0], DEFAULT_LEVEL).unwrap();
        assert!((far * 1e3 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn segment_mass_constant_matches_beta_form() {
        for dim in 3..=6 {
            let n = dim as f64;
            let c = gamma(0.5 * n).unwrap() / PI.powf(0.5 * n);
            // c · ω_(N-1) · ∫_0^∞ ρ^(N-2) (1+ρ^2)^(-N/2) dρ, the radial integral being B((N-1)/2, 1/2)/2
            let beta = gamma(0.5 * (n - 1.0)).unwrap() * gamma(0.5).unwrap() / gamma(0.5 * n).unwrap() / 2.0;
            assert_relative_eq!(c * sphere_area(dim - 1) * beta, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn identity_holds_at_random_points() {
        let pts = test_points(3, 20, 5.0, 17);
        let ball = sigma_for_ball(3, 2000).unwrap();
        let r = verify_potential_identity(&ball, &newton(3), &pts, DEFAULT_LEVEL).unwrap();
        assert!(r.passes(1e-3), "{:?}", r.max_rel_error);
        let seg = sigma_for_segment(3, 2000).unwrap();
        let r = verify_potential_identity(&seg, &newton(3), &pts, DEFAULT_LEVEL).unwrap();
        assert!(r.passes(1e-3), "{:?}", r.max_rel_error);
        // on the axis the target is (|x_N| + 1)^(-1)
        let axis: Vec<Point> = [1.5, 3.0, -4.0].iter().map(|z| vec![0.0, 0.0, *z]).collect();
        let r = verify_potential_identity(&seg, &newton(3), &axis, DEFAULT_LEVEL).unwrap();
        assert!(r.max_rel_error < 1e-9);
        // on the supporting hyperplane
        let plane = vec![vec![0.7, -0.2, 0.0], vec![3.0, 0.0, 0.0]];
        let r = verify_potential_identity(&seg, &newton(3), &plane, DEFAULT_LEVEL).unwrap();
        assert!(r.max_rel_error < 1e-6, "{r:?}");
        let seg4 = sigma_for_segment(4, 500).unwrap();
        let r = verify_potential_identity(&seg4, &newton(4), &test_points(4, 5, 3.0, 1), DEFAULT_LEVEL).unwrap();
        assert!(r.max_rel_error < 1e-6, "{r:?}");
    }

    #[test]
    fn refinement_reduces_the_error() {
        let seg = sigma_for_segment(3, 100).unwrap();
        let pts = vec![vec![0.3, 0.4, 0.0], vec![0.5, 0.0, 0.2]];
        let mut prev = f64::INFINITY;
        for level in [2u32, 4, 6] {
            let e = verify_potential_identity(&seg, &newton(3), &pts, level)
                .unwrap()
                .max_rel_error;
            assert!(e <= (prev / 2.0).max(1e-12), "level {level}: {e} vs {prev}");
            prev = e;
        }
    }

    #[test]
    fn averaging_for_two_points_and_ball() {
        let two = SetDescriptor::finite_points(vec![vec![0.0; 3], vec![1.0, 0.0, 0.0]]).unwrap();
        let t = averaging_mass_check(&two, &newton(3), &[10.0, 100.0, 1000.0], 2000).unwrap();
        assert!(t.monotone && t.bounded, "{t:?}");
        assert!(t.rows[2].ratio >= 0.99);
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let params = RieszParams::new(3, 1.5).unwrap();
        let t = averaging_mass_check(&ball, &params, &[10.0, 100.0, 1000.0], 4000).unwrap();
        assert!(t.monotone && t.bounded, "{t:?}");
        assert!(t.rows[2].ratio > 0.99);
        assert!(matches!(
            averaging_mass_check(&two, &newton(3), &[0.5], 100),
            Err(Error::Precondition(_))
        ));
    }
}

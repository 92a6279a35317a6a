//! Measures as weighted node sets, Riesz potentials, equilibrium measures of
//! the catalog sets and the Frostman check.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance_measure;
use crate::energy::{self, EnergyOptions};
use crate::error::{Error, Result};
use crate::quad::{self, pairwise_sum};
use crate::sets::{dist, norm, random_unit, scale, sphere_points, Point, SetDescriptor};
use crate::specfun::{self, riesz_kernel, sine_power_integral, sphere_area, RieszParams};

/// Mass tolerance for the unit-mass contract.
pub const MASS_TOL: f64 = 1e-10;

/// Node counts above which kernel sums are evaluated in parallel.
const PAR_THRESHOLD: usize = 4096;

/// Fixed seed for Monte Carlo sphere rules in dimension four and up.
pub const SPHERE_MC_SEED: u64 = 0x5eed;

/// Where a measure came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureLabel {
    /// Discretization of a closed-form equilibrium measure.
    ClosedForm,
    /// Counting measure of (approximate) minimum-energy points.
    FeketeApprox,
    /// Discretization of a farthest-distance representing measure.
    Sigma,
    /// Discretization of the singular ball density.
    BallEquilibrium,
    /// User-supplied point masses.
    Atomic,
}

impl MeasureLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::FeketeApprox => "fekete-approx",
            Self::Sigma => "sigma",
            Self::BallEquilibrium => "ball-equilibrium",
            Self::Atomic => "atomic",
        }
    }
}

/// Closed-form density behind a discretized measure. Used to evaluate
/// potentials by one-dimensional quadrature instead of node sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// Normalized surface measure on the centered sphere (circle for `dim = 2`).
    UniformSphere { dim: usize, radius: f64 },
    /// `A R^(alpha-N) (R^2 - |x|^2)^(-alpha/2)` on the centered ball, `0 < alpha < 2`.
    BallRiesz { dim: usize, radius: f64, alpha: f64 },
    /// Newtonian representing measure of the unit ball.
    SigmaBall { dim: usize },
    /// Newtonian representing measure of `[-e_N, e_N]`.
    SigmaSegment { dim: usize },
}

impl Density {
    /// Potential of the unit-mass density for kernel exponent `s`.
    pub fn potential(&self, s: f64, x: &[f64]) -> Result<f64> {
        match *self {
            Density::UniformSphere { dim, radius } => Ok(shell_average(dim, snap_to_shell(norm(x), radius), radius, s)),
            Density::BallRiesz { dim, radius, alpha } => Ok(ball_riesz_potential(
                dim,
                radius,
                alpha,
                s,
                snap_to_shell(norm(x), radius),
            )),
            Density::SigmaBall { dim } => {
                newtonian_only(dim, s)?;
                Ok(distance_measure::sigma_ball_potential(dim, norm(x)))
            }
            Density::SigmaSegment { dim } => {
                newtonian_only(dim, s)?;
                distance_measure::sigma_segment_potential(dim, x, distance_measure::DEFAULT_LEVEL)
            }
        }
    }
}

fn newtonian_only(dim: usize, s: f64) -> Result<()> {
    if (s - (dim as f64 - 2.0)).abs() > 1e-12 {
        return Err(Error::Unsupported(
            "representing measures are available for alpha = 2 only".into(),
        ));
    }
    Ok(())
}

/// A finite positive measure given by nodes and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeasure {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    total_mass: f64,
    label: MeasureLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Density>,
}

impl QuadratureMeasure {
    pub fn new(nodes: Vec<Point>, weights: Vec<f64>, label: MeasureLabel) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidMeasure("measure has no nodes".into()));
        }
        let dim = nodes[0].len();
        if nodes.iter().any(|p| p.len() != dim || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidMeasure(
                "nodes must be finite and share one dimension".into(),
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidMeasure("weights must be finite and nonnegative".into()));
        }
        let total_mass = pairwise_sum(&weights);
        Ok(Self {
            nodes,
            weights,
            total_mass,
            label,
            density: None,
        })
    }

    /// Equal masses `mass / n` at the given points.
    pub fn uniform(nodes: Vec<Point>, mass: f64, label: MeasureLabel) -> Result<Self> {
        let n = nodes.len().max(1);
        Self::new(nodes, vec![mass / n as f64; n], label)
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.density = Some(density);
        self
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn label(&self) -> MeasureLabel {
        self.label
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.nodes[0].len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same nodes, weights multiplied by `k >= 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let mut out = Self::new(
            self.nodes.clone(),
            self.weights.iter().map(|w| w * k).collect(),
            self.label,
        )?;
        out.density = self.density;
        Ok(out)
    }

    /// Nodes mapped by `f`; the closed-form density is dropped.
    pub fn mapped<F: Fn(&[f64]) -> Point>(&self, f: F) -> Result<Self> {
        Self::new(
            self.nodes.iter().map(|p| f(p)).collect(),
            self.weights.clone(),
            self.label,
        )
    }

    /// Sum of measures, as a concatenation of nodes. A density shared by
    /// every part is kept.
    pub fn sum(parts: &[QuadratureMeasure]) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let label = parts.first().map(|p| p.label).unwrap_or(MeasureLabel::Atomic);
        for p in parts {
            nodes.extend(p.nodes.iter().cloned());
            weights.extend(p.weights.iter().copied());
        }
        let mut out = Self::new(nodes, weights, label)?;
        let first = parts.first().and_then(|p| p.density);
        if first.is_some() && parts.iter().all(|p| p.density == first) {
            out.density = first;
        }
        Ok(out)
    }

    /// Columnar form: header `x1,..,xN,weight`, one row per node.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        let _ = writeln!(out, "{},weight", header.join(","));
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            let coords: Vec<String> = p.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{},{w:e}", coords.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `Σ w_i |x - node_i|^(alpha-N)`.
///
/// Fails with [`Error::Singular`] if `x` coincides with a node of positive
/// weight.
pub fn potential(mu: &QuadratureMeasure, params: &RieszParams, x: &[f64]) -> Result<f64> {
    let v = kernel_sum(mu, params.s(), x);
    if v.is_infinite() {
        return Err(Error::Singular(format!("evaluation point {x:?} coincides with a node")));
    }
    Ok(v)
}

/// Node-sum potential for an arbitrary exponent; `+inf` at a node when `s > 0`.
pub fn kernel_sum(mu: &QuadratureMeasure, s: f64, x: &[f64]) -> f64 {
    let term = |(p, w): (&Point, &f64)| {
        if *w == 0.0 {
            0.0
        } else {
            w * riesz_kernel(dist(x, p), s)
        }
    };
    if mu.len() > PAR_THRESHOLD {
        let terms: Vec<f64> = mu.nodes.par_iter().zip(mu.weights.par_iter()).map(term).collect();
        pairwise_sum(&terms)
    } else {
        let terms: Vec<f64> = mu.nodes.iter().zip(mu.weights.iter()).map(term).collect();
        pairwise_sum(&terms)
    }
}

/// Potential using the closed-form density when the measure carries one,
/// the node sum otherwise.
pub fn accurate_potential(mu: &QuadratureMeasure, params: &RieszParams, x: &[f64]) -> Result<f64> {
    match mu.density {
        Some(d) => Ok(mu.total_mass * d.potential(params.s(), x)?),
        None => potential(mu, params, x),
    }
}

/// Average of `|x - t|^(-s)` over the sphere `|t| = rho` in `R^dim`, for
/// `|x| = r`.
pub fn shell_average(dim: usize, r: f64, rho: f64, s: f64) -> f64 {
    shell_average_with_gap(dim, r, rho, (rho - r).abs(), s)
}

/// [`shell_average`] with the gap `|rho - r|` supplied separately, so that
/// quadrature nodes next to `rho = r` keep their exact offset.
pub fn shell_average_with_gap(dim: usize, r: f64, rho: f64, diff: f64, s: f64) -> f64 {
    if r == 0.0 || rho == 0.0 {
        return riesz_kernel(r.max(rho), s);
    }
    if diff == 0.0 && s >= dim as f64 - 1.0 {
        return f64::INFINITY;
    }
    let sum = rho + r;
    let ratio = r.min(rho) / r.max(rho);
    if dim == 3 && ratio > 1e-4 {
        return if (s - 2.0).abs() < 1e-14 {
            (sum / diff).ln() / (2.0 * r * rho)
        } else {
            (sum.powf(2.0 - s) - diff.powf(2.0 - s)) / ((2.0 - s) * 2.0 * r * rho)
        };
    }
    let e = -0.5 * s;
    let k = dim as i32 - 2;
    let f = |_x: f64, beta: f64, rest: f64| {
        let sb = (0.5 * beta).sin();
        // cancellation-free form of r^2 + rho^2 - 2 r rho cos(beta)
        let q = diff * diff + 4.0 * rho * r * sb * sb;
        if q == 0.0 {
            return 0.0;
        }
        let sin_beta = if beta < rest { beta.sin() } else { rest.sin() };
        q.powf(e) * sin_beta.powi(k)
    };
    quad::tanh_sinh(f, 0.0, PI, 0.0, 1e-12).value / sine_power_integral(dim - 2)
}

/// Radii within a few ulps of the sphere radius are snapped onto it: the
/// potential is only Hölder continuous there, so rounding in `|x|` would
/// otherwise show up at the square root of machine precision.
fn snap_to_shell(r: f64, radius: f64) -> f64 {
    if (r - radius).abs() <= 8.0 * f64::EPSILON * radius {
        radius
    } else {
        r
    }
}

/// Normalizing constant `A` of the ball equilibrium density.
pub fn ball_density_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    specfun::gamma_real(0.5 * (n - alpha) + 1.0) / (PI.powf(0.5 * n) * specfun::gamma_real(1.0 - 0.5 * alpha))
}

/// Potential at `|x| = r` of the ball density for `0 < alpha < 2`, by
/// radial quadrature of shell averages split at `rho = r`.
fn ball_riesz_potential(dim: usize, radius: f64, alpha: f64, s: f64, r: f64) -> f64 {
    let n = dim as f64;
    let a = ball_density_constant(dim, alpha) * radius.powf(alpha - n) * sphere_area(dim);
    let mass = |rho: f64, to_end: f64| {
        // R^2 - rho^2 = (R - rho)(R + rho) with R - rho exact near the rim
        a * rho.powi(dim as i32 - 1) * (to_end * (radius + rho)).powf(-0.5 * alpha)
    };
    if r > 0.0 && r < radius {
        let inner = quad::tanh_sinh(
            |rho, _, gap| mass(rho, radius - rho) * shell_average_with_gap(dim, r, rho, gap, s),
            0.0,
            r,
            0.0,
            1e-12,
        );
        let outer = quad::tanh_sinh(
            |rho, gap, to_end| mass(rho, to_end) * shell_average_with_gap(dim, r, rho, gap, s),
            r,
            radius,
            0.0,
            1e-12,
        );
        inner.value + outer.value
    } else {
        quad::tanh_sinh(
            |rho, _, to_end| mass(rho, to_end) * shell_average(dim, r, rho, s),
            0.0,
            radius,
            0.0,
            1e-12,
        )
        .value
    }
}

/// Nodes and weights (summing to 1) for the normalized surface measure on
/// the sphere of the given radius in `R^dim`.
///
/// `dim = 2`: equally spaced points. `dim = 3`: Gauss–Legendre in the height
/// times an equally spaced azimuth grid. Higher dimensions: seeded Monte
/// Carlo.
pub fn sphere_rule(dim: usize, radius: f64, n: usize) -> (Vec<Point>, Vec<f64>) {
    let n = n.max(2);
    match dim {
        2 => {
            let nodes: Vec<Point> = sphere_points(2, n, 0).into_iter().map(|p| scale(&p, radius)).collect();
            (nodes, vec![1.0 / n as f64; n])
        }
        3 => {
            let nz = ((n as f64 / 2.0).sqrt().round() as usize).max(2);
            let nphi = (n / nz).max(3);
            let (z, wz) = quad::gauss_legendre(nz);
            let mut nodes = Vec::with_capacity(nz * nphi);
            let mut weights = Vec::with_capacity(nz * nphi);
            for (i, (zi, wi)) in z.iter().zip(&wz).enumerate() {
                let rho = (1.0 - zi * zi).max(0.0).sqrt();
                // stagger alternate rings
                let offset = if i % 2 == 0 { 0.0 } else { 0.5 };
                for j in 0..nphi {
                    let phi = 2.0 * PI * (j as f64 + offset) / nphi as f64;
                    nodes.push(vec![radius * rho * phi.cos(), radius * rho * phi.sin(), radius * zi]);
                    weights.push(0.5 * wi / nphi as f64);
                }
            }
            (nodes, weights)
        }
        _ => {
            let nodes: Vec<Point> = sphere_points(dim, n, SPHERE_MC_SEED)
                .into_iter()
                .map(|p| scale(&p, radius))
                .collect();
            (nodes, vec![1.0 / n as f64; n])
        }
    }
}

/// Minimum node budget for the singular ball density.
pub const BALL_MIN_RESOLUTION: usize = 64;

/// Discretization of the ball density `A R^(alpha-N) (R^2-|x|^2)^(-alpha/2)`
/// with roughly `n` nodes. Radii `r = R sqrt(1 - (1 - v^2)^q)`,
/// `q = 2/(2-alpha)`, make the radial weight bounded and smooth in `v`.
pub fn ball_riesz_measure(dim: usize, radius: f64, alpha: f64, n: usize) -> Result<QuadratureMeasure> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::Domain(format!("ball density needs 0 < alpha < 2, got {alpha}")));
    }
    if n < BALL_MIN_RESOLUTION {
        return Err(Error::InsufficientResolution(format!(
            "the singular ball density needs at least {BALL_MIN_RESOLUTION} nodes, got {n}"
        )));
    }
    let nr = if dim == 2 {
        (n as f64).sqrt().round() as usize
    } else {
        ((n as f64).cbrt().round() as usize).max(4)
    };
    let na = (n / nr).max(4);
    let q = 2.0 / (2.0 - alpha);
    let a = ball_density_constant(dim, alpha) * sphere_area(dim);
    let (v, wv) = quad::gauss_legendre_on(0.0, 1.0, nr);
    let (dirs, wdir) = sphere_rule(dim, 1.0, na);
    let mut nodes = Vec::with_capacity(nr * dirs.len());
    let mut weights = Vec::with_capacity(nr * dirs.len());
    for (vi, wi) in v.iter().zip(&wv) {
        let z = 1.0 - vi * vi;
        let t = 1.0 - z.powf(q);
        let r = radius * t.max(0.0).sqrt();
        let radial = a * 0.5 * q * t.max(0.0).powf(0.5 * (dim as f64 - 2.0)) * 2.0 * vi * wi;
        for (d, wd) in dirs.iter().zip(&wdir) {
            nodes.push(scale(d, r));
            weights.push(radial * wd);
        }
    }
    // the rule integrates the mass to quadrature accuracy; normalize exactly
    let total = pairwise_sum(&weights);
    for w in &mut weights {
        *w /= total;
    }
    Ok(
        QuadratureMeasure::new(nodes, weights, MeasureLabel::BallEquilibrium)?.with_density(Density::BallRiesz {
            dim,
            radius,
            alpha,
        }),
    )
}

/// Unit equilibrium measure of `set` with roughly `resolution` nodes.
///
/// Circle, sphere and the Newtonian ball carry uniform measures on the
/// (bounding) sphere; the ball with `0 < alpha < 2` carries its singular
/// radial density. Segments use the counting measure of minimum-energy
/// points (label `fekete-approx`); a finite set uses the counting measure of
/// its points.
pub fn equilibrium_measure(set: &SetDescriptor, params: &RieszParams, resolution: usize) -> Result<QuadratureMeasure> {
    if set.ambient_dim() != params.dim() {
        return Err(Error::InvalidParams(format!(
            "set lives in R^{} but params have N = {}",
            set.ambient_dim(),
            params.dim()
        )));
    }
    let alpha = params.alpha();
    match set {
        SetDescriptor::Circle { radius } => {
            let (nodes, weights) = sphere_rule(2, *radius, resolution);
            Ok(
                QuadratureMeasure::new(nodes, weights, MeasureLabel::ClosedForm)?.with_density(
                    Density::UniformSphere {
                        dim: 2,
                        radius: *radius,
                    },
                ),
            )
        }
        SetDescriptor::Sphere { dim, radius } => {
            let (nodes, weights) = sphere_rule(*dim, *radius, resolution);
            Ok(
                QuadratureMeasure::new(nodes, weights, MeasureLabel::ClosedForm)?.with_density(
                    Density::UniformSphere {
                        dim: *dim,
                        radius: *radius,
                    },
                ),
            )
        }
        SetDescriptor::Ball { dim, radius } => {
            if alpha == 2.0 {
                let (nodes, weights) = sphere_rule(*dim, *radius, resolution);
                Ok(
                    QuadratureMeasure::new(nodes, weights, MeasureLabel::BallEquilibrium)?.with_density(
                        Density::UniformSphere {
                            dim: *dim,
                            radius: *radius,
                        },
                    ),
                )
            } else if alpha > 0.0 && alpha < 2.0 {
                ball_riesz_measure(*dim, *radius, alpha, resolution)
            } else {
                Err(Error::Unsupported(format!(
                    "ball equilibrium measure needs 0 < alpha <= 2, got {alpha}"
                )))
            }
        }
        SetDescriptor::Segment { .. } => {
            let report = energy::minimize_discrete_energy(set, resolution.max(2), params, &EnergyOptions::default())?;
            QuadratureMeasure::uniform(report.config.into_points(), 1.0, MeasureLabel::FeketeApprox)
        }
        SetDescriptor::FinitePoints { points } => {
            let mut distinct: Vec<Point> = Vec::new();
            for p in points {
                if !distinct.iter().any(|q| dist(p, q) == 0.0) {
                    distinct.push(p.clone());
                }
            }
            QuadratureMeasure::uniform(distinct, 1.0, MeasureLabel::FeketeApprox)
        }
    }
}

/// Outcome of a Frostman check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub label: MeasureLabel,
    /// False when the measure is a surrogate or `W` has no closed form.
    pub certifiable: bool,
    pub wiener: Option<f64>,
    /// `max (U(x) - W)` over ambient samples.
    pub max_excess: Option<f64>,
    /// `max |U(x) - W|` over samples on the set.
    pub max_on_set_deviation: Option<f64>,
    pub samples_on_set: usize,
    pub samples_ambient: usize,
    /// `density` when potentials come from the closed-form density, `nodes` otherwise.
    pub method: String,
    pub seed: u64,
    pub note: Option<String>,
}

impl FrostmanReport {
    /// Both bounds hold within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.certifiable
            && self.max_excess.is_some_and(|v| v <= tol)
            && self.max_on_set_deviation.is_some_and(|v| v <= tol)
    }
}

/// Compare the potential of `mu` with `W_alpha(set)` at seeded samples:
/// half on the set, half in the ball of radius twice the set scale.
pub fn frostman_check(
    set: &SetDescriptor,
    params: &RieszParams,
    mu: &QuadratureMeasure,
    sample_budget: usize,
    seed: u64,
) -> Result<FrostmanReport> {
    if (mu.total_mass() - 1.0).abs() > MASS_TOL {
        return Err(Error::InvalidMeasure(format!(
            "expected unit mass, got {}",
            mu.total_mass()
        )));
    }
    let method = if mu.density().is_some() { "density" } else { "nodes" }.to_string();
    let mut report = FrostmanReport {
        label: mu.label(),
        certifiable: false,
        wiener: None,
        max_excess: None,
        max_on_set_deviation: None,
        samples_on_set: 0,
        samples_ambient: 0,
        method,
        seed,
        note: None,
    };
    if matches!(
        mu.label(),
        MeasureLabel::FeketeApprox | MeasureLabel::Atomic | MeasureLabel::Sigma
    ) {
        report.note = Some(format!(
            "{} measure is not a certified equilibrium measure",
            mu.label().as_str()
        ));
        return Ok(report);
    }
    let w = match specfun::wiener_constant(set, params) {
        Ok(w) => w,
        Err(Error::NoClosedForm(msg)) => {
            report.note = Some(msg);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = (sample_budget / 2).max(1);
    let on_set: Vec<Point> = (0..half).map(|_| set.sample(&mut rng)).collect();
    let dim = set.ambient_dim();
    let reach = 2.0 * set.scale();
    let ambient: Vec<Point> = (0..half)
        .map(|_| {
            let u: f64 = rng.gen();
            scale(&random_unit(dim, &mut rng), reach * u.powf(1.0 / dim as f64))
        })
        .collect();
    let eval =
        |pts: &[Point]| -> Result<Vec<f64>> { pts.par_iter().map(|x| accurate_potential(mu, params, x)).collect() };
    let u_on = eval(&on_set)?;
    let u_amb = eval(&ambient)?;
    let dev = u_on.iter().map(|u| (u - w).abs()).fold(0.0, f64::max);
    let excess = u_amb
        .iter()
        .chain(&u_on)
        .map(|u| u - w)
        .fold(f64::NEG_INFINITY, f64::max);
    report.certifiable = true;
    report.wiener = Some(w);
    report.max_excess = Some(excess);
    report.max_on_set_deviation = Some(dev);
    report.samples_on_set = on_set.len();
    report.samples_ambient = ambient.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{mat_vec, random_orthogonal};
    use crate::specfun::c_factor;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn p(dim: usize, alpha: f64) -> RieszParams {
        RieszParams::new(dim, alpha).unwrap()
    }

    #[test]
    fn point_mass_potentials() {
        let mu = QuadratureMeasure::new(vec![vec![0.0; 3]], vec![1.0], MeasureLabel::Atomic).unwrap();
        assert_relative_eq!(potential(&mu, &p(3, 2.0), &[2.0, 0.0, 0.0]).unwrap(), 0.5);
        assert!(matches!(potential(&mu, &p(3, 2.0), &[0.0; 3]), Err(Error::Singular(_))));
        let two = QuadratureMeasure::uniform(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], 1.0, MeasureLabel::Atomic).unwrap();
        assert_relative_eq!(
            potential(&two, &p(2, 1.0), &[0.0, 1.0]).unwrap(),
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn circle_measure_at_center() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        for alpha in [0.5, 1.25, 1.9] {
            let mu = equilibrium_measure(&circle, &p(2, alpha), 64).unwrap();
            assert_eq!(mu.len(), 64);
            assert!((mu.total_mass() - 1.0).abs() < 1e-14);
            assert_relative_eq!(potential(&mu, &p(2, alpha), &[0.0, 0.0]).unwrap(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn shell_average_closed_form_matches_quadrature() {
        // away from rho = r the integrand is smooth, so a plain Gauss–Legendre rule is an oracle
        let (b, w) = quad::gauss_legendre_on(0.0, PI, 200);
        for (r, rho, s) in [(0.3, 1.0, 1.5), (2.0, 1.0, 1.0), (0.5, 0.8, 2.0), (1.2, 0.4, 0.7)] {
            let brute: f64 = b
                .iter()
                .zip(&w)
                .map(|(bi, wi)| wi * (r * r + rho * rho - 2.0 * r * rho * bi.cos()).powf(-0.5 * s) * bi.sin())
                .sum::<f64>()
                / 2.0;
            assert_relative_eq!(shell_average(3, r, rho, s), brute, max_relative = 1e-12);
        }
        // generic branch in R^4 against the same brute rule
        for (r, rho, s) in [(0.3, 1.0, 1.5), (2.0, 1.0, 2.0)] {
            let brute: f64 = b
                .iter()
                .zip(&w)
                .map(|(bi, wi)| wi * (r * r + rho * rho - 2.0 * r * rho * bi.cos()).powf(-0.5 * s) * bi.sin().powi(2))
                .sum::<f64>()
                / (PI / 2.0);
            assert_relative_eq!(shell_average(4, r, rho, s), brute, max_relative = 1e-12);
        }
    }

    #[test]
    fn newton_shell_theorem() {
        // s = N - 2: the shell average is max(r, rho)^(2-N)
        for dim in [3usize, 4, 5] {
            let s = dim as f64 - 2.0;
            for (r, rho) in [(0.3, 1.0), (2.0, 1.0), (0.999, 1.0)] {
                let expect = f64::max(r, rho).powf(-s);
                assert_relative_eq!(shell_average(dim, r, rho, s), expect, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn newtonian_ball_measure_has_constant_interior_potential() {
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let params = p(3, 2.0);
        let mu = equilibrium_measure(&ball, &params, 2048).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let x = scale(&ball.sample(&mut rng), 0.9);
            assert_relative_eq!(accurate_potential(&mu, &params, &x).unwrap(), 1.0, epsilon = 1e-8);
        }
        let report = frostman_check(&ball, &params, &mu, 200, 3).unwrap();
        assert!(report.passes(1e-8), "{report:?}");
    }

    #[test]
    fn singular_ball_density_potential() {
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        for alpha in [1.0, 1.5] {
            let params = p(3, alpha);
            let mu = equilibrium_measure(&ball, &params, 4096).unwrap();
            assert!((mu.total_mass() - 1.0).abs() < MASS_TOL);
            let c = c_factor(&params).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..5 {
                let x = ball.sample(&mut rng);
                assert_relative_eq!(accurate_potential(&mu, &params, &x).unwrap(), c, max_relative = 1e-8);
            }
            // the node rule itself is consistent at the center, where no node is close
            let nodes = potential(&mu, &params, &[0.0; 3]).unwrap();
            assert_relative_eq!(nodes, c, max_relative = 2e-2);
        }
        assert!(matches!(
            ball_riesz_measure(3, 1.0, 1.5, 10),
            Err(Error::InsufficientResolution(_))
        ));
    }

    #[test]
    fn ball_rule_integrates_the_mass() {
        // unnormalized radial rule converges to mass 1
        let alpha = 1.5;
        let q = 2.0 / (2.0 - alpha);
        let a = ball_density_constant(3, alpha) * sphere_area(3);
        let (v, wv) = quad::gauss_legendre_on(0.0, 1.0, 40);
        let mass: f64 = v
            .iter()
            .zip(&wv)
            .map(|(vi, wi)| a * 0.5 * q * (1.0 - (1.0 - vi * vi).powf(q)).sqrt() * 2.0 * vi * wi)
            .sum();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn circle_frostman_on_set_deviation() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        let params = p(2, 1.5);
        let mu = equilibrium_measure(&circle, &params, 4096).unwrap();
        let report = frostman_check(&circle, &params, &mu, 100, 9).unwrap();
        assert_eq!(report.method, "density");
        assert!(report.max_on_set_deviation.unwrap() <= 1e-6, "{report:?}");
        assert!(report.max_excess.unwrap() <= 1e-6);
    }

    #[test]
    fn sphere_frostman() {
        let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
        let params = p(3, 1.5);
        let mu = equilibrium_measure(&sphere, &params, 2000).unwrap();
        let report = frostman_check(&sphere, &params, &mu, 60, 1).unwrap();
        assert!(report.passes(1e-8), "{report:?}");
    }

    #[test]
    fn surrogate_is_not_certified() {
        let two = SetDescriptor::finite_points(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let params = p(2, 1.5);
        let mu = equilibrium_measure(&two, &params, 10).unwrap();
        assert_eq!(mu.label(), MeasureLabel::FeketeApprox);
        let report = frostman_check(&two, &params, &mu, 10, 0).unwrap();
        assert!(!report.certifiable);
        assert!(!report.passes(1.0));
    }

    #[test]
    fn csv_and_json_layout() {
        let mu = QuadratureMeasure::uniform(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], 1.0, MeasureLabel::Atomic).unwrap();
        let csv = mu.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2,weight"));
        assert_eq!(lines.count(), 2);
        let json = mu.to_json().unwrap();
        assert!(json.contains("\"label\": \"atomic\""));
        assert!(json.contains("\"total_mass\": 1.0"));
        let back: QuadratureMeasure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(QuadratureMeasure::new(vec![vec![0.0, 0.0]], vec![-1.0], MeasureLabel::Atomic).is_err());
        assert!(QuadratureMeasure::new(vec![vec![0.0, 0.0]], vec![], MeasureLabel::Atomic).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn potential_is_isometry_invariant(seed in 0u64..1000, alpha in 0.5f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let params = p(3, alpha);
            let nodes: Vec<Point> = (0..7).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let weights: Vec<f64> = (0..7).map(|_| rng.gen_range(0.0..1.0)).collect();
            let mu = QuadratureMeasure::new(nodes, weights, MeasureLabel::Atomic).unwrap();
            let x: Point = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let q = random_orthogonal(3, &mut rng);
            let shift: Point = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let iso = |y: &[f64]| -> Point { crate::sets::add(&mat_vec(&q, y), &shift) };
            let moved = mu.mapped(iso).unwrap();
            let u0 = potential(&mu, &params, &x).unwrap();
            let u1 = potential(&moved, &params, &iso(&x)).unwrap();
            prop_assert!((u0 - u1).abs() <= 1e-12 * u0.abs().max(1.0));
        }

        #[test]
        fn equilibrium_measures_have_unit_mass(n in 64usize..600, alpha in 0.2f64..1.95, dim in 2usize..6) {
            let ball = SetDescriptor::ball(dim, 1.3).unwrap();
            let sphere = SetDescriptor::sphere(dim, 0.7).unwrap();
            let params = p(dim, alpha);
            for set in [ball, sphere] {
                let mu = equilibrium_measure(&set, &params, n).unwrap();
                prop_assert!((mu.total_mass() - 1.0).abs() <= MASS_TOL);
            }
        }
    }
}

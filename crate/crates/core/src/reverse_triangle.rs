//! Reverse triangle constants `C_E(alpha, m)` and `C_E(alpha)`, the slack
//! harness for the potential inequality, sharpness tables and dominant sets.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{minimize_discrete_energy, EnergyOptions};
use crate::error::{Error, Result};
use crate::measure::{
    accurate_potential, ball_density_constant, equilibrium_measure, kernel_sum, MeasureLabel, QuadratureMeasure,
};
use crate::optimize::{multistart, nelder_mead, projected_gradient, Descent, DescentOptions};
use crate::quad::{pairwise_sum, tanh_sinh};
use crate::report::Method;
use crate::search::{minimize_on_set, SearchOptions};
use crate::sets::{dist, dot, Configuration, Point, SetDescriptor};
use crate::specfun::{
    cos_power_integral, cos_power_integral_complete, riesz_kernel, sphere_area, wiener_constant, RieszParams,
};

/// Slack below `-SLACK_TOL` flags an invariant violation.
pub const SLACK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RtOptions {
    pub seed: u64,
    pub starts: usize,
    /// Node count for closed-form equilibrium measures.
    pub resolution: usize,
    /// Point count of the minimum-energy surrogate on segments.
    pub surrogate_points: usize,
    pub descent: DescentOptions,
    pub search: SearchOptions,
    /// Allow `m = 1`, outside the `m >= 2` contract.
    pub diagnostic: bool,
}

impl Default for RtOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 8,
            resolution: 2000,
            surrogate_points: 64,
            descent: DescentOptions::default(),
            search: SearchOptions::default(),
            diagnostic: false,
        }
    }
}

impl RtOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
}

/// `C_E(alpha, m)` with its optimal centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtResult {
    pub m: usize,
    pub value: f64,
    /// `min_c ∫ min_k |x - c_k|^(alpha-N) dμ(x)`.
    pub integral: f64,
    pub wiener: f64,
    pub centers: Configuration,
    pub method: Method,
    pub converged: bool,
    pub seed: u64,
}

/// `W` for the closed-form sets, `inf_E U^{τ_n}` for the surrogate.
fn wiener_or_surrogate(
    set: &SetDescriptor,
    params: &RieszParams,
    mu: &QuadratureMeasure,
    search: &SearchOptions,
) -> Result<f64> {
    match wiener_constant(set, params) {
        Ok(w) => Ok(w),
        Err(Error::NoClosedForm(_)) => Ok(potential_infimum(set, params, mu, search)?.0),
        Err(e) => Err(e),
    }
}

fn surrogate_measure(set: &SetDescriptor, params: &RieszParams, opts: &RtOptions) -> Result<QuadratureMeasure> {
    match set {
        SetDescriptor::Segment { .. } => equilibrium_measure(set, params, opts.surrogate_points),
        SetDescriptor::FinitePoints { .. } => Err(Error::Unsupported(
            "finite sets have infinite Riesz energy for s > 0".into(),
        )),
        _ => equilibrium_measure(set, params, opts.resolution),
    }
}

/// Closed form on the circle: `(2r)^(alpha-2) (2m/π) I(π/(2m)) - W`.
pub fn rt_closed_form(set: &SetDescriptor, params: &RieszParams, m: usize) -> Result<f64> {
    let SetDescriptor::Circle { radius } = set else {
        return Err(Error::NoClosedForm(format!("no closed form for {}", set.kind_name())));
    };
    let alpha = params.alpha();
    let x = PI / (2 * m) as f64;
    let i = if m == 1 {
        cos_power_integral_complete(alpha)?
    } else {
        cos_power_integral(x, alpha)?
    };
    Ok((2.0 * radius).powf(alpha - 2.0) * (2.0 * m as f64 / PI) * i - wiener_constant(set, params)?)
}

/// `C_E(alpha, m) = min_{c ∈ E^m} ∫ min_k |x - c_k|^(alpha-N) dμ(x) - W`.
///
/// On the circle the integral depends only on the arcs between consecutive
/// centers and is minimized in the center angles with its exact gradient.
/// Elsewhere it is a node sum over the equilibrium measure, minimized by
/// projected gradient plus a simplex polish. For `alpha = 2` centers live on
/// the boundary.
pub fn rt_constant(set: &SetDescriptor, params: &RieszParams, m: usize, opts: &RtOptions) -> Result<RtResult> {
    if m == 0 || (m == 1 && !opts.diagnostic) {
        return Err(Error::Precondition(format!("need m >= 2, got {m}")));
    }
    if set.ambient_dim() != params.dim() {
        return Err(Error::InvalidParams("set and params disagree on the dimension".into()));
    }
    if let SetDescriptor::Circle { radius } = set {
        return circle_rt(*radius, set, params, m, opts);
    }
    let mu = surrogate_measure(set, params, opts)?;
    let wiener = wiener_or_surrogate(set, params, &mu, &opts.search)?;
    let domain = if params.alpha() == 2.0 {
        set.boundary()
    } else {
        set.clone()
    };
    let dim = set.ambient_dim();
    let s = params.s();
    let on_sphere = matches!(domain, SetDescriptor::Sphere { .. } | SetDescriptor::Circle { .. });
    let fg = |x: &[f64]| node_objective(&mu, s, x, dim, on_sphere);
    let retract = |x: &mut [f64]| {
        for c in x.chunks_mut(dim) {
            let q = domain.project(c);
            c.copy_from_slice(&q);
        }
    };
    let runs: Vec<Descent> = multistart(opts.starts, opts.seed, |_, rng| {
        let x0: Vec<f64> = (0..m).flat_map(|_| domain.sample(rng)).collect();
        let mut d = projected_gradient(fg, retract, x0, &opts.descent);
        if d.x.len() <= 12 {
            let f = |x: &[f64]| {
                let mut y = x.to_vec();
                retract(&mut y);
                fg(&y).0
            };
            let (x, v) = nelder_mead(f, &d.x, 0.01 * set.scale(), 4000, 1e-15);
            if v < d.value {
                let mut y = x;
                retract(&mut y);
                d.value = fg(&y).0;
                d.x = y;
            }
        }
        d
    });
    let best = pick_best(runs, &domain, dim)?;
    let centers = Configuration::projected(best.x.chunks(dim).map(|c| c.to_vec()).collect(), set.clone())?;
    Ok(RtResult {
        m,
        value: best.value - wiener,
        integral: best.value,
        wiener,
        centers,
        method: Method::Optimized,
        converged: best.converged,
        seed: opts.seed,
    })
}

fn pick_best(runs: Vec<Descent>, domain: &SetDescriptor, dim: usize) -> Result<Descent> {
    let mut best: Option<(Descent, Configuration)> = None;
    for d in runs {
        if !d.value.is_finite() {
            continue;
        }
        let conf = Configuration::projected(d.x.chunks(dim).map(|c| c.to_vec()).collect(), domain.clone())?.canonical();
        let better = match &best {
            None => true,
            Some((b, bc)) => {
                if (d.value - b.value).abs() <= 1e-14 * b.value.abs() {
                    flat(&conf) < flat(bc)
                } else {
                    d.value < b.value
                }
            }
        };
        if better {
            best = Some((d, conf));
        }
    }
    best.map(|(d, _)| d)
        .ok_or_else(|| Error::Precondition("no start produced a finite value".into()))
}

fn flat(c: &Configuration) -> Vec<f64> {
    c.points().iter().flatten().copied().collect()
}

/// `Σ_i w_i min_k |x_i - c_k|^(-s)` and its gradient in the flattened
/// centers; each node pulls only on its farthest center.
fn node_objective(mu: &QuadratureMeasure, s: f64, x: &[f64], dim: usize, tangent: bool) -> (f64, Vec<f64>) {
    let centers: Vec<&[f64]> = x.chunks(dim).collect();
    let per_node: Vec<(f64, usize, f64)> = mu
        .nodes()
        .par_iter()
        .zip(mu.weights().par_iter())
        .map(|(p, &w)| {
            let mut k_best = 0;
            let mut r_best = f64::NEG_INFINITY;
            for (k, c) in centers.iter().enumerate() {
                let r = dist(p, c);
                if r > r_best {
                    r_best = r;
                    k_best = k;
                }
            }
            (w * riesz_kernel(r_best, s), k_best, r_best)
        })
        .collect();
    let terms: Vec<f64> = per_node.iter().map(|t| t.0).collect();
    let value = pairwise_sum(&terms);
    let mut grad = vec![0.0; x.len()];
    for ((p, &w), &(_, k, r)) in mu.nodes().iter().zip(mu.weights()).zip(&per_node) {
        if w == 0.0 || r == 0.0 {
            continue;
        }
        // ∂/∂c |c - p|^(-s) = -s |c - p|^(-s-2) (c - p)
        let coef = -s * w * riesz_kernel(r, s) / (r * r);
        for i in 0..dim {
            grad[k * dim + i] += coef * (centers[k][i] - p[i]);
        }
    }
    if tangent {
        for (g, c) in grad.chunks_mut(dim).zip(&centers) {
            let cc = dot(c, c);
            let gc = dot(g, c);
            for (gi, ci) in g.iter_mut().zip(c.iter()) {
                *gi -= gc / cc * ci;
            }
        }
    }
    (value, grad)
}

/// Sum of `I(g_k / 4)` over the arcs `g_k` between consecutive centers, and
/// its gradient in the center angles.
fn circle_gap_objective(psi: &[f64], alpha: f64) -> (f64, Vec<f64>) {
    let m = psi.len();
    if m == 1 {
        // one full turn; rounding 2π would cost √ε through the endpoint singularity
        return (cos_power_integral_complete(alpha).unwrap_or(f64::INFINITY), vec![0.0]);
    }
    let mut order: Vec<usize> = (0..m).collect();
    let wrapped: Vec<f64> = psi.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    order.sort_by(|&a, &b| wrapped[a].total_cmp(&wrapped[b]).then(a.cmp(&b)));
    let gaps: Vec<f64> = (0..m)
        .map(|j| {
            let a = wrapped[order[j]];
            let b = if j + 1 < m {
                wrapped[order[j + 1]]
            } else {
                wrapped[order[0]] + 2.0 * PI
            };
            b - a
        })
        .collect();
    let quarter = |g: f64| (0.25 * g).min(FRAC_PI_2);
    let terms: Vec<f64> = gaps
        .iter()
        .map(|&g| {
            let x = quarter(g);
            if x >= FRAC_PI_2 {
                cos_power_integral_complete(alpha).unwrap_or(f64::INFINITY)
            } else {
                cos_power_integral(x, alpha).unwrap_or(f64::INFINITY)
            }
        })
        .collect();
    let value = pairwise_sum(&terms);
    let dcos = |g: f64| quarter(g).cos().powf(alpha - 2.0);
    let mut grad = vec![0.0; m];
    for j in 0..m {
        let prev = gaps[(j + m - 1) % m];
        grad[order[j]] = 0.25 * (dcos(prev) - dcos(gaps[j]));
    }
    (value, grad)
}

fn circle_rt(radius: f64, set: &SetDescriptor, params: &RieszParams, m: usize, opts: &RtOptions) -> Result<RtResult> {
    let alpha = params.alpha();
    let wiener = wiener_constant(set, params)?;
    let scale = (2.0 * radius).powf(alpha - 2.0) * 2.0 / PI;
    let runs: Vec<Descent> = multistart(opts.starts, opts.seed, |_, rng| {
        let psi0: Vec<f64> = (0..m).map(|_| rand::Rng::gen::<f64>(rng) * 2.0 * PI).collect();
        let mut d = projected_gradient(|p| circle_gap_objective(p, alpha), |_| {}, psi0, &opts.descent);
        d.value *= scale;
        d
    });
    let mut best: Option<(Descent, Configuration)> = None;
    for d in runs {
        let conf = Configuration::on_circle(radius, &d.x)?.canonical();
        let better = match &best {
            None => true,
            Some((b, bc)) => {
                if (d.value - b.value).abs() <= 1e-14 * b.value.abs() {
                    conf.angles() < bc.angles()
                } else {
                    d.value < b.value
                }
            }
        };
        if better {
            best = Some((d, conf));
        }
    }
    let (d, centers) = best.ok_or_else(|| Error::Precondition("no start".into()))?;
    Ok(RtResult {
        m,
        value: d.value - wiener,
        integral: d.value,
        wiener,
        centers,
        method: Method::Optimized,
        converged: d.converged,
        seed: opts.seed,
    })
}

/// `C_E(alpha) = ∫ d_E^(alpha-N) dμ - W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RtLimit {
    pub value: f64,
    pub integral: f64,
    pub wiener: f64,
    pub method: Method,
}

pub fn rt_limit_constant(set: &SetDescriptor, params: &RieszParams, opts: &RtOptions) -> Result<RtLimit> {
    let s = params.s();
    let alpha = params.alpha();
    let closed = |integral: f64| -> Result<RtLimit> {
        let wiener = wiener_constant(set, params)?;
        Ok(RtLimit {
            value: integral - wiener,
            integral,
            wiener,
            method: Method::ClosedForm,
        })
    };
    match set {
        SetDescriptor::Circle { radius } | SetDescriptor::Sphere { radius, .. } => {
            closed(riesz_kernel(2.0 * radius, s))
        }
        SetDescriptor::Ball { radius, .. } if alpha == 2.0 => closed(riesz_kernel(2.0 * radius, s)),
        SetDescriptor::Ball { dim, radius } => {
            let wiener = wiener_constant(set, params)?;
            let integral = ball_far_integral(*dim, *radius, alpha, s);
            Ok(RtLimit {
                value: integral - wiener,
                integral,
                wiener,
                method: Method::Quadrature,
            })
        }
        _ => {
            let mu = surrogate_measure(set, params, opts)?;
            let wiener = wiener_or_surrogate(set, params, &mu, &opts.search)?;
            let terms: Vec<f64> = mu
                .nodes()
                .iter()
                .zip(mu.weights())
                .map(|(p, w)| w * riesz_kernel(set.farthest_distance(p), s))
                .collect();
            let integral = pairwise_sum(&terms);
            Ok(RtLimit {
                value: integral - wiener,
                integral,
                wiener,
                method: Method::Optimized,
            })
        }
    }
}

/// `∫ (R + |x|)^(-s) dμ` for the singular ball density, in the radius.
fn ball_far_integral(dim: usize, radius: f64, alpha: f64, s: f64) -> f64 {
    let n = dim as f64;
    let a = ball_density_constant(dim, alpha) * radius.powf(alpha - n) * sphere_area(dim);
    tanh_sinh(
        |rho, _, gap| {
            // (R^2 - ρ^2) = (R - ρ)(R + ρ) with R - ρ taken from the endpoint gap
            a * rho.powf(n - 1.0) * (gap * (radius + rho)).powf(-0.5 * alpha) * riesz_kernel(radius + rho, s)
        },
        0.0,
        radius,
        1e-15,
        1e-13,
    )
    .value
}

/// Nonnegative parts `ν_k` whose sum `ν` is a unit measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    parts: Vec<QuadratureMeasure>,
    total: QuadratureMeasure,
}

impl Decomposition {
    /// The total's nodes are sorted, so it does not depend on the order of
    /// the parts.
    pub fn new(parts: Vec<QuadratureMeasure>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidMeasure("decomposition has no parts".into()));
        }
        let sum = QuadratureMeasure::sum(&parts)?;
        let mut idx: Vec<usize> = (0..sum.len()).collect();
        let key = |i: usize| {
            let mut k = sum.nodes()[i].clone();
            k.push(sum.weights()[i]);
            k
        };
        idx.sort_by(|&a, &b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));
        let mut total = QuadratureMeasure::new(
            idx.iter().map(|&i| sum.nodes()[i].clone()).collect(),
            idx.iter().map(|&i| sum.weights()[i]).collect(),
            sum.label(),
        )?;
        if let Some(d) = sum.density() {
            total = total.with_density(*d);
        }
        if (total.total_mass() - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidMeasure(format!(
                "parts sum to mass {}, expected 1",
                total.total_mass()
            )));
        }
        Ok(Self { parts, total })
    }

    /// `m` atoms of mass `1/m`, one per part.
    pub fn atomic(points: &[Point]) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(
            points
                .iter()
                .map(|p| QuadratureMeasure::new(vec![p.clone()], vec![w], MeasureLabel::Atomic))
                .collect::<Result<_>>()?,
        )
    }

    pub fn parts(&self) -> &[QuadratureMeasure] {
        &self.parts
    }

    pub fn total(&self) -> &QuadratureMeasure {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// `inf_E U^ν` with a witness: closed-form densities use their exact
/// potential, atoms are excluded from the candidates.
pub fn potential_infimum(
    set: &SetDescriptor,
    params: &RieszParams,
    nu: &QuadratureMeasure,
    search: &SearchOptions,
) -> Result<(f64, Point)> {
    if nu.total_mass() == 0.0 {
        return Ok((0.0, set.anchor_point()));
    }
    if nu.density().is_some() {
        let r = minimize_on_set(
            set,
            |x| accurate_potential(nu, params, x).unwrap_or(f64::INFINITY),
            &[],
            search,
        );
        return Ok((r.value, r.point));
    }
    let atoms: Vec<Point> = nu
        .nodes()
        .iter()
        .zip(nu.weights())
        .filter(|(_, w)| **w > 0.0)
        .map(|(p, _)| p.clone())
        .collect();
    let mut search = search.clone();
    if matches!(set, SetDescriptor::Circle { .. } | SetDescriptor::Segment { .. }) {
        search.grid = search.grid.max(16 * atoms.len());
    }
    let s = params.s();
    let r = minimize_on_set(set, |x| kernel_sum(nu, s, x), &atoms, &search);
    Ok((r.value, r.point))
}

/// Both sides of the potential inequality for one decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub m: usize,
    pub part_infima: Vec<f64>,
    pub part_witnesses: Vec<Point>,
    pub total_infimum: f64,
    pub total_witness: Point,
    pub constant: f64,
    /// `Σ_k inf U^{ν_k} - inf U^ν - C_E(alpha, m)`.
    pub slack: f64,
    pub tolerance: f64,
    /// `slack >= -tolerance`.
    pub ok: bool,
}

/// Evaluate the slack for `d` against a precomputed `C_E(alpha, m)`.
pub fn verify_inequality(
    set: &SetDescriptor,
    params: &RieszParams,
    d: &Decomposition,
    constant: f64,
    search: &SearchOptions,
) -> Result<SlackReport> {
    if d.len() < 2 {
        return Err(Error::Precondition("need at least two parts".into()));
    }
    let parts: Vec<(f64, Point)> = d
        .parts()
        .par_iter()
        .map(|p| potential_infimum(set, params, p, search))
        .collect::<Result<_>>()?;
    let (total_infimum, total_witness) = potential_infimum(set, params, d.total(), search)?;
    let mut infima: Vec<f64> = parts.iter().map(|p| p.0).collect();
    let mut sorted = infima.clone();
    sorted.sort_by(f64::total_cmp);
    let slack = pairwise_sum(&sorted) - total_infimum - constant;
    let part_witnesses = parts.into_iter().map(|p| p.1).collect();
    infima.shrink_to_fit();
    Ok(SlackReport {
        m: d.len(),
        part_infima: infima,
        part_witnesses,
        total_infimum,
        total_witness,
        constant,
        slack,
        tolerance: SLACK_TOL,
        ok: slack >= -SLACK_TOL,
    })
}

/// `count` decompositions into `m` random atomic parts, each part holding
/// `atoms_per_part` seeded points on the set with random weights.
pub fn random_atomic_decompositions(
    set: &SetDescriptor,
    m: usize,
    atoms_per_part: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Decomposition>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut raw: Vec<(Vec<Point>, Vec<f64>)> = Vec::with_capacity(m);
            for _ in 0..m {
                let pts: Vec<Point> = (0..atoms_per_part).map(|_| set.sample(&mut rng)).collect();
                let ws: Vec<f64> = (0..atoms_per_part).map(|_| rng.gen::<f64>() + 0.05).collect();
                raw.push((pts, ws));
            }
            let total: f64 = raw.iter().flat_map(|(_, w)| w.iter()).sum();
            Decomposition::new(
                raw.into_iter()
                    .map(|(p, w)| {
                        QuadratureMeasure::new(p, w.iter().map(|v| v / total).collect(), MeasureLabel::Atomic)
                    })
                    .collect::<Result<_>>()?,
            )
        })
        .collect()
}

/// How minimum-energy points are split among the centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assignment {
    /// Each point goes to a center at maximal distance from it.
    Farthest,
    /// Each point goes to a center at minimal distance from it.
    Nearest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpnessOptions {
    pub energy: EnergyOptions,
    pub search: SearchOptions,
    pub assignment: Assignment,
}

impl Default for SharpnessOptions {
    fn default() -> Self {
        Self {
            energy: EnergyOptions::default(),
            search: SearchOptions::default(),
            assignment: Assignment::Farthest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessRow {
    pub n: usize,
    pub part_sizes: Vec<usize>,
    pub part_infima: Vec<f64>,
    pub total_infimum: f64,
    /// `Σ inf U^{ν*_k} - inf U^{τ_n} - C_E(alpha, m)`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessTable {
    pub m: usize,
    pub constant: f64,
    pub centers: Configuration,
    pub assignment: Assignment,
    pub rows: Vec<SharpnessRow>,
    /// Gaps strictly decreasing along `n`.
    pub decreasing: bool,
    /// Every gap at least `-SLACK_TOL`.
    pub nonnegative: bool,
    pub seed: u64,
}

/// Index of the center assigned to `x`; ties go to the lowest index.
fn assign(x: &[f64], centers: &[Point], rule: Assignment) -> usize {
    let mut best = 0;
    let mut best_d = dist(x, &centers[0]);
    for (k, c) in centers.iter().enumerate().skip(1) {
        let d = dist(x, c);
        let better = match rule {
            Assignment::Farthest => d > best_d,
            Assignment::Nearest => d < best_d,
        };
        if better {
            best = k;
            best_d = d;
        }
    }
    best
}

/// Gap of the inequality along minimum-energy configurations split among
/// `centers`.
pub fn sharpness_demo(
    set: &SetDescriptor,
    params: &RieszParams,
    centers: &Configuration,
    constant: f64,
    n_list: &[usize],
    opts: &SharpnessOptions,
) -> Result<SharpnessTable> {
    let m = centers.len();
    if m < 2 {
        return Err(Error::Precondition("need at least two centers".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let report = minimize_discrete_energy(set, n, params, &opts.energy)?;
        let pts = report.config.points();
        let w = 1.0 / n as f64;
        let mut buckets: Vec<Vec<Point>> = vec![Vec::new(); m];
        for p in pts {
            buckets[assign(p, centers.points(), opts.assignment)].push(p.clone());
        }
        let part_sizes: Vec<usize> = buckets.iter().map(|b| b.len()).collect();
        let parts: Vec<QuadratureMeasure> = buckets
            .into_iter()
            .map(|b| {
                if b.is_empty() {
                    QuadratureMeasure::new(vec![set.anchor_point()], vec![0.0], MeasureLabel::Atomic)
                } else {
                    QuadratureMeasure::uniform(b.clone(), w * b.len() as f64, MeasureLabel::Atomic)
                }
            })
            .collect::<Result<_>>()?;
        let d = Decomposition::new(parts)?;
        let report = verify_inequality(set, params, &d, constant, &opts.search)?;
        rows.push(SharpnessRow {
            n,
            part_sizes,
            part_infima: report.part_infima,
            total_infimum: report.total_infimum,
            gap: report.slack,
        });
    }
    let decreasing = rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let nonnegative = rows.iter().all(|r| r.gap >= -SLACK_TOL);
    Ok(SharpnessTable {
        m,
        constant,
        centers: centers.clone(),
        assignment: opts.assignment,
        rows,
        decreasing,
        nonnegative,
        seed: opts.energy.seed,
    })
}

/// Gap with `μ` itself split along the arcs where each center is farthest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularSharpness {
    pub m: usize,
    /// `(start, end)` angles of each arc.
    pub arcs: Vec<(f64, f64)>,
    pub part_infima: Vec<f64>,
    pub total_infimum: f64,
    pub constant: f64,
    pub gap: f64,
    pub method: Method,
}

/// Potential at angle `phi` of the uniform probability measure on the
/// circle of radius `radius` restricted to angles `[a, b]`, `b - a <= 2π`.
pub fn arc_potential(radius: f64, a: f64, b: f64, phi: f64, s: f64) -> f64 {
    let tau = 2.0 * PI;
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    let lo = (a - phi).rem_euclid(tau);
    let hi = lo + len;
    // the integrand is singular at multiples of 2π only
    let piece = |p: f64, q: f64| {
        tanh_sinh(
            |u, da, db| {
                let left = if p == 0.0 { da } else { u };
                let right = if q == tau { db } else { tau - u };
                riesz_kernel(2.0 * radius * (0.5 * left.min(right)).sin(), s)
            },
            p,
            q,
            1e-15,
            1e-12,
        )
        .value
    };
    let total = if hi > tau {
        piece(lo, tau) + piece(0.0, hi - tau)
    } else {
        piece(lo, hi)
    };
    total / tau
}

/// Regular variant on the circle: `μ` restricted to the arc where center `k`
/// is farthest. The gap vanishes up to quadrature and search accuracy.
pub fn sharpness_regular(
    set: &SetDescriptor,
    params: &RieszParams,
    centers: &Configuration,
    constant: f64,
    search: &SearchOptions,
) -> Result<RegularSharpness> {
    let SetDescriptor::Circle { radius } = set else {
        return Err(Error::Unsupported(
            "the regular split is implemented on the circle".into(),
        ));
    };
    let r = *radius;
    let s = params.s();
    let m = centers.len();
    if m < 2 {
        return Err(Error::Precondition("need at least two centers".into()));
    }
    let mut anti: Vec<f64> = centers.angles().iter().map(|t| (t + PI).rem_euclid(2.0 * PI)).collect();
    anti.sort_by(f64::total_cmp);
    let arcs: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let prev = if k == 0 { anti[m - 1] - 2.0 * PI } else { anti[k - 1] };
            let next = if k + 1 < m { anti[k + 1] } else { anti[0] + 2.0 * PI };
            (0.5 * (prev + anti[k]), 0.5 * (anti[k] + next))
        })
        .collect();
    let part_infima: Vec<f64> = arcs
        .par_iter()
        .map(|&(a, b)| minimize_on_set(set, |x| arc_potential(r, a, b, x[1].atan2(x[0]), s), &[], search).value)
        .collect();
    let total_infimum = wiener_constant(set, params)?;
    let mut sorted = part_infima.clone();
    sorted.sort_by(f64::total_cmp);
    let gap = pairwise_sum(&sorted) - total_infimum - constant;
    Ok(RegularSharpness {
        m,
        arcs,
        part_infima,
        total_infimum,
        constant,
        gap,
        method: Method::Quadrature,
    })
}

/// `card(D_E)`: a count or `"infinite"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cardinality {
    Finite(usize),
    Infinite(Unbounded),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unbounded {
    Infinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantSetReport {
    pub candidate: Configuration,
    pub is_dominant: bool,
    /// Cardinality of the minimal dominant set of the whole set.
    pub cardinality: Cardinality,
    /// `max (d_E(x) - max_{t ∈ S} |x - t|)` over the samples.
    pub max_defect: f64,
    pub samples: usize,
    pub tolerance: f64,
}

/// Points of `supp μ`: every point for finite sets, seeded samples otherwise.
fn support_samples(set: &SetDescriptor, params: &RieszParams, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match set {
        SetDescriptor::FinitePoints { points } => points.clone(),
        SetDescriptor::Ball { .. } if params.alpha() == 2.0 => {
            let b = set.boundary();
            (0..count).map(|_| b.sample(&mut rng)).collect()
        }
        _ => (0..count).map(|_| set.sample(&mut rng)).collect(),
    }
}

/// Check `d_E(x) = max_{t ∈ S} |x - t|` on `supp μ` within `tol` (relative
/// to the set scale) and classify the minimal dominant set.
pub fn dominant_set_analysis(
    set: &SetDescriptor,
    params: &RieszParams,
    candidate: &Configuration,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<DominantSetReport> {
    if candidate.is_empty() {
        return Err(Error::Precondition("candidate is empty".into()));
    }
    let xs = support_samples(set, params, samples, seed);
    let defect = |x: &[f64], cand: &[Point]| {
        let far = cand.iter().map(|t| dist(x, t)).fold(0.0, f64::max);
        set.farthest_distance(x) - far
    };
    let max_defect = xs
        .par_iter()
        .map(|x| defect(x, candidate.points()))
        .reduce(|| 0.0, f64::max);
    let cardinality = match set {
        SetDescriptor::Circle { .. } | SetDescriptor::Sphere { .. } | SetDescriptor::Ball { .. } => {
            Cardinality::Infinite(Unbounded::Infinite)
        }
        SetDescriptor::Segment { .. } => Cardinality::Finite(2),
        SetDescriptor::FinitePoints { points } => Cardinality::Finite(minimal_dominant_size(points)),
    };
    Ok(DominantSetReport {
        candidate: candidate.clone(),
        is_dominant: max_defect <= tol * set.scale(),
        cardinality,
        max_defect,
        samples: xs.len(),
        tolerance: tol,
    })
}

/// Smallest subset realizing every point's farthest distance, by
/// enumeration in increasing size.
fn minimal_dominant_size(points: &[Point]) -> usize {
    let k = points.len();
    // for each x, the set of indices attaining its farthest distance
    let far: Vec<Vec<usize>> = points
        .iter()
        .map(|x| {
            let d: Vec<f64> = points.iter().map(|t| dist(x, t)).collect();
            let m = d.iter().copied().fold(0.0, f64::max);
            (0..k).filter(|&j| d[j] >= m * (1.0 - 1e-12)).collect()
        })
        .collect();
    if k > 24 {
        // greedy upper bound beyond enumeration range
        let mut chosen: Vec<usize> = Vec::new();
        let mut open: Vec<usize> = (0..k).collect();
        while !open.is_empty() {
            let j = (0..k)
                .max_by_key(|j| open.iter().filter(|&&i| far[i].contains(j)).count())
                .unwrap_or(0);
            chosen.push(j);
            open.retain(|&i| !far[i].contains(&j));
        }
        return chosen.len();
    }
    for size in 1..=k {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if far.iter().all(|f| f.iter().any(|j| idx.contains(j))) {
                return size;
            }
            let mut i = size;
            while i > 0 && idx[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::c_factor;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn circle() -> SetDescriptor {
        SetDescriptor::circle(1.0).unwrap()
    }

    fn p15() -> RieszParams {
        RieszParams::new(2, 1.5).unwrap()
    }

    #[test]
    fn circle_optimizer_matches_closed_form() {
        let opts = RtOptions::default().with_seed(3);
        for m in [2usize, 3, 5] {
            let r = rt_constant(&circle(), &p15(), m, &opts).unwrap();
            let exact = rt_closed_form(&circle(), &p15(), m).unwrap();
            assert!((r.value - exact).abs() <= 1e-8, "m={m}: {} vs {exact}", r.value);
            let mut a = r.centers.angles();
            a.sort_by(f64::total_cmp);
            for k in 0..m {
                let next = if k + 1 < m { a[k + 1] } else { a[0] + 2.0 * PI };
                assert!((next - a[k] - 2.0 * PI / m as f64).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn closed_form_at_m3_by_independent_quadrature() {
        // 2^(alpha-2) (2m/π) I(π/(2m)) - W with I by plain midpoint sums
        let m = 3.0;
        let x = PI / (2.0 * m);
        let k = 200_000;
        let i: f64 = (0..k)
            .map(|j| ((j as f64 + 0.5) * x / k as f64).cos().powf(-0.5))
            .sum::<f64>()
            * x
            / k as f64;
        let w = wiener_constant(&circle(), &p15()).unwrap();
        let expect = 2f64.powf(-0.5) * (2.0 * m / PI) * i - w;
        assert_relative_eq!(rt_closed_form(&circle(), &p15(), 3).unwrap(), expect, epsilon = 1e-10);
    }

    #[test]
    fn single_center_diagnostic_is_zero() {
        let opts = RtOptions {
            diagnostic: true,
            starts: 2,
            ..RtOptions::default()
        };
        let r = rt_constant(&circle(), &p15(), 1, &opts).unwrap();
        assert!(r.value.abs() < 1e-12, "{}", r.value);
        assert!(rt_constant(&circle(), &p15(), 1, &RtOptions::default()).is_err());
    }

    #[test]
    fn limit_constants() {
        let opts = RtOptions::default();
        let l = rt_limit_constant(&circle(), &p15(), &opts).unwrap();
        assert_relative_eq!(l.value, 2f64.powf(-0.5) - 1.180_340_599_016_096_2, epsilon = 1e-12);
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let l = rt_limit_constant(&ball, &RieszParams::new(3, 2.0).unwrap(), &opts).unwrap();
        assert_relative_eq!(l.value, -0.5, epsilon = 1e-14);
        let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
        let p = RieszParams::new(3, 2.0).unwrap();
        let l = rt_limit_constant(&sphere, &p, &opts).unwrap();
        assert_relative_eq!(l.value, 0.5 - wiener_constant(&sphere, &p).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn ball_far_integral_against_midpoint_rule() {
        // unit mass, and ∫ (1 + |x|)^(-s) dμ by a substituted midpoint rule
        let (dim, alpha) = (3usize, 1.5);
        let s = 3.0 - alpha;
        assert_relative_eq!(ball_far_integral(dim, 1.0, alpha, 0.0), 1.0, epsilon = 1e-10);
        let a = ball_density_constant(dim, alpha) * sphere_area(dim);
        // ρ = 1 - u^4 removes the endpoint singularity
        let k = 400_000;
        let sum: f64 = (0..k)
            .map(|j| {
                let u = (j as f64 + 0.5) / k as f64;
                let rho = 1.0 - u.powi(4);
                let jac = 4.0 * u.powi(3);
                a * rho * rho * (u.powi(4) * (1.0 + rho)).powf(-0.5 * alpha) * (1.0 + rho).powf(-s) * jac
            })
            .sum::<f64>()
            / k as f64;
        assert_relative_eq!(ball_far_integral(dim, 1.0, alpha, s), sum, max_relative = 1e-6);
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let p = RieszParams::new(3, alpha).unwrap();
        let l = rt_limit_constant(&ball, &p, &RtOptions::default()).unwrap();
        assert_relative_eq!(l.wiener, c_factor(&p).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn segment_constant_does_not_depend_on_m() {
        let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let opts = RtOptions {
            surrogate_points: 24,
            starts: 4,
            ..RtOptions::default()
        }
        .with_seed(5);
        let c2 = rt_constant(&seg, &p15(), 2, &opts).unwrap();
        let c3 = rt_constant(&seg, &p15(), 3, &opts).unwrap();
        let lim = rt_limit_constant(&seg, &p15(), &opts).unwrap();
        assert!((c2.value - c3.value).abs() < 2e-3, "{} {}", c2.value, c3.value);
        assert!((c2.value - lim.value).abs() < 2e-3);
    }

    #[test]
    fn newtonian_ball_centers_on_the_boundary() {
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let p = RieszParams::new(3, 2.0).unwrap();
        let opts = RtOptions {
            resolution: 400,
            starts: 3,
            ..RtOptions::default()
        };
        let r = rt_constant(&ball, &p, 2, &opts).unwrap();
        for c in r.centers.points() {
            assert_relative_eq!(crate::sets::norm(c), 1.0, epsilon = 1e-12);
        }
        let lim = rt_limit_constant(&ball, &p, &opts).unwrap();
        assert!(r.value >= lim.value - 1e-9);
    }

    #[test]
    fn slack_examples() {
        let search = SearchOptions::default();
        let c4 = rt_closed_form(&circle(), &p15(), 4).unwrap();
        let pts: Vec<Point> = (0..4)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 4.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let r = verify_inequality(&circle(), &p15(), &Decomposition::atomic(&pts).unwrap(), c4, &search).unwrap();
        assert!(r.ok && r.slack >= 0.0, "{r:?}");
        // ν_1 = ν_2 = μ/2: slack = -C_E(alpha, 2)
        let mu = equilibrium_measure(&circle(), &p15(), 256).unwrap();
        let half = mu.scaled(0.5).unwrap();
        let d = Decomposition::new(vec![half.clone(), half]).unwrap();
        let c2 = rt_closed_form(&circle(), &p15(), 2).unwrap();
        let r = verify_inequality(&circle(), &p15(), &d, c2, &search.clone().with_grid(64)).unwrap();
        assert_relative_eq!(r.slack, -c2, epsilon = 1e-9);
        assert!(r.slack >= 0.0);
    }

    #[test]
    fn decomposition_needs_unit_mass() {
        let p = QuadratureMeasure::new(vec![vec![1.0, 0.0]], vec![0.4], MeasureLabel::Atomic).unwrap();
        assert!(Decomposition::new(vec![p.clone(), p]).is_err());
    }

    #[test]
    fn regular_split_is_sharp() {
        let c2 = rt_closed_form(&circle(), &p15(), 2).unwrap();
        let centers = Configuration::on_circle(1.0, &[0.0, PI]).unwrap();
        let r = sharpness_regular(
            &circle(),
            &p15(),
            &centers,
            c2,
            &SearchOptions::default().with_grid(256),
        )
        .unwrap();
        assert!(r.gap.abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn arc_potential_full_circle_is_wiener() {
        let w = wiener_constant(&circle(), &p15()).unwrap();
        for phi in [0.0, 0.3, 2.0] {
            assert_relative_eq!(arc_potential(1.0, 0.0, 2.0 * PI, phi, 0.5), w, max_relative = 1e-11);
            let split = arc_potential(1.0, -1.0, 0.5, phi, 0.5) + arc_potential(1.0, 0.5, 2.0 * PI - 1.0, phi, 0.5);
            assert_relative_eq!(split, w, max_relative = 1e-11);
        }
    }

    #[test]
    fn assignment_rules_agree_for_antipodal_centers() {
        let centers = Configuration::on_circle(1.0, &[0.0, PI]).unwrap();
        let c2 = rt_closed_form(&circle(), &p15(), 2).unwrap();
        let far = sharpness_demo(&circle(), &p15(), &centers, c2, &[8], &SharpnessOptions::default()).unwrap();
        let near = sharpness_demo(
            &circle(),
            &p15(),
            &centers,
            c2,
            &[8],
            &SharpnessOptions {
                assignment: Assignment::Nearest,
                ..SharpnessOptions::default()
            },
        )
        .unwrap();
        assert_relative_eq!(far.rows[0].gap, near.rows[0].gap, epsilon = 1e-10);
        assert!(far.rows[0].gap >= 0.0);
    }

    #[test]
    fn dominant_sets() {
        let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let ends = Configuration::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], seg.clone()).unwrap();
        let r = dominant_set_analysis(&seg, &p15(), &ends, 500, 1, 1e-12).unwrap();
        assert!(r.is_dominant);
        assert_eq!(r.cardinality, Cardinality::Finite(2));
        assert_eq!(serde_json::to_string(&r.cardinality).unwrap(), "2");
        let cand = Configuration::on_circle(1.0, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let r = dominant_set_analysis(&circle(), &p15(), &cand, 500, 1, 1e-9).unwrap();
        assert!(!r.is_dominant);
        assert_eq!(serde_json::to_string(&r.cardinality).unwrap(), "\"infinite\"");
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let sample = crate::sets::sphere_points(3, 10_000, 2);
        let cand = Configuration::new(sample, ball.clone()).unwrap();
        let r = dominant_set_analysis(&ball, &RieszParams::new(3, 2.0).unwrap(), &cand, 2000, 4, 1e-2).unwrap();
        assert!(r.is_dominant, "{}", r.max_defect);
        // square corners: each corner's farthest point is its opposite corner
        let sq =
            SetDescriptor::finite_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(
            minimal_dominant_size(match &sq {
                SetDescriptor::FinitePoints { points } => points,
                _ => unreachable!(),
            }),
            4
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn closed_form_decreases_to_the_limit(m in 2usize..200) {
            let a = rt_closed_form(&circle(), &p15(), m).unwrap();
            let b = rt_closed_form(&circle(), &p15(), m + 1).unwrap();
            let lim = rt_limit_constant(&circle(), &p15(), &RtOptions::default()).unwrap().value;
            prop_assert!(b < a);
            prop_assert!(b > lim);
        }

        #[test]
        fn slack_is_invariant_under_permuting_parts(seed in 0u64..500, m in 2usize..5) {
            let ds = random_atomic_decompositions(&circle(), m, 2, 1, seed).unwrap();
            let d = &ds[0];
            let mut parts = d.parts().to_vec();
            parts.reverse();
            let e = Decomposition::new(parts).unwrap();
            let search = SearchOptions::default().with_grid(512);
            let c = rt_closed_form(&circle(), &p15(), m).unwrap();
            let a = verify_inequality(&circle(), &p15(), d, c, &search).unwrap();
            let b = verify_inequality(&circle(), &p15(), &e, c, &search).unwrap();
            prop_assert_eq!(a.slack, b.slack);
            prop_assert!(a.ok);
        }
    }
}

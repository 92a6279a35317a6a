//! Polarization (max–min kernel sums), the circle oracle, the derived
//! constants `C^δ` and their asymptotic models.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{multistart, slp_max_min, Piece, SlpOptions};
use crate::quad::{golden_section, pairwise_sum};
use crate::report::Method;
use crate::search::{local_minima_on_set, minimize_on_set, SearchOptions};
use crate::sets::{dist, norm, Configuration, Point, SetDescriptor};
use crate::specfun::{gamma, riemann_zeta, riesz_kernel, sphere_energy_unit, wiener_constant, RieszParams};

/// Inner infimum or max–min value with its configuration and witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationResult {
    pub m: usize,
    pub s: f64,
    pub value: f64,
    pub config: Configuration,
    pub witness: Point,
    pub method: Method,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationOptions {
    pub seed: u64,
    pub starts: usize,
    pub slp: SlpOptions,
    pub search: SearchOptions,
}

impl Default for PolarizationOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: 6,
            slp: SlpOptions::default(),
            search: SearchOptions::default().with_grid(1024),
        }
    }
}

impl PolarizationOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }
}

/// `Σ_j |x - x_j|^(-s)`.
pub fn kernel_field(points: &[Point], s: f64, x: &[f64]) -> f64 {
    let terms: Vec<f64> = points.iter().map(|p| riesz_kernel(dist(x, p), s)).collect();
    pairwise_sum(&terms)
}

/// Circle field in terms of angles.
fn circle_field(angles: &[f64], radius: f64, s: f64, phi: f64) -> f64 {
    let terms: Vec<f64> = angles
        .iter()
        .map(|t| riesz_kernel(2.0 * radius * (0.5 * (phi - t)).sin().abs(), s))
        .collect();
    pairwise_sum(&terms)
}

/// Minimum of the circle field on each arc between consecutive sources:
/// `(value, witness angle)` per arc, arcs in increasing angle order. Each
/// term is convex in the angle on an arc free of sources, so golden section
/// finds the arc minimum.
fn circle_arc_minima(angles: &[f64], radius: f64, s: f64) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = angles.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let a = sorted[i];
        let b = if i + 1 < m { sorted[i + 1] } else { sorted[0] + 2.0 * PI };
        let gap = b - a;
        if gap <= 1e-14 {
            continue;
        }
        let eps = 1e-13 * gap;
        let (phi, v) = golden_section(|p| circle_field(&sorted, radius, s, p), a + eps, b - eps, 1e-13);
        out.push((v, phi.rem_euclid(2.0 * PI)));
    }
    out
}

/// `M^s(A_m, E) = inf_{x ∈ E} Σ_j |x - x_j|^(-s)` with a witness.
pub fn polarization_value(
    config: &Configuration,
    s: f64,
    set: &SetDescriptor,
    search: &SearchOptions,
) -> Result<PolarizationResult> {
    let m = config.len();
    if m == 0 {
        return Err(Error::Precondition("configuration is empty".into()));
    }
    let config = Configuration::new(config.points().to_vec(), set.clone())?;
    let (value, witness, converged) = match set {
        SetDescriptor::Circle { radius } if s > 0.0 => {
            let best = circle_arc_minima(&config.angles(), *radius, s)
                .into_iter()
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .ok_or_else(|| Error::Precondition("all sources coincide on no arc".into()))?;
            (best.0, vec![radius * best.1.cos(), radius * best.1.sin()], true)
        }
        _ => {
            let r = minimize_on_set(set, |x| kernel_field(config.points(), s, x), config.points(), search);
            (r.value, r.point, r.converged)
        }
    };
    Ok(PolarizationResult {
        m,
        s,
        value,
        config,
        witness,
        method: Method::Optimized,
        converged,
    })
}

/// `M^s(A*_m, T)` for `m` equally spaced points on the unit circle, taken at
/// an arc midpoint.
pub fn circle_polarization_oracle(m: usize, s: f64) -> f64 {
    let terms: Vec<f64> = (1..=m)
        .map(|k| {
            let u = PI * (2 * k - 1) as f64 / (2 * m) as f64;
            riesz_kernel(2.0 * u.sin().abs(), s)
        })
        .collect();
    pairwise_sum(&terms)
}

/// `M^s_m(E) = sup_{A_m ⊂ E} M^s(A_m, E)` over seeded multistarts.
///
/// Each start runs sequential linear programming on the active pieces
/// (local minima of the field), whose gradients with respect to the sources
/// follow from the envelope theorem.
pub fn max_polarization(
    set: &SetDescriptor,
    m: usize,
    s: f64,
    opts: &PolarizationOptions,
) -> Result<PolarizationResult> {
    if m == 0 {
        return Err(Error::Precondition("need m >= 1".into()));
    }
    let runs: Vec<(f64, Vec<Point>, bool)> = match set {
        SetDescriptor::Circle { radius } if s > 0.0 => {
            let r = *radius;
            multistart(opts.starts, opts.seed, |_, rng| {
                let theta: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
                let pieces = |t: &[f64]| -> Vec<Piece> {
                    circle_arc_minima(t, r, s)
                        .into_iter()
                        .map(|(v, w)| Piece {
                            value: v,
                            gradient: t
                                .iter()
                                .map(|tk| {
                                    // ∂/∂θ_k K(w - θ_k) = (s/2) K cot((w - θ_k)/2)
                                    let u = 0.5 * (w - tk);
                                    let k = riesz_kernel(2.0 * r * u.sin().abs(), s);
                                    0.5 * s * k * u.cos() / u.sin()
                                })
                                .collect(),
                        })
                        .collect()
                };
                let objective = |t: &[f64]| {
                    circle_arc_minima(t, r, s)
                        .into_iter()
                        .map(|p| p.0)
                        .fold(f64::INFINITY, f64::min)
                };
                let d = slp_max_min(pieces, objective, |_| {}, theta, &opts.slp);
                (
                    d.value,
                    d.x.iter().map(|t| vec![r * t.cos(), r * t.sin()]).collect(),
                    d.converged,
                )
            })
        }
        SetDescriptor::Circle { .. }
        | SetDescriptor::Sphere { .. }
        | SetDescriptor::Ball { .. }
        | SetDescriptor::Segment { .. } => generic_max_polarization(set, m, s, opts),
        SetDescriptor::FinitePoints { .. } => {
            return Err(Error::Unsupported(
                "polarization is optimized on continuous sets only".into(),
            ))
        }
    };
    let mut best: Option<(f64, Configuration, bool)> = None;
    for (v, pts, converged) in runs {
        let config = Configuration::projected(pts, set.clone())?.canonical();
        let better = match &best {
            None => true,
            Some((bv, bc, _)) => {
                if (v - bv).abs() <= 1e-14 * bv.abs() {
                    lex_less(&config, bc)
                } else {
                    v > *bv
                }
            }
        };
        if better {
            best = Some((v, config, converged));
        }
    }
    let (_, config, converged) = best.ok_or_else(|| Error::Precondition("no start produced a value".into()))?;
    let mut result = polarization_value(&config, s, set, &opts.search)?;
    result.converged = converged && result.converged;
    Ok(result)
}

fn lex_less(a: &Configuration, b: &Configuration) -> bool {
    for (x, y) in a.points().iter().flatten().zip(b.points().iter().flatten()) {
        if x != y {
            return x < y;
        }
    }
    false
}

fn generic_max_polarization(
    set: &SetDescriptor,
    m: usize,
    s: f64,
    opts: &PolarizationOptions,
) -> Vec<(f64, Vec<Point>, bool)> {
    let dim = set.ambient_dim();
    let on_sphere = matches!(set, SetDescriptor::Sphere { .. } | SetDescriptor::Circle { .. });
    let search = opts.search.clone().with_refine(2 * m + 2);
    let unflatten = |x: &[f64]| -> Vec<Point> { x.chunks(dim).map(|c| c.to_vec()).collect() };
    multistart(opts.starts, opts.seed, |_, rng| {
        let x0: Vec<f64> = (0..m).flat_map(|_| set.sample(rng)).collect();
        let pieces = |x: &[f64]| -> Vec<Piece> {
            let pts = unflatten(x);
            local_minima_on_set(set, |y| kernel_field(&pts, s, y), &pts, &search)
                .into_iter()
                .map(|w| {
                    let mut gradient = Vec::with_capacity(x.len());
                    for p in &pts {
                        // ∂/∂p |w - p|^(-s) = -s |d|^(-s-2) d with d = p - w
                        let d: Vec<f64> = p.iter().zip(&w.point).map(|(a, b)| a - b).collect();
                        let r = norm(&d);
                        let c = -s * riesz_kernel(r, s) / (r * r);
                        let mut g: Vec<f64> = d.iter().map(|v| c * v).collect();
                        if on_sphere {
                            let pp: f64 = p.iter().map(|v| v * v).sum();
                            let pg: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
                            for (gi, pi) in g.iter_mut().zip(p) {
                                *gi -= pg / pp * pi;
                            }
                        }
                        gradient.extend(g);
                    }
                    Piece {
                        value: w.value,
                        gradient,
                    }
                })
                .collect()
        };
        let objective = |x: &[f64]| {
            let pts = unflatten(x);
            minimize_on_set(set, |y| kernel_field(&pts, s, y), &pts, &search).value
        };
        let retract = |x: &mut [f64]| {
            for c in x.chunks_mut(dim) {
                let q = set.project(c);
                c.copy_from_slice(&q);
            }
        };
        let slp = SlpOptions {
            max_iter: opts.slp.max_iter.min(80),
            trust: 0.2 * set.scale(),
            ..opts.slp
        };
        let d = slp_max_min(pieces, objective, retract, x0, &slp);
        (d.value, unflatten(&d.x), d.converged)
    })
}

/// `C^δ` as an exact value (circle, sphere) or a two-sided bound (ball).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaConstant {
    Exact { value: f64, method: Method },
    Interval { lower: f64, upper: f64, method: Method },
}

/// `C^δ_E(alpha, m)` from the polarization identities: the circle uses the
/// oracle, the sphere and ball use [`max_polarization`].
pub fn polarization_delta_constant(
    set: &SetDescriptor,
    params: &RieszParams,
    m: usize,
    opts: &PolarizationOptions,
) -> Result<DeltaConstant> {
    if m == 0 {
        return Err(Error::Precondition("need m >= 1".into()));
    }
    let s = params.s();
    match set {
        SetDescriptor::Circle { radius } => {
            let mm = radius.powf(-s) * circle_polarization_oracle(m, s);
            delta_from_polarization(set, params, m, mm, Method::Oracle)
        }
        SetDescriptor::Sphere { .. } | SetDescriptor::Ball { .. } => {
            let mm = max_polarization(set, m, s, opts)?.value;
            delta_from_polarization(set, params, m, mm, Method::Optimized)
        }
        _ => Err(Error::Unsupported(format!(
            "no polarization identity for {}",
            set.kind_name()
        ))),
    }
}

/// `C^δ` from a known `M_m`: `(2r)^(alpha-N) - M_m/m` on circle and sphere,
/// `[(2R)^(alpha-N) - M_m/m, R^(alpha-N) - M_m/m]` on the ball.
pub fn delta_from_polarization(
    set: &SetDescriptor,
    params: &RieszParams,
    m: usize,
    polarization: f64,
    method: Method,
) -> Result<DeltaConstant> {
    let s = params.s();
    let per = polarization / m as f64;
    match set {
        SetDescriptor::Circle { radius } | SetDescriptor::Sphere { radius, .. } => Ok(DeltaConstant::Exact {
            value: (2.0 * radius).powf(-s) - per,
            method,
        }),
        SetDescriptor::Ball { radius, .. } => Ok(DeltaConstant::Interval {
            lower: (2.0 * radius).powf(-s) - per,
            upper: radius.powf(-s) - per,
            method,
        }),
        _ => Err(Error::Unsupported(format!(
            "no polarization identity for {}",
            set.kind_name()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevRow {
    pub m: usize,
    pub polarization: f64,
    /// `M_m / m`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevTable {
    pub rows: Vec<ChebyshevRow>,
    pub wiener: Option<f64>,
    pub method: Method,
    /// Ratios strictly increasing along the table.
    pub increasing: bool,
    /// `M_m <= m W` at every row (`None` without a closed-form `W`).
    pub bounded: Option<bool>,
}

/// `M^(N-alpha)_m(E) / m` along `m_list`; oracle values on the circle,
/// optimized elsewhere.
pub fn chebyshev_constant_estimate(
    set: &SetDescriptor,
    params: &RieszParams,
    m_list: &[usize],
    opts: &PolarizationOptions,
) -> Result<ChebyshevTable> {
    let s = params.s();
    let (method, rows) = match set {
        SetDescriptor::Circle { radius } => (
            Method::Oracle,
            m_list
                .iter()
                .map(|&m| {
                    let v = radius.powf(-s) * circle_polarization_oracle(m, s);
                    ChebyshevRow {
                        m,
                        polarization: v,
                        ratio: v / m as f64,
                    }
                })
                .collect::<Vec<_>>(),
        ),
        _ => {
            let mut rows = Vec::with_capacity(m_list.len());
            for &m in m_list {
                let v = max_polarization(set, m, s, opts)?.value;
                rows.push(ChebyshevRow {
                    m,
                    polarization: v,
                    ratio: v / m as f64,
                });
            }
            (Method::Optimized, rows)
        }
    };
    let wiener = match wiener_constant(set, params) {
        Ok(w) => Some(w),
        Err(Error::NoClosedForm(_)) => None,
        Err(e) => return Err(e),
    };
    let increasing = rows.windows(2).all(|w| w[1].ratio > w[0].ratio);
    let bounded = wiener.map(|w| rows.iter().all(|r| r.ratio <= w));
    Ok(ChebyshevTable {
        rows,
        wiener,
        method,
        increasing,
        bounded,
    })
}

/// Large-`m` behavior of `C^δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsymptoticModel {
    /// Leading-order prediction: `C^δ(alpha, m) / value → 1`.
    Value { value: f64, branch: String },
    /// The branch involves a constant with no known closed form.
    UnknownConstant { branch: String },
}

/// Asymptotic prediction for `C^δ(alpha, m)` on the unit circle, sphere and
/// ball.
pub fn asymptotic_model(set: &SetDescriptor, params: &RieszParams, m: usize) -> Result<AsymptoticModel> {
    if set.scale() != 1.0 {
        return Err(Error::Unsupported("asymptotic models are stated for unit sets".into()));
    }
    let alpha = params.alpha();
    let mf = m as f64;
    let value = |value: f64, branch: &str| {
        Ok(AsymptoticModel::Value {
            value,
            branch: branch.into(),
        })
    };
    match set {
        SetDescriptor::Circle { .. } => {
            if alpha < 1.0 {
                let t = 2.0 - alpha;
                let c = 2.0 * riemann_zeta(t)? / (2.0 * PI).powf(t) * (2f64.powf(t) - 1.0);
                value(-c * mf.powf(1.0 - alpha), "alpha < 1")
            } else if alpha == 1.0 {
                value(-mf.ln() / PI, "alpha = 1")
            } else {
                value(2f64.powf(alpha - 2.0) - wiener_constant(set, params)?, "1 < alpha < 2")
            }
        }
        SetDescriptor::Sphere { dim, .. } => {
            let n = *dim as f64;
            if alpha < 1.0 {
                Ok(AsymptoticModel::UnknownConstant {
                    branch: "alpha < 1".into(),
                })
            } else if alpha == 1.0 {
                let c = gamma(0.5 * n)? / ((n - 1.0) * gamma(0.5 * (n - 1.0))?);
                value(-mf.ln() / PI.sqrt() * c, "alpha = 1")
            } else {
                value(2f64.powf(alpha - n) - sphere_energy_unit(*dim, alpha), "1 < alpha < N")
            }
        }
        SetDescriptor::Ball { .. } => {
            if alpha < 0.0 {
                Ok(AsymptoticModel::UnknownConstant {
                    branch: "alpha < 0".into(),
                })
            } else if alpha == 0.0 {
                value(-mf.ln(), "alpha = 0")
            } else {
                Err(Error::Unsupported(
                    "no asymptotic branch for the ball with alpha > 0".into(),
                ))
            }
        }
        _ => Err(Error::Unsupported(format!(
            "no asymptotic model for {}",
            set.kind_name()
        ))),
    }
}

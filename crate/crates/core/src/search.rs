//! Infimum search over a catalog set.
//!
//! One-dimensional sets (circle, segment) are scanned on a uniform parameter
//! grid and the best grid minima are refined by golden section. Spheres and
//! balls start from a deterministic candidate cloud and refine by projected
//! coordinate descent. Finite sets are enumerated.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::quad::golden_section;
use crate::sets::{dist, lerp, Point, SetDescriptor};

/// Atoms closer than this (relative to the set scale) are not candidates.
pub const EXCLUDE_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Grid size for one-dimensional sets, candidate count otherwise.
    pub grid: usize,
    /// Number of grid minima refined locally.
    pub refine: usize,
    /// Position tolerance for the local refinement (relative to the set scale).
    pub tol: f64,
    /// Seed for random candidate clouds (spheres in dimension four and up).
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid: 2048,
            refine: 6,
            tol: 1e-10,
            seed: 0,
        }
    }
}

impl SearchOptions {
    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_refine(mut self, refine: usize) -> Self {
        self.refine = refine;
        self
    }
}

/// A refined local minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Point,
    pub value: f64,
    pub converged: bool,
}

/// Best minimizer of `f` over `set`; atoms in `exclude` are skipped.
pub fn minimize_on_set<F>(set: &SetDescriptor, f: F, exclude: &[Point], opts: &SearchOptions) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    local_minima_on_set(set, f, exclude, opts)
        .into_iter()
        .next()
        .unwrap_or(SearchResult {
            point: set.anchor_point(),
            value: f64::INFINITY,
            converged: false,
        })
}

/// Best maximizer of `f` over `set`.
pub fn maximize_on_set<F>(set: &SetDescriptor, f: F, exclude: &[Point], opts: &SearchOptions) -> SearchResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut r = minimize_on_set(set, |x| -f(x), exclude, opts);
    r.value = -r.value;
    r
}

/// Refined local minimizers, best first, at most `opts.refine` of them.
pub fn local_minima_on_set<F>(set: &SetDescriptor, f: F, exclude: &[Point], opts: &SearchOptions) -> Vec<SearchResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let excl = EXCLUDE_RADIUS * set.scale().max(1.0);
    let allowed = |x: &[f64]| exclude.iter().all(|a| dist(a, x) > excl);
    let g = |x: &[f64]| if allowed(x) { f(x) } else { f64::INFINITY };
    let mut out = match set {
        SetDescriptor::Circle { radius } => {
            let r = *radius;
            let at = move |t: f64| vec![r * t.cos(), r * t.sin()];
            line_search(|t| g(&at(t)), 0.0, 2.0 * PI, true, opts)
                .into_iter()
                .map(|(t, v, c)| SearchResult {
                    point: at(t),
                    value: v,
                    converged: c,
                })
                .collect()
        }
        SetDescriptor::Segment { a, b } => line_search(|t| g(&lerp(a, b, t)), 0.0, 1.0, false, opts)
            .into_iter()
            .map(|(t, v, c)| SearchResult {
                point: lerp(a, b, t),
                value: v,
                converged: c,
            })
            .collect(),
        SetDescriptor::FinitePoints { points } => {
            let mut res: Vec<SearchResult> = points
                .iter()
                .map(|p| SearchResult {
                    point: p.clone(),
                    value: g(p),
                    converged: true,
                })
                .filter(|r| r.value.is_finite())
                .collect();
            res.sort_by(|x, y| x.value.total_cmp(&y.value));
            res.truncate(opts.refine.max(1));
            res
        }
        SetDescriptor::Sphere { .. } | SetDescriptor::Ball { .. } => cloud_search(set, &g, opts),
    };
    out.sort_by(|x, y| x.value.total_cmp(&y.value));
    out
}

/// Minima of a function of one parameter on `[lo, hi]` (periodic if
/// `cyclic`): `(parameter, value, converged)`.
fn line_search<G>(g: G, lo: f64, hi: f64, cyclic: bool, opts: &SearchOptions) -> Vec<(f64, f64, bool)>
where
    G: Fn(f64) -> f64 + Sync,
{
    let n = opts.grid.max(8);
    let step = if cyclic {
        (hi - lo) / n as f64
    } else {
        (hi - lo) / (n - 1) as f64
    };
    let ts: Vec<f64> = (0..n).map(|k| lo + step * k as f64).collect();
    let vals: Vec<f64> = ts.par_iter().map(|&t| g(t)).collect();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| {
            if !vals[k].is_finite() {
                return false;
            }
            let left = if k > 0 {
                vals[k - 1]
            } else if cyclic {
                vals[n - 1]
            } else {
                f64::INFINITY
            };
            let right = if k + 1 < n {
                vals[k + 1]
            } else if cyclic {
                vals[0]
            } else {
                f64::INFINITY
            };
            vals[k] <= left && vals[k] <= right
        })
        .collect();
    if minima.is_empty() {
        // flat or everywhere infinite: fall back to the best grid value
        if let Some(k) = (0..n)
            .filter(|&k| vals[k].is_finite())
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        {
            minima.push(k);
        }
    }
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    minima.truncate(opts.refine.max(1));
    let tol = opts.tol * (hi - lo);
    minima
        .par_iter()
        .map(|&k| {
            let (a, b) = if cyclic {
                (ts[k] - step, ts[k] + step)
            } else {
                ((ts[k] - step).max(lo), (ts[k] + step).min(hi))
            };
            let (t, v) = golden_section(&g, a, b, tol);
            let (t, v) = if v <= vals[k] { (t, v) } else { (ts[k], vals[k]) };
            let t = if cyclic { lo + (t - lo).rem_euclid(hi - lo) } else { t };
            (t, v, true)
        })
        .collect()
}

/// Candidate cloud plus projected coordinate descent.
fn cloud_search<G>(set: &SetDescriptor, g: &G, opts: &SearchOptions) -> Vec<SearchResult>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    let cands = set.candidate_points(opts.grid, opts.seed);
    let vals: Vec<f64> = cands.par_iter().map(|p| g(p)).collect();
    let mut order: Vec<usize> = (0..cands.len()).filter(|&k| vals[k].is_finite()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let dim = set.ambient_dim() as f64;
    let scale = set.scale();
    // typical candidate spacing
    let manifold_dim = match set {
        SetDescriptor::Ball { .. } => dim,
        _ => dim - 1.0,
    };
    let spacing = scale * 4.0 * (1.0 / cands.len().max(1) as f64).powf(1.0 / manifold_dim);
    let mut starts: Vec<usize> = Vec::new();
    for &k in &order {
        if starts.len() >= opts.refine.max(1) {
            break;
        }
        if starts.iter().all(|&j| dist(&cands[j], &cands[k]) > spacing) {
            starts.push(k);
        }
    }
    starts
        .par_iter()
        .map(|&k| coordinate_descent(set, g, cands[k].clone(), vals[k], spacing, opts.tol * scale))
        .collect()
}

const MAX_DESCENT_EVALS: usize = 20_000;

/// Pattern search along the ambient axes, projecting each trial onto the set.
fn coordinate_descent<G>(set: &SetDescriptor, g: &G, mut x: Point, mut fx: f64, step: f64, tol: f64) -> SearchResult
where
    G: Fn(&[f64]) -> f64,
{
    let mut h = step;
    let mut evals = 0;
    while h > tol && evals < MAX_DESCENT_EVALS {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * h;
                let y = set.project(&y);
                let fy = g(&y);
                evals += 1;
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    SearchResult {
        point: x,
        value: fx,
        converged: h <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::norm;
    use approx::assert_relative_eq;

    #[test]
    fn circle_minimum_of_distance_squared() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        let target = [0.6, 0.8];
        let r = minimize_on_set(&circle, |x| -dist(x, &target), &[], &SearchOptions::default());
        // farthest point from (0.6, 0.8) is its antipode
        // the maximum of a distance is quadratic, so the position is good to about √ε
        assert!(dist(&r.point, &[-0.6, -0.8]) < 1e-6);
        assert_relative_eq!(r.value, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn segment_endpoints_are_candidates() {
        let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0]).unwrap();
        let r = minimize_on_set(&seg, |x| x[0], &[], &SearchOptions::default());
        assert_eq!(r.point, vec![-1.0, 0.0]);
    }

    #[test]
    fn excluded_atoms_are_skipped() {
        let set = SetDescriptor::finite_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let r = minimize_on_set(&set, |x| x[0], &[vec![0.0, 0.0]], &SearchOptions::default());
        assert_eq!(r.point, vec![1.0, 0.0]);
    }

    #[test]
    fn sphere_and_ball_refinement() {
        let sphere = SetDescriptor::sphere(3, 1.0).unwrap();
        let target = [0.3, -0.2, 0.5];
        let r = minimize_on_set(&sphere, |x| dist(x, &target), &[], &SearchOptions::default());
        let expect: Vec<f64> = target.iter().map(|v| v / norm(&target)).collect();
        assert!(dist(&r.point, &expect) < 1e-7, "{:?}", r.point);
        let ball = SetDescriptor::ball(3, 1.0).unwrap();
        let r = minimize_on_set(&ball, |x| dist(x, &target), &[], &SearchOptions::default());
        assert!(r.value < 1e-8);
        let sphere4 = SetDescriptor::sphere(4, 1.0).unwrap();
        let r = maximize_on_set(&sphere4, |x| x[3], &[], &SearchOptions::default());
        assert_relative_eq!(r.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn multiple_local_minima() {
        let circle = SetDescriptor::circle(1.0).unwrap();
        let f = |x: &[f64]| (3.0 * x[1].atan2(x[0])).cos();
        let minima = local_minima_on_set(&circle, f, &[], &SearchOptions::default());
        assert_eq!(minima.len(), 3);
        for m in minima {
            assert_relative_eq!(m.value, -1.0, epsilon = 1e-12);
        }
    }
}

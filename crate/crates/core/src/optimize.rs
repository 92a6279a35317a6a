//! Local optimizers and the multistart driver shared by the energy,
//! polarization and reverse-triangle searches.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Deterministic generator for start `index` of a multistart run.
pub fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Run `starts` independent starts in parallel. Results come back in start
/// order whatever the scheduling.
pub fn multistart<T, F>(starts: usize, seed: u64, run: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..starts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = start_rng(seed, i);
            run(i, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop when the gradient norm falls below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease over one step falls below this.
    pub ftol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            grad_tol: 1e-11,
            ftol: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Projected gradient descent with Barzilai–Borwein steps and Armijo
/// backtracking.
///
/// `fg` returns the value and the (already tangent) gradient; `retract`
/// maps a trial point back to the feasible set.
pub fn projected_gradient<FG, R>(fg: FG, retract: R, x0: Vec<f64>, opts: &DescentOptions) -> Descent
where
    FG: Fn(&[f64]) -> (f64, Vec<f64>),
    R: Fn(&mut [f64]),
{
    let mut x = x0;
    retract(&mut x);
    let (mut f, mut g) = fg(&x);
    let mut step = {
        let gn = norm(&g);
        if gn > 0.0 {
            1e-2 / gn
        } else {
            1.0
        }
    };
    let mut stalls = 0;
    for it in 0..opts.max_iter {
        let gn = norm(&g);
        if !(gn > opts.grad_tol) || !f.is_finite() {
            return Descent {
                x,
                value: f,
                iterations: it,
                converged: f.is_finite(),
            };
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            retract(&mut y);
            let (fy, gy) = fg(&y);
            let moved: f64 = x.iter().zip(&y).zip(&g).map(|((a, b), c)| (a - b) * c).sum();
            if fy.is_finite() && fy <= f - 1e-4 * moved.max(0.0) {
                accepted = Some((y, fy, gy));
                break;
            }
            t *= 0.5;
        }
        let Some((y, fy, gy)) = accepted else {
            return Descent {
                x,
                value: f,
                iterations: it,
                converged: true,
            };
        };
        let s: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let d: Vec<f64> = gy.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sd = dot(&s, &d);
        step = if sd > 0.0 {
            (dot(&s, &s) / sd).min(1e6 * t.max(1e-300))
        } else {
            2.0 * t
        };
        let decrease = f - fy;
        x = y;
        g = gy;
        f = fy;
        if decrease <= opts.ftol * f.abs().max(1e-300) {
            stalls += 1;
            if stalls >= 5 {
                return Descent {
                    x,
                    value: f,
                    iterations: it + 1,
                    converged: true,
                };
            }
        } else {
            stalls = 0;
        }
    }
    Descent {
        x,
        value: f,
        iterations: opts.max_iter,
        converged: false,
    }
}

/// Nelder–Mead simplex minimization.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_evals: usize, ftol: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if (vals[n] - vals[0]).abs() <= ftol * vals[0].abs().max(1e-300) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
        } else {
            let xc = if fr < vals[n] { along(0.5) } else { along(-0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < vals[n].min(fr) {
                simplex[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(a, b)| a + 0.5 * (b - a))
                        .collect();
                    vals[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    (simplex[best].clone(), vals[best])
}

/// One smooth piece `v + g·Δ` of a max–min objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub value: f64,
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlpOptions {
    pub trust: f64,
    pub trust_min: f64,
    pub max_iter: usize,
}

impl Default for SlpOptions {
    fn default() -> Self {
        Self {
            trust: 0.1,
            trust_min: 1e-11,
            max_iter: 400,
        }
    }
}

/// Sequential linear programming for `max_x min_j piece_j(x)`.
///
/// `pieces` linearizes the active pieces at `x`, `objective` evaluates the
/// true max–min value, `retract` maps back onto the feasible set. Each LP
/// maximizes the linear model inside a box trust region; steps are accepted
/// when the true value improves by a fraction of the predicted gain. The
/// returned `value` is the max–min value reached.
pub fn slp_max_min<P, O, R>(pieces: P, objective: O, retract: R, x0: Vec<f64>, opts: &SlpOptions) -> Descent
where
    P: Fn(&[f64]) -> Vec<Piece>,
    O: Fn(&[f64]) -> f64,
    R: Fn(&mut [f64]),
{
    let mut x = x0;
    retract(&mut x);
    let mut value = objective(&x);
    let mut trust = opts.trust;
    for it in 0..opts.max_iter {
        if trust < opts.trust_min {
            return Descent {
                x,
                value,
                iterations: it,
                converged: true,
            };
        }
        let ps = pieces(&x);
        let Some(delta) = solve_trust_lp(&ps, trust) else {
            trust *= 0.25;
            continue;
        };
        let model_min = ps
            .iter()
            .map(|p| p.value + dot(&p.gradient, &delta))
            .fold(f64::INFINITY, f64::min);
        let current_model = ps.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
        let predicted = model_min - current_model.min(value);
        if !(predicted > 1e-15 * value.abs().max(1e-300)) {
            trust *= 0.25;
            continue;
        }
        let mut y: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
        retract(&mut y);
        let vy = objective(&y);
        let actual = vy - value;
        if actual > 0.1 * predicted {
            x = y;
            value = vy;
            if actual > 0.75 * predicted {
                trust = (trust * 2.0).min(opts.trust * 10.0);
            }
        } else {
            trust *= 0.25;
        }
    }
    Descent {
        x,
        value,
        iterations: opts.max_iter,
        converged: false,
    }
}

fn solve_trust_lp(pieces: &[Piece], trust: f64) -> Option<Vec<f64>> {
    let n = pieces.first()?.gradient.len();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let vars: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (-trust, trust))).collect();
    // center the values so the LP stays well scaled
    let base = pieces.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let gscale = pieces
        .iter()
        .flat_map(|p| p.gradient.iter())
        .fold(0.0f64, |m, g| m.max(g.abs()))
        .max(1e-300);
    for p in pieces {
        let mut row = vec![(t, 1.0)];
        for (v, g) in vars.iter().zip(&p.gradient) {
            if *g != 0.0 {
                row.push((*v, -g / gscale));
            }
        }
        lp.add_constraint(row, ComparisonOp::Le, (p.value - base) / gscale);
    }
    let sol = lp.solve().ok()?;
    Some(vars.iter().map(|v| sol[*v]).collect())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn gradient_descent_on_quadratic() {
        let fg = |x: &[f64]| {
            let f = (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
            (f, vec![2.0 * (x[0] - 1.0), 20.0 * (x[1] + 2.0)])
        };
        let d = projected_gradient(fg, |_| {}, vec![5.0, 5.0], &DescentOptions::default());
        assert!(d.converged);
        assert_relative_eq!(d.x[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(d.x[1], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn projected_descent_respects_box() {
        let fg = |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]);
        let d = projected_gradient(fg, |x| x[0] = x[0].max(0.5), vec![3.0], &DescentOptions::default());
        assert_relative_eq!(d.x[0], 0.5);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, v) = nelder_mead(f, &[-1.2, 1.0], 0.5, 20_000, 1e-16);
        assert!(v < 1e-10);
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-4);
    }

    #[test]
    fn multistart_is_order_stable() {
        let a = multistart(16, 42, |i, rng| (i, rng.gen::<u64>()));
        let b = multistart(16, 42, |i, rng| (i, rng.gen::<u64>()));
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].0 < w[1].0));
        assert_ne!(a[0].1, a[1].1);
    }

    #[test]
    fn slp_solves_a_max_min() {
        // max over x of min(x, 1 - x) on the line: 1/2 at x = 1/2
        let pieces = |x: &[f64]| {
            vec![
                Piece {
                    value: x[0],
                    gradient: vec![1.0],
                },
                Piece {
                    value: 1.0 - x[0],
                    gradient: vec![-1.0],
                },
            ]
        };
        let obj = |x: &[f64]| x[0].min(1.0 - x[0]);
        let d = slp_max_min(pieces, obj, |_| {}, vec![0.05], &SlpOptions::default());
        assert_relative_eq!(d.x[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(d.value, 0.5, epsilon = 1e-9);
    }
}

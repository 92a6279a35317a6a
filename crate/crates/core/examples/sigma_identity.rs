//! Newtonian representing measures of the ball and segment: unit mass and
//! U^sigma = d_E^(2-N), plus the averaging check for a two-point set.

use riesz::distance_measure::{
    averaging_mass_check, sigma_for_ball, sigma_for_segment, test_points, verify_potential_identity, DEFAULT_LEVEL,
};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    for n in [3, 4, 5] {
        let params = RieszParams::new(n, 2.0)?;
        let pts = test_points(n, 20, 5.0, 1);
        for sigma in [sigma_for_ball(n, 2000)?, sigma_for_segment(n, 2000)?] {
            let r = verify_potential_identity(&sigma, &params, &pts, DEFAULT_LEVEL)?;
            println!(
                "N={n} {:<7} c={:.10} mass={:.12} max rel err={:.2e}",
                sigma.set.kind_name(),
                sigma.normalization,
                r.mass,
                r.max_rel_error
            );
        }
    }
    let two = SetDescriptor::finite_points(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]])?;
    for alpha in [2.0, 1.5] {
        let t = averaging_mass_check(&two, &RieszParams::new(3, alpha)?, &[10.0, 100.0, 1000.0], 2000)?;
        for r in &t.rows {
            println!(
                "alpha={alpha} R={:<6} ratio={:.8} lower={:.8}",
                r.radius, r.ratio, r.lower_bound
            );
        }
    }
    Ok(())
}

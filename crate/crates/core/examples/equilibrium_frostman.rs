//! Equilibrium measures and the Frostman check: the potential is at most W
//! everywhere and equals W on the set.

use riesz::measure::{equilibrium_measure, frostman_check};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let cases = [
        (SetDescriptor::circle(1.0)?, RieszParams::new(2, 1.5)?),
        (SetDescriptor::sphere(3, 1.0)?, RieszParams::new(3, 1.5)?),
        (SetDescriptor::ball(3, 1.0)?, RieszParams::new(3, 2.0)?),
        (SetDescriptor::ball(3, 1.0)?, RieszParams::new(3, 1.5)?),
    ];
    for (set, params) in cases {
        let mu = equilibrium_measure(&set, &params, 2000)?;
        let r = frostman_check(&set, &params, &mu, 200, 7)?;
        println!(
            "{:<7} alpha={} label={:<16} W={:.12} excess={:.2e} deviation={:.2e}",
            set.kind_name(),
            params.alpha(),
            mu.label().as_str(),
            r.wiener.unwrap_or(f64::NAN),
            r.max_excess.unwrap_or(f64::NAN),
            r.max_on_set_deviation.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

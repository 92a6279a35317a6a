//! Minimum-energy points: energies increase with n and sit below the
//! potential infimum, which sits below W.

use riesz::energy::{fekete_convergence_diagnostics, EnergyOptions};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let opts = EnergyOptions::default().with_seed(1);
    for (set, params) in [
        (SetDescriptor::circle(1.0)?, RieszParams::new(2, 1.5)?),
        (SetDescriptor::sphere(3, 1.0)?, RieszParams::new(3, 1.5)?),
    ] {
        let t = fekete_convergence_diagnostics(&set, &params, &[4, 8, 16, 32], &opts)?;
        println!("{} (W = {:.10})", set.kind_name(), t.wiener.unwrap_or(f64::NAN));
        for r in &t.rows {
            println!("  n={:<3} energy={:.10} inf U={:.10}", r.n, r.energy, r.inf_potential);
        }
        println!("  monotone={} sandwich={:?}", t.monotone, t.sandwich);
    }
    Ok(())
}

//! M_m / m against W on the circle, and large-m ratios of C^delta to its
//! leading-order model.

use riesz::polarization::{
    asymptotic_model, chebyshev_constant_estimate, polarization_delta_constant, AsymptoticModel, DeltaConstant,
    PolarizationOptions,
};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let circle = SetDescriptor::circle(1.0)?;
    let opts = PolarizationOptions::default();
    let t = chebyshev_constant_estimate(
        &circle,
        &RieszParams::new(2, 1.5)?,
        &[8, 16, 32, 64, 128, 256, 512, 1024],
        &opts,
    )?;
    let w = t.wiener.unwrap_or(f64::NAN);
    for r in &t.rows {
        println!(
            "m={:<5} M_m/m={:.6} gap to W={:.3}%",
            r.m,
            r.ratio,
            100.0 * (w - r.ratio) / w
        );
    }
    for alpha in [0.5, 1.0, 1.5] {
        let params = RieszParams::new(2, alpha)?;
        for m in [100, 1_000, 10_000] {
            let DeltaConstant::Exact { value, .. } = polarization_delta_constant(&circle, &params, m, &opts)? else {
                continue;
            };
            if let AsymptoticModel::Value { value: model, branch } = asymptotic_model(&circle, &params, m)? {
                println!("alpha={alpha} m={m:<6} ratio={:.6} ({branch})", value / model);
            }
        }
    }
    Ok(())
}

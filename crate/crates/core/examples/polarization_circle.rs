//! Max–min polarization on the circle: optimizer against the equally spaced
//! oracle, and the constant C^delta for nonpositive even alpha.

use riesz::polarization::{
    circle_polarization_oracle, max_polarization, polarization_delta_constant, DeltaConstant, PolarizationOptions,
};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let circle = SetDescriptor::circle(1.0)?;
    let opts = PolarizationOptions::default().with_seed(3);
    for s in [1.0, 2.0, 3.0] {
        for m in 2..=6 {
            let r = max_polarization(&circle, m, s, &opts)?;
            println!(
                "s={s} m={m} optimized={:.12} oracle={:.12}",
                r.value,
                circle_polarization_oracle(m, s)
            );
        }
    }
    for alpha in [0.0, -2.0, -4.0] {
        let params = RieszParams::new(2, alpha)?;
        let row: Vec<String> = (1..=6)
            .map(|m| match polarization_delta_constant(&circle, &params, m, &opts) {
                Ok(DeltaConstant::Exact { value, .. }) => format!("{value:.6}"),
                Ok(DeltaConstant::Interval { lower, upper, .. }) => format!("[{lower:.6}, {upper:.6}]"),
                Err(e) => e.to_string(),
            })
            .collect();
        println!("alpha={alpha}: {}", row.join(" "));
    }
    Ok(())
}

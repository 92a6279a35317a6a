//! Sharpness of the constant: minimum-energy points split among the optimal
//! centers, and the exact split of the equilibrium measure along arcs.

use riesz::energy::EnergyOptions;
use riesz::reverse_triangle::{
    rt_closed_form, rt_constant, sharpness_demo, sharpness_regular, RtOptions, SharpnessOptions,
};
use riesz::search::SearchOptions;
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let circle = SetDescriptor::circle(1.0)?;
    let params = RieszParams::new(2, 1.5)?;
    for m in [2, 3] {
        let centers = rt_constant(&circle, &params, m, &RtOptions::default().with_seed(9))?.centers;
        let c = rt_closed_form(&circle, &params, m)?;
        let opts = SharpnessOptions {
            energy: EnergyOptions::default().with_seed(9),
            ..SharpnessOptions::default()
        };
        let t = sharpness_demo(&circle, &params, &centers, c, &[8, 16, 32, 64, 128], &opts)?;
        for r in &t.rows {
            println!("m={m} n={:<4} gap={:.5} parts={:?}", r.n, r.gap, r.part_sizes);
        }
        let reg = sharpness_regular(&circle, &params, &centers, c, &SearchOptions::default().with_grid(512))?;
        println!("m={m} regular split gap={:.2e}", reg.gap);
    }
    Ok(())
}

//! Slack of the potential inequality over seeded random atomic
//! decompositions of a unit measure on the circle.

use riesz::reverse_triangle::{random_atomic_decompositions, rt_closed_form, verify_inequality};
use riesz::search::SearchOptions;
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let circle = SetDescriptor::circle(1.0)?;
    let params = RieszParams::new(2, 1.5)?;
    let search = SearchOptions::default();
    for m in [2, 3, 5] {
        let c = rt_closed_form(&circle, &params, m)?;
        let ds = random_atomic_decompositions(&circle, m, 3, 100, 42)?;
        let mut min = f64::INFINITY;
        for d in &ds {
            min = min.min(verify_inequality(&circle, &params, d, c, &search)?.slack);
        }
        println!("m={m} C={c:.10} min slack over {} decompositions: {min:.3e}", ds.len());
    }
    Ok(())
}

//! Reverse triangle constants: the circle against its closed form, the
//! segment (independent of m) and the Newtonian ball.

use riesz::reverse_triangle::{rt_closed_form, rt_constant, rt_limit_constant, RtOptions};
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let opts = RtOptions::default().with_seed(5);
    let circle = SetDescriptor::circle(1.0)?;
    let p = RieszParams::new(2, 1.5)?;
    for m in [2, 3, 4, 8, 16, 32, 64] {
        let r = rt_constant(&circle, &p, m, &opts)?;
        println!(
            "circle m={m:<3} optimized={:.12} closed={:.12}",
            r.value,
            rt_closed_form(&circle, &p, m)?
        );
    }
    println!("circle limit {:.12}", rt_limit_constant(&circle, &p, &opts)?.value);

    let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0])?;
    for m in 2..=4 {
        let r = rt_constant(&seg, &p, m, &opts)?;
        println!("segment m={m} C={:.8} centers={:?}", r.value, r.centers.points());
    }

    let ball = SetDescriptor::ball(3, 1.0)?;
    let q = RieszParams::new(3, 2.0)?;
    let small = RtOptions {
        resolution: 800,
        starts: 4,
        ..opts
    };
    for m in 2..=4 {
        println!("ball m={m} C={:.6}", rt_constant(&ball, &q, m, &small)?.value);
    }
    println!("ball limit {:.6}", rt_limit_constant(&ball, &q, &small)?.value);
    Ok(())
}

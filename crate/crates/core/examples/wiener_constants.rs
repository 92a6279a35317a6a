//! Wiener constants of the circle, spheres and balls.

use riesz::specfun::wiener_constant;
use riesz::{RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    for alpha in [1.25, 1.5, 1.75] {
        let w = wiener_constant(&SetDescriptor::circle(1.0)?, &RieszParams::new(2, alpha)?)?;
        println!("circle   alpha={alpha:<5} W={w:.15}");
    }
    for n in 3..=5 {
        let w = wiener_constant(&SetDescriptor::sphere(n, 1.0)?, &RieszParams::new(n, 1.5)?)?;
        println!("S^{}      alpha=1.5   W={w:.15}", n - 1);
    }
    for n in 3..=6 {
        for alpha in [1.0, 2.0] {
            let w = wiener_constant(&SetDescriptor::ball(n, 1.0)?, &RieszParams::new(n, alpha)?)?;
            println!("B^{n}      alpha={alpha:<5} W={w:.15}");
        }
    }
    Ok(())
}

//! Dominant sets: where the farthest distance of E is realized.

use riesz::reverse_triangle::dominant_set_analysis;
use riesz::sets::sphere_points;
use riesz::{Configuration, RieszParams, SetDescriptor};

fn main() -> riesz::Result<()> {
    let seg = SetDescriptor::segment(vec![-1.0, 0.0], vec![1.0, 0.0])?;
    let ends = Configuration::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], seg.clone())?;
    let r = dominant_set_analysis(&seg, &RieszParams::new(2, 1.5)?, &ends, 1000, 1, 1e-12)?;
    println!(
        "segment endpoints: dominant={} cardinality={:?}",
        r.is_dominant, r.cardinality
    );

    let circle = SetDescriptor::circle(1.0)?;
    let angles: Vec<f64> = (0..64).map(|k| k as f64 * std::f64::consts::TAU / 64.0).collect();
    let cand = Configuration::on_circle(1.0, &angles)?;
    let r = dominant_set_analysis(&circle, &RieszParams::new(2, 1.5)?, &cand, 1000, 1, 1e-9)?;
    println!(
        "circle 64 points: dominant={} defect={:.2e} cardinality={:?}",
        r.is_dominant, r.max_defect, r.cardinality
    );

    let ball = SetDescriptor::ball(3, 1.0)?;
    let cand = Configuration::new(sphere_points(3, 10_000, 2), ball.clone())?;
    let r = dominant_set_analysis(&ball, &RieszParams::new(3, 2.0)?, &cand, 2000, 1, 1e-2)?;
    println!(
        "ball boundary sample: dominant within 1e-2={} defect={:.2e}",
        r.is_dominant, r.max_defect
    );
    Ok(())
}

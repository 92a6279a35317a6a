//! Catalog of compact sets, point configurations on them, and small
//! Euclidean helpers.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = Vec<f64>;

/// Membership tolerance used by [`Configuration`], relative to the set size.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A compact set from the catalog. Circles, spheres and balls are centered
/// at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    /// Circle of the given radius in `R^2`.
    Circle { radius: f64 },
    /// Sphere `S^(dim-1)` of the given radius in `R^dim`.
    Sphere { dim: usize, radius: f64 },
    /// Closed ball in `R^dim`.
    Ball { dim: usize, radius: f64 },
    /// Segment `[a, b]` in `R^N`.
    Segment { a: Point, b: Point },
    /// Finite point set, at least two distinct points.
    FinitePoints { points: Vec<Point> },
}

impl SetDescriptor {
    pub fn circle(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Self::Circle { radius })
    }

    pub fn sphere(dim: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if dim < 2 {
            return Err(Error::InvalidSet(format!("sphere needs dim >= 2, got {dim}")));
        }
        if dim == 2 {
            return Self::circle(radius);
        }
        Ok(Self::Sphere { dim, radius })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if dim < 2 {
            return Err(Error::InvalidSet(format!("ball needs dim >= 2, got {dim}")));
        }
        Ok(Self::Ball { dim, radius })
    }

    pub fn segment(a: Point, b: Point) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(Error::InvalidSet(
                "segment endpoints must share a dimension >= 2".into(),
            ));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSet("segment endpoints must be finite".into()));
        }
        if dist(&a, &b) == 0.0 {
            return Err(Error::InvalidSet("segment endpoints must be distinct".into()));
        }
        Ok(Self::Segment { a, b })
    }

    pub fn finite_points(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        if dim < 2 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidSet(
                "finite set points must share a dimension >= 2".into(),
            ));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSet("finite set points must be finite".into()));
        }
        let distinct = points.iter().any(|p| dist(p, &points[0]) > 0.0);
        if !distinct {
            return Err(Error::InvalidSet(
                "finite set needs at least two distinct points".into(),
            ));
        }
        Ok(Self::FinitePoints { points })
    }

    /// Re-run the constructor checks, e.g. after deserialization.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Circle { radius } => Self::circle(radius),
            Self::Sphere { dim, radius } => Self::sphere(dim, radius),
            Self::Ball { dim, radius } => Self::ball(dim, radius),
            Self::Segment { a, b } => Self::segment(a, b),
            Self::FinitePoints { points } => Self::finite_points(points),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Circle { .. } => 2,
            Self::Sphere { dim, .. } | Self::Ball { dim, .. } => *dim,
            Self::Segment { a, .. } => a.len(),
            Self::FinitePoints { points } => points[0].len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Circle { .. } => "circle",
            Self::Sphere { .. } => "sphere",
            Self::Ball { .. } => "ball",
            Self::Segment { .. } => "segment",
            Self::FinitePoints { .. } => "finite_points",
        }
    }

    /// Characteristic size used to scale tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            Self::Circle { radius } | Self::Sphere { radius, .. } | Self::Ball { radius, .. } => *radius,
            _ => self.diameter(),
        }
    }

    /// `d_E(x) = sup_{t in E} |x - t|`.
    pub fn farthest_distance(&self, x: &[f64]) -> f64 {
        match self {
            Self::Circle { radius } | Self::Sphere { radius, .. } | Self::Ball { radius, .. } => norm(x) + radius,
            Self::Segment { a, b } => dist(x, a).max(dist(x, b)),
            Self::FinitePoints { points } => points.iter().map(|p| dist(x, p)).fold(0.0, f64::max),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Self::Circle { radius } | Self::Sphere { radius, .. } | Self::Ball { radius, .. } => 2.0 * radius,
            Self::Segment { a, b } => dist(a, b),
            Self::FinitePoints { points } => {
                let mut d: f64 = 0.0;
                for (i, p) in points.iter().enumerate() {
                    for q in &points[i + 1..] {
                        d = d.max(dist(p, q));
                    }
                }
                d
            }
        }
    }

    /// Distance from `x` to the set.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        dist(x, &p)
    }

    /// Membership with a tolerance relative to the set scale.
    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        x.len() == self.ambient_dim() && self.distance_to(x) <= rel_tol * self.scale().max(1.0)
    }

    /// Nearest point of the set (for the sphere and circle, the radial
    /// projection; the origin maps to the north pole).
    pub fn project(&self, x: &[f64]) -> Point {
        match self {
            Self::Circle { radius } | Self::Sphere { radius, .. } => {
                let r = norm(x);
                if r == 0.0 {
                    let mut p = vec![0.0; x.len()];
                    p[x.len() - 1] = *radius;
                    p
                } else {
                    x.iter().map(|v| v * radius / r).collect()
                }
            }
            Self::Ball { radius, .. } => {
                let r = norm(x);
                if r <= *radius {
                    x.to_vec()
                } else {
                    x.iter().map(|v| v * radius / r).collect()
                }
            }
            Self::Segment { a, b } => {
                let t = segment_parameter(a, b, x);
                lerp(a, b, t)
            }
            Self::FinitePoints { points } => points
                .iter()
                .min_by(|p, q| dist(x, p).total_cmp(&dist(x, q)))
                .cloned()
                .unwrap_or_else(|| x.to_vec()),
        }
    }

    /// A random point of the set (uniform for circle, sphere, ball and
    /// segment; uniform over the points for a finite set).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Self::Circle { radius } => {
                let t = rng.gen::<f64>() * 2.0 * PI;
                vec![radius * t.cos(), radius * t.sin()]
            }
            Self::Sphere { dim, radius } => scale(&random_unit(*dim, rng), *radius),
            Self::Ball { dim, radius } => {
                let u: f64 = rng.gen();
                scale(&random_unit(*dim, rng), radius * u.powf(1.0 / *dim as f64))
            }
            Self::Segment { a, b } => lerp(a, b, rng.gen()),
            Self::FinitePoints { points } => points[rng.gen_range(0..points.len())].clone(),
        }
    }

    /// The boundary relevant for the Newtonian center restriction: the
    /// bounding sphere for a ball, the set itself otherwise.
    pub fn boundary(&self) -> SetDescriptor {
        match self {
            Self::Ball { dim, radius } => {
                if *dim == 2 {
                    Self::Circle { radius: *radius }
                } else {
                    Self::Sphere {
                        dim: *dim,
                        radius: *radius,
                    }
                }
            }
            other => other.clone(),
        }
    }

    /// Some point of the set.
    pub fn anchor_point(&self) -> Point {
        match self {
            Self::Circle { radius } => vec![*radius, 0.0],
            Self::Sphere { dim, radius } => {
                let mut p = vec![0.0; *dim];
                p[dim - 1] = *radius;
                p
            }
            Self::Ball { dim, .. } => vec![0.0; *dim],
            Self::Segment { a, .. } => a.clone(),
            Self::FinitePoints { points } => points[0].clone(),
        }
    }

    /// Set translated by `-shift`. Circles, spheres and balls are stored
    /// centered, so they translate into a finite/segment form only when the
    /// shift is zero.
    pub fn translated(&self, shift: &[f64]) -> Result<SetDescriptor> {
        if norm(shift) == 0.0 {
            return Ok(self.clone());
        }
        match self {
            Self::Segment { a, b } => Self::segment(sub(a, shift), sub(b, shift)),
            Self::FinitePoints { points } => Self::finite_points(points.iter().map(|p| sub(p, shift)).collect()),
            _ => Err(Error::Unsupported(format!(
                "{} is stored centered at the origin",
                self.kind_name()
            ))),
        }
    }

    /// Deterministic candidate points covering the set, used by the
    /// infimum search. Roughly `count` points.
    pub fn candidate_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let count = count.max(4);
        match self {
            Self::Circle { radius } => (0..count)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / count as f64;
                    vec![radius * t.cos(), radius * t.sin()]
                })
                .collect(),
            Self::Sphere { dim, radius } => sphere_points(*dim, count, seed)
                .into_iter()
                .map(|p| scale(&p, *radius))
                .collect(),
            Self::Ball { dim, radius } => {
                let shells = 6usize;
                let per = (count / (shells + 1)).max(4);
                let mut out = Vec::with_capacity(count + 1);
                out.push(vec![0.0; *dim]);
                for k in 1..=shells {
                    let r = radius * k as f64 / shells as f64;
                    // outer shells get more points
                    let n = per * k * 2 / (shells + 1) + 4;
                    out.extend(
                        sphere_points(*dim, n, seed.wrapping_add(k as u64))
                            .into_iter()
                            .map(|p| scale(&p, r)),
                    );
                }
                out
            }
            Self::Segment { a, b } => (0..count).map(|k| lerp(a, b, k as f64 / (count - 1) as f64)).collect(),
            Self::FinitePoints { points } => points.clone(),
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidSet(format!(
            "radius must be positive and finite, got {radius}"
        )));
    }
    Ok(())
}

/// Clamped parameter of the orthogonal projection of `x` on `[a, b]`.
pub fn segment_parameter(a: &[f64], b: &[f64], x: &[f64]) -> f64 {
    let ab = sub(b, a);
    let t = dot(&sub(x, a), &ab) / dot(&ab, &ab);
    t.clamp(0.0, 1.0)
}

/// An ordered list of points on a parent set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Point>,
    parent: SetDescriptor,
}

impl Configuration {
    pub fn new(points: Vec<Point>, parent: SetDescriptor) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !parent.contains(p, MEMBERSHIP_TOL) {
                return Err(Error::NotOnSet(format!(
                    "point {i} = {p:?} is at distance {:.3e} from the {}",
                    parent.distance_to(p),
                    parent.kind_name()
                )));
            }
        }
        Ok(Self { points, parent })
    }

    /// Points projected onto the parent set before validation.
    pub fn projected(points: Vec<Point>, parent: SetDescriptor) -> Result<Self> {
        let points = points.iter().map(|p| parent.project(p)).collect();
        Self::new(points, parent)
    }

    /// Points `r e^{iθ_k}` on a circle.
    pub fn on_circle(radius: f64, angles: &[f64]) -> Result<Self> {
        let parent = SetDescriptor::circle(radius)?;
        Self::new(
            angles
                .iter()
                .map(|t| vec![radius * t.cos(), radius * t.sin()])
                .collect(),
            parent,
        )
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn parent(&self) -> &SetDescriptor {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Angles in `[0, 2π)` of circle points, in storage order.
    pub fn angles(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| p[1].atan2(p[0]).rem_euclid(2.0 * PI))
            .collect()
    }

    /// Canonical representative under the isometries of the parent set.
    ///
    /// Circle: the rotation that puts one point at angle 0 and makes the
    /// sorted angle list lexicographically smallest. Sphere: one point is
    /// moved to the pole; in `R^3` a nearest neighbour of the pole is also
    /// moved to azimuth 0, so the result is invariant under `O(3)`. In higher
    /// dimension only the pole is fixed. Other sets are sorted
    /// lexicographically.
    pub fn canonical(&self) -> Configuration {
        let points = match &self.parent {
            SetDescriptor::Circle { radius } => {
                let angles = self.angles();
                let mut best: Option<Vec<f64>> = None;
                for &t0 in &angles {
                    let mut rotated: Vec<f64> = angles
                        .iter()
                        .map(|t| {
                            let r = (t - t0).rem_euclid(2.0 * PI);
                            if 2.0 * PI - r < 1e-12 {
                                0.0
                            } else {
                                r
                            }
                        })
                        .collect();
                    rotated.sort_by(f64::total_cmp);
                    let better = match &best {
                        None => true,
                        Some(b) => lex_less(&rotated, b),
                    };
                    if better {
                        best = Some(rotated);
                    }
                }
                best.unwrap_or_default()
                    .iter()
                    .map(|t| vec![radius * t.cos(), radius * t.sin()])
                    .collect()
            }
            SetDescriptor::Sphere { dim, radius } if !self.points.is_empty() => {
                canonical_sphere(&self.points, *dim, *radius)
            }
            _ => {
                let mut pts = self.points.clone();
                pts.sort_by(|p, q| lex_cmp(p, q));
                pts
            }
        };
        Configuration {
            points,
            parent: self.parent.clone(),
        }
    }
}

/// Every point is tried as the pole; in `R^3` each point closest to the pole
/// is also tried as the azimuth reference, in both orientations. The
/// smallest resulting sorted list wins.
fn canonical_sphere(points: &[Point], dim: usize, radius: f64) -> Vec<Point> {
    let mut pole = vec![0.0; dim];
    pole[dim - 1] = radius;
    let tol = 1e-9 * radius;
    let mut best: Option<Vec<Point>> = None;
    let mut consider = |cand: Vec<Point>| {
        let mut cand: Vec<Point> = cand.into_iter().map(|p| scale(&p, radius / norm(&p))).collect();
        cand.sort_by(|p, q| rounded_cmp(q, p));
        let flat: Vec<f64> = cand.iter().flatten().map(|v| -v).collect();
        let better = match &best {
            None => true,
            Some(b) => {
                let bf: Vec<f64> = b.iter().flatten().map(|v| -v).collect();
                lex_less(&flat, &bf)
            }
        };
        if better {
            best = Some(cand);
        }
    };
    for top in points {
        let pts: Vec<Point> = points.iter().map(|p| reflect_onto(p, top, &pole)).collect();
        if dim != 3 {
            consider(pts);
            continue;
        }
        let others: Vec<&Point> = pts.iter().filter(|p| dist(p, &pole) > tol).collect();
        let zmax = others.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
        if others.is_empty() {
            consider(pts);
            continue;
        }
        for n in others.iter().filter(|p| p[2] >= zmax - tol) {
            let phi = n[1].atan2(n[0]);
            let (s, c) = (-phi).sin_cos();
            let rotated: Vec<Point> = pts
                .iter()
                .map(|p| vec![c * p[0] - s * p[1], s * p[0] + c * p[1], p[2]])
                .collect();
            let mirrored: Vec<Point> = rotated.iter().map(|p| vec![p[0], -p[1], p[2]]).collect();
            consider(rotated);
            consider(mirrored);
        }
    }
    best.unwrap_or_default()
}

fn rounded_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    let r = |v: f64| (v * 1e9).round();
    for (x, y) in a.iter().zip(b) {
        match r(*x).total_cmp(&r(*y)) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    // differences below 1e-12 are rounding noise between equivalent rotations
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x < y;
        }
    }
    false
}

/// Householder reflection mapping `from` to `to` (same norm) applied to `p`.
fn reflect_onto(p: &[f64], from: &[f64], to: &[f64]) -> Point {
    let v = sub(from, to);
    let vv = dot(&v, &v);
    if vv < 1e-30 {
        return p.to_vec();
    }
    let k = 2.0 * dot(p, &v) / vv;
    p.iter().zip(&v).map(|(a, b)| a - k * b).collect()
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Point {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], k: f64) -> Point {
    a.iter().map(|x| x * k).collect()
}

#[inline]
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Point {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Uniform random point on the unit sphere in `R^dim`.
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
    loop {
        let v: Point = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-12 {
            return scale(&v, 1.0 / n);
        }
    }
}

/// Roughly uniform points on the unit sphere: a Fibonacci lattice in `R^3`,
/// equally spaced angles in `R^2`, seeded random points in higher dimension.
pub fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Point> {
    match dim {
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(count),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count).map(|_| random_unit(dim, &mut rng)).collect()
        }
    }
}

/// Fibonacci lattice on the unit sphere in `R^3`.
pub fn fibonacci_sphere(count: usize) -> Vec<Point> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Random orthogonal matrix (rows) from Gram–Schmidt on Gaussian vectors.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Point> {
    let mut rows: Vec<Point> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Point = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        for r in &rows {
            let k = dot(&v, r);
            for (a, b) in v.iter_mut().zip(r) {
                *a -= k * b;
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            rows.push(scale(&v, 1.0 / n));
        }
    }
    rows
}

/// `Q x` for a row-major matrix `Q`.
pub fn mat_vec(q: &[Point], x: &[f64]) -> Point {
    q.iter().map(|row| dot(row, x)).collect()
}

//! Planar primitives: points, the start/goal frame, convex obstacle regions,
//! robot-size inflation and curve/region intersection.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default number of chord vertices used to approximate each rounded corner
/// of an inflated polygon.
pub const DEFAULT_ARC_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToLocal,
    ToGlobal,
}

/// Local frame whose origin is the start position and whose x-axis points
/// at the goal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    origin: Point2<T>,
    angle: T,
    cos: T,
    sin: T,
}

impl<T: Scalar> Frame<T> {
    pub fn new(origin: Point2<T>, angle: T) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self {
            origin,
            angle,
            cos,
            sin,
        }
    }

    /// Frame with origin `start` and x-axis along `goal - start`.
    pub fn from_endpoints(start: Point2<T>, goal: Point2<T>) -> Result<Self> {
        let d = goal - start;
        if d.x == T::zero() && d.y == T::zero() {
            return Err(Error::DegenerateEndpoints);
        }
        // atan2 rather than atan(dy/dx): the goal must land on the positive
        // local x-axis even when it lies to the left of the start.
        Ok(Self::new(start, d.y.atan2(d.x)))
    }

    pub fn origin(&self) -> Point2<T> {
        self.origin
    }

    pub fn angle(&self) -> T {
        self.angle
    }

    /// Rows of the global-to-local rotation matrix.
    pub fn rotation(&self) -> [[T; 2]; 2] {
        [[self.cos, self.sin], [-self.sin, self.cos]]
    }

    #[inline]
    pub fn to_local(&self, p: Point2<T>) -> Point2<T> {
        let d = p - self.origin;
        Point2::new(
            self.cos * d.x + self.sin * d.y,
            -self.sin * d.x + self.cos * d.y,
        )
    }

    #[inline]
    pub fn to_global(&self, p: Point2<T>) -> Point2<T> {
        Point2::new(
            self.cos * p.x - self.sin * p.y + self.origin.x,
            self.sin * p.x + self.cos * p.y + self.origin.y,
        )
    }

    pub fn transform(&self, p: Point2<T>, direction: Direction) -> Point2<T> {
        match direction {
            Direction::ToLocal => self.to_local(p),
            Direction::ToGlobal => self.to_global(p),
        }
    }

    /// Heading angle expressed in the local frame.
    pub fn heading_to_local(&self, theta: T) -> T {
        theta - self.angle
    }

    pub fn region_to_local(&self, region: &ConvexRegion<T>) -> ConvexRegion<T> {
        region.map_rigid(|p| self.to_local(p))
    }

    pub fn region_to_global(&self, region: &ConvexRegion<T>) -> ConvexRegion<T> {
        region.map_rigid(|p| self.to_global(p))
    }
}

/// Closed convex obstacle region.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexRegion<T> {
    Disc {
        center: Point2<T>,
        radius: T,
    },
    /// Counterclockwise vertex loop.
    Polygon {
        vertices: Vec<Point2<T>>,
    },
}

impl<T: Scalar> ConvexRegion<T> {
    pub fn disc(center: Point2<T>, radius: T) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() || radius <= T::zero() {
            return Err(Error::InvalidRegion(format!(
                "disc radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Self::Disc { center, radius })
    }

    /// Builds a convex polygon. Clockwise input is reversed; collinear
    /// vertices are allowed, reflex vertices and zero-length edges are not.
    pub fn polygon(mut vertices: Vec<Point2<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidRegion(format!(
                "polygon needs at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRegion("non-finite polygon vertex".into()));
        }
        let n = vertices.len();
        let area2: T = (0..n)
            .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
            .sum();
        if area2 == T::zero() {
            return Err(Error::InvalidRegion("polygon has zero area".into()));
        }
        if area2 < T::zero() {
            vertices.reverse();
        }
        let scale = vertices
            .iter()
            .fold(T::one(), |m, v| m.max(v.x.abs()).max(v.y.abs()));
        let tol = T::epsilon() * T::lit(64.0) * scale * scale;
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if a == b {
                return Err(Error::InvalidRegion(format!(
                    "zero-length edge at vertex {i}"
                )));
            }
            if (b - a).cross(c - b) < -tol {
                return Err(Error::InvalidRegion(format!(
                    "polygon is not convex at vertex {}",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self::Polygon { vertices })
    }

    fn map_rigid(&self, f: impl Fn(Point2<T>) -> Point2<T>) -> Self {
        match self {
            Self::Disc { center, radius } => Self::Disc {
                center: f(*center),
                radius: *radius,
            },
            Self::Polygon { vertices } => Self::Polygon {
                vertices: vertices.iter().map(|&v| f(v)).collect(),
            },
        }
    }

    fn scale(&self) -> T {
        match self {
            Self::Disc { center, radius } => T::one()
                .max(center.x.abs())
                .max(center.y.abs())
                .max(*radius),
            Self::Polygon { vertices } => vertices
                .iter()
                .fold(T::one(), |m, v| m.max(v.x.abs()).max(v.y.abs())),
        }
    }

    /// Closed membership test; boundary points are inside.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let eps = T::epsilon() * T::lit(16.0) * self.scale().max(p.x.abs()).max(p.y.abs());
        match self {
            Self::Disc { center, radius } => p.distance(*center) <= *radius + eps,
            Self::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let edge = b - a;
                    edge.cross(p - a) >= -eps * edge.norm()
                })
            }
        }
    }

    /// Euclidean distance from `p` to the region (zero inside).
    pub fn distance(&self, p: Point2<T>) -> T {
        match self {
            Self::Disc { center, radius } => (p.distance(*center) - *radius).max(T::zero()),
            Self::Polygon { vertices } => {
                if self.contains(p) {
                    return T::zero();
                }
                let n = vertices.len();
                (0..n)
                    .map(|i| point_segment_distance(p, vertices[i], vertices[(i + 1) % n]))
                    .fold(T::infinity(), T::min)
            }
        }
    }

    /// Largest distance between two points of the region.
    pub fn diameter(&self) -> T {
        match self {
            Self::Disc { radius, .. } => *radius + *radius,
            Self::Polygon { vertices } => {
                let mut best = T::zero();
                for (i, a) in vertices.iter().enumerate() {
                    for b in &vertices[i + 1..] {
                        best = best.max(a.distance(*b));
                    }
                }
                best
            }
        }
    }

    /// Largest distance from `p` to any point of the region.
    pub fn farthest_distance(&self, p: Point2<T>) -> T {
        match self {
            Self::Disc { center, radius } => p.distance(*center) + *radius,
            Self::Polygon { vertices } => vertices
                .iter()
                .map(|v| p.distance(*v))
                .fold(T::zero(), T::max),
        }
    }

    /// Axis-aligned bounds `(min_x, max_x, min_y, max_y)`.
    pub fn bounds(&self) -> (T, T, T, T) {
        match self {
            Self::Disc { center, radius } => (
                center.x - *radius,
                center.x + *radius,
                center.y - *radius,
                center.y + *radius,
            ),
            Self::Polygon { vertices } => vertices.iter().fold(
                (
                    T::infinity(),
                    T::neg_infinity(),
                    T::infinity(),
                    T::neg_infinity(),
                ),
                |(a, b, c, d), v| (a.min(v.x), b.max(v.x), c.min(v.y), d.max(v.y)),
            ),
        }
    }

    /// Ordinate range of the vertical line at `x` inside the region.
    pub fn vertical_slice(&self, x: T) -> Option<(T, T)> {
        match self {
            Self::Disc { center, radius } => {
                let dx = x - center.x;
                if dx.abs() > *radius {
                    return None;
                }
                let h = (*radius * *radius - dx * dx).max(T::zero()).sqrt();
                Some((center.y - h, center.y + h))
            }
            Self::Polygon { vertices } => {
                let n = vertices.len();
                let mut lo = T::infinity();
                let mut hi = T::neg_infinity();
                for i in 0..n {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % n];
                    let (xmin, xmax) = if a.x <= b.x { (a.x, b.x) } else { (b.x, a.x) };
                    if x < xmin || x > xmax {
                        continue;
                    }
                    if a.x == b.x {
                        lo = lo.min(a.y.min(b.y));
                        hi = hi.max(a.y.max(b.y));
                    } else {
                        let t = (x - a.x) / (b.x - a.x);
                        let y = a.y + t * (b.y - a.y);
                        lo = lo.min(y);
                        hi = hi.max(y);
                    }
                }
                (lo <= hi).then_some((lo, hi))
            }
        }
    }

    /// Abscissa interval on which the region attains its maximum (`top`)
    /// or minimum ordinate, together with that ordinate.
    fn extreme_side(&self, top: bool) -> (T, T, T) {
        match self {
            Self::Disc { center, radius } => {
                let y = if top {
                    center.y + *radius
                } else {
                    center.y - *radius
                };
                (center.x, center.x, y)
            }
            Self::Polygon { vertices } => {
                let pick = |v: &Point2<T>| if top { v.y } else { -v.y };
                let best = vertices.iter().map(pick).fold(T::neg_infinity(), T::max);
                let tol = T::tolerance() * best.abs().max(T::one());
                let (lo, hi) = vertices
                    .iter()
                    .filter(|v| pick(v) >= best - tol)
                    .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                        (lo.min(v.x), hi.max(v.x))
                    });
                (lo, hi, if top { best } else { -best })
            }
        }
    }
}

/// Obstacle region inflated by the robot size.
#[derive(Debug, Clone, PartialEq)]
pub struct EnlargedRegion<T> {
    pub source: ConvexRegion<T>,
    pub inflation: T,
    pub boundary: ConvexRegion<T>,
}

impl<T: Scalar> EnlargedRegion<T> {
    pub fn contains(&self, p: Point2<T>) -> bool {
        self.boundary.contains(p)
    }

    pub fn distance(&self, p: Point2<T>) -> T {
        self.boundary.distance(p)
    }
}

impl<T: Scalar> std::ops::Deref for EnlargedRegion<T> {
    type Target = ConvexRegion<T>;
    fn deref(&self) -> &ConvexRegion<T> {
        &self.boundary
    }
}

/// Inflates `region` by `r` with [`DEFAULT_ARC_POINTS`] per corner.
pub fn enlarge<T: Scalar>(region: &ConvexRegion<T>, r: T) -> Result<EnlargedRegion<T>> {
    enlarge_with(region, r, DEFAULT_ARC_POINTS)
}

/// Minkowski sum of `region` with a disc of radius `r`.
///
/// Discs are exact. Polygon corners are replaced by `arc_points` vertices of
/// a polygon circumscribed about the corner arc, so the result contains the
/// exact sum and its edges coincide with the exact offset edges.
pub fn enlarge_with<T: Scalar>(
    region: &ConvexRegion<T>,
    r: T,
    arc_points: usize,
) -> Result<EnlargedRegion<T>> {
    if !(r >= T::zero()) {
        return Err(Error::NegativeInflation(r.to_f64_lossy()));
    }
    if r == T::zero() {
        return Ok(EnlargedRegion {
            source: region.clone(),
            inflation: r,
            boundary: region.clone(),
        });
    }
    let boundary = match region {
        ConvexRegion::Disc { center, radius } => ConvexRegion::Disc {
            center: *center,
            radius: *radius + r,
        },
        ConvexRegion::Polygon { vertices } => {
            let m = arc_points.max(1);
            let n = vertices.len();
            let normal = |a: Point2<T>, b: Point2<T>| {
                let d = b - a;
                let len = d.norm();
                Point2::new(d.y / len, -d.x / len)
            };
            let mut out = Vec::with_capacity(n * m);
            for i in 0..n {
                let prev = vertices[(i + n - 1) % n];
                let v = vertices[i];
                let next = vertices[(i + 1) % n];
                let n0 = normal(prev, v);
                let n1 = normal(v, next);
                let a0 = n0.y.atan2(n0.x);
                let turn = n0.cross(n1).atan2(n0.dot(n1));
                if turn <= T::tolerance() {
                    out.push(v + n0 * r);
                    continue;
                }
                let step = turn / T::lit(m as f64);
                let reach = r / (step / T::lit(2.0)).cos();
                for j in 0..m {
                    let ang = a0 + step * (T::lit(j as f64) + T::lit(0.5));
                    out.push(v + Point2::new(ang.cos(), ang.sin()) * reach);
                }
            }
            ConvexRegion::Polygon { vertices: out }
        }
    };
    Ok(EnlargedRegion {
        source: region.clone(),
        inflation: r,
        boundary,
    })
}

pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a + ab * t)
}

/// Distance from a point to a region (zero on or inside it).
pub fn dist_point_region<T: Scalar>(p: Point2<T>, region: &ConvexRegion<T>) -> T {
    region.distance(p)
}

/// Which side of a boundary curve `y = f(x)` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `y > f(x)`.
    Above,
    /// `y <= f(x)`.
    AtOrBelow,
}

impl Side {
    /// Side selected by a turning direction under `sgn(0) = -1`.
    pub fn from_direction<T: Scalar>(beta: T) -> Self {
        if beta > T::zero() {
            Side::Above
        } else {
            Side::AtOrBelow
        }
    }
}

/// Restricts a region to one side of a curve.
pub struct SideFilter<'a, T> {
    pub boundary: &'a dyn Fn(T) -> T,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionExtremes<T> {
    pub min_x: T,
    pub max_x: T,
    pub min_y: T,
    pub max_y: T,
    /// Smallest abscissa at which the extreme ordinate is attained.
    pub near_x: T,
    /// Largest abscissa at which the extreme ordinate is attained.
    pub far_x: T,
    /// Extreme ordinate. Unfiltered: the one with the larger magnitude.
    /// Filtered above: the maximum. Filtered at-or-below: the minimum.
    pub extreme_y: T,
}

const SLICE_SAMPLES: usize = 512;

/// Bounding extremes of a region, optionally restricted to one side of a
/// curve.
///
/// The unfiltered case is exact. With a filter the admissible abscissa set
/// is located by sampling plus bisection; the extreme ordinate is exact
/// whenever the region's own extreme side survives the filter.
pub fn region_extremes<T: Scalar>(
    region: &ConvexRegion<T>,
    filter: Option<&SideFilter<'_, T>>,
) -> Result<RegionExtremes<T>> {
    let (x0, x1, y0, y1) = region.bounds();
    let Some(filter) = filter else {
        let top = y1.abs() >= y0.abs();
        let (near_x, far_x, extreme_y) = region.extreme_side(top);
        return Ok(RegionExtremes {
            min_x: x0,
            max_x: x1,
            min_y: y0,
            max_y: y1,
            near_x,
            far_x,
            extreme_y,
        });
    };

    let keep = |x: T| -> Option<(T, T)> {
        let (lo, hi) = region.vertical_slice(x)?;
        let f = (filter.boundary)(x);
        match filter.side {
            Side::Above => (hi > f).then(|| (lo.max(f), hi)),
            Side::AtOrBelow => (lo <= f).then(|| (lo, hi.min(f))),
        }
    };
    let intervals = admissible_intervals(x0, x1, |x| keep(x).is_some());
    if intervals.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let min_x = intervals[0].0;
    let max_x = intervals[intervals.len() - 1].1;

    let top = filter.side == Side::Above;
    let (sn, sf, sy) = region.extreme_side(top);
    let overlap = intervals
        .iter()
        .filter_map(|&(a, b)| {
            let lo = a.max(sn);
            let hi = b.min(sf);
            (lo <= hi && keep(lo).is_some() && keep(hi).is_some()).then_some((lo, hi))
        })
        .fold(None, |acc: Option<(T, T)>, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        });

    let (near_x, far_x, extreme_y) = match overlap {
        Some((lo, hi)) => (lo, hi, sy),
        None => {
            // The region's own extreme is cut off; the concave slice bound is
            // then maximised at an interval endpoint.
            let mut best: Option<(T, T)> = None;
            for &(a, b) in &intervals {
                for x in [a, b] {
                    if let Some((lo, hi)) = keep(x) {
                        let y = if top { hi } else { lo };
                        let better = match best {
                            None => true,
                            Some((_, by)) => (top && y > by) || (!top && y < by),
                        };
                        if better {
                            best = Some((x, y));
                        }
                    }
                }
            }
            let (x, y) = best.ok_or(Error::EmptyRegion)?;
            (x, x, y)
        }
    };

    let mut min_y = T::infinity();
    let mut max_y = T::neg_infinity();
    for &(a, b) in &intervals {
        let steps = 64;
        for i in 0..=steps {
            let x = a + (b - a) * T::lit(i as f64 / steps as f64);
            if let Some((lo, hi)) = keep(x) {
                min_y = min_y.min(lo);
                max_y = max_y.max(hi);
            }
        }
    }
    if top {
        max_y = max_y.max(extreme_y);
    } else {
        min_y = min_y.min(extreme_y);
    }

    Ok(RegionExtremes {
        min_x,
        max_x,
        min_y,
        max_y,
        near_x,
        far_x,
        extreme_y,
    })
}

/// Maximal sub-intervals of `[x0, x1]` on which `inside` holds, found by
/// uniform sampling and bisection of every membership change.
fn admissible_intervals<T: Scalar>(x0: T, x1: T, inside: impl Fn(T) -> bool) -> Vec<(T, T)> {
    let n = SLICE_SAMPLES;
    let at = |i: usize| {
        if i == n {
            x1
        } else {
            x0 + (x1 - x0) * T::lit(i as f64 / n as f64)
        }
    };
    scan_intervals(n, at, &inside, T::tolerance() * T::lit(1e-3))
}

/// Shared sampler: `at(i)` for `i in 0..=n` must be increasing.
fn scan_intervals<T: Scalar>(
    n: usize,
    at: impl Fn(usize) -> T,
    inside: &impl Fn(T) -> bool,
    tol: T,
) -> Vec<(T, T)> {
    let mut out = Vec::new();
    let mut start: Option<T> = None;
    let mut prev_x = at(0);
    let mut prev_in = inside(prev_x);
    if prev_in {
        start = Some(prev_x);
    }
    for i in 1..=n {
        let x = at(i);
        let cur = inside(x);
        if cur != prev_in {
            let edge = bisect(prev_x, x, prev_in, inside, tol);
            if cur {
                start = Some(edge);
            } else if let Some(s) = start.take() {
                out.push((s, edge));
            }
        }
        prev_x = x;
        prev_in = cur;
    }
    if let Some(s) = start {
        out.push((s, prev_x));
    }
    out
}

/// Locates the membership change between `a` (membership `a_in`) and `b`,
/// returning the abscissa on the inside of the change.
fn bisect<T: Scalar>(mut a: T, mut b: T, a_in: bool, inside: &impl Fn(T) -> bool, tol: T) -> T {
    let tol = tol.max(T::epsilon() * a.abs().max(b.abs()).max(T::one()) * T::lit(4.0));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = (a + b) / T::lit(2.0);
        if inside(m) == a_in {
            a = m;
        } else {
            b = m;
        }
    }
    if a_in {
        a
    } else {
        b
    }
}

/// Planar curve `y = f(x)` over a closed abscissa interval.
pub trait Curve<T> {
    fn domain(&self) -> (T, T);
    fn eval(&self, x: T) -> T;
}

/// Sub-intervals of the curve's domain over which `(x, f(x))` lies in the
/// closed region, sorted and disjoint.
///
/// Sampling step is `min(0.01, length / 100)`; each boundary crossing is
/// refined by bisection. Contacts thinner than the sampling step may be
/// missed.
pub fn curve_region_intersect<T: Scalar, C: Curve<T> + ?Sized>(
    curve: &C,
    region: &ConvexRegion<T>,
) -> Vec<(T, T)> {
    let (lo, hi) = curve.domain();
    let inside = |x: T| region.contains(Point2::new(x, curve.eval(x)));
    let len = hi - lo;
    if len <= T::zero() {
        return if inside(lo) {
            vec![(lo, lo)]
        } else {
            Vec::new()
        };
    }
    // Quick reject against the bounding box of the region.
    let (bx0, bx1, _, _) = region.bounds();
    if bx1 < lo || bx0 > hi {
        return Vec::new();
    }
    let step = T::lit(0.01).min(len / T::lit(100.0));
    let n = (len / step).ceil().to_usize().unwrap_or(100).max(1);
    let at = |i: usize| {
        if i == n {
            hi
        } else {
            lo + len * T::lit(i as f64 / n as f64)
        }
    };
    scan_intervals(n, at, &inside, T::tolerance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> ConvexRegion<f64> {
        ConvexRegion::polygon(vec![p(x0, y0), p(x1, y0), p(x1, y1), p(x0, y1)]).unwrap()
    }

    struct Line {
        y: f64,
        lo: f64,
        hi: f64,
    }

    impl Curve<f64> for Line {
        fn domain(&self) -> (f64, f64) {
            (self.lo, self.hi)
        }
        fn eval(&self, _x: f64) -> f64 {
            self.y
        }
    }

    #[test]
    fn frame_examples() {
        let f = Frame::from_endpoints(p(2.0, 10.0), p(46.5, 10.0)).unwrap();
        assert_eq!(f.angle(), 0.0);
        let g = f.to_local(p(46.5, 10.0));
        assert!((g.x - 44.5).abs() < 1e-9 && g.y.abs() < 1e-9);
        assert_eq!(f.to_local(p(2.0, 10.0)), p(0.0, 0.0));

        let up = Frame::from_endpoints(p(0.0, 0.0), p(0.0, 5.0)).unwrap();
        assert_eq!(up.angle(), FRAC_PI_2);
        let down = Frame::from_endpoints(p(0.0, 0.0), p(0.0, -5.0)).unwrap();
        assert_eq!(down.angle(), -FRAC_PI_2);
        let g = down.to_local(p(0.0, -5.0));
        assert!((g.x - 5.0).abs() < 1e-9 && g.y.abs() < 1e-9);

        assert_eq!(
            Frame::from_endpoints(p(1.0, 1.0), p(1.0, 1.0)),
            Err(Error::DegenerateEndpoints)
        );
    }

    #[test]
    fn goal_left_of_start_maps_to_positive_axis() {
        let f = Frame::from_endpoints(p(10.0, 0.0), p(0.0, 0.0)).unwrap();
        let g = f.to_local(p(0.0, 0.0));
        assert!((g.x - 10.0).abs() < 1e-9 && g.y.abs() < 1e-9);
    }

    #[test]
    fn transform_examples() {
        let id = Frame::new(p(0.0, 0.0), 0.0);
        assert_eq!(id.transform(p(3.0, 4.0), Direction::ToLocal), p(3.0, 4.0));
        let quarter = Frame::new(p(0.0, 0.0), FRAC_PI_2);
        let q = quarter.transform(p(0.0, 1.0), Direction::ToLocal);
        assert!((q.x - 1.0).abs() < 1e-12 && q.y.abs() < 1e-12);
        let back = quarter.transform(q, Direction::ToGlobal);
        assert!(back.distance(p(0.0, 1.0)) < 1e-12);
    }

    #[test]
    fn rotation_is_orthonormal() {
        let f = Frame::new(p(1.0, -2.0), 0.7);
        let r = f.rotation();
        let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
        assert!((det - 1.0).abs() < 1e-12);
        assert!((r[0][0] * r[1][0] + r[0][1] * r[1][1]).abs() < 1e-12);
    }

    #[test]
    fn frame_works_in_f32() {
        let f = Frame::<f32>::from_endpoints(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)).unwrap();
        let g = f.to_local(Point2::new(3.0, 4.0));
        assert!((g.x - 5.0).abs() < 1e-5 && g.y.abs() < 1e-5);
    }

    #[test]
    fn polygon_validation() {
        assert!(ConvexRegion::polygon(vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        // Clockwise input is reoriented.
        let cw = ConvexRegion::polygon(vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)])
            .unwrap();
        let ConvexRegion::Polygon { vertices } = &cw else {
            unreachable!()
        };
        assert_eq!(vertices[0], p(1.0, 0.0));
        // Reflex vertex.
        let dart = ConvexRegion::polygon(vec![
            p(0.0, 0.0),
            p(2.0, 0.0),
            p(1.0, 0.5),
            p(2.0, 2.0),
            p(0.0, 2.0),
        ]);
        assert!(matches!(dart, Err(Error::InvalidRegion(_))));
        assert!(ConvexRegion::disc(p(0.0, 0.0), 0.0).is_err());
        assert!(ConvexRegion::polygon(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_err());
    }

    #[test]
    fn enlarge_examples() {
        let d = ConvexRegion::disc(p(5.0, 0.0), 1.0).unwrap();
        let e = enlarge(&d, 1.0).unwrap();
        assert_eq!(
            e.boundary,
            ConvexRegion::Disc {
                center: p(5.0, 0.0),
                radius: 2.0
            }
        );

        let sq = square(0.0, 0.0, 1.0, 1.0);
        assert_eq!(enlarge(&sq, 0.0).unwrap().boundary, sq);
        let e = enlarge(&sq, 1.0).unwrap();
        let (x0, x1, y0, y1) = e.boundary.bounds();
        assert!((x0 + 1.0).abs() < 1e-12, "{x0}");
        assert!((x1 - 2.0).abs() < 1e-12, "{x1}");
        assert!((y0 + 1.0).abs() < 1e-12 && (y1 - 2.0).abs() < 1e-12);
        assert!(ConvexRegion::polygon(match &e.boundary {
            ConvexRegion::Polygon { vertices } => vertices.clone(),
            _ => unreachable!(),
        })
        .is_ok());

        assert_eq!(enlarge(&sq, -0.5), Err(Error::NegativeInflation(-0.5)));
    }

    #[test]
    fn enlarged_polygon_boundary_within_arc_tolerance() {
        let tri = ConvexRegion::polygon(vec![p(0.0, 0.0), p(4.0, 0.0), p(1.0, 3.0)]).unwrap();
        let r = 1.0;
        let e = enlarge(&tri, r).unwrap();
        let ConvexRegion::Polygon { vertices } = &e.boundary else {
            unreachable!()
        };
        // Largest exterior angle of this triangle is below pi; with 8 arc
        // points the circumscribed overshoot is r / cos(pi / 16) - r.
        let overshoot = r / (PI / 16.0).cos() - r;
        for v in vertices {
            let d = tri.distance(*v);
            assert!(d >= r - 1e-12 && d <= r + overshoot + 1e-12, "{d}");
        }
        for v in [p(0.0, 0.0), p(4.0, 0.0), p(1.0, 3.0)] {
            assert!(e.contains(v));
        }
    }

    #[test]
    fn distance_examples() {
        let d = ConvexRegion::disc(p(3.0, 0.0), 1.0).unwrap();
        assert_eq!(dist_point_region(p(0.0, 0.0), &d), 2.0);
        assert_eq!(dist_point_region(p(3.2, 0.1), &d), 0.0);
        let sq = square(1.0, 1.0, 2.0, 2.0);
        assert!((dist_point_region(p(0.0, 0.0), &sq) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(dist_point_region(p(1.5, 1.5), &sq), 0.0);
        assert_eq!(dist_point_region(p(2.0, 1.5), &sq), 0.0);
        assert!((dist_point_region(p(1.5, 3.0), &sq) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diameters() {
        assert_eq!(
            ConvexRegion::disc(p(0.0, 0.0), 1.5).unwrap().diameter(),
            3.0
        );
        assert!((square(0.0, 0.0, 3.0, 4.0).diameter() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn extremes_of_filtered_disc() {
        let d = ConvexRegion::disc(p(5.0, 2.0), 2.0).unwrap();
        let zero = |_x: f64| 0.0;
        let f = SideFilter {
            boundary: &zero,
            side: Side::Above,
        };
        let e = region_extremes(&d, Some(&f)).unwrap();
        assert_eq!((e.min_x, e.max_x), (3.0, 7.0));
        assert_eq!((e.near_x, e.far_x), (5.0, 5.0));
        assert_eq!(e.extreme_y, 4.0);

        let mirrored = ConvexRegion::disc(p(5.0, -2.0), 2.0).unwrap();
        let f = SideFilter {
            boundary: &zero,
            side: Side::AtOrBelow,
        };
        let e = region_extremes(&mirrored, Some(&f)).unwrap();
        assert_eq!(e.extreme_y, -4.0);
        assert_eq!((e.min_x, e.max_x), (3.0, 7.0));
    }

    #[test]
    fn extremes_unfiltered_square_and_flat_top() {
        let sq = square(1.0, -2.0, 4.0, 3.0);
        let e = region_extremes(&sq, None).unwrap();
        assert_eq!((e.min_x, e.max_x, e.min_y, e.max_y), (1.0, 4.0, -2.0, 3.0));
        assert_eq!((e.near_x, e.far_x, e.extreme_y), (1.0, 4.0, 3.0));

        let rect = square(1.0, 1.0, 4.0, 3.0);
        let zero = |_x: f64| 0.0;
        let f = SideFilter {
            boundary: &zero,
            side: Side::Above,
        };
        let e = region_extremes(&rect, Some(&f)).unwrap();
        assert_eq!((e.near_x, e.far_x, e.extreme_y), (1.0, 4.0, 3.0));
    }

    #[test]
    fn extremes_filter_cuts_off_top() {
        // Disc centred at the origin, boundary y = x + 10 removes nothing
        // from the lower side but everything from the upper.
        let d = ConvexRegion::disc(p(0.0, 0.0), 1.0).unwrap();
        let high = |x: f64| x + 10.0;
        let f = SideFilter {
            boundary: &high,
            side: Side::Above,
        };
        assert_eq!(region_extremes(&d, Some(&f)), Err(Error::EmptyRegion));
        // Tilted boundary: the kept part above y = x has its top at the
        // disc top (0, 1), which lies above the line.
        let diag = |x: f64| x;
        let f = SideFilter {
            boundary: &diag,
            side: Side::Above,
        };
        let e = region_extremes(&d, Some(&f)).unwrap();
        assert_eq!(e.extreme_y, 1.0);
        // Boundary y = 0.5 + x keeps only a cap; the disc top at x = 0 lies
        // above 0.5, so the extreme stays exact.
        let shifted = |x: f64| 0.5 + x;
        let f = SideFilter {
            boundary: &shifted,
            side: Side::Above,
        };
        let e = region_extremes(&d, Some(&f)).unwrap();
        assert_eq!(e.extreme_y, 1.0);
        assert!(e.min_x < -0.9 && e.max_x < 0.5);
    }

    #[test]
    fn line_disc_intersections() {
        let d = ConvexRegion::disc(p(5.0, 0.0), 1.0).unwrap();
        let hits = curve_region_intersect(
            &Line {
                y: 0.0,
                lo: 0.0,
                hi: 10.0,
            },
            &d,
        );
        assert_eq!(hits.len(), 1);
        assert!((hits[0].0 - 4.0).abs() < 1e-9 && (hits[0].1 - 6.0).abs() < 1e-9);
        assert!(curve_region_intersect(
            &Line {
                y: 5.0,
                lo: 0.0,
                hi: 10.0
            },
            &d
        )
        .is_empty());
    }

    #[test]
    fn intersection_of_two_regions_is_sorted() {
        let a = square(1.0, -1.0, 2.0, 1.0);
        let line = Line {
            y: 0.0,
            lo: 0.0,
            hi: 3.0,
        };
        let hits = curve_region_intersect(&line, &a);
        assert_eq!(hits.len(), 1);
        assert!((hits[0].0 - 1.0).abs() < 1e-9 && (hits[0].1 - 2.0).abs() < 1e-9);
    }
}

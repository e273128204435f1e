//! Points, sampled curves and the [`ParametricLoop`] trait every loop
//! evaluator in the crate implements.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// A point in the (input, output) plane of a hysteresis element.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// A closed curve defined by a periodic parameterisation `α ↦ (x(α), y(α))`.
///
/// Increasing α traverses the loop counter-clockwise. Implementations that
/// are only piecewise smooth report their kink and jump phases through
/// [`breakpoints`](ParametricLoop::breakpoints) so area and sampling code
/// can place vertices exactly there.
pub trait ParametricLoop: Send + Sync {
    /// Period of the parameter. One period traces the full loop.
    fn period(&self) -> f64 {
        TAU
    }

    fn point(&self, alpha: f64) -> Point;

    /// dP/dα. The default is a fourth-order central difference.
    fn derivative(&self, alpha: f64) -> Point {
        let h = self.period() * 1e-4;
        central_difference(|t| self.point(t), alpha, h)
    }

    /// Phases in `[0, period)` where the curve has a kink or a jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// True when every piece between breakpoints is a straight segment.
    fn is_polygonal(&self) -> bool {
        false
    }

    /// Phases where the formula switches branches through a sign
    /// convention. Sampling grids step around them.
    fn switch_phases(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Phase at which the loop reaches its saturation point.
    fn saturation_phase(&self) -> f64 {
        self.period() / 4.0
    }

    fn saturation(&self) -> Point {
        self.point(self.saturation_phase())
    }

    /// Slope angle of the tangent at the saturation point of the unsplit
    /// version of this loop, when it has a closed form.
    fn saturation_tangent(&self) -> Option<f64> {
        None
    }
}

impl<L: ParametricLoop + ?Sized> ParametricLoop for Arc<L> {
    fn period(&self) -> f64 {
        (**self).period()
    }
    fn point(&self, alpha: f64) -> Point {
        (**self).point(alpha)
    }
    fn derivative(&self, alpha: f64) -> Point {
        (**self).derivative(alpha)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn is_polygonal(&self) -> bool {
        (**self).is_polygonal()
    }
    fn switch_phases(&self) -> Vec<f64> {
        (**self).switch_phases()
    }
    fn saturation_phase(&self) -> f64 {
        (**self).saturation_phase()
    }
    fn saturation(&self) -> Point {
        (**self).saturation()
    }
    fn saturation_tangent(&self) -> Option<f64> {
        (**self).saturation_tangent()
    }
}

impl<L: ParametricLoop + ?Sized> ParametricLoop for Box<L> {
    fn period(&self) -> f64 {
        (**self).period()
    }
    fn point(&self, alpha: f64) -> Point {
        (**self).point(alpha)
    }
    fn derivative(&self, alpha: f64) -> Point {
        (**self).derivative(alpha)
    }
    fn breakpoints(&self) -> Vec<f64> {
        (**self).breakpoints()
    }
    fn is_polygonal(&self) -> bool {
        (**self).is_polygonal()
    }
    fn switch_phases(&self) -> Vec<f64> {
        (**self).switch_phases()
    }
    fn saturation_phase(&self) -> f64 {
        (**self).saturation_phase()
    }
    fn saturation(&self) -> Point {
        (**self).saturation()
    }
    fn saturation_tangent(&self) -> Option<f64> {
        (**self).saturation_tangent()
    }
}

/// Fourth-order central difference of a point-valued function.
pub fn central_difference<F: Fn(f64) -> Point>(f: F, alpha: f64, h: f64) -> Point {
    let p1 = f(alpha + h) - f(alpha - h);
    let p2 = f(alpha + 2.0 * h) - f(alpha - 2.0 * h);
    (p1 * 8.0 - p2) * (1.0 / (12.0 * h))
}

/// Sorts phases into `[0, period)` and removes near-duplicates.
pub(crate) fn normalize_phases(mut phases: Vec<f64>, period: f64) -> Vec<f64> {
    for p in phases.iter_mut() {
        *p = p.rem_euclid(period);
        if period - *p < 1e-12 * period {
            *p = 0.0;
        }
    }
    phases.sort_by(|a, b| a.total_cmp(b));
    phases.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * period);
    phases
}

/// Probe distance, relative to the period, for one-sided limits at jumps.
const JUMP_PROBE: f64 = 1e-11;

/// Grid offset used to step around sign-switch phases.
pub const SWITCH_OFFSET: f64 = 1e-9;

/// An ordered sequence of samples with their generating parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub alphas: Vec<f64>,
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Curve {
    /// Samples `count` points over one period, endpoints included, so a
    /// closed loop repeats its first point at the end.
    pub fn sample<L: ParametricLoop + ?Sized>(lp: &L, count: usize) -> Result<Curve> {
        if count < 2 {
            return Err(Error::param("samples", "need at least 2 samples"));
        }
        let period = lp.period();
        let switches = lp.switch_phases();
        let step = period / (count - 1) as f64;
        let alphas: Vec<f64> = (0..count)
            .map(|i| {
                let alpha = if i == count - 1 { period } else { i as f64 * step };
                nudge(alpha, &switches, period)
            })
            .collect();
        let points = alphas.iter().map(|&a| lp.point(a)).collect();
        Ok(Curve::new(alphas, points))
    }

    /// Samples at the loop's own breakpoints only. Exact for polygonal loops
    /// whose pieces are straight.
    pub fn vertices<L: ParametricLoop + ?Sized>(lp: &L) -> Curve {
        let period = lp.period();
        let mut alphas = normalize_phases(lp.breakpoints(), period);
        if alphas.first().map_or(true, |&a| a != 0.0) {
            alphas.insert(0, 0.0);
        }
        alphas.push(period);
        // at a jump, keep both one-sided limits so the polygon includes
        // the vertical (or slanted) connecting edge
        let delta = JUMP_PROBE * period;
        let mut out_a = Vec::with_capacity(alphas.len());
        let mut out_p = Vec::with_capacity(alphas.len());
        let last = alphas.len() - 1;
        for (i, &a) in alphas.iter().enumerate() {
            let left = lp.point(a - delta);
            let right = lp.point(a + delta);
            let tol = 1e-6 * (left.norm() + right.norm()).max(1.0);
            if left.distance(right) > tol {
                if i != 0 {
                    out_a.push(a);
                    out_p.push(left);
                }
                if i != last {
                    out_a.push(a);
                    out_p.push(right);
                }
            } else {
                out_a.push(a);
                out_p.push(lp.point(a));
            }
        }
        Curve::new(out_a, out_p)
    }

    pub fn new(alphas: Vec<f64>, points: Vec<Point>) -> Curve {
        let closed = is_closed(&points);
        Curve {
            alphas,
            points,
            closed,
        }
    }

    /// Wraps raw points; the parameter is the sample index.
    pub fn from_points(points: Vec<Point>) -> Curve {
        let alphas = (0..points.len()).map(|i| i as f64).collect();
        Curve::new(alphas, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Diagonal of the bounding box.
    pub fn extent(&self) -> f64 {
        extent(&self.points)
    }

    /// Signed shoelace area of the closed polygon through the samples.
    pub fn shoelace(&self) -> f64 {
        shoelace(&self.points)
    }
}

fn nudge(alpha: f64, switches: &[f64], period: f64) -> f64 {
    for &s in switches {
        let d = (alpha - s).rem_euclid(period);
        if d < 1e-12 || period - d < 1e-12 {
            return alpha + SWITCH_OFFSET;
        }
    }
    alpha
}

pub(crate) fn extent(points: &[Point]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0).hypot(y1 - y0)
}

/// Closure tolerance relative to the curve extent.
pub const CLOSURE_TOLERANCE: f64 = 1e-9;

pub(crate) fn is_closed(points: &[Point]) -> bool {
    match (points.first(), points.last()) {
        (Some(&a), Some(&b)) if points.len() > 2 => {
            a.distance(b) <= CLOSURE_TOLERANCE * extent(points).max(1.0)
        }
        _ => false,
    }
}

/// Signed area of the polygon through `points` (closing edge implied).
pub fn shoelace(points: &[Point]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let n = points.len();
    let mut sum = 0.0;
    for i in 0..n {
        sum += points[i].cross(points[(i + 1) % n]);
    }
    0.5 * sum
}

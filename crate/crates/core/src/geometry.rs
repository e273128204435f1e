//! Checks on sampled curves: continuity, self-intersections, distances.

use crate::curve::{Curve, ParametricLoop, Point};

/// Largest distance between consecutive samples.
pub fn max_step(curve: &Curve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| w[0].distance(w[1]))
        .fold(0.0, f64::max)
}

/// True when no gap between consecutive samples exceeds four times the
/// largest local speed times the grid step. A hidden jump in the
/// parameterisation breaks this bound on any fine grid.
pub fn is_continuous<L: ParametricLoop + ?Sized>(lp: &L, curve: &Curve) -> bool {
    continuity_ratio(lp, curve) <= 1.0
}

/// Ratio of the worst gap to the continuity bound; at most 1 when continuous.
pub fn continuity_ratio<L: ParametricLoop + ?Sized>(lp: &L, curve: &Curve) -> f64 {
    let speed = curve
        .alphas
        .iter()
        .map(|&a| lp.derivative(a).norm())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    for (w, a) in curve.points.windows(2).zip(curve.alphas.windows(2)) {
        let bound = 4.0 * speed * (a[1] - a[0]).abs() + 1e-12;
        worst = worst.max(w[0].distance(w[1]) / bound);
    }
    worst
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn segments_cross(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Number of proper crossings between non-adjacent segments of the
/// polyline. The closing segment is included for closed curves.
pub fn self_intersections(curve: &Curve) -> usize {
    let pts = &curve.points;
    let n = pts.len();
    if n < 4 {
        return 0;
    }
    let segs: Vec<(Point, Point)> = pts.windows(2).map(|w| (w[0], w[1])).collect();
    let m = segs.len();
    let boxes: Vec<[f64; 4]> = segs
        .iter()
        .map(|(a, b)| [a.x.min(b.x), a.x.max(b.x), a.y.min(b.y), a.y.max(b.y)])
        .collect();
    let mut count = 0;
    for i in 0..m {
        for j in i + 2..m {
            if curve.closed && i == 0 && j == m - 1 {
                continue;
            }
            let (bi, bj) = (boxes[i], boxes[j]);
            if bi[1] < bj[0] || bj[1] < bi[0] || bi[3] < bj[2] || bj[3] < bi[2] {
                continue;
            }
            if segments_cross(segs[i].0, segs[i].1, segs[j].0, segs[j].1) {
                count += 1;
            }
        }
    }
    count
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn directed(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|&p| {
            to.windows(2)
                .map(|w| point_segment_distance(p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines, measured from the
/// vertices of each to the segments of the other.
pub fn hausdorff(a: &Curve, b: &Curve) -> f64 {
    if a.len() < 2 || b.len() < 2 {
        return f64::INFINITY;
    }
    directed(&a.points, &b.points).max(directed(&b.points, &a.points))
}

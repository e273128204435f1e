//! Loop areas: a numeric line integral usable for any loop, and closed
//! forms for the families where one exists.

use crate::curve::{central_difference, Curve, ParametricLoop, Point};
use crate::error::{Error, Result};
use crate::piecewise::PlaySpec;
use crate::smooth::{binomial, corrected_params, LoopSpec, RotatedLoop, SkewedLoop, Waveform};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaMethod {
    ClosedForm,
    Quadrature,
    Shoelace,
}

/// A signed area; positive for counter-clockwise traversal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaReport {
    pub value: f64,
    pub method: AreaMethod,
    /// Absolute error estimate, zero for exact methods.
    pub estimated_error: f64,
}

impl AreaReport {
    fn closed(value: f64) -> AreaReport {
        AreaReport {
            value,
            method: AreaMethod::ClosedForm,
            estimated_error: 0.0,
        }
    }
}

/// Absolute tolerance of the adaptive quadrature over a whole loop.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

// 10-point Gauss–Legendre on [-1, 1]
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let mut s = 0.0;
    for (x, w) in GL_X.iter().zip(GL_W) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// Integrates `f` over `[lo, hi]` by recursive panel halving. Returns the
/// value and the accumulated difference between panel estimates.
fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
        let mid = 0.5 * (lo + hi);
        let left = gauss(f, lo, mid);
        let right = gauss(f, mid, hi);
        let diff = (left + right - whole).abs();
        if diff <= tol || depth >= 40 || hi - lo < 1e-13 {
            return (left + right, diff);
        }
        let (l, el) = rec(f, lo, mid, left, tol / 2.0, depth + 1);
        let (r, er) = rec(f, mid, hi, right, tol / 2.0, depth + 1);
        (l + r, el + er)
    }
    let whole = gauss(f, lo, hi);
    rec(f, lo, hi, whole, tol, 0)
}

/// Derivative at `alpha` estimated from samples inside `[lo, hi]` only, so
/// kinks at the piece ends never leak into the estimate.
fn derivative_within<L: ParametricLoop + ?Sized>(lp: &L, alpha: f64, lo: f64, hi: f64) -> Point {
    let h0 = lp.period() * 1e-4;
    if alpha - 2.0 * h0 > lo && alpha + 2.0 * h0 < hi {
        return central_difference(|t| lp.point(t), alpha, h0);
    }
    let p = |t: f64| lp.point(t);
    if hi - alpha >= alpha - lo {
        let h = h0.min((hi - alpha) / 4.5);
        (p(alpha) * -25.0 + p(alpha + h) * 48.0 - p(alpha + 2.0 * h) * 36.0 + p(alpha + 3.0 * h) * 16.0
            - p(alpha + 4.0 * h) * 3.0)
            * (1.0 / (12.0 * h))
    } else {
        let h = h0.min((alpha - lo) / 4.5);
        (p(alpha) * 25.0 - p(alpha - h) * 48.0 + p(alpha - 2.0 * h) * 36.0 - p(alpha - 3.0 * h) * 16.0
            + p(alpha - 4.0 * h) * 3.0)
            * (1.0 / (12.0 * h))
    }
}

/// Area of a loop by the line integral `½∮(x dy − y dx)`.
///
/// Polygonal loops use the exact shoelace sum over their vertices. Other
/// loops are integrated piece by piece between breakpoints; a jump adds
/// the straight segment joining its one-sided limits.
pub fn area_numeric<L: ParametricLoop + ?Sized>(lp: &L) -> Result<AreaReport> {
    let t = lp.period();
    let start = lp.point(0.0);
    let end = lp.point(t);
    let scale = start.norm().max(end.norm()).max(1.0);
    if start.distance(end) > 1e-9 * scale {
        return Err(Error::OpenCurve(format!(
            "loop does not close: start {start:?}, end {end:?}"
        )));
    }
    if lp.is_polygonal() {
        let v = Curve::vertices(lp);
        return Ok(AreaReport {
            value: v.shoelace(),
            method: AreaMethod::Shoelace,
            estimated_error: 0.0,
        });
    }
    let mut cuts = lp.breakpoints();
    let smooth = cuts.is_empty();
    cuts.retain(|&b| b > 0.0 && b < t);
    let mut edges = vec![0.0];
    edges.extend(cuts);
    edges.push(t);
    let tol = QUADRATURE_TOLERANCE / (edges.len() as f64);
    let mut value = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo < 1e-14 * t {
            continue;
        }
        let f = |a: f64| {
            let p = lp.point(a);
            let d = if smooth { lp.derivative(a) } else { derivative_within(lp, a, lo, hi) };
            0.5 * (p.x * d.y - p.y * d.x)
        };
        let (v, e) = adaptive(&f, lo, hi, tol);
        value += v;
        err += e;
    }
    // jump segments
    let delta = 1e-11 * t;
    for &b in &edges[..edges.len() - 1] {
        let left = lp.point(b - delta);
        let right = lp.point(b + delta);
        if left.distance(right) > 1e-7 * scale {
            value += 0.5 * left.cross(right);
        }
    }
    Ok(AreaReport {
        value,
        method: AreaMethod::Quadrature,
        estimated_error: err,
    })
}

/// Shoelace area of a sampled closed curve.
pub fn area_of_curve(curve: &Curve) -> Result<AreaReport> {
    if !curve.closed {
        return Err(Error::OpenCurve("sampled curve is not closed".into()));
    }
    Ok(AreaReport {
        value: curve.shoelace(),
        method: AreaMethod::Shoelace,
        estimated_error: 0.0,
    })
}

/// `∮ cosᵐ d(sin)`-type coefficient; 1 for m = 1, 3/4 for m = 3, 5/8 for
/// m = 5. Zero for even powers, whose term encloses no area.
pub fn power_area_factor(m: u32) -> f64 {
    if m % 2 == 0 {
        return 0.0;
    }
    let h = (m - 1) / 2;
    let mf = f64::from(m);
    (2.0 * mf * binomial(m - 1, h) - f64::from(h) * binomial(m + 1, h + 1)) / 2f64.powi(m as i32)
}

/// Closed-form area of the shifted sine model.
pub fn area_closed_shifted(spec: &LoopSpec) -> Result<f64> {
    spec.validate()?;
    if !matches!(spec.waveform, Waveform::Sine) {
        return Err(Error::Unsupported("the closed form covers sine loops only".into()));
    }
    let c = corrected_params(spec)?;
    let s = &spec.shifts;
    let split = c.a * (s.split - s.output).cos() * power_area_factor(spec.m);
    let sat = c.bx * (s.saturation - s.output).sin() * power_area_factor(spec.n);
    Ok((split + sat) * PI * spec.by)
}

/// Area of the unshifted sine model; independent of `b_x` and `n`.
pub fn area_unshifted(a: f64, by: f64, m: u32) -> f64 {
    power_area_factor(m) * PI * a * by
}

/// Area of the skew-tilted, skew-curved cubic loop. Other exponents or
/// shifted specs are integrated numerically instead.
pub fn area_skew_classical(spec: &LoopSpec, tilt: f64, curvature: f64) -> Result<AreaReport> {
    let lp = SkewedLoop::new(*spec, tilt, curvature)?;
    if spec.m == 3 && spec.n == 3 && spec.shifts.is_zero() && matches!(spec.waveform, Waveform::Sine) {
        return Ok(AreaReport::closed(3.0 * PI * spec.a / 8.0 * (spec.bx * curvature.tan() + 2.0 * spec.by)));
    }
    area_numeric(&lp)
}

/// Area of the rotation-tilted cubic loop. Other cases fall back to
/// numeric integration.
pub fn area_rotated_classical(spec: &LoopSpec, tilt: f64) -> Result<AreaReport> {
    let lp = RotatedLoop::new(*spec, tilt)?;
    if spec.m == 3 && spec.n == 3 && spec.shifts.is_zero() && matches!(spec.waveform, Waveform::Sine) {
        let (s, c) = tilt.sin_cos();
        return Ok(AreaReport::closed(
            3.0 * PI * spec.a / 8.0 * (c * (spec.bx * s + spec.by * c) + spec.by),
        ));
    }
    area_numeric(&lp)
}

/// Area of Play with Gain and every loop derived from it.
pub fn area_play_gain(spec: &PlaySpec) -> Result<f64> {
    spec.validate()?;
    let (sb, _) = spec.beta.sin_cos();
    let (sg, cg) = spec.gamma.sin_cos();
    let d = (spec.beta - spec.gamma).sin();
    if d.abs() < 1e-15 {
        return Err(Error::Singular("β = γ".into()));
    }
    Ok(4.0 * spec.a * sb * (spec.by * cg - spec.bx * sg) / d)
}

/// Parallelogram area `4·a·b_y` of gainless Play, Relay and hybrid loops.
pub fn area_parallelogram(a: f64, by: f64) -> f64 {
    4.0 * a * by
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::piecewise::{HybridLoop, HybridSpec, PlayLoop, TrapezoidLoop};
    use crate::smooth::{Combination, ShiftedLoop, Term};

    struct Circle;
    impl ParametricLoop for Circle {
        fn point(&self, a: f64) -> Point {
            Point::new(a.cos(), a.sin())
        }
    }

    #[test]
    fn circle_is_pi() {
        let r = area_numeric(&Circle).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
        assert_eq!(r.method, AreaMethod::Quadrature);
    }

    #[test]
    fn factors() {
        assert_eq!(power_area_factor(1), 1.0);
        assert_eq!(power_area_factor(3), 0.75);
        assert_eq!(power_area_factor(5), 0.625);
        assert_eq!(power_area_factor(2), 0.0);
    }

    #[test]
    fn classical_area() {
        let spec = LoopSpec::classical(0.2, 1.0, 1.0).unwrap();
        let r = area_numeric(&ShiftedLoop::new(spec).unwrap()).unwrap();
        assert!((r.value - 0.471238898).abs() < 1e-9);
        assert!((area_closed_shifted(&spec).unwrap() - 0.75 * PI * 0.2).abs() < 1e-15);
        let m5 = LoopSpec::new(0.2, 1.0, 1.0, 5, 3).unwrap();
        let r = area_numeric(&ShiftedLoop::new(m5).unwrap()).unwrap();
        assert!((r.value - 0.625 * PI * 0.2).abs() < 1e-9);
    }

    #[test]
    fn shifted_closed_form_matches_quadrature() {
        for (m, n) in [(1, 1), (1, 2), (3, 3), (3, 2), (5, 4), (3, 5)] {
            for (d1, d2, d3) in [(0.3, 0.0, 0.0), (0.0, -0.2, 0.0), (0.1, 0.2, 0.3), (-0.4, 0.1, -0.2)] {
                let spec = LoopSpec::new(0.3, 1.2, 0.8, m, n).unwrap().with_shifts(d1, d2, d3).unwrap();
                let q = area_numeric(&ShiftedLoop::new(spec).unwrap()).unwrap().value;
                let c = area_closed_shifted(&spec).unwrap();
                assert!((q - c).abs() <= 1e-6 * c.abs(), "m{m} n{n} {d1} {d2} {d3}: {q} vs {c}");
            }
        }
    }

    #[test]
    fn leaf_with_matching_shifts_is_pi_a_by() {
        let spec = LoopSpec::leaf(0.5, 1.0, 2.0).unwrap().with_shifts(0.4, 0.2, 0.2).unwrap();
        assert!((area_closed_shifted(&spec).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn skew_and_rotation() {
        let spec = LoopSpec::classical(0.2, 1.0, 1.0).unwrap();
        let th = 15f64.to_radians();
        let k = 7f64.to_radians();
        let c = area_skew_classical(&spec, th, k).unwrap();
        assert!((c.value - 0.50017).abs() < 1e-5);
        let q = area_numeric(&SkewedLoop::new(spec, th, k).unwrap()).unwrap().value;
        assert!((q - c.value).abs() < 1e-6 * c.value);
        let c = area_rotated_classical(&spec, th).unwrap();
        assert!((c.value - 0.51436).abs() < 1e-5);
        let q = area_numeric(&RotatedLoop::new(spec, th).unwrap()).unwrap().value;
        assert!((q - c.value).abs() < 1e-6 * c.value);
        let other = LoopSpec::new(0.2, 1.0, 1.0, 5, 3).unwrap();
        assert_eq!(area_skew_classical(&other, th, k).unwrap().method, AreaMethod::Quadrature);
    }

    #[test]
    fn play_areas() {
        let spec = PlaySpec::new(0.4, 1.0, 1.0, 77f64.to_radians(), 17f64.to_radians()).unwrap();
        let c = area_play_gain(&spec).unwrap();
        assert!((c - 1.195_191_711).abs() < 1e-8);
        let s = area_numeric(&PlayLoop::new(spec).unwrap()).unwrap();
        assert_eq!(s.method, AreaMethod::Shoelace);
        assert!((s.value - c).abs() < 1e-12);
        let relay = PlaySpec::new(0.5, 1.0, 1.0, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        assert!((area_play_gain(&relay).unwrap() - 2.0).abs() < 1e-15);
        assert!((area_numeric(&PlayLoop::new(relay).unwrap()).unwrap().value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn hybrid_and_trapezoid_areas_are_parallelograms() {
        let t = TrapezoidLoop::new(LoopSpec::new(0.3, 1.0, 1.0, 1, 3).unwrap()).unwrap();
        assert!((area_numeric(&t).unwrap().value - 1.2).abs() < 1e-9);
        let h = HybridLoop::new(
            HybridSpec::new(0.3, 1.0, 1.0, 5).unwrap().with_angles(0.2, 0.0, 0.1).unwrap(),
        )
        .unwrap();
        assert!((area_numeric(&h).unwrap().value - 1.2).abs() < 1e-9);
    }

    #[test]
    fn scaling() {
        let lp = ShiftedLoop::new(LoopSpec::classical(0.2, 1.0, 1.0).unwrap().with_shifts(0.1, 0.2, 0.0).unwrap()).unwrap();
        let base = area_numeric(&lp).unwrap().value;
        let scaled = Combination::new(vec![Term::new(lp.clone(), 2.5, 1)], vec![Term::new(lp, 0.4, 1)]).unwrap();
        assert!((area_numeric(&scaled).unwrap().value - base).abs() < 1e-9);
    }

    #[test]
    fn open_curves_rejected() {
        let c = Curve::from_points(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0)]);
        assert!(matches!(area_of_curve(&c), Err(Error::OpenCurve(_))));
    }
}

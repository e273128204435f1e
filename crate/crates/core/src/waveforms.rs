//! Unit-amplitude periodic generating waveforms.
//!
//! All waveforms are odd, half-wave antisymmetric and reach `+1` at a
//! quarter period. `*_c` variants are the `*_s` waveform advanced by a
//! quarter period, playing the role of cosine. Arguments of any magnitude
//! are reduced with an exact `rem_euclid` before evaluation.

use std::f64::consts::TAU;

use crate::error::{finite, Error, Result};

/// A validated, strictly positive waveform period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period(f64);

impl Period {
    pub const TAU: Period = Period(TAU);

    pub fn new(period: f64) -> Result<Period> {
        let period = finite("period", period)?;
        if period <= 0.0 {
            return Err(Error::Domain(format!(
                "period must be positive, got {period}"
            )));
        }
        Ok(Period(period))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn quarter(self) -> f64 {
        self.0 / 4.0
    }

    pub fn half(self) -> f64 {
        self.0 / 2.0
    }
}

impl Default for Period {
    fn default() -> Self {
        Period::TAU
    }
}

/// Trapezoid geometry: upper base `d` (plateau width) within period `T`.
///
/// The lower base `D = T - d` is implied. `d = 0` is the triangle and
/// `d = T/2` the 50% duty-cycle rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    d: f64,
    period: Period,
}

impl PulseShape {
    pub fn new(d: f64, period: Period) -> Result<PulseShape> {
        let d = finite("d", d)?;
        if d < 0.0 || d > period.half() {
            return Err(Error::Domain(format!(
                "upper base d = {d} outside [0, T/2] for T = {}",
                period.get()
            )));
        }
        Ok(PulseShape { d, period })
    }

    /// The `D = 3d` shape (`d = T/4`) used by the basic trapezoid loops.
    pub fn three_to_one(period: Period) -> PulseShape {
        PulseShape {
            d: period.quarter(),
            period,
        }
    }

    pub fn upper_base(&self) -> f64 {
        self.d
    }

    pub fn lower_base(&self) -> f64 {
        self.period.get() - self.d
    }

    pub fn period(&self) -> Period {
        self.period
    }

    /// Duration of each linear ramp between plateaus.
    pub fn ramp(&self) -> f64 {
        (self.period.get() - 2.0 * self.d) / 2.0
    }

    fn is_rectangle(&self) -> bool {
        self.d >= self.period.half()
    }
}

/// Front duration of a real (non-ideal) unit step; zero selects Heaviside.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepShape {
    front: f64,
}

impl StepShape {
    pub const IDEAL: StepShape = StepShape { front: 0.0 };

    pub fn new(front: f64) -> Result<StepShape> {
        let front = finite("front", front)?;
        if front < 0.0 {
            return Err(Error::Domain(format!(
                "front duration must be non-negative, got {front}"
            )));
        }
        Ok(StepShape { front })
    }

    pub fn front(&self) -> f64 {
        self.front
    }
}

/// Triangle wave: 0 at α = 0, +1 at T/4, -1 at 3T/4.
pub fn tri_s(alpha: f64, period: Period) -> f64 {
    let t = period.get();
    let q = 4.0 * alpha.rem_euclid(t) / t;
    if q <= 1.0 {
        q
    } else if q <= 3.0 {
        2.0 - q
    } else {
        q - 4.0
    }
}

pub fn tri_c(alpha: f64, period: Period) -> f64 {
    tri_s(alpha + period.quarter(), period)
}

/// d/dα of [`tri_s`], taking the right-hand value at the kinks.
pub fn tri_s_slope(alpha: f64, period: Period) -> f64 {
    let t = period.get();
    let q = 4.0 * alpha.rem_euclid(t) / t;
    if (1.0..3.0).contains(&q) {
        -4.0 / t
    } else {
        4.0 / t
    }
}

pub fn tri_c_slope(alpha: f64, period: Period) -> f64 {
    tri_s_slope(alpha + period.quarter(), period)
}

/// Trapezoid wave with plateaus of width `d` centred at T/4 (+1) and
/// 3T/4 (-1), joined by linear ramps.
pub fn trp_s(alpha: f64, shape: &PulseShape) -> f64 {
    if shape.is_rectangle() {
        return rect_s(alpha, shape.period);
    }
    let quarter = shape.period.quarter();
    let gain = quarter / (quarter - shape.d / 2.0);
    (tri_s(alpha, shape.period) * gain).clamp(-1.0, 1.0)
}

pub fn trp_c(alpha: f64, shape: &PulseShape) -> f64 {
    trp_s(alpha + shape.period.quarter(), shape)
}

/// d/dα of [`trp_s`]: zero on the plateaus, ±2/(T - 2d) on the ramps.
pub fn trp_s_slope(alpha: f64, shape: &PulseShape) -> f64 {
    if shape.is_rectangle() {
        return 0.0;
    }
    let quarter = shape.period.quarter();
    let gain = quarter / (quarter - shape.d / 2.0);
    let v = tri_s(alpha, shape.period) * gain;
    if v.abs() >= 1.0 {
        0.0
    } else {
        tri_s_slope(alpha, shape.period) * gain
    }
}

pub fn trp_c_slope(alpha: f64, shape: &PulseShape) -> f64 {
    trp_s_slope(alpha + shape.period.quarter(), shape)
}

/// Square wave with the sign of [`tri_s`]; exactly 0 at the crossings.
pub fn rect_s(alpha: f64, period: Period) -> f64 {
    sgn(tri_s(alpha, period))
}

/// Signum with `sgn(0) = 0`.
pub fn sgn(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Real unit step: 0 below zero, linear front `t / t_f`, 1 above `t_f`.
/// With `t_f = 0` this is the Heaviside step with `H(0) = 1`.
pub fn step_real(t: f64, shape: StepShape) -> f64 {
    if t < 0.0 {
        0.0
    } else if t >= shape.front {
        1.0
    } else {
        t / shape.front
    }
}

pub fn heaviside(t: f64) -> f64 {
    step_real(t, StepShape::IDEAL)
}

/// Rectangular window `H(α) - H(α - w)`: 1 on `[0, w)`, 0 elsewhere.
pub fn window(alpha: f64, width: f64) -> f64 {
    heaviside(alpha) - heaviside(alpha - width)
}

/// Kink phases of `tri_s(α + offset)` within one period.
pub fn tri_s_breaks(offset: f64, period: Period) -> [f64; 2] {
    [period.quarter() - offset, 3.0 * period.quarter() - offset]
}

/// Kink phases of `tri_c(α + offset)`.
pub fn tri_c_breaks(offset: f64, period: Period) -> [f64; 2] {
    tri_s_breaks(offset + period.quarter(), period)
}

/// Plateau-edge phases of `trp_s(α + offset)`.
pub fn trp_s_breaks(offset: f64, shape: &PulseShape) -> Vec<f64> {
    if shape.is_rectangle() {
        return rect_s_breaks(offset, shape.period).to_vec();
    }
    let q = shape.period.quarter();
    let h = shape.d / 2.0;
    let mut v = vec![q - h - offset, q + h - offset];
    v.push(3.0 * q - h - offset);
    v.push(3.0 * q + h - offset);
    if h == 0.0 {
        v.dedup();
        v.truncate(1);
        v.push(3.0 * q - offset);
    }
    v
}

pub fn trp_c_breaks(offset: f64, shape: &PulseShape) -> Vec<f64> {
    trp_s_breaks(offset + shape.period.quarter(), shape)
}

/// Jump phases of `rect_s(α + offset)`.
pub fn rect_s_breaks(offset: f64, period: Period) -> [f64; 2] {
    [-offset, period.half() - offset]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const T: Period = Period::TAU;

    #[test]
    fn triangle_values() {
        assert_eq!(tri_s(0.0, T), 0.0);
        assert_eq!(tri_s(PI / 2.0, T), 1.0);
        assert_eq!(tri_s(PI / 4.0, T), 0.5);
        assert_eq!(tri_s(3.0 * PI / 2.0, T), -1.0);
        assert_eq!(tri_c(0.0, T), 1.0);
    }

    #[test]
    fn triangle_ramp_slope_by_dense_sampling() {
        // slope 2 / (T/2) over the rising ramp
        let n = 1000;
        for i in 0..=n {
            let a = -PI / 2.0 + PI * i as f64 / n as f64;
            let expected = a * 2.0 / PI;
            assert!((tri_s(a, T) - expected).abs() < 1e-14, "a = {a}");
        }
    }

    #[test]
    fn nonpositive_period_is_a_domain_error() {
        assert!(matches!(Period::new(0.0), Err(Error::Domain(_))));
        assert!(matches!(Period::new(-1.0), Err(Error::Domain(_))));
        assert!(Period::new(f64::NAN).is_err());
    }

    #[test]
    fn trapezoid_values() {
        let quarter = PulseShape::new(PI / 2.0, T).unwrap();
        assert_eq!(trp_s(PI / 2.0, &quarter), 1.0);
        assert!((trp_s(PI / 8.0, &quarter) - 0.5).abs() < 1e-15);
        assert_eq!(trp_s(3.0 * PI / 2.0, &quarter), -1.0);
        assert_eq!(quarter.lower_base(), 1.5 * PI);
        assert_eq!(PulseShape::three_to_one(T), quarter);
    }

    #[test]
    fn trapezoid_with_zero_base_is_triangle() {
        let tri = PulseShape::new(0.0, T).unwrap();
        for i in 0..1000 {
            let a = -7.0 + 14.0 * i as f64 / 999.0;
            assert!((trp_s(a, &tri) - tri_s(a, T)).abs() < 1e-15);
        }
    }

    #[test]
    fn trapezoid_with_half_base_is_rectangle() {
        let rect = PulseShape::new(PI, T).unwrap();
        for a in [0.1, 1.0, 2.0, 3.5, 5.0, 6.0] {
            assert_eq!(trp_s(a, &rect), rect_s(a, T));
        }
    }

    #[test]
    fn invalid_pulse_shapes_rejected() {
        assert!(PulseShape::new(-0.1, T).is_err());
        assert!(PulseShape::new(PI + 1e-9, T).is_err());
    }

    #[test]
    fn rectangle_values() {
        assert_eq!(rect_s(PI / 2.0, T), 1.0);
        assert_eq!(rect_s(3.0 * PI / 2.0, T), -1.0);
        assert_eq!(rect_s(0.0, T), 0.0);
        assert_eq!(rect_s(PI, T), 0.0);
    }

    #[test]
    fn steps_and_windows() {
        let s = StepShape::new(2.0).unwrap();
        assert_eq!(step_real(1.0, s), 0.5);
        assert_eq!(step_real(-1.0, s), 0.0);
        assert_eq!(step_real(-1.0, StepShape::IDEAL), 0.0);
        assert_eq!(step_real(3.0, s), 1.0);
        assert_eq!(heaviside(0.0), 1.0);
        assert_eq!(window(PI / 6.0, PI / 3.0), 1.0);
        assert_eq!(window(PI / 2.0, PI / 3.0), 0.0);
        assert_eq!(window(0.0, PI / 3.0), 1.0);
        assert_eq!(window(PI / 3.0, PI / 3.0), 0.0);
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(sgn(-3.0), -1.0);
        assert!(StepShape::new(-1.0).is_err());
    }

    #[test]
    fn huge_arguments_reduce_exactly() {
        let k = 1e9;
        let a = k * TAU + PI / 2.0;
        // TAU * 1e9 is exactly representable up to rounding of the product;
        // compare against the reduction of the same float.
        let reduced = a.rem_euclid(TAU);
        assert_eq!(tri_s(a, T), tri_s(reduced, T));
        assert!((tri_s(a, T) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn breaks_land_on_kinks() {
        let shape = PulseShape::new(1.0, T).unwrap();
        for b in trp_s_breaks(0.3, &shape) {
            let left = trp_s_slope(b + 0.3 - 1e-7, &shape);
            let right = trp_s_slope(b + 0.3 + 1e-7, &shape);
            assert!((left - right).abs() > 0.1);
        }
        for b in tri_c_breaks(0.2, T) {
            let left = tri_c_slope(b + 0.2 - 1e-7, T);
            let right = tri_c_slope(b + 0.2 + 1e-7, T);
            assert!((left - right).abs() > 0.1);
        }
    }

    fn shape_strategy() -> impl Strategy<Value = PulseShape> {
        (0.1f64..20.0, 0.0f64..=0.5).prop_map(|(t, f)| {
            let p = Period::new(t).unwrap();
            PulseShape::new(f * t, p).unwrap()
        })
    }

    proptest! {
        #[test]
        fn triangle_symmetries(a in -100.0f64..100.0, t in 0.1f64..20.0) {
            let p = Period::new(t).unwrap();
            prop_assert!((tri_s(a + t, p) - tri_s(a, p)).abs() < 1e-9);
            prop_assert!((tri_s(-a, p) + tri_s(a, p)).abs() < 1e-9);
            prop_assert!((tri_s(a + t / 2.0, p) + tri_s(a, p)).abs() < 1e-9);
            prop_assert!(tri_s(a, p).abs() <= 1.0);
        }

        #[test]
        fn trapezoid_symmetries(a in -100.0f64..100.0, shape in shape_strategy()) {
            let t = shape.period().get();
            let v = trp_s(a, &shape);
            prop_assert!(v.abs() <= 1.0);
            // away from the rectangle's jumps the symmetries hold pointwise
            if shape.ramp() > 1e-6 {
                prop_assert!((trp_s(a + t, &shape) - v).abs() < 1e-8);
                prop_assert!((trp_s(-a, &shape) + v).abs() < 1e-8);
                prop_assert!((trp_s(a + t / 2.0, &shape) + v).abs() < 1e-8);
            }
        }

        #[test]
        fn slope_matches_finite_difference(a in -10.0f64..10.0, shape in shape_strategy()) {
            let h = 1e-7;
            let bps = trp_s_breaks(0.0, &shape);
            let t = shape.period().get();
            let near = bps.iter().any(|b| {
                let d = (a - b).rem_euclid(t);
                d < 4.0 * h || t - d < 4.0 * h
            });
            if !near && shape.ramp() > 1e-6 {
                let fd = (trp_s(a + h, &shape) - trp_s(a - h, &shape)) / (2.0 * h);
                prop_assert!((fd - trp_s_slope(a, &shape)).abs() < 1e-5 * (1.0 + fd.abs()));
            }
        }
    }
}

//! Piecewise-linear and hybrid loops built on pulse waveforms, and the
//! Play / Non-ideal Relay family.

use std::f64::consts::FRAC_PI_2;

use crate::curve::{normalize_phases, Curve, ParametricLoop, Point};
use crate::error::{finite, Error, Result};
use crate::smooth::{ipow, LoopSpec, Waveform};
use crate::waveforms::{
    self, rect_s_breaks, step_real, tri_c, tri_s, tri_s_breaks, trp_c, trp_s, trp_s_breaks, Period,
    PulseShape, StepShape,
};

/// Samples `lp` at `k + 1` equally spaced phases and returns the closed
/// polygon through them.
pub fn polyline_loop<L: ParametricLoop + ?Sized>(lp: &L, k: usize) -> Result<Curve> {
    check_divisions(k)?;
    let t = lp.period();
    let alphas: Vec<f64> = (0..=k).map(|i| i as f64 * t / k as f64).collect();
    let points = alphas.iter().map(|&a| lp.point(a)).collect();
    Ok(Curve::new(alphas, points))
}

fn check_divisions(k: usize) -> Result<()> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Domain(format!(
            "number of divisions must be even and at least 4, got {k}"
        )));
    }
    Ok(())
}

/// A loop replaced by the polygon through `k` equally spaced samples,
/// traversed at constant speed in α between vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PolylineLoop {
    vertices: Vec<Point>,
    period: f64,
}

impl PolylineLoop {
    pub fn new<L: ParametricLoop + ?Sized>(lp: &L, k: usize) -> Result<PolylineLoop> {
        let curve = polyline_loop(lp, k)?;
        Ok(PolylineLoop {
            vertices: curve.points,
            period: lp.period(),
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
}

impl ParametricLoop for PolylineLoop {
    fn period(&self) -> f64 {
        self.period
    }

    fn point(&self, alpha: f64) -> Point {
        let k = self.vertices.len() - 1;
        let u = alpha.rem_euclid(self.period) / self.period * k as f64;
        let i = (u.floor() as usize).min(k - 1);
        let f = u - i as f64;
        self.vertices[i] * (1.0 - f) + self.vertices[i + 1] * f
    }

    fn breakpoints(&self) -> Vec<f64> {
        let k = self.vertices.len() - 1;
        (0..k).map(|i| i as f64 * self.period / k as f64).collect()
    }

    fn is_polygonal(&self) -> bool {
        true
    }
}

/// Loop on trapezoidal pulses with the saturation point moved to its
/// canonical position: `x = â·trp_cᵐ(α+Δ₁) + b̂·trp_sⁿ(α+Δ₂)`,
/// `y = b_y·trp_s(α+Δ₃)`. Unshifted, `â = a` and `b̂ = b_x − a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapezoidLoop {
    spec: LoopSpec,
    shape: PulseShape,
    a_hat: f64,
    b_hat: f64,
}

impl TrapezoidLoop {
    /// Uses the spec's trapezoid shape, or the `D = 3d` shape when the spec
    /// carries another waveform.
    pub fn new(spec: LoopSpec) -> Result<TrapezoidLoop> {
        spec.validate()?;
        let shape = match spec.waveform {
            Waveform::Trapezoid(shape) => shape,
            _ => PulseShape::three_to_one(Period::TAU),
        };
        let spec = spec.with_waveform(Waveform::Trapezoid(shape));
        let (a_hat, b_hat) = if spec.shifts.is_zero() {
            (spec.a, spec.bx - spec.a)
        } else {
            corrected_params_trp(&spec, &shape)?
        };
        Ok(TrapezoidLoop {
            spec,
            shape,
            a_hat,
            b_hat,
        })
    }

    pub fn corrected(&self) -> (f64, f64) {
        (self.a_hat, self.b_hat)
    }

    pub fn spec(&self) -> &LoopSpec {
        &self.spec
    }
}

/// Corrected split and saturation amplitudes of a shifted trapezoid loop
/// with the offset saturation point. Needs odd `n`.
pub fn corrected_params_trp(spec: &LoopSpec, shape: &PulseShape) -> Result<(f64, f64)> {
    if spec.n % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "shifted trapezoid loops need odd n, got {}",
            spec.n
        )));
    }
    let eighth = shape.period().get() / 8.0;
    let Shifts3 { d1, d2, d3 } = Shifts3::of(spec);
    let sn = ipow(trp_s(d1 - d2 - eighth, shape), spec.n);
    let cm = ipow(trp_c(d1 - d3, shape), spec.m);
    let sv = ipow(trp_s(d2 - d3, shape), spec.n);
    let den = cm * sn + sv;
    if den.abs() < 1e-12 {
        return Err(Error::DegenerateShift(format!(
            "trapezoid correction denominator vanishes for shifts {:?}",
            spec.shifts
        )));
    }
    Ok(((spec.a * sn + spec.bx * sv) / den, (spec.a - spec.bx * cm) / den))
}

struct Shifts3 {
    d1: f64,
    d2: f64,
    d3: f64,
}

impl Shifts3 {
    fn of(spec: &LoopSpec) -> Shifts3 {
        Shifts3 {
            d1: spec.shifts.split,
            d2: spec.shifts.saturation,
            d3: spec.shifts.output,
        }
    }
}

impl ParametricLoop for TrapezoidLoop {
    fn period(&self) -> f64 {
        self.shape.period().get()
    }

    fn point(&self, alpha: f64) -> Point {
        let Shifts3 { d1, d2, d3 } = Shifts3::of(&self.spec);
        let x = self.a_hat * ipow(trp_c(alpha + d1, &self.shape), self.spec.m)
            + self.b_hat * ipow(trp_s(alpha + d2, &self.shape), self.spec.n);
        Point::new(x, self.spec.by * trp_s(alpha + d3, &self.shape))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let Shifts3 { d1, d2, d3 } = Shifts3::of(&self.spec);
        let q = self.shape.period().quarter();
        let mut b = trp_s_breaks(d1 + q, &self.shape);
        b.extend(trp_s_breaks(d2, &self.shape));
        b.extend(trp_s_breaks(d3, &self.shape));
        normalize_phases(b, self.period())
    }

    fn is_polygonal(&self) -> bool {
        self.spec.m == 1 && self.spec.n == 1
    }

    /// Where `x` reaches `b_x`; for the `D = 3d` shape this is `T/8 − Δ₁`.
    fn saturation_phase(&self) -> f64 {
        let t = self.shape.period();
        t.quarter() - self.shape.upper_base() / 2.0 - self.spec.shifts.split
    }

    fn saturation_tangent(&self) -> Option<f64> {
        if self.spec.shifts.is_zero() {
            Some(0.0)
        } else {
            None
        }
    }
}

pub fn eval_trp_loop(spec: &LoopSpec, alpha: f64) -> Result<Point> {
    Ok(TrapezoidLoop::new(*spec)?.point(alpha))
}

fn gain_denominator(a: f64, bx: f64, by: f64, gain: f64) -> Result<f64> {
    let den = (a - bx) * gain.tan() + by;
    if den.abs() < 1e-12 {
        return Err(Error::Singular(format!(
            "rotation by gain angle {gain} rad is singular for a = {a}, bx = {bx}, by = {by}"
        )));
    }
    Ok(den)
}

fn check_gain(gain: f64) -> Result<f64> {
    let gain = finite("gamma", gain)?;
    if gain.abs() >= FRAC_PI_2 {
        return Err(Error::param("gamma", "must lie strictly inside (−π/2, π/2)"));
    }
    Ok(gain)
}

/// Play without Whiskers on `D = 3d` trapezoids, rotated to gain angle γ.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayRotatedTrp {
    a: f64,
    bx: f64,
    by: f64,
    gain: f64,
    den: f64,
    shape: PulseShape,
}

impl PlayRotatedTrp {
    pub fn new(a: f64, bx: f64, by: f64, gain: f64) -> Result<PlayRotatedTrp> {
        LoopSpec::leaf(a, bx, by)?;
        let gain = check_gain(gain)?;
        let den = gain_denominator(a, bx, by, gain)?;
        Ok(PlayRotatedTrp {
            a,
            bx,
            by,
            gain,
            den,
            shape: PulseShape::three_to_one(Period::TAU),
        })
    }

    /// Side slope angle of the unrotated loop, `tanβ = b_y/(b_x − a)`.
    pub fn beta(&self) -> f64 {
        self.by.atan2(self.bx - self.a)
    }
}

impl ParametricLoop for PlayRotatedTrp {
    fn point(&self, alpha: f64) -> Point {
        let (c, s) = (trp_c(alpha, &self.shape), trp_s(alpha, &self.shape));
        let tg = self.gain.tan();
        let (a, bx, by) = (self.a, self.bx, self.by);
        let x = (a * by * c + (a - bx) * (bx * tg - by) * s) / self.den;
        let y = (a * by * tg * c - by * (bx * tg - by) * s) / self.den;
        Point::new(x, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        normalize_phases(trp_s_breaks(0.0, &self.shape), TAU)
    }

    fn is_polygonal(&self) -> bool {
        true
    }

    fn saturation_phase(&self) -> f64 {
        TAU / 8.0
    }

    fn saturation_tangent(&self) -> Option<f64> {
        Some(self.gain)
    }
}

use std::f64::consts::TAU;

pub fn eval_play_rotated_trp(spec: &LoopSpec, gain: f64, alpha: f64) -> Result<Point> {
    Ok(PlayRotatedTrp::new(spec.a, spec.bx, spec.by, gain)?.point(alpha))
}

/// Triangle-pulse Leaf rotated to gain angle γ.
#[derive(Debug, Clone, PartialEq)]
pub struct TriRotated {
    bx: f64,
    by: f64,
    cx: f64,
    cy: f64,
    gain: f64,
    period: Period,
}

impl TriRotated {
    pub fn new(a: f64, bx: f64, by: f64, gain: f64) -> Result<TriRotated> {
        LoopSpec::leaf(a, bx, by)?;
        let gain = check_gain(gain)?;
        let den = gain_denominator(a, bx, by, gain)?;
        let tg = gain.tan();
        Ok(TriRotated {
            bx,
            by,
            cx: (by * (2.0 * a - bx) - bx * (a - bx) * tg) / den,
            cy: by * ((a + bx) * tg - by) / den,
            gain,
            period: Period::TAU,
        })
    }
}

impl ParametricLoop for TriRotated {
    fn point(&self, alpha: f64) -> Point {
        let (c, s) = (tri_c(alpha, self.period), tri_s(alpha, self.period));
        Point::new(self.cx * c + self.bx * s, self.by * s + self.cy * c)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = tri_s_breaks(0.0, self.period).to_vec();
        b.extend(waveforms::tri_c_breaks(0.0, self.period));
        normalize_phases(b, TAU)
    }

    fn is_polygonal(&self) -> bool {
        true
    }

    fn saturation_tangent(&self) -> Option<f64> {
        Some(self.gain)
    }
}

pub fn eval_tri_rotated(spec: &LoopSpec, gain: f64, alpha: f64) -> Result<Point> {
    Ok(TriRotated::new(spec.a, spec.bx, spec.by, gain)?.point(alpha))
}

/// Exponent applied to `trp_s` in the gain term of hybrid loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HybridPower {
    /// Plain integer power, even.
    Even(u32),
    /// `|trp_s|^k` for any positive real `k`.
    Abs(f64),
}

impl HybridPower {
    fn apply(self, v: f64) -> f64 {
        match self {
            HybridPower::Even(k) => ipow(v, k),
            HybridPower::Abs(k) => v.abs().powf(k),
        }
    }
}

/// Hybrid whiskerless loop with split tilt θ, top-section gain γ and
/// curvature κ on `D = 3d` trapezoids (`m = 1`, no shifts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridSpec {
    pub a: f64,
    pub bx: f64,
    pub by: f64,
    pub n: u32,
    pub power: HybridPower,
    pub tilt: f64,
    pub gain: f64,
    pub curvature: f64,
}

impl HybridSpec {
    pub fn new(a: f64, bx: f64, by: f64, n: u32) -> Result<HybridSpec> {
        let s = HybridSpec {
            a,
            bx,
            by,
            n,
            power: HybridPower::Even(2),
            tilt: 0.0,
            gain: 0.0,
            curvature: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_angles(mut self, tilt: f64, gain: f64, curvature: f64) -> Result<HybridSpec> {
        self.tilt = tilt;
        self.gain = gain;
        self.curvature = curvature;
        self.validate()?;
        Ok(self)
    }

    pub fn with_power(mut self, power: HybridPower) -> Result<HybridSpec> {
        self.power = power;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        LoopSpec::new(self.a, self.bx, self.by, 1, self.n.max(1))?;
        if self.n % 2 == 0 {
            return Err(Error::param("n", format!("hybrid loops need odd n, got {}", self.n)));
        }
        match self.power {
            HybridPower::Even(k) if k == 0 || k % 2 == 1 => {
                return Err(Error::param("k", format!("must be even and ≥ 2, got {k}")))
            }
            HybridPower::Abs(k) if !(k > 0.0 && k.is_finite()) => {
                return Err(Error::param("k", format!("must be positive, got {k}")))
            }
            _ => {}
        }
        for (name, v) in [("theta", self.tilt), ("gamma", self.gain), ("kappa", self.curvature)] {
            let v = finite(name, v)?;
            if v.abs() >= FRAC_PI_2 {
                return Err(Error::param(name, "must lie strictly inside (−π/2, π/2)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridLoop {
    spec: HybridSpec,
    shape: PulseShape,
}

impl HybridLoop {
    pub fn new(spec: HybridSpec) -> Result<HybridLoop> {
        spec.validate()?;
        Ok(HybridLoop {
            spec,
            shape: PulseShape::three_to_one(Period::TAU),
        })
    }

    /// Split-tilted hybrid loop without gain or curvature.
    pub fn tilted(spec: &LoopSpec, tilt: f64) -> Result<HybridLoop> {
        if spec.m != 1 {
            return Err(Error::param("m", "tilted hybrid loops need m = 1"));
        }
        HybridLoop::new(HybridSpec::new(spec.a, spec.bx, spec.by, spec.n)?.with_angles(tilt, 0.0, 0.0)?)
    }

    pub fn spec(&self) -> &HybridSpec {
        &self.spec
    }
}

impl ParametricLoop for HybridLoop {
    fn point(&self, alpha: f64) -> Point {
        let HybridSpec {
            a, bx, by, n, power, ..
        } = self.spec;
        let s = trp_s(alpha, &self.shape);
        let c = trp_c(alpha, &self.shape);
        let sn = ipow(s, n);
        let w = s - sn;
        let (tt, tg, tk) = (self.spec.tilt.tan(), self.spec.gain.tan(), self.spec.curvature.tan());
        let x = a * c + (bx - a) * sn + tt * (tk * (bx - a) - bx * tg + by) * w;
        let y = by * s + tk * (bx - a) * w + tg * (a * c * power.apply(s) + (bx - a) * sn - bx * s);
        Point::new(x, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        normalize_phases(trp_s_breaks(0.0, &self.shape), TAU)
    }

    fn saturation_phase(&self) -> f64 {
        TAU / 8.0
    }

    fn saturation_tangent(&self) -> Option<f64> {
        Some(self.spec.gain)
    }
}

pub fn eval_hybrid_tilted(spec: &LoopSpec, tilt: f64, alpha: f64) -> Result<Point> {
    Ok(HybridLoop::tilted(spec, tilt)?.point(alpha))
}

pub fn eval_hybrid_universal(spec: &HybridSpec, alpha: f64) -> Result<Point> {
    Ok(HybridLoop::new(*spec)?.point(alpha))
}

/// Triangle-pulse loop, the shifted model with `tri_s`/`tri_c`.
pub fn eval_tri_loop(spec: &LoopSpec, alpha: f64) -> Result<Point> {
    let spec = spec.with_waveform(Waveform::Triangle(Period::TAU));
    crate::smooth::eval_shifted(&spec, alpha)
}

/// Side and top slope angles `(β, γ)` of a triangle-pulse Leaf loop tilted
/// by a split-term shift. Angles lie in `(0, π)`.
pub fn angles_tri(spec: &LoopSpec, split_shift: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    let t = Period::TAU;
    let (s, c) = (tri_s(split_shift, t), tri_c(split_shift, t));
    let (a, bx, by) = (spec.a, spec.bx, spec.by);
    if c.abs() < 1e-15 {
        // removable singularity at the pulse peaks: take the limit
        return Ok(if s > 0.0 {
            (by.atan2(bx - a), 0.0)
        } else {
            (0.0, by.atan2(bx + a))
        });
    }
    let den_b = a * (s - 1.0) + bx * c;
    let den_g = a * (s + 1.0) + bx * c;
    let num = by * c;
    if (num == 0.0 && den_b == 0.0) || (num == 0.0 && den_g == 0.0) {
        return Err(Error::Singular("slope angles undefined".into()));
    }
    Ok((num.atan2(den_b), num.atan2(den_g)))
}

/// Leaf loop built on the inverse of the triangle-pulse model: the input
/// is a triangle and the output carries the split.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseLeaf {
    spec: LoopSpec,
    a_hat: f64,
    by_hat: f64,
    period: Period,
}

impl InverseLeaf {
    pub fn new(spec: LoopSpec) -> Result<InverseLeaf> {
        spec.validate()?;
        if spec.m != 1 || spec.n != 1 {
            return Err(Error::param("m, n", "inverse Leaf loops need m = n = 1"));
        }
        if spec.bx <= 0.0 {
            return Err(Error::param("bx", "must be positive"));
        }
        let period = Period::TAU;
        let alpha_a = spec.a * period.get() / (4.0 * spec.bx);
        let Shifts3 { d1, d2, d3 } = Shifts3::of(&spec);
        let c1 = tri_c(alpha_a + d1 - d3, period);
        let s2 = tri_s(alpha_a + d2 - d3, period);
        let den_a = c1 + s2;
        let den_b = c1 * tri_c(d2 - d3, period) + s2 * tri_s(d1 - d3, period);
        if den_a.abs() < 1e-12 || den_b.abs() < 1e-12 {
            return Err(Error::DegenerateShift(format!(
                "inverse Leaf corrections are singular for shifts {:?}",
                spec.shifts
            )));
        }
        let a_hat = spec.bx * s2 / den_a;
        if (a_hat - spec.bx).abs() < 1e-12 * spec.bx.max(1.0) {
            return Err(Error::DegenerateShift(
                "corrected split equals bx; the output gain is unbounded".into(),
            ));
        }
        Ok(InverseLeaf {
            spec,
            a_hat,
            by_hat: spec.by * c1 / den_b,
            period,
        })
    }

    pub fn corrected(&self) -> (f64, f64) {
        (self.a_hat, self.by_hat)
    }

    /// Side and top slope angles `(β, γ)` of the unshifted-output loop.
    pub fn angles(&self) -> (f64, f64) {
        let bx = self.spec.bx;
        let tb = self.by_hat / (bx - self.a_hat);
        let tg = tb * (bx - 2.0 * self.a_hat) / bx;
        (tb.atan(), tg.atan())
    }
}

impl ParametricLoop for InverseLeaf {
    fn point(&self, alpha: f64) -> Point {
        let Shifts3 { d1, d2, d3 } = Shifts3::of(&self.spec);
        let t = self.period;
        let x = self.spec.bx * tri_s(alpha + d3, t);
        let k = self.a_hat / (self.a_hat - self.spec.bx);
        let y = self.by_hat * (k * tri_c(alpha + d1, t) + tri_s(alpha + d2, t));
        Point::new(x, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let Shifts3 { d1, d2, d3 } = Shifts3::of(&self.spec);
        let mut b = tri_s_breaks(d3, self.period).to_vec();
        b.extend(waveforms::tri_c_breaks(d1, self.period));
        b.extend(tri_s_breaks(d2, self.period));
        normalize_phases(b, TAU)
    }

    fn is_polygonal(&self) -> bool {
        true
    }
}

pub fn eval_inverse_leaf(spec: &LoopSpec, alpha: f64) -> Result<Point> {
    Ok(InverseLeaf::new(*spec)?.point(alpha))
}

/// Explicit slope angles `(β, γ)` of the inverse Leaf with only a split
/// shift, from the triangle values at the split phase.
pub fn angles_inverse_leaf(spec: &LoopSpec, split_shift: f64) -> Result<(f64, f64)> {
    spec.validate()?;
    if spec.bx <= 0.0 {
        return Err(Error::param("bx", "must be positive"));
    }
    let t = Period::TAU;
    let alpha_a = spec.a * t.get() / (4.0 * spec.bx);
    let c = tri_c(alpha_a + split_shift, t);
    let sa = tri_s(alpha_a, t);
    let den = spec.bx * (c + sa * tri_s(split_shift, t));
    if den.abs() < 1e-15 {
        return Err(Error::Singular("slope angles undefined".into()));
    }
    let tb = spec.by * (c + sa) / den;
    let tg = spec.by * (c - sa) / den;
    Ok((tb.atan(), tg.atan()))
}

/// Play with Gain: split half-width `a`, saturation `(b_x, b_y)`, whisker
/// ramp angle β and gain angle γ (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaySpec {
    pub a: f64,
    pub bx: f64,
    pub by: f64,
    pub beta: f64,
    pub gamma: f64,
    pub period: Period,
}

/// Tolerance for the feasibility inequalities, relative to loop size.
const FEAS_TOL: f64 = 1e-12;

impl PlaySpec {
    pub fn new(a: f64, bx: f64, by: f64, beta: f64, gamma: f64) -> Result<PlaySpec> {
        let s = PlaySpec {
            a,
            bx,
            by,
            beta,
            gamma,
            period: Period::TAU,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_period(mut self, period: Period) -> Result<PlaySpec> {
        self.period = period;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a", self.a),
            ("bx", self.bx),
            ("by", self.by),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            finite(name, v)?;
        }
        if self.a < 0.0 {
            return Err(Error::param("a", "must be non-negative"));
        }
        if self.bx <= 0.0 {
            return Err(Error::param("bx", "must be positive"));
        }
        if self.by <= 0.0 {
            return Err(Error::param("by", "must be positive"));
        }
        if !(self.beta > 0.0 && self.beta <= FRAC_PI_2) {
            return Err(Error::param("beta", "must lie in (0, π/2]"));
        }
        if self.gamma.abs() >= self.beta {
            return Err(Error::Singular(format!(
                "gain angle |γ| = {} must be below β = {}",
                self.gamma.abs(),
                self.beta
            )));
        }
        if self.a > self.bx {
            return Err(Error::Infeasible(format!(
                "split a = {} exceeds saturation bx = {}",
                self.a, self.bx
            )));
        }
        let scale = self.bx.max(self.by);
        let (sb, cb) = self.beta.sin_cos();
        // b_x·tanβ ≥ b_y, written without the tangent
        if self.bx * sb - self.by * cb < -FEAS_TOL * scale {
            return Err(Error::Infeasible("bx·tanβ < by gives a negative plateau".into()));
        }
        // ramp must reach saturation: (b_x − a)·tanβ ≥ b_y
        if (self.bx - self.a) * sb - self.by * cb < -FEAS_TOL * scale {
            return Err(Error::Infeasible(
                "(bx − a)·tanβ < by: the ramp does not reach the saturation point".into(),
            ));
        }
        if self.by - self.bx * self.gamma.tan() < -FEAS_TOL * scale {
            return Err(Error::Infeasible("by < bx·tanγ: output amplitude would be negative".into()));
        }
        Ok(())
    }

    /// `α_a`, the phase of the split point on the input triangle.
    pub fn split_phase(&self) -> f64 {
        self.a * self.period.get() / (4.0 * self.bx)
    }

    /// Delay of the output trapezoid, `α_a·tanβ/(tanβ − tanγ)`.
    pub fn delay(&self) -> f64 {
        let (sb, _) = self.beta.sin_cos();
        self.split_phase() * sb * self.gamma.cos() / (self.beta - self.gamma).sin()
    }

    /// Ramp-to-ramp offset of the output, `b_y − b_x·tanγ`.
    pub fn amplitude(&self) -> f64 {
        self.by - self.bx * self.gamma.tan()
    }

    pub fn is_relay(&self) -> bool {
        self.beta == FRAC_PI_2
    }
}

/// Upper base `d` of the output trapezoid of a Play with Gain loop.
pub fn play_d(spec: &PlaySpec) -> Result<f64> {
    spec.validate()?;
    let t = spec.period.get();
    let (sb, cb) = spec.beta.sin_cos();
    let cg = spec.gamma.cos();
    let d = t * (spec.bx * sb * cg - spec.by * cb * cg) / (2.0 * spec.bx * (spec.beta - spec.gamma).sin());
    if d < -FEAS_TOL * t || d > t / 2.0 * (1.0 + FEAS_TOL) {
        return Err(Error::Infeasible(format!("upper base d = {d} outside [0, T/2]")));
    }
    // snap round-off so a relay gets an exact rectangle and whiskerless
    // loops get exact triangles
    let d = if d < FEAS_TOL * t {
        0.0
    } else if t / 2.0 - d < FEAS_TOL * t {
        t / 2.0
    } else {
        d
    };
    Ok(d)
}

/// Play with Gain on a triangle input and a trapezoid output.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayLoop {
    spec: PlaySpec,
    shape: PulseShape,
    delay: f64,
}

impl PlayLoop {
    pub fn new(spec: PlaySpec) -> Result<PlayLoop> {
        let d = play_d(&spec)?;
        let shape = PulseShape::new(d, spec.period)?;
        Ok(PlayLoop {
            spec,
            shape,
            delay: spec.delay(),
        })
    }

    pub fn spec(&self) -> &PlaySpec {
        &self.spec
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }
}

impl ParametricLoop for PlayLoop {
    fn period(&self) -> f64 {
        self.spec.period.get()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = &self.spec;
        let tri = tri_s(alpha, s.period);
        let tg = s.gamma.tan();
        let y = s.amplitude() * trp_s(alpha - self.delay, &self.shape) + s.bx * tg * tri;
        Point::new(s.bx * tri, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = tri_s_breaks(0.0, self.spec.period).to_vec();
        b.extend(trp_s_breaks(-self.delay, &self.shape));
        normalize_phases(b, self.period())
    }

    fn is_polygonal(&self) -> bool {
        true
    }

    fn switch_phases(&self) -> Vec<f64> {
        if self.shape.ramp() == 0.0 {
            normalize_phases(rect_s_breaks(-self.delay, self.spec.period).to_vec(), self.period())
        } else {
            Vec::new()
        }
    }

    fn saturation_tangent(&self) -> Option<f64> {
        Some(self.spec.gamma)
    }
}

pub fn eval_play_with_gain(spec: &PlaySpec, alpha: f64) -> Result<Point> {
    Ok(PlayLoop::new(*spec)?.point(alpha))
}

/// Plain Play (γ = 0): the output is a delayed trapezoid.
pub fn eval_play(spec: &PlaySpec, alpha: f64) -> Result<Point> {
    let d = play_d(&PlaySpec { gamma: 0.0, ..*spec })?;
    let shape = PulseShape::new(d, spec.period)?;
    let x = spec.bx * tri_s(alpha, spec.period);
    Ok(Point::new(x, spec.by * trp_s(alpha - spec.split_phase(), &shape)))
}

/// Non-ideal Relay (β = 90°, γ = 0): the output is a delayed square wave.
pub fn eval_relay(spec: &PlaySpec, alpha: f64) -> Point {
    let x = spec.bx * tri_s(alpha, spec.period);
    let y = spec.by * waveforms::rect_s(alpha - spec.split_phase(), spec.period);
    Point::new(x, y)
}

fn threshold_denominator(spec: &PlaySpec) -> Result<f64> {
    let (sb, cb) = spec.beta.sin_cos();
    let den = (spec.a - spec.bx) * sb + spec.bx * spec.gamma.tan() * cb;
    if den.abs() < 1e-12 {
        return Err(Error::Singular(
            "threshold denominator (a − bx)·tanβ + bx·tanγ vanishes".into(),
        ));
    }
    Ok(den)
}

/// Front duration `t_f` of the real step in the threshold form.
pub fn front_duration(spec: &PlaySpec) -> Result<f64> {
    spec.validate()?;
    if spec.is_relay() {
        return Ok(0.0);
    }
    let den = threshold_denominator(spec)?;
    let tf = 2.0 * (spec.bx * spec.gamma.tan() - spec.by) * spec.beta.cos() / den;
    Ok(if tf.abs() < 1e-15 { 0.0 } else { tf })
}

/// Output saturation `b_y` that produces front duration `t_f`, all other
/// parameters fixed.
pub fn by_for_front(spec: &PlaySpec, front: f64) -> Result<f64> {
    let cb = spec.beta.cos();
    if cb.abs() < 1e-15 {
        return Err(Error::Singular("front duration is identically zero at β = 90°".into()));
    }
    let den = threshold_denominator(spec)?;
    Ok(spec.bx * spec.gamma.tan() - front * den / (2.0 * cb))
}

/// Play with Gain written as a thresholded triangle combination.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayThreshold {
    spec: PlaySpec,
    den: f64,
    step: StepShape,
    inner: PlayLoop,
}

impl PlayThreshold {
    pub fn new(spec: PlaySpec) -> Result<PlayThreshold> {
        let inner = PlayLoop::new(spec)?;
        let tf = front_duration(&spec)?;
        if tf < 0.0 {
            return Err(Error::Infeasible(format!("negative front duration {tf}")));
        }
        // a whiskerless relay (a = b_x) drives the denominator to zero from
        // below; the form is then taken in that limit, see `point`
        let limit = spec.is_relay() && (spec.bx - spec.a).abs() <= FEAS_TOL * spec.bx;
        Ok(PlayThreshold {
            spec,
            den: if limit { 0.0 } else { threshold_denominator(&spec)? },
            step: StepShape::new(tf)?,
            inner,
        })
    }

    /// True where this form coincides with [`PlayLoop`]: the output ramp
    /// sits entirely at non-negative input.
    pub fn matches_general_form(&self) -> bool {
        let s = &self.spec;
        let (sb, cb) = s.beta.sin_cos();
        s.a * sb + s.bx * s.gamma.tan() * cb >= s.by * cb - FEAS_TOL * s.by
    }
}

impl ParametricLoop for PlayThreshold {
    fn period(&self) -> f64 {
        self.spec.period.get()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = &self.spec;
        let (sb, cb) = s.beta.sin_cos();
        let tg = s.gamma.tan();
        let tri = tri_s(alpha, s.period);
        let num = s.a * sb * tri_c(alpha, s.period) + (s.bx * tg - s.by) * cb;
        let step = if self.den == 0.0 {
            // argument tends to +∞ where the numerator is negative
            if num < 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            step_real(num / self.den + tri, self.step)
        };
        let y = 2.0 * s.amplitude() * (step - 0.5) + s.bx * tg * tri;
        Point::new(s.bx * tri, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn is_polygonal(&self) -> bool {
        true
    }

    fn switch_phases(&self) -> Vec<f64> {
        self.inner.switch_phases()
    }
}

pub fn eval_play_threshold(spec: &PlaySpec, alpha: f64) -> Result<Point> {
    Ok(PlayThreshold::new(*spec)?.point(alpha))
}

/// Play with Gain from a difference of shifted triangles. Requires
/// `2·b_y/b_x = tanβ + tanγ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayShiftedTri {
    spec: PlaySpec,
    shift: f64,
}

impl PlayShiftedTri {
    pub fn new(spec: PlaySpec) -> Result<PlayShiftedTri> {
        spec.validate()?;
        let (tb, tg) = (spec.beta.tan(), spec.gamma.tan());
        let lhs = 2.0 * spec.by / spec.bx;
        if !tb.is_finite() || (lhs - (tb + tg)).abs() > 1e-9 * lhs.max(1.0) {
            return Err(Error::Infeasible(format!(
                "shifted-triangle form needs 2·by/bx = tanβ + tanγ, got {lhs} vs {}",
                tb + tg
            )));
        }
        let t = spec.period.get();
        let shift = t * ((spec.bx - spec.a) * tb - spec.by) / (8.0 * (spec.bx * tb - spec.by));
        Ok(PlayShiftedTri { spec, shift })
    }

    /// The `β` that satisfies the constraint for given `b_x`, `b_y`, `γ`.
    pub fn beta_for(bx: f64, by: f64, gamma: f64) -> f64 {
        (2.0 * by / bx - gamma.tan()).atan()
    }
}

impl ParametricLoop for PlayShiftedTri {
    fn period(&self) -> f64 {
        self.spec.period.get()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = &self.spec;
        let p = s.period;
        let tri = tri_s(alpha, p);
        let u = alpha + self.shift;
        let y = s.amplitude() * (tri_s(u, p) - tri_c(u, p)) + s.bx * s.gamma.tan() * tri;
        Point::new(s.bx * tri, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let p = self.spec.period;
        let mut b = tri_s_breaks(0.0, p).to_vec();
        b.extend(tri_s_breaks(self.shift, p));
        b.extend(waveforms::tri_c_breaks(self.shift, p));
        normalize_phases(b, self.period())
    }

    fn is_polygonal(&self) -> bool {
        true
    }
}

pub fn eval_play_shifted_tri(spec: &PlaySpec, alpha: f64) -> Result<Point> {
    Ok(PlayShiftedTri::new(*spec)?.point(alpha))
}

/// Half-width of the loop at `y = 0`, found from sign changes of `y` on a
/// dense grid with the crossing located by linear interpolation.
pub fn split_width<L: ParametricLoop + ?Sized>(lp: &L, samples: usize) -> f64 {
    let t = lp.period();
    let mut xs = Vec::new();
    let mut prev = lp.point(1e-7);
    for i in 1..=samples {
        let al = 1e-7 + i as f64 * t / samples as f64;
        let p = lp.point(al);
        if (prev.y < 0.0) != (p.y < 0.0) {
            let f = prev.y / (prev.y - p.y);
            xs.push(prev.x + f * (p.x - prev.x));
        }
        prev = p;
    }
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / 2.0
}

//! Smooth parametric loops and their transformations.
//!
//! The base model traces `x = a·cᵐ(α) + b_x·sⁿ(α)`, `y = b_y·s(α)` where
//! `s`/`c` are sine/cosine or any of the unit pulse waveforms. Three phase
//! shifts act on the split term, the saturation term and the output; the
//! split and saturation amplitudes are then corrected so the loop still
//! passes through `(a, 0)` and `(b_x, b_y)`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use crate::curve::{normalize_phases, ParametricLoop, Point};
use crate::error::{finite, Error, Result};
use crate::waveforms::{self, Period, PulseShape};

/// Integer power by repeated squaring. Bit-identical on every platform,
/// unlike `powi`.
pub(crate) fn ipow(x: f64, k: u32) -> f64 {
    let mut base = x;
    let mut e = k;
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * f64::from(n - i) / f64::from(i + 1);
    }
    r.round()
}

/// Generating waveform pair `(s, c)` of a loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Waveform {
    #[default]
    Sine,
    Triangle(Period),
    Trapezoid(PulseShape),
}

impl Waveform {
    pub fn period(&self) -> f64 {
        match self {
            Waveform::Sine => std::f64::consts::TAU,
            Waveform::Triangle(p) => p.get(),
            Waveform::Trapezoid(shape) => shape.period().get(),
        }
    }

    pub fn quarter(&self) -> f64 {
        self.period() / 4.0
    }

    pub fn s(&self, alpha: f64) -> f64 {
        match self {
            Waveform::Sine => alpha.sin(),
            Waveform::Triangle(p) => waveforms::tri_s(alpha, *p),
            Waveform::Trapezoid(shape) => waveforms::trp_s(alpha, shape),
        }
    }

    pub fn c(&self, alpha: f64) -> f64 {
        match self {
            Waveform::Sine => alpha.cos(),
            Waveform::Triangle(p) => waveforms::tri_c(alpha, *p),
            Waveform::Trapezoid(shape) => waveforms::trp_c(alpha, shape),
        }
    }

    pub fn ds(&self, alpha: f64) -> f64 {
        match self {
            Waveform::Sine => alpha.cos(),
            Waveform::Triangle(p) => waveforms::tri_s_slope(alpha, *p),
            Waveform::Trapezoid(shape) => waveforms::trp_s_slope(alpha, shape),
        }
    }

    pub fn dc(&self, alpha: f64) -> f64 {
        match self {
            Waveform::Sine => -alpha.sin(),
            Waveform::Triangle(p) => waveforms::tri_c_slope(alpha, *p),
            Waveform::Trapezoid(shape) => waveforms::trp_c_slope(alpha, shape),
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, Waveform::Sine)
    }

    /// Kink phases of `s(α + offset)`.
    pub fn s_breaks(&self, offset: f64) -> Vec<f64> {
        match self {
            Waveform::Sine => Vec::new(),
            Waveform::Triangle(p) => waveforms::tri_s_breaks(offset, *p).to_vec(),
            Waveform::Trapezoid(shape) => waveforms::trp_s_breaks(offset, shape),
        }
    }

    pub fn c_breaks(&self, offset: f64) -> Vec<f64> {
        self.s_breaks(offset + self.quarter())
    }
}

/// Phase shifts applied to the split term, the saturation term and the
/// output of a loop (radians, or α-units for pulse waveforms).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shifts {
    pub split: f64,
    pub saturation: f64,
    pub output: f64,
}

impl Shifts {
    pub const ZERO: Shifts = Shifts {
        split: 0.0,
        saturation: 0.0,
        output: 0.0,
    };

    pub const fn new(split: f64, saturation: f64, output: f64) -> Self {
        Shifts {
            split,
            saturation,
            output,
        }
    }

    pub const fn uniform(shift: f64) -> Self {
        Shifts::new(shift, shift, shift)
    }

    pub fn is_zero(&self) -> bool {
        self.split == 0.0 && self.saturation == 0.0 && self.output == 0.0
    }
}

/// Parameters of one loop: split point `a`, saturation point `(b_x, b_y)`,
/// curvature exponent `m` (odd), type exponent `n`, shifts and waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub a: f64,
    pub bx: f64,
    pub by: f64,
    pub m: u32,
    pub n: u32,
    pub shifts: Shifts,
    pub waveform: Waveform,
}

impl LoopSpec {
    pub fn new(a: f64, bx: f64, by: f64, m: u32, n: u32) -> Result<LoopSpec> {
        let spec = LoopSpec {
            a,
            bx,
            by,
            m,
            n,
            shifts: Shifts::ZERO,
            waveform: Waveform::Sine,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn classical(a: f64, bx: f64, by: f64) -> Result<LoopSpec> {
        LoopSpec::new(a, bx, by, 3, 3)
    }

    pub fn leaf(a: f64, bx: f64, by: f64) -> Result<LoopSpec> {
        LoopSpec::new(a, bx, by, 1, 1)
    }

    pub fn with_shifts(mut self, split: f64, saturation: f64, output: f64) -> Result<LoopSpec> {
        self.shifts = Shifts::new(split, saturation, output);
        self.validate()?;
        Ok(self)
    }

    pub fn with_waveform(mut self, waveform: Waveform) -> LoopSpec {
        self.waveform = waveform;
        self
    }

    pub fn validate(&self) -> Result<()> {
        finite("a", self.a)?;
        finite("bx", self.bx)?;
        finite("by", self.by)?;
        finite("split shift", self.shifts.split)?;
        finite("saturation shift", self.shifts.saturation)?;
        finite("output shift", self.shifts.output)?;
        if self.a < 0.0 {
            return Err(Error::param("a", "must be non-negative"));
        }
        if self.bx < 0.0 {
            return Err(Error::param("bx", "must be non-negative"));
        }
        if self.by <= 0.0 {
            return Err(Error::param("by", "must be positive"));
        }
        if self.m == 0 || self.m % 2 == 0 {
            return Err(Error::param("m", format!("must be a positive odd integer, got {}", self.m)));
        }
        if self.n == 0 {
            return Err(Error::param("n", "must be a positive integer"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.waveform.period()
    }

    /// The same loop with all phase shifts removed.
    pub fn unshifted(&self) -> LoopSpec {
        LoopSpec {
            shifts: Shifts::ZERO,
            ..*self
        }
    }
}

/// Corrected split and saturation amplitudes of a shifted loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectedParams {
    pub a: f64,
    pub bx: f64,
}

/// Solves the split/saturation anchor system for the corrected amplitudes.
///
/// Works for any waveform pair whose `c` vanishes and `s` peaks at a
/// quarter period, so the same algebra serves sine, triangle and
/// (non-offset) trapezoid loops.
pub fn corrected_params(spec: &LoopSpec) -> Result<CorrectedParams> {
    spec.validate()?;
    let w = &spec.waveform;
    let u = spec.shifts.split - spec.shifts.output;
    let v = spec.shifts.saturation - spec.shifts.output;
    let (su, cu) = (ipow(w.s(u), spec.m), ipow(w.c(u), spec.m));
    let (sv, cv) = (ipow(w.s(v), spec.n), ipow(w.c(v), spec.n));
    let det = su * sv + cu * cv;
    if det.abs() < 1e-12 || !det.is_finite() {
        return Err(Error::DegenerateShift(format!(
            "anchor system is singular (determinant {det:e}) for shifts {:?}",
            spec.shifts
        )));
    }
    Ok(CorrectedParams {
        a: (spec.a * cv - spec.bx * sv) / det,
        bx: (spec.a * su + spec.bx * cu) / det,
    })
}

/// Shifted loop with corrected amplitudes; the general smooth evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedLoop {
    spec: LoopSpec,
    corrected: CorrectedParams,
}

impl ShiftedLoop {
    pub fn new(spec: LoopSpec) -> Result<ShiftedLoop> {
        let corrected = corrected_params(&spec)?;
        Ok(ShiftedLoop { spec, corrected })
    }

    pub fn spec(&self) -> &LoopSpec {
        &self.spec
    }

    pub fn corrected(&self) -> CorrectedParams {
        self.corrected
    }

    /// Phase of the split point `(a, 0)`.
    pub fn split_phase(&self) -> f64 {
        -self.spec.shifts.output
    }
}

impl ParametricLoop for ShiftedLoop {
    fn period(&self) -> f64 {
        self.spec.period()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = &self.spec;
        let w = &s.waveform;
        let x = self.corrected.a * ipow(w.c(alpha + s.shifts.split), s.m)
            + self.corrected.bx * ipow(w.s(alpha + s.shifts.saturation), s.n);
        Point::new(x, s.by * w.s(alpha + s.shifts.output))
    }

    fn derivative(&self, alpha: f64) -> Point {
        let s = &self.spec;
        let w = &s.waveform;
        let p1 = alpha + s.shifts.split;
        let p2 = alpha + s.shifts.saturation;
        let dx = self.corrected.a * f64::from(s.m) * ipow(w.c(p1), s.m - 1) * w.dc(p1)
            + self.corrected.bx * f64::from(s.n) * ipow(w.s(p2), s.n - 1) * w.ds(p2);
        Point::new(dx, s.by * w.ds(alpha + s.shifts.output))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let s = &self.spec;
        let w = &s.waveform;
        let mut b = w.c_breaks(s.shifts.split);
        b.extend(w.s_breaks(s.shifts.saturation));
        b.extend(w.s_breaks(s.shifts.output));
        normalize_phases(b, self.period())
    }

    fn is_polygonal(&self) -> bool {
        !self.spec.waveform.is_smooth() && self.spec.m == 1 && self.spec.n == 1
    }

    fn saturation_phase(&self) -> f64 {
        self.spec.waveform.quarter() - self.spec.shifts.output
    }

    fn saturation_tangent(&self) -> Option<f64> {
        if self.spec.shifts.is_zero() {
            Some(unsplit_tangent(self.spec.bx, self.spec.by, self.spec.n))
        } else {
            None
        }
    }
}

/// Tangent angle of the unsplit loop at its saturation point.
pub fn unsplit_tangent(bx: f64, by: f64, n: u32) -> f64 {
    (by / (f64::from(n) * bx)).atan()
}

/// Evaluates the unshifted sine model, ignoring shifts and waveform.
pub fn eval_basic(spec: &LoopSpec, alpha: f64) -> Point {
    let x = spec.a * ipow(alpha.cos(), spec.m) + spec.bx * ipow(alpha.sin(), spec.n);
    Point::new(x, spec.by * alpha.sin())
}

pub fn eval_shifted(spec: &LoopSpec, alpha: f64) -> Result<Point> {
    Ok(ShiftedLoop::new(*spec)?.point(alpha))
}

/// The unshifted sine model written as a sum of harmonics. Only odd `n`
/// has a pure sine series.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicLoop {
    by: f64,
    /// `(multiple, coefficient)` pairs of the cosine series.
    cos_terms: Vec<(f64, f64)>,
    sin_terms: Vec<(f64, f64)>,
}

impl HarmonicLoop {
    pub fn new(spec: &LoopSpec) -> Result<HarmonicLoop> {
        spec.validate()?;
        if spec.n % 2 == 0 {
            return Err(Error::Unsupported(format!(
                "harmonic expansion needs odd n, got n = {}",
                spec.n
            )));
        }
        let (m, n) = (spec.m, spec.n);
        let cos_scale = spec.a / ipow(2.0, m - 1);
        let cos_terms = (0..=(m - 1) / 2)
            .map(|k| (f64::from(m - 2 * k), cos_scale * binomial(m, k)))
            .collect();
        let sin_scale = spec.bx / ipow(2.0, n - 1);
        let sin_terms = (0..=(n - 1) / 2)
            .map(|k| {
                let sign = if ((n - 1) / 2 + k) % 2 == 0 { 1.0 } else { -1.0 };
                (f64::from(n - 2 * k), sign * sin_scale * binomial(n, k))
            })
            .collect();
        Ok(HarmonicLoop {
            by: spec.by,
            cos_terms,
            sin_terms,
        })
    }
}

impl ParametricLoop for HarmonicLoop {
    fn point(&self, alpha: f64) -> Point {
        let mut x = 0.0;
        for &(k, c) in &self.cos_terms {
            x += c * (k * alpha).cos();
        }
        for &(k, c) in &self.sin_terms {
            x += c * (k * alpha).sin();
        }
        Point::new(x, self.by * alpha.sin())
    }
}

pub fn eval_harmonic(spec: &LoopSpec, alpha: f64) -> Result<Point> {
    Ok(HarmonicLoop::new(spec)?.point(alpha))
}

/// Split-term shift that tilts the loop at its split point so the tangent
/// leans by `tilt` from the vertical.
pub fn tilt_shift_for_angle(spec: &LoopSpec, tilt: f64) -> Result<f64> {
    finite("tilt", tilt)?;
    if spec.a == 0.0 {
        return Err(Error::Untiltable(
            "an unsplit loop (a = 0) cannot be tilted by a split-term shift".into(),
        ));
    }
    Ok(-(spec.by * tilt.tan() / (f64::from(spec.m) * spec.a)).atan())
}

/// Leaf saturation abscissa that tilts a Classical loop by `tilt` when the
/// two are added.
pub fn leaf_tilt_bx(by: f64, tilt: f64) -> f64 {
    by * tilt.tan()
}

fn check_skew_angle(name: &'static str, angle: f64) -> Result<f64> {
    let angle = finite(name, angle)?;
    if angle.abs() >= FRAC_PI_2 - 1e-12 {
        return Err(Error::Singular(format!(
            "{name} angle {angle} rad reaches ±π/2"
        )));
    }
    Ok(angle)
}

/// Loop tilted about its split point by rotating the coordinate system,
/// with the split point held fixed. Sine waveform, shifts ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedLoop {
    spec: LoopSpec,
    tilt: f64,
}

impl RotatedLoop {
    pub fn new(spec: LoopSpec, tilt: f64) -> Result<RotatedLoop> {
        spec.validate()?;
        let tilt = finite("tilt", tilt)?;
        Ok(RotatedLoop { spec, tilt })
    }
}

impl ParametricLoop for RotatedLoop {
    fn point(&self, alpha: f64) -> Point {
        let LoopSpec { a, bx, by, m, n, .. } = self.spec;
        let (st, ct) = self.tilt.sin_cos();
        let s = alpha.sin();
        let sn = ipow(s, n);
        let x = a * ipow(alpha.cos(), m) + bx * s - ct * (bx * ct - by * st) * (s - sn);
        let y = by * sn + ct * (bx * st + by * ct) * (s - sn);
        Point::new(x, y)
    }
}

pub fn eval_rotated(spec: &LoopSpec, tilt: f64, alpha: f64) -> Result<Point> {
    Ok(RotatedLoop::new(*spec, tilt)?.point(alpha))
}

/// Bat (even `k`) or Astro (odd `k`) loop: the output is raised to `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatAstroLoop {
    inner: ShiftedLoop,
    k: u32,
}

impl BatAstroLoop {
    pub fn new(spec: LoopSpec, k: u32) -> Result<BatAstroLoop> {
        if k < 2 {
            return Err(Error::Domain(format!("output power must be ≥ 2, got {k}")));
        }
        Ok(BatAstroLoop {
            inner: ShiftedLoop::new(spec)?,
            k,
        })
    }
}

impl ParametricLoop for BatAstroLoop {
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = self.inner.spec();
        let x = self.inner.point(alpha).x;
        let y = s.by * ipow(s.waveform.s(alpha + s.shifts.output), self.k);
        Point::new(x, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
}

pub fn eval_bat_astro(spec: &LoopSpec, k: u32, alpha: f64) -> Result<Point> {
    Ok(BatAstroLoop::new(*spec, k)?.point(alpha))
}

/// One summand of a loop combination: `factor · member^power`.
#[derive(Clone)]
pub struct Term {
    pub member: Arc<dyn ParametricLoop>,
    pub factor: f64,
    pub power: u32,
}

impl Term {
    pub fn new<L: ParametricLoop + 'static>(member: L, factor: f64, power: u32) -> Term {
        Term {
            member: Arc::new(member),
            factor,
            power,
        }
    }
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Term")
            .field("factor", &self.factor)
            .field("power", &self.power)
            .finish_non_exhaustive()
    }
}

/// Weighted sum of powers of member loops, separately in x and y.
#[derive(Debug, Clone)]
pub struct Combination {
    x_terms: Vec<Term>,
    y_terms: Vec<Term>,
    period: f64,
}

impl Combination {
    pub fn new(x_terms: Vec<Term>, y_terms: Vec<Term>) -> Result<Combination> {
        if x_terms.is_empty() || y_terms.is_empty() {
            return Err(Error::Domain("a combination needs at least one x and one y term".into()));
        }
        let mut period = None;
        for t in x_terms.iter().chain(&y_terms) {
            finite("factor", t.factor)?;
            if t.power == 0 {
                return Err(Error::param("power", "must be a positive integer"));
            }
            let p = t.member.period();
            match period {
                None => period = Some(p),
                Some(q) if (q - p).abs() > 1e-12 * q => {
                    return Err(Error::Domain("members have different periods".into()))
                }
                _ => {}
            }
        }
        Ok(Combination {
            x_terms,
            y_terms,
            period: period.unwrap_or(std::f64::consts::TAU),
        })
    }

    /// Sum of loops, each entering both coordinates with unit factor and power.
    pub fn sum(members: Vec<Arc<dyn ParametricLoop>>) -> Result<Combination> {
        let terms: Vec<Term> = members
            .into_iter()
            .map(|member| Term {
                member,
                factor: 1.0,
                power: 1,
            })
            .collect();
        Combination::new(terms.clone(), terms)
    }
}

impl ParametricLoop for Combination {
    fn period(&self) -> f64 {
        self.period
    }

    fn point(&self, alpha: f64) -> Point {
        let x = self
            .x_terms
            .iter()
            .map(|t| t.factor * ipow(t.member.point(alpha).x, t.power))
            .sum();
        let y = self
            .y_terms
            .iter()
            .map(|t| t.factor * ipow(t.member.point(alpha).y, t.power))
            .sum();
        Point::new(x, y)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let b = self
            .x_terms
            .iter()
            .chain(&self.y_terms)
            .flat_map(|t| t.member.breakpoints())
            .collect();
        normalize_phases(b, self.period)
    }
}

/// Loop skewed along x by `tilt` and along y by `curvature`. Both offsets
/// vanish at the split and saturation phases, so anchors are preserved.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewedLoop {
    inner: ShiftedLoop,
    tilt: f64,
    curvature: f64,
}

impl SkewedLoop {
    pub fn new(spec: LoopSpec, tilt: f64, curvature: f64) -> Result<SkewedLoop> {
        let tilt = check_skew_angle("tilt", tilt)?;
        let curvature = check_skew_angle("curvature", curvature)?;
        Ok(SkewedLoop {
            inner: ShiftedLoop::new(spec)?,
            tilt,
            curvature,
        })
    }

    pub fn spec(&self) -> &LoopSpec {
        self.inner.spec()
    }

    fn weight(&self, alpha: f64) -> f64 {
        let s = self.inner.spec();
        let v = s.waveform.s(alpha + s.shifts.output);
        v - ipow(v, s.n)
    }
}

impl ParametricLoop for SkewedLoop {
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn point(&self, alpha: f64) -> Point {
        let s = self.inner.spec();
        let p = self.inner.point(alpha);
        let w = self.weight(alpha);
        let tk = self.curvature.tan();
        Point::new(
            p.x + self.tilt.tan() * (s.bx * tk + s.by) * w,
            p.y + s.bx * tk * w,
        )
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    fn saturation_phase(&self) -> f64 {
        self.inner.saturation_phase()
    }

    fn saturation_tangent(&self) -> Option<f64> {
        let s = self.inner.spec();
        if !s.shifts.is_zero() {
            return None;
        }
        let t = self.curvature.tan();
        let k = 1.0 - f64::from(s.n);
        let num = s.by + s.bx * t * k;
        let den = f64::from(s.n) * s.bx + self.tilt.tan() * (s.bx * t + s.by) * k;
        Some((num / den).atan())
    }
}

pub fn eval_skew_x(spec: &LoopSpec, tilt: f64, alpha: f64) -> Result<Point> {
    Ok(SkewedLoop::new(*spec, tilt, 0.0)?.point(alpha))
}

pub fn eval_skew_xy(spec: &LoopSpec, tilt: f64, curvature: f64, alpha: f64) -> Result<Point> {
    Ok(SkewedLoop::new(*spec, tilt, curvature)?.point(alpha))
}

/// Angle of the tangent at the split point measured from the vertical,
/// positive when the loop leans right. Uses a central difference.
pub fn split_tilt<L: ParametricLoop + ?Sized>(lp: &L, split_phase: f64, h: f64) -> f64 {
    let d = crate::curve::central_difference(|t| lp.point(t), split_phase, h);
    d.x.atan2(d.y)
}

//! Double and triple loops assembled from point-symmetric member loops.

use std::sync::Arc;

use crate::curve::{normalize_phases, ParametricLoop, Point};
use crate::error::{finite, Error, Result};
use crate::roots::{bracketed, scan_brackets, RootFindResult};
use crate::smooth::{ipow, LoopSpec, ShiftedLoop, Term, Combination};
use crate::waveforms::sgn;

/// Root-finder residual target for derivative and split equations.
const ROOT_TOL: f64 = 1e-12;
/// Scan resolution used to bracket roots over one period.
const SCAN_CELLS: usize = 256;

fn check_point_symmetric(lp: &dyn ParametricLoop, what: &str) -> Result<()> {
    let t = lp.period();
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for i in 0..16 {
        // irrational-ish offsets keep away from jump phases
        let al = (i as f64 + 0.371) * t / 16.0;
        let p = lp.point(al);
        let q = lp.point(al + t / 2.0);
        scale = scale.max(p.norm());
        worst = worst.max((p + q).norm());
    }
    if worst > 1e-9 * scale {
        return Err(Error::Unsupported(format!(
            "{what} loop is not point-symmetric over half a period (odd powers are required)"
        )));
    }
    Ok(())
}

/// Phases `α ∈ [lo, hi)` where `slope·α + offset ≡ b (mod period)`.
fn preimages(b: f64, slope: f64, offset: f64, lo: f64, hi: f64, period: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let (u0, u1) = (slope * lo + offset, slope * hi + offset);
    let (umin, umax) = (u0.min(u1), u0.max(u1));
    let k0 = ((umin - b) / period).floor() as i64 - 1;
    let k1 = ((umax - b) / period).ceil() as i64 + 1;
    for k in k0..=k1 {
        let al = (b + k as f64 * period - offset) / slope;
        if al >= lo && al < hi {
            out.push(al);
        }
    }
    out
}

/// Global maximum of `x(α)` over one period, from sign changes of `x'`.
///
/// Falls back to the saturation phase when `x'` never changes sign from
/// positive to negative.
pub fn find_alpha_max<L: ParametricLoop + ?Sized>(lp: &L) -> Result<RootFindResult> {
    let t = lp.period();
    let dx = |a: f64| lp.derivative(a).x;
    let mut best: Option<(RootFindResult, f64)> = None;
    for (lo, hi) in scan_brackets(dx, 0.0, t, SCAN_CELLS) {
        if !(dx(lo) > 0.0 || dx(hi) < 0.0) {
            continue;
        }
        let r = bracketed(dx, lo, hi, ROOT_TOL)?;
        let x = lp.point(r.root).x;
        if best.as_ref().map_or(true, |(_, bx)| x > *bx) {
            best = Some((r, x));
        }
    }
    match best {
        Some((r, _)) => Ok(r),
        None => {
            let root = lp.saturation_phase().rem_euclid(t);
            Ok(RootFindResult {
                root,
                residual: dx(root),
                iterations: 0,
            })
        }
    }
}

/// Two copies of a member loop linked end to end at a point of the member,
/// so the pair is drawn in one stroke over one period.
#[derive(Clone)]
pub struct DoubleLoop {
    member: Arc<dyn ParametricLoop>,
    link_phase: f64,
    offset: Point,
    self_crossing: bool,
}

impl std::fmt::Debug for DoubleLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DoubleLoop")
            .field("link_phase", &self.link_phase)
            .field("offset", &self.offset)
            .field("self_crossing", &self.self_crossing)
            .finish_non_exhaustive()
    }
}

impl DoubleLoop {
    /// Links the copies at the member's saturation point.
    pub fn at_saturation(member: Arc<dyn ParametricLoop>, self_crossing: bool) -> Result<DoubleLoop> {
        check_point_symmetric(member.as_ref(), "member")?;
        let link_phase = member.saturation_phase();
        let offset = member.saturation();
        Ok(DoubleLoop {
            member,
            link_phase,
            offset,
            self_crossing,
        })
    }

    /// Links the copies where the member's `x` is largest.
    pub fn at_x_max(member: Arc<dyn ParametricLoop>, self_crossing: bool) -> Result<DoubleLoop> {
        check_point_symmetric(member.as_ref(), "member")?;
        let link_phase = find_alpha_max(member.as_ref())?.root;
        let offset = member.point(link_phase);
        Ok(DoubleLoop {
            member,
            link_phase,
            offset,
            self_crossing,
        })
    }

    pub fn link_point(&self) -> Point {
        self.offset
    }

    fn argument(&self, alpha: f64, sg: f64) -> f64 {
        let q = self.period() / 4.0;
        if self.self_crossing {
            (2.0 * alpha - q) * sg - q + self.link_phase
        } else {
            2.0 * alpha - q * sg - q + self.link_phase
        }
    }
}

impl ParametricLoop for DoubleLoop {
    fn period(&self) -> f64 {
        self.member.period()
    }

    fn point(&self, alpha: f64) -> Point {
        let t = self.period();
        let al = if alpha == t { alpha } else { alpha.rem_euclid(t) };
        let sg = sgn(t / 2.0 - al);
        self.member.point(self.argument(al, sg)) + self.offset * sg
    }

    fn breakpoints(&self) -> Vec<f64> {
        let t = self.period();
        let h = t / 2.0;
        let mut out = vec![0.0, h];
        let mut member_phases = self.member.breakpoints();
        member_phases.extend(self.member.switch_phases());
        for b in member_phases {
            // first half: arg = 2α + (link − T/2)
            out.extend(preimages(b, 2.0, self.link_phase - h, 0.0, h, t));
            if self.self_crossing {
                out.extend(preimages(b, -2.0, self.link_phase, h, t, t));
            } else {
                out.extend(preimages(b, 2.0, self.link_phase, h, t, t));
            }
        }
        normalize_phases(out, t)
    }

    fn is_polygonal(&self) -> bool {
        self.member.is_polygonal()
    }

    fn switch_phases(&self) -> Vec<f64> {
        vec![self.period() / 2.0]
    }
}

/// Three loops joined at saturation points: a central loop flanked by two
/// copies of an outer loop, each copy offset to continue from the central
/// loop's saturation point.
#[derive(Clone)]
pub struct TripleLoop {
    central: Arc<dyn ParametricLoop>,
    outer: Arc<dyn ParametricLoop>,
    offset: Point,
    self_crossing: bool,
}

impl std::fmt::Debug for TripleLoop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TripleLoop")
            .field("offset", &self.offset)
            .field("self_crossing", &self.self_crossing)
            .finish_non_exhaustive()
    }
}

/// Largest tangent mismatch accepted at the junctions, in radians.
pub const TANGENT_TOLERANCE: f64 = 1e-9;

impl TripleLoop {
    /// Requires both members to report saturation tangents that agree
    /// within [`TANGENT_TOLERANCE`].
    pub fn new(
        central: Arc<dyn ParametricLoop>,
        outer: Arc<dyn ParametricLoop>,
        self_crossing: bool,
    ) -> Result<TripleLoop> {
        let (g1, g2) = match (central.saturation_tangent(), outer.saturation_tangent()) {
            (Some(g1), Some(g2)) => (g1, g2),
            _ => {
                return Err(Error::Assembly(
                    "both members need a closed-form saturation tangent".into(),
                ))
            }
        };
        if (g1 - g2).abs() > TANGENT_TOLERANCE {
            return Err(Error::Assembly(format!(
                "saturation tangents differ: central {g1} rad, outer {g2} rad"
            )));
        }
        TripleLoop::without_tangent_check(central, outer, self_crossing)
    }

    /// Assembles without comparing tangents; the result may have corners at
    /// the junctions.
    pub fn without_tangent_check(
        central: Arc<dyn ParametricLoop>,
        outer: Arc<dyn ParametricLoop>,
        self_crossing: bool,
    ) -> Result<TripleLoop> {
        if (central.period() - outer.period()).abs() > 1e-12 * central.period() {
            return Err(Error::Assembly("members have different periods".into()));
        }
        check_point_symmetric(central.as_ref(), "central")?;
        check_point_symmetric(outer.as_ref(), "outer")?;
        let offset = central.saturation() + outer.saturation();
        Ok(TripleLoop {
            central,
            outer,
            offset,
            self_crossing,
        })
    }

    fn outer_sign(&self) -> f64 {
        if self.self_crossing {
            -1.0
        } else {
            1.0
        }
    }

    fn central_offset(&self) -> f64 {
        self.central.saturation_phase() - self.period() / 2.0
    }

    fn outer_offset(&self) -> f64 {
        self.outer.saturation_phase() - self.period()
    }
}

impl ParametricLoop for TripleLoop {
    fn period(&self) -> f64 {
        self.central.period()
    }

    fn point(&self, alpha: f64) -> Point {
        let t = self.period();
        let al = if alpha == t { alpha } else { alpha.rem_euclid(t) };
        let w = t / 6.0;
        let in_central = (0.0..w).contains(&al) || (t / 2.0..t / 2.0 + w).contains(&al);
        if in_central {
            self.central.point(3.0 * al + self.central_offset())
        } else {
            let arg = self.outer_sign() * 3.0 * al + self.outer_offset();
            self.outer.point(arg) + self.offset * sgn(t / 2.0 - al)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let t = self.period();
        let w = t / 6.0;
        let mut out = vec![0.0, w, t / 2.0, t / 2.0 + w];
        let mut central = self.central.breakpoints();
        central.extend(self.central.switch_phases());
        for b in central {
            out.extend(preimages(b, 3.0, self.central_offset(), 0.0, w, t));
            out.extend(preimages(b, 3.0, self.central_offset(), t / 2.0, t / 2.0 + w, t));
        }
        let mut outer = self.outer.breakpoints();
        outer.extend(self.outer.switch_phases());
        let s = 3.0 * self.outer_sign();
        for b in outer {
            out.extend(preimages(b, s, self.outer_offset(), w, t / 2.0, t));
            out.extend(preimages(b, s, self.outer_offset(), t / 2.0 + w, t, t));
        }
        normalize_phases(out, t)
    }

    fn is_polygonal(&self) -> bool {
        self.central.is_polygonal() && self.outer.is_polygonal()
    }
}

/// Curvature angle of a skewed central loop that makes its saturation
/// tangent match outer whisker loops spanning from `(b1x, b1y)` to
/// `(bx, by)`.
pub fn whisker_curvature(bx: f64, by: f64, b1x: f64, b1y: f64, n1: u32, tilt: f64) -> Result<f64> {
    for (name, v) in [("bx", bx), ("by", by), ("b1x", b1x), ("b1y", b1y), ("theta", tilt)] {
        finite(name, v)?;
    }
    if n1 <= 1 {
        return Err(Error::param("n1", "curvature has no effect for n1 = 1"));
    }
    let dx = bx - b1x;
    let dy = by - b1y;
    let k = f64::from(n1);
    let tt = tilt.tan();
    let den = b1x * (k - 1.0) * (tt * dy - dx);
    if den.abs() < 1e-14 {
        return Err(Error::Singular(
            "whisker curvature is undefined: the whiskers have zero extent or are parallel to the tilt".into(),
        ));
    }
    let num = b1y * (tt * (1.0 - k) * dy - dx) + k * b1x * dy;
    Ok((num / den).atan())
}

/// Parameters of a loop pinched by raising `x` and `y` to odd powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchPower {
    pub k: u32,
    pub l: u32,
    /// Factor on `x^k`.
    pub gain_x: f64,
    /// Factor on `y^l`.
    pub gain_y: f64,
}

impl PinchPower {
    pub fn new(k: u32, l: u32, gain_x: f64, gain_y: f64) -> Result<PinchPower> {
        for (name, p) in [("k", k), ("l", l)] {
            if p % 2 == 0 {
                return Err(Error::param(name, format!("must be an odd positive integer, got {p}")));
            }
        }
        for (name, g) in [("A", gain_x), ("B", gain_y)] {
            if !(finite(name, g)? > 0.0) {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(PinchPower { k, l, gain_x, gain_y })
    }

    /// Phase where the pinched output reaches half the member's `b_y`.
    pub fn half_height_phase(&self, by: f64) -> Result<f64> {
        let base = 2.0 * self.gain_y * by.powi(self.l as i32 - 1);
        if base < 1.0 {
            return Err(Error::Infeasible(format!(
                "the pinched output never reaches half height: 2·B·by^(l−1) = {base} < 1"
            )));
        }
        Ok(base.powf(-1.0 / f64::from(self.l)).asin())
    }

    /// The pinched loop `(A·x^k, B·y^l)` built on `spec`.
    pub fn build(&self, spec: &LoopSpec) -> Result<Combination> {
        let member = ShiftedLoop::new(*spec)?;
        Combination::new(
            vec![Term::new(member.clone(), self.gain_x, self.k)],
            vec![Term::new(member, self.gain_y, self.l)],
        )
    }
}

/// Half-height phase and the split `a` that make the pinched loop's
/// half-height split equal `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinchSolution {
    pub alpha_d: f64,
    pub a: f64,
}

fn pinch_terms(spec: &LoopSpec, alpha_d: f64) -> Result<(f64, f64)> {
    if !spec.shifts.is_zero() {
        return Err(Error::Unsupported("power pinching expects an unshifted member".into()));
    }
    let c = ipow(alpha_d.cos(), spec.m);
    if c.abs() < 1e-15 {
        return Err(Error::Infeasible("cos(α_d) vanishes; the split cannot move the half-height width".into()));
    }
    Ok((c, spec.bx * ipow(alpha_d.sin(), spec.n)))
}

fn check_target(target: f64) -> Result<f64> {
    let t = finite("a_d", target)?;
    if t < 0.0 {
        return Err(Error::Infeasible(format!("half-height split must be non-negative, got {t}")));
    }
    Ok(t)
}

/// Closed-form split for cubic pinching (`k = 3`). Ignores `spec.a`.
pub fn pinch_power(spec: &LoopSpec, pinch: &PinchPower, target: f64) -> Result<PinchSolution> {
    if pinch.k != 3 {
        return Err(Error::Unsupported(format!(
            "the closed-form split needs k = 3, got {}; use pinch_power_numeric",
            pinch.k
        )));
    }
    let target = check_target(target)?;
    let alpha_d = pinch.half_height_phase(spec.by)?;
    let (c, q) = pinch_terms(spec, alpha_d)?;
    let g = pinch.gain_x;
    // p³ + 3q²p = target/A, solved by Cardano's formula
    let r = target + (4.0 * g * g * q.powi(6) + target * target).sqrt();
    let p = if r == 0.0 {
        0.0
    } else {
        (r / (2.0 * g)).cbrt() - q * q * (2.0 * g / r).cbrt()
    };
    Ok(PinchSolution { alpha_d, a: p / c })
}

/// Half-height split difference `A·x^k(α_d) − A·x^k(π − α_d)` for split `a`.
fn pinch_width(spec: &LoopSpec, pinch: &PinchPower, alpha_d: f64, a: f64) -> Result<f64> {
    let (c, q) = pinch_terms(spec, alpha_d)?;
    let k = pinch.k;
    Ok(pinch.gain_x * (ipow(a * c + q, k) - ipow(q - a * c, k)))
}

/// Split for any odd `k`, by bisection on the half-height equation.
pub fn pinch_power_numeric(spec: &LoopSpec, pinch: &PinchPower, target: f64) -> Result<PinchSolution> {
    let target = check_target(target)?;
    let alpha_d = pinch.half_height_phase(spec.by)?;
    let f = |a: f64| pinch_width(spec, pinch, alpha_d, a).unwrap_or(f64::NAN) - 2.0 * target;
    if target == 0.0 {
        return Ok(PinchSolution { alpha_d, a: 0.0 });
    }
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Infeasible("no split reaches the requested width".into()));
        }
    }
    let r = bracketed(f, 0.0, hi, 1e-14 * target.max(1.0))?;
    Ok(PinchSolution { alpha_d, a: r.root })
}

/// Which phase shift plays the role of the split in shift pinching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinchShift {
    Saturation,
    Output,
}

fn shifted_width(spec: &LoopSpec, which: PinchShift, shift: f64) -> Result<f64> {
    let s = match which {
        PinchShift::Saturation => spec.with_shifts(0.0, shift, 0.0)?,
        PinchShift::Output => spec.with_shifts(0.0, 0.0, shift)?,
    };
    let lp = ShiftedLoop::new(s)?;
    let d3 = s.shifts.output;
    // y = b_y·s(α + Δα₃) = b_y/2 at these two phases
    let q = s.waveform.quarter();
    let alpha_d = half_level_phase(&s) - d3;
    let mirror = 2.0 * q - 2.0 * d3 - alpha_d;
    Ok(lp.point(alpha_d).x - lp.point(mirror).x)
}

fn half_level_phase(spec: &LoopSpec) -> f64 {
    let q = spec.waveform.quarter();
    bracketed(|a| spec.waveform.s(a) - 0.5, 0.0, q, 1e-15)
        .map(|r| r.root)
        .unwrap_or(q / 3.0)
}

/// Phase shift that pinches an unsplit loop to half-height split `target`.
/// Returns the smallest such shift.
pub fn pinch_shift(spec: &LoopSpec, which: PinchShift, target: f64) -> Result<f64> {
    if spec.a != 0.0 {
        return Err(Error::param("a", "shift pinching starts from an unsplit loop (a = 0)"));
    }
    let target = check_target(target)?;
    if target == 0.0 {
        return Ok(0.0);
    }
    let f = |d: f64| shifted_width(spec, which, d).map_or(f64::NAN, |w| w - 2.0 * target);
    let lim = spec.waveform.quarter() * 0.98;
    let mut roots: Vec<f64> = Vec::new();
    for (lo, hi) in scan_brackets(f, -lim, lim, SCAN_CELLS) {
        if let Ok(r) = bracketed(f, lo, hi, 1e-12) {
            if r.residual.abs() <= 1e-8 {
                roots.push(r.root);
            }
        }
    }
    roots
        .into_iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or_else(|| Error::Infeasible(format!("no phase shift gives half-height split {target}")))
}

//! Parameter identification from sampled loop branches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::curve::{shoelace, ParametricLoop, Point};
use crate::error::{Error, Result};
use crate::roots::bracketed;
use crate::smooth::{LoopSpec, ShiftedLoop};

/// Minimum number of samples per branch after ingestion.
pub const MIN_BRANCH_POINTS: usize = 8;
/// Model samples per period used to invert model branches.
pub const MODEL_SAMPLES: usize = 1024;

/// Two branches of a measured loop. The ascending branch is traversed with
/// increasing x (the lower branch of a counter-clockwise loop).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchData {
    pub ascending: Vec<Point>,
    pub descending: Vec<Point>,
    pub units: String,
}

impl BranchData {
    pub fn len(&self) -> usize {
        self.ascending.len() + self.descending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn all(&self) -> impl Iterator<Item = &Point> {
        self.ascending.iter().chain(&self.descending)
    }
}

fn median_step(points: &[Point]) -> f64 {
    let mut steps: Vec<f64> = points.windows(2).map(|w| w[0].distance(w[1])).collect();
    steps.sort_by(|a, b| a.total_cmp(b));
    steps[steps.len() / 2]
}

fn dedup_sorted(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    let mut i = 0;
    while i < pts.len() {
        let mut j = i;
        let mut sum = 0.0;
        while j < pts.len() && pts[j].x == pts[i].x {
            sum += pts[j].y;
            j += 1;
        }
        out.push(Point::new(pts[i].x, sum / (j - i) as f64));
        i = j;
    }
    out
}

/// Splits one traced cycle into ascending and descending branches.
///
/// The cycle must close (end-to-start gap at most five median steps) and
/// must be ordered along the curve: the median step stays below a quarter
/// of the diameter and the total variation of x below 4.5 times the x
/// range. Clockwise input is reversed first. Each branch is sorted by x
/// and repeated x values are merged to their mean y.
pub fn ingest_branches(raw: &[Point]) -> Result<BranchData> {
    if raw.len() < 2 * MIN_BRANCH_POINTS {
        return Err(Error::Ingestion(format!(
            "need at least {} points, got {}",
            2 * MIN_BRANCH_POINTS,
            raw.len()
        )));
    }
    if raw.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
        return Err(Error::Ingestion("non-finite coordinate".into()));
    }
    let mut pts = raw.to_vec();
    if pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    let step = median_step(&pts);
    let gap = pts[0].distance(pts[pts.len() - 1]);
    if gap > 5.0 * step.max(f64::MIN_POSITIVE) {
        return Err(Error::Ingestion(format!(
            "the samples do not close into a full cycle (gap {gap:.3e}, median step {step:.3e})"
        )));
    }
    let (xmin, xmax) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    let range = xmax - xmin;
    let mut tv: f64 = pts.windows(2).map(|w| (w[1].x - w[0].x).abs()).sum();
    tv += (pts[0].x - pts[pts.len() - 1].x).abs();
    let (ylo, yhi) = pts
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.y), hi.max(p.y)));
    let diameter = range.hypot(yhi - ylo);
    // an ordered cycle moves a small fraction of its size per sample and
    // reverses x a bounded number of times; shuffled input does neither
    if !(range > 0.0) || tv > 4.5 * range || step > 0.25 * diameter {
        return Err(Error::Ingestion(
            "x does not trace a single cycle (ordering is not cyclic)".into(),
        ));
    }
    if shoelace(&pts) < 0.0 {
        pts.reverse();
    }
    let n = pts.len();
    let imin = (0..n).min_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x)).unwrap_or(0);
    let imax = (0..n).max_by(|&i, &j| pts[i].x.total_cmp(&pts[j].x)).unwrap_or(0);
    let walk = |from: usize, to: usize| -> Vec<Point> {
        let mut v = Vec::new();
        let mut i = from;
        loop {
            v.push(pts[i]);
            if i == to {
                break;
            }
            i = (i + 1) % n;
        }
        v
    };
    let ascending = dedup_sorted(walk(imin, imax));
    let descending = dedup_sorted(walk(imax, imin));
    for (name, b) in [("ascending", &ascending), ("descending", &descending)] {
        if b.len() < MIN_BRANCH_POINTS {
            return Err(Error::Ingestion(format!(
                "{name} branch has {} distinct points, need {MIN_BRANCH_POINTS}",
                b.len()
            )));
        }
    }
    Ok(BranchData {
        ascending,
        descending,
        units: String::new(),
    })
}

#[derive(Clone, Copy)]
struct Sample {
    alpha: f64,
    p: Point,
}

/// Maximises `sign·x(α)` on `[lo, hi]` by golden-section search.
fn refine_extreme<L: ParametricLoop + ?Sized>(lp: &L, lo: f64, hi: f64, sign: f64) -> Sample {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let f = |t: f64| sign * lp.point(t).x;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let alpha = 0.5 * (a + b);
    Sample { alpha, p: lp.point(alpha) }
}

/// A model branch sampled in traversal order and cut into x-monotone runs.
struct ModelBranch {
    samples: Vec<Sample>,
    /// Half-open index ranges `[start, end]` (inclusive ends) of monotone runs.
    runs: Vec<(usize, usize)>,
}

impl ModelBranch {
    fn new(samples: Vec<Sample>) -> ModelBranch {
        let mut runs = Vec::new();
        let mut start = 0;
        let mut dir = 0.0;
        for i in 1..samples.len() {
            let d = (samples[i].p.x - samples[i - 1].p.x).signum();
            if dir == 0.0 {
                dir = d;
            } else if d != dir && samples[i].p.x != samples[i - 1].p.x {
                runs.push((start, i - 1));
                start = i - 1;
                dir = d;
            }
        }
        runs.push((start, samples.len() - 1));
        ModelBranch { samples, runs }
    }

    fn first(&self) -> Point {
        self.samples[0].p
    }

    fn last(&self) -> Point {
        self.samples[self.samples.len() - 1].p
    }

    /// Segment index `i` with `x` between samples `i` and `i + 1` inside a run.
    fn locate(&self, run: (usize, usize), x: f64) -> Option<usize> {
        let s = &self.samples;
        let (lo, hi) = run;
        if lo == hi {
            return None;
        }
        let rising = s[hi].p.x >= s[lo].p.x;
        let (xmin, xmax) = if rising { (s[lo].p.x, s[hi].p.x) } else { (s[hi].p.x, s[lo].p.x) };
        if x < xmin || x > xmax {
            return None;
        }
        // first sample past x in traversal order
        let (mut l, mut h) = (lo, hi);
        while h - l > 1 {
            let mid = (l + h) / 2;
            let past = if rising { s[mid].p.x >= x } else { s[mid].p.x <= x };
            if past {
                h = mid;
            } else {
                l = mid;
            }
        }
        Some(l)
    }
}

/// Moves every interior local extreme of x onto the exact turning point,
/// so abscissae right at a fold still find a crossing.
fn refine_turns<L: ParametricLoop + ?Sized>(lp: &L, mut v: Vec<Sample>) -> Vec<Sample> {
    for i in 1..v.len().saturating_sub(1) {
        let (p, c, q) = (v[i - 1].p.x, v[i].p.x, v[i + 1].p.x);
        let sign = if c > p && c >= q {
            1.0
        } else if c < p && c <= q {
            -1.0
        } else {
            continue;
        };
        let r = refine_extreme(lp, v[i - 1].alpha, v[i + 1].alpha, sign);
        if sign * r.p.x >= sign * c {
            v[i] = r;
        }
    }
    v
}

struct ModelBranches {
    ascending: ModelBranch,
    descending: ModelBranch,
}

fn model_branches<L: ParametricLoop + ?Sized>(lp: &L) -> ModelBranches {
    let t = lp.period();
    let h = t / MODEL_SAMPLES as f64;
    let s: Vec<Sample> = (0..MODEL_SAMPLES)
        .map(|i| {
            let alpha = i as f64 * h;
            Sample { alpha, p: lp.point(alpha) }
        })
        .collect();
    let imin = (0..s.len()).min_by(|&i, &j| s[i].p.x.total_cmp(&s[j].p.x)).unwrap_or(0);
    let imax = (0..s.len()).max_by(|&i, &j| s[i].p.x.total_cmp(&s[j].p.x)).unwrap_or(0);
    let lo = refine_extreme(lp, s[imin].alpha - h, s[imin].alpha + h, -1.0);
    let hi = refine_extreme(lp, s[imax].alpha - h, s[imax].alpha + h, 1.0);
    // collect samples strictly between the refined extremes, unwrapping α
    let between = |from: Sample, to: Sample| -> Vec<Sample> {
        let mut end = to.alpha;
        while end <= from.alpha {
            end += t;
        }
        let mut v = vec![from];
        let mut k = (from.alpha / h).floor() as i64 + 1;
        loop {
            let alpha = k as f64 * h;
            if alpha >= end {
                break;
            }
            let idx = k.rem_euclid(MODEL_SAMPLES as i64) as usize;
            v.push(Sample { alpha, p: s[idx].p });
            k += 1;
        }
        v.push(Sample { alpha: end, p: to.p });
        v
    };
    ModelBranches {
        ascending: ModelBranch::new(refine_turns(lp, between(lo, hi))),
        descending: ModelBranch::new(refine_turns(lp, between(hi, lo))),
    }
}

/// Solves `x(α) = x` inside one sample interval: Newton from the linear
/// guess, safeguarded by the bracket, with a bracketed fallback.
fn solve_segment<L: ParametricLoop + ?Sized>(lp: &L, a: Sample, b: Sample, x: f64) -> f64 {
    if a.p.x == x {
        return a.p.y;
    }
    if b.p.x == x {
        return b.p.y;
    }
    let (lo, hi) = (a.alpha.min(b.alpha), a.alpha.max(b.alpha));
    let mut t = a.alpha + (x - a.p.x) / (b.p.x - a.p.x) * (b.alpha - a.alpha);
    let tol = 1e-15 * (1.0 + x.abs());
    for _ in 0..8 {
        let p = lp.point(t);
        let r = p.x - x;
        if r.abs() <= tol {
            return p.y;
        }
        let dx = lp.derivative(t).x;
        let next = t - r / dx;
        if !(next.is_finite() && next > lo && next < hi) {
            break;
        }
        if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) {
            return lp.point(next).y;
        }
        t = next;
    }
    match bracketed(|t| lp.point(t).x - x, a.alpha, b.alpha, tol) {
        Ok(r) => lp.point(r.root).y,
        Err(_) => {
            let f = (x - a.p.x) / (b.p.x - a.p.x);
            a.p.y + f * (b.p.y - a.p.y)
        }
    }
}

/// Model `y` at abscissa `x` on a sampled branch: among all crossings of
/// `x` the one whose linearly interpolated `y` is closest to `y_hint` is
/// refined on the exact model. Abscissae outside the branch clamp to the
/// nearer end.
fn invert<L: ParametricLoop + ?Sized>(lp: &L, branch: &ModelBranch, x: f64, y_hint: f64) -> f64 {
    let s = &branch.samples;
    let mut best: Option<(usize, f64)> = None;
    for &run in &branch.runs {
        if let Some(i) = branch.locate(run, x) {
            let (x0, x1) = (s[i].p.x, s[i + 1].p.x);
            let f = if x1 == x0 { 0.0 } else { (x - x0) / (x1 - x0) };
            let y = s[i].p.y + f * (s[i + 1].p.y - s[i].p.y);
            let d = (y - y_hint).abs();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
    }
    match best {
        Some((i, _)) => solve_segment(lp, s[i], s[i + 1], x),
        None => {
            let (first, last) = (branch.first(), branch.last());
            if (x - first.x).abs() <= (x - last.x).abs() {
                first.y
            } else {
                last.y
            }
        }
    }
}

/// Sum of `|y_model(x_i) − y_i|` over both branches.
fn residual_sum<L: ParametricLoop + ?Sized>(lp: &L, data: &BranchData) -> Result<f64> {
    residuals(lp, data).map(|(sum, _, _)| sum)
}

/// Residual sum together with the model x extent.
fn residuals<L: ParametricLoop + ?Sized>(lp: &L, data: &BranchData) -> Result<(f64, f64, f64)> {
    let mb = model_branches(lp);
    let (mlo, mhi) = (mb.ascending.first().x, mb.descending.first().x);
    let (dlo, dhi) = data
        .all()
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    if dhi < mlo || dlo > mhi {
        return Err(Error::Domain(format!(
            "data x-range [{dlo}, {dhi}] does not overlap the model x-range [{mlo}, {mhi}]"
        )));
    }
    let mut sum = 0.0;
    for (pts, own, other) in [
        (&data.ascending, &mb.ascending, &mb.descending),
        (&data.descending, &mb.descending, &mb.ascending),
    ] {
        let last = pts.len() - 1;
        for (i, p) in pts.iter().enumerate() {
            let mut e = (invert(lp, own, p.x, p.y) - p.y).abs();
            // the extreme samples are shared by both branches and may lie
            // just past the model turning point
            if i == 0 || i == last {
                e = e.min((invert(lp, other, p.x, p.y) - p.y).abs());
            }
            sum += e;
        }
    }
    Ok((sum, mlo, mhi))
}

/// Average relative approximation error in percent of `by`:
/// `100 / (N·b_y) · Σ |y_model(x_i) − y_i|` over all `N` data points,
/// each branch compared with the matching model branch.
pub fn error_metric<L: ParametricLoop + ?Sized>(lp: &L, by: f64, data: &BranchData) -> Result<f64> {
    if !(by > 0.0) {
        return Err(Error::param("by", "must be positive"));
    }
    if data.ascending.is_empty() || data.descending.is_empty() {
        return Err(Error::Ingestion("both branches need samples".into()));
    }
    Ok(100.0 * residual_sum(lp, data)? / (data.len() as f64 * by))
}

/// [`error_metric`] for a shifted sine-model spec.
pub fn error_metric_spec(spec: &LoopSpec, data: &BranchData) -> Result<f64> {
    let lp = ShiftedLoop::new(*spec)?;
    error_metric(&lp, spec.by, data)
}

/// Which phase shifts the search may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftFreedom {
    /// All shifts fixed at zero: the original model.
    None,
    /// Split and saturation shifts.
    SplitSaturation,
    /// Split and output shifts.
    SplitOutput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub grid: Vec<(u32, u32)>,
    pub shifts: ShiftFreedom,
    pub restarts: usize,
    pub seed: u64,
    /// Evaluation budget of each coarse restart.
    pub restart_evals: usize,
    /// Evaluation budget of the final polish.
    pub polish_evals: usize,
    /// Upper bound on the points used by the search; longer records are
    /// thinned evenly per branch. The reported metric always uses all data.
    pub max_points: usize,
}

impl Default for FitOptions {
    fn default() -> FitOptions {
        let mut grid = Vec::new();
        for m in [1, 3, 5] {
            for n in [1, 2, 3] {
                grid.push((m, n));
            }
        }
        FitOptions {
            grid,
            shifts: ShiftFreedom::SplitSaturation,
            restarts: 16,
            seed: 0,
            restart_evals: 400,
            polish_evals: 4000,
            max_points: 400,
        }
    }
}

impl FitOptions {
    pub fn original(mut self) -> FitOptions {
        self.shifts = ShiftFreedom::None;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: LoopSpec,
    /// ⟨δ⟩ in percent.
    pub delta: f64,
    pub restarts_used: usize,
    pub converged: bool,
}

const PENALTY: f64 = 1e6;

fn build_spec(x: &[f64], m: u32, n: u32, shifts: ShiftFreedom) -> Option<LoopSpec> {
    let spec = LoopSpec::new(x[0], x[1], x[2], m, n).ok()?;
    match shifts {
        ShiftFreedom::None => Some(spec),
        ShiftFreedom::SplitSaturation => spec.with_shifts(x[3], x[4], 0.0).ok(),
        ShiftFreedom::SplitOutput => spec.with_shifts(x[3], 0.0, x[4]).ok(),
    }
}

fn thin_branch(pts: &[Point], keep: usize) -> Vec<Point> {
    if pts.len() <= keep || keep < 2 {
        return pts.to_vec();
    }
    let last = pts.len() - 1;
    (0..keep).map(|i| pts[i * last / (keep - 1)]).collect()
}

/// Even subset of at most `max_points` samples, branch ends kept.
fn thin(data: &BranchData, max_points: usize) -> BranchData {
    if data.len() <= max_points {
        return data.clone();
    }
    let keep = (max_points / 2).max(MIN_BRANCH_POINTS);
    BranchData {
        ascending: thin_branch(&data.ascending, keep),
        descending: thin_branch(&data.descending, keep),
        units: data.units.clone(),
    }
}

/// Fixed quantities of the search objective, taken from the data.
struct Target<'a> {
    data: &'a BranchData,
    /// Largest |y|, the residual scale.
    scale: f64,
    xlo: f64,
    xhi: f64,
    /// Allowed overshoot of the model x extent. Exact data sample the tips
    /// no further than a second-order term in the step.
    slack: f64,
}

impl<'a> Target<'a> {
    fn new(data: &'a BranchData) -> Target<'a> {
        let (xlo, xhi) = data
            .all()
            .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
        let mut steps: Vec<f64> = data
            .ascending
            .windows(2)
            .chain(data.descending.windows(2))
            .map(|w| w[0].distance(w[1]))
            .collect();
        steps.sort_by(|a, b| a.total_cmp(b));
        let step = steps.get(steps.len() / 2).copied().unwrap_or(0.0);
        let range = (xhi - xlo).max(f64::MIN_POSITIVE);
        Target {
            data,
            scale: data.all().map(|p| p.y.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE),
            xlo,
            xhi,
            slack: step * step / range + 0.02 * step,
        }
    }

    /// The metric with the fixed data scale, plus a one-sided penalty when
    /// the model reaches beyond the data in x. The metric alone only looks
    /// at data abscissae, so a larger loop through the same points would
    /// otherwise score as well. Dividing by the candidate `b_y` instead of a
    /// fixed scale would reward inflating it.
    fn objective(&self, x: &[f64], m: u32, n: u32, shifts: ShiftFreedom) -> f64 {
        let violation = (-x[0]).max(0.0) + (-x[1]).max(0.0) + (-x[2]).max(0.0);
        if violation > 0.0 || x[2] == 0.0 {
            return PENALTY * (1.0 + violation);
        }
        let Some(spec) = build_spec(x, m, n, shifts) else {
            return PENALTY;
        };
        let Ok(lp) = ShiftedLoop::new(spec) else {
            return PENALTY;
        };
        match residuals(&lp, self.data) {
            Ok((sum, mlo, mhi)) if sum.is_finite() => {
                let over = (self.xlo - mlo - self.slack).max(0.0) + (mhi - self.xhi - self.slack).max(0.0);
                let count = self.data.len() as f64;
                let range = (self.xhi - self.xlo).max(f64::MIN_POSITIVE);
                100.0 * (sum + count * self.scale * over / range) / (count * self.scale)
            }
            _ => PENALTY,
        }
    }
}

struct Simplex {
    x: Vec<f64>,
    f: f64,
    converged: bool,
}

/// Nelder–Mead minimisation from `x0` with initial steps `step`.
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: &F, x0: &[f64], step: &[f64], max_evals: usize, ftol: f64) -> Simplex {
    let d = x0.len();
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut p = x0.to_vec();
        p[i] += step[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = d + 1;
    let mut converged = false;
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=d).collect();
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (vals[d] - vals[0]).abs() <= ftol && size < 1e-9 {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..d).map(|k| pts[..d].iter().map(|p| p[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (pts[d][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
        } else if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
        } else {
            let (xc, fc) = if fr < vals[d] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < vals[d].min(fr) {
                pts[d] = xc;
                vals[d] = fc;
            } else {
                for i in 1..=d {
                    pts[i] = (0..d).map(|k| pts[0][k] + 0.5 * (pts[i][k] - pts[0][k])).collect();
                    vals[i] = f(&pts[i]);
                }
                evals += d;
            }
        }
    }
    let ibest = (0..=d).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
    Simplex {
        x: pts[ibest].clone(),
        f: vals[ibest],
        converged,
    }
}

/// Search box for the Latin-hypercube starts, from simple data features.
fn start_box(data: &BranchData, dims: usize) -> Vec<(f64, f64)> {
    let pts: Vec<Point> = data.all().copied().collect();
    let xmax = pts.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    let ymax = pts.iter().map(|p| p.y.abs()).fold(0.0, f64::max);
    let mut b = vec![(0.0, 0.6 * xmax), (0.5 * xmax, 1.5 * xmax), (0.7 * ymax, 1.3 * ymax)];
    if dims == 5 {
        b.push((-0.6, 0.6));
        b.push((-0.6, 0.6));
    }
    b
}

fn latin_hypercube(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)], count: usize) -> Vec<Vec<f64>> {
    let d = bounds.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for &(lo, hi) in bounds {
        let mut strata: Vec<usize> = (0..count).collect();
        // Fisher–Yates with the seeded stream
        for i in (1..count).rev() {
            let j = rng.gen_range(0..=i);
            strata.swap(i, j);
        }
        cols.push(
            strata
                .into_iter()
                .map(|s| lo + (hi - lo) * (s as f64 + rng.gen::<f64>()) / count as f64)
                .collect(),
        );
    }
    (0..count).map(|i| (0..d).map(|k| cols[k][i]).collect()).collect()
}

fn cell_seed(seed: u64, m: u32, n: u32, shifts: ShiftFreedom) -> u64 {
    let tag = match shifts {
        ShiftFreedom::None => 1u64,
        ShiftFreedom::SplitSaturation => 2,
        ShiftFreedom::SplitOutput => 3,
    };
    seed ^ (u64::from(m) << 40) ^ (u64::from(n) << 24) ^ (tag << 8) ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone)]
struct CellResult {
    m: u32,
    n: u32,
    x: Vec<f64>,
    f: f64,
    /// Reported metric, normalised by the candidate's `b_y`.
    delta: f64,
    restarts: usize,
    converged: bool,
}

/// Objective values closer than this count as ties.
const TIE_TOLERANCE: f64 = 1e-9;

/// Orders cells by objective; near-ties go to the smaller total shift (the
/// simpler loop, since shifted families of different exponents can
/// coincide), then lexicographically on exponents and parameters.
fn lexicographic(a: &CellResult, b: &CellResult) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    if (a.f - b.f).abs() > TIE_TOLERANCE * (1.0 + a.f.abs().min(b.f.abs())) {
        return a.f.total_cmp(&b.f);
    }
    let shift = |c: &CellResult| c.x.iter().skip(3).map(|v| v.abs()).sum::<f64>();
    let (sa, sb) = (shift(a), shift(b));
    let by_shift = if (sa - sb).abs() > 1e-6 { sa.total_cmp(&sb) } else { Ordering::Equal };
    by_shift.then(a.m.cmp(&b.m)).then(a.n.cmp(&b.n)).then_with(|| {
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

fn fit_cell(data: &BranchData, m: u32, n: u32, opts: &FitOptions, warm: Option<&[f64]>) -> CellResult {
    let dims = if opts.shifts == ShiftFreedom::None { 3 } else { 5 };
    let target = Target::new(data);
    let f = |x: &[f64]| target.objective(x, m, n, opts.shifts);
    let bounds = start_box(data, dims);
    let step: Vec<f64> = bounds.iter().map(|(lo, hi)| 0.1 * (hi - lo).max(1e-3)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(opts.seed, m, n, opts.shifts));
    let mut starts = latin_hypercube(&mut rng, &bounds, opts.restarts);
    if let Some(w) = warm {
        let mut x = w.to_vec();
        x.resize(dims, 0.0);
        starts.insert(0, x);
    }
    let mut best: Option<Simplex> = None;
    for s in &starts {
        let r = nelder_mead(&f, s, &step, opts.restart_evals, 0.0);
        if best.as_ref().map_or(true, |b| r.f < b.f) {
            best = Some(r);
        }
    }
    let coarse = best.expect("at least one start");
    // polish with shrinking restarts around the best point
    let mut x = coarse.x;
    let mut fx = coarse.f;
    let mut converged = false;
    let mut scale = 0.05;
    for _ in 0..4 {
        let st: Vec<f64> = step.iter().map(|s| s * scale).collect();
        let r = nelder_mead(&f, &x, &st, opts.polish_evals, 1e-14);
        if r.f <= fx {
            x = r.x;
            fx = r.f;
        }
        converged = r.converged;
        scale *= 0.1;
    }
    CellResult {
        m,
        n,
        x,
        f: fx,
        delta: f64::INFINITY,
        restarts: starts.len(),
        converged,
    }
}

fn run_grid(data: &BranchData, opts: &FitOptions, warm: &[Option<Vec<f64>>]) -> Vec<CellResult> {
    opts.grid
        .par_iter()
        .zip(warm.par_iter())
        .map(|(&(m, n), w)| fit_cell(data, m, n, opts, w.as_deref()))
        .collect()
}

fn finish(data: &BranchData, cells: &mut [CellResult], shifts: ShiftFreedom) {
    for c in cells.iter_mut() {
        c.delta = build_spec(&c.x, c.m, c.n, shifts)
            .and_then(|s| error_metric_spec(&s, data).ok())
            .unwrap_or(f64::INFINITY);
    }
}

fn best_of(cells: &[CellResult], shifts: ShiftFreedom) -> Result<FitResult> {
    let best = cells.iter().min_by(|a, b| lexicographic(a, b)).expect("non-empty grid");
    let spec = build_spec(&best.x, best.m, best.n, shifts)
        .filter(|_| best.delta.is_finite())
        .ok_or_else(|| Error::Domain("no start produced a valid loop".into()))?;
    Ok(FitResult {
        spec,
        delta: best.delta,
        restarts_used: cells.iter().map(|c| c.restarts).sum(),
        converged: best.converged,
    })
}

fn check_options(opts: &FitOptions) -> Result<()> {
    if opts.grid.is_empty() {
        return Err(Error::param("grid", "at least one (m, n) pair is required"));
    }
    if opts.restarts == 0 {
        return Err(Error::param("restarts", "must be positive"));
    }
    if opts.max_points < 2 * MIN_BRANCH_POINTS {
        return Err(Error::param("max_points", format!("must be at least {}", 2 * MIN_BRANCH_POINTS)));
    }
    for &(m, n) in &opts.grid {
        LoopSpec::new(0.1, 1.0, 1.0, m, n)?;
    }
    Ok(())
}

/// Fits the original model (zero shifts) and the improved model (shifts
/// free per `opts.shifts`) on the same data. Every improved cell is also
/// started from the original optimum of that cell and falls back to it if
/// the search ends worse, so the improved `delta` never exceeds the
/// original one.
pub fn fit_nested(data: &BranchData, opts: &FitOptions) -> Result<(FitResult, FitResult)> {
    check_options(opts)?;
    let full = data;
    let search = thin(data, opts.max_points);
    let data = &search;
    let none: Vec<Option<Vec<f64>>> = vec![None; opts.grid.len()];
    let base_opts = FitOptions {
        shifts: ShiftFreedom::None,
        ..opts.clone()
    };
    let mut base = run_grid(data, &base_opts, &none);
    finish(full, &mut base, ShiftFreedom::None);
    let original = best_of(&base, ShiftFreedom::None)?;
    if opts.shifts == ShiftFreedom::None {
        return Ok((original.clone(), original));
    }
    let warm: Vec<Option<Vec<f64>>> = base.iter().map(|c| Some(c.x.clone())).collect();
    let mut improved = run_grid(data, opts, &warm);
    finish(full, &mut improved, opts.shifts);
    for (imp, orig) in improved.iter_mut().zip(&base) {
        if orig.f < imp.f {
            let mut x = orig.x.clone();
            x.resize(5, 0.0);
            imp.x = x;
            imp.f = orig.f;
            imp.delta = orig.delta;
            imp.converged = orig.converged;
        }
    }
    let mut improved = best_of(&improved, opts.shifts)?;
    // the search minimises a fixed-scale residual; the reported value is
    // normalised by the fitted b_y, so re-check nesting on it
    if original.delta < improved.delta {
        let restarts_used = improved.restarts_used;
        improved = FitResult {
            restarts_used,
            ..original.clone()
        };
    }
    Ok((original, improved))
}

/// Best loop over the `(m, n)` grid under `opts.shifts`.
pub fn fit_loop(data: &BranchData, opts: &FitOptions) -> Result<FitResult> {
    fit_nested(data, opts).map(|(_, improved)| improved)
}

/// Samples `count` points of a loop as one cycle, for synthetic data.
pub fn sample_cycle<L: ParametricLoop + ?Sized>(lp: &L, count: usize) -> Vec<Point> {
    let t = lp.period();
    (0..count).map(|i| lp.point(i as f64 * t / count as f64)).collect()
}

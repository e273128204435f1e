//! Acceptance suite. Each criterion runs in order inside one test so the
//! timed ones see an idle machine, and prints a single PASS/FAIL line.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use hysteresis_core::area::{
    area_closed_shifted, area_numeric, area_play_gain, area_rotated_classical, area_skew_classical, area_unshifted,
    power_area_factor, AreaMethod,
};
use hysteresis_core::cli::Preset;
use hysteresis_core::compound::{
    pinch_power, pinch_power_numeric, whisker_curvature, DoubleLoop, PinchPower, TripleLoop,
};
use hysteresis_core::fit::{fit_loop, fit_nested, ingest_branches, sample_cycle, FitOptions};
use hysteresis_core::geometry::continuity_ratio;
use hysteresis_core::piecewise::{
    eval_play, eval_relay, play_d, HybridLoop, HybridSpec, PlayLoop, PlaySpec, PlayThreshold,
    TrapezoidLoop,
};
use hysteresis_core::smooth::{
    corrected_params, eval_basic, eval_shifted, tilt_shift_for_angle, Combination, HarmonicLoop, LoopSpec,
    RotatedLoop, ShiftedLoop, SkewedLoop, Term,
};
use hysteresis_core::waveforms::{tri_c, tri_s, trp_s, Period, PulseShape};
use hysteresis_core::{Curve, ParametricLoop, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn deg(d: f64) -> f64 {
    d.to_radians()
}

fn within(limit: Duration, started: Instant, what: &str) -> Result<(), String> {
    let took = started.elapsed();
    check(took < limit, || format!("{what} took {took:.2?}, limit {limit:?}"))
}

fn model_equivalence() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for m in [1, 3, 5, 7] {
        for n in [1, 3, 5, 7] {
            let spec = LoopSpec::new(0.3, 0.9, 1.2, m, n).map_err(|e| e.to_string())?;
            let lp = HarmonicLoop::new(&spec).map_err(|e| e.to_string())?;
            for i in 0..1024 {
                let a = i as f64 * TAU / 1024.0;
                worst = worst.max((lp.point(a) - eval_basic(&spec, a)).norm());
            }
        }
    }
    within(Duration::from_secs(1), started, "equivalence sweep")?;
    check(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e} in {:.0?}", started.elapsed()))
}

fn anchor_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut accepted, mut worst) = (0, 0.0f64);
    while accepted < 1000 {
        let m = [1, 3, 5, 7][rng.gen_range(0..4)];
        let n = rng.gen_range(1..=6);
        let a = rng.gen_range(0.0..1.5);
        let bx = rng.gen_range(0.1..2.0);
        let by = rng.gen_range(0.1..2.0);
        let d: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let Ok(spec) = LoopSpec::new(a, bx, by, m, n).and_then(|s| s.with_shifts(d[0], d[1], d[2])) else {
            continue;
        };
        // a singular anchor system makes the spec invalid, not a failure
        if corrected_params(&spec).is_err() {
            continue;
        }
        accepted += 1;
        let p = eval_shifted(&spec, -d[2]).map_err(|e| e.to_string())?;
        let q = eval_shifted(&spec, FRAC_PI_2 - d[2]).map_err(|e| e.to_string())?;
        let err = (p - Point::new(a, 0.0)).norm().max((q - Point::new(bx, by)).norm());
        check(err <= 1e-9, || format!("{spec:?}: anchor error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("1000 specs, worst anchor error {worst:.1e}"))
}

fn degeneration() -> Outcome {
    let mut worst: f64 = 0.0;
    for (m, n) in [(1, 1), (1, 2), (3, 3), (5, 2), (7, 5)] {
        for d in [-1.2, -0.4, 0.25, 0.9, 2.5] {
            let base = LoopSpec::new(0.25, 0.8, 1.1, m, n).map_err(|e| e.to_string())?;
            let spec = base.with_shifts(d, d, d).map_err(|e| e.to_string())?;
            let c = corrected_params(&spec).map_err(|e| e.to_string())?;
            check(c.a == base.a && c.bx == base.bx, || format!("m={m} n={n} d={d}: corrected {c:?}"))?;
            let shifted = ShiftedLoop::new(spec).map_err(|e| e.to_string())?;
            // the shifted curve is the basic one re-parameterised by d
            for i in 0..2048 {
                let a = i as f64 * TAU / 2048.0;
                worst = worst.max((shifted.point(a) - eval_basic(&base, a + d)).norm());
            }
            // and every basic point lies on the shifted curve
            for i in 0..2048 {
                let b = i as f64 * TAU / 2048.0;
                worst = worst.max((eval_basic(&base, b) - shifted.point(b - d)).norm());
            }
        }
    }
    check(worst <= 1e-9, || format!("point-set distance {worst:e}"))?;
    Ok(format!("corrected parameters exact, point-set distance {worst:.1e}"))
}

fn tilt() -> Outcome {
    let mut worst: f64 = 0.0;
    for (m, n) in [(3, 3), (1, 3), (5, 2), (3, 5)] {
        for t in [-30.0, -15.0, -5.0, 5.0, 15.0, 30.0] {
            let theta = deg(t);
            let spec = LoopSpec::new(0.2, 1.0, 1.0, m, n).map_err(|e| e.to_string())?;
            let d1 = tilt_shift_for_angle(&spec, theta).map_err(|e| e.to_string())?;
            let lp = ShiftedLoop::new(spec.with_shifts(d1, 0.0, 0.0).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let h = 1e-6;
            let d = lp.point(h) - lp.point(-h);
            let angle = d.y.atan2(d.x);
            let err = (angle - (FRAC_PI_2 - theta)).abs();
            check(err <= 1e-4, || format!("m={m} n={n} θ={t}°: tangent {angle} rad"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("worst tangent error {worst:.1e} rad"))
}

struct AreaTally {
    cells: usize,
    worst: f64,
}

impl AreaTally {
    fn cell(&mut self, what: &str, closed: f64, numeric: f64) -> Result<(), String> {
        let rel = (closed - numeric).abs() / closed.abs().max(1e-300);
        self.cells += 1;
        self.worst = self.worst.max(rel);
        check(rel <= 1e-6, || format!("{what}: closed {closed} vs numeric {numeric}"))
    }
}

fn numeric<L: ParametricLoop + ?Sized>(lp: &L) -> Result<f64, String> {
    area_numeric(lp).map(|r| r.value).map_err(|e| e.to_string())
}

fn shifted_area(spec: &LoopSpec) -> Result<f64, String> {
    numeric(&ShiftedLoop::new(*spec).map_err(|e| e.to_string())?)
}

fn area_oracle() -> Outcome {
    let started = Instant::now();
    let e = |e: hysteresis_core::Error| e.to_string();
    let mut t = AreaTally { cells: 0, worst: 0.0 };
    // general shifted closed form
    for a in [0.1, 0.25, 0.4] {
        for m in [1, 3, 5, 7] {
            for n in [1, 2, 3, 4, 5] {
                for s in [(0.0, 0.0, 0.0), (-0.3, 0.0, 0.0), (0.2, -0.15, 0.1), (0.35, 0.25, -0.2)] {
                    let spec = LoopSpec::new(a, 1.0, 1.3, m, n).and_then(|x| x.with_shifts(s.0, s.1, s.2)).map_err(e)?;
                    let what = format!("general a={a} m={m} n={n} {s:?}");
                    t.cell(&what, area_closed_shifted(&spec).map_err(e)?, shifted_area(&spec)?)?;
                }
            }
        }
    }
    // m = 1 with equal saturation and output shifts: π·a·b_y
    for n in [1, 2, 3] {
        for d1 in [0.3, -0.5] {
            for d in [0.0, 0.2] {
                let spec = LoopSpec::new(0.3, 0.9, 1.1, 1, n).and_then(|x| x.with_shifts(d1, d, d)).map_err(e)?;
                t.cell(&format!("leaf n={n} d1={d1} d={d}"), PI * 0.3 * 1.1, shifted_area(&spec)?)?;
            }
        }
    }
    // m > 1 with equal saturation and output shifts
    for m in [3, 5] {
        for d1 in [-0.4, 0.15, 0.5] {
            for d in [0.0, -0.2] {
                let spec = LoopSpec::new(0.3, 0.9, 1.1, m, 3).and_then(|x| x.with_shifts(d1, d, d)).map_err(e)?;
                let closed = power_area_factor(m) / (d1 - d).cos().powi(m as i32 - 1) * PI * 0.3 * 1.1;
                t.cell(&format!("tilted m={m} d1={d1} d={d}"), closed, shifted_area(&spec)?)?;
            }
        }
    }
    // unshifted: independent of b_x and n
    for m in [1, 3, 5, 7] {
        for bx in [0.5, 1.0, 2.0] {
            for n in [1, 3] {
                let spec = LoopSpec::new(0.2, bx, 1.0, m, n).map_err(e)?;
                t.cell(&format!("unshifted m={m} bx={bx} n={n}"), area_unshifted(0.2, 1.0, m), shifted_area(&spec)?)?;
            }
        }
    }
    // skew-tilted, skew-curved classical
    let classical = LoopSpec::classical(0.2, 1.0, 1.0).map_err(e)?;
    for th in [-15.0, 0.0, 15.0, 30.0] {
        for k in [0.0, 5.0, 10.0] {
            let r = area_skew_classical(&classical, deg(th), deg(k)).map_err(e)?;
            check(r.method == AreaMethod::ClosedForm, || "skew area is not closed form".into())?;
            let lp = SkewedLoop::new(classical, deg(th), deg(k)).map_err(e)?;
            t.cell(&format!("skew θ={th} κ={k}"), r.value, numeric(&lp)?)?;
        }
    }
    // rotation-tilted classical
    for th in [-30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0] {
        let r = area_rotated_classical(&classical, deg(th)).map_err(e)?;
        check(r.method == AreaMethod::ClosedForm, || "rotated area is not closed form".into())?;
        t.cell(&format!("rotated θ={th}"), r.value, numeric(&RotatedLoop::new(classical, deg(th)).map_err(e)?)?)?;
    }
    // Play with Gain, and its gainless parallelogram
    for a in [0.2, 0.4] {
        for beta in [60.0, 77.0, 90.0] {
            for gamma in [-10.0, 0.0, 17.0] {
                let spec = PlaySpec::new(a, 1.0, 1.0, deg(beta), deg(gamma)).map_err(e)?;
                let closed = area_play_gain(&spec).map_err(e)?;
                t.cell(&format!("play a={a} β={beta} γ={gamma}"), closed, numeric(&PlayLoop::new(spec).map_err(e)?)?)?;
                if gamma == 0.0 {
                    t.cell(&format!("parallelogram a={a} β={beta}"), 4.0 * a * 1.0, closed)?;
                }
            }
        }
    }
    for n in [1, 3, 5] {
        let trp = TrapezoidLoop::new(LoopSpec::new(0.3, 1.0, 1.2, 1, n).map_err(e)?).map_err(e)?;
        t.cell(&format!("trapezoid n={n}"), 4.0 * 0.3 * 1.2, numeric(&trp)?)?;
        for (th, k) in [(0.0, 0.0), (10.0, 5.0), (-8.0, 12.0)] {
            let hs = HybridSpec::new(0.3, 1.0, 1.2, n.max(3)).and_then(|h| h.with_angles(deg(th), 0.0, deg(k))).map_err(e)?;
            t.cell(&format!("hybrid n={n} θ={th} κ={k}"), 4.0 * 0.3 * 1.2, numeric(&HybridLoop::new(hs).map_err(e)?)?)?;
        }
    }
    check(t.cells >= 200, || format!("only {} cells", t.cells))?;

    // qualitative claims
    for m in [3, 5] {
        let s = |d1: f64| shifted_area(&LoopSpec::new(0.2, 1.0, 1.0, m, 3).and_then(|x| x.with_shifts(d1, 0.0, 0.0)).map_err(e)?);
        let (up, plus, minus) = (s(0.0)?, s(0.4)?, s(-0.4)?);
        check((plus - minus).abs() <= 1e-9 * up, || format!("m={m}: ±Δ areas {plus} vs {minus}"))?;
        check(plus > up, || format!("m={m}: tilted area {plus} not above upright {up}"))?;
    }
    let by_bx: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&bx| shifted_area(&LoopSpec::classical(0.2, bx, 1.0).map_err(e)?))
        .collect::<Result<_, _>>()?;
    check(by_bx.iter().all(|v| (v - by_bx[0]).abs() <= 1e-9), || format!("b_x changes area: {by_bx:?}"))?;
    let member = ShiftedLoop::new(classical.with_shifts(0.1, 0.2, 0.0).map_err(e)?).map_err(e)?;
    let base = numeric(&member)?;
    let scaled = Combination::new(vec![Term::new(member.clone(), 2.0, 1)], vec![Term::new(member, 3.0, 1)]).map_err(e)?;
    let s6 = numeric(&scaled)?;
    check((s6 - 6.0 * base).abs() <= 1e-9 * s6.abs(), || format!("scaled area {s6} vs 6·{base}"))?;
    within(Duration::from_secs(30), started, "area grid")?;
    Ok(format!("{} cells, worst relative error {:.1e}, sign checks hold, {:.1?}", t.cells, t.worst, started.elapsed()))
}

fn pulse_identities() -> Outcome {
    let t = Period::TAU;
    let quarter = PulseShape::new(TAU / 4.0, t).map_err(|e| e.to_string())?;
    let e8 = TAU / 8.0;
    let mut worst: f64 = 0.0;
    for i in 0..4096 {
        let a = -TAU + 2.0 * TAU * i as f64 / 4096.0;
        // trapezoid as a sum of two triangles, and back
        worst = worst.max((trp_s(a, &quarter) - (tri_s(a + e8, t) + tri_s(a - e8, t))).abs());
        worst = worst.max((tri_s(a, t) - 0.5 * (trp_s(a + e8, &quarter) + trp_s(a - e8, &quarter))).abs());
    }
    let mut specs = 0;
    for a in [0.1, 0.3, 0.5] {
        for beta in [55.0, 65.0, 77.0, 85.0] {
            for gamma in [-15.0, 0.0, 10.0, 20.0] {
                let Ok(spec) = PlaySpec::new(a, 1.0, 1.0, deg(beta), deg(gamma)) else { continue };
                let d = play_d(&spec).map_err(|e| e.to_string())?;
                let shape = PulseShape::new(d, t).map_err(|e| e.to_string())?;
                let phi = spec.delay();
                let norm = tri_c(phi + d / 2.0, t) + tri_c(phi - d / 2.0, t);
                for i in 0..4096 {
                    let al = i as f64 * TAU / 4096.0;
                    let sum = (tri_s(al + d / 2.0, t) + tri_s(al - d / 2.0, t)) / norm;
                    worst = worst.max((sum - trp_s(al, &shape)).abs());
                }
                specs += 1;
            }
        }
    }
    check(specs >= 30, || format!("only {specs} feasible play specs"))?;
    check(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("three identities over {specs} play specs, max error {worst:.1e}"))
}

fn near_switch(lp: &dyn ParametricLoop, al: f64) -> bool {
    let t = lp.period();
    lp.switch_phases().iter().chain(lp.breakpoints().iter()).any(|s| {
        let d = (al - s).rem_euclid(t);
        d.min(t - d) < 1e-6
    })
}

/// Half the distance between the outermost zero crossings of y. Each sign
/// change is bisected in α, so a crossing inside a jump lands on the jump.
fn split_half_width(lp: &dyn ParametricLoop) -> f64 {
    let t = lp.period();
    let n = 4096;
    let mut xs = Vec::new();
    for i in 0..n {
        let (mut lo, mut hi) = (i as f64 * t / n as f64 + 1e-7, (i + 1) as f64 * t / n as f64 + 1e-7);
        let below = lp.point(lo).y < 0.0;
        if below == (lp.point(hi).y < 0.0) {
            continue;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if (lp.point(mid).y < 0.0) == below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        xs.push(lp.point(0.5 * (lo + hi)).x);
    }
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let min = xs.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / 2.0
}

fn play_family() -> Outcome {
    let e = |e: hysteresis_core::Error| e.to_string();
    // whiskerless: the ramp through (a, 0) ends exactly at the saturation point
    let lean = |a: f64| (1.0 / (1.0 - a)).atan().to_degrees();
    // the threshold form needs a·tanβ + b_x·tanγ ≥ b_y, so each variety
    // takes a split inside that domain
    let variants = [
        ("gain", 0.4, 77.0, 17.0),
        ("gain without whiskers", 0.45, lean(0.45), 17.0),
        ("attenuation", 0.4, 77.0, -17.0),
        ("attenuation without whiskers", 0.7, lean(0.7), -17.0),
        ("play", 0.4, 77.0, 0.0),
        ("play without whiskers", 0.5, lean(0.5), 0.0),
        ("relay with gain", 0.4, 90.0, 17.0),
        ("relay with gain without whiskers", 1.0, 90.0, 17.0),
        ("relay with attenuation", 0.4, 90.0, -17.0),
        ("relay with attenuation without whiskers", 1.0, 90.0, -17.0),
        ("relay", 0.4, 90.0, 0.0),
        ("relay without whiskers", 1.0, 90.0, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for (name, a, beta, gamma) in variants {
        let beta = if beta == 90.0 { FRAC_PI_2 } else { deg(beta) };
        let spec = PlaySpec::new(a, 1.0, 1.0, beta, deg(gamma)).map_err(|x| format!("{name}: {x}"))?;
        let lp = PlayLoop::new(spec).map_err(e)?;
        let threshold = PlayThreshold::new(spec).map_err(|x| format!("{name}: {x}"))?;
        check(threshold.matches_general_form(), || format!("{name}: outside the threshold form's domain"))?;
        for i in 0..4096 {
            let al = i as f64 * TAU / 4096.0;
            if near_switch(&lp, al) {
                continue;
            }
            let p = lp.point(al);
            let mut err = (threshold.point(al) - p).norm();
            if gamma == 0.0 {
                err = err.max((eval_play(&spec, al).map_err(e)? - p).norm());
                if beta == FRAC_PI_2 {
                    err = err.max((eval_relay(&spec, al) - p).norm());
                }
            }
            check(err <= 1e-9, || format!("{name} at α={al}: forms differ by {err:e}"))?;
            worst = worst.max(err);
        }
        let c = Curve::sample(&lp, 4096).map_err(e)?;
        check(c.closed, || format!("{name}: open curve"))?;
        let w = split_half_width(&lp);
        check((w - a).abs() <= 1e-9, || format!("{name}: split half-width {w}, want {a}"))?;
        for (phase, target) in [(TAU / 4.0, Point::new(1.0, 1.0)), (3.0 * TAU / 4.0, Point::new(-1.0, -1.0))] {
            // a relay corner sits on the switch, so look just either side
            let dist = [-1e-9, 0.0, 1e-9]
                .iter()
                .map(|h| (lp.point(phase + h) - target).norm())
                .fold(f64::INFINITY, f64::min);
            check(dist <= 1e-8, || format!("{name}: misses anchor {target:?} by {dist:e}"))?;
        }
    }
    Ok(format!("12 varieties closed and anchored, forms agree to {worst:.1e}"))
}

fn compound() -> Outcome {
    let e = |e: hysteresis_core::Error| e.to_string();
    let mut loops: Vec<(String, Arc<dyn ParametricLoop>)> = Vec::new();
    let classical: Arc<dyn ParametricLoop> = Arc::new(ShiftedLoop::new(LoopSpec::classical(0.2, 1.0, 1.0).map_err(e)?).map_err(e)?);
    let play: Arc<dyn ParametricLoop> = Arc::new(
        PlayLoop::new(PlaySpec::new(0.4, 1.0, 1.0, deg(77.0), deg(17.0)).map_err(e)?).map_err(e)?,
    );
    let leaning: Arc<dyn ParametricLoop> = Arc::new(
        ShiftedLoop::new(LoopSpec::classical(0.2, 1.0, 1.0).and_then(|s| s.with_shifts(0.0, 0.3, 0.0)).map_err(e)?)
            .map_err(e)?,
    );
    for crossing in [false, true] {
        loops.push((format!("double classical crossing={crossing}"), Arc::new(DoubleLoop::at_saturation(classical.clone(), crossing).map_err(e)?)));
        loops.push((format!("double play crossing={crossing}"), Arc::new(DoubleLoop::at_saturation(play.clone(), crossing).map_err(e)?)));
        loops.push((format!("double x-max crossing={crossing}"), Arc::new(DoubleLoop::at_x_max(leaning.clone(), crossing).map_err(e)?)));
        let outer: Arc<dyn ParametricLoop> = Arc::new(ShiftedLoop::new(LoopSpec::classical(0.1, 0.5, 0.5).map_err(e)?).map_err(e)?);
        loops.push((format!("triple classical crossing={crossing}"), Arc::new(TripleLoop::new(classical.clone(), outer, crossing).map_err(e)?)));
        let po: Arc<dyn ParametricLoop> = Arc::new(
            PlayLoop::new(PlaySpec::new(0.2, 0.5, 0.5, deg(77.0), deg(17.0)).map_err(e)?).map_err(e)?,
        );
        loops.push((format!("triple play crossing={crossing}"), Arc::new(TripleLoop::new(play.clone(), po, crossing).map_err(e)?)));
    }
    for p in [Preset::LongWhiskerClassical, Preset::LongWhiskerHybrid] {
        loops.push((format!("{p:?}"), p.build().map_err(e)?.lp));
    }
    let mut worst: f64 = 0.0;
    for (name, lp) in &loops {
        let c = Curve::sample(lp.as_ref(), 8192).map_err(e)?;
        check(c.closed, || format!("{name}: open"))?;
        let r = continuity_ratio(lp.as_ref(), &c);
        check(r <= 1.0, || format!("{name}: continuity ratio {r}"))?;
        worst = worst.max(r);
    }
    let mut pinch_err: f64 = 0.0;
    for (n, bx, target) in [(3, 1.0, 0.1), (1, 1.0, 0.05), (3, 0.7, 0.2), (5, 1.3, 0.01)] {
        let spec = LoopSpec::new(0.0, bx, 1.0, 3, n).map_err(e)?;
        let p = PinchPower::new(3, 3, 1.0, 1.0).map_err(e)?;
        let closed = pinch_power(&spec, &p, target).map_err(e)?;
        let bisect = pinch_power_numeric(&spec, &p, target).map_err(e)?;
        pinch_err = pinch_err.max((closed.a - bisect.a).abs());
    }
    check(pinch_err <= 1e-8, || format!("pinch split differs by {pinch_err:e}"))?;
    let k1 = whisker_curvature(1.0, 1.0, 0.5, 0.7, 3, deg(15.0)).map_err(e)?.to_degrees();
    check((k1 - 1.7).abs() <= 0.05, || format!("κ₁ = {k1}°"))?;
    Ok(format!(
        "{} compound loops continuous (worst ratio {worst:.2}), pinch agreement {pinch_err:.1e}, κ₁ = {k1:.3}°",
        loops.len()
    ))
}

fn fit() -> Outcome {
    let started = Instant::now();
    let e = |e: hysteresis_core::Error| e.to_string();
    let truth = LoopSpec::classical(0.2, 1.0, 1.0).and_then(|s| s.with_shifts(-0.3, 0.0, 0.0)).map_err(e)?;
    let lp = ShiftedLoop::new(truth).map_err(e)?;
    let clean = ingest_branches(&sample_cycle(&lp, 400)).map_err(e)?;
    let opts = FitOptions { seed: 5, ..FitOptions::default() };
    let r = fit_loop(&clean, &opts).map_err(e)?;
    let s = r.spec;
    let errs = [
        (s.a - 0.2).abs(),
        (s.bx - 1.0).abs(),
        (s.by - 1.0).abs(),
        (s.shifts.split + 0.3).abs(),
        s.shifts.saturation.abs(),
        s.shifts.output.abs(),
    ];
    let perr = errs.iter().cloned().fold(0.0, f64::max);
    check((s.m, s.n) == (3, 3), || format!("recovered m={} n={}", s.m, s.n))?;
    check(perr <= 1e-3, || format!("parameter error {perr:e}: {s:?}"))?;
    check(r.delta <= 0.01, || format!("clean ⟨δ⟩ = {}%", r.delta))?;

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noisy: Vec<Point> = sample_cycle(&lp, 200)
        .into_iter()
        .map(|p| Point::new(p.x, p.y + rng.gen_range(-0.01..0.01)))
        .collect();
    let data = ingest_branches(&noisy).map_err(e)?;
    let (orig, improved) = fit_nested(&data, &opts).map_err(e)?;
    check(improved.delta <= 1.0, || format!("noisy ⟨δ⟩ = {}%", improved.delta))?;
    check(improved.delta <= orig.delta, || format!("improved {} above original {}", improved.delta, orig.delta))?;
    within(Duration::from_secs(60), started, "fit")?;
    Ok(format!(
        "clean ⟨δ⟩ {:.1e}%, parameter error {perr:.1e}; noisy ⟨δ⟩ {:.3}% vs original {:.3}%; {:.1?}",
        r.delta,
        improved.delta,
        orig.delta,
        started.elapsed()
    ))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_hysteresis")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?}: exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}

fn report_value(report: &str, key: &str) -> Result<f64, String> {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| format!("no {key} in report"))
}

fn cli() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let read = |name: &str| std::fs::read(Path::new(&path(name))).map_err(|e| e.to_string());

    run_cli(&["generate", "--type", "classical", "--d1", "-0.3", "--samples", "400", "--out", &path("data.csv")])?;
    let report = run_cli(&["fit", "--input", &path("data.csv"), "--seed", "5"])?;
    for (key, want) in [("m", 3.0), ("n", 3.0), ("a", 0.2), ("bx", 1.0), ("by", 1.0), ("d1", -0.3), ("d2", 0.0), ("d3", 0.0)] {
        let got = report_value(&report, key)?;
        check((got - want).abs() <= 1e-3, || format!("round trip {key} = {got}, want {want}"))?;
    }
    check(report_value(&report, "# delta_percent")? <= 0.01, || "round-trip ⟨δ⟩ too large".into())?;

    for i in 0..2 {
        let tag = i.to_string();
        run_cli(&["generate", "--figure", "triple_classical", "--seed", "9", "--out", &path(&format!("g{tag}.csv")), "--svg", &path(&format!("g{tag}.svg"))])?;
        run_cli(&[
            "fit", "--input", &path("data.csv"), "--m-values", "3", "--n-values", "3", "--seed", "9",
            "--out", &path(&format!("f{tag}.csv")), "--svg", &path(&format!("f{tag}.svg")),
        ])?;
    }
    for stem in ["g", "f"] {
        for ext in ["csv", "svg"] {
            let (a, b) = (read(&format!("{stem}0.{ext}"))?, read(&format!("{stem}1.{ext}"))?);
            check(!a.is_empty() && a == b, || format!("{stem}.{ext} differs between runs"))?;
        }
    }
    Ok("generate then fit recovers the loop; CSV and SVG outputs byte-identical across runs".into())
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 10] = [
        ("model equivalence", model_equivalence),
        ("anchor suite", anchor_suite),
        ("degeneration", degeneration),
        ("tilt", tilt),
        ("area oracle", area_oracle),
        ("pulse identities", pulse_identities),
        ("play family", play_family),
        ("compound continuity", compound),
        ("fit", fit),
        ("cli", cli),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

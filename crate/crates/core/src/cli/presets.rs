//! Named parameter sets for commonly used loop shapes.

use std::sync::Arc;

use clap::ValueEnum;

use crate::area::{area_closed_shifted, area_play_gain, area_skew_classical};
use crate::compound::{pinch_power, pinch_shift, whisker_curvature, DoubleLoop, PinchPower, PinchShift, TripleLoop};
use crate::curve::ParametricLoop;
use crate::error::Result;
use crate::piecewise::{HybridLoop, HybridPower, HybridSpec, PlayLoop, PlaySpec, PolylineLoop, TrapezoidLoop};
use crate::smooth::{tilt_shift_for_angle, BatAstroLoop, LoopSpec, ShiftedLoop, SkewedLoop, Waveform};
use crate::waveforms::Period;

/// A loop ready to sample, with its closed-form area when one exists.
pub struct Job {
    pub lp: Arc<dyn ParametricLoop>,
    pub closed_form: Option<f64>,
}

impl Job {
    pub fn new<L: ParametricLoop + 'static>(lp: L, closed_form: Option<f64>) -> Job {
        Job {
            lp: Arc::new(lp),
            closed_form,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Preset {
    Leaf,
    Crescent,
    Classical,
    TiltedClassical,
    Bat,
    Astro,
    SkewedClassical,
    SixLinearClassical,
    HybridClassical,
    PlayRelayPlay,
    PlayPlay,
    PlayWithGain,
    Play,
    Relay,
    DoubleClassical,
    DoublePlay,
    DoubleClassicalXmax,
    PropellerPower,
    PropellerShift,
    FoldoverClassical,
    TripleClassical,
    TriplePlay,
    LongWhiskerClassical,
    LongWhiskerHybrid,
}

fn deg(d: f64) -> f64 {
    d.to_radians()
}

fn smooth(spec: LoopSpec) -> Result<Job> {
    Ok(Job::new(ShiftedLoop::new(spec)?, Some(area_closed_shifted(&spec)?)))
}

fn play(a: f64, bx: f64, by: f64, beta: f64, gamma: f64) -> Result<Job> {
    let spec = PlaySpec::new(a, bx, by, beta, gamma)?;
    Ok(Job::new(PlayLoop::new(spec)?, Some(area_play_gain(&spec)?)))
}

fn classical() -> Result<LoopSpec> {
    LoopSpec::classical(0.2, 1.0, 1.0)
}

impl Preset {
    /// Looks a preset up by its command-line name.
    pub fn from_name(name: &str) -> Option<Preset> {
        <Preset as ValueEnum>::from_str(name, false).ok()
    }

    pub fn build(self) -> Result<Job> {
        match self {
            Preset::Leaf => smooth(LoopSpec::leaf(0.2, 1.0, 1.0)?),
            Preset::Crescent => smooth(LoopSpec::new(0.2, 1.0, 1.0, 1, 2)?),
            Preset::Classical => smooth(classical()?),
            Preset::TiltedClassical => {
                let spec = classical()?;
                let d1 = tilt_shift_for_angle(&spec, deg(15.0))?;
                smooth(spec.with_shifts(d1, 0.0, 0.0)?)
            }
            Preset::Bat => Ok(Job::new(BatAstroLoop::new(classical()?, 2)?, None)),
            Preset::Astro => Ok(Job::new(BatAstroLoop::new(classical()?, 3)?, None)),
            Preset::SkewedClassical => {
                let spec = classical()?;
                let area = area_skew_classical(&spec, deg(15.0), deg(7.0))?.value;
                Ok(Job::new(SkewedLoop::new(spec, deg(15.0), deg(7.0))?, Some(area)))
            }
            Preset::SixLinearClassical => {
                Ok(Job::new(PolylineLoop::new(&ShiftedLoop::new(classical()?)?, 12)?, None))
            }
            Preset::HybridClassical => Ok(Job::new(TrapezoidLoop::new(LoopSpec::new(0.2, 1.0, 1.0, 1, 3)?)?, None)),
            Preset::PlayRelayPlay => Ok(Job::new(
                TrapezoidLoop::new(LoopSpec::leaf(0.2, 1.0, 1.0)?.with_shifts(0.4, 0.0, 0.0)?)?,
                None,
            )),
            Preset::PlayPlay => Ok(Job::new(
                TrapezoidLoop::new(LoopSpec::leaf(0.2, 1.0, 1.0)?.with_shifts(0.4, 0.4, 0.0)?)?,
                None,
            )),
            Preset::PlayWithGain => play(0.4, 1.0, 1.0, deg(77.0), deg(17.0)),
            Preset::Play => play(0.4, 1.0, 1.0, deg(77.0), 0.0),
            Preset::Relay => play(0.4, 1.0, 1.0, std::f64::consts::FRAC_PI_2, 0.0),
            Preset::DoubleClassical => {
                let member = Arc::new(ShiftedLoop::new(classical()?)?);
                Ok(Job::new(DoubleLoop::at_saturation(member, false)?, None))
            }
            Preset::DoublePlay => {
                let spec = PlaySpec::new(0.4, 1.0, 1.0, deg(77.0), deg(17.0))?;
                let member = Arc::new(PlayLoop::new(spec)?);
                Ok(Job::new(DoubleLoop::at_saturation(member, false)?, None))
            }
            Preset::DoubleClassicalXmax => {
                let spec = classical()?.with_shifts(0.0, 0.3, 0.0)?;
                let member = Arc::new(ShiftedLoop::new(spec)?);
                Ok(Job::new(DoubleLoop::at_x_max(member, false)?, None))
            }
            Preset::PropellerPower => {
                let pinch = PinchPower::new(3, 3, 1.0, 1.0)?;
                let sol = pinch_power(&LoopSpec::classical(0.0, 1.0, 1.0)?, &pinch, 0.1)?;
                Ok(Job::new(pinch.build(&LoopSpec::classical(sol.a, 1.0, 1.0)?)?, None))
            }
            Preset::PropellerShift => {
                let base = LoopSpec::classical(0.0, 1.0, 1.0)?;
                let d = pinch_shift(&base, PinchShift::Saturation, 0.1)?;
                smooth(base.with_shifts(0.0, d, 0.0)?)
            }
            Preset::FoldoverClassical => smooth(classical()?.with_shifts(0.0, -0.6, 0.0)?),
            Preset::TripleClassical => {
                let central = Arc::new(ShiftedLoop::new(classical()?)?);
                // outer saturation chosen so both tangents meet at the link
                let outer = Arc::new(ShiftedLoop::new(LoopSpec::classical(0.1, 0.5, 0.5)?)?);
                Ok(Job::new(TripleLoop::new(central, outer, false)?, None))
            }
            Preset::TriplePlay => {
                let c = PlaySpec::new(0.4, 1.0, 1.0, deg(77.0), deg(17.0))?;
                let o = PlaySpec::new(0.2, 0.5, 0.5, deg(77.0), deg(17.0))?;
                Ok(Job::new(
                    TripleLoop::new(Arc::new(PlayLoop::new(c)?), Arc::new(PlayLoop::new(o)?), false)?,
                    None,
                ))
            }
            Preset::LongWhiskerClassical => {
                let tilt = deg(15.0);
                let k1 = whisker_curvature(1.0, 1.0, 0.5, 0.7, 3, tilt)?;
                let central = SkewedLoop::new(LoopSpec::classical(0.2, 0.5, 0.7)?, tilt, k1)?;
                let outer = ShiftedLoop::new(LoopSpec::new(0.0, 0.25, 0.15, 3, 1)?)?;
                Ok(Job::new(TripleLoop::new(Arc::new(central), Arc::new(outer), false)?, None))
            }
            Preset::LongWhiskerHybrid => {
                let b2y = 0.3 * deg(10.0).tan();
                let hs = HybridSpec::new(0.2, 0.4, 1.0 - 2.0 * b2y, 5)?
                    .with_power(HybridPower::Even(2))?
                    .with_angles(deg(5.0), deg(10.0), deg(5.0))?;
                let outer =
                    ShiftedLoop::new(LoopSpec::leaf(0.0, 0.3, b2y)?.with_waveform(Waveform::Triangle(Period::TAU)))?;
                Ok(Job::new(
                    TripleLoop::new(Arc::new(HybridLoop::new(hs)?), Arc::new(outer), false)?,
                    None,
                ))
            }
        }
    }
}

//! Parametric hysteresis loops: smooth and piecewise-linear generators,
//! compound assemblies, enclosed areas and fitting to measured data.

pub mod area;
pub mod cli;
pub mod compound;
pub mod curve;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod piecewise;
pub mod roots;
pub mod smooth;
pub mod waveforms;

pub use curve::{Curve, ParametricLoop, Point};
pub use error::{Error, Result};

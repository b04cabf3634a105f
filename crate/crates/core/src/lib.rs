//! Simulation of radar sensing through a reconfigurable intelligent surface (RIS).
//!
//! The crate synthesizes per-element phase profiles for a linear RIS (plain
//! metal reflector, ideal analog one-beam steering, and 1-bit dual-beam
//! steering), evaluates the 2-D far-field scattered pattern, extracts lobes and
//! forward/reverse radar cross-sections, and simulates the micro-Doppler
//! spectrogram of rotating targets observed through the RIS bounce path.
//!
//! All numerics are generic over a [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the CLI uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod emfield;
mod error;
pub mod io;
pub mod phasing;
pub mod scene;
pub mod specgram;

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive};

pub use error::{Error, Result};

/// Floating point type the simulator can run on: `f32` or `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + Sum
    + FromStr
    + Display
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Complex number over the simulator scalar.
pub type Complex<T> = num_complex::Complex<T>;

pub type Point = scene::Point2<f64>;
pub type Carrier = scene::CarrierConfig<f64>;
pub type Geometry = scene::RisGeometry<f64>;
pub type Wave = scene::PlaneWave<f64>;
pub type Radar = scene::RadarNode<f64>;
pub type Scenario = scene::ScenarioConfig<f64>;
pub type Target = dynamics::TargetTrajectory<f64>;
pub type Command = phasing::SteeringCommand<f64>;
pub type Profile = phasing::PhaseProfile<f64>;
pub type Pattern = emfield::FarFieldPattern<f64>;
pub type Lobe = analysis::Lobe<f64>;
pub type RcsEntry = analysis::RcsEntry<f64>;
pub type SweepRow = analysis::SweepRow<f64>;
pub type SlowTime = dynamics::SlowTimeSignal<f64>;
pub type Window = specgram::WindowSpec<f64>;
pub type Spectrogram = specgram::Spectrogram<f64>;

pub type Scenario32 = scene::ScenarioConfig<f32>;
pub type Profile32 = phasing::PhaseProfile<f32>;
pub type Pattern32 = emfield::FarFieldPattern<f32>;
pub type Spectrogram32 = specgram::Spectrogram<f32>;

//! Delay-and-sum beamforming on uniform linear and circular microphone arrays.
//!
//! - [`geometry`]: array shapes and per-microphone delays
//! - [`beampattern`]: analytic transfer function, grids, polar slices, lobes
//! - [`simulator`]: time-domain capture and beamforming with fractional delays
//! - [`analysis`]: spectral attenuation between source and output
//! - [`cli`]: the `beamsim` commands

pub mod analysis;
pub mod beampattern;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod geometry;
pub mod signal;
pub mod simulator;
pub mod wav;

pub use error::{Error, Result};
pub use geometry::{ArrayGeometry, ArrayKind, DelayVector, Medium};
pub use signal::MonoSignal;

//! Photon-level simulation and Fisher-information analysis of beam-deflection
//! measurements with a Sagnac weak-value interferometer and with a focusing
//! lens.
//!
//! The closed-form layers ([`optics`], [`inference::analytic`]) are generic
//! over [`Real`] (f32 or f64). Monte Carlo, detector readout, spectra and the
//! scenario engine run in f64; the aliases below name the f64 instances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod detector;
pub mod error;
pub mod inference;
pub mod optics;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod scenario;
pub mod timeseries;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Beam = optics::BeamParams<f64>;
pub type Wv = optics::WvConfig<f64>;
pub type St = optics::StConfig<f64>;
pub type Kick = optics::SignalKick<f64>;
pub type Technique = optics::Technique<f64>;
pub type ShiftTable = optics::ShiftTable<f64>;

/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

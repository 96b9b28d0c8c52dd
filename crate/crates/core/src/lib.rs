//! Simulation of probabilistic constellation shaping (PCS) for PAM signals on
//! intensity-modulation links under average- and peak-power constraints.
//!
//! The crate is organised bottom-up:
//!
//! * [`source`]: PAM alphabets, shaping distributions and the symbol sampler.
//! * [`dsp`]: RC/RRC pulse shaping, pre-emphasis and waveform synthesis.
//! * [`metrics`]: PAPR/CCDF, dB identities, AIR and the NGMI estimator.
//! * [`channel`]: constraint-aware scaling and the AWGN path.
//! * [`experiments`]: sweeps, thresholds, rate adaptation and scenarios.
//! * [`cli`]: configuration, subcommands and file emission.

pub mod channel;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod rng;
pub mod source;

pub use error::{Error, Result};

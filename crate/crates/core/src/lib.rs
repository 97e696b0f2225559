//! Strong-coupling cavity QED on a desk: a three-level atom coupled to one
//! truncated cavity mode.
//!
//! * [`hilbert`]: joint state vectors, coherent fields, projective measurement
//! * [`dynamics`]: resonant Jaynes-Cummings evolution and the transmission spectrum
//! * [`pulses`]: Ramsey zones, cavity pulses, dispersive shifts and the phase gate
//! * [`decoherence`]: thermal photon jumps and QND probing
//! * [`experiments`]: the canonical experiments as reproducible tables
//! * [`config`], [`output`]: flat key-value configuration, CSV and run manifests

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod decoherence;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod hilbert;
pub mod linalg;
pub mod output;
pub mod pulses;
pub mod rng;
pub mod validation;

pub use error::{CqedError, Result};
pub use grid::Grid;
pub use hilbert::{AtomLevel, CoherentField, FieldState, JointState, Ket};
pub use rng::RngStream;

/// Crate version, echoed into result metadata and run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Precision limits for frequency estimation with qubit probes under independent,
//! identical, phase-covariant noise.
//!
//! The crate covers channel representations ([`qubit_channel`]), conversion between map
//! trajectories and master-equation rates ([`lindblad_bridge`]), channel-extension QFI bounds
//! ([`ce_bounds`], [`kraus_opt`]), the GHZ strategy ([`ghz_strategy`]), a brute-force
//! density-matrix oracle ([`exact_oracle`]) and concrete noise models ([`models`]).
// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ce_bounds;
pub mod error;
pub mod exact_oracle;
pub mod ghz_strategy;
pub mod kraus_opt;
pub mod linalg;
pub mod models;
pub mod lindblad_bridge;
pub mod optim;
pub mod quad;
pub mod qubit_channel;

pub use error::{Error, Result};
pub use qubit_channel::{BlochVector, ChoiMatrix, KrausSet, PhaseCovariantMap, ValidationReport};

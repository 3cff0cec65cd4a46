//! Analysis toolkit for bilayer anytime spatially coupled LDPC codes used over
//! a decode-and-forward relay network with erasure links.
//!
//! The crate is split the same way the analysis is:
//!
//! - [`code_model`]: code and channel parameters, the geometric coupling
//!   profile and the exponents derived from them.
//! - [`config`]: the flat `key=value` configuration format.
//! - [`de_engine`]: density evolution on the semi-infinite position lattice.
//! - [`exponent`]: delay-exponent fitting, the analytical exponent and
//!   threshold, and numerical checks of the inductive decay bound.
//! - [`mc_sim`]: explicit finite-length graphs, peeling decoding and Monte
//!   Carlo estimation of the per-message erasure probability.

pub mod code_model;
pub mod config;
pub mod de_engine;
mod error;
pub mod exponent;
pub mod mc_sim;

pub use code_model::{BilayerConfig, DerivedExponents, GeometricProfile, LayerParams};
pub use de_engine::{DeSettings, DeState, ErasureCurve};
pub use error::{Error, Result};

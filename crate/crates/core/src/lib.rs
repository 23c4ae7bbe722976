//! Spectrum estimation laboratory for irregularly sampled stationary
//! processes under a minimum inter-sample spacing constraint.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar used by the harness and CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aliasfree;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod real;
pub mod rng;
pub mod sampling;
pub mod simulate;
pub mod special;
pub mod spectra;

pub use error::{Error, Result};
pub use real::Real;
pub use rng::{Seed, StreamRole};
pub use sampling::{SamplingScheme, SpacingLaw};
pub use spectra::{ClassAMember, SpectrumModel};

pub type SpectrumModel64 = SpectrumModel<f64>;
pub type ClassAMember64 = ClassAMember<f64>;
pub type SamplingScheme64 = SamplingScheme<f64>;
pub type ExperimentConfig64 = harness::ExperimentConfig<f64>;
pub type ExperimentReport64 = harness::ExperimentReport<f64>;

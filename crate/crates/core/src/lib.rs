//! Hajłasz-type smoothness norms on finite metric measure spaces.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! files, processes or threads lives in the `hajlasz` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod backend;
pub mod error;
mod fft;
pub mod fields;
pub mod gradients;
pub mod lp_bands;
pub(crate) mod math;
pub mod norms;
pub mod optimize;
pub mod qcmap;
pub mod space;

pub use error::{Error, MetricViolation, Result};
pub use fields::{FamilyKind, FunctionFamilySpec, ScalarField};
pub use gradients::{FeasibilityReport, GradientClass, GradientClassSpec, GradientSequence};
pub use norms::{NormFamily, NormMode, NormParams};
pub use space::{GridGeometry, MetricMeasureSpace, ScaleWindow, Topology};

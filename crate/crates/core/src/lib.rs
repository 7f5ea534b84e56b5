//! Dirichlet heat kernels, the explicit Stokes pressure formula and its
//! verification harness on a rectangular box.
//!
//! The crate is `no_std` (it needs `alloc`). All fields are carried either
//! as samples on a uniform interior grid or as coefficients in the
//! product sine/cosine basis of the box, where the Laplacian is diagonal.

#![no_std]
// `!(x > 0.0)` style guards deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod domain;
pub mod error;
pub mod field;
pub mod heat;
pub mod kernels;
pub mod math;
pub mod series;
pub mod stokes;
pub mod transform;
pub mod verification;

pub use domain::{
    enumerate_modes, eval_eigenfunction, Basis, BoxDomain, Mode, SpatialGrid, TimeGrid,
};
pub use error::{Error, Result};
pub use field::{GridField, SpaceTimeField, SpectralField, VectorField};
pub use heat::{duhamel_series, ModeHistory};
pub use kernels::{Kernels, TruncationPolicy};
pub use series::{Parity, SeriesHistory, TrigSeries};
pub use stokes::{pressure, velocity, velocity_by_parts, Forcing, PressureResult, VelocityResult};

//! Bound-state energies of an electron-positron pair in semiclassical
//! point-charge and ring-current models, plus a variational estimate for
//! the ring model.

pub mod error;
pub mod flux;
pub mod models;
pub mod optimize;
pub mod quadrature;
pub mod reproduce;
pub mod special_fns;
pub mod variational;

pub use error::{Error, Result};
pub use models::{PhysicalConfig, PotentialModel, RingParams};
pub use optimize::{MinimumKind, StationaryPoint};

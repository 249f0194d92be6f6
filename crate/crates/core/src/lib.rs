//! Recovery of sparse spike trains from low-pass samples taken in a linear
//! canonical transform (phase-space) domain.

pub mod denoise;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lct;
pub mod linalg;
pub mod measurement;
pub mod pencil;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
pub use lct::{LctParams, Spike, SpikeTrain};
pub use measurement::{AcquisitionConfig, MeasurementRecord};
pub use series::{FourierCoeffVector, SeriesConfig};
pub use solver::{super_resolve, RecoveryResult, SolverOptions};

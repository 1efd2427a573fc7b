//! Eigenvalue-based spectrum sensing under the spiked covariance model.
//!
//! The crate is organised bottom-up:
//!
//! - [`rmt`]: closed-form random-matrix statistics (Marchenko-Pastur bulk,
//!   phase-transition point, Tracy-Widom edge model, Gaussian law of the
//!   detached eigenvalue, normal tail helpers).
//! - [`synth`]: seeded complex-baseband generators and the auxiliary signal.
//! - [`cov`]: packetization, sample covariance, Hermitian eigensolver, SVD.
//! - [`detect`]: SMED, MED, FMD and MME detectors plus detection-SNR formulas.
//! - [`experiment`]: deterministic parallel Monte Carlo harness and sweeps.
//! - [`io`]: key=value run configuration, CSV tables and raw I/Q files.

pub mod cov;
pub mod detect;
mod error;
pub mod experiment;
pub mod io;
pub mod rmt;
pub mod synth;

pub use error::{Error, Result};

pub use num_complex::Complex64;

//! Numerical laboratory for the fully parabolic Keller-Segel system with
//! logistic source on bounded domains with no-flux boundaries.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: parameters, fields, and the pointwise nonlinearities;
//! - [`grid`]: finite-volume grids, Neumann operators, quadrature;
//! - [`stepper`]: IMEX time stepping, linear solvers, blow-up detection;
//! - [`diagnostics`]: sampled functionals and bound checkers;
//! - [`oracle`]: closed-form and brute-force references;
//! - [`harness`]: configuration files, scenarios, sweeps, and the
//!   acceptance registry behind `kslab verify`.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod stepper;

pub use diagnostics::{BoundCheck, DiagnosticsRecord};
pub use error::{ConfigError, Error, Result};
pub use grid::{FaceValues, Grid, GridKind, GridShape};
pub use model::{Field, Parameters, State};
pub use stepper::{BlowUpCause, BlowUpReport, Observer, RunOutcome, StepControl};

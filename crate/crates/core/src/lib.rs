//! Performance estimation and step-schedule design for fixed-step first-order methods.
//!
//! The [`pep`] module is generic over the scalar type; solving and design
//! run in `f64` through the aliases below.

use openblas_src as _;

pub mod analysis;
pub mod conic;
pub mod design;
pub mod error;
pub mod pep;
pub mod scalar;
pub mod schedules;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Schedule = pep::StepSchedule<f64>;
pub type FunctionClass = pep::FunctionClassSpec<f64>;
pub type Problem = pep::ProblemSpec<f64>;
pub type Instance = pep::PepInstance<f64>;
pub type Certificate = pep::DualCertificate<f64>;
pub type Witness = pep::PrimalWitness<f64>;

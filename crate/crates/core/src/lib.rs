//! Dynamical Casimir radiation from a flux-modulated SQUID termination of a
//! superconducting waveguide.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] physical parameters, mode pairs and thermal inputs,
//! * [`banded`] the complex tridiagonal solver used by the ladder,
//! * [`scattering`] perturbative and Floquet-ladder input/output maps,
//! * [`moments`] output second moments and the quadrature covariance,
//! * [`indicators`] nonclassicality and entanglement measures,
//! * [`estimator`] analysis of measured (or synthetic) quadrature records.
//!
//! All quantities are handled in natural units (ħ = 1, vacuum quadrature
//! variance ½); frequencies are angular, in rad/s.

pub mod banded;
pub mod error;
pub mod estimator;
pub mod indicators;
pub mod model;
pub mod moments;
pub mod scattering;

pub use error::{DceError, Result};
pub use indicators::IndicatorReport;
pub use model::{BoundaryForm, CircuitConfig, ModePair};
pub use moments::{CovarianceMatrix, Method, MomentSet};
pub use scattering::ScatteringRow;

//! Spectral tests for whether the sample paths of a centred Gaussian process
//! can live in a reproducing kernel Hilbert space of bounded functions.
//!
//! The pipeline discretises the covariance operator against a quadrature
//! rule ([`quadrature`]), decomposes it ([`spectral`]), fits the eigenvalue
//! decay and decides ([`analysis`]). [`sampling`] draws truncated
//! Karhunen–Loève paths and [`cli`] wraps everything as batch jobs.
//!
//! ```
//! use rkhs_paths::analysis::{rkhs_path_verdict, Decision};
//! use rkhs_paths::kernels::make_wiener;
//! use rkhs_paths::quadrature::gauss_legendre;
//!
//! let rule = gauss_legendre(256, 0.0, 1.0).unwrap();
//! let verdict = rkhs_path_verdict(&make_wiener(), &rule).unwrap();
//! assert_eq!(verdict.decision, Decision::NotExists);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod format;
pub mod kernels;
pub mod quadrature;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};

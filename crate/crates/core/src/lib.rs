//! Fourier–Laplace expansions on the unit sphere S^N and the Riesz
//! summability operators built on them.
//!
//! The crate is organized bottom-up:
//!
//! * [`sphere`]: points, caps, surface measure, product quadrature grids
//! * [`zonal`]: harmonic dimensions, eigenvalues, Gegenbauer recurrences,
//!   zonal harmonics, Riesz weights and kernels, the Beta function
//! * [`transform`]: degree projections by kernel quadrature and by the
//!   Funk–Hecke formula, L_p norms
//! * [`family`]: analytically decomposed test functions
//! * [`summability`]: Riesz means, maximal operators, square functions
//! * [`experiment`]: inequality audits, operator-norm estimates and
//!   convergence maps

pub mod error;
pub mod experiment;
pub mod family;
pub mod quadrature;
pub mod sphere;
pub mod summability;
pub mod transform;
pub mod zonal;

pub use error::{Error, Result};

//! Schur-class function machinery on the bidisk and the symmetrized bidisk.
//!
//! The crate is organized around five building blocks:
//!
//! - [`numkit`]: dense complex matrices with the handful of factorizations
//!   everything else needs (operator norm, Hermitian eigendecomposition,
//!   PSD projection, Gram factors, span-matched contractive maps).
//! - [`poly2`]: bivariate polynomials with complex coefficients, conversion
//!   between power coordinates `(z, zeta)` and symmetric coordinates
//!   `(s, p) = (z + zeta, z * zeta)`, and grid-based coefficient recovery.
//! - [`realize`]: colligations and their transfer functions on the bidisk
//!   and the symmetrized bidisk, plus symmetrization and conversion between
//!   the three block structures.
//! - [`detrep`]: determinantal representations of stable polynomials built
//!   from a block contraction, with verification and strict rescaling.
//! - [`pick`]: Nevanlinna-Pick interpolation on the symmetrized bidisk via
//!   the associated symmetric bidisk problem: kernel matrices, semidefinite
//!   feasibility by Dykstra alternating projections, and the lurking
//!   contraction construction.
//!
//! The [`cli`] module exposes every operation as a JSON-in/JSON-out
//! subcommand; see the `examples/` directory for library-level walkthroughs.

pub mod cli;
pub mod detrep;
pub mod error;
pub mod numkit;
pub mod pick;
pub mod poly2;
pub mod realize;

pub use error::{Error, Result};
pub use numkit::{Cx, ComplexMatrix};

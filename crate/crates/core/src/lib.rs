//! Numerical toolkit for time-dependent linear operator families `t ↦ A(t)` on `[0, 1]`.
//!
//! The crate makes three classical regularity conditions for the generator of a
//! non-autonomous evolution equation `ẋ = A(t)x` executable on finite-dimensional
//! families: the 1953 Kato conditions on `B(t,s) = (1 − A(t))(1 − A(s))⁻¹`, the
//! Yosida conditions on `C(t,s) = A(t)A(s)⁻¹ − 1`, and continuous differentiability
//! of `t ↦ A(t)x`. Around those suites sit a discrete mean-value engine for
//! left difference quotients and a propagator that builds and validates the
//! evolution system `U(t,s)`.

pub mod catalog;
pub mod error;
pub mod family;
pub mod grid;
pub mod lemma;
pub mod linalg;
pub mod propagator;
pub mod regularity;

pub use catalog::{builtin, load_family, CatalogEntry, FamilySpecFile, Truth, BUILTIN_NAMES};
pub use error::{Error, Result};
pub use family::{Coefficient, CoefficientKind, OperatorFamily, ScalarFunction};
pub use grid::Grid;

/// Version string embedded in every serialized report.
pub const SCHEMA_VERSION: &str = "1.0";

//! Geometry of linear convolutional network (LCN) function spaces.
//!
//! An LCN composes one-dimensional, single-channel convolutions with
//! arbitrary filter sizes and strides. Its end-to-end filters form a
//! semialgebraic cone of structured polynomials: identifying a filter `w`
//! with the homogeneous bivariate polynomial `π_s(w)`, the function space
//! consists of products of polynomials living on stride grids
//! `(x^{S_l}, y^{S_l})`. This crate provides:
//!
//! * [`arch`] — architecture combinatorics: validation, reduction,
//!   dimension, thickness, Zariski-closedness, singular strata,
//!   containment;
//! * [`poly`] — homogeneous bivariate polynomial arithmetic, projective
//!   root finding, hyperroot extraction and layered factorizations;
//! * [`space`] — membership oracles for the function space and its
//!   closure, singularity and boundary tests, sampling, and hard-coded
//!   implicit equations for two worked five-dimensional examples;
//! * [`param`] — the parameterization map, its Jacobian, and criticality
//!   via common hyperroot degree;
//! * [`train`] — generalized Toeplitz matrices, the data-induced metric,
//!   gradient descent, and endpoint classification.
//!
//! All numerical kernels are generic over the scalar type through the
//! [`Scalar`] trait (`f32` or `f64`); concrete aliases for the common
//! double-precision instantiation live at the crate root.

pub mod arch;
pub(crate) mod fiber;
pub mod param;
pub mod poly;
pub mod space;
pub mod tol;
pub mod train;

mod scalar;

pub use arch::{Architecture, ArchError, ClassificationReport, Containment, Reduction};
pub use scalar::Scalar;
pub use tol::Tolerances;

/// Double-precision homogeneous bivariate polynomial.
pub type Poly64 = poly::HomogeneousPoly<f64>;
/// Single-precision homogeneous bivariate polynomial.
pub type Poly32 = poly::HomogeneousPoly<f32>;
/// Double-precision projective root multiset.
pub type RootSet64 = poly::ProjectiveRootSet<f64>;
/// Single-precision homogeneous bivariate polynomial.

/// Double-precision projective root multiset.

/// Double-precision tolerance bundle.
pub type Tolerances64 = Tolerances<f64>;

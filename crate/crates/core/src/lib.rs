//! Construction and numerical verification of marginally trapped
//! codimension-two submanifolds of flat and spherical pseudo-Riemannian
//! space forms.
//!
//! A submanifold is *marginally trapped* when its mean curvature vector H
//! is null, `<H,H> = 0`. For codimension two with a Lorentzian normal
//! bundle this is equivalent to H lying on one of the two null normal
//! lines, which makes the condition algebraic: candidates are produced by
//! explicit representation formulas, with the admissible factor `tau`
//! isolated as a real root of a small polynomial built from a shape
//! operator or a support-function Hessian.
//!
//! Module map:
//! - [`pseudolin`]: signed linear algebra for R^N with signature (r,s).
//! - [`scalarlang`]: scalar-field expression language with exact jets to
//!   order 4.
//! - [`jets`]: product-sphere charts, intrinsic gradients, covariant
//!   Hessians, orthonormal tangent frames.
//! - [`tausolve`]: the degree-(n-1) tau polynomials and real root
//!   isolation.
//! - [`construct`]: the representation formulas and their inverse
//!   decompositions.
//! - [`verify`]: fundamental forms, null normal frames, mean curvature,
//!   the marginally-trapped residual and the auxiliary identity checks.
//! - [`fd`]: finite-difference stencils (jet fallback and test oracles).

// indexed loops mirror the tensor index notation throughout the kernels
#![allow(clippy::needless_range_loop)]

pub mod construct;
pub mod error;
pub mod fd;
pub mod jets;
pub mod pseudolin;
pub mod scalarlang;
pub mod tausolve;
pub mod verify;

pub use error::{Error, Result};
pub use pseudolin::{AmbientSpace, Curvature, NullNormalFrame, Signature, SignedVector};

//! Numerical locally conformally Kähler geometry engine.
//!
//! The crate evaluates the operators of lcK geometry — twisted differentials,
//! Levi-Civita/Weyl/Chern connections and their curvatures, linearizations
//! along curves of compatible almost complex structures, the moment map
//! `μ = scal^Ch + n·d*θ` and the associated Futaki invariant — on explicit
//! coordinate charts, with every derivative supplied exactly (to roundoff) by
//! truncated-jet automatic differentiation. Identities are verified pointwise
//! at sampled chart points and globally by quadrature against the symplectic
//! volume.
//!
//! Everything is immutable after construction and all evaluation is pure, so
//! concurrent use is unrestricted.

pub mod chart;
pub mod deformation;
pub mod error;
pub mod examples;
pub mod expr;
pub mod geometry;
pub mod global;
pub mod jet;
pub mod jet_matrix;
pub mod lck;
pub mod quadrature;
pub mod report;
pub mod riemannian;
pub mod suite;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
pub use jet::{Jet, JetContext};
pub use jet_matrix::JetMatrix;
// pub use tensor::{TensorValue, Variance};

//! Certification and computation of positively invariant graph manifolds
//! for ODE systems in split form `ȧ = f(a, z)`, `ż = g(a, z)`.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the common double-precision case.

pub mod error;
pub mod flow;
pub mod hypotheses;
pub mod linalg;
pub mod manifold;
pub mod regions;
pub mod scalar;
pub mod systems;
pub mod types;

pub use error::{Error, Result};
pub use hypotheses::{CheckReport, Inequality};
pub use linalg::Matrix;
pub use manifold::GraphManifold;
pub use scalar::Real;
pub use types::{
    cone_gauge, hyp1_bound, in_cone, BoxDomain, Face, FnField, JacobianBlocks, Point, RateProfile,
    Rates, Reversed, Side, SplitField, ZBound,
};

pub type Point64 = Point<f64>;
pub type Point32 = Point<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type BoxDomain64 = BoxDomain<f64>;
pub type BoxDomain32 = BoxDomain<f32>;
pub type FnField64 = FnField<f64>;
pub type FnField32 = FnField<f32>;
pub type GraphManifold64 = GraphManifold<f64>;
pub type GraphManifold32 = GraphManifold<f32>;
pub type CheckReport64 = CheckReport<f64>;
pub type RateProfile64 = RateProfile<f64>;

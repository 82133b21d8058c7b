//! Numerical toolkit for the pseudo-Riemannian hyperbolic spaces `H^{p,q}`.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*64` aliases below fix `f64`.

pub mod anosov;
pub mod crowns;
pub mod error;
pub mod forms;
pub mod graphs;
pub mod groups;
pub mod linalg;
pub mod model;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use forms::{Signature, VectorClass};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type QuadraticSpace64 = forms::QuadraticSpace<f64>;
pub type HPoint64 = model::HPoint<f64>;
pub type BoundaryPoint64 = model::BoundaryPoint<f64>;
pub type TimelikeFrame64 = model::TimelikeFrame<f64>;
pub type HalfspaceDomain64 = model::HalfspaceDomain<f64>;
pub type LipschitzGraph64 = graphs::LipschitzGraph<f64>;
pub type Crown64 = crowns::Crown<f64>;
pub type AdaptedBasis64 = crowns::AdaptedBasis<f64>;
pub type ReflectionRep64 = groups::coxeter::ReflectionRep<f64>;
pub type BendDatum64 = groups::bending::BendDatum<f64>;
pub type Polygon2k64 = groups::polygon::Polygon2k<f64>;
pub type WordBall64 = groups::words::WordBall<f64>;

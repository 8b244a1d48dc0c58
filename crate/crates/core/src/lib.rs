//! Level-set CutFEM shape optimization of a compression-driver phase plug.
//!
//! The pipeline maps a design vector through a Poisson problem to a piecewise-linear
//! level-set field, cuts the fixed triangulation along its zero set, solves the
//! stabilized Helmholtz problem with viscothermal wall losses on the cut domain for
//! each frequency, and differentiates the outlet pressure with a discrete adjoint.
//!
//! Geometry, quadrature, the lumped model and the optimizer are generic over the real
//! scalar; the finite-element pipeline runs in `f64` / [`Complex64`].

pub mod config;
pub mod error;
pub mod geometry;
pub mod helmholtz;
pub mod io;
pub mod levelset;
pub mod lumped;
pub mod mesh;
pub mod optimizer;
pub mod p2;
pub mod quadrature;
pub mod shape_gradient;
pub mod sparse;

pub use error::{Error, Result};

pub type Complex64 = num_complex::Complex<f64>;
pub type Point = geometry::Point2<f64>;

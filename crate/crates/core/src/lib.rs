//! Differential geometry of parametrized space curves.
//!
//! Taylor jets drive every derivative: Frenet invariants, feature points
//! (flattenings, vertices, twistings, cusps), focal curves, and the
//! bifurcation sets of two-parameter families of space cusps.

pub mod cli;
pub mod error;
pub mod evolute;
pub mod expr;
pub mod features;
pub mod frenet;
pub mod geometry;
pub mod io;
pub mod jet;
pub mod model;
pub mod strata;

pub use error::{Error, Result};
pub use geometry::{JetVec3, RigidMotion, Vec3};
pub use jet::Jet;
pub use model::{DeformationFamily, Model, ParametricCurve, ParametricFamily, SpaceCurve};

//! Solver for the minimal-exposure Dubins orienteering problem.
//!
//! A bounded-curvature vehicle has to leave a start location, visit a subset
//! of rewarded targets and reach a goal within a travel budget, while a field
//! of sensors observes it. The solver returns a Pareto front trading the
//! collected reward against the exposure (the integral of the sensor field
//! intensity along the path).
//!
//! The geometric, sensing and dominance kernels are generic over the scalar
//! type (`f32` or `f64`); the aliases at the crate root fix them to `f64`,
//! which is what scenarios and the evolutionary engine use.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod evolution;
pub mod geometry;
pub mod oracle;
pub mod pareto;
pub mod scalar;
pub mod scenario;
pub mod sensing;

pub use scalar::Real;

pub type Pose = geometry::Pose<f64>;
pub type DubinsPath = geometry::DubinsPath<f64>;
pub type CompositePath = geometry::CompositePath<f64>;
pub type SensorField = sensing::SensorField<f64>;
pub type Fitness = pareto::Fitness<f64>;
pub type ParetoFront = pareto::ParetoFront<evolution::Chromosome, f64>;

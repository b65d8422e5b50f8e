//! Reactive trajectory replanning and waypoint tracking for a mobile robot
//! among convex obstacles that become known only when sensed.
//!
//! The planner keeps a piecewise-cubic reference `y = l(x)` in a frame whose
//! x-axis runs from start to goal. Whenever a known obstacle blocks the
//! untracked part, a three-part turn is spliced around it. The controller
//! samples the reference into waypoints and picks each control by grid
//! search over the input box.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the simulator,
//! scenario files and run artifacts use `f64`.

// Negated comparisons deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod output;
pub mod planner;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point2d = geometry::Point2<f64>;
pub type Point2f = geometry::Point2<f32>;
pub type Region = geometry::ConvexRegion<f64>;
pub type RegionF32 = geometry::ConvexRegion<f32>;
pub type Frame = geometry::Frame<f64>;
pub type Trajectory = trajectory::RefTrajectory<f64>;
pub type TrajectoryF32 = trajectory::RefTrajectory<f32>;
pub type Piece = trajectory::TrajectoryPiece<f64>;
pub type PlannerConfig = planner::PlannerConfig<f64>;
pub type TrackingConfig = controller::TrackingConfig<f64, 2>;
pub type UnicycleBounds = dynamics::ControlBounds<f64, 2>;

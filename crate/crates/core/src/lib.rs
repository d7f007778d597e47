//! Real-time sampling-based motion planning in 2D: the RT-FMT planner, an
//! RT-RRT* baseline and a deterministic simulator with moving obstacles.

pub mod error;
pub mod geometry;
pub mod grid;
pub mod planner;
pub mod rtfmt;
pub mod rtrrt;
pub mod sampling;
pub mod sim;
pub mod tree;

pub use error::{Error, Result};
pub use geometry::{Config, DynamicObstacle, MotionPolicy, StaticObstacle, World, WorldBounds};
pub use planner::{Path, PathKind, Planner, PlannerParams, TickRecord};
pub use rtfmt::RtFmt;
pub use rtrrt::{RtRrt, RtRrtParams};
pub use sampling::{neighborhood_radius, SamplerParams};
pub use tree::{NodeStatus, PlanTree};

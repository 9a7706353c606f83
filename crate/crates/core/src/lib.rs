//! Trajectory inference on sequences of weighted point clouds.
//!
//! Subdivision schemes are lifted to the Wasserstein space by replacing the
//! linear average of two points with the optimal-transport geodesic between
//! two clouds. [`subdivision::wlr_refine`] approximates a B-spline of chosen
//! degree through the data; [`subdivision::four_point_refine`] interpolates it.
//! [`trace::trace_paths`] follows mass through the refined sequence, splitting
//! where the transport plan splits.

pub mod cli;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod geodesic;
pub mod measure;
pub mod ot;
pub mod subdivision;
pub mod trace;

pub use error::{Error, Result};
pub use geodesic::{geodesic_interpolant, ot_average};
pub use measure::{DiscreteMeasure, RefinementConfig, TimedSequence};
pub use ot::{cost_matrix, solve_kantorovich, wasserstein_distance, CostMatrix, Coupling};
pub use subdivision::{four_point_refine, wlr_refine, RefinedSequence};
pub use trace::{trace_paths, TrajectoryForest};

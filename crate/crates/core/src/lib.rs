//! Numerical-optimization-based extremum seeking control for single-input
//! single-output nonlinear plants with output constraints.
//!
//! The performance function `J(x)` of the plant state is minimized over a
//! convex set by projected gradient descent. Every optimizer step is then
//! realized on the plant within a fixed time window by inversion-based
//! feedforward control: a sigmoid-saturated reference output keeps `y`
//! inside its bounds, and a free-parameter boundary value problem on the
//! internal dynamics makes the transition land on the full target state.
//!
//! Modules:
//!
//! * [`numerics`]: RK4 integration, dense trajectories, shooting solver.
//! * [`optimizer`]: projections, gradient estimation, projected gradient descent.
//! * [`plant`]: normal-form plant trait, the two-state example plant, simulation.
//! * [`trajectory`]: saturation map, polynomial ansatz, reference derivatives.
//! * [`esc`]: per-window planning and the full seeking loop.
//! * [`cli`]: experiment configs, artifacts and the `noesc` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod esc;
pub mod numerics;
pub mod optimizer;
pub mod plant;
pub mod trajectory;

pub use error::{Error, Result};

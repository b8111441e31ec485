//! Fixed-step integration, dense trajectories and the free-parameter
//! shooting solver.

mod dense;
mod ode;
mod shooting;

pub use dense::Trajectory;
pub use ode::{integrate_ivp, IntegratorConfig};
pub use shooting::{solve_shooting, ShootingProblem, ShootingSolution};

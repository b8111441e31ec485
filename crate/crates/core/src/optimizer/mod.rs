//! Projected gradient descent over convex constraint sets.

mod constraint;
mod performance;
mod pgd;

pub use constraint::{project, ConstraintSet};
pub use performance::{estimate_gradient, rosenbrock, PerformanceOracle};
pub use pgd::{pgd_step, run_pgd, PgdConfig, PgdRecord, PgdRun, StepRule, Termination};

pub(crate) use pgd::{norm2, step_with_gradient};

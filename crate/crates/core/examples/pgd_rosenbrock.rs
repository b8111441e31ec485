//! Projected gradient descent on the Rosenbrock function inside a box.

use noesc::optimizer::{rosenbrock, run_pgd, ConstraintSet, PgdConfig, StepRule};

fn main() -> noesc::Result<()> {
    let oracle = rosenbrock();
    let set = ConstraintSet::bounded(vec![-1.5, f64::NEG_INFINITY], vec![1.5, f64::INFINITY])?;

    for (label, rule) in [
        ("fixed 0.002", StepRule::Fixed { step: 0.002 }),
        ("backtracking", StepRule::backtracking(0.01)),
    ] {
        let cfg = PgdConfig {
            step_rule: rule,
            eps0: 1e-2,
            max_iter: 20_000,
        };
        let run = run_pgd(&[0.8, 3.0], &oracle, &set, &cfg)?;
        let last = run.last();
        println!(
            "{label:>13}: {:5} steps, x = ({:.6}, {:.6}), J = {:.3e}, {:?}",
            run.steps(),
            last.x[0],
            last.x[1],
            last.value,
            run.termination
        );
    }
    Ok(())
}

use serde::{Deserialize, Serialize};

use super::{ConstraintSet, PerformanceOracle};
use crate::error::{check_dim, Error, Result};

/// How the step length of each iteration is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StepRule {
    Fixed { step: f64 },
    /// `step = 2 / (L + 2 eps)` for a gradient Lipschitz constant `L`.
    FixedFromLipschitz { lipschitz: f64, eps: f64 },
    /// Armijo backtracking along the projection arc.
    Backtracking { initial: f64, shrink: f64, slope: f64 },
}

impl StepRule {
    pub fn from_lipschitz(lipschitz: f64, eps: f64) -> Self {
        StepRule::FixedFromLipschitz { lipschitz, eps }
    }

    pub fn backtracking(initial: f64) -> Self {
        StepRule::Backtracking {
            initial,
            shrink: 0.5,
            slope: 1e-4,
        }
    }

    /// Nominal step; for backtracking, the initial trial.
    pub fn step(&self) -> f64 {
        match *self {
            StepRule::Fixed { step } => step,
            StepRule::FixedFromLipschitz { lipschitz, eps } => 2.0 / (lipschitz + 2.0 * eps),
            StepRule::Backtracking { initial, .. } => initial,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            StepRule::Fixed { step } if !(step > 0.0 && step.is_finite()) => bad(format!("step must be positive, got {step}")),
            StepRule::FixedFromLipschitz { lipschitz, eps } if !(lipschitz >= 0.0 && eps > 0.0) => {
                bad(format!("need L >= 0 and eps > 0, got L = {lipschitz}, eps = {eps}"))
            }
            StepRule::Backtracking { initial, shrink, slope }
                if !(initial > 0.0 && shrink > 0.0 && shrink < 1.0 && slope > 0.0 && slope < 1.0) =>
            {
                bad("backtracking needs initial > 0, shrink and slope in (0, 1)".into())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgdConfig {
    pub step_rule: StepRule,
    /// Gradient-norm threshold.
    pub eps0: f64,
    pub max_iter: usize,
}

impl PgdConfig {
    pub fn fixed(step: f64, eps0: f64, max_iter: usize) -> Self {
        Self {
            step_rule: StepRule::Fixed { step },
            eps0,
            max_iter,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.step_rule.validate()?;
        if !(self.eps0 > 0.0) {
            return Err(Error::InvalidArgument(format!("eps0 must be positive, got {}", self.eps0)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The starting point already met the gradient threshold.
    ConvergedAtStart,
    /// The gradient at the newest iterate fell below the threshold.
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdRecord {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgdRun {
    /// Iterates `x_0, x_1, ...`; entry 0 is the start point.
    pub records: Vec<PgdRecord>,
    pub termination: Termination,
}

impl PgdRun {
    /// Number of projected-gradient steps taken.
    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }

    pub fn last(&self) -> &PgdRecord {
        self.records.last().unwrap()
    }

    pub fn converged(&self) -> bool {
        self.termination != Termination::MaxIter
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn descend(x: &[f64], grad: &[f64], step: f64, set: &ConstraintSet) -> Result<Vec<f64>> {
    let trial: Vec<f64> = x.iter().zip(grad).map(|(a, g)| a - step * g).collect();
    set.project(&trial)
}

pub(crate) fn step_with_gradient(
    x: &[f64],
    grad: &[f64],
    oracle: &PerformanceOracle,
    set: &ConstraintSet,
    rule: &StepRule,
) -> Result<Vec<f64>> {
    match *rule {
        StepRule::Fixed { .. } | StepRule::FixedFromLipschitz { .. } => descend(x, grad, rule.step(), set),
        StepRule::Backtracking { initial, shrink, slope } => {
            let fx = oracle.value(x)?;
            let mut step = initial;
            let mut next = descend(x, grad, step, set)?;
            for _ in 0..60 {
                let decrease: f64 = grad.iter().zip(next.iter().zip(x)).map(|(g, (a, b))| g * (a - b)).sum();
                if oracle.value(&next)? <= fx + slope * decrease {
                    break;
                }
                step *= shrink;
                next = descend(x, grad, step, set)?;
            }
            Ok(next)
        }
    }
}

/// One projected gradient step `x+ = P(x - step * grad J(x))`.
pub fn pgd_step(x: &[f64], oracle: &PerformanceOracle, set: &ConstraintSet, cfg: &PgdConfig) -> Result<Vec<f64>> {
    check_dim(set.dim(), x.len())?;
    cfg.validate()?;
    let grad = oracle.gradient(x)?;
    step_with_gradient(x, &grad, oracle, set, &cfg.step_rule)
}

/// Iterates projected gradient steps until the gradient norm at the newest
/// iterate drops below `eps0`, or `max_iter` steps have been taken.
pub fn run_pgd(x0: &[f64], oracle: &PerformanceOracle, set: &ConstraintSet, cfg: &PgdConfig) -> Result<PgdRun> {
    check_dim(set.dim(), x0.len())?;
    cfg.validate()?;

    let mut x = x0.to_vec();
    let mut grad = oracle.gradient(&x)?;
    let mut records = vec![PgdRecord {
        value: oracle.value(&x)?,
        grad_norm: norm2(&grad),
        x: x.clone(),
    }];
    if records[0].grad_norm < cfg.eps0 {
        return Ok(PgdRun {
            records,
            termination: Termination::ConvergedAtStart,
        });
    }

    for _ in 0..cfg.max_iter {
        x = step_with_gradient(&x, &grad, oracle, set, &cfg.step_rule)?;
        grad = oracle.gradient(&x)?;
        let grad_norm = norm2(&grad);
        records.push(PgdRecord {
            value: oracle.value(&x)?,
            grad_norm,
            x: x.clone(),
        });
        if grad_norm < cfg.eps0 {
            return Ok(PgdRun {
                records,
                termination: Termination::Converged,
            });
        }
    }
    Ok(PgdRun {
        records,
        termination: Termination::MaxIter,
    })
}

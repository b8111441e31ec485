use nalgebra::{DMatrix, DVector};

use super::ode::rk4_sweep;
use super::{integrate_ivp, IntegratorConfig, Trajectory};
use crate::error::{check_dim, Error, Result};

type Dynamics<'a> = dyn Fn(f64, &[f64], &[f64], &mut [f64]) + 'a;

/// Two-point boundary value problem `eta' = f(t, eta, p)` with
/// `eta(t_start) = eta_start`, `eta(t_end) = eta_end` and as many free
/// parameters as states.
pub struct ShootingProblem<'a> {
    dynamics: Box<Dynamics<'a>>,
    pub t_start: f64,
    pub t_end: f64,
    pub eta_start: Vec<f64>,
    pub eta_end: Vec<f64>,
}

impl std::fmt::Debug for ShootingProblem<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShootingProblem")
            .field("t_start", &self.t_start)
            .field("t_end", &self.t_end)
            .field("eta_start", &self.eta_start)
            .field("eta_end", &self.eta_end)
            .finish_non_exhaustive()
    }
}

impl<'a> ShootingProblem<'a> {
    /// `dynamics(t, eta, p, out)` writes `eta'` into `out`.
    pub fn new<F>(dynamics: F, t_span: (f64, f64), eta_start: Vec<f64>, eta_end: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64, &[f64], &[f64], &mut [f64]) + 'a,
    {
        check_dim(eta_start.len(), eta_end.len())?;
        if eta_start.is_empty() {
            return Err(Error::InvalidArgument("boundary values must be non-empty".into()));
        }
        if !(t_span.1 > t_span.0) {
            return Err(Error::InvalidArgument(format!(
                "shooting interval must satisfy t_end > t_start, got [{}, {}]",
                t_span.0, t_span.1
            )));
        }
        Ok(Self {
            dynamics: Box::new(dynamics),
            t_start: t_span.0,
            t_end: t_span.1,
            eta_start,
            eta_end,
        })
    }

    pub fn dim(&self) -> usize {
        self.eta_start.len()
    }

    /// Terminal residual `eta(t_end; p) - eta_end`.
    pub fn residual(&self, p: &[f64], cfg: &IntegratorConfig) -> Result<Vec<f64>> {
        check_dim(self.dim(), p.len())?;
        let rhs = |t: f64, eta: &[f64], out: &mut [f64]| (self.dynamics)(t, eta, p, out);
        let end = rk4_sweep(&rhs, (self.t_start, self.t_end), &self.eta_start, cfg, |_, _, _, _| {})?;
        Ok(end.iter().zip(&self.eta_end).map(|(a, b)| a - b).collect())
    }

    /// Full forward trajectory for a fixed parameter vector.
    pub fn trajectory(&self, p: &[f64], cfg: &IntegratorConfig) -> Result<Trajectory> {
        check_dim(self.dim(), p.len())?;
        integrate_ivp(
            |t, eta, out| (self.dynamics)(t, eta, p, out),
            (self.t_start, self.t_end),
            &self.eta_start,
            cfg,
        )
    }
}

#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub p: Vec<f64>,
    pub trajectory: Trajectory,
    /// Infinity norm of the terminal residual at `p`.
    pub residual: f64,
    pub iterations: usize,
}

const MAX_HALVINGS: usize = 30;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration on the free parameters with a forward-difference
/// Jacobian of the terminal residual.
pub fn solve_shooting(
    prob: &ShootingProblem<'_>,
    p_init: &[f64],
    tol: f64,
    max_iter: usize,
    cfg: &IntegratorConfig,
) -> Result<ShootingSolution> {
    let m = prob.dim();
    check_dim(m, p_init.len())?;
    if p_init.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("initial parameters must be finite".into()));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument("tolerance and iteration cap must be positive".into()));
    }

    let mut p = p_init.to_vec();
    let mut res = prob.residual(&p, cfg)?;
    let mut norm = inf_norm(&res);
    let mut iterations = 0;

    while norm >= tol {
        if iterations == max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;

        let mut jac = DMatrix::<f64>::zeros(m, m);
        let mut probe = p.clone();
        for j in 0..m {
            let h = 1e-6 * (1.0 + p[j].abs());
            probe[j] = p[j] + h;
            let shifted = prob.residual(&probe, cfg)?;
            for i in 0..m {
                jac[(i, j)] = (shifted[i] - res[i]) / h;
            }
            probe[j] = p[j];
        }

        let rhs = -DVector::from_column_slice(&res);
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        };

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            // a blown-up trial counts as no decrease
            if let Ok(r) = prob.residual(&trial, cfg) {
                let n = inf_norm(&r);
                if n < norm {
                    accepted = Some((trial, r, n));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((trial, r, n)) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                residual: norm,
            });
        };
        p = trial;
        res = r;
        norm = n;
    }

    let trajectory = prob.trajectory(&p, cfg)?;
    Ok(ShootingSolution {
        p,
        trajectory,
        residual: norm,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::new(1e-3).unwrap()
    }

    #[test]
    fn constant_rate_one_step() {
        let prob = ShootingProblem::new(|_, _, p, out| out[0] = p[0], (0.0, 1.0), vec![0.0], vec![1.0]).unwrap();
        let sol = solve_shooting(&prob, &[0.0], 1e-10, 10, &cfg()).unwrap();
        assert!((sol.p[0] - 1.0).abs() < 1e-9);
        assert!(sol.residual < 1e-10);
        assert!(sol.iterations <= 2);
    }

    #[test]
    fn affine_growth_closed_form() {
        let prob =
            ShootingProblem::new(|_, e, p, out| out[0] = e[0] + p[0], (0.0, 1.0), vec![0.0], vec![1.0]).unwrap();
        let sol = solve_shooting(&prob, &[0.0], 1e-10, 10, &cfg()).unwrap();
        assert!((sol.p[0] - 1.0 / (E - 1.0)).abs() < 1e-8);
        // re-integration reproduces the endpoint
        let again = prob.trajectory(&sol.p, &cfg()).unwrap();
        assert!((again.last()[0] - sol.trajectory.last()[0]).abs() <= 1e-10);
        assert!((again.last()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_coupled() {
        // eta1' = p1 + eta2, eta2' = p2
        let prob = ShootingProblem::new(
            |_, e, p, out| {
                out[0] = p[0] + e[1];
                out[1] = p[1];
            },
            (0.0, 2.0),
            vec![0.0, 0.0],
            vec![1.0, -1.0],
        )
        .unwrap();
        let sol = solve_shooting(&prob, &[0.0, 0.0], 1e-10, 10, &cfg()).unwrap();
        // eta2 = p2 t -> p2 = -0.5; eta1(2) = 2 p1 + p2 * 2 = 1 -> p1 = 1
        assert!((sol.p[1] + 0.5).abs() < 1e-8);
        assert!((sol.p[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unreachable_target_reports_no_convergence() {
        // eta' = p^2 can never decrease eta
        let prob =
            ShootingProblem::new(|_, _, p, out| out[0] = p[0] * p[0], (0.0, 1.0), vec![0.0], vec![-1.0]).unwrap();
        let err = solve_shooting(&prob, &[1.0], 1e-10, 20, &cfg()).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn dimension_checks() {
        assert!(ShootingProblem::new(|_, _, _, _| {}, (0.0, 1.0), vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(ShootingProblem::new(|_, _, _, _| {}, (1.0, 1.0), vec![0.0], vec![0.0]).is_err());
        let prob = ShootingProblem::new(|_, _, p, out| out[0] = p[0], (0.0, 1.0), vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            solve_shooting(&prob, &[0.0, 1.0], 1e-8, 5, &cfg()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

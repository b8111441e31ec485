//! Extremum seeking loop: projected gradient iterates are realized on the
//! plant by inversion-based feedforward transitions.
//!
//! Each window `[t_k, t_k + delta_k]` takes the measured state `x(t_k)` and
//! the next optimizer iterate `x_{k+1}`, designs a saturated reference output
//! between their outputs, solves the internal-dynamics boundary value problem
//! for the free ansatz parameters, and drives the plant open loop with
//! `u* = alpha_inv(y*, ..., y*^(r), eta*)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numerics::{solve_shooting, IntegratorConfig, ShootingProblem, Trajectory};
use crate::optimizer::{ConstraintSet, PerformanceOracle, PgdConfig};
use crate::plant::{simulate_plant, to_normal, NormalFormPlant};
use crate::trajectory::{chord_deviation, reference_chain_with, AnsatzTrajectory, SaturationMap, MAX_ORDER};

/// Boundary value solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvpConfig {
    /// Infinity-norm tolerance on the terminal residual.
    pub tol: f64,
    pub max_iter: usize,
    pub integrator: IntegratorConfig,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            integrator: IntegratorConfig::default(),
        }
    }
}

/// Shape of the reference output in every window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub map: SaturationMap,
    /// One positive weight per internal state.
    pub gamma: Vec<f64>,
    /// Window length.
    pub delta_k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscConfig {
    pub x0: Vec<f64>,
    pub t0: f64,
    pub pgd: PgdConfig,
    pub reference: ReferenceConfig,
    pub bvp: BvpConfig,
    /// Free parameters for the first window; later windows warm start from
    /// the previous solution.
    pub p_init: Vec<f64>,
    /// Plant simulation step and dense-log decimation.
    pub sim: IntegratorConfig,
}

/// Everything needed to drive the plant through one window.
#[derive(Debug, Clone)]
pub struct TransitionPlan {
    pub k: usize,
    pub t_k: f64,
    pub t_k1: f64,
    pub x_k: Vec<f64>,
    pub x_k1: Vec<f64>,
    pub y_k: f64,
    pub y_k1: f64,
    pub eta_k: Vec<f64>,
    pub eta_k1: Vec<f64>,
    pub p_star: Vec<f64>,
    pub zeta: AnsatzTrajectory,
    pub eta_star: Trajectory,
    pub map: SaturationMap,
    pub bvp_residual: f64,
    pub newton_iterations: usize,
    order: usize,
}

impl TransitionPlan {
    /// Relative degree the plan was built for.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `[y*, y*', ..., y*^(r)]` at `t`.
    pub fn reference(&self, t: f64) -> Result<Vec<f64>> {
        let mut chain = vec![0.0; self.order + 1];
        reference_chain_with(&self.map, &self.zeta, &self.p_star, t, &mut chain)?;
        Ok(chain)
    }

    /// Feedforward input `u*(t)`.
    pub fn control<P: NormalFormPlant + ?Sized>(&self, plant: &P, t: f64) -> Result<f64> {
        let chain = self.reference(t)?;
        let eta = self.eta_star.eval(t)?;
        Ok(plant.alpha_inv(&chain[..self.order], chain[self.order], &eta))
    }

    pub fn chord_deviation(&self, samples: usize) -> Result<f64> {
        chord_deviation(&self.map, &self.zeta, samples)
    }
}

/// Designs the feedforward transition from `x_k` at `t_k` to `x_k1` at
/// `t_k + delta_k`.
///
/// Only the output itself is imposed at the window ends; for relative
/// degree above one the higher output derivatives follow the ansatz.
#[allow(clippy::too_many_arguments)]
pub fn plan_transition<P: NormalFormPlant + ?Sized>(
    plant: &P,
    map: &SaturationMap,
    x_k: &[f64],
    x_k1: &[f64],
    t_k: f64,
    delta_k: f64,
    gamma: &[f64],
    p_init: &[f64],
    bvp: &BvpConfig,
) -> Result<TransitionPlan> {
    let r = plant.relative_degree();
    let m = plant.internal_dim();
    if r == 0 || r > MAX_ORDER {
        return Err(Error::UnsupportedOrder(r));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("plant has no internal dynamics to shape".into()));
    }
    check_dim(m, gamma.len())?;
    check_dim(m, p_init.len())?;

    let (_, eta_k) = to_normal(plant, x_k)?;
    let (_, eta_k1) = to_normal(plant, x_k1)?;
    let y_k = plant.output(x_k);
    let y_k1 = plant.output(x_k1);
    let zeta_k = map.saturate_inverse(y_k)?;
    let zeta_k1 = map.saturate_inverse(y_k1)?;
    let ansatz = AnsatzTrajectory::new(zeta_k, zeta_k1, gamma.to_vec(), p_init.to_vec(), t_k, delta_k)?;

    let t_k1 = ansatz.t_end();
    let dynamics = |t: f64, eta: &[f64], p: &[f64], out: &mut [f64]| {
        let mut chain = [0.0; MAX_ORDER + 1];
        if reference_chain_with(map, &ansatz, p, t, &mut chain[..=r]).is_err() {
            out.fill(f64::NAN);
            return;
        }
        let xi = &chain[..r];
        let u = plant.alpha_inv(xi, chain[r], eta);
        plant.beta(xi, eta, u, out);
    };
    let problem = ShootingProblem::new(dynamics, (t_k, t_k1), eta_k.clone(), eta_k1.clone())?;
    let solution = solve_shooting(&problem, p_init, bvp.tol, bvp.max_iter, &bvp.integrator)?;

    Ok(TransitionPlan {
        k: 0,
        t_k,
        t_k1,
        x_k: x_k.to_vec(),
        x_k1: x_k1.to_vec(),
        y_k,
        y_k1,
        eta_k,
        eta_k1,
        zeta: ansatz.with_params(solution.p.clone())?,
        p_star: solution.p,
        eta_star: solution.trajectory,
        map: *map,
        bvp_residual: solution.residual,
        newton_iterations: solution.iterations,
        order: r,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ConvergedAtStart,
    Converged,
    MaxIter,
    /// Window `k` could not be planned or simulated; the log stops before it.
    Failed { k: usize, error: Error },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::ConvergedAtStart => "converged_at_start",
            Termination::Converged => "converged",
            Termination::MaxIter => "max_iter",
            Termination::Failed { .. } => "failed",
        }
    }

    pub fn is_clean(&self) -> bool {
        matches!(self, Termination::Converged | Termination::ConvergedAtStart)
    }
}

/// One optimizer iterate and the window that realized it.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub t: f64,
    /// Optimizer iterate `x_k`.
    pub x: Vec<f64>,
    /// Simulated plant state at `t`.
    pub x_measured: Vec<f64>,
    /// `J(x_k)`.
    pub value: f64,
    /// Gradient norm at the measured state.
    pub grad_norm: f64,
    /// Fields below describe the window ending at this iterate; empty for k = 0.
    pub p_star: Vec<f64>,
    pub bvp_residual: Option<f64>,
    pub tracking_error: Option<f64>,
    pub newton_iterations: Option<usize>,
    pub chord_deviation: Option<f64>,
    pub max_abs_eta: Option<f64>,
    pub max_abs_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct EscLog {
    pub config: EscConfig,
    pub iterates: Vec<IterateRecord>,
    pub dense: Vec<DenseSample>,
    pub termination: Termination,
    /// Extremes of the simulated output at full integration resolution.
    pub y_range: (f64, f64),
}

impl EscLog {
    /// Number of completed transitions.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn final_iterate(&self) -> &IterateRecord {
        self.iterates.last().unwrap()
    }

    pub fn max_abs_y(&self) -> f64 {
        self.y_range.0.abs().max(self.y_range.1.abs())
    }

    /// Largest `|eta|` over the first `windows` windows.
    pub fn max_abs_eta(&self, windows: usize) -> f64 {
        self.iterates
            .iter()
            .skip(1)
            .take(windows)
            .filter_map(|r| r.max_abs_eta)
            .fold(0.0, f64::max)
    }
}

const CHORD_SAMPLES: usize = 1000;

/// Runs the extremum seeking loop until the gradient at the measured state
/// falls below `eps0`, `max_iter` windows have run, or a window fails.
pub fn run_esc<P: NormalFormPlant + ?Sized>(
    plant: &P,
    oracle: &PerformanceOracle,
    set: &ConstraintSet,
    cfg: &EscConfig,
) -> Result<EscLog> {
    cfg.pgd.validate()?;
    cfg.sim.validate()?;
    cfg.bvp.integrator.validate()?;
    check_dim(plant.state_dim(), cfg.x0.len())?;
    check_dim(set.dim(), cfg.x0.len())?;
    if !(cfg.reference.delta_k > 0.0) {
        return Err(Error::InvalidArgument("delta_k must be positive".into()));
    }
    if !(cfg.bvp.tol > 0.0) || cfg.bvp.max_iter == 0 {
        return Err(Error::InvalidArgument("bvp tolerance and iteration cap must be positive".into()));
    }
    let map = cfg.reference.map;
    map.saturate_inverse(plant.output(&cfg.x0))?;

    let mut x_meas = cfg.x0.clone();
    let mut t = cfg.t0;
    let mut grad = oracle.gradient(&x_meas)?;
    let y0 = plant.output(&x_meas);
    let mut log = EscLog {
        config: cfg.clone(),
        iterates: vec![IterateRecord {
            k: 0,
            t,
            x: x_meas.clone(),
            x_measured: x_meas.clone(),
            value: oracle.value(&x_meas)?,
            grad_norm: crate::optimizer::norm2(&grad),
            p_star: Vec::new(),
            bvp_residual: None,
            tracking_error: None,
            newton_iterations: None,
            chord_deviation: None,
            max_abs_eta: None,
            max_abs_y: None,
        }],
        dense: Vec::new(),
        termination: Termination::MaxIter,
        y_range: (y0, y0),
    };

    if log.iterates[0].grad_norm < cfg.pgd.eps0 {
        log.termination = Termination::ConvergedAtStart;
        log.dense.push(DenseSample {
            t,
            x: x_meas.clone(),
            u: 0.0,
            y: y0,
            value: log.iterates[0].value,
        });
        return Ok(log);
    }

    let mut p_warm = cfg.p_init.clone();
    let full_res = IntegratorConfig {
        step: cfg.sim.step,
        store_every: 1,
    };

    for k in 0..cfg.pgd.max_iter {
        let window = (|| -> Result<_> {
            let x_next = crate::optimizer::step_with_gradient(&x_meas, &grad, oracle, set, &cfg.pgd.step_rule)?;
            let mut plan = plan_transition(
                plant,
                &map,
                &x_meas,
                &x_next,
                t,
                cfg.reference.delta_k,
                &cfg.reference.gamma,
                &p_warm,
                &cfg.bvp,
            )?;
            plan.k = k;
            // u* never fails inside the window; NaN would surface as NonFiniteState
            let response = simulate_plant(
                plant,
                |s| plan.control(plant, s).unwrap_or(f64::NAN),
                &x_meas,
                (plan.t_k, plan.t_k1),
                &full_res,
            )?;
            Ok((x_next, plan, response))
        })();

        let (x_next, plan, response) = match window {
            Ok(w) => w,
            Err(error) => {
                log.termination = Termination::Failed {
                    k,
                    error: error.at_transition(k),
                };
                return Ok(log);
            }
        };

        let states = &response.states;
        let mut max_eta = 0.0_f64;
        let mut max_y = 0.0_f64;
        for (i, (s, x)) in states.iter().enumerate() {
            let y = response.outputs[i];
            log.y_range.0 = log.y_range.0.min(y);
            log.y_range.1 = log.y_range.1.max(y);
            max_y = max_y.max(y.abs());
            let (_, eta) = plant.phi(x);
            max_eta = eta.iter().fold(max_eta, |m, e| m.max(e.abs()));

            let last = i + 1 == states.len();
            if (i == 0 && k > 0) || !(i % cfg.sim.store_every == 0 || last) {
                continue;
            }
            log.dense.push(DenseSample {
                t: s,
                x: x.to_vec(),
                u: response.controls[i],
                y,
                value: oracle.value(x).unwrap_or(f64::NAN),
            });
        }

        let x_end = response.final_state().to_vec();
        let tracking = x_end
            .iter()
            .zip(&x_next)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));

        grad = match oracle.gradient(&x_end) {
            Ok(g) => g,
            Err(error) => {
                log.termination = Termination::Failed {
                    k,
                    error: error.at_transition(k),
                };
                return Ok(log);
            }
        };
        let grad_norm = crate::optimizer::norm2(&grad);
        let chord = plan.chord_deviation(CHORD_SAMPLES).ok();

        log.iterates.push(IterateRecord {
            k: k + 1,
            t: plan.t_k1,
            value: oracle.value(&x_next).unwrap_or(f64::NAN),
            x: x_next,
            x_measured: x_end.clone(),
            grad_norm,
            p_star: plan.p_star.clone(),
            bvp_residual: Some(plan.bvp_residual),
            tracking_error: Some(tracking),
            newton_iterations: Some(plan.newton_iterations),
            chord_deviation: chord,
            max_abs_eta: Some(max_eta),
            max_abs_y: Some(max_y),
        });

        p_warm = plan.p_star;
        t = plan.t_k1;
        x_meas = x_end;

        if grad_norm < cfg.pgd.eps0 {
            log.termination = Termination::Converged;
            return Ok(log);
        }
    }
    log.termination = Termination::MaxIter;
    Ok(log)
}

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};

/// Fixed-step classical Runge-Kutta settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    /// Keep every `store_every`-th step; the final point is always kept.
    pub store_every: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            store_every: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn new(step: f64) -> Result<Self> {
        let cfg = Self {
            step,
            store_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_store_every(mut self, store_every: usize) -> Self {
        self.store_every = store_every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "integration step must be positive, got {}",
                self.step
            )));
        }
        if self.store_every == 0 {
            return Err(Error::InvalidArgument("store_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps covering `span`; a trailing partial step is allowed.
    pub(crate) fn step_count(&self, span: f64) -> usize {
        let ratio = span / self.step;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            (nearest as usize).max(1)
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Runs RK4 over `t_span`, calling `visit(step_index, t, v, dv)` at every
/// grid point. `dv` is the right-hand side evaluated at `(t, v)`.
pub(crate) fn rk4_sweep<F, V>(
    rhs: &F,
    t_span: (f64, f64),
    v0: &[f64],
    cfg: &IntegratorConfig,
    mut visit: V,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    V: FnMut(usize, f64, &[f64], &[f64]),
{
    cfg.validate()?;
    let (ta, tb) = t_span;
    if !(tb > ta) {
        return Err(Error::InvalidArgument(format!(
            "integration interval must satisfy t_b > t_a, got [{ta}, {tb}]"
        )));
    }
    if v0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: ta });
    }

    let dim = v0.len();
    let steps = cfg.step_count(tb - ta);
    let mut v = v0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];

    let mut t = ta;
    for i in 0..steps {
        let t_next = if i + 1 == steps {
            tb
        } else {
            ta + (i + 1) as f64 * cfg.step
        };
        let h = t_next - t;

        rhs(t, &v, &mut k1);
        visit(i, t, &v, &k1);

        for j in 0..dim {
            tmp[j] = v[j] + 0.5 * h * k1[j];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2);
        for j in 0..dim {
            tmp[j] = v[j] + 0.5 * h * k2[j];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3);
        for j in 0..dim {
            tmp[j] = v[j] + h * k3[j];
        }
        rhs(t_next, &tmp, &mut k4);
        for j in 0..dim {
            v[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { t: t_next });
        }
        t = t_next;
    }

    rhs(t, &v, &mut k1);
    if k1.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteState { t });
    }
    visit(steps, t, &v, &k1);
    Ok(v)
}

/// Integrates `v' = rhs(t, v)` from `v0` over `t_span` with fixed-step RK4.
pub fn integrate_ivp<F>(
    rhs: F,
    t_span: (f64, f64),
    v0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = v0.len();
    let steps = cfg.step_count((t_span.1 - t_span.0).max(0.0));
    let capacity = steps / cfg.store_every.max(1) + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut values = Vec::with_capacity(capacity * dim);
    let mut derivs = Vec::with_capacity(capacity * dim);

    rk4_sweep(&rhs, t_span, v0, cfg, |i, t, v, dv| {
        if i % cfg.store_every == 0 || i == steps {
            times.push(t);
            values.extend_from_slice(v);
            derivs.extend_from_slice(dv);
        }
    })?;
    Trajectory::new(dim, times, values, derivs)
}

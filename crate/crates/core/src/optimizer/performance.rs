use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Scalar = dyn Fn(&[f64]) -> f64 + Send + Sync;
type Vector = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Measured performance `z = J(x)` with an optional analytic gradient.
///
/// Without an analytic gradient, the gradient is estimated by central
/// differences of half-width `fd_step`.
#[derive(Clone)]
pub struct PerformanceOracle {
    eval: Arc<Scalar>,
    grad: Option<Arc<Vector>>,
    fd_step: f64,
}

impl fmt::Debug for PerformanceOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerformanceOracle")
            .field("analytic_gradient", &self.grad.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl PerformanceOracle {
    pub const DEFAULT_FD_STEP: f64 = 1e-6;

    pub fn new<F>(eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            grad: None,
            fd_step: Self::DEFAULT_FD_STEP,
        }
    }

    pub fn with_gradient<G>(mut self, grad: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// Drops any analytic gradient, forcing finite differences.
    pub fn measured_only(mut self) -> Self {
        self.grad = None;
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let z = (self.eval)(x);
        if z.is_finite() {
            Ok(z)
        } else {
            Err(Error::NonFiniteValue { x: x.to_vec() })
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        estimate_gradient(self, x)
    }
}

pub fn estimate_gradient(oracle: &PerformanceOracle, x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { x: x.to_vec() });
    }
    if let Some(grad) = &oracle.grad {
        let g = grad(x);
        if g.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { x: x.to_vec() });
        }
        return Ok(g);
    }

    let h = oracle.fd_step;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = oracle.value(&probe)?;
        probe[i] = x[i] - h;
        let minus = oracle.value(&probe)?;
        probe[i] = x[i];
        g.push((plus - minus) / (2.0 * h));
    }
    Ok(g)
}

/// `J(x) = 100 (x2 - x1^2)^2 + (1 - x1)^2`, with its analytic gradient.
pub fn rosenbrock() -> PerformanceOracle {
    PerformanceOracle::new(|x| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)).with_gradient(|x| {
        let valley = x[1] - x[0] * x[0];
        vec![-400.0 * x[0] * valley - 2.0 * (1.0 - x[0]), 200.0 * valley]
    })
}

//! Constrained reference outputs.
//!
//! An unconstrained virtual trajectory `zeta(t, p)` is pushed through a
//! sigmoid whose range is the relaxed output interval, so the reference
//! `y* = sat(zeta)` respects the bounds for every parameter value. The
//! virtual trajectory is a polynomial in normalized time that meets its two
//! endpoint values identically and carries one free parameter per internal
//! state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest output derivative order supported by [`reference_output`].
pub const MAX_ORDER: usize = 3;

/// Sigmoid `y = upper - (upper - lower) / (1 + exp(steepness * zeta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationMap {
    lower: f64,
    upper: f64,
    steepness: f64,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl SaturationMap {
    /// Asymptotic bounds `[y_min - delta_y, y_max + delta_y]`, with the
    /// default steepness `4 / (upper - lower)`.
    pub fn new(y_min: f64, y_max: f64, delta_y: f64) -> Result<Self> {
        if !(y_min < y_max) {
            return Err(Error::InvalidArgument(format!("need y_min < y_max, got [{y_min}, {y_max}]")));
        }
        if !(delta_y > 0.0) {
            return Err(Error::InvalidArgument(format!("delta_y must be positive, got {delta_y}")));
        }
        let (lower, upper) = (y_min - delta_y, y_max + delta_y);
        Self::from_asymptotes(lower, upper, 4.0 / (upper - lower))
    }

    pub fn from_asymptotes(lower: f64, upper: f64, steepness: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite lower < upper, got ({lower}, {upper})")));
        }
        if !(steepness > 0.0 && steepness.is_finite()) {
            return Err(Error::InvalidArgument(format!("steepness must be positive, got {steepness}")));
        }
        Ok(Self { lower, upper, steepness })
    }

    pub fn with_steepness(self, steepness: f64) -> Result<Self> {
        Self::from_asymptotes(self.lower, self.upper, steepness)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn steepness(&self) -> f64 {
        self.steepness
    }

    pub fn saturate(&self, zeta: f64) -> f64 {
        self.lower + (self.upper - self.lower) * logistic(self.steepness * zeta)
    }

    pub fn saturate_inverse(&self, y: f64) -> Result<f64> {
        if !(y > self.lower && y < self.upper) {
            return Err(Error::OutOfRange {
                value: y,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(((y - self.lower).ln() - (self.upper - y).ln()) / self.steepness)
    }

    /// `d^k y / d zeta^k` for k = 0..=3.
    fn derivatives(&self, zeta: f64) -> [f64; 4] {
        let s = self.steepness;
        let span = self.upper - self.lower;
        let sig = logistic(s * zeta);
        let d1 = sig * (1.0 - sig);
        let d2 = d1 * (1.0 - 2.0 * sig);
        let d3 = d1 * (1.0 - 6.0 * sig + 6.0 * sig * sig);
        [
            self.lower + span * sig,
            span * s * d1,
            span * s * s * d2,
            span * s * s * s * d3,
        ]
    }
}

/// Free functions mirroring the map's methods.
pub fn saturate(map: &SaturationMap, zeta: f64) -> f64 {
    map.saturate(zeta)
}

pub fn saturate_inverse(map: &SaturationMap, y: f64) -> Result<f64> {
    map.saturate_inverse(y)
}

/// Polynomial virtual trajectory over one transition window,
///
/// ```text
/// zeta(t, p) = zeta_k + a(p) tau + sum_i gamma_i p_i tau^(i+1),
/// a(p) = zeta_k1 - zeta_k - sum_i gamma_i p_i,   tau = (t - t_k) / delta_k
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzTrajectory {
    pub zeta_start: f64,
    pub zeta_end: f64,
    pub gamma: Vec<f64>,
    pub p: Vec<f64>,
    pub t_start: f64,
    pub duration: f64,
}

impl AnsatzTrajectory {
    pub fn new(
        zeta_start: f64,
        zeta_end: f64,
        gamma: Vec<f64>,
        p: Vec<f64>,
        t_start: f64,
        duration: f64,
    ) -> Result<Self> {
        if gamma.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: gamma.len(),
                found: p.len(),
            });
        }
        if gamma.is_empty() {
            return Err(Error::InvalidArgument("ansatz needs at least one free parameter".into()));
        }
        if let Some(g) = gamma.iter().find(|g| !(**g > 0.0)) {
            return Err(Error::InvalidArgument(format!("gamma entries must be positive, got {g}")));
        }
        if !(duration > 0.0) {
            return Err(Error::InvalidArgument(format!("transition duration must be positive, got {duration}")));
        }
        Ok(Self {
            zeta_start,
            zeta_end,
            gamma,
            p,
            t_start,
            duration,
        })
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn degree(&self) -> usize {
        self.gamma.len() + 1
    }

    pub fn with_params(&self, p: Vec<f64>) -> Result<Self> {
        Self::new(self.zeta_start, self.zeta_end, self.gamma.clone(), p, self.t_start, self.duration)
    }

    fn normalized_time(&self, t: f64) -> Result<f64> {
        let end = self.t_end();
        let slack = 1e-12 * (1.0 + self.t_start.abs().max(end.abs()));
        if !(t >= self.t_start - slack && t <= end + slack) {
            return Err(Error::OutOfDomain {
                t,
                start: self.t_start,
                end,
            });
        }
        Ok(((t - self.t_start) / self.duration).clamp(0.0, 1.0))
    }

    /// Fills `out[j]` with the j-th time derivative of `zeta(t, p)`, using
    /// `p` in place of the stored parameters.
    pub(crate) fn eval_with(&self, p: &[f64], t: f64, out: &mut [f64]) -> Result<()> {
        let tau = self.normalized_time(t)?;
        let weighted: f64 = self.gamma.iter().zip(p).map(|(g, p)| g * p).sum();
        let linear = self.zeta_end - self.zeta_start - weighted;
        let degree = self.degree();

        // coefficient of tau^i
        let coeff = |i: usize| -> f64 {
            match i {
                0 => self.zeta_start,
                1 => linear,
                _ => self.gamma[i - 2] * p[i - 2],
            }
        };

        let mut scale = 1.0;
        for (order, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            // Horner over d^order/dtau^order of sum c_i tau^i
            for i in (order..=degree).rev() {
                let falling: f64 = ((i - order + 1)..=i).map(|f| f as f64).product();
                acc = acc * tau + coeff(i) * falling;
            }
            *slot = acc * scale;
            scale /= self.duration;
        }
        Ok(())
    }

    /// `[zeta, zeta', ..., zeta^(order)]` at `t`.
    pub fn eval(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; order + 1];
        self.eval_with(&self.p, t, &mut out)?;
        Ok(out)
    }
}

pub fn ansatz_eval(ansatz: &AnsatzTrajectory, t: f64, order: usize) -> Result<Vec<f64>> {
    ansatz.eval(t, order)
}

/// Chain rule through the sigmoid; `out.len() - 1` is the derivative order.
pub(crate) fn reference_chain_with(
    map: &SaturationMap,
    ansatz: &AnsatzTrajectory,
    p: &[f64],
    t: f64,
    out: &mut [f64],
) -> Result<()> {
    let order = out.len() - 1;
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut z = [0.0; MAX_ORDER + 1];
    ansatz.eval_with(p, t, &mut z[..=order])?;
    let d = map.derivatives(z[0]);
    out[0] = d[0];
    if order >= 1 {
        out[1] = d[1] * z[1];
    }
    if order >= 2 {
        out[2] = d[2] * z[1] * z[1] + d[1] * z[2];
    }
    if order >= 3 {
        out[3] = d[3] * z[1].powi(3) + 3.0 * d[2] * z[1] * z[2] + d[1] * z[3];
    }
    Ok(())
}

/// `[y*, y*', ..., y*^(order)]` at `t` for `y* = sat(zeta(t, p))`.
pub fn reference_output(map: &SaturationMap, ansatz: &AnsatzTrajectory, t: f64, order: usize) -> Result<Vec<f64>> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut out = vec![0.0; order + 1];
    reference_chain_with(map, ansatz, &ansatz.p, t, &mut out)?;
    Ok(out)
}

/// Largest distance between `y*` and the straight chord joining its window
/// endpoints, over `samples + 1` evenly spaced times.
pub fn chord_deviation(map: &SaturationMap, ansatz: &AnsatzTrajectory, samples: usize) -> Result<f64> {
    let samples = samples.max(1);
    let y0 = map.saturate(ansatz.zeta_start);
    let y1 = map.saturate(ansatz.zeta_end);
    let mut worst = 0.0_f64;
    for i in 0..=samples {
        let tau = i as f64 / samples as f64;
        let t = ansatz.t_start + tau * ansatz.duration;
        let y = reference_output(map, ansatz, t, 0)?[0];
        worst = worst.max((y - (y0 + (y1 - y0) * tau)).abs());
    }
    Ok(worst)
}

//! Single-input single-output plants given in input-output normal form.
//!
//! A plant supplies both its original dynamics `x' = f(x) + g(x) u` and the
//! normal-form split into the output chain `xi = (y, y', ..., y^(r-1))` and
//! the internal state `eta`:
//!
//! ```text
//! y^(r) = alpha(xi, eta, u)
//! eta'  = beta(xi, eta, u)
//! ```
//!
//! together with the coordinate change `x <-> (xi, eta)`. The coordinate maps
//! are not derived here; [`check_round_trip`] and [`check_inversion`] let
//! callers validate a hand-derived plant.

use crate::error::{check_dim, Error, Result};
use crate::numerics::{integrate_ivp, IntegratorConfig, Trajectory};

pub trait NormalFormPlant {
    /// State dimension `n`.
    fn state_dim(&self) -> usize;

    /// Relative degree `r`, with `0 < r <= n`.
    fn relative_degree(&self) -> usize;

    fn internal_dim(&self) -> usize {
        self.state_dim() - self.relative_degree()
    }

    /// `y^(r)` as a function of the output chain, internal state and input.
    fn alpha(&self, xi: &[f64], eta: &[f64], u: f64) -> f64;

    /// Input that produces `y^(r) = y_r`.
    fn alpha_inv(&self, xi: &[f64], y_r: f64, eta: &[f64]) -> f64;

    /// Internal dynamics, written into `out`.
    fn beta(&self, xi: &[f64], eta: &[f64], u: f64, out: &mut [f64]);

    /// `x -> (xi, eta)`.
    fn phi(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>);

    /// `(xi, eta) -> x`.
    fn phi_inv(&self, xi: &[f64], eta: &[f64]) -> Vec<f64>;

    /// Original dynamics `f(x) + g(x) u`, written into `out`.
    fn rhs(&self, x: &[f64], u: f64, out: &mut [f64]);

    fn output(&self, x: &[f64]) -> f64;

    /// Hard output bounds `(y_min, y_max)`.
    fn output_bounds(&self) -> (f64, f64);
}

/// Two-state plant with cubic coupling:
///
/// ```text
/// x1' = -x2^3 + u
/// x2' = rho (2 x1^2 - 2 x2)
/// y   = x1
/// ```
///
/// Relative degree one with `y = x1`, `eta = x2`. The internal dynamics are
/// stable for `rho > 0` and unstable for `rho < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExamplePlant {
    rho: f64,
    bounds: (f64, f64),
}

impl ExamplePlant {
    pub fn new(rho: f64) -> Result<Self> {
        if rho == 0.0 || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be finite and non-zero, got {rho}")));
        }
        Ok(Self {
            rho,
            bounds: (-1.5, 1.5),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn has_stable_internal_dynamics(&self) -> bool {
        self.rho > 0.0
    }
}

impl NormalFormPlant for ExamplePlant {
    fn state_dim(&self) -> usize {
        2
    }

    fn relative_degree(&self) -> usize {
        1
    }

    fn alpha(&self, _xi: &[f64], eta: &[f64], u: f64) -> f64 {
        -eta[0].powi(3) + u
    }

    fn alpha_inv(&self, _xi: &[f64], y_r: f64, eta: &[f64]) -> f64 {
        y_r + eta[0].powi(3)
    }

    fn beta(&self, xi: &[f64], eta: &[f64], _u: f64, out: &mut [f64]) {
        out[0] = self.rho * (2.0 * xi[0] * xi[0] - 2.0 * eta[0]);
    }

    fn phi(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![x[0]], vec![x[1]])
    }

    fn phi_inv(&self, xi: &[f64], eta: &[f64]) -> Vec<f64> {
        vec![xi[0], eta[0]]
    }

    fn rhs(&self, x: &[f64], u: f64, out: &mut [f64]) {
        out[0] = -x[1].powi(3) + u;
        out[1] = self.rho * (2.0 * x[0] * x[0] - 2.0 * x[1]);
    }

    fn output(&self, x: &[f64]) -> f64 {
        x[0]
    }

    fn output_bounds(&self) -> (f64, f64) {
        self.bounds
    }
}

/// Splits `x` into the output chain and the internal state.
pub fn to_normal<P: NormalFormPlant + ?Sized>(plant: &P, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(plant.state_dim(), x.len())?;
    let (xi, eta) = plant.phi(x);
    check_dim(plant.relative_degree(), xi.len())?;
    check_dim(plant.internal_dim(), eta.len())?;
    Ok((xi, eta))
}

pub fn from_normal<P: NormalFormPlant + ?Sized>(plant: &P, xi: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    check_dim(plant.relative_degree(), xi.len())?;
    check_dim(plant.internal_dim(), eta.len())?;
    let x = plant.phi_inv(xi, eta);
    check_dim(plant.state_dim(), x.len())?;
    Ok(x)
}

/// Largest `|phi_inv(phi(x)) - x|` over the given states.
pub fn check_round_trip<P: NormalFormPlant + ?Sized>(plant: &P, states: &[Vec<f64>]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in states {
        let (xi, eta) = to_normal(plant, x)?;
        let back = from_normal(plant, &xi, &eta)?;
        for (a, b) in back.iter().zip(x) {
            worst = worst.max((a - b).abs());
        }
        worst = worst.max((xi[0] - plant.output(x)).abs());
    }
    Ok(worst)
}

/// Largest `|alpha(xi, eta, alpha_inv(xi, y_r, eta)) - y_r|` over the samples.
pub fn check_inversion<P: NormalFormPlant + ?Sized>(plant: &P, samples: &[(Vec<f64>, f64, Vec<f64>)]) -> f64 {
    samples
        .iter()
        .map(|(xi, y_r, eta)| (plant.alpha(xi, eta, plant.alpha_inv(xi, *y_r, eta)) - y_r).abs())
        .fold(0.0, f64::max)
}

/// Simulated plant response with derived output and input channels.
#[derive(Debug, Clone)]
pub struct PlantResponse {
    pub states: Trajectory,
    /// `y = h(x)` at each stored sample.
    pub outputs: Vec<f64>,
    /// `u(t)` at each stored sample.
    pub controls: Vec<f64>,
}

impl PlantResponse {
    pub fn final_state(&self) -> &[f64] {
        self.states.last()
    }
}

/// Integrates the original plant dynamics under the open-loop input `u`.
pub fn simulate_plant<P, U>(
    plant: &P,
    u: U,
    x0: &[f64],
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<PlantResponse>
where
    P: NormalFormPlant + ?Sized,
    U: Fn(f64) -> f64,
{
    check_dim(plant.state_dim(), x0.len())?;
    let states = integrate_ivp(|t, x, dx| plant.rhs(x, u(t), dx), t_span, x0, cfg)?;
    let outputs = states.iter().map(|(_, x)| plant.output(x)).collect();
    let controls = states.times().iter().map(|&t| u(t)).collect();
    Ok(PlantResponse {
        states,
        outputs,
        controls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_coordinates() {
        let plant = ExamplePlant::new(1.0).unwrap();
        assert_eq!(to_normal(&plant, &[0.8, 3.0]).unwrap(), (vec![0.8], vec![3.0]));
        assert_eq!(from_normal(&plant, &[1.5], &[2.056]).unwrap(), vec![1.5, 2.056]);
    }

    #[test]
    fn dimension_errors() {
        let plant = ExamplePlant::new(1.0).unwrap();
        assert!(matches!(to_normal(&plant, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(from_normal(&plant, &[1.0, 2.0], &[0.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rho_must_be_nonzero() {
        assert!(ExamplePlant::new(0.0).is_err());
        assert!(ExamplePlant::new(-1.0).unwrap().rho() < 0.0);
        assert!(!ExamplePlant::new(-1.0).unwrap().has_stable_internal_dynamics());
    }

    #[test]
    fn equilibrium_stays_put() {
        let plant = ExamplePlant::new(1.0).unwrap();
        let resp = simulate_plant(&plant, |_| 0.0, &[0.0, 0.0], (0.0, 2.0), &IntegratorConfig::default()).unwrap();
        assert!(resp.states.iter().all(|(_, x)| x == [0.0, 0.0]));
        assert!(resp.outputs.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn normal_form_matches_original_dynamics() {
        let plant = ExamplePlant::new(-1.0).unwrap();
        let x = [0.3, -0.7];
        let u = 0.25;
        let mut dx = [0.0; 2];
        plant.rhs(&x, u, &mut dx);
        let (xi, eta) = plant.phi(&x);
        let mut deta = [0.0];
        plant.beta(&xi, &eta, u, &mut deta);
        assert_eq!(dx[0], plant.alpha(&xi, &eta, u));
        assert_eq!(dx[1], deta[0]);
    }
}

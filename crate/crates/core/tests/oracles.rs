//! Reference values computed by independent routes: closed forms,
//! bisection on a separately integrated residual, fine-step integration and
//! quadrature.

use noesc::esc::{plan_transition, BvpConfig};
use noesc::numerics::{integrate_ivp, solve_shooting, IntegratorConfig, ShootingProblem};
use noesc::plant::{simulate_plant, ExamplePlant, NormalFormPlant};
use noesc::trajectory::{reference_output, SaturationMap};

/// Frozen from an adaptive 8th-order integration (rtol 1e-13) plus Brent's
/// method on the scalar residual of the first transition.
const FIRST_TRANSITION_P: f64 = -21.98685802171293;

fn default_map() -> SaturationMap {
    SaturationMap::new(-1.5, 1.5, 0.5).unwrap().with_steepness(4.0).unwrap()
}

/// Midpoint-rule integration of the first-transition internal dynamics,
/// written without any library code.
fn first_transition_endpoint(p: f64, gamma: f64, steps: usize) -> f64 {
    let z0 = 0.25 * (2.8_f64 / 1.2).ln();
    let z1 = 0.25 * (3.5_f64 / 0.5).ln();
    let y = |t: f64| {
        let z = z0 + (z1 - z0 - gamma * p) * t + gamma * p * t * t;
        2.0 - 4.0 / (1.0 + (4.0 * z).exp())
    };
    let f = |t: f64, e: f64| 2.0 * y(t).powi(2) - 2.0 * e;
    let h = 1.0 / steps as f64;
    let mut e = 3.0;
    for i in 0..steps {
        let t = i as f64 * h;
        let mid = e + 0.5 * h * f(t, e);
        e += h * f(t + 0.5 * h, mid);
    }
    e
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo).abs() < 1e-13 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bisection_oracle_agrees_with_frozen_root() {
    let root = bisect(-100.0, -10.0, |p| first_transition_endpoint(p, 0.01, 20_000) - 2.056);
    assert!((root - FIRST_TRANSITION_P).abs() < 1e-6, "bisection root {root}");
}

#[test]
fn shooting_matches_first_transition_root() {
    let plant = ExamplePlant::new(1.0).unwrap();
    let plan = plan_transition(
        &plant,
        &default_map(),
        &[0.8, 3.0],
        &[1.5, 2.056],
        0.0,
        1.0,
        &[0.01],
        &[1.0],
        &BvpConfig::default(),
    )
    .unwrap();
    assert!(plan.bvp_residual < 1e-6);
    assert!((plan.p_star[0] - FIRST_TRANSITION_P).abs() < 1e-7, "p* = {}", plan.p_star[0]);
}

#[test]
fn shooting_affine_closed_form() {
    let prob = ShootingProblem::new(|_, e, p, out| out[0] = e[0] + p[0], (0.0, 1.0), vec![0.0], vec![1.0]).unwrap();
    let sol = solve_shooting(&prob, &[0.3], 1e-12, 20, &IntegratorConfig::new(1e-3).unwrap()).unwrap();
    assert!((sol.p[0] - 0.581_976_706_869_326_5).abs() < 1e-9);
}

#[test]
fn first_transition_lands_on_next_iterate() {
    let plant = ExamplePlant::new(1.0).unwrap();
    let plan = plan_transition(
        &plant,
        &default_map(),
        &[0.8, 3.0],
        &[1.5, 2.056],
        0.0,
        1.0,
        &[0.01],
        &[1.0],
        &BvpConfig::default(),
    )
    .unwrap();
    let resp = simulate_plant(
        &plant,
        |t| plan.control(&plant, t).unwrap(),
        &[0.8, 3.0],
        (0.0, 1.0),
        &IntegratorConfig::new(1e-3).unwrap(),
    )
    .unwrap();
    let end = resp.final_state();
    assert!((end[0] - 1.5).abs() < 1e-3 && (end[1] - 2.056).abs() < 1e-3, "{end:?}");
}

#[test]
fn free_response_matches_fine_step_oracle() {
    let plant = ExamplePlant::new(1.0).unwrap();
    let resp = simulate_plant(&plant, |_| 0.0, &[0.0, 1.0], (0.0, 1.0), &IntegratorConfig::new(1e-3).unwrap()).unwrap();

    // explicit midpoint with step 1e-6
    let steps = 1_000_000;
    let h = 1.0 / steps as f64;
    let f = |x: [f64; 2]| [-x[1].powi(3), 2.0 * x[0] * x[0] - 2.0 * x[1]];
    let mut x = [0.0, 1.0];
    for _ in 0..steps {
        let k = f(x);
        let mid = [x[0] + 0.5 * h * k[0], x[1] + 0.5 * h * k[1]];
        let k2 = f(mid);
        x = [x[0] + h * k2[0], x[1] + h * k2[1]];
    }
    let end = resp.final_state();
    assert!((end[0] - x[0]).abs() < 1e-9 && (end[1] - x[1]).abs() < 1e-9, "{end:?} vs {x:?}");
}

/// `y' = u`, `eta' = -eta + y`: relative degree one with linear internal
/// dynamics, so the internal state has a variation-of-constants form.
struct LinearChain;

impl NormalFormPlant for LinearChain {
    fn state_dim(&self) -> usize {
        2
    }
    fn relative_degree(&self) -> usize {
        1
    }
    fn alpha(&self, _xi: &[f64], _eta: &[f64], u: f64) -> f64 {
        u
    }
    fn alpha_inv(&self, _xi: &[f64], y_r: f64, _eta: &[f64]) -> f64 {
        y_r
    }
    fn beta(&self, xi: &[f64], eta: &[f64], _u: f64, out: &mut [f64]) {
        out[0] = -eta[0] + xi[0];
    }
    fn phi(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![x[0]], vec![x[1]])
    }
    fn phi_inv(&self, xi: &[f64], eta: &[f64]) -> Vec<f64> {
        vec![xi[0], eta[0]]
    }
    fn rhs(&self, x: &[f64], u: f64, out: &mut [f64]) {
        out[0] = u;
        out[1] = -x[1] + x[0];
    }
    fn output(&self, x: &[f64]) -> f64 {
        x[0]
    }
    fn output_bounds(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
}

#[test]
fn linear_plant_variation_of_constants() {
    let plant = LinearChain;
    let map = SaturationMap::new(-1.0, 1.0, 0.5).unwrap();
    let (x_k, x_k1) = ([0.2, 0.0], [-0.4, 0.3]);
    let (t_k, delta) = (2.0, 1.5);
    let plan = plan_transition(&plant, &map, &x_k, &x_k1, t_k, delta, &[0.5], &[0.0], &BvpConfig::default()).unwrap();

    // eta(t_k1) = e^{-delta} eta_k + int_{t_k}^{t_k1} e^{-(t_k1 - s)} y*(s) ds, composite Simpson
    let n = 20_000;
    let h = delta / n as f64;
    let integrand = |s: f64| (-(t_k + delta - s)).exp() * reference_output(&map, &plan.zeta, s, 0).unwrap()[0];
    let mut sum = integrand(t_k) + integrand(t_k + delta);
    for i in 1..n {
        sum += integrand(t_k + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let eta_end = (-delta).exp() * x_k[1] + sum * h / 3.0;
    assert!((eta_end - x_k1[1]).abs() < 1e-7, "quadrature endpoint {eta_end}");

    let resp = simulate_plant(
        &plant,
        |t| plan.control(&plant, t).unwrap(),
        &x_k,
        (t_k, t_k + delta),
        &IntegratorConfig::new(1e-3).unwrap(),
    )
    .unwrap();
    let end = resp.final_state();
    assert!((end[0] - x_k1[0]).abs() < 1e-9 && (end[1] - x_k1[1]).abs() < 1e-7, "{end:?}");
}

#[test]
fn zero_length_transition() {
    let plant = ExamplePlant::new(1.0).unwrap();
    let x = [1.0, 1.0];
    let plan = plan_transition(&plant, &default_map(), &x, &x, 0.0, 1.0, &[0.01], &[0.0], &BvpConfig::default()).unwrap();
    assert!(plan.bvp_residual < 1e-8);
    assert!((plan.eta_star.last()[0] - 1.0).abs() < 1e-8);
    // equilibrium: y = 1, eta = y^2 is a fixed point, so p stays at zero
    assert!(plan.p_star[0].abs() < 1e-6);
    assert!((plan.reference(0.5).unwrap()[0] - 1.0).abs() < 1e-8);
}

#[test]
fn rk4_endpoint_accuracy() {
    let traj = integrate_ivp(|_, v, dv| dv[0] = -2.0 * v[0], (0.0, 1.0), &[1.0], &IntegratorConfig::new(1e-3).unwrap())
        .unwrap();
    assert!((traj.last()[0] - 0.135_335_283_236_612_7).abs() < 1e-10);
}

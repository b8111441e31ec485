//! Single shooting on a two-point problem with a closed-form answer:
//! `eta' = eta + p`, `eta(0) = 0`, `eta(1) = 1` gives `p = 1 / (e - 1)`.

use noesc::numerics::{solve_shooting, IntegratorConfig, ShootingProblem};

fn main() -> noesc::Result<()> {
    let prob = ShootingProblem::new(|_, eta, p, out| out[0] = eta[0] + p[0], (0.0, 1.0), vec![0.0], vec![1.0])?;
    let sol = solve_shooting(&prob, &[0.0], 1e-12, 20, &IntegratorConfig::new(1e-3)?)?;
    let exact = 1.0 / (std::f64::consts::E - 1.0);
    println!("p = {:.15}  exact {:.15}", sol.p[0], exact);
    println!("residual {:.2e} after {} Newton steps", sol.residual, sol.iterations);
    Ok(())
}

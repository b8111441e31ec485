//! Plans one transition between two optimizer iterates and replays it on
//! the plant.

use noesc::esc::{plan_transition, BvpConfig};
use noesc::numerics::IntegratorConfig;
use noesc::plant::{simulate_plant, ExamplePlant};
use noesc::trajectory::SaturationMap;

fn main() -> noesc::Result<()> {
    let plant = ExamplePlant::new(1.0)?;
    let map = SaturationMap::new(-1.5, 1.5, 0.5)?.with_steepness(4.0)?;
    let (x_k, x_k1) = ([0.8, 3.0], [1.5, 2.056]);

    let plan = plan_transition(&plant, &map, &x_k, &x_k1, 0.0, 1.0, &[0.01], &[1.0], &BvpConfig::default())?;
    println!("p* = {:.10}  (residual {:.2e}, {} Newton steps)", plan.p_star[0], plan.bvp_residual, plan.newton_iterations);

    let resp = simulate_plant(&plant, |t| plan.control(&plant, t).unwrap(), &x_k, (0.0, 1.0), &IntegratorConfig::new(1e-3)?)?;
    let end = resp.final_state();
    println!("target  ({:.6}, {:.6})", x_k1[0], x_k1[1]);
    println!("reached ({:.6}, {:.6})", end[0], end[1]);
    Ok(())
}

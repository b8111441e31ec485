//! How the ansatz weight `gamma` changes the first planned transition.
//! With one free parameter only the product `gamma * p` enters the ansatz,
//! so gamma only rescales where Newton starts from (`p_init = 1`). The planned
//! output is the same until the start lands in the basin of another root.

use noesc::esc::{plan_transition, BvpConfig};
use noesc::plant::ExamplePlant;
use noesc::trajectory::SaturationMap;

fn main() -> noesc::Result<()> {
    let plant = ExamplePlant::new(1.0)?;
    let map = SaturationMap::new(-1.5, 1.5, 0.5)?.with_steepness(4.0)?;
    println!("{:>8} {:>16} {:>16} {:>14}", "gamma", "p*", "gamma*p*", "chord dev");
    for gamma in [0.01, 0.1, 1.0, 10.0] {
        let plan = plan_transition(&plant, &map, &[0.8, 3.0], &[1.5, 2.056], 0.0, 1.0, &[gamma], &[1.0], &BvpConfig::default())?;
        println!(
            "{gamma:8} {:16.10} {:16.12} {:14.10}",
            plan.p_star[0],
            gamma * plan.p_star[0],
            plan.chord_deviation(1000)?
        );
    }
    Ok(())
}

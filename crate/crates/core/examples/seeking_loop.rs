//! Runs the full extremum seeking loop from the default experiment.

use noesc::config::ExperimentConfig;

fn main() -> noesc::Result<()> {
    let log = ExperimentConfig::s4_default().build()?.run()?;
    for rec in log.iterates.iter().filter(|r| r.k % 250 == 0) {
        println!("k={:5}  x=({:.5}, {:.5})  J={:.4e}", rec.k, rec.x_measured[0], rec.x_measured[1], rec.value);
    }
    let last = log.final_iterate();
    println!(
        "{} after {} windows at ({:.6}, {:.6}); y stayed in [{:.3}, {:.3}]",
        log.termination.label(),
        log.iterations(),
        last.x_measured[0],
        last.x_measured[1],
        log.y_range.0,
        log.y_range.1
    );
    Ok(())
}

//! Same experiment with `rho = -1`, where the internal dynamics are unstable
//! and the planner has to keep them on target every window.

use noesc::config::ExperimentConfig;

fn main() -> noesc::Result<()> {
    for rho in [1.0, -1.0] {
        let mut cfg = ExperimentConfig::s4_default();
        cfg.plant.rho = rho;
        let log = cfg.build()?.run()?;
        let worst_bvp = log.iterates.iter().filter_map(|r| r.bvp_residual).fold(0.0, f64::max);
        let last = log.final_iterate();
        println!(
            "rho={rho:+}: {} windows, final ({:.5}, {:.5}), max |eta| first 5 windows {:.3}, worst BVP residual {:.1e}",
            log.iterations(),
            last.x_measured[0],
            last.x_measured[1],
            log.max_abs_eta(5),
            worst_bvp
        );
    }
    Ok(())
}

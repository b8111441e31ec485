//! Builds a saturated reference output and prints it with its derivatives.

use noesc::trajectory::{reference_output, AnsatzTrajectory, SaturationMap};

fn main() -> noesc::Result<()> {
    let map = SaturationMap::new(-1.5, 1.5, 0.5)?.with_steepness(4.0)?;
    let (y0, y1) = (0.8, 1.5);
    let ansatz = AnsatzTrajectory::new(map.saturate_inverse(y0)?, map.saturate_inverse(y1)?, vec![0.01], vec![-21.99], 0.0, 1.0)?;

    println!("{:>5} {:>10} {:>10} {:>10}", "t", "y", "y'", "y''");
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let y = reference_output(&map, &ansatz, t, 2)?;
        println!("{t:5.2} {:10.6} {:10.6} {:10.6}", y[0], y[1], y[2]);
    }
    Ok(())
}

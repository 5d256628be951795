//! Solve block parameters for momentum fractions and check the residuals.
//!
//! Run with `cargo run --example calibration`.

use splitshower::calibrate::{calibrate_dataset, calibrate_one, feasible_gamma1_max};

fn main() -> splitshower::Result<()> {
    println!("{:>7} {:>10} {:>10} {:>10} {:>10} {:>10}", "z", "gamma1", "gamma3", "max g1", "res z", "res C");
    for z in [0.51, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999, 1.0] {
        let r = calibrate_one(z)?;
        println!(
            "{z:>7} {:>10.6} {:>10.6} {:>10.6} {:>10.1e} {:>10.1e}",
            r.params.gamma1(),
            r.params.gamma3(),
            feasible_gamma1_max(z),
            r.residual_z,
            r.residual_c
        );
    }

    // z = 0.5 has no solution; values below one half are mirrored.
    let report = calibrate_dataset(&[0.3, 0.5, 0.75, 1.2])?;
    println!("\naccepted {}, reflected {}", report.records.len(), report.reflected);
    for r in &report.rejected {
        println!("rejected row {} (z = {}): {}", r.index, r.z, r.reason);
    }
    Ok(())
}

//! QCD spin density matrix of g -> gg and its concurrence.
//!
//! Run with `cargo run --example theory_check`.

use splitshower::entanglement::{c_qcd, concurrence_wootters};
use splitshower::qcd::{p_gg, rho_sc, HelicityAmplitudes};

fn main() -> splitshower::Result<()> {
    println!("{:>6} {:>10} {:>12} {:>12} {:>10}", "z", "P_gg", "C_QCD", "Wootters", "|M++|^2");
    for z in [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95] {
        let rho = rho_sc(z)?;
        let amps = HelicityAmplitudes::new(z)?;
        println!(
            "{z:>6.2} {:>10.4} {:>12.8} {:>12.8} {:>10.4}",
            p_gg(z)?,
            c_qcd(z)?.value(),
            concurrence_wootters(rho.matrix())?.value(),
            amps.same * amps.same
        );
    }
    let rho = rho_sc(0.5)?;
    println!("\nspin density matrix at z = 0.5:");
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| format!("{:8.4}", rho.matrix().get(i, j).re)).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}

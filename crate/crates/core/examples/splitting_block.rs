//! One splitting block: output state, wire expectations, shots.
//!
//! Run with `cargo run --example splitting_block -- 0.7`.

use splitshower::calibrate::solve_params;
use splitshower::entanglement::{c_circuit, c_qcd, concurrence_pure};
use splitshower::qsim::{bitstring, partial_trace, run_from_zero, sample_shots, to_density};
use splitshower::splitter::build_block;

fn main() -> splitshower::Result<()> {
    let z: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.7);
    let p = solve_params(z)?;
    println!("z = {z}: gamma1 = {:.6}, gamma2 = {:.6}, gamma3 = {:.6}", p.gamma1(), p.gamma2(), p.gamma3());

    let circuit = build_block(&p);
    let state = run_from_zero(&circuit);
    for (i, a) in state.amplitudes().iter().enumerate() {
        println!("  |{}>  {:+.6}", bitstring(i, 2), a.re);
    }
    println!("<sigma3> top = {:.6}, bottom = {:.6}", state.expect_sigma3(0)?, state.expect_sigma3(1)?);

    let rho_a = partial_trace(&to_density(&state), &[0])?;
    println!(
        "concurrence: simulated {:.8}, closed form {:.8}, QCD {:.8}",
        concurrence_pure(&rho_a)?.value(),
        c_circuit(p.gamma1(), p.gamma3())?.value(),
        c_qcd(z)?.value()
    );

    let counts = sample_shots(&state, 4096, 1)?;
    println!("4096 shots:");
    for (bits, n) in counts.iter() {
        println!("  {bits}: {n}");
    }
    Ok(())
}

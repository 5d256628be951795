//! Exact prong fractions of every composed circuit.
//!
//! Run with `cargo run --example topologies`.

use splitshower::calibrate::solve_params;
use splitshower::splitter::{build_topology, exact_fractions, ShowerTopology, TopologyKind};

fn main() -> splitshower::Result<()> {
    let zs = [0.8, 0.7, 0.9];
    let params: Vec<_> = zs.iter().map(|&z| solve_params(z)).collect::<Result<_, _>>()?;
    for kind in TopologyKind::ALL {
        let t = ShowerTopology::new(kind, params[..kind.n_splittings()].to_vec())?;
        let c = build_topology(&t, true)?;
        let f = exact_fractions(&t)?;
        println!(
            "{kind:<16} {} qubits, {:>2} gates, final {:?}, intermediate {:?}, sum {:.12}",
            c.n_qubits(),
            c.ops().len(),
            f.final_fractions.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
            f.intermediate.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>(),
            f.sum()
        );
    }
    Ok(())
}

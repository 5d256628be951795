//! Concurrence after the second splitting of a three-prong circuit.
//!
//! Run with `cargo run --example concurrence_scan -- scan.svg` to also
//! write a plot.

use splitshower::entanglement::c_qcd;
use splitshower::plot::{curves_svg, save, Style};
use splitshower::splitter::{composed_concurrence_scan, max_relative_deviation};

fn main() -> splitshower::Result<()> {
    let grid: Vec<f64> = (0..45).map(|i| 0.55 + 0.01 * i as f64).collect();
    let mut series = Vec::new();
    for z_first in [0.9924, 0.95, 0.8937] {
        let scan = composed_concurrence_scan(z_first, &grid)?;
        println!("z_first = {z_first}: max relative deviation {:.3}%", 100.0 * max_relative_deviation(&scan));
        series.push((format!("circuit, z = {z_first}"), scan.iter().map(|p| (p.z_prime, p.concurrence_circuit)).collect::<Vec<_>>()));
    }
    if let Some(path) = std::env::args().nth(1) {
        let qcd: Vec<(f64, f64)> = grid.iter().map(|&z| (z, c_qcd(z).unwrap().value())).collect();
        let mut curves: Vec<(&str, &[(f64, f64)], Style)> =
            series.iter().map(|(l, p)| (l.as_str(), p.as_slice(), Style::Dots)).collect();
        curves.push(("QCD", &qcd, Style::Line));
        save(path.as_ref(), &curves_svg(&curves, "second-splitting concurrence", "z'", "concurrence"));
    }
    Ok(())
}

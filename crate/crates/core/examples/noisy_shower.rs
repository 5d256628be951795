//! Three-prong shower under readout and depolarizing noise, with and
//! without the high-side postprocessing.
//!
//! Run with `cargo run --release --example noisy_shower`.

use splitshower::calibrate::calibrate_dataset;
use splitshower::noise::{NoiseModel, RunBatch};
use splitshower::shower::{by_rank, rejection_rate, run_shower, Readout, ShowerConfig};
use splitshower::splitter::TopologyKind;
use splitshower::stats::mean;

fn main() -> splitshower::Result<()> {
    let zs: Vec<f64> = (0..200).map(|i| 0.55 + 0.44 * (i as f64 / 199.0).powf(0.5)).collect();
    let params: Vec<_> = calibrate_dataset(&zs)?.records.iter().map(|r| r.params).collect();
    let kind = TopologyKind::ThreeDominant;

    for (label, noise, readout) in [
        ("exact, raw", NoiseModel::noiseless(), Readout::Raw),
        ("noisy, raw", NoiseModel::default(), Readout::Raw),
        ("noisy, postprocessed", NoiseModel::default(), Readout::Postprocessed),
    ] {
        let cfg = ShowerConfig { kind, batch: RunBatch::new(500, 1024, 42)?, noise, readout };
        let records = run_shower(&params, &cfg)?;
        let truth: Vec<f64> = (0..3).map(|k| records.iter().map(|r| r.truth[k]).sum::<f64>() / records.len() as f64).collect();
        let means: Vec<String> = by_rank(&records, 3)
            .iter()
            .zip(&truth)
            .map(|(v, t)| format!("{:.4} ({:+.4})", mean(v), mean(v) - t))
            .collect();
        println!("{label:<22} rejected {:>5.1}%  means (bias) {}", 100.0 * rejection_rate(&records), means.join("  "));
    }
    Ok(())
}

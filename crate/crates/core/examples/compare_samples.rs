//! Does the two-prong circuit reproduce its input fractions?
//!
//! Run with `cargo run --release --example compare_samples`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use splitshower::calibrate::calibrate_dataset;
use splitshower::noise::{NoiseModel, RunBatch};
use splitshower::shower::{by_rank, run_shower, Readout, ShowerConfig};
use splitshower::splitter::TopologyKind;
use splitshower::stats::compare;

fn main() -> splitshower::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let beta = Beta::new(4.0, 1.5).unwrap();
    let zs: Vec<f64> = beta.sample_iter(&mut rng).filter(|&z: &f64| z > 0.5).take(1000).collect();
    let params: Vec<_> = calibrate_dataset(&zs)?.records.iter().map(|r| r.params).collect();

    for shots in [64, 1024, 16384] {
        let cfg = ShowerConfig {
            kind: TopologyKind::TwoProng,
            batch: RunBatch::new(1000, shots, 2)?,
            noise: NoiseModel::noiseless(),
            readout: Readout::Raw,
        };
        let leading = &by_rank(&run_shower(&params, &cfg)?, 2)[0];
        let r = compare(leading, &zs, 0.5, 1.0, 20)?;
        println!(
            "{shots:>6} shots: KS {:.4} (1% critical {:.4}), chi2 {:.1} over {} bins",
            r.ks_statistic, r.ks_critical_1pct, r.chi2, r.n_bins
        );
    }
    Ok(())
}

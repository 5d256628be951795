mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splitshower::calibrate::{calibrate_dataset, ParamDistribution};
use splitshower::io;
use splitshower::jets::{cluster, event_prong_fractions, ClusterSpec, ProngRecipe, PseudoJet};
use splitshower::noise::{NoiseModel, RunBatch};
use splitshower::shower::{run_shower, Readout, ShowerConfig};
use splitshower::splitter::TopologyKind;

#[test]
fn params_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let zs = [0.55, 0.7, 0.85, 0.999, 1.0];
    let report = calibrate_dataset(&zs).unwrap();
    let path = dir.path().join("p.csv");
    io::write_params(&path, &report.records).unwrap();
    let back = io::read_params(&path).unwrap();
    assert_eq!(back, report.records);
    let dist = ParamDistribution::new(back, "p.csv").unwrap();
    for (p, z) in dist.params().iter().zip(zs) {
        assert!((p.z() - z).abs() < 1e-8);
    }
}

#[test]
fn tampered_params_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.csv");
    std::fs::write(&path, "z,gamma1,gamma2,gamma3,residual_z,residual_c\n0.7,0.3,0.1,2.0,0,0\n").unwrap();
    assert!(io::read_params(&path).is_err());
}

#[test]
fn shower_runs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let params: Vec<_> = calibrate_dataset(&[0.6, 0.8, 0.95]).unwrap().records.iter().map(|r| r.params).collect();
    for kind in TopologyKind::ALL {
        let cfg = ShowerConfig {
            kind,
            batch: RunBatch::new(25, 256, 1).unwrap(),
            noise: NoiseModel::default(),
            readout: Readout::Postprocessed,
        };
        let records = run_shower(&params, &cfg).unwrap();
        let path = dir.path().join(format!("{kind}.csv"));
        io::write_runs(&path, &records, kind.n_prongs()).unwrap();
        let rows = io::read_runs(&path).unwrap();
        assert_eq!(rows.len(), records.len());
        for (row, rec) in rows.iter().zip(&records) {
            assert_eq!(row.fractions, rec.fractions, "{kind}");
        }
    }
}

#[test]
fn events_round_trip_and_cluster_like_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let events: Vec<Vec<PseudoJet>> = (0..20)
        .map(|_| {
            let n = rng.random_range(1..=6);
            common::random_event(&mut rng, n)
        })
        .collect();
    let path = dir.path().join("e.jsonl");
    io::write_events(&path, &events).unwrap();
    let back = io::read_events(&path).unwrap();
    assert_eq!(back.len(), events.len());
    let spec = ClusterSpec::cam_aachen(0.5).unwrap();
    for (a, b) in events.iter().zip(&back) {
        let got: Vec<[f64; 4]> = cluster(b, &spec).unwrap().iter().map(PseudoJet::momentum).collect();
        let want = common::brute_force(a, &spec);
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            assert!((0..4).all(|k| (g[k] - w[k]).abs() < 1e-9), "{g:?} vs {w:?}");
        }
    }
}

#[test]
fn boosted_two_prong_events_give_hard_fractions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let recipe = ProngRecipe::default();
    for _ in 0..20 {
        let ev = common::jet_event(&mut rng, 2);
        let f = event_prong_fractions(&ev, &recipe).unwrap().unwrap();
        assert_eq!(f.len(), 1);
        assert!((0.5..=1.0).contains(&f[0]));
    }
}

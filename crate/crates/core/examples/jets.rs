//! Cluster a synthetic event, decluster the leading jet, read fractions.
//!
//! Run with `cargo run --example jets`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitshower::jets::{
    cluster, cluster_to_tree, decluster, event_prong_fractions, filter_constituents, momentum_fractions, select,
    ClusterSpec, FractionMode, ProngRecipe, PseudoJet, SelectionCuts,
};

fn massless(pt: f64, y: f64, phi: f64) -> PseudoJet {
    PseudoJet::new(pt * phi.cos(), pt * phi.sin(), pt * y.sinh(), pt * y.cosh())
}

fn main() -> splitshower::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // three hard clusters sharing 600 GeV, plus soft forward particles
    let mut event = Vec::new();
    for (pt, y, phi) in [(330.0, 0.1, 0.0), (180.0, -0.15, 0.3), (90.0, 0.2, -0.25)] {
        for _ in 0..5 {
            event.push(massless(pt / 5.0, y + rng.random_range(-0.03..0.03), phi + rng.random_range(-0.03..0.03)));
        }
    }
    for _ in 0..20 {
        let y = rng.random_range(1.2..2.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        event.push(massless(rng.random_range(0.5..4.0), y, rng.random_range(-3.1..3.1)));
    }

    let cuts = SelectionCuts::default();
    let kept = filter_constituents(&event, &cuts);
    let jets = select(&cluster(&kept, &ClusterSpec::anti_kt(0.8)?)?, &cuts);
    let jet = &jets[0];
    println!("{} constituents kept, leading jet pT {:.1} GeV, eta {:.3}, {} leaves", kept.len(), jet.pt(), jet.eta(), jet.n_leaves());

    let leaves: Vec<PseudoJet> = jet.leaves().into_iter().cloned().collect();
    let tree = cluster_to_tree(&leaves, &ClusterSpec::cam_aachen(0.4)?)?;
    for n in 2..=3 {
        let prongs = decluster(&tree, n)?;
        let pts: Vec<String> = prongs.iter().map(|p| format!("{:.1}", p.pt())).collect();
        let f = momentum_fractions(&prongs, &tree, FractionMode::PerJetPt)?;
        println!("{n} prongs: pT [{}], fractions {:.4?}", pts.join(", "), f);
    }

    let recipe = ProngRecipe::default();
    println!("two-prong z (pair max): {:?}", event_prong_fractions(&event, &recipe)?);
    Ok(())
}

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use splitshower::jets::{Algorithm, ClusterSpec, PseudoJet};

pub fn massless(pt: f64, y: f64, phi: f64) -> PseudoJet {
    PseudoJet::new(pt * phi.cos(), pt * phi.sin(), pt * y.sinh(), pt * y.cosh())
}

pub fn random_event(rng: &mut impl Rng, n: usize) -> Vec<PseudoJet> {
    (0..n)
        .map(|_| massless(rng.random_range(1.0..100.0), rng.random_range(-1.0..1.0), rng.random_range(-PI..PI)))
        .collect()
}

/// A boosted jet made of a few hard clusters near (y, φ) = (0, 0) plus soft
/// debris elsewhere.
pub fn jet_event(rng: &mut impl Rng, prongs: usize) -> Vec<PseudoJet> {
    let mut out = Vec::new();
    for p in 0..prongs {
        let pt = 400.0 / (p + 1) as f64 * rng.random_range(0.7..1.3);
        let (y, phi) = (rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25));
        for _ in 0..4 {
            out.push(massless(pt / 4.0, y + rng.random_range(-0.02..0.02), phi + rng.random_range(-0.02..0.02)));
        }
    }
    for _ in 0..6 {
        out.push(massless(rng.random_range(1.0..5.0), rng.random_range(-2.0..2.0), rng.random_range(-PI..PI)));
    }
    out
}

fn sq(x: f64) -> f64 {
    x * x
}

fn delta_r2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let y = |p: &[f64; 4]| 0.5 * ((p[3] + p[2]) / (p[3] - p[2])).ln();
    let mut dphi = (a[1].atan2(a[0]) - b[1].atan2(b[0])).abs();
    if dphi > PI {
        dphi = 2.0 * PI - dphi;
    }
    sq(y(a) - y(b)) + sq(dphi)
}

/// Inclusive jets by recomputing every distance at every step, on plain
/// four-vectors; sorted by descending pT.
pub fn brute_force(constituents: &[PseudoJet], spec: &ClusterSpec) -> Vec<[f64; 4]> {
    let w = |p: &[f64; 4]| if spec.algorithm == Algorithm::AntiKt { 1.0 / (sq(p[0]) + sq(p[1])) } else { 1.0 };
    let mut active: Vec<(usize, [f64; 4])> = constituents.iter().map(PseudoJet::momentum).enumerate().collect();
    let mut next = constituents.len();
    let mut out = Vec::new();
    while !active.is_empty() {
        let mut best: Option<(f64, usize, usize, usize, Option<usize>)> = None;
        let mut consider = |d: f64, a: usize, b: usize, ia: usize, ib: Option<usize>| {
            if best.is_none_or(|(bd, ba, bb, _, _)| (d, a, b) < (bd, ba, bb)) {
                best = Some((d, a, b, ia, ib));
            }
        };
        for x in 0..active.len() {
            let (ix, px) = active[x];
            for (y, &(iy, py)) in active.iter().enumerate().skip(x + 1) {
                let d = w(&px).min(w(&py)) * delta_r2(&px, &py) / sq(spec.radius);
                consider(d, ix.min(iy), ix.max(iy), x, Some(y));
            }
            consider(w(&px), ix, usize::MAX, x, None);
        }
        let (_, _, _, x, y) = best.unwrap();
        match y {
            None => out.push(active.remove(x).1),
            Some(y) => {
                let (_, b) = active.remove(y);
                let (_, a) = active.remove(x);
                active.push((next, [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]));
                next += 1;
            }
        }
    }
    out.sort_by(|a, b| b[0].hypot(b[1]).total_cmp(&a[0].hypot(a[1])));
    out
}

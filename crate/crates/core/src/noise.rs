//! Noisy sampling of splitting circuits and the rules that turn per-run
//! counts into prong momentum fractions.
//!
//! The noise model is a two-qubit depolarizing channel after every
//! two-qubit gate plus independent per-bit readout flips. Counts always
//! cover every wire of the circuit.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qsim::{run_from_zero, sample_indices, to_density, Circuit, Counts, GateOp, StateVector, MAX_QUBITS};
use crate::rng::{run_stream, SimRng};
use crate::splitter::{ProngFractions, TopologyKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Probability that a `0` is read as `1`.
    pub readout_p01: f64,
    /// Probability that a `1` is read as `0`.
    pub readout_p10: f64,
    /// Depolarizing probability applied after each two-qubit gate.
    pub twoqubit_depol: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel { readout_p01: 0.02, readout_p10: 0.02, twoqubit_depol: 0.01 }
    }
}

impl NoiseModel {
    /// Readout flips must lie in `[0, 0.5)`; the depolarizing probability
    /// may go up to 1 (full depolarization).
    pub fn new(readout_p01: f64, readout_p10: f64, twoqubit_depol: f64) -> Result<Self> {
        for p in [readout_p01, readout_p10] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::OutOfRange { value: p, range: "[0, 0.5)" });
            }
        }
        if !(0.0..=1.0).contains(&twoqubit_depol) {
            return Err(Error::OutOfRange { value: twoqubit_depol, range: "[0, 1]" });
        }
        Ok(NoiseModel { readout_p01, readout_p10, twoqubit_depol })
    }

    pub fn noiseless() -> Self {
        NoiseModel { readout_p01: 0.0, readout_p10: 0.0, twoqubit_depol: 0.0 }
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_p01 > 0.0 || self.readout_p10 > 0.0
    }
}

/// How many independent executions and how many shots each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunBatch {
    pub runs: u64,
    pub shots_per_run: u64,
    pub seed: u64,
}

impl RunBatch {
    pub fn new(runs: u64, shots_per_run: u64, seed: u64) -> Result<Self> {
        if runs == 0 {
            return Err(Error::ParameterDomain("runs must be at least 1".into()));
        }
        if shots_per_run == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(RunBatch { runs, shots_per_run, seed })
    }
}

/// Basis-state probabilities at the end of the circuit under the
/// depolarizing part of `m`. Without depolarization the statevector path
/// is used.
pub fn noisy_probabilities(c: &Circuit, m: &NoiseModel) -> Result<Vec<f64>> {
    if c.n_qubits() > MAX_QUBITS {
        return Err(Error::TooManyQubits(c.n_qubits()));
    }
    if m.twoqubit_depol == 0.0 {
        return Ok(run_from_zero(c).probabilities());
    }
    let mut rho = to_density(&StateVector::zero(c.n_qubits())?);
    for op in c.ops() {
        rho.apply_gate(op)?;
        if let GateOp::Controlled { control, target, .. } = *op {
            rho.depolarize_pair(control, target, m.twoqubit_depol)?;
        }
    }
    Ok(rho.probabilities())
}

/// Flips each bit of a sampled basis index according to the readout model.
pub fn apply_readout<R: Rng + ?Sized>(index: usize, n_qubits: usize, m: &NoiseModel, rng: &mut R) -> usize {
    let mut out = index;
    for w in 0..n_qubits {
        let bit = 1usize << (n_qubits - 1 - w);
        let p = if index & bit == 0 { m.readout_p01 } else { m.readout_p10 };
        if rng.random::<f64>() < p {
            out ^= bit;
        }
    }
    out
}

/// One run's shots drawn from precomputed probabilities.
pub fn sample_run(probabilities: &[f64], n_qubits: usize, shots: u64, m: &NoiseModel, rng: &mut SimRng) -> Counts {
    let mut idx = sample_indices(probabilities, shots, rng);
    if m.has_readout_noise() {
        for i in idx.iter_mut() {
            *i = apply_readout(*i, n_qubits, m, rng);
        }
    }
    Counts::from_indices(n_qubits, idx)
}

/// Per-run counts of `c` under `m`. Run `i` draws from its own stream of
/// the batch seed, so a noiseless model reproduces plain sampling with the
/// same seed.
pub fn noisy_sample(c: &Circuit, m: &NoiseModel, b: &RunBatch) -> Result<Vec<Counts>> {
    let probs = noisy_probabilities(c, m)?;
    let n = c.n_qubits();
    Ok((0..b.runs)
        .into_par_iter()
        .map(|i| sample_run(&probs, n, b.shots_per_run, m, &mut run_stream(b.seed, i)))
        .collect())
}

/// Per-wire frequency of reading `0`.
pub fn ground_probabilities(counts: &Counts) -> Vec<f64> {
    let shots = counts.shots() as f64;
    (0..counts.n_qubits()).map(|w| counts.zeros_on(w) as f64 / shots).collect()
}

/// Per-wire `(n0 − n1)/shots`, the estimate of ⟨σ3⟩.
pub fn wire_expectations(counts: &Counts) -> Vec<f64> {
    ground_probabilities(counts).into_iter().map(|p0| 2.0 * p0 - 1.0).collect()
}

/// Result of turning one run into fractions.
#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Accepted(ProngFractions),
    /// Some fraction came out negative; the values are kept for inspection.
    Rejected(Vec<f64>),
}

impl RunOutcome {
    pub fn accepted(&self) -> Option<&ProngFractions> {
        match self {
            RunOutcome::Accepted(f) => Some(f),
            RunOutcome::Rejected(_) => None,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, RunOutcome::Accepted(_))
    }
}

/// Derives every wire's fraction from the blocks' top-wire readings: a
/// block's bottom wire gets its input fraction minus its top wire.
pub fn derive_from_high_side(high: &[f64], kind: TopologyKind) -> Vec<f64> {
    let mut v = vec![0.0; kind.n_qubits()];
    for b in kind.blocks() {
        let input = b.parent.map_or(1.0, |w| v[w]);
        v[b.top] = high[b.top];
        v[b.bottom] = input - v[b.top];
    }
    v
}

fn judge(values: Vec<f64>, kind: TopologyKind) -> RunOutcome {
    let f = ProngFractions::from_wire_values(kind, &values);
    if f.final_fractions.iter().chain(&f.intermediate).any(|&x| x < 0.0) {
        RunOutcome::Rejected(values)
    } else {
        RunOutcome::Accepted(f)
    }
}

/// High-side derivation without any shift: each block's top wire is read
/// and its bottom wire is the complement within the block's input.
pub fn fractions_from_counts(counts: &Counts, kind: TopologyKind) -> RunOutcome {
    judge(derive_from_high_side(&wire_expectations(counts), kind), kind)
}

/// Adds one binomial standard error `√(p̂0(1 − p̂0)/shots)` to every block's
/// top-wire estimate, capped at 1. Other wires are returned unchanged.
pub fn sigma_shift(expectations: &[f64], ground: &[f64], shots: u64, kind: TopologyKind) -> Vec<f64> {
    let mut out = expectations.to_vec();
    for b in kind.blocks() {
        let p = ground[b.top];
        let sigma = (p * (1.0 - p) / shots as f64).sqrt();
        out[b.top] = (out[b.top] + sigma).min(1.0);
    }
    out
}

/// Full postprocessing: shift, high-side derivation, rejection of negative
/// fractions and renormalization of the final fractions to unit sum.
pub fn postprocess(counts: &Counts, kind: TopologyKind) -> RunOutcome {
    let shifted = sigma_shift(&wire_expectations(counts), &ground_probabilities(counts), counts.shots(), kind);
    match judge(derive_from_high_side(&shifted, kind), kind) {
        RunOutcome::Accepted(mut f) => {
            let s = f.sum();
            if s > 0.0 {
                f.final_fractions.iter_mut().for_each(|x| *x /= s);
            }
            RunOutcome::Accepted(f)
        }
        rejected => rejected,
    }
}

/// Reads every prong wire directly, rejecting negative readings; no shift
/// and no renormalization.
pub fn raw_mode(counts: &Counts, kind: TopologyKind) -> RunOutcome {
    judge(wire_expectations(counts), kind)
}

//! Batches of independent circuit executions with parameters drawn from a
//! calibrated distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::{noisy_probabilities, postprocess, raw_mode, sample_run, NoiseModel, RunBatch, RunOutcome};
use crate::rng::run_stream;
use crate::splitter::{build_topology, ShowerTopology, SplittingParams, TopologyKind};

/// Which rule turns counts into fractions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Readout {
    /// Read each prong wire directly and drop unphysical runs.
    Raw,
    /// Shifted high-side estimators, derived complements, renormalization.
    Postprocessed,
}

impl fmt::Display for Readout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Readout::Raw => "raw",
            Readout::Postprocessed => "postprocessed",
        })
    }
}

impl FromStr for Readout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Readout::Raw),
            "post" | "postprocess" | "postprocessed" => Ok(Readout::Postprocessed),
            _ => Err(Error::ParameterDomain(format!("unknown readout mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShowerConfig {
    pub kind: TopologyKind,
    pub batch: RunBatch,
    pub noise: NoiseModel,
    pub readout: Readout,
}

/// One execution of the batch.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub run_id: u64,
    /// Final prong fractions, hardest first; `None` if the run was rejected.
    pub fractions: Option<Vec<f64>>,
    /// Analytic final fractions of the parameters this run used.
    pub truth: Vec<f64>,
}

/// Runs the batch. Run `i` uses stream `i` of the batch seed both to draw
/// its parameter sets (uniformly, with replacement) and to sample shots,
/// so the output does not depend on thread scheduling.
pub fn run_shower(params: &[SplittingParams], cfg: &ShowerConfig) -> Result<Vec<RunRecord>> {
    if params.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let kind = cfg.kind;
    (0..cfg.batch.runs)
        .into_par_iter()
        .map(|run_id| {
            let mut rng = run_stream(cfg.batch.seed, run_id);
            let chosen = (0..kind.n_splittings()).map(|_| params[rng.random_range(0..params.len())]).collect();
            let topology = ShowerTopology::new(kind, chosen)?;
            let circuit = build_topology(&topology, true)?;
            let probs = noisy_probabilities(&circuit, &cfg.noise)?;
            let counts = sample_run(&probs, circuit.n_qubits(), cfg.batch.shots_per_run, &cfg.noise, &mut rng);
            let outcome = match cfg.readout {
                Readout::Raw => raw_mode(&counts, kind),
                Readout::Postprocessed => postprocess(&counts, kind),
            };
            let fractions = match outcome {
                RunOutcome::Accepted(f) => Some(f.final_fractions),
                RunOutcome::Rejected(_) => None,
            };
            Ok(RunRecord { run_id, fractions, truth: topology.analytic_fractions().final_fractions })
        })
        .collect()
}

/// Accepted fractions grouped by prong rank (index 0 is the hardest).
pub fn by_rank(records: &[RunRecord], n_prongs: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); n_prongs];
    for f in records.iter().filter_map(|r| r.fractions.as_ref()) {
        for (k, &x) in f.iter().enumerate().take(n_prongs) {
            out[k].push(x);
        }
    }
    out
}

/// Share of runs that were rejected.
pub fn rejection_rate(records: &[RunRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().filter(|r| r.fractions.is_none()).count() as f64 / records.len() as f64
}

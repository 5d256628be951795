//! Quantum circuits for collinear parton splittings.
//!
//! The crate simulates the two-qubit splitting block and the multi-prong
//! circuits built from it, calibrates block parameters to momentum-fraction
//! data so that the circuit's entanglement equals the QCD concurrence, and
//! provides the jet-declustering and noisy-sampling pieces needed to compare
//! circuit output with data.

pub mod calibrate;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod jets;
pub mod noise;
pub mod plot;
pub mod qcd;
pub mod qsim;
pub mod rng;
pub mod shower;
pub mod splitter;
pub mod stats;

pub use error::{Error, Result};

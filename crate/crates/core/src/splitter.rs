//! The two-qubit splitting block `U_S`, the multi-prong circuits built by
//! chaining it, and closed-form predictions for their outputs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrate::solve_params;
use crate::entanglement::{c_qcd, check_gamma1, concurrence_wootters, ANGLE_SLACK};
use crate::error::{Error, Result};
use crate::qsim::{partial_trace, run_from_zero, to_density, Circuit, DensityMatrix, GateOp, SingleGate, C64};

/// One calibrated splitting: the angles of a `U_S` block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingParams {
    gamma1: f64,
    gamma2: f64,
    gamma3: f64,
}

impl SplittingParams {
    /// Builds the triple with `γ2` fixed by the unitarity constraint.
    pub fn new(gamma1: f64, gamma3: f64) -> Result<Self> {
        let gamma2 = gamma2_from_gamma1(gamma1)?;
        Self::from_angles(gamma1, gamma2, gamma3)
    }

    /// Accepts an explicit triple after checking the constraint
    /// `2cos(γ1)sin²(γ2/2) = 1` and the angle ranges.
    pub fn from_angles(gamma1: f64, gamma2: f64, gamma3: f64) -> Result<Self> {
        check_gamma1(gamma1)?;
        if !(FRAC_PI_2 - 1e-10..=PI + 1e-10).contains(&gamma2) {
            return Err(Error::ParameterDomain(format!("gamma2 = {gamma2} outside [pi/2, pi]")));
        }
        if !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&gamma3) {
            return Err(Error::ParameterDomain(format!("gamma3 = {gamma3} outside [0, pi]")));
        }
        let residual = 2.0 * gamma1.cos() * (gamma2 / 2.0).sin().powi(2) - 1.0;
        if residual.abs() > 1e-10 {
            return Err(Error::ParameterDomain(format!(
                "constraint 2cos(g1)sin^2(g2/2) = 1 violated by {residual}"
            )));
        }
        Ok(SplittingParams { gamma1, gamma2, gamma3 })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn gamma3(&self) -> f64 {
        self.gamma3
    }

    /// Momentum fraction carried by the block's top wire.
    pub fn z(&self) -> f64 {
        z_raw(self.gamma1, self.gamma3)
    }
}

/// `γ2 ∈ [π/2, π]` with `sin²(γ2/2) = 1/(2cos γ1)`.
pub fn gamma2_from_gamma1(gamma1: f64) -> Result<f64> {
    check_gamma1(gamma1)?;
    let g1 = gamma1.clamp(0.0, FRAC_PI_3);
    let s = (1.0 / (2.0 * g1.cos())).sqrt().min(1.0);
    Ok(2.0 * s.asin())
}

fn z_raw(gamma1: f64, gamma3: f64) -> f64 {
    0.5 * (1.0 + gamma3.cos() * (1.0 / gamma1.cos() - 2.0))
}

/// Expectation of σ3 on the top wire of a block.
pub fn z_of(gamma1: f64, gamma3: f64) -> Result<f64> {
    check_gamma1(gamma1)?;
    Ok(z_raw(gamma1, gamma3))
}

/// Off-diagonal kernel of the block's one-qubit reduced states.
pub fn xi(gamma1: f64, gamma3: f64) -> f64 {
    let c1 = gamma1.cos();
    0.5 * (2.0 * c1 - 1.0).max(0.0).sqrt() / c1 * ((gamma1 - gamma3) / 2.0).cos()
}

/// The splitting block on two wires; the input enters on wire 1.
pub fn build_block(p: &SplittingParams) -> Circuit {
    let mut c = Circuit::new(2).expect("two wires");
    let ops = [
        GateOp::ry(0, p.gamma2),
        GateOp::u3(1, p.gamma1, 0.0, FRAC_PI_2),
        GateOp::controlled(SingleGate::Ry(p.gamma3 - p.gamma1), 0, 1, false),
        GateOp::controlled(SingleGate::X, 1, 0, false),
    ];
    for op in ops {
        c.push(op).expect("valid block op");
    }
    c.set_measured_wires(vec![0, 1]).expect("distinct wires");
    c
}

/// The multi-prong circuits obtained by chaining splitting blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TopologyKind {
    TwoProng,
    /// The harder daughter of the first splitting splits again.
    ThreeDominant,
    /// The softer daughter of the first splitting splits again.
    ThreeSecondary,
    /// Both daughters of the first splitting split again.
    FourBalanced,
    /// The hardest prong splits at every step.
    FourDominant,
}

/// Placement of one block within a topology.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockPlacement {
    pub top: usize,
    pub bottom: usize,
    /// Wire of an earlier block whose state is copied onto `bottom` by a
    /// CNOT before this block runs. `None` for the first splitting.
    pub parent: Option<usize>,
}

const fn block(top: usize, bottom: usize, parent: Option<usize>) -> BlockPlacement {
    BlockPlacement { top, bottom, parent }
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 5] = [
        TopologyKind::TwoProng,
        TopologyKind::ThreeDominant,
        TopologyKind::ThreeSecondary,
        TopologyKind::FourBalanced,
        TopologyKind::FourDominant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::TwoProng => "two-prong",
            TopologyKind::ThreeDominant => "three-dominant",
            TopologyKind::ThreeSecondary => "three-secondary",
            TopologyKind::FourBalanced => "four-balanced",
            TopologyKind::FourDominant => "four-dominant",
        }
    }

    /// Blocks in splitting order.
    pub fn blocks(self) -> &'static [BlockPlacement] {
        const TWO: [BlockPlacement; 1] = [block(0, 1, None)];
        const THREE_DOM: [BlockPlacement; 2] = [block(2, 3, None), block(0, 1, Some(2))];
        const THREE_SEC: [BlockPlacement; 2] = [block(0, 1, None), block(2, 3, Some(1))];
        const FOUR_BAL: [BlockPlacement; 3] =
            [block(2, 3, None), block(0, 1, Some(2)), block(4, 5, Some(3))];
        const FOUR_DOM: [BlockPlacement; 3] =
            [block(4, 5, None), block(2, 3, Some(4)), block(0, 1, Some(2))];
        match self {
            TopologyKind::TwoProng => &TWO,
            TopologyKind::ThreeDominant => &THREE_DOM,
            TopologyKind::ThreeSecondary => &THREE_SEC,
            TopologyKind::FourBalanced => &FOUR_BAL,
            TopologyKind::FourDominant => &FOUR_DOM,
        }
    }

    pub fn n_splittings(self) -> usize {
        self.blocks().len()
    }

    pub fn n_qubits(self) -> usize {
        2 * self.n_splittings()
    }

    pub fn n_prongs(self) -> usize {
        self.n_splittings() + 1
    }

    /// Wires carrying final prongs, top to bottom.
    pub fn final_wires(self) -> &'static [usize] {
        match self {
            TopologyKind::TwoProng => &[0, 1],
            TopologyKind::ThreeDominant => &[0, 1, 3],
            TopologyKind::ThreeSecondary => &[0, 2, 3],
            TopologyKind::FourBalanced => &[0, 1, 4, 5],
            TopologyKind::FourDominant => &[0, 1, 3, 5],
        }
    }

    /// Wires holding a daughter that split again.
    pub fn intermediate_wires(self) -> &'static [usize] {
        match self {
            TopologyKind::TwoProng => &[],
            TopologyKind::ThreeDominant => &[2],
            TopologyKind::ThreeSecondary => &[1],
            TopologyKind::FourBalanced => &[2, 3],
            TopologyKind::FourDominant => &[2, 4],
        }
    }

    /// Momentum fraction on every wire, propagated multiplicatively from
    /// the per-splitting fractions `zs` (in splitting order).
    pub fn wire_fractions(self, zs: &[f64]) -> Result<Vec<f64>> {
        if zs.len() != self.n_splittings() {
            return Err(Error::TopologyParamMismatch {
                topology: self.name(),
                expected: self.n_splittings(),
                got: zs.len(),
            });
        }
        let mut v = vec![0.0; self.n_qubits()];
        for (b, &z) in self.blocks().iter().zip(zs) {
            let input = b.parent.map_or(1.0, |w| v[w]);
            v[b.top] = input * z;
            v[b.bottom] = input * (1.0 - z);
        }
        Ok(v)
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_lowercase();
        TopologyKind::ALL
            .into_iter()
            .find(|k| k.name().replace('-', "") == key)
            .ok_or_else(|| Error::ParameterDomain(format!("unknown topology '{s}'")))
    }
}

/// A topology together with one parameter set per splitting.
#[derive(Clone, Debug, PartialEq)]
pub struct ShowerTopology {
    kind: TopologyKind,
    params: Vec<SplittingParams>,
}

impl ShowerTopology {
    pub fn new(kind: TopologyKind, params: Vec<SplittingParams>) -> Result<Self> {
        if params.len() != kind.n_splittings() {
            return Err(Error::TopologyParamMismatch {
                topology: kind.name(),
                expected: kind.n_splittings(),
                got: params.len(),
            });
        }
        Ok(ShowerTopology { kind, params })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn params(&self) -> &[SplittingParams] {
        &self.params
    }

    /// Analytic momentum fraction on every wire.
    pub fn analytic_wire_fractions(&self) -> Vec<f64> {
        let zs: Vec<f64> = self.params.iter().map(SplittingParams::z).collect();
        self.kind.wire_fractions(&zs).expect("length checked at construction")
    }

    /// Analytic final and intermediate fractions.
    pub fn analytic_fractions(&self) -> ProngFractions {
        ProngFractions::from_wire_values(self.kind, &self.analytic_wire_fractions())
    }
}

/// Final prong fractions in descending order, plus the fractions carried
/// by intermediate (re-split) wires in wire order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProngFractions {
    pub final_fractions: Vec<f64>,
    pub intermediate: Vec<f64>,
}

impl ProngFractions {
    /// Sorts `final_fractions` into descending order.
    pub fn new(mut final_fractions: Vec<f64>, intermediate: Vec<f64>) -> Self {
        final_fractions.sort_by(|a, b| b.total_cmp(a));
        ProngFractions { final_fractions, intermediate }
    }

    /// Picks the final and intermediate wires of `kind` out of a per-wire vector.
    pub fn from_wire_values(kind: TopologyKind, values: &[f64]) -> Self {
        ProngFractions::new(
            kind.final_wires().iter().map(|&w| values[w]).collect(),
            kind.intermediate_wires().iter().map(|&w| values[w]).collect(),
        )
    }

    pub fn sum(&self) -> f64 {
        self.final_fractions.iter().sum()
    }
}

/// Lays out the topology's circuit. Final wires are measured; with
/// `measure_intermediate` the intermediate wires are measured too.
pub fn build_topology(t: &ShowerTopology, measure_intermediate: bool) -> Result<Circuit> {
    let kind = t.kind;
    let mut c = Circuit::new(kind.n_qubits())?;
    for (b, p) in kind.blocks().iter().zip(&t.params) {
        if let Some(w) = b.parent {
            c.push(GateOp::cnot(w, b.bottom))?;
        }
        c.append_mapped(&build_block(p), &[b.top, b.bottom])?;
    }
    let mut measured = kind.final_wires().to_vec();
    if measure_intermediate {
        measured.extend_from_slice(kind.intermediate_wires());
        measured.sort_unstable();
    }
    c.set_measured_wires(measured)?;
    Ok(c)
}

/// Noiseless ⟨σ3⟩ on every wire of the topology's circuit.
pub fn exact_wire_expectations(t: &ShowerTopology) -> Result<Vec<f64>> {
    let state = run_from_zero(&build_topology(t, true)?);
    (0..state.n_qubits()).map(|w| state.expect_sigma3(w)).collect()
}

/// Noiseless prong fractions read from the simulated state.
pub fn exact_fractions(t: &ShowerTopology) -> Result<ProngFractions> {
    Ok(ProngFractions::from_wire_values(t.kind, &exact_wire_expectations(t)?))
}

fn one_qubit(d00: f64, d11: f64, off: f64) -> DensityMatrix {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(d00, 0.0), C64::new(off, 0.0), C64::new(off, 0.0), C64::new(d11, 0.0)],
    );
    DensityMatrix::from_matrix_unchecked(m).expect("2x2")
}

/// Closed-form one-qubit reduced states of a single block's two wires.
pub fn predicted_block_reduced(p: &SplittingParams) -> (DensityMatrix, DensityMatrix) {
    let z = p.z();
    let rho_a = one_qubit(0.5 + z / 2.0, 0.5 - z / 2.0, xi(p.gamma1, p.gamma3));
    let rho_b = one_qubit(1.0 - z / 2.0, z / 2.0, xi(p.gamma1, PI - p.gamma3));
    (rho_a, rho_b)
}

/// Closed-form reduced states of the two prongs produced by the second
/// splitting of [`TopologyKind::ThreeDominant`], given the first
/// splitting's fraction `z` and the second block's parameters.
///
/// Diagonals follow from ⟨σ3⟩ = `z·z′` and `z·(1-z′)`. The lower prong's
/// off-diagonal carries a factor `z` relative to the single-block form,
/// the upper prong's does not.
pub fn predicted_reduced_ab(z: f64, p2: &SplittingParams) -> Result<(DensityMatrix, DensityMatrix)> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::OutOfRange { value: z, range: "[0, 1]" });
    }
    check_gamma1(p2.gamma1)?;
    let k = (1.0 / p2.gamma1.cos() - 2.0) * p2.gamma3.cos();
    let a0 = 0.5 * (1.0 + z / 2.0 * (1.0 + k));
    let b0 = 0.5 * (1.0 + z / 2.0 * (1.0 - k));
    let rho_a = one_qubit(a0, 1.0 - a0, xi(p2.gamma1, p2.gamma3));
    let rho_b = one_qubit(b0, 1.0 - b0, z * xi(p2.gamma1, PI - p2.gamma3));
    Ok((rho_a, rho_b))
}

/// Simulated reduced states on `wires` of a topology's output.
pub fn simulated_reduced(t: &ShowerTopology, wires: &[usize]) -> Result<DensityMatrix> {
    let rho = to_density(&run_from_zero(&build_topology(t, false)?));
    partial_trace(&rho, wires)
}

/// One point of a composed-circuit concurrence scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub z_prime: f64,
    pub concurrence_circuit: f64,
    pub concurrence_qcd: f64,
    pub relative_deviation: f64,
}

/// Calibrates both splittings of [`TopologyKind::ThreeDominant`] and
/// evaluates the Wootters concurrence of the second splitting's two prongs
/// for each `z′` in `z_grid`, next to the QCD value.
pub fn composed_concurrence_scan(z_first: f64, z_grid: &[f64]) -> Result<Vec<ScanPoint>> {
    let p1 = solve_params(z_first)?;
    z_grid
        .par_iter()
        .map(|&zp| {
            let p2 = solve_params(zp)?;
            let t = ShowerTopology::new(TopologyKind::ThreeDominant, vec![p1, p2])?;
            let rho = simulated_reduced(&t, &[0, 1])?;
            let circuit = concurrence_wootters(&rho)?.value();
            let qcd = c_qcd(zp)?.value();
            let relative_deviation = if qcd > 0.0 { (circuit - qcd).abs() / qcd } else { (circuit - qcd).abs() };
            Ok(ScanPoint { z_prime: zp, concurrence_circuit: circuit, concurrence_qcd: qcd, relative_deviation })
        })
        .collect()
}

/// Largest relative deviation along a scan.
pub fn max_relative_deviation(points: &[ScanPoint]) -> f64 {
    points.iter().map(|p| p.relative_deviation).fold(0.0, f64::max)
}

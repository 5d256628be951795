//! Dense statevector and density-matrix simulation for small registers.
//!
//! Wire 0 is the top wire of a circuit diagram and maps to the most
//! significant bit of a basis-state index, so on three qubits `|011⟩` is
//! index 3 with wire 0 in `|0⟩`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

pub type C64 = Complex64;

pub const MAX_QUBITS: usize = 8;

const NORM_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits(n_qubits));
    }
    Ok(())
}

/// One-qubit gate kinds used by the splitting circuits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SingleGate {
    /// `exp(-i·angle·Y/2)`.
    Ry(f64),
    U3 { theta: f64, phi: f64, lambda: f64 },
    X,
}

impl SingleGate {
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        match *self {
            SingleGate::Ry(angle) => {
                let (s, co) = (angle / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            SingleGate::U3 { theta, phi, lambda } => {
                let (s, co) = (theta / 2.0).sin_cos();
                [
                    [c(co, 0.0), -C64::from_polar(s, lambda)],
                    [C64::from_polar(s, phi), C64::from_polar(co, phi + lambda)],
                ]
            }
            SingleGate::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        }
    }
}

/// A gate placed on specific wires.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    Single {
        gate: SingleGate,
        wire: usize,
    },
    /// Applies `gate` to `target` when `control` reads `control_state`
    /// (`false` is an open-circle anti-control).
    Controlled {
        gate: SingleGate,
        control: usize,
        target: usize,
        control_state: bool,
    },
}

impl GateOp {
    pub fn ry(wire: usize, angle: f64) -> Self {
        GateOp::Single { gate: SingleGate::Ry(angle), wire }
    }

    pub fn u3(wire: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        GateOp::Single {
            gate: SingleGate::U3 { theta, phi, lambda },
            wire,
        }
    }

    pub fn x(wire: usize) -> Self {
        GateOp::Single { gate: SingleGate::X, wire }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Controlled {
            gate: SingleGate::X,
            control,
            target,
            control_state: true,
        }
    }

    pub fn controlled(gate: SingleGate, control: usize, target: usize, control_state: bool) -> Self {
        GateOp::Controlled {
            gate,
            control,
            target,
            control_state,
        }
    }

    pub fn wires(&self) -> Vec<usize> {
        match *self {
            GateOp::Single { wire, .. } => vec![wire],
            GateOp::Controlled { control, target, .. } => vec![control, target],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateOp::Controlled { .. })
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        for w in self.wires() {
            if w >= n_qubits {
                return Err(Error::WireOutOfRange { wire: w, n_qubits });
            }
        }
        if let GateOp::Controlled { control, target, .. } = *self {
            if control == target {
                return Err(Error::ControlIsTarget(control));
            }
        }
        Ok(())
    }
}

/// Matrix of a gate on its own wires: 2×2 for one-qubit gates, 4×4 for
/// controlled gates with the control as the more significant qubit.
pub fn gate_matrix(g: &GateOp) -> DMatrix<C64> {
    match *g {
        GateOp::Single { gate, .. } => {
            let m = gate.matrix();
            DMatrix::from_fn(2, 2, |r, col| m[r][col])
        }
        GateOp::Controlled {
            gate, control_state, ..
        } => {
            let m = gate.matrix();
            let active = usize::from(control_state);
            DMatrix::from_fn(4, 4, |r, col| {
                let (rc, rt) = (r >> 1, r & 1);
                let (cc, ct) = (col >> 1, col & 1);
                if rc != cc {
                    c(0.0, 0.0)
                } else if rc == active {
                    m[rt][ct]
                } else if rt == ct {
                    c(1.0, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            })
        }
    }
}

/// Applies `op` to the `2^n` amplitudes found at `offset + k·stride`.
/// With `conjugate` the complex conjugate of the gate matrix is used.
fn apply_kernel(buf: &mut [C64], offset: usize, stride: usize, n: usize, op: &GateOp, conjugate: bool) {
    let dim = 1usize << n;
    let bit = |w: usize| 1usize << (n - 1 - w);
    let (gate, target, control) = match *op {
        GateOp::Single { gate, wire } => (gate, wire, None),
        GateOp::Controlled {
            gate,
            control,
            target,
            control_state,
        } => (gate, target, Some((bit(control), control_state))),
    };
    let mut m = gate.matrix();
    if conjugate {
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e = e.conj();
            }
        }
    }
    let tbit = bit(target);
    for k in 0..dim {
        if k & tbit != 0 {
            continue;
        }
        if let Some((cbit, state)) = control {
            if (k & cbit != 0) != state {
                continue;
            }
        }
        let i0 = offset + k * stride;
        let i1 = offset + (k | tbit) * stride;
        let (a0, a1) = (buf[i0], buf[i1]);
        buf[i0] = m[0][0] * a0 + m[0][1] * a1;
        buf[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// Pure state of `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::OutOfRange {
                value: index as f64,
                range: "basis index below 2^n",
            });
        }
        let mut amplitudes = vec![c(0.0, 0.0); dim];
        amplitudes[index] = c(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps explicit amplitudes; their length must be a power of two and
    /// their norm 1.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::ParameterDomain(format!(
                "amplitude count {len} is not 2^n for n >= 1"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::ParameterDomain(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨σ3⟩` on one wire, straight from the amplitudes.
    pub fn expect_sigma3(&self, wire: usize) -> Result<f64> {
        if wire >= self.n_qubits {
            return Err(Error::WireOutOfRange {
                wire,
                n_qubits: self.n_qubits,
            });
        }
        let bit = 1usize << (self.n_qubits - 1 - wire);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    pub(crate) fn apply_in_place(&mut self, g: &GateOp) -> Result<()> {
        g.validate(self.n_qubits)?;
        apply_kernel(&mut self.amplitudes, 0, 1, self.n_qubits, g, false);
        Ok(())
    }
}

/// Applies one gate, returning the new state.
pub fn apply(state: &StateVector, g: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_in_place(g)?;
    Ok(out)
}

/// Ordered gate list on a fixed register, plus the wires read out at the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    measured_wires: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        Ok(Self {
            n_qubits,
            ops: Vec::new(),
            measured_wires: (0..n_qubits).collect(),
        })
    }

    pub fn push(&mut self, op: GateOp) -> Result<&mut Self> {
        op.validate(self.n_qubits)?;
        self.ops.push(op);
        Ok(self)
    }

    /// Appends every gate of `other`, relabelling its wire `k` as `wires[k]`.
    pub fn append_mapped(&mut self, other: &Circuit, wires: &[usize]) -> Result<&mut Self> {
        if wires.len() != other.n_qubits {
            return Err(Error::DimensionMismatch {
                circuit: other.n_qubits,
                state: wires.len(),
            });
        }
        for op in &other.ops {
            let mapped = match *op {
                GateOp::Single { gate, wire } => GateOp::Single {
                    gate,
                    wire: wires[wire],
                },
                GateOp::Controlled {
                    gate,
                    control,
                    target,
                    control_state,
                } => GateOp::Controlled {
                    gate,
                    control: wires[control],
                    target: wires[target],
                    control_state,
                },
            };
            self.push(mapped)?;
        }
        Ok(self)
    }

    pub fn set_measured_wires(&mut self, wires: Vec<usize>) -> Result<&mut Self> {
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.n_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    n_qubits: self.n_qubits,
                });
            }
            if wires[..i].contains(&w) {
                return Err(Error::ParameterDomain(format!("wire {w} measured twice")));
            }
        }
        self.measured_wires = wires;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn measured_wires(&self) -> &[usize] {
        &self.measured_wires
    }

    /// Full `2^n × 2^n` unitary, built column by column.
    pub fn unitary(&self) -> DMatrix<C64> {
        let dim = 1usize << self.n_qubits;
        let mut u = DMatrix::<C64>::zeros(dim, dim);
        for col in 0..dim {
            let mut psi = StateVector::basis(self.n_qubits, col).expect("valid register");
            for op in &self.ops {
                apply_kernel(&mut psi.amplitudes, 0, 1, self.n_qubits, op, false);
            }
            u.set_column(col, &nalgebra::DVector::from_vec(psi.amplitudes));
        }
        u
    }
}

/// Runs every gate of `c` on `input`, in order.
pub fn run(c: &Circuit, input: &StateVector) -> Result<StateVector> {
    if c.n_qubits != input.n_qubits {
        return Err(Error::DimensionMismatch {
            circuit: c.n_qubits,
            state: input.n_qubits,
        });
    }
    let mut state = input.clone();
    for op in &c.ops {
        apply_kernel(&mut state.amplitudes, 0, 1, state.n_qubits, op, false);
    }
    Ok(state)
}

/// Runs `c` on `|0…0⟩`.
pub fn run_from_zero(c: &Circuit) -> StateVector {
    run(c, &StateVector::zero(c.n_qubits).expect("circuit register is valid")).expect("dimensions match")
}

/// Density matrix over `n_qubits` qubits, same index convention as
/// [`StateVector`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Accepts a matrix after checking Hermiticity (1e-12), unit trace
    /// (1e-12) and positivity (eigenvalues ≥ -1e-10).
    pub fn from_matrix(elements: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(elements)?;
        rho.validate(1e-12, 1e-12, 1e-10)?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(elements: DMatrix<C64>) -> Result<Self> {
        let dim = elements.nrows();
        if elements.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidDensityMatrix(format!(
                "shape {}x{} is not 2^n square",
                elements.nrows(),
                elements.ncols()
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_register(n_qubits)?;
        Ok(Self { n_qubits, elements })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            elements: DMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn validate(&self, herm_tol: f64, trace_tol: f64, psd_tol: f64) -> Result<()> {
        let m = &self.elements;
        let dim = m.nrows();
        for r in 0..dim {
            for col in 0..dim {
                if (m[(r, col)] - m[(col, r)].conj()).norm() > herm_tol {
                    return Err(Error::InvalidDensityMatrix(format!("not Hermitian at ({r}, {col})")));
                }
            }
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::InvalidDensityMatrix(format!("trace is {tr}")));
        }
        if let Some(min) = self.eigenvalues().into_iter().reduce(f64::min) {
            if min < -psd_tol {
                return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min}")));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.elements[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.elements + self.elements.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.elements[(i, i)].re).collect()
    }

    /// `ρ → UρU†` for a gate embedded on its wires.
    pub fn apply_gate(&mut self, g: &GateOp) -> Result<()> {
        g.validate(self.n_qubits)?;
        let (n, dim) = (self.n_qubits, self.dim());
        // column-major storage: column j is contiguous, row i has stride dim.
        let buf = self.elements.as_mut_slice();
        for j in 0..dim {
            apply_kernel(buf, j * dim, 1, n, g, false);
        }
        for i in 0..dim {
            apply_kernel(buf, i, dim, n, g, true);
        }
        Ok(())
    }

    /// Two-qubit depolarizing channel `ρ → (1-p)ρ + p·(Tr_ab ρ) ⊗ I/4`.
    pub fn depolarize_pair(&mut self, a: usize, b: usize, p: f64) -> Result<()> {
        for w in [a, b] {
            if w >= self.n_qubits {
                return Err(Error::WireOutOfRange {
                    wire: w,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if a == b {
            return Err(Error::ControlIsTarget(a));
        }
        if p == 0.0 {
            return Ok(());
        }
        let n = self.n_qubits;
        let dim = self.dim();
        let (ba, bb) = (1usize << (n - 1 - a), 1usize << (n - 1 - b));
        let mask = ba | bb;
        let sub = |k: usize| (((k >> 1) & 1) * ba) | ((k & 1) * bb);
        let old = self.elements.clone();
        for r in 0..dim {
            for col in 0..dim {
                let mut mixed = c(0.0, 0.0);
                if r & mask == col & mask {
                    let (r0, c0) = (r & !mask, col & !mask);
                    for k in 0..4 {
                        mixed += old[(r0 | sub(k), c0 | sub(k))];
                    }
                    mixed *= 0.25;
                }
                self.elements[(r, col)] = old[(r, col)] * (1.0 - p) + mixed * p;
            }
        }
        Ok(())
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn to_density(state: &StateVector) -> DensityMatrix {
    let v = nalgebra::DVector::from_column_slice(&state.amplitudes);
    DensityMatrix {
        n_qubits: state.n_qubits,
        elements: &v * v.adjoint(),
    }
}

/// Reduced density matrix on `keep`, returned in ascending wire order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let n = rho.n_qubits;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&w) = kept.iter().find(|&&w| w >= n) {
        return Err(Error::WireOutOfRange { wire: w, n_qubits: n });
    }
    let traced: Vec<usize> = (0..n).filter(|w| !kept.contains(w)).collect();
    let bit = |w: usize| 1usize << (n - 1 - w);
    // full index from (kept bits, traced bits), both most-significant first.
    let compose = |k: usize, t: usize| {
        let mut idx = 0;
        for (pos, &w) in kept.iter().enumerate() {
            if (k >> (kept.len() - 1 - pos)) & 1 == 1 {
                idx |= bit(w);
            }
        }
        for (pos, &w) in traced.iter().enumerate() {
            if (t >> (traced.len() - 1 - pos)) & 1 == 1 {
                idx |= bit(w);
            }
        }
        idx
    };
    let kd = 1usize << kept.len();
    let td = 1usize << traced.len();
    let mut out = DMatrix::<C64>::zeros(kd, kd);
    for r in 0..kd {
        for col in 0..kd {
            let mut acc = c(0.0, 0.0);
            for t in 0..td {
                acc += rho.elements[(compose(r, t), compose(col, t))];
            }
            out[(r, col)] = acc;
        }
    }
    Ok(DensityMatrix {
        n_qubits: kept.len(),
        elements: out,
    })
}

/// `Tr(σ3 ρ_wire)` of the one-qubit reduced state.
pub fn expect_sigma3(rho: &DensityMatrix, wire: usize) -> Result<f64> {
    let r = partial_trace(rho, &[wire])?;
    Ok(r.elements[(0, 0)].re - r.elements[(1, 1)].re)
}

/// Shot histogram keyed by bitstring, wire 0 leftmost.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    n_qubits: usize,
    counts: BTreeMap<String, u64>,
}

impl Counts {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            counts: BTreeMap::new(),
        }
    }

    /// Builds counts from sampled basis indices.
    pub fn from_indices(n_qubits: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut tally = vec![0u64; 1 << n_qubits];
        for i in indices {
            tally[i] += 1;
        }
        let mut counts = Self::new(n_qubits);
        for (i, &n) in tally.iter().enumerate() {
            if n > 0 {
                counts.counts.insert(bitstring(i, n_qubits), n);
            }
        }
        counts
    }

    pub fn add(&mut self, bits: &str, n: u64) {
        *self.counts.entry(bits.to_string()).or_insert(0) += n;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn shots(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Number of shots in which `wire` read `0`.
    pub fn zeros_on(&self, wire: usize) -> u64 {
        self.counts
            .iter()
            .filter(|(k, _)| k.as_bytes().get(wire) == Some(&b'0'))
            .map(|(_, &v)| v)
            .sum()
    }
}

impl fmt::Display for Counts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.counts.iter().map(|(k, v)| format!("\"{k}\": {v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub fn bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|w| if (index >> (n_qubits - 1 - w)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Draws `shots` basis indices from a probability vector by inverse-CDF
/// lookup, one uniform variate per shot.
pub fn sample_indices<R: Rng + ?Sized>(probabilities: &[f64], shots: u64, rng: &mut R) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(probabilities.len());
    let mut acc = 0.0;
    for &p in probabilities {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let last = probabilities.len() - 1;
    (0..shots)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cdf.partition_point(|&x| x <= u).min(last)
        })
        .collect()
}

/// Multinomial shot sampling from `|amplitude|²`, deterministic in `seed`.
pub fn sample_shots(state: &StateVector, shots: u64, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut rng = rng::seeded(seed);
    Ok(sample_counts(state, shots, &mut rng))
}

pub fn sample_counts<R: Rng + ?Sized>(state: &StateVector, shots: u64, rng: &mut R) -> Counts {
    let idx = sample_indices(&state.probabilities(), shots, rng);
    Counts::from_indices(state.n_qubits, idx)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use proptest::prelude::*;

    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    fn plus() -> StateVector {
        StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap()
    }

    fn bell() -> StateVector {
        StateVector::from_amplitudes(vec![
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn ry_zero_is_identity() {
        let m = gate_matrix(&GateOp::ry(0, 0.0));
        assert!((m - DMatrix::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn u3_pi_0_pi_is_x() {
        let m = gate_matrix(&GateOp::u3(0, PI, 0.0, PI));
        let x = gate_matrix(&GateOp::x(0));
        for r in 0..2 {
            for col in 0..2 {
                assert!(close(m[(r, col)], x[(r, col)], 1e-15), "({r},{col}) = {}", m[(r, col)]);
            }
        }
    }

    #[test]
    fn controlled_x_is_cnot_permutation() {
        let m = gate_matrix(&GateOp::cnot(0, 1));
        let perm = [0, 1, 3, 2];
        for (col, &row) in perm.iter().enumerate() {
            for r in 0..4 {
                let want = if r == row { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(want, 0.0));
            }
        }
    }

    #[test]
    fn anti_control_equals_x_conjugation() {
        let u = SingleGate::Ry(0.7);
        let anti = gate_matrix(&GateOp::controlled(u, 0, 1, false));
        let ctrl = gate_matrix(&GateOp::controlled(u, 0, 1, true));
        // X on the control wire, identity on the target
        let x_i = DMatrix::from_fn(4, 4, |r, col| if r == col ^ 2 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let expect = &x_i * ctrl * &x_i;
        assert!((anti - expect).norm() < 1e-14);
    }

    #[test]
    fn apply_basic_gates() {
        let one = apply(&StateVector::zero(1).unwrap(), &GateOp::x(0)).unwrap();
        assert_eq!(one, StateVector::basis(1, 1).unwrap());

        let zz = apply(&StateVector::zero(2).unwrap(), &GateOp::cnot(0, 1)).unwrap();
        assert_eq!(zz, StateVector::basis(2, 0).unwrap());

        let s = apply(&StateVector::basis(2, 0b10).unwrap(), &GateOp::cnot(0, 1)).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11).unwrap());
    }

    #[test]
    fn apply_rejects_bad_wires() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(apply(&s, &GateOp::x(2)), Err(Error::WireOutOfRange { .. })));
        assert!(matches!(apply(&s, &GateOp::cnot(1, 1)), Err(Error::ControlIsTarget(1))));
    }

    #[test]
    fn run_empty_and_single() {
        let c2 = Circuit::new(2).unwrap();
        let zero = StateVector::zero(2).unwrap();
        assert_eq!(run(&c2, &zero).unwrap(), zero);

        let mut one = Circuit::new(2).unwrap();
        let op = GateOp::ry(1, 0.3);
        one.push(op).unwrap();
        assert_eq!(run(&one, &zero).unwrap(), apply(&zero, &op).unwrap());

        let three = StateVector::zero(3).unwrap();
        assert!(matches!(run(&c2, &three), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn density_of_simple_states() {
        let r0 = to_density(&StateVector::zero(1).unwrap());
        assert_eq!(r0.get(0, 0), c(1.0, 0.0));
        assert_eq!(r0.get(1, 1), c(0.0, 0.0));

        let rp = to_density(&plus());
        for r in 0..2 {
            for col in 0..2 {
                assert!(close(rp.get(r, col), c(0.5, 0.0), 1e-15));
            }
        }

        let rb = to_density(&bell());
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!(close(rb.get(r, col), c(0.5, 0.0), 1e-15));
        }
        assert!(close(rb.get(1, 1), c(0.0, 0.0), 1e-15));
    }

    #[test]
    fn partial_trace_of_bell_is_mixed() {
        let rb = to_density(&bell());
        for keep in [0, 1] {
            let r = partial_trace(&rb, &[keep]).unwrap();
            assert!(close(r.get(0, 0), c(0.5, 0.0), 1e-15));
            assert!(close(r.get(1, 1), c(0.5, 0.0), 1e-15));
            assert!(close(r.get(0, 1), c(0.0, 0.0), 1e-15));
        }
        assert!(matches!(partial_trace(&rb, &[]), Err(Error::EmptyKeepSet)));
    }

    #[test]
    fn partial_trace_of_product_state_factorizes() {
        // (RY(0.4)|0⟩) ⊗ (RY(1.1)|0⟩) ⊗ (RY(2.0)|0⟩)
        let angles = [0.4, 1.1, 2.0];
        let mut circ = Circuit::new(3).unwrap();
        for (w, &a) in angles.iter().enumerate() {
            circ.push(GateOp::ry(w, a)).unwrap();
        }
        let rho = to_density(&run_from_zero(&circ));
        for (w, &a) in angles.iter().enumerate() {
            let single = to_density(&apply(&StateVector::zero(1).unwrap(), &GateOp::ry(0, a)).unwrap());
            let reduced = partial_trace(&rho, &[w]).unwrap();
            assert!((reduced.elements() - single.elements()).norm() < 1e-14);
        }
        // keeping wires {2, 0} returns them in ascending order.
        let r02 = partial_trace(&rho, &[2, 0]).unwrap();
        let mut pair = Circuit::new(2).unwrap();
        pair.push(GateOp::ry(0, angles[0])).unwrap();
        pair.push(GateOp::ry(1, angles[2])).unwrap();
        let want = to_density(&run_from_zero(&pair));
        assert!((r02.elements() - want.elements()).norm() < 1e-14);
    }

    #[test]
    fn sigma3_on_basis_states() {
        let r0 = to_density(&StateVector::basis(1, 0).unwrap());
        let r1 = to_density(&StateVector::basis(1, 1).unwrap());
        assert_eq!(expect_sigma3(&r0, 0).unwrap(), 1.0);
        assert_eq!(expect_sigma3(&r1, 0).unwrap(), -1.0);
        assert!(matches!(expect_sigma3(&r1, 1), Err(Error::WireOutOfRange { .. })));
    }

    #[test]
    fn sample_deterministic_and_exact_on_basis() {
        let counts = sample_shots(&StateVector::zero(1).unwrap(), 100, 9).unwrap();
        assert_eq!(counts.get("0"), 100);
        assert_eq!(counts.shots(), 100);
        let a = sample_shots(&plus(), 5000, 42).unwrap();
        let b = sample_shots(&plus(), 5000, 42).unwrap();
        assert_eq!(a, b);
        assert!(matches!(sample_shots(&plus(), 0, 1), Err(Error::ZeroShots)));
    }

    #[test]
    fn sample_plus_state_binomial() {
        let shots = 1_000_000u64;
        let counts = sample_shots(&plus(), shots, 2024).unwrap();
        let sigma = (shots as f64 * 0.25).sqrt();
        let n0 = counts.get("0") as f64;
        assert!((n0 - 500_000.0).abs() < 5.0 * sigma, "n0 = {n0}");
        assert_eq!(counts.get("0") + counts.get("1"), shots);
    }

    #[test]
    fn sample_convergence_on_entangled_register() {
        let mut circ = Circuit::new(3).unwrap();
        circ.push(GateOp::ry(0, 1.0)).unwrap();
        circ.push(GateOp::cnot(0, 1)).unwrap();
        circ.push(GateOp::ry(2, 2.2)).unwrap();
        let psi = run_from_zero(&circ);
        let shots = 1_000_000u64;
        let counts = sample_shots(&psi, shots, 5).unwrap();
        for (i, p) in psi.probabilities().into_iter().enumerate() {
            let n = counts.get(&bitstring(i, 3)) as f64;
            let se = (shots as f64 * p * (1.0 - p)).sqrt();
            assert!((n - shots as f64 * p).abs() <= 5.0 * se + 1e-9, "index {i}");
        }
    }

    #[test]
    fn density_gate_matches_statevector() {
        let mut circ = Circuit::new(3).unwrap();
        circ.push(GateOp::u3(0, 0.9, 0.3, -1.2)).unwrap();
        circ.push(GateOp::controlled(SingleGate::Ry(0.8), 0, 2, false)).unwrap();
        circ.push(GateOp::cnot(2, 1)).unwrap();
        let psi = run_from_zero(&circ);
        let mut rho = to_density(&StateVector::zero(3).unwrap());
        for op in circ.ops() {
            rho.apply_gate(op).unwrap();
        }
        assert!((rho.elements() - to_density(&psi).elements()).norm() < 1e-13);
    }

    #[test]
    fn full_depolarization_gives_maximally_mixed_pair() {
        let mut rho = to_density(&bell());
        rho.depolarize_pair(0, 1, 1.0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((rho.elements() - mixed.elements()).norm() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let bad = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.7, 0.0), c(0.7, 0.0)]));
        assert!(DensityMatrix::from_matrix(bad).is_err());
        let good = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.3, 0.0), c(0.7, 0.0)]));
        assert!(DensityMatrix::from_matrix(good).is_ok());
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = GateOp> {
        let angle = -4.0..4.0f64;
        prop_oneof![
            (0..n, angle.clone()).prop_map(|(w, a)| GateOp::ry(w, a)),
            (0..n, angle.clone(), angle.clone(), angle.clone()).prop_map(|(w, t, p, l)| GateOp::u3(w, t, p, l)),
            (0..n).prop_map(GateOp::x),
            (0..n, 1..n, angle, any::<bool>()).prop_map(move |(cw, off, a, s)| {
                GateOp::controlled(SingleGate::Ry(a), cw, (cw + off) % n, s)
            }),
        ]
    }

    proptest! {
        #[test]
        fn random_circuits_preserve_norm(
            (n, gates) in (2usize..=6).prop_flat_map(|n| (Just(n), proptest::collection::vec(arb_gate(n), 1..=20))),
        ) {
            let mut circ = Circuit::new(n).unwrap();
            for g in gates {
                circ.push(g).unwrap();
            }
            let psi = run_from_zero(&circ);
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
            let rho = to_density(&psi);
            let r = partial_trace(&rho, &[0, n - 1]).unwrap();
            prop_assert!((r.trace().re - 1.0).abs() < 1e-12);
        }

        #[test]
        fn gates_are_unitary(g in arb_gate(2)) {
            let m = gate_matrix(&g);
            let id = DMatrix::<C64>::identity(m.nrows(), m.ncols());
            prop_assert!((m.adjoint() * &m - id).norm() < 1e-12);
        }
    }
}

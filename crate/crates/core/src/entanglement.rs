//! Concurrence of two-qubit states: the QCD closed form, the splitting
//! block's closed form, the pure-state reduced form and Wootters' formula
//! for general mixed states.

use std::f64::consts::FRAC_PI_3;

#[cfg(test)]
use nalgebra::DMatrix;
use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::qsim::{DensityMatrix, C64};

/// Slack on the `[0, π/3]` range of `γ1` so that boundary values computed
/// in floating point are still accepted.
pub(crate) const ANGLE_SLACK: f64 = 1e-12;

const RADICAND_TOL: f64 = 1e-10;

/// Density-matrix eigenvalues below this are treated as exact zeros before
/// taking square roots in the Wootters construction.
const RANK_CUTOFF: f64 = 1e-14;

/// Entanglement of a two-qubit state, between 0 (separable) and 1 (Bell).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Concurrence(f64);

impl Concurrence {
    /// Clamps round-off excursions back into `[0, 1]`.
    pub fn new(value: f64) -> Self {
        Concurrence(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Concurrence> for f64 {
    fn from(c: Concurrence) -> f64 {
        c.0
    }
}

/// `(z(1-z) / (1 - z(1-z)))²`, the helicity entanglement of `g → gg`.
pub fn c_qcd(z: f64) -> Result<Concurrence> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::OutOfRange { value: z, range: "[0, 1]" });
    }
    let s = z * (1.0 - z);
    Ok(Concurrence::new((s / (1.0 - s)).powi(2)))
}

pub(crate) fn check_gamma1(gamma1: f64) -> Result<()> {
    if !(-ANGLE_SLACK..=FRAC_PI_3 + ANGLE_SLACK).contains(&gamma1) {
        return Err(Error::ParameterDomain(format!("gamma1 = {gamma1} outside [0, pi/3]")));
    }
    Ok(())
}

/// Concurrence of the splitting block's output state, evaluated from the
/// trigonometric closed form. Small negative radicands from round-off are
/// clamped to zero.
pub fn c_circuit(gamma1: f64, gamma3: f64) -> Result<Concurrence> {
    check_gamma1(gamma1)?;
    let (s1, c1) = gamma1.sin_cos();
    let (s3, c3) = gamma3.sin_cos();
    let k = 1.0 / c1 - 2.0;
    let radicand = 0.75 - 0.25 * k * k * c3 * c3 + 0.5 * k / c1 * (s1 * s3 + 1.0);
    if radicand < -RADICAND_TOL {
        return Err(Error::ParameterDomain(format!(
            "negative radicand {radicand} at gamma1 = {gamma1}, gamma3 = {gamma3}"
        )));
    }
    Ok(Concurrence::new(radicand.max(0.0).sqrt()))
}

/// `2(ψ00·ψ11 − ψ01·ψ10)` of the block output on `|00⟩`, whose amplitudes
/// are real. Its magnitude is the block concurrence; unlike the square-root
/// form it keeps full relative precision where the concurrence vanishes.
pub fn block_amplitude_determinant(gamma1: f64, gamma3: f64) -> f64 {
    let (s1, c1) = gamma1.sin_cos();
    (s1 - (2.0 * c1 - 1.0) * gamma3.sin()) / (2.0 * c1)
}

/// Pure-state concurrence `2·√det ρ_A` from one qubit's reduced state.
pub fn concurrence_pure(rho_a: &DensityMatrix) -> Result<Concurrence> {
    if rho_a.n_qubits() != 1 {
        return Err(Error::InvalidDensityMatrix(format!(
            "expected a one-qubit reduced state, got {} qubits",
            rho_a.n_qubits()
        )));
    }
    rho_a.validate(1e-10, 1e-10, 1e-10)?;
    let det = rho_a.get(0, 0) * rho_a.get(1, 1) - rho_a.get(0, 1) * rho_a.get(1, 0);
    Ok(Concurrence::new(2.0 * det.re.max(0.0).sqrt()))
}

fn spin_flip() -> Matrix4<C64> {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // σy ⊗ σy
    Matrix4::new(
        zero, zero, zero, -one, //
        zero, zero, one, zero, //
        zero, one, zero, zero, //
        -one, zero, zero, zero,
    )
}

/// Wootters concurrence `max(0, λ1 − λ2 − λ3 − λ4)` of a two-qubit state.
///
/// The `λi` are the square roots of the spectrum of the Hermitian matrix
/// `√ρ·ρ̃·√ρ` with `ρ̃ = (σy⊗σy)ρ*(σy⊗σy)`. That matrix equals `A·A†` for
/// `A = √ρ·(σy⊗σy)·√ρ*`, so the `λi` are taken as the singular values of
/// `A`, which avoids square roots of round-off-sized eigenvalues.
pub fn concurrence_wootters(rho: &DensityMatrix) -> Result<Concurrence> {
    if rho.n_qubits() != 2 {
        return Err(Error::InvalidDensityMatrix(format!(
            "expected a two-qubit state, got {} qubits",
            rho.n_qubits()
        )));
    }
    rho.validate(1e-10, 1e-10, 1e-10)?;
    let m: Matrix4<C64> = Matrix4::from_fn(|r, c| rho.get(r, c));
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| if v > RANK_CUTOFF { v.sqrt() } else { 0.0 });
    let v = &eig.eigenvectors;
    let sqrt_rho = v * Matrix4::from_diagonal(&sqrt_vals.map(|x| C64::new(x, 0.0))) * v.adjoint();
    let a = sqrt_rho * spin_flip() * sqrt_rho.conjugate();
    let mut lambdas: Vec<f64> = a.singular_values().iter().copied().collect();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    Ok(Concurrence::new(lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]))
}

#[cfg(test)]
pub(crate) fn real_matrix(rows: &[[f64; 4]; 4]) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |r, c| C64::new(rows[r][c], 0.0))
}

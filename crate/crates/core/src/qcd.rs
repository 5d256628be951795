//! Closed-form results for the `g → gg` vertex: the splitting function,
//! the reduced helicity amplitudes and the two-gluon spin density matrix.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qsim::{DensityMatrix, C64};

/// Adjoint Casimir of SU(3).
pub const C_A: f64 = 3.0;

fn check_open_unit(z: f64) -> Result<()> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::OutOfRange { value: z, range: "(0, 1)" });
    }
    Ok(())
}

/// Unregularized gluon splitting function `P_gg(z)`.
pub fn p_gg(z: f64) -> Result<f64> {
    if z == 0.0 || z == 1.0 {
        return Err(Error::DivergentEndpoint(z));
    }
    check_open_unit(z)?;
    Ok(C_A * (z / (1.0 - z) + (1.0 - z) / z + z * (1.0 - z)))
}

/// Helicity amplitudes of `g → gg` divided by their common prefactor.
///
/// Only the three independent ones are stored; each has a parity partner
/// with all helicities flipped and the same value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelicityAmplitudes {
    pub z: f64,
    /// `L → LL`
    pub same: f64,
    /// `L → LR`
    pub lr: f64,
    /// `L → RL`
    pub rl: f64,
}

impl HelicityAmplitudes {
    pub fn new(z: f64) -> Result<Self> {
        check_open_unit(z)?;
        Ok(HelicityAmplitudes { z, same: 1.0, lr: z * z, rl: (1.0 - z).powi(2) })
    }

    /// Amplitude with every helicity flipped.
    pub fn parity_partner(&self) -> Self {
        *self
    }

    /// Sum of squared amplitudes for one parent helicity.
    pub fn sum_sq(&self) -> f64 {
        self.same * self.same + self.lr * self.lr + self.rl * self.rl
    }
}

/// Two-qubit spin density matrix of the daughter gluons, basis order
/// `LL, LR, RL, RR`.
#[derive(Clone, Debug)]
pub struct SpinDensity {
    z: f64,
    matrix: DensityMatrix,
}

impl SpinDensity {
    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn matrix(&self) -> &DensityMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DensityMatrix {
        self.matrix
    }
}

/// Builds the spin density matrix at momentum fraction `z`.
pub fn rho_sc(z: f64) -> Result<SpinDensity> {
    check_open_unit(z)?;
    let a = z * z;
    let b = (1.0 - z).powi(2);
    let d = a * a + b * b;
    let x = 2.0 * a * b;
    let norm = 1.0 / (2.0 * (d + 1.0));
    #[rustfmt::skip]
    let rows = [
        [1.0, a,   b,   0.0],
        [a,   d,   x,   b  ],
        [b,   x,   d,   a  ],
        [0.0, b,   a,   1.0],
    ];
    let m = DMatrix::from_fn(4, 4, |r, c| C64::new(norm * rows[r][c], 0.0));
    Ok(SpinDensity { z, matrix: DensityMatrix::from_matrix(m)? })
}

/// `(1 + z⁴ + (1-z)⁴) / (z(1-z))` built from the helicity amplitudes,
/// divided by `P_gg(z)/C_A`. The result is the same for every `z`.
pub fn amplitude_ratio_check(z: f64) -> Result<f64> {
    let amps = HelicityAmplitudes::new(z)?;
    let averaged = amps.sum_sq() / (z * (1.0 - z));
    Ok(averaged / (p_gg(z)? / C_A))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::entanglement::{c_qcd, concurrence_wootters};

    /// Rank-two decomposition: the matrix is the normalized sum of the
    /// projectors onto the parent-L and parent-R amplitude vectors.
    fn outer_product_oracle(z: f64) -> [[f64; 4]; 4] {
        let l = [1.0, z * z, (1.0 - z).powi(2), 0.0];
        let r = [0.0, (1.0 - z).powi(2), z * z, 1.0];
        let norm: f64 = l.iter().map(|x| x * x).sum::<f64>() * 2.0;
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (l[i] * l[j] + r[i] * r[j]) / norm;
            }
        }
        m
    }

    #[test]
    fn p_gg_values() {
        assert!((p_gg(0.5).unwrap() - 6.75).abs() < 1e-12);
        assert!(p_gg(1e-3).unwrap() > p_gg(1e-2).unwrap());
        assert!(matches!(p_gg(0.0), Err(Error::DivergentEndpoint(_))));
        assert!(matches!(p_gg(1.0), Err(Error::DivergentEndpoint(_))));
        assert!(matches!(p_gg(1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rho_sc_at_half() {
        let rho = rho_sc(0.5).unwrap();
        let m = rho.matrix();
        assert!((m.get(0, 0).re - 4.0 / 9.0).abs() < 1e-15);
        assert!((m.get(1, 1).re - 1.0 / 18.0).abs() < 1e-15);
        assert!((m.get(1, 2).re - 1.0 / 18.0).abs() < 1e-15);
        assert!((m.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_sc_rejects_endpoints() {
        assert!(rho_sc(0.0).is_err());
        assert!(rho_sc(1.0).is_err());
    }

    #[test]
    fn amplitudes_and_partners() {
        let a = HelicityAmplitudes::new(0.3).unwrap();
        assert_eq!(a.same, 1.0);
        assert!((a.lr - 0.09).abs() < 1e-15);
        assert!((a.rl - 0.49).abs() < 1e-15);
        assert_eq!(a.parity_partner(), a);
    }

    #[test]
    fn ratio_is_constant() {
        let r = |z| amplitude_ratio_check(z).unwrap();
        assert!((r(0.3) - r(0.7)).abs() < 1e-12);
        assert!((r(0.25) - r(0.5)).abs() < 1e-12);
        assert!(r(0.5).is_finite() && r(0.5) > 0.0);
        assert!((r(0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wootters_reproduces_qcd_concurrence_on_grid() {
        let n = 1000;
        let mut worst = 0.0f64;
        for i in 0..n {
            let z = 1e-3 + (1.0 - 2e-3) * i as f64 / (n - 1) as f64;
            let c = concurrence_wootters(rho_sc(z).unwrap().matrix()).unwrap().value();
            worst = worst.max((c - c_qcd(z).unwrap().value()).abs());
        }
        assert!(worst < 1e-8, "max deviation {worst}");
    }

    proptest! {
        #[test]
        fn matches_outer_product_oracle(z in 1e-6..1.0 - 1e-6) {
            let rho = rho_sc(z).unwrap();
            let oracle = outer_product_oracle(z);
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert!((rho.matrix().get(i, j).re - oracle[i][j]).abs() < 1e-14);
                }
            }
        }

        #[test]
        fn swap_symmetry(z in 1e-6..1.0 - 1e-6) {
            let a = rho_sc(z).unwrap();
            let b = rho_sc(1.0 - z).unwrap();
            // SWAP exchanges basis states 1 (LR) and 2 (RL)
            let swap = [0usize, 2, 1, 3];
            for i in 0..4 {
                for j in 0..4 {
                    let d = a.matrix().get(swap[i], swap[j]) - b.matrix().get(i, j);
                    prop_assert!(d.norm() < 1e-12);
                }
            }
        }

        #[test]
        fn psd(z in 1e-6..1.0 - 1e-6) {
            let ev = rho_sc(z).unwrap().matrix().eigenvalues();
            prop_assert!(ev[0] >= -1e-10);
        }

        #[test]
        fn p_gg_symmetric(z in 1e-6..1.0 - 1e-6) {
            let a = p_gg(z).unwrap();
            let b = p_gg(1.0 - z).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }
}

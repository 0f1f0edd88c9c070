//! Truncated number-basis oracle.
//!
//! Builds ρ in the Fock basis and evaluates the characteristic function and
//! the Wigner function by brute-force matrix algebra.

use std::f64::consts::{FRAC_1_PI, FRAC_1_SQRT_2};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::{CoherentSuperposition, PhasePoint};
use crate::wigner::CharacteristicPoint;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest dimension that holds a coherent state of radius `b`.
pub fn required_dim(b: f64) -> usize {
    let b2 = b * b;
    (b2 + 8.0 * (b2 + 1.0).sqrt()).ceil() as usize
}

/// Ladder and quadrature matrices in units of σ.
#[derive(Debug, Clone)]
pub struct FockOperatorSet {
    pub dim: usize,
    pub a: DMatrix<Complex64>,
    pub a_dag: DMatrix<Complex64>,
    pub x: DMatrix<Complex64>,
    pub p: DMatrix<Complex64>,
}

impl FockOperatorSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 8 {
            return Err(Error::TruncationTooSmall { dim, required: 8 });
        }
        let a = DMatrix::from_fn(dim, dim, |m, n| {
            if n == m + 1 {
                Complex64::new((n as f64).sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let a_dag = a.adjoint();
        let x = (&a_dag + &a) * Complex64::new(FRAC_1_SQRT_2, 0.0);
        let p = (&a_dag - &a) * Complex64::new(0.0, FRAC_1_SQRT_2);
        Ok(Self { dim, a, a_dag, x, p })
    }

    /// max |[x,p] − i| over the top-left (dim−1)² block.
    pub fn commutator_residual(&self) -> f64 {
        let c = &self.x * &self.p - &self.p * &self.x;
        let mut worst: f64 = 0.0;
        for m in 0..self.dim - 1 {
            for n in 0..self.dim - 1 {
                let want = if m == n { I } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((c[(m, n)] - want).norm());
            }
        }
        worst
    }
}

/// Truncated state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amplitudes: DVector<Complex64>,
}

impl FockState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn norm_deficit(&self) -> f64 {
        1.0 - self.amplitudes.norm_squared()
    }
}

/// e^{−|β|²/2} β^n/√n! for n < dim.
pub fn coherent_fock(beta: Complex64, dim: usize) -> Result<FockState> {
    let required = required_dim(beta.norm());
    if dim < required {
        return Err(Error::TruncationTooSmall { dim, required });
    }
    let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    v[0] = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        v[n] = v[n - 1] * beta / (n as f64).sqrt();
    }
    let state = FockState { amplitudes: v };
    let deficit = state.norm_deficit();
    if deficit > 1e-10 {
        return Err(Error::TruncationTooSmall { dim, required: dim + 1 });
    }
    Ok(state)
}

/// exp(i t H) for Hermitian H.
pub fn exp_i_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    exp_from_eigen(&SymmetricEigen::new(h.clone()), t)
}

fn exp_from_eigen(eig: &SymmetricEigen<Complex64, nalgebra::Dyn>, t: f64) -> DMatrix<Complex64> {
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| Complex64::from_polar(1.0, t * w)));
    v * phases * v.adjoint()
}

/// Fock-basis oracle with cached spectral decompositions of x and p.
#[derive(Debug, Clone)]
pub struct FockOracle {
    ops: FockOperatorSet,
    eig_x: SymmetricEigen<Complex64, nalgebra::Dyn>,
    eig_p: SymmetricEigen<Complex64, nalgebra::Dyn>,
}

impl FockOracle {
    pub fn new(dim: usize) -> Result<Self> {
        let ops = FockOperatorSet::new(dim)?;
        let eig_x = SymmetricEigen::new(ops.x.clone());
        let eig_p = SymmetricEigen::new(ops.p.clone());
        Ok(Self { ops, eig_x, eig_p })
    }

    pub fn dim(&self) -> usize {
        self.ops.dim
    }

    pub fn operators(&self) -> &FockOperatorSet {
        &self.ops
    }

    fn check(&self, radius: f64) -> Result<()> {
        let required = required_dim(radius);
        if self.ops.dim < required {
            return Err(Error::TruncationTooSmall {
                dim: self.ops.dim,
                required,
            });
        }
        Ok(())
    }

    /// N⁻¹ Σ ρ_jk |β_j⟩⟨β_k| in the number basis.
    pub fn density_matrix(&self, state: &CoherentSuperposition) -> Result<DMatrix<Complex64>> {
        let kets = state
            .betas()
            .iter()
            .map(|b| coherent_fock(*b, self.ops.dim))
            .collect::<Result<Vec<_>>>()?;
        let n = state.len();
        let mut rho = DMatrix::from_element(self.ops.dim, self.ops.dim, Complex64::new(0.0, 0.0));
        for j in 0..n {
            for k in 0..n {
                let c = state.coeff(j, k);
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                rho += (&kets[j].amplitudes * kets[k].amplitudes.adjoint()) * c;
            }
        }
        Ok(rho / Complex64::new(state.norm(), 0.0))
    }

    /// Tr[e^{iλx/2} e^{iηp/2} ρ e^{iηp/2} e^{iλx/2}].
    pub fn characteristic_sequential(&self, state: &CoherentSuperposition, cp: CharacteristicPoint) -> Result<Complex64> {
        let s = state.sigma();
        self.check(state.max_abs_beta() + 0.5 * cp.alpha(s).norm())?;
        let rho = self.density_matrix(state)?;
        let ex = exp_from_eigen(&self.eig_x, 0.5 * cp.lambda * s);
        let ep = exp_from_eigen(&self.eig_p, 0.5 * cp.eta / s);
        let m = &ex * &ep * rho * &ep * &ex;
        Ok(m.trace())
    }

    /// Tr[e^{i(λx + ηp)} ρ].
    pub fn characteristic_displacement(&self, state: &CoherentSuperposition, cp: CharacteristicPoint) -> Result<Complex64> {
        let s = state.sigma();
        self.check(state.max_abs_beta() + 0.5 * cp.alpha(s).norm())?;
        let rho = self.density_matrix(state)?;
        let h = &self.ops.x * Complex64::new(cp.lambda * s, 0.0) + &self.ops.p * Complex64::new(cp.eta / s, 0.0);
        Ok((exp_i_hermitian(&h, 1.0) * rho).trace())
    }

    /// W = (1/π) Tr[ρ D(γ) Π D(γ)†].
    pub fn wigner_parity(&self, state: &CoherentSuperposition, pt: PhasePoint) -> Result<f64> {
        let s = state.sigma();
        let gamma = Complex64::new(pt.x / s, pt.p * s) * FRAC_1_SQRT_2;
        self.check(state.max_abs_beta() + gamma.norm())?;
        let rho = self.density_matrix(state)?;
        // D(γ) = exp(γa† − γ*a) = exp(iH) with H = −i(γa† − γ*a)
        let h = (&self.ops.a_dag * gamma - &self.ops.a * gamma.conj()) * (-I);
        let d = exp_i_hermitian(&h, 1.0);
        let parity = DMatrix::from_diagonal(&DVector::from_fn(self.ops.dim, |n, _| {
            Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
        }));
        let m = rho * &d * parity * d.adjoint();
        Ok(m.trace().re * FRAC_1_PI)
    }
}

pub fn characteristic_sequential(state: &CoherentSuperposition, cp: CharacteristicPoint, dim: usize) -> Result<Complex64> {
    FockOracle::new(dim)?.characteristic_sequential(state, cp)
}

pub fn characteristic_displacement(state: &CoherentSuperposition, cp: CharacteristicPoint, dim: usize) -> Result<Complex64> {
    FockOracle::new(dim)?.characteristic_displacement(state, cp)
}

pub fn wigner_parity(state: &CoherentSuperposition, pt: PhasePoint, dim: usize) -> Result<f64> {
    FockOracle::new(dim)?.wigner_parity(state, pt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::coherent_overlap;
    use crate::wigner::{quasi_characteristic, wigner_direct};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cp(lambda: f64, eta: f64) -> CharacteristicPoint {
        CharacteristicPoint { lambda, eta }
    }

    #[test]
    fn operator_invariants() {
        let ops = FockOperatorSet::new(32).unwrap();
        assert!(ops.commutator_residual() < 1e-10);
        assert_eq!(ops.a[(2, 3)], c(3f64.sqrt(), 0.0));
        let x2 = (&ops.a_dag + &ops.a) * c(FRAC_1_SQRT_2, 0.0);
        assert!((x2 - &ops.x).camax() < 1e-14);
        assert!(FockOperatorSet::new(7).is_err());
    }

    #[test]
    fn coherent_kets() {
        let v = coherent_fock(c(0.0, 0.0), 16).unwrap();
        assert_eq!(v.amplitudes[0], c(1.0, 0.0));
        assert!(v.amplitudes.iter().skip(1).all(|a| a.norm() == 0.0));
        let b = coherent_fock(c(1.2, -0.7), 40).unwrap();
        assert!((b.inner(&b) - c(1.0, 0.0)).norm() < 1e-10);
        let p = coherent_fock(c(2.0, 0.0), 64).unwrap();
        let m = coherent_fock(c(-2.0, 0.0), 64).unwrap();
        assert!((p.inner(&m).re - (-8f64).exp()).abs() < 1e-10);
        let (bj, bk) = (c(0.5, 1.0), c(-1.0, 0.3));
        let overlap = coherent_fock(bk, 40).unwrap().inner(&coherent_fock(bj, 40).unwrap());
        assert!((overlap - coherent_overlap(bj, bk)).norm() < 1e-10);
        assert_eq!(
            coherent_fock(c(3.0, 0.0), 20),
            Err(Error::TruncationTooSmall { dim: 20, required: 35 })
        );
    }

    #[test]
    fn vacuum_characteristic() {
        let vac = CoherentSuperposition::coherent(c(0.0, 0.0)).unwrap();
        let o = FockOracle::new(64).unwrap();
        let g = o.characteristic_sequential(&vac, cp(0.0, 0.0)).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-12);
        let g = o.characteristic_sequential(&vac, cp(1.0, 1.0)).unwrap();
        assert!((g - c((-0.5f64).exp(), 0.0)).norm() < 1e-8);
        let g = o.characteristic_displacement(&vac, cp(2.0, 0.0)).unwrap();
        assert!((g - c((-1f64).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn three_routes_agree_with_sigma() {
        let s = CoherentSuperposition::pure(vec![c(1.0, 0.5), c(-0.8, -0.4)], &[c(0.6, 0.2), c(0.3, -0.7)])
            .unwrap()
            .with_sigma(1.4)
            .unwrap();
        let o = FockOracle::new(64).unwrap();
        for q in [cp(0.7, -1.3), cp(-2.0, 0.4), cp(1.5, 2.5)] {
            let closed = quasi_characteristic(&s, q);
            let seq = o.characteristic_sequential(&s, q).unwrap();
            let disp = o.characteristic_displacement(&s, q).unwrap();
            assert!((seq - disp).norm() < 1e-10);
            assert!((seq - closed).norm() < 1e-8);
        }
    }

    #[test]
    fn parity_matches_kernel() {
        let s = CoherentSuperposition::pure(vec![c(1.5, 0.0), c(-1.5, 0.0)], &[c(0.8, 0.0), c(0.0, 0.6)]).unwrap();
        let o = FockOracle::new(64).unwrap();
        for q in [PhasePoint { x: 0.0, p: 0.0 }, PhasePoint { x: 0.4, p: 0.9 }, PhasePoint { x: -2.0, p: 0.2 }] {
            let w = o.wigner_parity(&s, q).unwrap();
            assert!((w - wigner_direct(&s, q).unwrap()).abs() < 1e-10, "{q:?}");
        }
    }
}

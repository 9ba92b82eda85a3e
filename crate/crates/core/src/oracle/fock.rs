//! Truncated Fock-space operators and states.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dagger, hermitian_eigenvalues, CMat};

/// Dense operator on an N-level Fock space.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub dim: usize,
    pub matrix: CMat,
}

impl TruncatedOperator {
    pub fn new(matrix: CMat) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || dim < 2 {
            return Err(Error::InvalidParams(format!(
                "operator must be square with dim >= 2, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn dagger(&self) -> Self {
        Self { dim: self.dim, matrix: dagger(&self.matrix) }
    }
}

/// Annihilation operator: entries √n on the first superdiagonal only.
pub fn annihilation(dim: usize) -> CMat {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Number operator b†b.
pub fn number_operator(dim: usize) -> CMat {
    let mut n = Array2::zeros((dim, dim));
    for k in 0..dim {
        n[(k, k)] = Complex64::new(k as f64, 0.0);
    }
    n
}

/// Density operator with truncation diagnostics.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub rho: CMat,
    /// Population of the topmost retained Fock level ⟨N−1|ρ|N−1⟩.
    pub tail_population: f64,
}

impl TruncatedState {
    pub fn new(rho: CMat) -> Self {
        let n = rho.nrows();
        let tail_population = rho[(n - 1, n - 1)].re;
        Self { rho, tail_population }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    /// ⟨O⟩ = Tr[O ρ].
    pub fn expectation(&self, op: &CMat) -> Complex64 {
        op.dot(&self.rho).diag().sum()
    }

    /// Check the density-operator contract: unit trace, hermiticity,
    /// positive semidefiniteness (to a −1e-10 eigenvalue floor), and
    /// tail population below `tail_threshold`.
    pub fn validate(&self, tail_threshold: f64) -> Result<()> {
        let n = self.dim();
        let trace: Complex64 = self.rho.diag().sum();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(Error::Truncation(format!("trace {trace} deviates from 1")));
        }
        let herm_err = (&self.rho - &dagger(&self.rho)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > 1e-12 {
            return Err(Error::Truncation(format!("hermiticity violated by {herm_err:.3e}")));
        }
        let eigs = hermitian_eigenvalues(&self.rho)?;
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::Truncation(format!("negative eigenvalue {min:.3e}")));
        }
        if self.tail_population > tail_threshold {
            return Err(Error::Truncation(format!(
                "tail population {:.3e} at level {} exceeds threshold {tail_threshold:.3e}",
                self.tail_population,
                n - 1
            )));
        }
        Ok(())
    }
}

/// Truncated geometric (thermal) state with mean occupation `n_m`,
/// renormalized over the retained levels.
pub fn thermal_state(n_m: f64, dim: usize) -> TruncatedState {
    let mut rho = Array2::zeros((dim, dim));
    if n_m == 0.0 {
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        return TruncatedState::new(rho);
    }
    let r = n_m / (n_m + 1.0);
    let mut weights: Vec<f64> = (0..dim).map(|k| r.powi(k as i32)).collect();
    let norm: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= norm;
    }
    for (k, w) in weights.iter().enumerate() {
        rho[(k, k)] = Complex64::new(*w, 0.0);
    }
    TruncatedState::new(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn annihilation_structure() {
        let a = annihilation(5);
        for i in 0..5 {
            for j in 0..5 {
                if j == i + 1 {
                    assert_relative_eq!(a[(i, j)].re, (j as f64).sqrt(), max_relative = 1e-15);
                } else {
                    assert_abs_diff_eq!(a[(i, j)].norm(), 0.0);
                }
            }
        }
        // commutator [b, b†] = 1 away from the truncation corner
        let ad = dagger(&a);
        let comm = a.dot(&ad) - ad.dot(&a);
        for k in 0..4 {
            assert_relative_eq!(comm[(k, k)].re, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn thermal_state_moments() {
        let s = thermal_state(0.5, 40);
        s.validate(1e-6).unwrap();
        let n_op = number_operator(40);
        assert_relative_eq!(s.expectation(&n_op).re, 0.5, max_relative = 1e-9);
        // Boltzmann weights for n_m = 1: p_n ~ (1/2)^{n+1}
        let s = thermal_state(1.0, 60);
        assert_relative_eq!(s.rho[(0, 0)].re, 0.5, max_relative = 1e-9);
        assert_relative_eq!(s.rho[(3, 3)].re, 0.0625, max_relative = 1e-9);
        // ground state
        let s = thermal_state(0.0, 4);
        assert_abs_diff_eq!(s.rho[(0, 0)].re, 1.0);
        assert_abs_diff_eq!(s.tail_population, 0.0);
    }

    #[test]
    fn validation_rejects_bad_states() {
        let mut rho = CMat::zeros((3, 3));
        rho[(0, 0)] = Complex64::new(0.9, 0.0);
        assert!(TruncatedState::new(rho.clone()).validate(1.0).is_err()); // trace
        rho[(1, 1)] = Complex64::new(0.1, 0.0);
        rho[(0, 1)] = Complex64::new(0.0, 0.4);
        assert!(TruncatedState::new(rho.clone()).validate(1.0).is_err()); // hermiticity
        rho[(1, 0)] = Complex64::new(0.0, -0.4);
        // hermitian but indefinite: off-diagonal exceeds sqrt(p0 p1)
        assert!(TruncatedState::new(rho).validate(1.0).is_err());
        // tail threshold
        let hot = thermal_state(5.0, 6);
        assert!(hot.validate(1e-6).is_err());
    }
}

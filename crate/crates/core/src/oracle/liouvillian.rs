//! Thermal Lindblad generator on a truncated Fock space.
//!
//! L(ρ) = γ̃(n_m+1) D[b]ρ + γ̃ n_m D[b†]ρ with D[X]ρ = XρX† − ½{X†X, ρ}.
//! Its stationary state is the truncated geometric (thermal) state with
//! mean n_m, and the quantum-regression correlators it generates decay
//! as e^{−γ̃τ/2}, which is exactly the effective mechanical model behind
//! the closed-form coherences.
//!
//! Representation follows the dimension: for dim ≤ 32 the dense
//! N²×N² superoperator is built (row-major vectorization, so
//! vec(AρB) = (A ⊗ Bᵀ) vec ρ) and the stationary state is the
//! null-vector from a bordered LU solve; above that, the generator's
//! band structure is used — L couples ρ_{m,n} only to ρ_{m±1,n±1}, so
//! each diagonal band k = m−n evolves independently under a tridiagonal
//! generator, and the stationary state lives in band 0.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{inverse_iteration_smallest, kron, CMat, CVec, Lu};
use crate::oracle::fock::{annihilation, TruncatedState};

/// Largest dimension for which the dense superoperator is formed.
pub const DENSE_DIM_CAP: usize = 32;

/// Default spectral-gap threshold, relative to γ̃, below which the
/// stationary state is reported as non-unique.
const GAP_RTOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ThermalLiouvillian {
    pub dim: usize,
    pub gamma_eff: f64,
    pub n_m: f64,
    rate_down: f64,
    rate_up: f64,
    b: CMat,
    b_dag: CMat,
    bdag_b: CMat,
    b_bdag: CMat,
}

/// Build the thermal generator, rejecting cutoffs whose predicted
/// geometric tail population exceeds `tail_threshold`.
pub fn thermal_liouvillian(
    gamma_eff: f64,
    n_m: f64,
    dim: usize,
    tail_threshold: f64,
) -> Result<ThermalLiouvillian> {
    if dim < 2 {
        return Err(Error::InvalidParams(format!("Fock cutoff must be >= 2, got {dim}")));
    }
    if !(gamma_eff > 0.0) {
        return Err(Error::InvalidParams(format!("gamma_eff must be > 0, got {gamma_eff}")));
    }
    if !(n_m >= 0.0) {
        return Err(Error::InvalidParams(format!("n_m must be >= 0, got {n_m}")));
    }
    let tail = predicted_tail(n_m, dim);
    if tail > tail_threshold {
        return Err(Error::Truncation(format!(
            "thermal tail {tail:.3e} at cutoff {dim} exceeds threshold {tail_threshold:.3e} for n_m = {n_m}"
        )));
    }
    let b = annihilation(dim);
    let b_dag = crate::linalg::dagger(&b);
    let bdag_b = b_dag.dot(&b);
    let b_bdag = b.dot(&b_dag);
    Ok(ThermalLiouvillian {
        dim,
        gamma_eff,
        n_m,
        rate_down: gamma_eff * (n_m + 1.0),
        rate_up: gamma_eff * n_m,
        b,
        b_dag,
        bdag_b,
        b_bdag,
    })
}

/// Geometric tail weight of the truncated thermal state.
fn predicted_tail(n_m: f64, dim: usize) -> f64 {
    if n_m == 0.0 {
        return 0.0;
    }
    let r = n_m / (n_m + 1.0);
    let top = r.powi(dim as i32 - 1);
    (1.0 - r) * top / (1.0 - r.powi(dim as i32))
}

impl ThermalLiouvillian {
    /// Lindblad action L(ρ).
    pub fn apply(&self, rho: &CMat) -> CMat {
        let half = Complex64::new(0.5, 0.0);
        let down = self.b.dot(rho).dot(&self.b_dag)
            - half * (self.bdag_b.dot(rho) + rho.dot(&self.bdag_b));
        let up = self.b_dag.dot(rho).dot(&self.b)
            - half * (self.b_bdag.dot(rho) + rho.dot(&self.b_bdag));
        down * Complex64::new(self.rate_down, 0.0) + up * Complex64::new(self.rate_up, 0.0)
    }

    /// Action on a row-major flattened density matrix.
    pub fn apply_flat(&self, v: &CVec) -> CVec {
        let n = self.dim;
        let rho = Array2::from_shape_vec((n, n), v.to_vec()).expect("length n^2");
        let out = self.apply(&rho);
        Array1::from_iter(out.into_iter())
    }

    /// Dense N²×N² superoperator (row-major vectorization). Refused
    /// above [`DENSE_DIM_CAP`]; use the matrix-free action there.
    pub fn dense(&self) -> Result<CMat> {
        if self.dim > DENSE_DIM_CAP {
            return Err(Error::Truncation(format!(
                "dense superoperator capped at dim {DENSE_DIM_CAP}, got {}",
                self.dim
            )));
        }
        let eye = CMat::eye(self.dim);
        let half = Complex64::new(0.5, 0.0);
        let diss = |x: &CMat, xd: &CMat| -> CMat {
            let xdx = xd.dot(x);
            kron(x, &xd.t().to_owned()) - half * (kron(&xdx, &eye) + kron(&eye, &xdx.t().to_owned()))
        };
        Ok(diss(&self.b, &self.b_dag) * Complex64::new(self.rate_down, 0.0)
            + diss(&self.b_dag, &self.b) * Complex64::new(self.rate_up, 0.0))
    }

    /// Tridiagonal generator of diagonal band k: the column vector
    /// c_n = ρ_{n+k,n} evolves as ċ = T_k c.
    pub fn band_generator(&self, k: usize) -> CMat {
        let n_band = self.dim - k;
        let mut t = CMat::zeros((n_band, n_band));
        for n in 0..n_band {
            let m = n + k;
            // gain from one level up (quantum jump down)
            if n + 1 < n_band {
                t[(n, n + 1)] = Complex64::new(
                    self.rate_down * (((m + 1) * (n + 1)) as f64).sqrt(),
                    0.0,
                );
            }
            // gain from one level down (thermal excitation)
            if n >= 1 {
                t[(n, n - 1)] = Complex64::new(self.rate_up * ((m * n) as f64).sqrt(), 0.0);
            }
            let bdagb = (m + n) as f64;
            let bbdag = self.b_bdag[(m, m)].re + self.b_bdag[(n, n)].re;
            t[(n, n)] = Complex64::new(-0.5 * (self.rate_down * bdagb + self.rate_up * bbdag), 0.0);
        }
        t
    }

    /// Stationary state with the default gap threshold.
    pub fn stationary_state(&self) -> Result<TruncatedState> {
        self.stationary_state_with_gap_threshold(GAP_RTOL * self.gamma_eff)
    }

    /// Stationary state as the null-vector of the generator, normalized
    /// to unit trace. The spectral gap is computed first and a gap below
    /// `gap_threshold` is reported as [`Error::NonUniqueSteadyState`].
    pub fn stationary_state_with_gap_threshold(&self, gap_threshold: f64) -> Result<TruncatedState> {
        let gap = self.spectral_gap()?;
        if gap < gap_threshold {
            return Err(Error::NonUniqueSteadyState { gap, threshold: gap_threshold });
        }
        let rho = if self.dim <= DENSE_DIM_CAP {
            self.stationary_dense()?
        } else {
            self.stationary_banded()?
        };
        // residual sanity on the null-vector solve
        let residual = self.apply(&rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > 1e-9 * self.gamma_eff {
            return Err(Error::Linalg(format!(
                "stationary-state residual {residual:.3e} too large"
            )));
        }
        Ok(TruncatedState::new(rho))
    }

    /// Bordered solve on the dense superoperator: with t the trace
    /// functional and u = vec(I/N), L + u tᵀ is nonsingular and
    /// (L + u tᵀ)x = u yields Lx = 0, tᵀx = 1.
    fn stationary_dense(&self) -> Result<CMat> {
        let n = self.dim;
        let l = self.dense()?;
        let mut bordered = l;
        let u_val = Complex64::new(1.0 / n as f64, 0.0);
        for row in 0..n {
            let i = row * n + row;
            for col in 0..n {
                let j = col * n + col;
                bordered[(i, j)] += u_val;
            }
        }
        let mut rhs = CVec::zeros(n * n);
        for row in 0..n {
            rhs[row * n + row] = u_val;
        }
        let lu = Lu::decompose(&bordered)?;
        let x = lu.solve(&rhs);
        let mut rho = Array2::from_shape_vec((n, n), x.to_vec()).expect("length n^2");
        // hermitize against roundoff
        let rho_dag = crate::linalg::dagger(&rho);
        rho = (rho + rho_dag) * Complex64::new(0.5, 0.0);
        Ok(rho)
    }

    /// Band-0 solve: the stationary state is diagonal, so the same
    /// bordered trick on the tridiagonal population generator suffices.
    fn stationary_banded(&self) -> Result<CMat> {
        let p = self.band0_populations()?;
        let mut rho = CMat::zeros((self.dim, self.dim));
        for (i, &w) in p.iter().enumerate() {
            rho[(i, i)] = Complex64::new(w, 0.0);
        }
        Ok(rho)
    }

    fn band0_populations(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let t0 = self.band_generator(0);
        let u_val = Complex64::new(1.0 / n as f64, 0.0);
        let mut bordered = t0;
        for i in 0..n {
            for j in 0..n {
                bordered[(i, j)] += u_val;
            }
        }
        let rhs = CVec::from_elem(n, u_val);
        let lu = Lu::decompose(&bordered)?;
        let p = lu.solve(&rhs);
        Ok(p.iter().map(|z| z.re).collect())
    }

    /// Modulus of the slowest nonzero decay rate. For dim within the
    /// dense cap this is inverse iteration on the full superoperator
    /// restricted to the trace-zero subspace; above it, the slowest
    /// modes of the band sectors k = 0, 1, 2 are compared (decay rates
    /// grow with |k| for this generator).
    pub fn spectral_gap(&self) -> Result<f64> {
        if self.dim <= DENSE_DIM_CAP {
            return self.gap_dense();
        }
        let mut gap = f64::INFINITY;
        for k in 0..=2usize.min(self.dim - 2) {
            gap = gap.min(self.gap_band(k)?);
        }
        Ok(gap)
    }

    fn gap_dense(&self) -> Result<f64> {
        let n = self.dim;
        let l = self.dense()?;
        let mut bordered = l;
        let u_val = Complex64::new(1.0 / n as f64, 0.0);
        for row in 0..n {
            for col in 0..n {
                bordered[(row * n + row, col * n + col)] += u_val;
            }
        }
        let lu = Lu::decompose(&bordered)?;
        let mut rhs = CVec::zeros(n * n);
        for row in 0..n {
            rhs[row * n + row] = u_val;
        }
        let stationary = lu.solve(&rhs);
        let project = |v: &mut CVec| {
            // oblique projection onto trace-zero along the stationary
            // direction removes the null component exactly
            let mut tr = Complex64::new(0.0, 0.0);
            for row in 0..n {
                tr += v[row * n + row];
            }
            v.scaled_add(-tr, &stationary);
        };
        let lam = inverse_iteration_smallest(&lu, n * n, project, |x| self.apply_flat(x))?;
        Ok(lam.norm())
    }

    fn gap_band(&self, k: usize) -> Result<f64> {
        let t = self.band_generator(k);
        let nb = t.nrows();
        if k == 0 {
            let p = CVec::from_iter(
                self.band0_populations()?.into_iter().map(|x| Complex64::new(x, 0.0)),
            );
            let u_val = Complex64::new(1.0 / nb as f64, 0.0);
            let mut bordered = t.clone();
            for i in 0..nb {
                for j in 0..nb {
                    bordered[(i, j)] += u_val;
                }
            }
            let lu = Lu::decompose(&bordered)?;
            let project = move |v: &mut CVec| {
                let s: Complex64 = v.iter().sum();
                v.scaled_add(-s, &p);
            };
            let lam = inverse_iteration_smallest(&lu, nb, project, |x| t.dot(x))?;
            Ok(lam.norm())
        } else {
            let lu = Lu::decompose(&t)?;
            let lam = inverse_iteration_smallest(&lu, nb, |_| {}, |x| t.dot(x))?;
            Ok(lam.norm())
        }
    }
}

/// Check that the dense superoperator preserves the trace: tᵀL = 0,
/// i.e. the trace row of every column vanishes. Exposed for tests.
pub fn trace_preservation_defect(l: &CMat, dim: usize) -> f64 {
    let mut worst = 0.0_f64;
    for col in 0..dim * dim {
        let mut s = Complex64::new(0.0, 0.0);
        for row in 0..dim {
            s += l[(row * dim + row, col)];
        }
        worst = worst.max(s.norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_action;
    use crate::oracle::fock::{number_operator, thermal_state};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::Array1;

    #[test]
    fn construction_guards() {
        assert!(thermal_liouvillian(0.1, 0.5, 1, 1e-4).is_err());
        assert!(thermal_liouvillian(0.0, 0.5, 10, 1e-4).is_err());
        // n_m too hot for the cutoff
        assert!(matches!(
            thermal_liouvillian(0.1, 5.0, 8, 1e-6),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn dense_matches_action() {
        let l = thermal_liouvillian(0.3, 0.7, 6, 1e-1).unwrap();
        let dense = l.dense().unwrap();
        // pseudo-random test matrix
        let rho = CMat::from_shape_fn((6, 6), |(i, j)| {
            Complex64::new(((i * 5 + j) as f64 * 0.37).sin(), ((i + 2 * j) as f64 * 0.17).cos())
        });
        let via_action = l.apply(&rho);
        let flat: CVec = Array1::from_iter(rho.iter().cloned());
        let via_dense = dense.dot(&flat);
        for (k, z) in via_dense.iter().enumerate() {
            let (i, j) = (k / 6, k % 6);
            assert_abs_diff_eq!((z - via_action[(i, j)]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_preservation() {
        let l = thermal_liouvillian(0.2, 1.3, 8, 1e-1).unwrap();
        let dense = l.dense().unwrap();
        assert!(trace_preservation_defect(&dense, 8) < 1e-12);
    }

    #[test]
    fn band_generator_matches_action_on_matrix_units() {
        let l = thermal_liouvillian(0.17, 0.9, 9, 1e-1).unwrap();
        for k in 0..4 {
            let t = l.band_generator(k);
            for n in 0..9 - k {
                let mut unit = CMat::zeros((9, 9));
                unit[(n + k, n)] = Complex64::new(1.0, 0.0);
                let out = l.apply(&unit);
                // the image must stay in band k and match column n of T_k
                for i in 0..9 {
                    for j in 0..9 {
                        let val = out[(i, j)];
                        if i >= k && i - k == j && j < 9 - k {
                            assert_abs_diff_eq!((val - t[(j, n)]).norm(), 0.0, epsilon = 1e-13);
                        } else {
                            assert_abs_diff_eq!(val.norm(), 0.0, epsilon = 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn stationary_is_thermal() {
        // vacuum for n_m = 0
        let l = thermal_liouvillian(0.2, 0.0, 4, 1e-6).unwrap();
        let s = l.stationary_state().unwrap();
        assert_relative_eq!(s.rho[(0, 0)].re, 1.0, max_relative = 1e-12);

        // Boltzmann weights p_n ∝ (1/2)^{n+1} for n_m = 1 at dim 40
        let l = thermal_liouvillian(0.1, 1.0, 40, 1e-4).unwrap();
        let s = l.stationary_state().unwrap();
        assert_abs_diff_eq!(s.rho[(0, 0)].re, 0.5, epsilon = 1e-9);
        let n_op = number_operator(40);
        assert_abs_diff_eq!(s.expectation(&n_op).re, 1.0, epsilon = 1e-8);

        // n_m = 0.5, dim 30: <b†b> = 0.5 within 1e-9
        let l = thermal_liouvillian(0.1, 0.5, 30, 1e-4).unwrap();
        let s = l.stationary_state().unwrap();
        s.validate(1e-6).unwrap();
        assert_abs_diff_eq!(s.expectation(&number_operator(30)).re, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn stationary_matches_geometric_elementwise() {
        let l = thermal_liouvillian(0.05, 0.8, 25, 1e-4).unwrap();
        let s = l.stationary_state().unwrap();
        let reference = thermal_state(0.8, 25);
        for i in 0..25 {
            assert_abs_diff_eq!(s.rho[(i, i)].re, reference.rho[(i, i)].re, epsilon = 1e-9);
        }
    }

    #[test]
    fn dense_and_banded_routes_agree() {
        // same physical point solved through both code paths
        let l_small = thermal_liouvillian(0.1, 0.6, 24, 1e-4).unwrap();
        let dense = l_small.stationary_dense().unwrap();
        let banded = l_small.stationary_banded().unwrap();
        for i in 0..24 {
            for j in 0..24 {
                assert_abs_diff_eq!((dense[(i, j)] - banded[(i, j)]).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn spectral_gap_is_half_linewidth() {
        // the damped thermal oscillator has decay rates γ̃(j + |k|/2);
        // the gap sits at γ̃/2 independently of n_m. Truncation shifts
        // the non-Hermitian spectrum, so the tolerance tracks the tail.
        for &(g, nm, dim, tol) in
            &[(0.2, 0.0, 12, 1e-10), (0.07, 0.8, 24, 1e-4), (0.3, 1.5, 48, 1e-4)]
        {
            let l = thermal_liouvillian(g, nm, dim, 1e-1).unwrap();
            let gap = l.spectral_gap().unwrap();
            assert_relative_eq!(gap, g / 2.0, max_relative = tol);
        }
    }

    #[test]
    fn gap_threshold_triggers_nonunique() {
        let l = thermal_liouvillian(0.2, 0.5, 10, 1e-2).unwrap();
        // gap = 0.1; demand more than that
        match l.stationary_state_with_gap_threshold(0.15) {
            Err(Error::NonUniqueSteadyState { gap, threshold }) => {
                assert!(gap < threshold);
                assert_relative_eq!(gap, 0.1, max_relative = 1e-2);
            }
            other => panic!("expected NonUniqueSteadyState, got {other:?}"),
        }
    }

    #[test]
    fn propagation_relaxes_to_stationary() {
        // from |2><2|, e^{L t} rho converges to the stationary state;
        // the slowest population mode decays at rate γ̃, so t = 20/γ̃
        // leaves a residual well under 1e-6 in trace norm
        let (g, nm, dim) = (0.2, 0.5, 30);
        let l = thermal_liouvillian(g, nm, dim, 1e-4).unwrap();
        let ss = l.stationary_state().unwrap();
        let mut rho0 = CMat::zeros((dim, dim));
        rho0[(2, 2)] = Complex64::new(1.0, 0.0);
        let flat: CVec = Array1::from_iter(rho0.iter().cloned());
        let evolved = expm_action(&|v: &CVec| l.apply_flat(v), &flat, 20.0 / g, 1e-10).unwrap();
        // diagonal dynamics: trace norm = sum of |population deviations|
        let mut dist = 0.0;
        for i in 0..dim {
            dist += (evolved[i * dim + i] - ss.rho[(i, i)]).norm();
        }
        assert!(dist < 1e-6, "trace-norm distance {dist:.3e}");
    }
}

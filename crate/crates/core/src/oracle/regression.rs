//! Quantum-regression evaluation of sideband photon coherences.
//!
//! Multi-time averages are computed by propagating operator-dressed
//! states with the same generator as the density matrix: for τ ≥ 0,
//!
//!   ⟨A†(t) B†B(t+τ) A(t)⟩ = Tr[B†B · e^{Lτ}(A ρ_ss A†)],
//!
//! and the (t,t,t+τ) triple-coincidence pattern uses A² in place of A.
//! No moment factorization enters anywhere: the only inputs are the
//! generator, the stationary state, and the composite sideband operator
//! a_i(t) = −i e^{−iδt} G_r χ_c(δ) b − i e^{iδt} G_b χ_c(−δ) b†,
//! whose drive phases must be attached at the actual detection times.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_action, CMat, CVec};
use crate::model::{cavity_susceptibility, IdealParams, SystemParams};
use crate::oracle::fock::{annihilation, TruncatedOperator, TruncatedState};
use crate::oracle::liouvillian::{thermal_liouvillian, ThermalLiouvillian};

/// Composite innermost-sideband operator with full physical
/// coefficients at absolute phase time `phase_time`.
pub fn composite_sideband_operator(
    p: &SystemParams,
    phase_time: f64,
    dim: usize,
) -> Result<TruncatedOperator> {
    let coeff_b = -Complex64::i()
        * Complex64::from_polar(1.0, -p.delta * phase_time)
        * p.g_r
        * cavity_susceptibility(p.delta, p.delta_c);
    let coeff_b_dag = -Complex64::i()
        * Complex64::from_polar(1.0, p.delta * phase_time)
        * p.g_b
        * cavity_susceptibility(-p.delta, p.delta_c);
    sideband_operator(coeff_b, coeff_b_dag, dim)
}

/// Ideal-limit sideband operator: flat cavity response, common scale
/// G_r χ_c normalized to one, so the b† weight is √β.
pub fn ideal_sideband_operator(p: &IdealParams, phase_time: f64, dim: usize) -> Result<TruncatedOperator> {
    let coeff_b = -Complex64::i() * Complex64::from_polar(1.0, -p.delta * phase_time);
    let coeff_b_dag =
        -Complex64::i() * Complex64::from_polar(1.0, p.delta * phase_time) * p.beta.sqrt();
    sideband_operator(coeff_b, coeff_b_dag, dim)
}

fn sideband_operator(coeff_b: Complex64, coeff_b_dag: Complex64, dim: usize) -> Result<TruncatedOperator> {
    let b = annihilation(dim);
    let b_dag = crate::linalg::dagger(&b);
    TruncatedOperator::new(b.mapv(|z| z * coeff_b) + b_dag.mapv(|z| z * coeff_b_dag))
}

/// Ordered operator insertions of a regression correlator.
pub enum InsertionPattern<'a> {
    /// ⟨later(t+τ) earlier(t)⟩ = Tr[later · e^{Lτ}(earlier ρ_ss)].
    TwoTime { later: &'a TruncatedOperator, earlier: &'a TruncatedOperator },
    /// ⟨A†(t) B†B(t+τ) A(t)⟩ with A = prepare, B = detect.
    PairCoincidence { detect: &'a TruncatedOperator, prepare: &'a TruncatedOperator },
    /// ⟨A†²(t) B†B(t+τ) A²(t)⟩.
    TripleCoincidence { detect: &'a TruncatedOperator, prepare: &'a TruncatedOperator },
}

/// Tr[M X] without forming the product matrix.
pub fn trace_product(m: &CMat, x: &CMat) -> Complex64 {
    let n = m.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += m[(i, j)] * x[(j, i)];
        }
    }
    s
}

fn flatten(m: &CMat) -> CVec {
    CVec::from_iter(m.iter().cloned())
}

fn unflatten(v: &CVec, n: usize) -> CMat {
    CMat::from_shape_vec((n, n), v.to_vec()).expect("length n^2")
}

/// Evaluate the correlator at each delay in `taus` (ascending, ≥ 0) by
/// incremental propagation of the dressed state. `tol` is the relative
/// propagation accuracy.
pub fn regression_correlator(
    liou: &ThermalLiouvillian,
    rho_ss: &TruncatedState,
    pattern: InsertionPattern<'_>,
    taus: &[f64],
    tol: f64,
) -> Result<Vec<Complex64>> {
    if taus.iter().any(|&t| t < 0.0) {
        return Err(Error::Domain("regression delays must be >= 0".into()));
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("regression delays must be ascending".into()));
    }
    let n = liou.dim;
    let check_dim = |op: &TruncatedOperator| -> Result<()> {
        if op.dim != n {
            return Err(Error::InvalidParams(format!(
                "operator dim {} does not match Liouvillian dim {n}",
                op.dim
            )));
        }
        Ok(())
    };
    let (dressed, observable): (CMat, CMat) = match pattern {
        InsertionPattern::TwoTime { later, earlier } => {
            check_dim(later)?;
            check_dim(earlier)?;
            (earlier.matrix.dot(&rho_ss.rho), later.matrix.clone())
        }
        InsertionPattern::PairCoincidence { detect, prepare } => {
            check_dim(detect)?;
            check_dim(prepare)?;
            let a = &prepare.matrix;
            let bdag_b = detect.dagger().matrix.dot(&detect.matrix);
            (a.dot(&rho_ss.rho).dot(&crate::linalg::dagger(a)), bdag_b)
        }
        InsertionPattern::TripleCoincidence { detect, prepare } => {
            check_dim(detect)?;
            check_dim(prepare)?;
            let a2 = prepare.matrix.dot(&prepare.matrix);
            let bdag_b = detect.dagger().matrix.dot(&detect.matrix);
            (a2.dot(&rho_ss.rho).dot(&crate::linalg::dagger(&a2)), bdag_b)
        }
    };

    let apply = |v: &CVec| liou.apply_flat(v);
    let mut cursor = flatten(&dressed);
    let mut at = 0.0;
    let mut out = Vec::with_capacity(taus.len());
    for &tau in taus {
        let step = tau - at;
        if step > 0.0 {
            cursor = expm_action(&apply, &cursor, step, tol)?;
            at = tau;
        }
        out.push(trace_product(&observable, &unflatten(&cursor, n)));
    }
    Ok(out)
}

/// Truncation policy for the oracle: start at
/// max(8, ⌈10(n_m+1)⌉) unless overridden, double until successive
/// results agree to `rel_tol`, give up above `dim_cap`.
#[derive(Debug, Clone)]
pub struct DimPolicy {
    pub start: Option<usize>,
    pub rel_tol: f64,
    pub dim_cap: usize,
    pub tail_threshold: f64,
    pub propagation_tol: f64,
    /// Absolute phase reference t₀ for the first detection.
    pub phase_time: f64,
}

impl Default for DimPolicy {
    fn default() -> Self {
        Self {
            start: None,
            rel_tol: 1e-8,
            dim_cap: 256,
            tail_threshold: 1e-4,
            propagation_tol: 1e-10,
            phase_time: 0.0,
        }
    }
}

/// Oracle coherences at one parameter point.
#[derive(Debug, Clone)]
pub struct OracleCoherences {
    pub taus: Vec<f64>,
    pub g2: Vec<f64>,
    pub g3_zero: f64,
    pub g3_quarter: f64,
    pub k_zero: f64,
    pub k_quarter: f64,
    pub flux: f64,
    pub dim_used: usize,
    pub tail_population: f64,
}

/// Full oracle evaluation: g²(τ) on the requested grid plus g³(0),
/// g³(π/2δ) and the K values, with Fock truncation doubled until the
/// whole result set is converged.
pub fn oracle_coherences(p: &IdealParams, taus: &[f64], policy: &DimPolicy) -> Result<OracleCoherences> {
    let start = policy.start.unwrap_or_else(|| 8.max((10.0 * (p.n_m + 1.0)).ceil() as usize));
    let mut dim = start.max(2);
    let mut previous: Option<(Vec<f64>, OracleCoherences)> = None;
    loop {
        if dim > policy.dim_cap {
            return Err(Error::Truncation(format!(
                "oracle did not converge to {:.1e} within the cutoff cap {} (started at {start})",
                policy.rel_tol, policy.dim_cap
            )));
        }
        let result = oracle_at_dim(p, taus, policy, dim)?;
        let summary: Vec<f64> = result
            .g2
            .iter()
            .copied()
            .chain([result.g3_zero, result.g3_quarter])
            .collect();
        if let Some((prev_summary, _)) = &previous {
            let max_rel = prev_summary
                .iter()
                .zip(summary.iter())
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                .fold(0.0, f64::max);
            if max_rel < policy.rel_tol {
                return Ok(result);
            }
        }
        previous = Some((summary, result));
        dim *= 2;
    }
}

fn oracle_at_dim(
    p: &IdealParams,
    taus: &[f64],
    policy: &DimPolicy,
    dim: usize,
) -> Result<OracleCoherences> {
    let liou = thermal_liouvillian(p.gamma_eff(), p.n_m, dim, policy.tail_threshold)?;
    let rho_ss = liou.stationary_state()?;
    let t0 = policy.phase_time;
    let prepare = ideal_sideband_operator(p, t0, dim)?;
    let flux = trace_product(
        &prepare.dagger().matrix.dot(&prepare.matrix),
        &rho_ss.rho,
    )
    .re;
    if flux <= 0.0 {
        return Err(Error::ZeroFlux);
    }

    let quarter = p.quarter_delay();
    let mut all_taus: Vec<f64> = taus.to_vec();
    if !all_taus.iter().any(|&t| t == 0.0) {
        all_taus.push(0.0);
    }
    if !all_taus.iter().any(|&t| t == quarter) {
        all_taus.push(quarter);
    }
    all_taus.sort_by(f64::total_cmp);
    all_taus.dedup();
    if all_taus[0] < 0.0 {
        return Err(Error::Domain("delays must be >= 0".into()));
    }

    let apply = |v: &CVec| liou.apply_flat(v);
    let a = &prepare.matrix;
    let a_dag = crate::linalg::dagger(a);
    let a2 = a.dot(a);
    let mut pair = flatten(&a.dot(&rho_ss.rho).dot(&a_dag));
    let mut triple = flatten(&a2.dot(&rho_ss.rho).dot(&crate::linalg::dagger(&a2)));

    let mut g2_at = Vec::with_capacity(all_taus.len());
    let mut g3_zero = f64::NAN;
    let mut g3_quarter = f64::NAN;
    let mut at = 0.0;
    for &tau in &all_taus {
        let step = tau - at;
        if step > 0.0 {
            pair = expm_action(&apply, &pair, step, policy.propagation_tol)?;
            triple = expm_action(&apply, &triple, step, policy.propagation_tol)?;
            at = tau;
        }
        let detect = ideal_sideband_operator(p, t0 + tau, dim)?;
        let obs = detect.dagger().matrix.dot(&detect.matrix);
        let g2 = trace_product(&obs, &unflatten(&pair, dim)).re / (flux * flux);
        g2_at.push((tau, g2));
        if tau == 0.0 || tau == quarter {
            let g3 = trace_product(&obs, &unflatten(&triple, dim)).re / (flux * flux * flux);
            if tau == 0.0 {
                g3_zero = g3;
            } else {
                g3_quarter = g3;
            }
        }
    }

    let g2_lookup = |t: f64| -> f64 {
        g2_at.iter().find(|(tt, _)| *tt == t).map(|(_, g)| *g).expect("tau present")
    };
    let g2_requested: Vec<f64> = taus.iter().map(|&t| g2_lookup(t)).collect();
    let (g2_zero, g2_quarter) = (g2_lookup(0.0), g2_lookup(quarter));

    Ok(OracleCoherences {
        taus: taus.to_vec(),
        g2: g2_requested,
        g3_zero,
        g3_quarter,
        k_zero: g3_zero / (g2_zero * g2_zero),
        k_quarter: g3_quarter / (g2_quarter * g2_quarter),
        flux,
        dim_used: dim,
        tail_population: rho_ss.tail_population,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::CoherenceEngine;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ideal(beta: f64, n_m: f64, god: f64) -> IdealParams {
        IdealParams::new(beta, n_m, god, 1.0).unwrap()
    }

    #[test]
    fn thermal_two_time_decay_matches_closed_form() {
        // <b†(tau) b(0)> / <b†b> = e^{-γ̃ tau/2} at tau = 1/γ̃
        let (g, nm, dim) = (0.25, 1.2, 40);
        let liou = thermal_liouvillian(g, nm, dim, 1e-4).unwrap();
        let ss = liou.stationary_state().unwrap();
        let b = TruncatedOperator::new(annihilation(dim)).unwrap();
        let b_dag = b.dagger();
        let taus = [0.0, 1.0 / g];
        let vals = regression_correlator(
            &liou,
            &ss,
            InsertionPattern::TwoTime { later: &b_dag, earlier: &b },
            &taus,
            1e-11,
        )
        .unwrap();
        assert_relative_eq!(vals[0].re, nm, max_relative = 1e-8);
        let ratio = vals[1].re / vals[0].re;
        assert_abs_diff_eq!(ratio, (-0.5_f64).exp(), epsilon = 1e-8);
        assert_abs_diff_eq!(vals[1].im, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn thermal_photon_statistics_via_regression() {
        // with A = B = b on a thermal state: g2(0) = 2, g3(0) = 6
        let (g, nm, dim) = (0.1, 0.7, 40);
        let liou = thermal_liouvillian(g, nm, dim, 1e-4).unwrap();
        let ss = liou.stationary_state().unwrap();
        let b = TruncatedOperator::new(annihilation(dim)).unwrap();
        let flux = trace_product(&b.dagger().matrix.dot(&b.matrix), &ss.rho).re;
        let pair = regression_correlator(
            &liou,
            &ss,
            InsertionPattern::PairCoincidence { detect: &b, prepare: &b },
            &[0.0],
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(pair[0].re / (flux * flux), 2.0, epsilon = 1e-8);
        let triple = regression_correlator(
            &liou,
            &ss,
            InsertionPattern::TripleCoincidence { detect: &b, prepare: &b },
            &[0.0],
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(triple[0].re / (flux * flux * flux), 6.0, epsilon = 3e-7);
    }

    #[test]
    fn sideband_operator_limits() {
        // G_b = 0: pure annihilation; photon statistics = phonon statistics
        let p = SystemParams {
            gamma: 1e-5,
            omega_m: 10.0,
            delta: 0.02,
            delta_c: 0.0,
            g_r: 0.01,
            g_b: 0.0,
            n_th: 0.0,
        };
        let op = composite_sideband_operator(&p, 0.0, 6).unwrap();
        // proportional to b: superdiagonal only
        for i in 0..6 {
            for j in 0..6 {
                if j != i + 1 {
                    assert_abs_diff_eq!(op.matrix[(i, j)].norm(), 0.0, epsilon = 1e-18);
                }
            }
        }
        // mirror case: G_r = 0 gives pure creation
        let p2 = SystemParams { g_r: 0.0, g_b: 0.01, ..p };
        let op = composite_sideband_operator(&p2, 0.0, 6).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j + 1 {
                    assert_abs_diff_eq!(op.matrix[(i, j)].norm(), 0.0, epsilon = 1e-18);
                }
            }
        }
        // beta = 1, delta_c = 0: equal weights on b and b† (quadrature)
        let p3 = SystemParams { g_r: 0.01, g_b: 0.01, ..p };
        let op = composite_sideband_operator(&p3, 0.0, 6).unwrap();
        assert_relative_eq!(op.matrix[(0, 1)].norm(), op.matrix[(1, 0)].norm(), max_relative = 1e-13);
    }

    #[test]
    fn oracle_matches_closed_forms_at_a_point() {
        // (beta = 0.05, n_m = 0): g2(0) = 22, g3(0) = 186, K ≈ 0.3843
        let p = ideal(0.05, 0.0, 0.05);
        let o = oracle_coherences(&p, &[0.0], &DimPolicy::default()).unwrap();
        assert_relative_eq!(o.g2[0], 22.0, max_relative = 1e-8);
        assert_relative_eq!(o.g3_zero, 186.0, max_relative = 1e-8);
        assert_relative_eq!(o.k_zero, 186.0 / 484.0, max_relative = 1e-8);

        // (beta = 1, n_m = 0.5): g2(0) = 3
        let p = ideal(1.0, 0.5, 0.05);
        let o = oracle_coherences(&p, &[0.0], &DimPolicy::default()).unwrap();
        assert_relative_eq!(o.g2[0], 3.0, max_relative = 1e-7);
    }

    #[test]
    fn oracle_phase_reference_invariance() {
        // photon statistics cannot depend on the absolute phase time t0
        let p = ideal(0.3, 0.2, 0.05);
        let taus = [0.0, p.quarter_delay()];
        let mut base = DimPolicy::default();
        base.start = Some(16);
        let o1 = oracle_coherences(&p, &taus, &base).unwrap();
        let mut shifted = base.clone();
        shifted.phase_time = 1.37;
        let o2 = oracle_coherences(&p, &taus, &shifted).unwrap();
        for (a, b) in o1.g2.iter().zip(o2.g2.iter()) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        assert_relative_eq!(o1.g3_quarter, o2.g3_quarter, max_relative = 1e-9);
    }

    #[test]
    fn oracle_agrees_with_wick_assembly_including_decay() {
        let p = ideal(0.3, 0.2, 0.05);
        let engine = CoherenceEngine::ideal(&p);
        let taus = [0.0, p.quarter_delay(), 2.0 * p.quarter_delay()];
        let o = oracle_coherences(&p, &taus, &DimPolicy::default()).unwrap();
        for (&tau, &g2) in taus.iter().zip(o.g2.iter()) {
            assert_relative_eq!(g2, engine.g2(tau).unwrap(), max_relative = 1e-7);
        }
        assert_relative_eq!(o.g3_zero, engine.g3(0.0).unwrap(), max_relative = 1e-7);
        assert_relative_eq!(o.g3_quarter, engine.g3(p.quarter_delay()).unwrap(), max_relative = 1e-7);
    }

    #[test]
    fn dim_cap_produces_truncation_error() {
        let p = ideal(0.3, 1.0, 0.05);
        let policy = DimPolicy { dim_cap: 16, ..Default::default() };
        assert!(matches!(oracle_coherences(&p, &[0.0], &policy), Err(Error::Truncation(_))));
    }
}

//! Property tests for the closed-form layer: response symmetries,
//! correlator identities, curve periodicity, inversion round trips,
//! and filter power bookkeeping.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use sideband_stats::coherence::{g2_closed, nm_from_g2, CoherenceEngine};
use sideband_stats::filter::{filter_susceptibility, output_coefficients, FilterParams};
use sideband_stats::mech::{antinormal_correlator, normal_correlator, TwoTimeCorrelators};
use sideband_stats::model::{
    backaction, cooperativities, normalized_response, sideband_suppression, IdealParams, Order,
    SystemParams,
};
use sideband_stats::Error;

fn ideal(beta: f64, n_m: f64, god: f64) -> IdealParams {
    IdealParams::new(beta, n_m, god, 1.0).unwrap()
}

proptest! {
    #[test]
    fn response_bounded_and_symmetric(
        omega in -50.0_f64..50.0,
        delta_c in -5.0_f64..5.0,
    ) {
        let t = normalized_response(omega, delta_c);
        prop_assert!(t > 0.0 && t <= 1.0);
        // symmetric under (omega, delta_c) -> (-omega, -delta_c)
        let mirrored = normalized_response(-omega, -delta_c);
        prop_assert!((t - mirrored).abs() <= 1e-14 * t.max(mirrored));
        // strictly below 1 away from resonance
        if (omega + delta_c).abs() > 1e-6 {
            prop_assert!(t < 1.0);
        }
    }

    #[test]
    fn beta_tilde_equals_beta_on_resonance(
        g_r in 1e-4_f64..0.1,
        ratio in 0.0_f64..3.0,
        delta in 1e-3_f64..0.3,
    ) {
        let p = SystemParams {
            gamma: 1e-5,
            omega_m: 5.0,
            delta,
            delta_c: 0.0,
            g_r,
            g_b: g_r * ratio.sqrt(),
            n_th: 0.0,
        };
        let c = cooperativities(&p).unwrap();
        prop_assert!((c.beta_tilde - c.beta).abs() <= 1e-12 * c.beta.max(1e-300));
    }

    #[test]
    fn commutator_offset(
        n_m in 0.0_f64..20.0,
        gamma_eff in 1e-4_f64..1.0,
        tau in 0.0_f64..50.0,
    ) {
        let c = TwoTimeCorrelators::ideal(n_m, gamma_eff, 1.0);
        let diff = antinormal_correlator(&c, tau).unwrap() - normal_correlator(&c, tau).unwrap();
        let expect = (-gamma_eff * tau / 2.0).exp();
        prop_assert!((diff - expect).abs() <= 1e-12 * expect.max(1e-30));
    }

    #[test]
    fn g2_at_least_one_and_decaying(
        beta in 0.0_f64..5.0,
        n_m in 0.0_f64..5.0,
        god in 1e-3_f64..0.1,
        tau in 0.0_f64..100.0,
    ) {
        prop_assume!(beta > 0.0 || n_m > 0.0);
        let e = CoherenceEngine::ideal(&ideal(beta, n_m, god));
        let g2 = e.g2(tau).unwrap();
        prop_assert!(g2 >= 1.0);
        // infinite-delay factorization
        let far = e.g2(1e4 / god).unwrap();
        prop_assert!((far - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory_part_is_periodic(
        beta in 1e-3_f64..5.0,
        n_m in 0.0_f64..5.0,
        god in 1e-3_f64..0.1,
        tau in 0.0_f64..20.0,
    ) {
        let p = ideal(beta, n_m, god);
        let period = std::f64::consts::PI / p.delta;
        let rescaled = |t: f64| {
            let g2 = g2_closed(&p, t).unwrap();
            (g2 - 1.0 - (-p.gamma_eff() * t).exp()) * (p.gamma_eff() * t).exp()
        };
        let (a, b) = (rescaled(tau), rescaled(tau + period));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn occupation_roundtrip(
        beta in 0.05_f64..3.0,
        n_m in 0.0_f64..5.0,
        god in 1e-4_f64..0.1,
    ) {
        let p = ideal(beta, n_m, god);
        let g0 = g2_closed(&p, 0.0).unwrap();
        let gq = g2_closed(&p, p.quarter_delay()).unwrap();
        let rec = nm_from_g2(g0, gq, god).unwrap();
        prop_assert!((rec - n_m).abs() <= 1e-10 * n_m.max(1.0));
    }

    #[test]
    fn filter_power_bookkeeping(
        omega in -100.0_f64..100.0,
        b_left in 1e-3_f64..0.5,
        b_right in 1e-3_f64..0.5,
        delta_c in -0.2_f64..0.2,
    ) {
        let fp = FilterParams {
            b_total: b_left + b_right,
            b_left,
            b_right,
            kappa_right: 0.4,
            delta_c,
            stages: 1,
        };
        let c = output_coefficients(omega, &fp);
        let chi = filter_susceptibility(omega, &fp);
        let total = c.on_c_in_r.norm_sqr() + fp.b_left * fp.b_right * chi.norm_sqr();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn instability_exactly_at_sign_change(
        c_r in 0.0_f64..30.0,
        c_b in 0.0_f64..30.0,
        omega_m in 0.3_f64..10.0,
    ) {
        prop_assume!(c_r + c_b > 0.0);
        let gamma = 1e-4;
        let p = SystemParams {
            gamma,
            omega_m,
            delta: 0.01,
            delta_c: 0.0,
            g_r: (c_r * gamma / 4.0).sqrt(),
            g_b: (c_b * gamma / 4.0).sqrt(),
            n_th: 1.0,
        };
        let s = sideband_suppression(omega_m);
        let closed_form = gamma * (1.0 + (1.0 - s) * (c_r - c_b));
        match backaction(&p, Order::Ideal) {
            Ok(d) => {
                prop_assert!(closed_form > 0.0);
                prop_assert!((d.gamma_eff - closed_form).abs() <= 1e-10 * closed_form.abs());
                prop_assert!(d.n_m >= 0.0);
                prop_assert!(d.stable);
            }
            Err(Error::Instability { gamma_eff }) => {
                prop_assert!(closed_form <= 0.0);
                prop_assert!((gamma_eff - closed_form).abs() <= 1e-10 * closed_form.abs());
            }
            Err(other) => prop_assert!(false, "unexpected error {other:?}"),
        }
    }
}

#[test]
fn response_peaks_exactly_on_resonance() {
    for &dc in &[-0.4, 0.0, 0.7] {
        assert_abs_diff_eq!(normalized_response(-dc, dc), 1.0, epsilon = 1e-15);
    }
}

#[test]
fn distortion_vanishes_quadratically_in_delta_over_b() {
    use sideband_stats::filter::passband_distortion;
    let delta = 1e-3;
    let d = |b: f64| passband_distortion(&FilterParams::symmetric(b, 0.5, 0.0), delta).unwrap();
    let (d1, d2) = (d(20.0 * delta), d(40.0 * delta));
    let slope = (d1 / d2).ln() / 2.0_f64.ln();
    assert_relative_eq!(slope, 2.0, max_relative = 0.01);
}

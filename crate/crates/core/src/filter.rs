//! Cascaded filter-cavity model.
//!
//! The cavity output passes through a filter cavity (linewidth B, same
//! resonance frequency) before photodetection. Standard input-output
//! theory gives the filter output in terms of the optomechanical mode,
//! its right-mirror vacuum input, and the filter's own right-mirror
//! vacuum; for δ ≪ B ≪ κ, ω_m the detected statistics reduce to those
//! of a_f = ζ_f + a_i with ζ_f the Lorentzian-filtered cavity vacuum
//! noise. A cascade of n identical stages only sharpens the combined
//! passband, so stage count enters as a power of the single-stage
//! weight.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Filter-cavity parameters (κ-units).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FilterParams {
    /// Total filter linewidth B = B_L + B_R.
    pub b_total: f64,
    /// Left-mirror contribution B_L.
    pub b_left: f64,
    /// Right-mirror contribution B_R.
    pub b_right: f64,
    /// Right-mirror decay of the optomechanical cavity, κ_R.
    pub kappa_right: f64,
    /// Shared detuning Δc of the filter/cavity resonance frame.
    pub delta_c: f64,
    /// Number of cascaded stages (≥ 1).
    pub stages: u32,
}

/// Passband hierarchy diagnostics: δ ≪ B ≪ κ ≪ ω_m-side conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FilterFlags {
    pub delta_much_less_than_b: bool,
    pub b_much_less_than_kappa: bool,
}

impl FilterParams {
    pub fn validated(self) -> Result<Self> {
        for (name, v) in [
            ("b_total", self.b_total),
            ("b_left", self.b_left),
            ("b_right", self.b_right),
            ("kappa_right", self.kappa_right),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let sum = self.b_left + self.b_right;
        if (sum - self.b_total).abs() > 1e-12 * self.b_total {
            return Err(Error::InvalidParams(format!(
                "mirror contributions must satisfy b_left + b_right = b_total ({} + {} != {})",
                self.b_left, self.b_right, self.b_total
            )));
        }
        if self.stages == 0 {
            return Err(Error::InvalidParams("stage count must be >= 1".into()));
        }
        Ok(self)
    }

    /// Symmetric two-mirror filter with B_L = B_R = B/2.
    pub fn symmetric(b_total: f64, kappa_right: f64, delta_c: f64) -> Self {
        Self {
            b_total,
            b_left: b_total / 2.0,
            b_right: b_total / 2.0,
            kappa_right,
            delta_c,
            stages: 1,
        }
    }

    pub fn flags(&self, delta: f64) -> FilterFlags {
        FilterFlags {
            delta_much_less_than_b: delta * 10.0 < self.b_total,
            b_much_less_than_kappa: self.b_total * 10.0 < 1.0,
        }
    }
}

/// Filter susceptibility χ_f(ω) = 1/(B/2 − i(ω + Δc)).
pub fn filter_susceptibility(omega: f64, fp: &FilterParams) -> Complex64 {
    1.0 / Complex64::new(fp.b_total / 2.0, -(omega + fp.delta_c))
}

/// Coefficients of the filter output field on its three inputs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OutputCoefficients {
    /// On the optomechanical cavity mode a: √(B_LB_R) χ_f √κ_R.
    pub on_a: Complex64,
    /// On the cavity right-mirror vacuum a_in,R: −√(B_LB_R) χ_f.
    pub on_a_in_r: Complex64,
    /// On the filter right-mirror vacuum c_in,R: B_R χ_f − 1.
    pub on_c_in_r: Complex64,
}

/// Frequency-domain output coefficients of the single filter stage.
pub fn output_coefficients(omega: f64, fp: &FilterParams) -> OutputCoefficients {
    let chi = filter_susceptibility(omega, fp);
    let root = (fp.b_left * fp.b_right).sqrt();
    OutputCoefficients {
        on_a: root * chi * fp.kappa_right.sqrt(),
        on_a_in_r: -root * chi,
        on_c_in_r: fp.b_right * chi - 1.0,
    }
}

/// Spectral weight |(B/2) χ_f(ω)|^{2n} applied to the cavity vacuum
/// noise by an n-stage cascade.
pub fn filtered_noise_weight(omega: f64, fp: &FilterParams) -> f64 {
    let single = (fp.b_total / 2.0 * filter_susceptibility(omega, fp)).norm_sqr();
    single.powi(fp.stages as i32)
}

/// Worst-case transmission error over the two sideband centers ω = ±δ:
/// max |1 − |Bχ_f/2|²|. Quantifies how equally the innermost sidebands
/// pass the filter; vanishes quadratically in δ/B.
pub fn passband_distortion(fp: &FilterParams, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("passband distortion requires delta > 0, got {delta}")));
    }
    let w = |omega: f64| {
        (fp.b_total / 2.0 * filter_susceptibility(omega, fp)).norm_sqr()
    };
    Ok((1.0 - w(delta)).abs().max((1.0 - w(-delta)).abs()))
}

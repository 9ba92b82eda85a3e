//! Physical parameters, cavity response, and dynamical backaction.
//!
//! Everything here is expressed in units of the cavity energy decay
//! rate (κ ≡ 1). The two drive tones couple to the mechanical mode with
//! rates `g_r` (red-detuned) and `g_b` (blue-detuned); their midpoint is
//! detuned by `delta_c` from cavity resonance and the two innermost
//! sidebands sit at ±δ around that midpoint.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
const K_B: f64 = 1.380_649e-23;

/// Which set of backaction / coherence formulas to use.
///
/// `Ideal` takes the limits δ/κ, |Δc|/κ, γ̃/δ → 0: flat cavity response
/// across the two innermost sidebands, no anomalous mechanical
/// correlations, no virtual-phonon pair term. `Corrected` keeps the
/// normalized response t(ω) at the actual sideband frequencies, the
/// finite-overlap σ_m terms, and the virtual-phonon contribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Ideal,
    Corrected,
}

/// Full physical parameter set, in κ-units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SystemParams {
    /// Intrinsic mechanical energy decay rate γ.
    pub gamma: f64,
    /// Bare mechanical angular frequency ω_m.
    pub omega_m: f64,
    /// Half sideband splitting δ ≥ 0.
    pub delta: f64,
    /// Detuning Δc of the two-drive midpoint from cavity resonance.
    pub delta_c: f64,
    /// Red-drive coupling G_r ≥ 0.
    pub g_r: f64,
    /// Blue-drive coupling G_b ≥ 0.
    pub g_b: f64,
    /// Thermal occupation of the mechanical bath.
    pub n_th: f64,
}

/// Parameter-hierarchy diagnostics. These are advisory flags, not hard
/// errors: the closed forms assume γ ≪ δ ≪ κ and |Δc| ≪ κ, and
/// intrinsic sideband cooling further needs ω_m > κ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HierarchyFlags {
    pub gamma_much_less_than_delta: bool,
    pub delta_much_less_than_kappa: bool,
    pub detuning_much_less_than_kappa: bool,
    pub resolved_sideband: bool,
}

impl SystemParams {
    /// Validate hard invariants (positivity of rates and couplings).
    pub fn validated(self) -> Result<Self> {
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.omega_m > 0.0) {
            return Err(Error::InvalidParams(format!(
                "omega_m must be > 0, got {}",
                self.omega_m
            )));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidParams(format!("delta must be >= 0, got {}", self.delta)));
        }
        if !(self.g_r >= 0.0) || !(self.g_b >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "couplings must be >= 0, got g_r = {}, g_b = {}",
                self.g_r, self.g_b
            )));
        }
        if !(self.n_th >= 0.0) {
            return Err(Error::InvalidParams(format!("n_th must be >= 0, got {}", self.n_th)));
        }
        if !self.delta_c.is_finite() {
            return Err(Error::InvalidParams("delta_c must be finite".into()));
        }
        Ok(self)
    }

    /// Drive frequency Ω = 2ω̃_m − δ of the outermost sidebands. The
    /// optical-spring shift is absorbed into the definition of δ, so the
    /// bare ω_m is used here.
    pub fn outer_frequency(&self) -> f64 {
        2.0 * self.omega_m - self.delta
    }

    /// Advisory hierarchy diagnostics (factor-of-ten reading of "≪").
    pub fn hierarchy_flags(&self) -> HierarchyFlags {
        HierarchyFlags {
            gamma_much_less_than_delta: self.gamma * 10.0 < self.delta,
            delta_much_less_than_kappa: self.delta * 10.0 < 1.0,
            detuning_much_less_than_kappa: self.delta_c.abs() * 10.0 < 1.0,
            resolved_sideband: self.omega_m > 1.0,
        }
    }
}

/// Reduced parameter set for the ideal-limit closed forms: drive ratio
/// β = (G_b/G_r)², steady phonon number n_m, and the effective
/// linewidth expressed relative to the sideband half-splitting δ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdealParams {
    /// Squared coupling ratio β = (G_b/G_r)².
    pub beta: f64,
    /// Mean phonon occupation n_m.
    pub n_m: f64,
    /// Effective linewidth γ̃ in units of δ.
    pub gamma_over_delta: f64,
    /// Half splitting δ on an absolute scale (may be 1; only products
    /// δτ and γ̃τ enter the closed forms).
    pub delta: f64,
}

impl IdealParams {
    /// Build a validated parameter set. Rejects β = n_m = 0, for which
    /// no sideband photons exist and the normalized coherences are
    /// undefined.
    pub fn new(beta: f64, n_m: f64, gamma_over_delta: f64, delta: f64) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be finite and >= 0, got {beta}")));
        }
        if !(n_m >= 0.0) {
            return Err(Error::InvalidParams(format!("n_m must be >= 0, got {n_m}")));
        }
        if beta == 0.0 && n_m == 0.0 {
            return Err(Error::Domain(
                "coherences are not well-defined for beta = n_m = 0 (no sideband flux)".into(),
            ));
        }
        if !(gamma_over_delta >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "gamma_over_delta must be >= 0, got {gamma_over_delta}"
            )));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParams(format!("delta must be > 0, got {delta}")));
        }
        Ok(Self { beta, n_m, gamma_over_delta, delta })
    }

    /// Effective linewidth γ̃ on the same absolute scale as `delta`.
    pub fn gamma_eff(&self) -> f64 {
        self.gamma_over_delta * self.delta
    }

    /// Delay of the first g² minimum, τ = π/2δ.
    pub fn quarter_delay(&self) -> f64 {
        std::f64::consts::PI / (2.0 * self.delta)
    }
}

/// Optomechanical cooperativities and their response-weighted variants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cooperativities {
    /// C_r = 4G_r²/(κγ).
    pub c_r: f64,
    /// C_b = 4G_b²/(κγ).
    pub c_b: f64,
    /// C̃_r = t(δ) C_r.
    pub c_r_tilde: f64,
    /// C̃_b = t(−δ) C_b.
    pub c_b_tilde: f64,
    /// β = (G_b/G_r)²; +∞ when G_r = 0.
    pub beta: f64,
    /// β̃ = C̃_b/C̃_r; +∞ when G_r = 0.
    pub beta_tilde: f64,
}

/// Everything `backaction` derives from a physical parameter set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivedQuantities {
    pub order: Order,
    pub beta: f64,
    pub beta_tilde: f64,
    pub c_r: f64,
    pub c_b: f64,
    pub c_r_tilde: f64,
    pub c_b_tilde: f64,
    /// Sideband suppression factor s = 1/(1 + (4ω_m/κ)²).
    pub s: f64,
    /// Normalized cavity response at the four sideband frequencies.
    pub t_plus_delta: f64,
    pub t_minus_delta: f64,
    pub t_plus_omega: f64,
    pub t_minus_omega: f64,
    /// Effective mechanical linewidth γ̃ (κ-units).
    pub gamma_eff: f64,
    /// Steady-state phonon occupation.
    pub n_m: f64,
    /// Occupation n_m⁽⁰⁾ that a single red drive would reach; +∞ when
    /// C_r = 0.
    pub n_m0: f64,
    /// Anomalous mechanical amplitude σ_m = −γ√(C̃_rC̃_b)/(γ̃ + 2iδ).
    pub sigma_m: Complex64,
    /// Two-phonon drive diagnostic |μ|²/(γ̃δ); `None` when δ = 0.
    pub mu_ratio: Option<f64>,
    pub stable: bool,
}

/// Cavity susceptibility χ_c(ω) = 1/(κ/2 − i(ω + Δc)) in κ-units.
pub fn cavity_susceptibility(omega: f64, delta_c: f64) -> Complex64 {
    1.0 / Complex64::new(0.5, -(omega + delta_c))
}

/// Normalized cavity response t(ω) = (κ/2)² |χ_c(ω)|² ∈ (0, 1],
/// maximal at ω = −Δc.
pub fn normalized_response(omega: f64, delta_c: f64) -> f64 {
    let x = omega + delta_c;
    1.0 / (1.0 + 4.0 * x * x)
}

/// Sideband suppression factor s = 1/(1 + (4ω_m/κ)²) entering the
/// residual heating from the outermost sidebands.
pub fn sideband_suppression(omega_m: f64) -> f64 {
    let x = 4.0 * omega_m;
    1.0 / (1.0 + x * x)
}

/// Cooperativities C_j = 4G_j²/(κγ), their t(∓δ)-weighted effective
/// versions, and the coupling ratios β, β̃.
///
/// β and β̃ are reported as +∞ when G_r = 0; both couplings zero is an
/// error since nothing is driven.
pub fn cooperativities(p: &SystemParams) -> Result<Cooperativities> {
    if p.g_r == 0.0 && p.g_b == 0.0 {
        return Err(Error::InvalidParams("both couplings are zero".into()));
    }
    let c_r = 4.0 * p.g_r * p.g_r / p.gamma;
    let c_b = 4.0 * p.g_b * p.g_b / p.gamma;
    let t_p = normalized_response(p.delta, p.delta_c);
    let t_m = normalized_response(-p.delta, p.delta_c);
    let c_r_tilde = t_p * c_r;
    let c_b_tilde = t_m * c_b;
    let (beta, beta_tilde) = if p.g_r == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        ((p.g_b / p.g_r).powi(2), c_b_tilde / c_r_tilde)
    };
    Ok(Cooperativities { c_r, c_b, c_r_tilde, c_b_tilde, beta, beta_tilde })
}

/// Effective linewidth γ̃ and steady occupation n_m from dynamical
/// backaction, plus every diagnostic the rest of the crate consumes.
///
/// At `Ideal` order,
///   γ̃ = γ[1 + (1−s)(C_r − C_b)],
///   n_m = (n_th + C_b + sC_r)/[1 + (1−s)(C_r − C_b)];
/// at `Corrected` order the s-factors are replaced by the normalized
/// response at the actual sideband frequencies ±δ and ±Ω, Ω = 2ω_m − δ.
///
/// Fails with [`Error::Instability`] when γ̃ ≤ 0: the linearized model
/// then has no stationary state and Eq.-of-motion averages diverge.
pub fn backaction(p: &SystemParams, order: Order) -> Result<DerivedQuantities> {
    let p = (*p).validated()?;
    let coop = cooperativities(&p)?;
    let s = sideband_suppression(p.omega_m);
    let omega = p.outer_frequency();
    let t_plus_delta = normalized_response(p.delta, p.delta_c);
    let t_minus_delta = normalized_response(-p.delta, p.delta_c);
    let t_plus_omega = normalized_response(omega, p.delta_c);
    let t_minus_omega = normalized_response(-omega, p.delta_c);

    let (damping, heating) = match order {
        Order::Ideal => (
            1.0 + (1.0 - s) * (coop.c_r - coop.c_b),
            p.n_th + coop.c_b + s * coop.c_r,
        ),
        Order::Corrected => (
            1.0 + (t_plus_delta - t_minus_omega) * coop.c_r
                - (t_minus_delta - t_plus_omega) * coop.c_b,
            p.n_th + t_minus_delta * coop.c_b + t_minus_omega * coop.c_r,
        ),
    };
    let gamma_eff = p.gamma * damping;
    if gamma_eff <= 0.0 {
        return Err(Error::Instability { gamma_eff });
    }
    let n_m = heating / damping;

    let n_m0 = if coop.c_r == 0.0 {
        f64::INFINITY
    } else {
        match order {
            Order::Ideal => p.n_th / coop.c_r + 1.0 / (4.0 * p.omega_m).powi(2),
            Order::Corrected => p.n_th / coop.c_r_tilde + t_minus_omega / t_plus_delta,
        }
    };

    let sigma_m = if coop.c_b_tilde == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        -p.gamma * (coop.c_r_tilde * coop.c_b_tilde).sqrt()
            / Complex64::new(gamma_eff, 2.0 * p.delta)
    };

    let mu_ratio = if p.delta > 0.0 {
        let im_mu = 2.0 * p.gamma * coop.c_r_tilde * coop.beta_tilde.sqrt() * p.delta_c;
        Some(im_mu * im_mu / (gamma_eff * p.delta))
    } else {
        None
    };

    Ok(DerivedQuantities {
        order,
        beta: coop.beta,
        beta_tilde: coop.beta_tilde,
        c_r: coop.c_r,
        c_b: coop.c_b,
        c_r_tilde: coop.c_r_tilde,
        c_b_tilde: coop.c_b_tilde,
        s,
        t_plus_delta,
        t_minus_delta,
        t_plus_omega,
        t_minus_omega,
        gamma_eff,
        n_m,
        n_m0,
        sigma_m,
        mu_ratio,
        stable: gamma_eff > 0.0,
    })
}

/// Reduce a physical parameter set to the ideal-limit parameters
/// (β or β̃, n_m, γ̃/δ, δ) through [`backaction`].
///
/// At `Corrected` order the coupling ratio is the response-weighted β̃,
/// which is what replaces β in the closed forms once t(δ) ≠ t(−δ).
pub fn ideal_params_from(p: &SystemParams, order: Order) -> Result<IdealParams> {
    if p.delta <= 0.0 {
        return Err(Error::Domain("ideal-limit reduction requires delta > 0".into()));
    }
    let d = backaction(p, order)?;
    let beta = match order {
        Order::Ideal => d.beta,
        Order::Corrected => d.beta_tilde,
    };
    IdealParams::new(beta, d.n_m, d.gamma_eff / p.delta, p.delta)
}

/// Intrinsic sideband-cooling limit: the occupation n_m⁽⁰⁾ a single red
/// drive would reach, and the two-tone occupation
/// n_m = (n_m⁽⁰⁾ + β)/(1 − β) it implies.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoolingLimit {
    pub n_m0: f64,
    pub n_m: f64,
    /// Validity of the strong red-drive assumption C_r − C_b ≫ 1 behind
    /// the limit formulas (advisory).
    pub strong_cooling: bool,
}

/// Cooling limit in the regime of predominantly optical damping.
/// Requires β < 1 (β̃ < 1 at corrected order); the C_r ≫ C_b validity is
/// reported as a flag, not enforced.
pub fn cooling_limit(p: &SystemParams, order: Order) -> Result<CoolingLimit> {
    let d = backaction(p, order)?;
    let beta = match order {
        Order::Ideal => d.beta,
        Order::Corrected => d.beta_tilde,
    };
    if beta >= 1.0 {
        return Err(Error::Domain(format!(
            "cooling limit requires beta < 1 (blue drive weaker than red), got {beta}"
        )));
    }
    Ok(CoolingLimit {
        n_m0: d.n_m0,
        n_m: (d.n_m0 + beta) / (1.0 - beta),
        strong_cooling: d.c_r - d.c_b > 10.0,
    })
}

/// Residual two-phonon drive diagnostic |μ|²/(γ̃δ) with
/// Im μ = 2γC̃_r√β̃ Δc/κ (the real part is negligible in the regime of
/// interest). A small value justifies dropping the off-resonant μ term
/// from the mechanical Langevin equation.
pub fn two_phonon_drive_ratio(p: &SystemParams) -> Result<f64> {
    if p.delta == 0.0 {
        return Err(Error::Domain("mu ratio is undefined at delta = 0".into()));
    }
    let d = backaction(p, Order::Corrected)?;
    Ok(d.mu_ratio.expect("delta > 0 was checked"))
}

/// Bose occupation of a bath mode at angular frequency `omega_abs`
/// (rad/s) and temperature `temperature` (K). The only function in the
/// crate using absolute units.
pub fn thermal_occupation(omega_abs: f64, temperature: f64) -> f64 {
    assert!(omega_abs > 0.0, "frequency must be positive");
    assert!(temperature >= 0.0, "temperature must be nonnegative");
    if temperature == 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_abs / (K_B * temperature);
    1.0 / x.exp_m1()
}

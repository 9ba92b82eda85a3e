//! Second- and third-order coherences of the filtered sideband field.
//!
//! Because the dynamics is linear and the mechanical steady state
//! Gaussian, every coherence factorizes into pair correlators of the
//! filtered field a_f. With the stationary flux F = ⟨a_f†a_f⟩,
//!
//!   g²(τ) = 1 + (|⟨a_f†(t+τ)a_f(t)⟩|² + |⟨a_f(t+τ)a_f(t)⟩|²)/F²,
//!
//!   g³(t,t,t+τ) = 4g²(τ) + g²(0) − 4
//!       + 4 Re{⟨a_f²⟩* ⟨a_f†(t+τ)a_f(t)⟩ ⟨a_f(t+τ)a_f(t)⟩} / F³.
//!
//! [`CoherenceEngine`] evaluates this assembly at two orders: the ideal
//! limit (flat cavity response, strictly separated sidebands), where it
//! reproduces the closed forms [`g2_closed`], [`g3_zero_closed`] and
//! [`g3_quarter_closed`] exactly, and a corrected order that keeps the
//! finite-overlap σ_m terms and the virtual-phonon pair amplitude,
//! which decays at κ/2 rather than γ̃/2.
//!
//! Absolute-time phases cancel in every modulus and in the Re{·} triple
//! product (the e^{±2iδt} rotation of ⟨a_f²⟩ conjugate-cancels against
//! the two delay correlators), so all quantities depend on the delay
//! only.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{backaction, cavity_susceptibility, IdealParams, Order, SystemParams};

/// Which classical inequality K ≥ 1 is being probed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalityCriterion {
    /// K(t,t): violation rules out a positive Glauber-Sudarshan
    /// distribution for the filtered mode.
    EqualTime,
    /// K(t,t+π/2δ): violation rules out a joint two-time probability
    /// distribution.
    QuarterDelay,
}

/// Complex pair correlators entering the Gaussian assembly at one delay.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WickComponents {
    /// ⟨a_f†(t+τ) a_f(t)⟩.
    pub normal: Complex64,
    /// ⟨a_f(t+τ) a_f(t)⟩.
    pub anomalous: Complex64,
    /// Equal-time ⟨a_f²⟩.
    pub equal_time_sq: Complex64,
    /// Stationary flux ⟨a_f†a_f⟩.
    pub flux: f64,
}

/// One sampled delay of a coherence curve.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceSample {
    pub tau: f64,
    pub g2: f64,
    pub g3: Option<f64>,
    pub k: Option<f64>,
    pub order: Order,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<WickComponents>,
}

/// Parameter set a curve was generated from.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveParams {
    Ideal(IdealParams),
    Physical(SystemParams),
}

/// Sampled g²/g³/K curve with provenance metadata.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceCurve {
    pub samples: Vec<CoherenceSample>,
    pub params: CurveParams,
    pub order: Order,
}

impl CoherenceCurve {
    /// Delays must be strictly increasing and start at 0.
    pub fn new(samples: Vec<CoherenceSample>, params: CurveParams, order: Order) -> Result<Self> {
        if samples.is_empty() || samples[0].tau != 0.0 {
            return Err(Error::InvalidParams("curve must start at tau = 0".into()));
        }
        if samples.windows(2).any(|w| w[1].tau <= w[0].tau) {
            return Err(Error::InvalidParams("curve delays must be strictly increasing".into()));
        }
        Ok(Self { samples, params, order })
    }
}

/// Pair-correlator evaluator for the filtered field.
///
/// The two delay correlators share the structure
///   ⟨·(t+τ)·(t)⟩ = e^{−γ̃τ/2} (e^{iδτ} c₊ + e^{−iδτ} c₋) + virtual term,
/// so the engine stores the four coefficients, the virtual-phonon
/// amplitude, and the flux.
#[derive(Debug, Clone, Copy)]
pub struct CoherenceEngine {
    n_plus: Complex64,
    n_minus: Complex64,
    a_plus: Complex64,
    a_minus: Complex64,
    /// Virtual-phonon pair amplitude (zero at ideal order).
    virt: Complex64,
    /// Its decay-and-rotation rate κ/2 − iΔc.
    virt_decay: Complex64,
    gamma_eff: f64,
    delta: f64,
    flux: f64,
    equal_time_sq: Complex64,
    order: Order,
}

impl CoherenceEngine {
    /// Ideal-limit engine from reduced parameters. The common scale
    /// G_r²|χ_c|² cancels in all normalized quantities and is set to 1.
    pub fn ideal(p: &IdealParams) -> Self {
        let (beta, n) = (p.beta, p.n_m);
        let sqrt_beta = beta.sqrt();
        let n_plus = Complex64::new(n, 0.0);
        let n_minus = Complex64::new(beta * (n + 1.0), 0.0);
        let a_plus = Complex64::new(-sqrt_beta * n, 0.0);
        let a_minus = Complex64::new(-sqrt_beta * (n + 1.0), 0.0);
        Self {
            n_plus,
            n_minus,
            a_plus,
            a_minus,
            virt: Complex64::new(0.0, 0.0),
            virt_decay: Complex64::new(0.5, 0.0),
            gamma_eff: p.gamma_eff(),
            delta: p.delta,
            flux: (n_plus + n_minus).re,
            equal_time_sq: a_plus + a_minus,
            order: Order::Ideal,
        }
    }

    /// Engine from physical parameters. `Order::Ideal` routes through
    /// the ideal backaction and flat response; `Order::Corrected` keeps
    /// the full cavity response, the σ_m overlap terms, and the
    /// virtual-phonon amplitude i G_rG_b χ_c(δ)χ_c(−δ) δ χ_c(0).
    pub fn from_system(p: &SystemParams, order: Order) -> Result<Self> {
        let d = backaction(p, order)?;
        let (n_m, gamma_eff) = (d.n_m, d.gamma_eff);
        match order {
            Order::Ideal => {
                // chi_c(±delta) -> 2/kappa
                let n_plus = Complex64::new(4.0 * p.g_r * p.g_r * n_m, 0.0);
                let n_minus = Complex64::new(4.0 * p.g_b * p.g_b * (n_m + 1.0), 0.0);
                let cross = 4.0 * p.g_r * p.g_b;
                let a_plus = Complex64::new(-cross * n_m, 0.0);
                let a_minus = Complex64::new(-cross * (n_m + 1.0), 0.0);
                Ok(Self {
                    n_plus,
                    n_minus,
                    a_plus,
                    a_minus,
                    virt: Complex64::new(0.0, 0.0),
                    virt_decay: Complex64::new(0.5, 0.0),
                    gamma_eff,
                    delta: p.delta,
                    flux: (n_plus + n_minus).re,
                    equal_time_sq: a_plus + a_minus,
                    order,
                })
            }
            Order::Corrected => {
                let chi_p = cavity_susceptibility(p.delta, p.delta_c);
                let chi_m = cavity_susceptibility(-p.delta, p.delta_c);
                let denom_m = Complex64::new(gamma_eff, -2.0 * p.delta);
                let denom_p = Complex64::new(gamma_eff, 2.0 * p.delta);
                let corr_r = n_m - p.gamma * d.c_b_tilde / denom_m;
                let corr_b = n_m + 1.0 - p.gamma * d.c_r_tilde / denom_p;
                let n_plus = p.g_r * p.g_r * chi_p.norm_sqr() * corr_r;
                let n_minus = p.g_b * p.g_b * chi_m.norm_sqr() * corr_b;
                let cross = -p.g_r * p.g_b * chi_p * chi_m;
                let a_plus = cross * corr_r;
                let a_minus = cross * corr_b;
                let virt = Complex64::i()
                    * p.g_r
                    * p.g_b
                    * chi_p
                    * chi_m
                    * p.delta
                    * cavity_susceptibility(0.0, p.delta_c);
                let flux = n_plus + n_minus;
                debug_assert!(flux.im.abs() <= 1e-10 * flux.re.abs().max(1e-300));
                Ok(Self {
                    n_plus,
                    n_minus,
                    a_plus,
                    a_minus,
                    virt,
                    virt_decay: Complex64::new(0.5, -p.delta_c),
                    gamma_eff,
                    delta: p.delta,
                    flux: flux.re,
                    equal_time_sq: a_plus + a_minus + virt,
                    order,
                })
            }
        }
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Stationary sideband photon flux ⟨a_f†a_f⟩.
    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn gamma_eff(&self) -> f64 {
        self.gamma_eff
    }

    /// ⟨a_f†(t+τ) a_f(t)⟩.
    pub fn af_normal(&self, tau: f64) -> Result<Complex64> {
        check_delay(tau)?;
        let env = (-self.gamma_eff * tau / 2.0).exp();
        let osc = Complex64::from_polar(1.0, self.delta * tau);
        Ok(env * (osc * self.n_plus + osc.conj() * self.n_minus))
    }

    /// ⟨a_f(t+τ) a_f(t)⟩: mechanical part plus, at corrected order, the
    /// virtual-phonon term decaying at κ/2.
    pub fn af_anomalous(&self, tau: f64) -> Result<Complex64> {
        check_delay(tau)?;
        let env = (-self.gamma_eff * tau / 2.0).exp();
        let osc = Complex64::from_polar(1.0, self.delta * tau);
        let mech = env * (osc * self.a_plus + osc.conj() * self.a_minus);
        Ok(mech + self.virt * (-self.virt_decay * tau).exp())
    }

    /// Equal-time ⟨a_f²⟩.
    pub fn equal_time_sq(&self) -> Complex64 {
        self.equal_time_sq
    }

    /// Virtual-phonon pair amplitude ⟨ζ_f a_i⟩(τ=0); zero at ideal order.
    pub fn virtual_pair(&self) -> Complex64 {
        self.virt
    }

    fn check_flux(&self) -> Result<()> {
        if self.flux <= 0.0 {
            return Err(Error::ZeroFlux);
        }
        Ok(())
    }

    /// g²(τ) from the pair-correlator assembly.
    pub fn g2(&self, tau: f64) -> Result<f64> {
        self.check_flux()?;
        let n = self.af_normal(tau)?;
        let a = self.af_anomalous(tau)?;
        Ok(1.0 + (n.norm_sqr() + a.norm_sqr()) / (self.flux * self.flux))
    }

    /// g³(t,t,t+τ) for the two-distinct-times pattern.
    pub fn g3(&self, tau: f64) -> Result<f64> {
        self.check_flux()?;
        let n = self.af_normal(tau)?;
        let a = self.af_anomalous(tau)?;
        let triple = (self.equal_time_sq.conj() * n * a).re;
        Ok(4.0 * self.g2(tau)? + self.g2(0.0)? - 4.0 + 4.0 * triple / self.flux.powi(3))
    }

    /// K(τ) = g³(τ)/g²(τ)².
    pub fn k(&self, tau: f64) -> Result<f64> {
        let g2 = self.g2(tau)?;
        k_functional(self.g3(tau)?, g2)
    }

    /// Sample one delay, with g³, K, and the assembly components.
    pub fn sample(&self, tau: f64) -> Result<CoherenceSample> {
        let g2 = self.g2(tau)?;
        let g3 = self.g3(tau)?;
        Ok(CoherenceSample {
            tau,
            g2,
            g3: Some(g3),
            k: Some(k_functional(g3, g2)?),
            order: self.order,
            components: Some(WickComponents {
                normal: self.af_normal(tau)?,
                anomalous: self.af_anomalous(tau)?,
                equal_time_sq: self.equal_time_sq,
                flux: self.flux,
            }),
        })
    }
}

fn check_delay(tau: f64) -> Result<()> {
    if tau < 0.0 {
        return Err(Error::Domain(format!("delay must be >= 0, got {tau}")));
    }
    Ok(())
}

/// ⟨a_f†(t+τ) a_f(t)⟩ for a physical parameter set.
pub fn af_normal_correlator(p: &SystemParams, tau: f64, order: Order) -> Result<Complex64> {
    CoherenceEngine::from_system(p, order)?.af_normal(tau)
}

/// ⟨a_f(t+τ) a_f(t)⟩ for a physical parameter set.
pub fn af_anomalous_correlator(p: &SystemParams, tau: f64, order: Order) -> Result<Complex64> {
    CoherenceEngine::from_system(p, order)?.af_anomalous(tau)
}

/// g²(τ) via the pair-correlator assembly for a physical parameter set.
pub fn g2_wick(p: &SystemParams, tau: f64, order: Order) -> Result<f64> {
    CoherenceEngine::from_system(p, order)?.g2(tau)
}

/// g³(t,t,t+τ) via the pair-correlator assembly.
pub fn g3_wick(p: &SystemParams, tau: f64, order: Order) -> Result<f64> {
    CoherenceEngine::from_system(p, order)?.g3(tau)
}

/// Closed-form ideal-limit second-order coherence,
///
///   g²(τ) = 1 + e^{−γ̃τ} (1 + 4β[1/4 + n_m(n_m+1) cos 2δτ] / D²),
///
/// D = n_m + β(n_m + 1).
pub fn g2_closed(p: &IdealParams, tau: f64) -> Result<f64> {
    check_delay(tau)?;
    let d = p.n_m + p.beta * (p.n_m + 1.0);
    if d == 0.0 {
        return Err(Error::Domain("g2 undefined for beta = n_m = 0".into()));
    }
    let osc = 0.25 + p.n_m * (p.n_m + 1.0) * (2.0 * p.delta * tau).cos();
    Ok(1.0 + (-p.gamma_eff() * tau).exp() * (1.0 + 4.0 * p.beta * osc / (d * d)))
}

/// Initial oscillation amplitude A = 4β n_m(n_m+1)/D² of the g²
/// interference fringe.
pub fn oscillation_amplitude(p: &IdealParams) -> Result<f64> {
    let d = p.n_m + p.beta * (p.n_m + 1.0);
    if d == 0.0 {
        return Err(Error::Domain("amplitude undefined for beta = n_m = 0".into()));
    }
    Ok(4.0 * p.beta * p.n_m * (p.n_m + 1.0) / (d * d))
}

/// Equal-time third-order coherence of a Gaussian state,
/// g³(0) = 9 g²(0) − 12.
pub fn g3_zero_closed(p: &IdealParams) -> Result<f64> {
    Ok(9.0 * g2_closed(p, 0.0)? - 12.0)
}

/// g²(π/2δ) in the strict γ̃/δ → 0 limit (decay envelope set to 1,
/// cos 2δτ = −1).
pub fn g2_quarter_strict(beta: f64, n_m: f64) -> Result<f64> {
    let d = n_m + beta * (n_m + 1.0);
    if d == 0.0 {
        return Err(Error::Domain("g2 undefined for beta = n_m = 0".into()));
    }
    Ok(2.0 + 4.0 * beta * (0.25 - n_m * (n_m + 1.0)) / (d * d))
}

/// g³ at the first interference minimum τ = π/2δ, in the strict
/// γ̃/δ → 0 limit:
///
///   g³(π/2δ) = 6 + (β/D²) [8 − 3(2n+1)² + 4(2n+1)(n − β(n+1))/D].
///
/// The bracket can be negative for extreme (β, n_m); the raw value is
/// reported and g³ < 0 flags an out-of-validity regime.
pub fn g3_quarter_closed(p: &IdealParams) -> Result<f64> {
    let (beta, n) = (p.beta, p.n_m);
    let d = n + beta * (n + 1.0);
    if d == 0.0 {
        return Err(Error::Domain("g3 undefined for beta = n_m = 0".into()));
    }
    let two_n1 = 2.0 * n + 1.0;
    let bracket = 8.0 - 3.0 * two_n1 * two_n1 + 4.0 * two_n1 * (n - beta * (n + 1.0)) / d;
    Ok(6.0 + beta / (d * d) * bracket)
}

/// K = g³/(g²)².
pub fn k_functional(g3: f64, g2: f64) -> Result<f64> {
    if g2 == 0.0 {
        return Err(Error::Domain("K undefined at g2 = 0".into()));
    }
    Ok(g3 / (g2 * g2))
}

/// Recover the phonon occupation from measured g²(0) and g²(π/2δ).
///
/// The decay-compensated ratio
///   R = e^{−πγ̃/2δ} (g²(0) − 2) / (1 + e^{−πγ̃/2δ} − g²(π/2δ))
/// equals (n+1/2)²/[(n+1/2)² − 1/2] independently of β, inverted via
/// x = R/(2(R−1)), n_m = √x − 1/2. R ∈ (−1, 1] and x < 1/4 cannot come
/// from any occupation and are rejected.
pub fn nm_from_g2(g2_zero: f64, g2_quarter: f64, gamma_over_delta: f64) -> Result<f64> {
    let decay = (-std::f64::consts::FRAC_PI_2 * gamma_over_delta).exp();
    let num = decay * (g2_zero - 2.0);
    let den = 1.0 + decay - g2_quarter;
    if num == 0.0 {
        return Err(Error::Domain(
            "g2(0) = 2 carries no interference term; n_m is not recoverable".into(),
        ));
    }
    if den != 0.0 {
        let r = num / den;
        if r > -1.0 && r <= 1.0 {
            return Err(Error::Domain(format!(
                "ratio R = {r} lies in (-1, 1]; inconsistent with the ideal-limit curve"
            )));
        }
    }
    // x = R/(2(R-1)) rewritten to stay finite as den -> 0 (R -> inf)
    let x = num / (2.0 * (num - den));
    if x < 0.25 {
        return Err(Error::Domain(format!("x = {x} < 1/4 maps to no occupation")));
    }
    Ok(x.sqrt() - 0.5)
}

/// Result of a classicality check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassicalityReport {
    pub g2: f64,
    pub g3: f64,
    pub k: f64,
    /// True when K < 1, i.e. the classical inequality fails.
    pub violated: bool,
}

/// Evaluate K for one of the two classical inequalities in the strict
/// ideal limit and report whether it is violated.
pub fn classicality_check(p: &IdealParams, which: ClassicalityCriterion) -> Result<ClassicalityReport> {
    let (g2, g3) = match which {
        ClassicalityCriterion::EqualTime => {
            let g2 = g2_closed(p, 0.0)?;
            (g2, 9.0 * g2 - 12.0)
        }
        ClassicalityCriterion::QuarterDelay => {
            (g2_quarter_strict(p.beta, p.n_m)?, g3_quarter_closed(p)?)
        }
    };
    let k = k_functional(g3, g2)?;
    Ok(ClassicalityReport { g2, g3, k, violated: k < 1.0 })
}

/// Overlapping-sideband special case δ = 0: the anomalous mechanical
/// correlators exactly cancel the σ corrections and the main-text
/// closed forms hold with n_m replaced by the bath occupation n_th
/// (so intrinsic sideband cooling does not help here). Valid under the
/// rotating-wave condition ω_m ≫ κ, reported as a flag.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaZeroResult {
    pub sample: CoherenceSample,
    pub rwa_valid: bool,
}

pub fn delta_zero_coherences(p: &SystemParams, tau: f64) -> Result<DeltaZeroResult> {
    if p.delta != 0.0 {
        return Err(Error::Domain(format!("delta-zero evaluation requires delta = 0, got {}", p.delta)));
    }
    check_delay(tau)?;
    let d = backaction(p, Order::Ideal)?;
    let beta = d.beta;
    let n = p.n_th;
    let denom = n + beta * (n + 1.0);
    if denom == 0.0 {
        return Err(Error::Domain("coherences undefined for beta = n_th = 0".into()));
    }
    let env = (-d.gamma_eff * tau).exp();
    let g2 = 1.0 + env * (1.0 + 4.0 * beta * (0.25 + n * (n + 1.0)) / (denom * denom));
    let g2_zero = 2.0 + (beta + 4.0 * beta * n * (n + 1.0)) / (denom * denom);
    let g3 = 9.0 * g2_zero - 12.0;
    Ok(DeltaZeroResult {
        sample: CoherenceSample {
            tau,
            g2,
            g3: if tau == 0.0 { Some(g3) } else { None },
            k: if tau == 0.0 { Some(k_functional(g3, g2_zero)?) } else { None },
            order: Order::Ideal,
            components: None,
        },
        rwa_valid: p.omega_m > 10.0,
    })
}

/// Threshold g²(0) above which the equal-time inequality fails for a
/// Gaussian state: the larger root of g² − 9g + 12 = 0.
pub fn equal_time_violation_threshold() -> f64 {
    (9.0 + 33.0_f64.sqrt()) / 2.0
}

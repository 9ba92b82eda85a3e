//! Run configuration: a TOML file with one parameter block plus
//! optional scan/filter/oracle/tolerance sections, overridable from the
//! command line. The effective (post-override) configuration is hashed
//! and the hash stamped into every output, so a byte-identical file
//! always reproduces byte-identical results.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sideband_stats::model::{IdealParams, SystemParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Physical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealBlock {
    pub beta: f64,
    pub nm: f64,
    /// γ̃ in units of δ.
    pub gamma_over_delta: f64,
    #[serde(default = "default_delta_unit")]
    pub delta: f64,
}

fn default_delta_unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalBlock {
    pub gamma: f64,
    pub omega_m: f64,
    pub delta: f64,
    #[serde(default)]
    pub delta_c: f64,
    pub g_r: f64,
    pub g_b: f64,
    #[serde(default)]
    pub n_th: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub points: Option<usize>,
    /// "lin" or "log".
    pub scale: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    /// "k0" or "kdelay".
    pub criterion: Option<String>,
    /// "nm" or "nm0".
    pub axes: Option<String>,
    #[serde(default)]
    pub beta: GridBlock,
    #[serde(default)]
    pub scan: GridBlock,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterBlock {
    pub b_total: f64,
    /// Left/right mirror split; symmetric when omitted.
    pub b_left: Option<f64>,
    pub b_right: Option<f64>,
    pub kappa_right: f64,
    pub stages: u32,
}

impl Default for FilterBlock {
    fn default() -> Self {
        Self { b_total: 0.05, b_left: None, b_right: None, kappa_right: 0.5, stages: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    /// Grid values used for both β and n_m in `oracle-compare`.
    pub points: Option<Vec<f64>>,
    pub dim_start: Option<usize>,
    pub dim_cap: usize,
    pub tail_threshold: f64,
}

impl Default for OracleBlock {
    fn default() -> Self {
        Self { points: None, dim_start: None, dim_cap: 256, tail_threshold: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Bound on |closed − oracle|/|closed| in `oracle-compare`.
    pub oracle_rel_err: f64,
    /// Relative accuracy of oracle time propagation.
    pub propagation: f64,
    /// Convergence target of the truncation-doubling loop.
    pub truncation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { oracle_rel_err: 1e-6, propagation: 1e-10, truncation: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub ideal: Option<IdealBlock>,
    pub physical: Option<PhysicalBlock>,
    #[serde(default)]
    pub scan: ScanBlock,
    #[serde(default)]
    pub filter: FilterBlock,
    #[serde(default)]
    pub oracle: OracleBlock,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Ideal,
            ideal: Some(IdealBlock { beta: 1.0, nm: 0.5, gamma_over_delta: 0.05, delta: 1.0 }),
            physical: None,
            scan: ScanBlock::default(),
            filter: FilterBlock::default(),
            oracle: OracleBlock::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// Command-line overrides; flags win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub nm: Option<f64>,
    pub gamma_eff: Option<f64>,
    pub delta: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&std::path::Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        config.apply_overrides(overrides)?;
        config.validate()?;
        Ok(config)
    }

    fn apply_overrides(&mut self, ov: &Overrides) -> Result<(), CliError> {
        match self.mode {
            Mode::Ideal => {
                let block = self
                    .ideal
                    .as_mut()
                    .ok_or_else(|| CliError::Config("mode = ideal requires an [ideal] block".into()))?;
                if let Some(b) = ov.beta {
                    block.beta = b;
                }
                if let Some(n) = ov.nm {
                    block.nm = n;
                }
                if let Some(g) = ov.gamma_eff {
                    block.gamma_over_delta = g;
                }
                if let Some(d) = ov.delta {
                    block.delta = d;
                }
            }
            Mode::Physical => {
                let block = self.physical.as_mut().ok_or_else(|| {
                    CliError::Config("mode = physical requires a [physical] block".into())
                })?;
                if let Some(d) = ov.delta {
                    block.delta = d;
                }
                if let Some(b) = ov.beta {
                    if block.g_r <= 0.0 {
                        return Err(CliError::Config(
                            "--beta override needs g_r > 0 in the [physical] block".into(),
                        ));
                    }
                    block.g_b = block.g_r * b.sqrt();
                }
                if ov.nm.is_some() || ov.gamma_eff.is_some() {
                    return Err(CliError::Config(
                        "--nm and --gamma-eff are derived quantities in physical mode; \
                         override the couplings instead"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        match self.mode {
            Mode::Ideal => {
                if self.ideal.is_none() || self.physical.is_some() {
                    return Err(CliError::Config(
                        "mode = ideal requires exactly the [ideal] parameter block".into(),
                    ));
                }
            }
            Mode::Physical => {
                if self.physical.is_none() || self.ideal.is_some() {
                    return Err(CliError::Config(
                        "mode = physical requires exactly the [physical] parameter block".into(),
                    ));
                }
            }
        }
        for (name, v) in [
            ("tolerances.oracle_rel_err", self.tolerances.oracle_rel_err),
            ("tolerances.propagation", self.tolerances.propagation),
            ("tolerances.truncation", self.tolerances.truncation),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization of the effective config.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(digest)
    }

    pub fn ideal_params(&self) -> Result<IdealParams, CliError> {
        let block = self
            .ideal
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs mode = ideal".into()))?;
        IdealParams::new(block.beta, block.nm, block.gamma_over_delta, block.delta)
            .map_err(CliError::Physics)
    }

    pub fn system_params(&self) -> Result<SystemParams, CliError> {
        let block = self
            .physical
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs mode = physical".into()))?;
        SystemParams {
            gamma: block.gamma,
            omega_m: block.omega_m,
            delta: block.delta,
            delta_c: block.delta_c,
            g_r: block.g_r,
            g_b: block.g_b,
            n_th: block.n_th,
        }
        .validated()
        .map_err(CliError::Physics)
    }

    /// Shared detuning seen by the filter stage.
    pub fn filter_delta_c(&self) -> f64 {
        self.physical.as_ref().map_or(0.0, |p| p.delta_c)
    }
}

//! `derive`: backaction quantities plus validity diagnostics.

use std::path::Path;

use serde::Serialize;

use sideband_stats::model::{
    backaction, cooling_limit, CoolingLimit, DerivedQuantities, HierarchyFlags, IdealParams, Order,
};

use crate::config::{Mode, RunConfig};
use crate::output::{emit, to_json};
use crate::CliError;

#[derive(Serialize)]
struct IdealReport<'a> {
    config_hash: &'a str,
    mode: &'static str,
    params: IdealParams,
    flags: IdealFlags,
}

#[derive(Serialize)]
struct IdealFlags {
    well_separated_sidebands: bool,
    flux_defined: bool,
}

#[derive(Serialize)]
struct PhysicalReport<'a> {
    config_hash: &'a str,
    mode: &'static str,
    hierarchy: HierarchyFlags,
    ideal: DerivedQuantities,
    corrected: DerivedQuantities,
    /// Present when β < 1 (cooling-limit regime).
    cooling_limit: Option<CoolingLimit>,
    reduced: IdealParams,
}

pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let hash = config.hash();
    let report = match config.mode {
        Mode::Ideal => {
            let params = config.ideal_params()?;
            to_json(&IdealReport {
                config_hash: &hash,
                mode: "ideal",
                flags: IdealFlags {
                    well_separated_sidebands: params.gamma_over_delta < 0.1,
                    flux_defined: params.beta > 0.0 || params.n_m > 0.0,
                },
                params,
            })?
        }
        Mode::Physical => {
            let params = config.system_params()?;
            let ideal = backaction(&params, Order::Ideal)?;
            let corrected = backaction(&params, Order::Corrected)?;
            let cooling = if corrected.beta_tilde < 1.0 {
                Some(cooling_limit(&params, Order::Corrected)?)
            } else {
                None
            };
            let reduced =
                sideband_stats::model::ideal_params_from(&params, Order::Corrected)?;
            to_json(&PhysicalReport {
                config_hash: &hash,
                mode: "physical",
                hierarchy: params.hierarchy_flags(),
                ideal,
                corrected,
                cooling_limit: cooling,
                reduced,
            })?
        }
    };
    emit(out, &report)
}

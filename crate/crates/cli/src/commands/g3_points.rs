//! `g3-points`: third-order coherence and K at the two distinguished
//! delays τ = 0 and τ = π/2δ. Reports both the strict γ̃/δ → 0 closed
//! forms and the assembly values with the decay envelope included;
//! physical mode adds the fully corrected assembly.

use std::path::Path;

use serde::Serialize;

use sideband_stats::coherence::{
    classicality_check, g2_quarter_strict, g3_quarter_closed, g3_zero_closed, k_functional,
    ClassicalityCriterion, CoherenceEngine,
};
use sideband_stats::model::{ideal_params_from, IdealParams, Order};

use crate::config::{Mode, RunConfig};
use crate::output::{emit, to_json};
use crate::CliError;

#[derive(Serialize)]
struct PointValues {
    g2: f64,
    g3: f64,
    k: f64,
    violated: bool,
}

#[derive(Serialize)]
struct G3Report<'a> {
    config_hash: &'a str,
    params: IdealParams,
    /// Strict γ̃/δ → 0 limit at τ = 0.
    equal_time_strict: PointValues,
    /// Strict limit at τ = π/2δ.
    quarter_delay_strict: PointValues,
    /// Assembly with the e^{−γ̃τ} decay retained, ideal order.
    equal_time_with_decay: PointValues,
    quarter_delay_with_decay: PointValues,
    /// Fully corrected assembly (physical mode only).
    #[serde(skip_serializing_if = "Option::is_none")]
    equal_time_corrected: Option<PointValues>,
    #[serde(skip_serializing_if = "Option::is_none")]
    quarter_delay_corrected: Option<PointValues>,
}

fn from_engine(engine: &CoherenceEngine, tau: f64) -> Result<PointValues, CliError> {
    let g2 = engine.g2(tau)?;
    let g3 = engine.g3(tau)?;
    let k = k_functional(g3, g2)?;
    Ok(PointValues { g2, g3, k, violated: k < 1.0 })
}

pub fn run(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let hash = config.hash();
    let (ideal, corrected_engine) = match config.mode {
        Mode::Ideal => (config.ideal_params()?, None),
        Mode::Physical => {
            let params = config.system_params()?;
            (
                ideal_params_from(&params, Order::Ideal)?,
                Some(CoherenceEngine::from_system(&params, Order::Corrected)?),
            )
        }
    };
    let quarter = ideal.quarter_delay();

    let eq = classicality_check(&ideal, ClassicalityCriterion::EqualTime)?;
    let equal_time_strict = PointValues {
        g2: eq.g2,
        g3: g3_zero_closed(&ideal)?,
        k: eq.k,
        violated: eq.violated,
    };
    let qd = classicality_check(&ideal, ClassicalityCriterion::QuarterDelay)?;
    let quarter_delay_strict = PointValues {
        g2: g2_quarter_strict(ideal.beta, ideal.n_m)?,
        g3: g3_quarter_closed(&ideal)?,
        k: qd.k,
        violated: qd.violated,
    };

    let engine = CoherenceEngine::ideal(&ideal);
    let report = G3Report {
        config_hash: &hash,
        params: ideal,
        equal_time_strict,
        quarter_delay_strict,
        equal_time_with_decay: from_engine(&engine, 0.0)?,
        quarter_delay_with_decay: from_engine(&engine, quarter)?,
        equal_time_corrected: corrected_engine
            .as_ref()
            .map(|e| from_engine(e, 0.0))
            .transpose()?,
        quarter_delay_corrected: corrected_engine
            .as_ref()
            .map(|e| from_engine(e, quarter))
            .transpose()?,
    };
    emit(out, &to_json(&report)?)
}

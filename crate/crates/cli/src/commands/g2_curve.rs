//! `g2-curve`: sampled second-order coherence as CSV.
//!
//! The delay grid is uniform with step (π/2δ)/m for integer m, so the
//! interference minima at odd multiples of π/2δ always land on grid
//! points.

use std::path::Path;

use sideband_stats::coherence::{oscillation_amplitude, CoherenceEngine};
use sideband_stats::model::{ideal_params_from, Order};

use crate::config::{Mode, RunConfig};
use crate::output::{emit, CsvWriter};
use crate::CliError;

/// Uniform grid covering [0, tau_max] whose step divides π/2δ.
pub fn snapped_grid(delta: f64, tau_max: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if points < 2 {
        return Err(CliError::Config(format!("curve needs at least 2 points, got {points}")));
    }
    if !(tau_max > 0.0) {
        return Err(CliError::Config(format!("tau_max must be > 0, got {tau_max}")));
    }
    let quarter = std::f64::consts::PI / (2.0 * delta);
    let requested = tau_max / (points - 1) as f64;
    let m = (quarter / requested).ceil().max(1.0);
    let step = quarter / m;
    let count = (tau_max / step).ceil() as usize + 1;
    Ok((0..count).map(|i| i as f64 * step).collect())
}

pub fn run(config: &RunConfig, tau_max: f64, points: usize, out: Option<&Path>) -> Result<(), CliError> {
    let hash = config.hash();
    let (ideal, corrected) = match config.mode {
        Mode::Ideal => (config.ideal_params()?, None),
        Mode::Physical => {
            let params = config.system_params()?;
            (
                ideal_params_from(&params, Order::Ideal)?,
                Some(CoherenceEngine::from_system(&params, Order::Corrected)?),
            )
        }
    };
    let taus = snapped_grid(ideal.delta, tau_max, points)?;
    let engine = CoherenceEngine::ideal(&ideal);
    let amplitude = oscillation_amplitude(&ideal)?;

    let mut columns = vec!["tau", "g2_ideal"];
    if corrected.is_some() {
        columns.push("g2_corrected");
    }
    columns.push("envelope");
    let mut csv = CsvWriter::new(&hash, &columns);
    for &tau in &taus {
        let mut row = vec![tau, engine.g2(tau).map_err(CliError::Physics)?];
        if let Some(ref c) = corrected {
            row.push(c.g2(tau).map_err(CliError::Physics)?);
        }
        row.push(1.0 + (-ideal.gamma_eff() * tau).exp() * (1.0 + amplitude));
        csv.row(&row);
    }
    emit(out, &csv.finish())
}

//! `oracle-compare`: closed forms against the truncated-Fock regression
//! oracle over a (β, n_m) grid. Exits with code 4 when any relative
//! error exceeds the configured bound.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use sideband_stats::coherence::CoherenceEngine;
use sideband_stats::model::IdealParams;
use sideband_stats::oracle::{oracle_coherences, DimPolicy};

use crate::config::RunConfig;
use crate::output::{emit, fmt_f64, to_json};
use crate::CliError;

#[derive(Serialize, Clone)]
struct ComparisonRow {
    beta: f64,
    nm: f64,
    quantity: String,
    closed_form: f64,
    oracle: f64,
    rel_err: f64,
    dim_used: usize,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    config_hash: &'a str,
    gamma_over_delta: f64,
    delta: f64,
    tolerance: f64,
    rows: Vec<ComparisonRow>,
    max_rel_err: f64,
    passed: bool,
}

fn parse_points(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Config(format!("bad grid value '{tok}': {e}")))
        })
        .collect()
}

fn compare_point(
    beta: f64,
    nm: f64,
    god: f64,
    delta: f64,
    policy: &DimPolicy,
) -> Result<Vec<ComparisonRow>, CliError> {
    let params = IdealParams::new(beta, nm, god, delta)?;
    let quarter = params.quarter_delay();
    let taus = [0.0, quarter, 2.0 * quarter];
    let engine = CoherenceEngine::ideal(&params);
    let oracle = oracle_coherences(&params, &taus, policy)?;

    let mut rows = Vec::with_capacity(5);
    let labels = ["g2(0)", "g2(pi/2delta)", "g2(pi/delta)"];
    for ((&tau, label), &o) in taus.iter().zip(labels).zip(oracle.g2.iter()) {
        let c = engine.g2(tau)?;
        rows.push(ComparisonRow {
            beta,
            nm,
            quantity: label.to_string(),
            closed_form: c,
            oracle: o,
            rel_err: (o - c).abs() / c.abs(),
            dim_used: oracle.dim_used,
        });
    }
    for (label, c, o) in [
        ("g3(0)", engine.g3(0.0)?, oracle.g3_zero),
        ("g3(pi/2delta)", engine.g3(quarter)?, oracle.g3_quarter),
    ] {
        rows.push(ComparisonRow {
            beta,
            nm,
            quantity: label.to_string(),
            closed_form: c,
            oracle: o,
            rel_err: (o - c).abs() / c.abs(),
            dim_used: oracle.dim_used,
        });
    }
    Ok(rows)
}

pub fn run(config: &RunConfig, points: Option<String>, out: Option<&Path>) -> Result<(), CliError> {
    let hash = config.hash();
    let ideal = config.ideal_params()?;
    let grid = match points {
        Some(spec) => parse_points(&spec)?,
        None => config.oracle.points.clone().unwrap_or_else(|| vec![0.05, 0.3, 1.0]),
    };
    if grid.is_empty() {
        return Err(CliError::Config("oracle-compare needs a nonempty grid".into()));
    }
    let policy = DimPolicy {
        start: config.oracle.dim_start,
        rel_tol: config.tolerances.truncation,
        dim_cap: config.oracle.dim_cap,
        tail_threshold: config.oracle.tail_threshold,
        propagation_tol: config.tolerances.propagation,
        phase_time: 0.0,
    };

    let pairs: Vec<(f64, f64)> = grid
        .iter()
        .flat_map(|&b| grid.iter().map(move |&n| (b, n)))
        .collect();
    let results: Vec<Result<Vec<ComparisonRow>, CliError>> = pairs
        .par_iter()
        .map(|&(beta, nm)| compare_point(beta, nm, ideal.gamma_over_delta, ideal.delta, &policy))
        .collect();

    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let tolerance = config.tolerances.oracle_rel_err;
    let passed = max_rel_err <= tolerance;

    let mut table = String::new();
    table.push_str("beta      nm        quantity        closed_form              oracle                    rel_err\n");
    for r in &rows {
        table.push_str(&format!(
            "{:<9} {:<9} {:<15} {:<25} {:<25} {}\n",
            r.beta,
            r.nm,
            r.quantity,
            fmt_f64(r.closed_form),
            fmt_f64(r.oracle),
            fmt_f64(r.rel_err)
        ));
    }
    table.push_str(&format!("max rel err = {} (bound {})\n", fmt_f64(max_rel_err), tolerance));
    eprint!("{table}");

    let report = OracleReport {
        config_hash: &hash,
        gamma_over_delta: ideal.gamma_over_delta,
        delta: ideal.delta,
        tolerance,
        rows,
        max_rel_err,
        passed,
    };
    emit(out, &to_json(&report)?)?;
    if !passed {
        return Err(CliError::Tolerance(format!(
            "oracle disagreement {max_rel_err:.3e} exceeds bound {tolerance:.3e}"
        )));
    }
    Ok(())
}

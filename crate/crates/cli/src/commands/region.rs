//! `region`: K over a (β, occupation) grid with refined K = 1
//! thresholds and the global optimum, serialized as JSON.

use std::path::Path;

use serde::Serialize;

use sideband_stats::coherence::ClassicalityCriterion;
use sideband_stats::scan::{
    default_beta_grid, default_scan_grid, region_scan, GridScale, GridSpec, RegionMap, ScanAxes,
};

use crate::config::{GridBlock, RunConfig};
use crate::output::{emit, fmt_f64, to_json};
use crate::CliError;

#[derive(Serialize)]
struct RegionReport<'a> {
    config_hash: &'a str,
    map: RegionMap,
}

pub fn parse_criterion(s: &str) -> Result<ClassicalityCriterion, CliError> {
    match s {
        "k0" => Ok(ClassicalityCriterion::EqualTime),
        "kdelay" => Ok(ClassicalityCriterion::QuarterDelay),
        other => Err(CliError::Config(format!(
            "unknown criterion '{other}' (expected k0 or kdelay)"
        ))),
    }
}

pub fn parse_axes(s: &str) -> Result<ScanAxes, CliError> {
    match s {
        "nm" => Ok(ScanAxes::Nm),
        "nm0" => Ok(ScanAxes::Nm0),
        other => Err(CliError::Config(format!("unknown axes '{other}' (expected nm or nm0)"))),
    }
}

fn grid_from_block(block: &GridBlock, fallback: GridSpec) -> Result<GridSpec, CliError> {
    let scale = match block.scale.as_deref() {
        None => fallback.scale,
        Some("lin") => GridScale::Lin,
        Some("log") => GridScale::Log,
        Some(other) => {
            return Err(CliError::Config(format!("unknown grid scale '{other}' (lin|log)")))
        }
    };
    GridSpec::new(
        &fallback.name,
        block.min.unwrap_or(fallback.min),
        block.max.unwrap_or(fallback.max),
        block.points.unwrap_or(fallback.points),
        scale,
    )
    .map_err(CliError::Physics)
}

pub fn run(
    config: &RunConfig,
    criterion_flag: Option<String>,
    axes_flag: Option<String>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let hash = config.hash();
    let criterion_name = criterion_flag
        .or_else(|| config.scan.criterion.clone())
        .unwrap_or_else(|| "kdelay".to_string());
    let axes_name = axes_flag
        .or_else(|| config.scan.axes.clone())
        .unwrap_or_else(|| "nm".to_string());
    let criterion = parse_criterion(&criterion_name)?;
    let axes = parse_axes(&axes_name)?;

    let beta_grid = grid_from_block(&config.scan.beta, default_beta_grid(axes))?;
    let scan_grid = grid_from_block(&config.scan.scan, default_scan_grid(axes))?;
    let map = region_scan(criterion, axes, beta_grid, scan_grid)?;

    if let Some(opt) = &map.optimum {
        eprintln!(
            "optimum: beta = {}  threshold {} = {}",
            fmt_f64(opt.beta),
            map.axis2.name,
            fmt_f64(opt.threshold)
        );
    } else {
        eprintln!("no violation threshold anywhere on the grid");
    }
    emit(out, &to_json(&RegionReport { config_hash: &hash, map })?)
}

//! Inequality-violation region scans over (β, n_m) or (β, n_m⁽⁰⁾).
//!
//! For each drive ratio β on the first axis, K is evaluated along the
//! second axis with the strict γ̃/δ → 0 closed forms, the K = 1
//! crossing is bracketed on the grid and refined by bisection, and the
//! global optimum (the β that tolerates the largest occupation) is
//! polished with a golden-section search. Grid points are evaluated in
//! parallel but gathered in grid order, so results are deterministic.

use rayon::prelude::*;
use serde::Serialize;

use crate::coherence::{classicality_check, ClassicalityCriterion};
use crate::error::{Error, Result};
use crate::model::IdealParams;

/// Scan variable on the second axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxes {
    /// Occupation n_m directly.
    Nm,
    /// Intrinsic-cooling occupation n_m⁽⁰⁾, mapped through
    /// n_m = (n_m⁽⁰⁾ + β)/(1 − β); requires β < 1 over the whole grid.
    Nm0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Lin,
    Log,
}

/// One scan axis: `points` values from `min` to `max`, linearly or
/// logarithmically spaced.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl GridSpec {
    pub fn new(name: &str, min: f64, max: f64, points: usize, scale: GridScale) -> Result<Self> {
        if !(min < max) || points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid {name} needs min < max and at least 2 points (got [{min}, {max}] x {points})"
            )));
        }
        if scale == GridScale::Log && min <= 0.0 {
            return Err(Error::InvalidParams(format!("log grid {name} needs min > 0, got {min}")));
        }
        Ok(Self { name: name.to_string(), min, max, points, scale })
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Lin => self.min + f * (self.max - self.min),
                    GridScale::Log => self.min * (self.max / self.min).powf(f),
                }
            })
            .collect()
    }
}

/// Refined global optimum of the violation threshold over β.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Optimum {
    pub beta: f64,
    pub threshold: f64,
}

/// K over a 2-d grid, violation booleans, per-β refined thresholds, and
/// the global optimum.
#[derive(Debug, Clone, Serialize)]
pub struct RegionMap {
    pub criterion: ClassicalityCriterion,
    pub axes: ScanAxes,
    pub axis1: GridSpec,
    pub axis2: GridSpec,
    /// K values, indexed `[i_axis1][j_axis2]`.
    pub values: Vec<Vec<f64>>,
    /// `violated[i][j] == (values[i][j] < 1)`.
    pub violated: Vec<Vec<bool>>,
    /// Per-β K = 1 crossing in the scanned variable, `None` when the
    /// whole column is on one side.
    pub thresholds: Vec<Option<f64>>,
    pub optimum: Option<Optimum>,
}

/// Bisection tolerance in the scanned variable.
const THRESHOLD_TOL: f64 = 1e-6;
/// Golden-section tolerance in β for the optimum refinement.
const OPTIMUM_TOL: f64 = 1e-9;

fn k_value(criterion: ClassicalityCriterion, axes: ScanAxes, beta: f64, x: f64) -> Result<f64> {
    let n_m = match axes {
        ScanAxes::Nm => x,
        ScanAxes::Nm0 => {
            if beta >= 1.0 {
                return Err(Error::Domain(format!(
                    "intrinsic-cooling axes require beta < 1, got {beta}"
                )));
            }
            (x + beta) / (1.0 - beta)
        }
    };
    // the strict-limit forms ignore gamma_over_delta; any small value
    // keeps the parameter set valid
    let p = IdealParams::new(beta, n_m, 0.0, 1.0)?;
    Ok(classicality_check(&p, criterion)?.k)
}

/// Bisection for K(x) = 1 on a bracketing interval.
fn bisect(
    criterion: ClassicalityCriterion,
    axes: ScanAxes,
    beta: f64,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let mut f_lo = k_value(criterion, axes, beta, lo)? - 1.0;
    let f_hi = k_value(criterion, axes, beta, hi)? - 1.0;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::ThresholdSearch(format!(
            "no sign change of K - 1 on bracket [{lo}, {hi}] at beta = {beta}"
        )));
    }
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = k_value(criterion, axes, beta, mid)? - 1.0;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Threshold in the scanned variable for one β: locate sign changes of
/// K − 1 along the grid column, then refine. Multiple crossings are an
/// error rather than a guess.
fn column_threshold(
    criterion: ClassicalityCriterion,
    axes: ScanAxes,
    beta: f64,
    xs: &[f64],
    ks: &[f64],
) -> Result<Option<f64>> {
    let mut brackets = Vec::new();
    for j in 0..xs.len() - 1 {
        let (a, b) = (ks[j] - 1.0, ks[j + 1] - 1.0);
        if a == 0.0 || a.signum() != b.signum() {
            brackets.push(j);
        }
    }
    match brackets.len() {
        0 => Ok(None),
        1 => {
            let j = brackets[0];
            Ok(Some(bisect(criterion, axes, beta, xs[j], xs[j + 1])?))
        }
        n => Err(Error::ThresholdSearch(format!(
            "{n} sign changes of K - 1 along the column at beta = {beta}; grid too coarse"
        ))),
    }
}

/// Threshold as a function of β alone (bisecting the full second-axis
/// range); used by the optimum refinement.
fn threshold_at(
    criterion: ClassicalityCriterion,
    axes: ScanAxes,
    beta: f64,
    x_lo: f64,
    x_hi: f64,
) -> Result<Option<f64>> {
    let k_lo = k_value(criterion, axes, beta, x_lo)? - 1.0;
    let k_hi = k_value(criterion, axes, beta, x_hi)? - 1.0;
    if k_lo.signum() == k_hi.signum() && k_lo != 0.0 && k_hi != 0.0 {
        return Ok(None);
    }
    Ok(Some(bisect(criterion, axes, beta, x_lo, x_hi)?))
}

/// Scan K over the grid, refine per-β thresholds, and polish the global
/// optimum.
pub fn region_scan(
    criterion: ClassicalityCriterion,
    axes: ScanAxes,
    axis1: GridSpec,
    axis2: GridSpec,
) -> Result<RegionMap> {
    let betas = axis1.values();
    let xs = axis2.values();
    if axes == ScanAxes::Nm0 {
        if let Some(b) = betas.iter().find(|&&b| b >= 1.0) {
            return Err(Error::Domain(format!(
                "intrinsic-cooling axes require beta < 1 over the grid, found {b}"
            )));
        }
    }

    let columns: Vec<Result<(Vec<f64>, Option<f64>)>> = betas
        .par_iter()
        .map(|&beta| {
            let ks = xs
                .iter()
                .map(|&x| k_value(criterion, axes, beta, x))
                .collect::<Result<Vec<_>>>()?;
            let threshold = column_threshold(criterion, axes, beta, &xs, &ks)?;
            Ok((ks, threshold))
        })
        .collect();

    let mut values = Vec::with_capacity(betas.len());
    let mut violated = Vec::with_capacity(betas.len());
    let mut thresholds = Vec::with_capacity(betas.len());
    for col in columns {
        let (ks, threshold) = col?;
        violated.push(ks.iter().map(|&k| k < 1.0).collect());
        values.push(ks);
        thresholds.push(threshold);
    }

    let optimum = refine_optimum(criterion, axes, &betas, &thresholds, &axis2)?;

    Ok(RegionMap { criterion, axes, axis1, axis2, values, violated, thresholds, optimum })
}

/// Golden-section maximization of threshold(β) around the grid argmax.
fn refine_optimum(
    criterion: ClassicalityCriterion,
    axes: ScanAxes,
    betas: &[f64],
    thresholds: &[Option<f64>],
    axis2: &GridSpec,
) -> Result<Option<Optimum>> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in thresholds.iter().enumerate() {
        if let Some(t) = *t {
            if best.map_or(true, |(_, bt)| t > bt) {
                best = Some((i, t));
            }
        }
    }
    let Some((i_best, t_best)) = best else {
        return Ok(None);
    };
    let lo = if i_best > 0 { betas[i_best - 1] } else { betas[i_best] };
    let hi = if i_best + 1 < betas.len() { betas[i_best + 1] } else { betas[i_best] };
    if lo == hi {
        return Ok(Some(Optimum { beta: betas[i_best], threshold: t_best }));
    }

    let objective = |beta: f64| -> Result<f64> {
        Ok(threshold_at(criterion, axes, beta, axis2.min, axis2.max)?.unwrap_or(f64::NEG_INFINITY))
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while b - a > OPTIMUM_TOL {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d)?;
        }
    }
    let beta_star = 0.5 * (a + b);
    let threshold = objective(beta_star)?;
    if threshold.is_finite() && threshold >= t_best {
        Ok(Some(Optimum { beta: beta_star, threshold }))
    } else {
        Ok(Some(Optimum { beta: betas[i_best], threshold: t_best }))
    }
}

/// Default β grid for the given axes choice (covers the figures'
/// plotted ranges).
pub fn default_beta_grid(axes: ScanAxes) -> GridSpec {
    match axes {
        ScanAxes::Nm => GridSpec::new("beta", 0.01, 1.2, 120, GridScale::Lin).expect("valid"),
        ScanAxes::Nm0 => GridSpec::new("beta", 0.002, 0.2, 150, GridScale::Log).expect("valid"),
    }
}

/// Default second-axis grid for the given axes choice.
pub fn default_scan_grid(axes: ScanAxes) -> GridSpec {
    match axes {
        ScanAxes::Nm => GridSpec::new("nm", 1e-4, 1.0, 60, GridScale::Lin).expect("valid"),
        ScanAxes::Nm0 => GridSpec::new("nm0", 0.0, 0.5, 60, GridScale::Lin).expect("valid"),
    }
}

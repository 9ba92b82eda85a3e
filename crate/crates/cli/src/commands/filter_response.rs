//! `filter-response`: transfer functions of the cascaded filter stage
//! over a frequency window, plus passband diagnostics on stderr.

use std::path::Path;

use sideband_stats::filter::{
    filter_susceptibility, filtered_noise_weight, output_coefficients, passband_distortion,
    FilterParams,
};

use crate::config::{Mode, RunConfig};
use crate::output::{emit, fmt_f64, CsvWriter};
use crate::CliError;

pub fn filter_params(config: &RunConfig) -> Result<FilterParams, CliError> {
    let block = &config.filter;
    let (b_left, b_right) = match (block.b_left, block.b_right) {
        (Some(l), Some(r)) => (l, r),
        (None, None) => (block.b_total / 2.0, block.b_total / 2.0),
        _ => {
            return Err(CliError::Config(
                "give both filter.b_left and filter.b_right, or neither".into(),
            ))
        }
    };
    FilterParams {
        b_total: block.b_total,
        b_left,
        b_right,
        kappa_right: block.kappa_right,
        delta_c: config.filter_delta_c(),
        stages: block.stages,
    }
    .validated()
    .map_err(CliError::Physics)
}

pub fn run(config: &RunConfig, omega_max: f64, points: usize, out: Option<&Path>) -> Result<(), CliError> {
    if points < 2 || !(omega_max > 0.0) {
        return Err(CliError::Config("filter-response needs omega_max > 0 and points >= 2".into()));
    }
    let hash = config.hash();
    let fp = filter_params(config)?;

    let delta = match config.mode {
        Mode::Ideal => config.ideal_params()?.delta,
        Mode::Physical => config.system_params()?.delta,
    };
    if delta > 0.0 {
        let distortion = passband_distortion(&fp, delta).map_err(CliError::Physics)?;
        let flags = fp.flags(delta);
        eprintln!(
            "passband distortion at delta = {}: {} (delta<<B: {}, B<<kappa: {})",
            fmt_f64(delta),
            fmt_f64(distortion),
            flags.delta_much_less_than_b,
            flags.b_much_less_than_kappa
        );
    }

    let mut csv = CsvWriter::new(
        &hash,
        &[
            "omega",
            "chi_f_re",
            "chi_f_im",
            "on_a_abs",
            "on_a_in_r_abs",
            "on_c_in_r_abs",
            "noise_weight",
            "power_identity_defect",
        ],
    );
    for i in 0..points {
        let omega = -omega_max + 2.0 * omega_max * i as f64 / (points - 1) as f64;
        let chi = filter_susceptibility(omega, &fp);
        let coeff = output_coefficients(omega, &fp);
        let identity =
            coeff.on_c_in_r.norm_sqr() + fp.b_left * fp.b_right * chi.norm_sqr() - 1.0;
        csv.row(&[
            omega,
            chi.re,
            chi.im,
            coeff.on_a.norm(),
            coeff.on_a_in_r.norm(),
            coeff.on_c_in_r.norm(),
            filtered_noise_weight(omega, &fp),
            identity.abs(),
        ]);
    }
    emit(out, &csv.finish())
}

//! Independent numerical oracle: truncated-Fock Lindblad dynamics plus
//! the quantum regression map.
//!
//! The oracle models the effective single mechanical mode of the
//! adiabatic limit — the cavity enters only through the composite
//! sideband operator coefficients — and computes the same g², g³ and K
//! as the closed forms with no Gaussian moment factorization anywhere
//! in its code path. A separate two-mode simulator integrates the full
//! cavity ⊗ mechanics master equation to validate the adiabatic
//! elimination itself (effective linewidth and steady occupation).

mod fock;
mod liouvillian;
mod regression;
mod two_mode;

pub use fock::{annihilation, number_operator, thermal_state, TruncatedOperator, TruncatedState};
pub use liouvillian::{
    thermal_liouvillian, trace_preservation_defect, ThermalLiouvillian, DENSE_DIM_CAP,
};
pub use regression::{
    composite_sideband_operator, ideal_sideband_operator, oracle_coherences, regression_correlator,
    trace_product, DimPolicy, InsertionPattern, OracleCoherences,
};
pub use two_mode::{two_mode_simulate, TwoModeDims, TwoModeFit, TwoModeOptions};

//! Sideband photon statistics of a two-tone, continuously driven
//! optomechanical cavity.
//!
//! The cavity is driven by one red- and one blue-detuned tone; the two
//! innermost Raman sidebands (split by 2δ around cavity resonance) are
//! frequency filtered and sent to single-photon detectors. This crate
//! computes the resulting field statistics along two independent routes:
//!
//! * closed forms for g²(τ), g³(t,t,t+τ) and the nonclassicality
//!   functional K = g³/(g²)², assembled from the stationary mechanical
//!   correlators via the Gaussian moment factorization ([`coherence`]),
//!   with optional finite-δ/κ and finite-γ̃/δ corrections;
//! * a truncated-Fock Lindblad oracle ([`oracle`]) that evaluates the
//!   same coherences through the quantum regression map, with no
//!   Gaussianity assumption anywhere in its code path.
//!
//! Dynamical backaction (effective linewidth γ̃, steady phonon number
//! n_m, intrinsic sideband-cooling limits) lives in [`model`], the
//! mechanical two-time correlators in [`mech`], the cascaded filter
//! cavity in [`filter`], and inequality-region scanning in [`scan`].
//!
//! All rates and frequencies are dimensionless in units of the cavity
//! energy decay rate κ ≡ 1; [`model::thermal_occupation`] is the only
//! function touching absolute units.

pub mod coherence;
pub mod error;
pub mod filter;
pub mod linalg;
pub mod mech;
pub mod model;
pub mod oracle;
pub mod scan;

pub use coherence::{CoherenceCurve, CoherenceEngine, CoherenceSample};
pub use error::{Error, Result};
pub use model::{DerivedQuantities, IdealParams, Order, SystemParams};
pub use scan::{GridSpec, RegionMap};

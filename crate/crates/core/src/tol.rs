//! Shared numerical tolerances.
//!
//! Three tiers keep rounding noise apart from physical effects: state validity
//! checks are tight, the entanglement-zero threshold sits above eigensolver
//! noise, and fidelity targets are loose enough for truncated Fock spaces.

/// Normalization, Hermiticity and trace checks on states.
pub const STATE: f64 = 1e-12;

/// Eigenvalues above `-ENTANGLEMENT_ZERO` count as non-negative; negativities
/// below it count as zero.
pub const ENTANGLEMENT_ZERO: f64 = 1e-10;

/// Default agreement target for fidelities against analytic references.
pub const FIDELITY: f64 = 1e-6;

/// Maximum probability weight allowed beyond a Fock cutoff.
pub const TRUNCATION_LEAKAGE: f64 = 1e-10;

/// Default Fock cutoff (number of levels kept per mode).
pub const DEFAULT_CUTOFF: usize = 30;

/// Relative tolerance of the adaptive rate quadrature.
pub const QUADRATURE_REL: f64 = 1e-8;

//! Simulation engines for two-probe gravitationally induced entanglement.
//!
//! The crate is organised bottom-up: [`qstate`] provides dense states and
//! entanglement measures, [`interferometer`] and [`mediator`] build the
//! two-mass protocol on top of it, [`decoherence`] and [`cvhybrid`] cover the
//! open-system and Gaussian variants, and [`feasibility`] collects the
//! closed-form calculators used for experiment planning.

pub mod constants;
pub mod cvhybrid;
pub mod decoherence;
pub mod error;
pub mod feasibility;
pub mod interferometer;
pub mod linalg;
pub mod mediator;
pub mod qstate;
pub mod quad;
pub mod tol;
pub mod units;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};

//! Jaynes-Cummings population inversion: analytic targets, inverse-problem
//! coupling synthesis (IPA for the vacuum, GIPA per Fock sector),
//! κ-deformed observables, and sector-by-sector two-amplitude propagation.
//!
//! ```
//! use jcipa::domain::{PhysicalParams, TimeGrid};
//! use jcipa::dynamics::{run_ipa, PipelineOptions};
//! use jcipa::inversion::InversionTarget;
//!
//! let params = PhysicalParams::default();
//! let grid = TimeGrid::new(0.0, 5.0, 101).unwrap();
//! let target = InversionTarget::coherent_series(params.undeformed()).unwrap();
//! let run = run_ipa(&target, &grid, &PipelineOptions::default()).unwrap();
//! assert!(run.max_abs_residual_outside_windows() < 1e-6);
//! ```

pub mod cli;
pub mod domain;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod inversion;
pub mod kappa;
pub mod synth;

pub use error::{Error, Result};

//! Wellstream composition and surface gas-oil ratio from production-choke
//! pressure and temperature measurements.
//!
//! A seed stock-tank oil and surface gas are recombined with gas fraction
//! `f_g`; the recombined stream is expanded isenthalpically across the choke
//! with a Peng-Robinson model, and `f_g` is solved for so that the computed
//! outlet temperature matches the measured one. The estimated wellstream is
//! then run through the surface separator train to obtain its GOR.

pub mod eos;
pub mod equilibrium;
pub mod error;
pub mod estimator;
pub mod fluid;
pub mod io;
pub mod process;
pub mod solver;
pub mod units;

pub use eos::{LiquidVolumeMethod, PengRobinson, PhaseLabel, RootChoice};
pub use equilibrium::{ph_flash, pt_flash, PhaseEquilibrium, PhaseState};
pub use error::{Error, Result};
pub use estimator::{EstimationResult, EstimationStatus, Estimator, SeedPair};
pub use fluid::{Composition, FluidSystem};

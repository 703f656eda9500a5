//! Simulation of chirped adiabatic rapid passage in a driven two-level
//! system, with drive-induced dissipation and optional T1/T2 relaxation.
//!
//! Time is in ms, angular frequencies in rad/ms and sweep rates in rad/ms².
//! The Liouville vector is `(ρ11, ρ12, ρ21, ρ22)`; level 1 is the target
//! state and the ground state is `diag(0, 1)`.
//!
//! ```
//! use arpsim::{evolve, DensityState, IntegratorSettings, PulseProfile, SweepParams, Timing};
//!
//! let params = SweepParams::new(
//!     10.0,
//!     Timing::Duration(200.0),
//!     PulseProfile::rectangular(1.0)?,
//!     0.0,
//!     Default::default(),
//! )?;
//! let traj = evolve(&DensityState::ground(), &params, &IntegratorSettings::default(), 0.0)?;
//! assert!(traj.stats.p_final > 0.99);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

mod dopri;
pub mod error;
pub mod liouvillian;
pub mod lz;
pub mod propagator;
pub mod pulses;
pub mod sweeps;
pub mod types;

pub use error::{IntegrationError, ModelError, ParamError, RidgeError, StateError};
pub use liouvillian::{adiabats, build_generator, EnergyPair, Generator, Liouville};
pub use lz::{arp_probability, lz_probability, phenom_max, phenom_tmax, phenom_transfer, PhenomParams};
pub use propagator::{
    evolve, max_transfer, unitary_oracle, IntegratorSettings, Sample, Tail, TailDrive, Trajectory,
    TrajectoryStats,
};
pub use pulses::{amplitude, detuning, equal_area_peak, gaussian_width, GaussianShape};
pub use sweeps::{
    extract_ridge, fit_parabola, grid_sweep, grid_sweep_with_threads, ridge_from_rows, tauc_family, Cell, ContourDataset,
    FamilyCurve, GridSpec, RidgeFit, RidgePoint,
};
pub use types::{
    bloch_from_state, AngularFrequency, BlochVector, DensityState, PulseProfile, PulseShape,
    RelaxationParams, SweepParams, SweepRate, Timing,
};

// The guide's Rust listings run as doctests.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/conventions.md")]
mod book_conventions {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pulses.md")]
mod book_pulses {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/generator.md")]
mod book_generator {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/propagation.md")]
mod book_propagation {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/landau-zener.md")]
mod book_landau_zener {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sweeps.md")]
mod book_sweeps {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

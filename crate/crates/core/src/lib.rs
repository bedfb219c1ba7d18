//! Collapse-model dynamics on a periodic one-dimensional grid.
//!
//! * [`kernel`]: CSL and Diósi–Penrose correlation kernels.
//! * [`noise`]: spectrally factorized, spatially correlated noise increments.
//! * [`sde`]: the norm-preserving stochastic collapse equation.
//! * [`master`]: the ensemble-averaged master equation used as an oracle.
//! * [`ensemble`]: reproducible parallel trajectory ensembles.
//! * [`predictions`] and [`exclusion`]: closed-form predictions and the
//!   parameter regions excluded by experimental bounds.

pub mod ensemble;
pub mod error;
pub mod exclusion;
pub mod export;
mod fft;
pub mod grid;
pub mod kernel;
pub mod master;
pub mod noise;
pub mod physics;
pub mod plot;
pub mod predictions;
pub mod sde;
pub mod special;
pub mod state;

pub use ensemble::{run_ensemble, run_ensemble_range, EnsembleStats, SeriesPoint};
pub use error::{Error, Result};
pub use exclusion::{
    combine, default_rc_grid, dp_exclude_from_heating, exclude_from_contrast, exclude_from_heating, is_excluded,
    log_grid, parse_records, DpExclusion, ExclusionRegion, ExperimentRecord, Measurement, RegionSet, Verdict,
};
pub use grid::GridSpec;
pub use kernel::{csl_kernel, dp_kernel, NoiseKernel};
pub use master::{decoherence_rate, heating_rate_1d, master_rhs, DensityState, MasterEquation};
pub use noise::{sample_increment, spectral_factor, NoiseField, NoiseStream, SpectralFactor, StreamId};
pub use physics::{
    preset, presets, CslParams, DpParams, ModelParams, ParameterPreset, PhysicalConstants, AMU_KG, PRESET_NAMES,
};
pub use predictions::{contrast_reduction, heating_power, HeatingSetup, InterferometricSetup};
pub use sde::{evolve, step, CollapseSystem, Scheme, StepDiagnostics, TrajectoryConfig, TrajectoryRecord};
pub use state::{Hamiltonian, MassDensityOperator, Observables, WaveState};

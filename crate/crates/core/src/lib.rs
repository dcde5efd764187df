//! Mean-field model of a Bose Josephson junction dispersively coupled to a
//! driven optical cavity.
//!
//! * [`model`]: parameters, the effective Hamiltonian, its flow, and the
//!   cavity photon number.
//! * [`fixedpoints`]: stationary points on the `φ = 0` and `φ = π` lines,
//!   their Morse classification, and bifurcation sweeps.
//! * [`dynamics`]: trajectory integration, periods, and orbit families.
//! * [`portrait`]: energy grids, contours, and separatrix levels.
//! * [`cli`]: the `bjj-cavity` command-line tool.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fixedpoints;
pub mod model;
pub mod portrait;

pub use dynamics::{
    classify_mode, estimate_period, integrate, integrate_span, photon_series, IntegratorConfig,
    Method, ModeLabel, PeriodEstimate, Trajectory,
};
pub use error::{Error, Result};
pub use fixedpoints::{
    analyze_stationary_points, bifurcation_sweep, euler_check, f1, f2, find_stationary_points,
    uncoupled_analytic, Branch, Kind, MorseCount, StationaryPoint, SweepParam, SweepRow,
};
pub use model::{
    coupling_from_transverse_offset, energy_at, flow, flow_at, hamiltonian, photon_number_reduced,
    reduce_params, steady_state_field, PhaseState, PhysicalParams, PumpSchedule, ReducedParams,
    Reduction,
};
pub use portrait::{
    contour_level, extract_contours, sample_grid, separatrix_levels, ContourSet, EnergyGrid,
};

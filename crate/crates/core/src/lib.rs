// index arithmetic spells out basis strides on purpose, and comparisons are
// written in the form that rejects NaN
#![allow(clippy::identity_op, clippy::erasing_op)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod esd;
pub mod linalg;
pub mod measures;
pub mod parallel;
pub mod state;
pub mod verify;

pub use dynamics::{
    amplitude_pair, build_hamiltonian, closed_forms_double_jc, closed_forms_jc_one_photon,
    closed_forms_jc_vacuum, double_jc_state, evolve_double_jc, evolve_jc_one_photon,
    evolve_jc_vacuum, evolve_numeric, scenario_hamiltonian, AmplitudeModel, AmplitudePair,
    BathSpec, ClosedForms, DoubleJcKind, GridKind, Propagator, Scenario, ScenarioEvaluator,
    ScenarioSpec,
};

pub use error::{Error, Result};
pub use esd::{
    detect_zero_intervals, esd_window_ab, esd_window_ad, simultaneous_window, sweep, EsdWindow,
    SweepRow, SweepTable, WindowKind,
};
pub use linalg::{annihilation, expm, herm_eig, kron, kron_vec, psd_sqrt, CMatrix, C64};
pub use measures::{
    concurrence_pure_bipartition, concurrence_two_qubit, residual_excess, residual_tangle,
    residual_tangle_with, roof_concurrence_rank2, roof_concurrence_rank2_with, RoofOptions,
    RoofResult, TangleReport, WoottersSpectrum,
};
pub use parallel::{map_with_workers, parallel_map, worker_count};
pub use state::{
    density_from_pure, partial_trace, partial_trace_pure, reorder_subsystems, DensityMatrix,
    StateVector, SubsystemLayout,
};
pub use verify::{all_passed, run_all, run_suite, SuiteConfig, SuiteReport, SUITE_NAMES};

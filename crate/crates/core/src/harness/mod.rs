//! Everything between a configuration file and files on disk: parsing,
//! single runs, sweeps, the ε-refinement study, and the acceptance registry.

pub mod config;
pub mod eps_study;
pub mod scenario;
pub mod snapshot;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, Profile, ScenarioConfig, SnapshotMode};
pub use eps_study::{epsilon_refinement_study, run_eps_study, EpsRow, EpsStudy};
pub use scenario::{
    resolve_output_dir, run_scenario, simulate, ScenarioSummary, EXIT_FAILURE, EXIT_OK, EXIT_TRIGGERED,
    OUTPUT_ROOT_ENV,
};
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot};
pub use sweep::{run_sweep, sweep, SweepOutcome, SweepRow};
pub use verify::{verify, CriterionResult, CRITERIA};

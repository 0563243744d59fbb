//! Scenario loading, the simulation loop, outputs and sweeps.

mod config;
mod engine;
mod output;
mod population;
mod sweep;

use thiserror::Error;

pub use config::{
    config_from_value, config_hash, default_developer, default_schema, load_config, ActivistConfig, CitizenConfig,
    ConfigError, CouncilConfig, EngoConfig, LifecycleConfig, NetworkConfig, NormalParam, PartyConfig, PopulationConfig,
    ProposalConfig, RuleSource, Scenario, ScenarioConfig, DEFAULT_RULES,
};
pub use engine::{run, CitizenActionCounts, DecisionSummary, Simulation, TickMetrics};
pub use output::{
    read_run, ProposalResult, RunOutput, RunResult, RunSummary, SummaryError, EVENTS_FILE, METRICS_FILE, RESULT_FILE,
};
pub use population::{synthesize_population, Population};
pub use sweep::{expand, sweep, write_csv, Grid, GridAxis, SweepRow};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
    #[error(transparent)]
    Society(#[from] crate::society::SocietyError),
    #[error(transparent)]
    Governance(#[from] crate::governance::GovernanceError),
    #[error(transparent)]
    Lifecycle(#[from] crate::lifecycle::LifecycleError),
    #[error("sweep: {0}")]
    Sweep(String),
}

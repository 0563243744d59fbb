//! Deterministic agent-based simulation of urban development governance.
//!
//! Development proposals move through public consultation, technical
//! assessment, deliberation and a council vote. Citizens, media outlets,
//! activists organised in eNGOs, urban planners and party-organised
//! politicians all act on the proposal inside an agent/group/role kernel
//! that confines communication to shared environments.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: agents, environments, roles and phase-buffered messaging.
//! - [`events`]: the append-only JSON Lines event log.
//! - [`lifecycle`]: proposals, revisions, assessments and the stage machine.
//! - [`nadico`]: institutional statements (parser, formatter, evaluator).
//! - [`society`]: citizen motives, the social network and media news.
//! - [`governance`]: developers, planners and the council vote.
//! - [`advocacy`]: activist actions, alliances and resource bookkeeping.
//! - [`scenario`]: configuration, population synthesis, the tick loop and sweeps.

pub mod advocacy;
pub mod events;
pub mod governance;
pub mod kernel;
pub mod lifecycle;
pub mod nadico;
pub mod num;
pub mod rng;
pub mod scenario;
pub mod society;

pub use kernel::{AgentId, EnvId, EnvironmentKind, Organization, RoleKind};
pub use lifecycle::{DecisionOutcome, Proposal, ProposalId, ProposalStage};
pub use scenario::{load_config, RunOutput, RunResult, Scenario, ScenarioConfig, Simulation};

//! Citizens, their social network, and the media.

mod media;
mod motives;
mod network;

use thiserror::Error;

pub use media::{media_tick, news_exposure, MediaOutlet, MediaParams, MediaTick, News, NewsId, NewsPool, Valence};
pub use motives::{
    decide_action, evaluate_motives, inquire_update, support_share, ActionThresholds, CitizenAction, CitizenState,
    Evaluation, Motive, MotiveProfile, Sign, SocioProfile, SupportShare,
};
pub use network::{ring_lattice, watts_strogatz, SocialNetwork};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SocietyError {
    #[error("motive importances must be finite, non-negative and not all zero: {0:?}")]
    InvalidImportance([f64; 3]),
    #[error("support share needs at least one resident")]
    NoResidents,
    #[error("network needs an even mean degree below the population size (n = {n}, degree = {degree})")]
    InfeasibleNetwork { n: usize, degree: usize },
    #[error("rewiring probability {0} outside [0, 1]")]
    InvalidRewiring(f64),
}

//! HUMAT-lite: three importance-weighted motives (experiential, social,
//! values) produce a stance and a dissonance that drive whether a citizen
//! inquires, signals, or stays passive.

use serde::{Deserialize, Serialize};

use super::SocietyError;
use crate::kernel::AgentId;
use crate::num::clamp_unit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Motive {
    Experiential,
    Social,
    Values,
}

impl Motive {
    pub const ALL: [Motive; 3] = [Motive::Experiential, Motive::Social, Motive::Values];

    fn index(self) -> usize {
        self as usize
    }
}

/// Normalised importances with clamped satisfactions toward the focal proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotiveProfile {
    importance: [f64; 3],
    satisfaction: [f64; 3],
}

impl MotiveProfile {
    /// Normalises `importance` to sum to one and clamps satisfactions to [-1, 1].
    pub fn new(importance: [f64; 3], satisfaction: [f64; 3]) -> Result<Self, SocietyError> {
        if importance.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SocietyError::InvalidImportance(importance));
        }
        let total: f64 = importance.iter().sum();
        if total <= 0.0 {
            return Err(SocietyError::InvalidImportance(importance));
        }
        Ok(Self { importance: importance.map(|w| w / total), satisfaction: satisfaction.map(clamp_unit) })
    }

    pub fn importance(&self, m: Motive) -> f64 {
        self.importance[m.index()]
    }

    pub fn satisfaction(&self, m: Motive) -> f64 {
        self.satisfaction[m.index()]
    }

    pub fn satisfactions(&self) -> [f64; 3] {
        self.satisfaction
    }

    pub fn importances(&self) -> [f64; 3] {
        self.importance
    }

    pub fn set_satisfaction(&mut self, m: Motive, value: f64) {
        self.satisfaction[m.index()] = clamp_unit(value);
    }

    pub fn shift_satisfaction(&mut self, m: Motive, delta: f64) {
        self.set_satisfaction(m, self.satisfaction(m) + delta);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// E in [-1, 1].
    pub stance: f64,
    /// D in [0, 1].
    pub dissonance: f64,
}

/// E = pull⁺ − pull⁻ and D = 2·min(pull⁺, pull⁻) / (pull⁺ + pull⁻), where the
/// pulls are the importance-weighted positive and negative satisfactions.
pub fn evaluate_motives(profile: &MotiveProfile) -> Evaluation {
    let (mut pos, mut neg) = (0.0, 0.0);
    for m in Motive::ALL {
        let s = profile.satisfaction(m);
        let w = profile.importance(m);
        if s > 0.0 {
            pos += w * s;
        } else if s < 0.0 {
            neg += w * -s;
        }
    }
    let total = pos + neg;
    let dissonance = if total > 0.0 { (2.0 * pos.min(neg) / total).clamp(0.0, 1.0) } else { 0.0 };
    Evaluation { stance: clamp_unit(pos - neg), dissonance }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CitizenAction {
    Inquire,
    Signal(Sign),
    NoAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionThresholds {
    /// θ_D.
    pub inquire: f64,
    /// θ_E.
    pub signal: f64,
}

impl Default for ActionThresholds {
    fn default() -> Self {
        Self { inquire: 0.4, signal: 0.3 }
    }
}

pub fn decide_action(eval: Evaluation, th: ActionThresholds) -> CitizenAction {
    if eval.stance.abs() >= th.signal {
        CitizenAction::Signal(if eval.stance >= 0.0 { Sign::Positive } else { Sign::Negative })
    } else if eval.dissonance >= th.inquire {
        CitizenAction::Inquire
    } else {
        CitizenAction::NoAction
    }
}

/// Moves social satisfaction a fraction `rate` toward the mean neighbour
/// stance and experiential satisfaction toward the clamped news influence.
/// Values satisfaction is a stable disposition and does not move.
pub fn inquire_update(
    profile: &MotiveProfile,
    neighbour_stances: &[f64],
    news_influence: f64,
    rate: f64,
) -> MotiveProfile {
    let mut next = *profile;
    if !neighbour_stances.is_empty() {
        let mean = neighbour_stances.iter().sum::<f64>() / neighbour_stances.len() as f64;
        let s = profile.satisfaction(Motive::Social);
        next.set_satisfaction(Motive::Social, s + rate * (mean - s));
    }
    let e = profile.satisfaction(Motive::Experiential);
    next.set_satisfaction(Motive::Experiential, e + rate * (clamp_unit(news_influence) - e));
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocioProfile {
    /// 1..=10.
    pub income_decile: u8,
    /// Index into the configured age bands.
    pub age_band: u8,
    /// 0 (basic) ..= 2 (tertiary).
    pub education_level: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CitizenState {
    pub id: AgentId,
    pub profile: MotiveProfile,
    pub evaluation: Evaluation,
    pub socio: SocioProfile,
}

impl CitizenState {
    pub fn new(id: AgentId, profile: MotiveProfile, socio: SocioProfile) -> Self {
        Self { id, evaluation: evaluate_motives(&profile), profile, socio }
    }

    /// Replaces the profile and recomputes stance and dissonance.
    pub fn set_profile(&mut self, profile: MotiveProfile) {
        self.profile = profile;
        self.evaluation = evaluate_motives(&profile);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportShare {
    pub share: f64,
    /// C = 2·share − 1.
    pub signal: f64,
}

/// Fraction of residents with a positive stance.
pub fn support_share<I: IntoIterator<Item = f64>>(stances: I) -> Result<SupportShare, SocietyError> {
    let (mut n, mut positive) = (0usize, 0usize);
    for e in stances {
        n += 1;
        if e > 0.0 {
            positive += 1;
        }
    }
    if n == 0 {
        return Err(SocietyError::NoResidents);
    }
    let share = positive as f64 / n as f64;
    Ok(SupportShare { share, signal: 2.0 * share - 1.0 })
}

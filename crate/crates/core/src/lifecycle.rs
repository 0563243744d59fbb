//! Proposal artifacts, the five-stage lifecycle and the Public Plans
//! Repository.
//!
//! Legal edges:
//!
//! ```text
//! Draft --submission--> UnderConsultation --consultation_closed--> UnderAssessment
//!   --assessment_attached--> UnderDeliberation --council_vote(o)--> Decided(o)
//! Decided(SentForRevision) --rework_applied--> UnderConsultation
//! ```
//!
//! A council vote for revision once the round limit is reached is coerced
//! into a rejection, which bounds every proposal to `max_rounds + 1` cycles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{AgentId, RoleKind, RoleSet};
use crate::nadico::Modification;
use crate::num::fixed;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProposalId(pub u32);

impl fmt::Display for ProposalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "proposal#{}", self.0)
    }
}

/// A proposal attribute or rule operand: a number or a category label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Num(#[serde(with = "fixed")] f64),
    Cat(String),
}

impl AttrValue {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            AttrValue::Num(x) => Some(*x),
            AttrValue::Cat(_) => None,
        }
    }

    pub fn same_type(&self, other: &AttrValue) -> bool {
        matches!((self, other), (AttrValue::Num(_), AttrValue::Num(_)) | (AttrValue::Cat(_), AttrValue::Cat(_)))
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Num(x) => write!(f, "{x}"),
            AttrValue::Cat(s) => f.write_str(s),
        }
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

/// Domain of one proposal attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttributeSpec {
    Numeric {
        #[serde(default)]
        unit: String,
        min: f64,
        max: f64,
    },
    Categorical {
        categories: Vec<String>,
    },
}

impl AttributeSpec {
    pub fn admits(&self, value: &AttrValue) -> bool {
        match (self, value) {
            (AttributeSpec::Numeric { min, max, .. }, AttrValue::Num(x)) => x.is_finite() && *x >= *min && *x <= *max,
            (AttributeSpec::Categorical { categories }, AttrValue::Cat(c)) => categories.contains(c),
            _ => false,
        }
    }
}

pub type AttributeSchema = BTreeMap<String, AttributeSpec>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionOutcome {
    Approved,
    Rejected,
    SentForRevision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProposalStage {
    Draft,
    UnderConsultation,
    UnderAssessment,
    UnderDeliberation,
    Decided(DecisionOutcome),
}

impl ProposalStage {
    pub const ALL: [ProposalStage; 7] = [
        ProposalStage::Draft,
        ProposalStage::UnderConsultation,
        ProposalStage::UnderAssessment,
        ProposalStage::UnderDeliberation,
        ProposalStage::Decided(DecisionOutcome::Approved),
        ProposalStage::Decided(DecisionOutcome::Rejected),
        ProposalStage::Decided(DecisionOutcome::SentForRevision),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProposalStage::Draft => "draft",
            ProposalStage::UnderConsultation => "under_consultation",
            ProposalStage::UnderAssessment => "under_assessment",
            ProposalStage::UnderDeliberation => "under_deliberation",
            ProposalStage::Decided(DecisionOutcome::Approved) => "approved",
            ProposalStage::Decided(DecisionOutcome::Rejected) => "rejected",
            ProposalStage::Decided(DecisionOutcome::SentForRevision) => "sent_for_revision",
        }
    }

    pub fn parse(s: &str) -> Option<ProposalStage> {
        ProposalStage::ALL.into_iter().find(|st| st.as_str() == s)
    }

    /// Approved and Rejected are final.
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            ProposalStage::Decided(DecisionOutcome::Approved) | ProposalStage::Decided(DecisionOutcome::Rejected)
        )
    }

    /// Visible to the public: anything past Draft that is not final.
    pub fn is_public(self) -> bool {
        !matches!(self, ProposalStage::Draft) && !self.is_terminal()
    }
}

impl fmt::Display for ProposalStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ProposalStage {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ProposalStage {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ProposalStage::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown stage `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecycleEvent {
    Submission,
    ConsultationClosed,
    AssessmentAttached,
    CouncilVote(DecisionOutcome),
    ReworkApplied,
}

/// The raw edge table, before round-limit coercion.
pub fn legal_edge(stage: ProposalStage, event: LifecycleEvent) -> Option<ProposalStage> {
    use LifecycleEvent as E;
    use ProposalStage as S;
    match (stage, event) {
        (S::Draft, E::Submission) => Some(S::UnderConsultation),
        (S::UnderConsultation, E::ConsultationClosed) => Some(S::UnderAssessment),
        (S::UnderAssessment, E::AssessmentAttached) => Some(S::UnderDeliberation),
        (S::UnderDeliberation, E::CouncilVote(outcome)) => Some(S::Decided(outcome)),
        (S::Decided(DecisionOutcome::SentForRevision), E::ReworkApplied) => Some(S::UnderConsultation),
        _ => None,
    }
}

/// Applies `event` to `stage` given the revision rounds used so far.
pub fn next_stage(
    stage: ProposalStage,
    event: LifecycleEvent,
    revision_round: u32,
    max_rounds: u32,
) -> Result<ProposalStage, LifecycleError> {
    let to = legal_edge(stage, event).ok_or(LifecycleError::IllegalTransition { from: stage, event })?;
    Ok(match to {
        ProposalStage::Decided(DecisionOutcome::SentForRevision) if revision_round >= max_rounds => {
            ProposalStage::Decided(DecisionOutcome::Rejected)
        }
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub tick: u64,
    pub from: ProposalStage,
    pub to: ProposalStage,
    pub event: LifecycleEvent,
}

impl Transition {
    pub fn coerced(&self) -> bool {
        self.event == LifecycleEvent::CouncilVote(DecisionOutcome::SentForRevision)
            && self.to == ProposalStage::Decided(DecisionOutcome::Rejected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RevisionOrigin {
    PublicConsultation,
    DeveloperRework,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub proposal: ProposalId,
    pub author: AgentId,
    pub origin: RevisionOrigin,
    pub changes: Attributes,
    pub tick: u64,
    /// Revision round the revision was submitted in.
    #[serde(default)]
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifecycleError {
    #[error("event {event:?} is not legal in stage {from}")]
    IllegalTransition { from: ProposalStage, event: LifecycleEvent },
    #[error("transition at tick {tick} does not follow the last recorded tick {last}")]
    NonIncreasingTick { last: u64, tick: u64 },
    #[error("a proposal needs at least one attribute")]
    EmptyAttributes,
    #[error("a revision must change at least one attribute")]
    EmptyChanges,
    #[error("{origin:?} revision not accepted in stage {stage}")]
    WrongStage { stage: ProposalStage, origin: RevisionOrigin },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` changes type")]
    AttributeType(String),
    #[error("{author} lacks the role required for a {origin:?} revision")]
    Unauthorized { author: AgentId, origin: RevisionOrigin },
    #[error("revision targets {found}, not {expected}")]
    WrongProposal { expected: ProposalId, found: ProposalId },
    #[error("assessment for ({proposal}, tick {tick}) already stored")]
    DuplicateAssessment { proposal: ProposalId, tick: u64 },
    #[error("unknown proposal {0}")]
    UnknownProposal(ProposalId),
    #[error("assessments are only stored for proposals under assessment; {proposal} is {stage}")]
    NotUnderAssessment { proposal: ProposalId, stage: ProposalStage },
    #[error("invalid assessment: {0}")]
    InvalidAssessment(String),
    #[error("history is not a path in the lifecycle graph at entry {index}")]
    InvalidHistory { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub id: ProposalId,
    pub developer: AgentId,
    pub attributes: Attributes,
    pub stage: ProposalStage,
    pub revision_round: u32,
    pub created_tick: u64,
    pub history: Vec<Transition>,
    pub revisions: Vec<Revision>,
}

impl Proposal {
    pub fn new(id: ProposalId, developer: AgentId, attributes: Attributes, tick: u64) -> Result<Self, LifecycleError> {
        if attributes.is_empty() {
            return Err(LifecycleError::EmptyAttributes);
        }
        Ok(Self {
            id,
            developer,
            attributes,
            stage: ProposalStage::Draft,
            revision_round: 0,
            created_tick: tick,
            history: Vec::new(),
            revisions: Vec::new(),
        })
    }

    /// Tick at which the current stage was entered.
    pub fn stage_entered(&self) -> u64 {
        self.history.last().map_or(self.created_tick, |t| t.tick)
    }

    pub fn transition(
        &mut self,
        event: LifecycleEvent,
        tick: u64,
        max_rounds: u32,
    ) -> Result<Transition, LifecycleError> {
        if let Some(last) = self.history.last() {
            if tick <= last.tick {
                return Err(LifecycleError::NonIncreasingTick { last: last.tick, tick });
            }
        }
        let to = next_stage(self.stage, event, self.revision_round, max_rounds)?;
        let t = Transition { tick, from: self.stage, to, event };
        if event == LifecycleEvent::ReworkApplied {
            self.revision_round += 1;
        }
        self.stage = to;
        self.history.push(t.clone());
        Ok(t)
    }

    /// Records a revision. Consultation revisions are advisory and leave the
    /// attributes alone; developer rework overwrites the changed attributes.
    pub fn submit_revision(&mut self, revision: Revision, author_roles: &RoleSet) -> Result<(), LifecycleError> {
        if revision.proposal != self.id {
            return Err(LifecycleError::WrongProposal { expected: self.id, found: revision.proposal });
        }
        let (stage_ok, role) = match revision.origin {
            RevisionOrigin::PublicConsultation => {
                (self.stage == ProposalStage::UnderConsultation, RoleKind::ProposalReviewer)
            }
            RevisionOrigin::DeveloperRework => {
                (self.stage == ProposalStage::Decided(DecisionOutcome::SentForRevision), RoleKind::ProposalDeveloper)
            }
        };
        if !stage_ok {
            return Err(LifecycleError::WrongStage { stage: self.stage, origin: revision.origin });
        }
        if !author_roles.contains(&role) {
            return Err(LifecycleError::Unauthorized { author: revision.author, origin: revision.origin });
        }
        if revision.changes.is_empty() {
            return Err(LifecycleError::EmptyChanges);
        }
        for (name, value) in &revision.changes {
            let current = self.attributes.get(name).ok_or_else(|| LifecycleError::UnknownAttribute(name.clone()))?;
            if !current.same_type(value) {
                return Err(LifecycleError::AttributeType(name.clone()));
            }
        }
        if revision.origin == RevisionOrigin::DeveloperRework {
            for (name, value) in &revision.changes {
                self.attributes.insert(name.clone(), value.clone());
            }
        }
        self.revisions.push(Revision { round: self.revision_round, ..revision });
        Ok(())
    }

    /// Consultation revisions submitted during the current revision round.
    pub fn consultation_revisions(&self) -> impl Iterator<Item = &Revision> {
        let round = self.revision_round;
        self.revisions.iter().filter(move |r| r.origin == RevisionOrigin::PublicConsultation && r.round == round)
    }

    pub fn decided_tick(&self) -> Option<u64> {
        self.history.iter().rev().find(|t| t.to.is_terminal()).map(|t| t.tick)
    }
}

/// Replays a recorded history from Draft and returns the reached stage along
/// with the number of revision rounds it implies.
pub fn replay(history: &[Transition], max_rounds: u32) -> Result<(ProposalStage, u32), LifecycleError> {
    let mut stage = ProposalStage::Draft;
    let mut rounds = 0;
    for (index, t) in history.iter().enumerate() {
        let expected =
            next_stage(stage, t.event, rounds, max_rounds).map_err(|_| LifecycleError::InvalidHistory { index })?;
        if t.from != stage || t.to != expected {
            return Err(LifecycleError::InvalidHistory { index });
        }
        if t.event == LifecycleEvent::ReworkApplied {
            rounds += 1;
        }
        stage = expected;
    }
    Ok((stage, rounds))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub proposal: ProposalId,
    pub planner: AgentId,
    #[serde(with = "fixed")]
    pub compliance_score: f64,
    pub mandatory_mods: Vec<Modification>,
    pub optional_mods: Vec<Modification>,
    /// Set when a violated rule carries a reject-trigger consequence.
    pub reject_trigger: bool,
    /// Consultation revisions that informed the assessment.
    pub advisory_revisions: usize,
    pub tick: u64,
}

impl Assessment {
    /// Signal in [-1, 1] handed to politicians.
    pub fn signal(&self) -> f64 {
        2.0 * self.compliance_score - 1.0
    }

    pub fn validate(&self, proposal: &Proposal) -> Result<(), LifecycleError> {
        if !(0.0..=1.0).contains(&self.compliance_score) {
            return Err(LifecycleError::InvalidAssessment(format!(
                "compliance score {} outside [0, 1]",
                self.compliance_score
            )));
        }
        if self.compliance_score == 1.0 && !self.mandatory_mods.is_empty() {
            return Err(LifecycleError::InvalidAssessment("full compliance with mandatory modifications".into()));
        }
        for m in self.mandatory_mods.iter().chain(&self.optional_mods) {
            if !proposal.attributes.contains_key(&m.attribute) {
                return Err(LifecycleError::InvalidAssessment(format!(
                    "modification names unknown attribute `{}`",
                    m.attribute
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RepositoryFilter {
    pub proposal: Option<ProposalId>,
    /// Current stage of the assessed proposal.
    pub stage: Option<ProposalStage>,
}

/// Public, append-only store of proposal stages and planner assessments.
#[derive(Debug, Clone, Default)]
pub struct PublicPlansRepository {
    assessments: Vec<Assessment>,
    keys: BTreeSet<(ProposalId, u64)>,
    stages: BTreeMap<ProposalId, ProposalStage>,
}

impl PublicPlansRepository {
    pub fn new() -> Self {
        Self::default()
    }

    /// Publishes the proposal's current stage.
    pub fn publish(&mut self, proposal: &Proposal) {
        self.stages.insert(proposal.id, proposal.stage);
    }

    pub fn stage_of(&self, id: ProposalId) -> Option<ProposalStage> {
        self.stages.get(&id).copied()
    }

    pub fn proposals_in(&self, stage: ProposalStage) -> Vec<ProposalId> {
        self.stages.iter().filter(|(_, s)| **s == stage).map(|(id, _)| *id).collect()
    }

    pub fn store_assessment(&mut self, assessment: Assessment) -> Result<(), LifecycleError> {
        let stage = self.stage_of(assessment.proposal).ok_or(LifecycleError::UnknownProposal(assessment.proposal))?;
        if stage != ProposalStage::UnderAssessment {
            return Err(LifecycleError::NotUnderAssessment { proposal: assessment.proposal, stage });
        }
        let key = (assessment.proposal, assessment.tick);
        if !self.keys.insert(key) {
            return Err(LifecycleError::DuplicateAssessment { proposal: key.0, tick: key.1 });
        }
        self.assessments.push(assessment);
        Ok(())
    }

    /// Matching assessments ordered by (tick, proposal id).
    pub fn query(&self, filter: &RepositoryFilter) -> Vec<&Assessment> {
        let mut out: Vec<&Assessment> = self
            .assessments
            .iter()
            .filter(|a| filter.proposal.is_none_or(|p| p == a.proposal))
            .filter(|a| filter.stage.is_none_or(|s| self.stage_of(a.proposal) == Some(s)))
            .collect();
        out.sort_by_key(|a| (a.tick, a.proposal));
        out
    }

    pub fn latest_for(&self, proposal: ProposalId) -> Option<&Assessment> {
        self.assessments.iter().filter(|a| a.proposal == proposal).max_by_key(|a| a.tick)
    }

    pub fn assessments(&self) -> &[Assessment] {
        &self.assessments
    }

    pub fn len(&self) -> usize {
        self.assessments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assessments.is_empty()
    }
}

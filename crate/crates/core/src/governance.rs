//! Developers, planners and the council.
//!
//! Developers generate and rework proposals, planners turn rule evaluation
//! into assessments, and politicians score each proposal on five channels
//! before the council votes.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::AgentId;
use crate::lifecycle::{
    Assessment, AttrValue, AttributeSchema, AttributeSpec, Attributes, DecisionOutcome, Proposal, ProposalId,
};
use crate::nadico::{evaluate_ruleset, EvalError, Modification, Requirement, Statement};
use crate::num::{clamp_unit, fixed};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GovernanceError {
    #[error("the council has no members")]
    EmptyCouncil,
    #[error("channel weights must be finite, non-negative and sum to 1 (got {0:?})")]
    InvalidWeights([f64; 5]),
    #[error("party {party} declares {declared} seats but has {members} politicians")]
    SeatMismatch { party: u32, declared: u32, members: u32 },
    #[error("politician {politician} belongs to unknown party {party}")]
    UnknownParty { politician: AgentId, party: u32 },
    #[error("developer `{developer}`: {message}")]
    Generator { developer: String, message: String },
    #[error(transparent)]
    Rules(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartyId(pub u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Party {
    pub id: PartyId,
    pub name: String,
    /// +1 climate-adaptive, −1 growth-first.
    pub position: f64,
    /// Cultural trust in civil-society signals, in [0, 1].
    pub trust: f64,
    pub seats: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Assessment,
    Party,
    Citizens,
    Media,
    Lobby,
}

impl Channel {
    pub const ALL: [Channel; 5] =
        [Channel::Assessment, Channel::Party, Channel::Citizens, Channel::Media, Channel::Lobby];
}

/// Weights over (A, P, C, M, L), non-negative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 5]", into = "[f64; 5]")]
pub struct ChannelWeights([f64; 5]);

impl ChannelWeights {
    pub fn new(w: [f64; 5]) -> Result<Self, GovernanceError> {
        let sum: f64 = w.iter().sum();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(GovernanceError::InvalidWeights(w));
        }
        Ok(Self(w))
    }

    pub fn get(&self, c: Channel) -> f64 {
        self.0[c as usize]
    }

    pub fn as_array(&self) -> [f64; 5] {
        self.0
    }
}

impl Default for ChannelWeights {
    fn default() -> Self {
        Self([0.35, 0.25, 0.15, 0.1, 0.15])
    }
}

impl TryFrom<[f64; 5]> for ChannelWeights {
    type Error = GovernanceError;

    fn try_from(w: [f64; 5]) -> Result<Self, Self::Error> {
        ChannelWeights::new(w)
    }
}

impl From<ChannelWeights> for [f64; 5] {
    fn from(w: ChannelWeights) -> Self {
        w.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoliticianState {
    pub id: AgentId,
    pub party: PartyId,
    pub personal_stance: f64,
    pub weights: ChannelWeights,
}

/// P_blend = (1 − β)·party position + β·personal stance.
pub fn blended_position(party_position: f64, personal_stance: f64, beta: f64) -> f64 {
    clamp_unit((1.0 - beta) * party_position + beta * personal_stance)
}

/// Channel inputs common to every politician for one decision.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SharedSignals {
    #[serde(with = "fixed")]
    pub assessment: f64,
    #[serde(with = "fixed")]
    pub citizens: f64,
    #[serde(with = "fixed")]
    pub media: f64,
    #[serde(with = "fixed")]
    pub lobby: f64,
    pub reject_trigger: bool,
}

impl SharedSignals {
    pub fn with_party(&self, party: f64) -> DecisionInputs {
        DecisionInputs {
            assessment: clamp_unit(self.assessment),
            party: clamp_unit(party),
            citizens: clamp_unit(self.citizens),
            media: clamp_unit(self.media),
            lobby: clamp_unit(self.lobby),
            reject_trigger: self.reject_trigger,
        }
    }
}

/// One politician's view of a decision; every channel in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DecisionInputs {
    pub assessment: f64,
    /// Party-blended position.
    pub party: f64,
    pub citizens: f64,
    pub media: f64,
    pub lobby: f64,
    pub reject_trigger: bool,
}

impl DecisionInputs {
    pub fn get(&self, c: Channel) -> f64 {
        match c {
            Channel::Assessment => self.assessment,
            Channel::Party => self.party,
            Channel::Citizens => self.citizens,
            Channel::Media => self.media,
            Channel::Lobby => self.lobby,
        }
    }

    pub fn set(&mut self, c: Channel, v: f64) {
        let slot = match c {
            Channel::Assessment => &mut self.assessment,
            Channel::Party => &mut self.party,
            Channel::Citizens => &mut self.citizens,
            Channel::Media => &mut self.media,
            Channel::Lobby => &mut self.lobby,
        };
        *slot = v;
    }
}

/// Trust scales the citizen and media weights; the five are then
/// renormalised. All zero if nothing is left to renormalise.
pub fn effective_weights(w: &ChannelWeights, trust: f64) -> [f64; 5] {
    let t = trust.clamp(0.0, 1.0);
    let mut raw = w.as_array();
    raw[Channel::Citizens as usize] *= t;
    raw[Channel::Media as usize] *= t;
    let sum: f64 = raw.iter().sum();
    if sum > 0.0 {
        raw.map(|x| x / sum)
    } else {
        [0.0; 5]
    }
}

pub fn decision_score(w: &ChannelWeights, trust: f64, inputs: &DecisionInputs) -> f64 {
    let ew = effective_weights(w, trust);
    let s: f64 = Channel::ALL.iter().map(|&c| ew[c as usize] * clamp_unit(inputs.get(c))).sum();
    clamp_unit(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Approve,
    Reject,
    SendForRevision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]

pub struct VoteThresholds {
    pub approve: f64,
    pub reject: f64,
}

impl Default for VoteThresholds {
    fn default() -> Self {
        Self { approve: 0.2, reject: -0.2 }
    }
}

pub fn cast_vote(score: f64, th: VoteThresholds) -> Vote {
    if score >= th.approve {
        Vote::Approve
    } else if score <= th.reject {
        Vote::Reject
    } else {
        Vote::SendForRevision
    }
}

/// Plurality over seats; ties go to SendForRevision, then Reject, then Approve.
pub fn tally(votes: &[Vote]) -> Result<DecisionOutcome, GovernanceError> {
    if votes.is_empty() {
        return Err(GovernanceError::EmptyCouncil);
    }
    let count = |v: Vote| votes.iter().filter(|x| **x == v).count();
    let ranked = [
        (count(Vote::SendForRevision), DecisionOutcome::SentForRevision),
        (count(Vote::Reject), DecisionOutcome::Rejected),
        (count(Vote::Approve), DecisionOutcome::Approved),
    ];
    let best = ranked.iter().map(|r| r.0).max().unwrap_or(0);
    Ok(ranked.iter().find(|r| r.0 == best).map(|r| r.1).unwrap_or(DecisionOutcome::SentForRevision))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ballot {
    pub politician: AgentId,
    pub party: PartyId,
    /// Party-blended position used as P.
    #[serde(with = "fixed")]
    pub position: f64,
    #[serde(with = "fixed")]
    pub trust: f64,
    #[serde(with = "fixed")]
    pub score: f64,
    pub vote: Vote,
    /// Approve cast despite a reject-trigger on the assessment.
    #[serde(rename = "override")]
    pub overrides_trigger: bool,
}

/// Logged once per council vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub proposal_id: ProposalId,
    pub per_politician: Vec<Ballot>,
    pub outcome: DecisionOutcome,
    pub inputs: SharedSignals,
}

/// Parties and their politicians; each politician holds one seat.
#[derive(Debug, Clone, PartialEq)]
pub struct Council {
    parties: BTreeMap<PartyId, Party>,
    politicians: Vec<PoliticianState>,
    /// β in the party/personal blend.
    pub personal_blend: f64,
}

impl Council {
    pub fn new(
        parties: Vec<Party>,
        mut politicians: Vec<PoliticianState>,
        personal_blend: f64,
    ) -> Result<Self, GovernanceError> {
        if politicians.is_empty() {
            return Err(GovernanceError::EmptyCouncil);
        }
        let parties: BTreeMap<PartyId, Party> = parties.into_iter().map(|p| (p.id, p)).collect();
        for pol in &politicians {
            if !parties.contains_key(&pol.party) {
                return Err(GovernanceError::UnknownParty { politician: pol.id, party: pol.party.0 });
            }
        }
        for party in parties.values() {
            let members = politicians.iter().filter(|p| p.party == party.id).count() as u32;
            if members != party.seats {
                return Err(GovernanceError::SeatMismatch { party: party.id.0, declared: party.seats, members });
            }
        }
        politicians.sort_by_key(|p| p.id);
        Ok(Self { parties, politicians, personal_blend })
    }

    pub fn politicians(&self) -> &[PoliticianState] {
        &self.politicians
    }

    pub fn parties(&self) -> impl Iterator<Item = &Party> {
        self.parties.values()
    }

    pub fn party(&self, id: PartyId) -> &Party {
        &self.parties[&id]
    }

    pub fn size(&self) -> usize {
        self.politicians.len()
    }

    pub fn ballot(&self, pol: &PoliticianState, shared: &SharedSignals, th: VoteThresholds) -> Ballot {
        let party = self.party(pol.party);
        let position = blended_position(party.position, pol.personal_stance, self.personal_blend);
        let score = decision_score(&pol.weights, party.trust, &shared.with_party(position));
        let vote = cast_vote(score, th);
        Ballot {
            politician: pol.id,
            party: pol.party,
            position,
            trust: party.trust,
            score,
            vote,
            overrides_trigger: shared.reject_trigger && vote == Vote::Approve,
        }
    }

    /// Every politician votes and the seats are tallied.
    pub fn decide(&self, proposal: ProposalId, shared: &SharedSignals, th: VoteThresholds) -> DecisionRecord {
        let ballots: Vec<Ballot> = self.politicians.iter().map(|p| self.ballot(p, shared, th)).collect();
        let votes: Vec<Vote> = ballots.iter().map(|b| b.vote).collect();
        let outcome = tally(&votes).expect("council is non-empty by construction");
        DecisionRecord { proposal_id: proposal, per_politician: ballots, outcome, inputs: *shared }
    }
}

/// Outcome of replaying a logged decision: per-ballot scores and votes
/// recomputed from the logged positions, trusts and shared signals.
pub fn replay_decision(
    record: &DecisionRecord,
    weights: &BTreeMap<AgentId, ChannelWeights>,
    th: VoteThresholds,
) -> Option<DecisionOutcome> {
    let mut votes = Vec::with_capacity(record.per_politician.len());
    for b in &record.per_politician {
        let w = weights.get(&b.politician)?;
        let s = decision_score(w, b.trust, &record.inputs.with_party(b.position));
        votes.push(cast_vote(s, th));
    }
    tally(&votes).ok()
}

/// Sampling distribution for one proposal attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum Generator {
    Point {
        value: AttrValue,
    },
    Uniform {
        min: f64,
        max: f64,
    },
    /// Normal draw clamped to the attribute's domain.
    Normal {
        mean: f64,
        sd: f64,
    },
    Categorical {
        weights: BTreeMap<String, f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]

pub struct DeveloperProfile {
    pub name: String,
    pub generators: BTreeMap<String, Generator>,
    /// p_opt: chance each optional modification is adopted during rework.
    #[serde(default = "default_adoption")]
    pub optional_adoption: f64,
}

fn default_adoption() -> f64 {
    0.5
}

impl DeveloperProfile {
    /// Every schema attribute has a generator whose support lies in its domain.
    pub fn check(&self, schema: &AttributeSchema) -> Result<(), GovernanceError> {
        let err = |message: String| GovernanceError::Generator { developer: self.name.clone(), message };
        if !(0.0..=1.0).contains(&self.optional_adoption) {
            return Err(err(format!("optional_adoption {} outside [0, 1]", self.optional_adoption)));
        }
        for name in self.generators.keys() {
            if !schema.contains_key(name) {
                return Err(err(format!("generator for unknown attribute `{name}`")));
            }
        }
        for (name, spec) in schema {
            let gen = self.generators.get(name).ok_or_else(|| err(format!("no generator for attribute `{name}`")))?;
            let ok = match (gen, spec) {
                (Generator::Point { value }, spec) => spec.admits(value),
                (Generator::Uniform { min: a, max: b }, AttributeSpec::Numeric { min, max, .. }) => {
                    a.is_finite() && b.is_finite() && a <= b && a >= min && b <= max
                }
                (Generator::Normal { mean, sd }, AttributeSpec::Numeric { .. }) => {
                    mean.is_finite() && sd.is_finite() && *sd >= 0.0
                }
                (Generator::Categorical { weights }, AttributeSpec::Categorical { categories }) => {
                    let total: f64 = weights.values().sum();
                    !weights.is_empty()
                        && weights.keys().all(|c| categories.contains(c))
                        && weights.values().all(|w| w.is_finite() && *w >= 0.0)
                        && total > 0.0
                }
                _ => false,
            };
            if !ok {
                return Err(err(format!("generator for `{name}` does not fit its domain")));
            }
        }
        Ok(())
    }
}

fn sample<R: Rng>(gen: &Generator, spec: &AttributeSpec, rng: &mut R) -> AttrValue {
    match (gen, spec) {
        (Generator::Point { value }, _) => value.clone(),
        (Generator::Uniform { min, max }, _) => {
            AttrValue::Num(if max > min { rng.random_range(*min..=*max) } else { *min })
        }
        (Generator::Normal { mean, sd }, AttributeSpec::Numeric { min, max, .. }) => {
            let x = Normal::new(*mean, *sd).map(|d| d.sample(rng)).unwrap_or(*mean);
            AttrValue::Num(x.clamp(*min, *max))
        }
        (Generator::Categorical { weights }, _) => {
            let total: f64 = weights.values().sum();
            let mut u = rng.random::<f64>() * total;
            let mut last = None;
            for (cat, w) in weights {
                if *w <= 0.0 {
                    continue;
                }
                last = Some(cat);
                if u < *w {
                    return AttrValue::Cat(cat.clone());
                }
                u -= w;
            }
            AttrValue::Cat(last.cloned().unwrap_or_default())
        }
        (Generator::Normal { mean, .. }, _) => AttrValue::Num(*mean),
    }
}

/// Draws a Draft proposal, sampling attributes in schema (name) order.
pub fn generate_proposal<R: Rng>(
    id: ProposalId,
    developer: AgentId,
    profile: &DeveloperProfile,
    schema: &AttributeSchema,
    tick: u64,
    rng: &mut R,
) -> Result<Proposal, GovernanceError> {
    profile.check(schema)?;
    let attributes: Attributes =
        schema.iter().map(|(name, spec)| (name.clone(), sample(&profile.generators[name], spec, rng))).collect();
    Proposal::new(id, developer, attributes, tick)
        .map_err(|e| GovernanceError::Generator { developer: profile.name.clone(), message: e.to_string() })
}

/// Evaluates the rules against the proposal. Optional modifications touching
/// an attribute raised in this round's public consultation are promoted to
/// mandatory.
pub fn assess(
    planner: AgentId,
    proposal: &Proposal,
    rules: &[Statement],
    tick: u64,
) -> Result<Assessment, GovernanceError> {
    let report = evaluate_ruleset(rules, &proposal.attributes)?;
    let raised: BTreeSet<&str> =
        proposal.consultation_revisions().flat_map(|r| r.changes.keys().map(String::as_str)).collect();
    let advisory_revisions = proposal.consultation_revisions().count();
    let mut mandatory_mods = report.mandatory_mods;
    let mut optional_mods = Vec::new();
    for m in report.optional_mods {
        if raised.contains(m.attribute.as_str()) {
            mandatory_mods.push(m);
        } else {
            optional_mods.push(m);
        }
    }
    Ok(Assessment {
        proposal: proposal.id,
        planner,
        compliance_score: report.compliance_score,
        mandatory_mods,
        optional_mods,
        reject_trigger: report.reject_trigger,
        advisory_revisions,
        tick,
    })
}

/// Smallest move that makes `current` satisfy `req`, kept inside the domain.
pub fn repair(req: &Requirement, current: &AttrValue, spec: &AttributeSpec) -> Option<AttrValue> {
    if req.holds(current) {
        return None;
    }
    let nudge = |b: f64| 1e-6 * b.abs().max(1.0);
    let value = match (req, spec) {
        (Requirement::Eq(v), _) => v.clone(),
        (Requirement::In(set), _) => set.iter().find(|v| spec.admits(v)).cloned().or_else(|| set.first().cloned())?,
        (Requirement::Lt(b), _) => AttrValue::Num(b - nudge(*b)),
        (Requirement::Le(b), _) => AttrValue::Num(*b),
        (Requirement::Gt(b), _) => AttrValue::Num(b + nudge(*b)),
        (Requirement::Ge(b), _) => AttrValue::Num(*b),
        (Requirement::Ne(_) | Requirement::NotIn(_), AttributeSpec::Categorical { categories }) => {
            categories.iter().map(|c| AttrValue::Cat(c.clone())).find(|v| req.holds(v))?
        }
        (Requirement::Ne(AttrValue::Num(x)), AttributeSpec::Numeric { .. }) => AttrValue::Num(x + nudge(*x)),
        _ => return None,
    };
    Some(match (value, spec) {
        (AttrValue::Num(x), AttributeSpec::Numeric { min, max, .. }) => AttrValue::Num(x.clamp(*min, *max)),
        (v, _) => v,
    })
}

/// Attribute changes the developer makes after a send-for-revision: every
/// mandatory modification and each optional one with probability p_opt.
/// Modifications are applied in order, so later ones see earlier changes.
pub fn rework<R: Rng>(
    proposal: &Proposal,
    assessment: &Assessment,
    profile: &DeveloperProfile,
    schema: &AttributeSchema,
    rng: &mut R,
) -> Attributes {
    let mut adopted: Vec<&Modification> = assessment.mandatory_mods.iter().collect();
    for m in &assessment.optional_mods {
        if rng.random_bool(profile.optional_adoption) {
            adopted.push(m);
        }
    }
    let mut current = proposal.attributes.clone();
    let mut changes = Attributes::new();
    for m in adopted {
        let (Some(value), Some(spec)) = (current.get(&m.attribute), schema.get(&m.attribute)) else {
            continue;
        };
        if let Some(v) = repair(&m.requirement, value, spec) {
            if &v != value {
                current.insert(m.attribute.clone(), v.clone());
                changes.insert(m.attribute.clone(), v);
            }
        }
    }
    changes
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(a: [f64; 5]) -> ChannelWeights {
        ChannelWeights::new(a).unwrap()
    }

    #[test]
    fn zero_inputs_score_zero() {
        assert_eq!(decision_score(&ChannelWeights::default(), 0.7, &DecisionInputs::default()), 0.0);
    }

    #[test]
    fn single_channel() {
        let inputs = DecisionInputs { assessment: 1.0, ..Default::default() };
        for t in [0.0, 0.5, 1.0] {
            assert_eq!(decision_score(&w([1.0, 0.0, 0.0, 0.0, 0.0]), t, &inputs), 1.0);
        }
    }

    #[test]
    fn zero_trust_mutes_civil_society() {
        let ew = effective_weights(&ChannelWeights::default(), 0.0);
        assert_eq!(ew[2], 0.0);
        assert_eq!(ew[3], 0.0);
        assert!((ew.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(effective_weights(&w([0.0, 0.0, 0.5, 0.5, 0.0]), 0.0), [0.0; 5]);
    }

    #[test]
    fn invalid_weights() {
        assert!(ChannelWeights::new([0.4, 0.4, 0.4, 0.0, 0.0]).is_err());
        assert!(ChannelWeights::new([-0.1, 0.4, 0.4, 0.3, 0.0]).is_err());
    }

    #[test]
    fn votes_and_ties() {
        let th = VoteThresholds::default();
        assert_eq!(cast_vote(1.0, th), Vote::Approve);
        assert_eq!(cast_vote(0.0, th), Vote::SendForRevision);
        assert_eq!(cast_vote(-0.2, th), Vote::Reject);
        use Vote::*;
        assert_eq!(tally(&[Approve, Approve, Reject]).unwrap(), DecisionOutcome::Approved);
        assert_eq!(tally(&[Approve, Reject]).unwrap(), DecisionOutcome::Rejected);
        assert_eq!(tally(&[Approve, SendForRevision]).unwrap(), DecisionOutcome::SentForRevision);
        assert_eq!(tally(&[Approve, Reject, SendForRevision]).unwrap(), DecisionOutcome::SentForRevision);
        assert_eq!(tally(&[]), Err(GovernanceError::EmptyCouncil));
    }

    fn council(personal: f64) -> Council {
        let parties = vec![
            Party { id: PartyId(0), name: "green".into(), position: 0.8, trust: 0.9, seats: 2 },
            Party { id: PartyId(1), name: "growth".into(), position: -0.8, trust: 0.3, seats: 1 },
        ];
        let pols = (0..3)
            .map(|i| PoliticianState {
                id: AgentId(10 + i),
                party: PartyId(if i < 2 { 0 } else { 1 }),
                personal_stance: personal,
                weights: ChannelWeights::default(),
            })
            .collect();
        Council::new(parties, pols, 0.3).unwrap()
    }

    #[test]
    fn council_checks_seats() {
        let c = council(0.0);
        let mut parties: Vec<Party> = c.parties().cloned().collect();
        parties[0].seats = 3;
        assert!(matches!(
            Council::new(parties, c.politicians().to_vec(), 0.3),
            Err(GovernanceError::SeatMismatch { .. })
        ));
        assert_eq!(Council::new(vec![], vec![], 0.3), Err(GovernanceError::EmptyCouncil));
    }

    #[test]
    fn decision_replays_and_flags_overrides() {
        let c = council(0.5);
        let shared = SharedSignals { assessment: 1.0, citizens: 1.0, media: 1.0, lobby: 1.0, reject_trigger: true };
        let rec = c.decide(ProposalId(0), &shared, VoteThresholds::default());
        assert_eq!(rec.outcome, DecisionOutcome::Approved);
        assert!(rec.per_politician.iter().filter(|b| b.vote == Vote::Approve).all(|b| b.overrides_trigger));
        let weights = c.politicians().iter().map(|p| (p.id, p.weights)).collect();
        assert_eq!(replay_decision(&rec, &weights, VoteThresholds::default()), Some(rec.outcome));
    }

    fn schema() -> AttributeSchema {
        let mut s = AttributeSchema::new();
        s.insert("height".into(), AttributeSpec::Numeric { unit: "m".into(), min: 0.0, max: 60.0 });
        s.insert("zone".into(), AttributeSpec::Categorical { categories: vec!["a".into(), "b".into()] });
        s
    }

    #[test]
    fn point_generators_are_exact() {
        let mut gens = BTreeMap::new();
        gens.insert("height".to_string(), Generator::Point { value: AttrValue::Num(12.5) });
        gens.insert("zone".to_string(), Generator::Point { value: AttrValue::Cat("b".into()) });
        let dev = DeveloperProfile { name: "d".into(), generators: gens, optional_adoption: 0.5 };
        let p = generate_proposal(ProposalId(0), AgentId(1), &dev, &schema(), 0, &mut ChaCha8Rng::seed_from_u64(0))
            .unwrap();
        assert_eq!(p.attributes["height"], AttrValue::Num(12.5));
        assert_eq!(p.attributes["zone"], AttrValue::Cat("b".into()));
    }

    #[test]
    fn generator_domain_mismatch() {
        let mut gens = BTreeMap::new();
        gens.insert("height".to_string(), Generator::Uniform { min: 0.0, max: 80.0 });
        gens.insert("zone".to_string(), Generator::Point { value: AttrValue::Cat("b".into()) });
        let dev = DeveloperProfile { name: "d".into(), generators: gens, optional_adoption: 0.5 };
        assert!(dev.check(&schema()).is_err());
    }

    #[test]
    fn repair_moves_to_the_boundary() {
        let spec = AttributeSpec::Numeric { unit: String::new(), min: 0.0, max: 60.0 };
        assert_eq!(repair(&Requirement::Le(20.0), &AttrValue::Num(30.0), &spec), Some(AttrValue::Num(20.0)));
        let v = repair(&Requirement::Lt(20.0), &AttrValue::Num(30.0), &spec).unwrap();
        assert!(Requirement::Lt(20.0).holds(&v));
        assert_eq!(repair(&Requirement::Le(20.0), &AttrValue::Num(10.0), &spec), None);
        let cat = AttributeSpec::Categorical { categories: vec!["a".into(), "b".into()] };
        assert_eq!(
            repair(&Requirement::Ne(AttrValue::Cat("a".into())), &AttrValue::Cat("a".into()), &cat),
            Some(AttrValue::Cat("b".into()))
        );
    }
}

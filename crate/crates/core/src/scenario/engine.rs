//! The tick loop.
//!
//! Every tick runs four phases in a fixed order: media, advocacy, citizens,
//! lifecycle. Agents read the state as it stood when their phase began and
//! their effects are applied afterwards in agent-id order, so shuffling the
//! processing order inside a phase cannot change the outcome.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use super::config::Scenario;
use super::output::{ProposalResult, RunOutput, RunResult, EVENTS_FILE, METRICS_FILE};
use super::population::synthesize_population;
use super::ScenarioError;
use crate::advocacy::{sign_value, ActionKind, ActionWorld, ActivistState, Advocacy, ChoiceContext, Effect};
use crate::events::{EventBody, Phase};
use crate::governance::{
    assess, generate_proposal, repair, rework, ChannelWeights, Council, DecisionRecord, DeveloperProfile, Party,
    PartyId, PoliticianState, SharedSignals,
};
use crate::kernel::{
    AgentId, Delivery, EnvId, EnvironmentKind, Message, MessageKind, Organization, Payload, RoleKind, Scope,
};
use crate::lifecycle::{
    Attributes, DecisionOutcome, LifecycleEvent, Proposal, ProposalId, ProposalStage, PublicPlansRepository, Revision,
    RevisionOrigin, Transition, SCHEMA_VERSION,
};
use crate::nadico::evaluate_ruleset;
use crate::num::{clamp_unit, fixed};
use crate::rng::{RngStreams, SimRng, Stream};
use crate::society::{
    decide_action, inquire_update, media_tick, news_exposure, support_share, ActionThresholds, CitizenAction,
    CitizenState, MediaOutlet, Motive, MotiveProfile, NewsPool, Sign, SocialNetwork, SupportShare, Valence,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitizenActionCounts {
    pub inquire: u32,
    pub signal_positive: u32,
    pub signal_negative: u32,
    pub no_action: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSummary {
    pub proposal_id: ProposalId,
    pub outcome: ProposalStage,
}

/// One record per executed tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickMetrics {
    pub tick: u64,
    pub focal: Option<ProposalId>,
    pub stage: Option<ProposalStage>,
    pub residents: usize,
    #[serde(with = "fixed")]
    pub support_share: f64,
    /// C = 2·share − 1.
    #[serde(with = "fixed")]
    pub citizen_signal: f64,
    /// M.
    #[serde(with = "fixed")]
    pub media_sentiment: f64,
    /// L for the focal proposal's current deliberation window.
    #[serde(with = "fixed")]
    pub lobby_pressure: f64,
    #[serde(with = "fixed")]
    pub mean_dissonance: f64,
    pub citizen_actions: CitizenActionCounts,
    pub advocacy_actions: BTreeMap<ActionKind, u32>,
    pub alliances: usize,
    #[serde(with = "fixed")]
    pub mean_credibility: f64,
    pub news_pool: usize,
    pub news_created: usize,
    pub news_expired: usize,
    pub decisions: Vec<DecisionSummary>,
}

#[derive(Debug, Clone)]
struct Developer {
    id: AgentId,
    profile: DeveloperProfile,
}

#[derive(Debug, Clone, Copy)]
struct PendingProtest {
    activist: AgentId,
    shift: f64,
    reach: f64,
}

/// A single seeded run of a scenario.
#[derive(Debug, Clone)]
pub struct Simulation {
    scenario: Scenario,
    seed: u64,
    rngs: RngStreams,
    org: Organization,
    society: EnvId,
    citizens: Vec<CitizenState>,
    baselines: Vec<[f64; 3]>,
    network: SocialNetwork,
    outlets: Vec<MediaOutlet>,
    pool: NewsPool,
    developers: Vec<Developer>,
    planners: Vec<AgentId>,
    council: Council,
    advocacy: Advocacy,
    proposals: Vec<Proposal>,
    repository: PublicPlansRepository,
    lobby: BTreeMap<ProposalId, f64>,
    focal: Option<ProposalId>,
    support: SupportShare,
    media_sentiment: f64,
    pending_protests: Vec<PendingProtest>,
    decisions: Vec<(u64, DecisionRecord)>,
    metrics: Vec<TickMetrics>,
    tick: u64,
    finished: bool,
    shuffle_key: Option<u64>,
}

impl Simulation {
    /// Builds the population, the organisation and every agent.
    pub fn new(scenario: &Scenario, seed: u64) -> Result<Simulation, ScenarioError> {
        let config = &scenario.config;
        let rngs = RngStreams::new(seed);
        let pop = synthesize_population(config, &rngs)?;
        let mut org = Organization::new();
        let society = org.add_environment(EnvironmentKind::Society, "society")?;
        let municipality = org.add_environment(EnvironmentKind::Municipality, "municipality")?;
        for c in &pop.citizens {
            let id = org.register_agent("resident")?;
            debug_assert_eq!(id, c.id);
            org.join(id, society, &[RoleKind::Resident])?;
        }
        let mut outlets = Vec::new();
        for _ in 0..config.media.outlets {
            let id = org.register_agent("media")?;
            org.join(id, society, &[RoleKind::Broadcaster])?;
            outlets.push(MediaOutlet::new(id));
        }
        let mut developers = Vec::new();
        for profile in &config.developers {
            let id = org.register_agent("developer")?;
            org.join(id, society, &[RoleKind::ProposalDeveloper])?;
            developers.push(Developer { id, profile: profile.clone() });
        }
        let mut planners = Vec::new();
        for _ in 0..config.planners {
            let id = org.register_agent("planner")?;
            org.join(id, municipality, &[RoleKind::UrbanPlanner])?;
            planners.push(id);
        }
        let weights = ChannelWeights::new(config.council.weights)?;
        let mut parties = Vec::new();
        let mut politicians = Vec::new();
        let mut council_rng = rngs.stream(Stream::Council);
        for (k, pc) in config.parties.iter().enumerate() {
            let party = Party {
                id: PartyId(k as u32),
                name: pc.name.clone(),
                position: pc.position,
                trust: pc.trust,
                seats: pc.seats,
            };
            for _ in 0..pc.seats {
                let id = org.register_agent("politician")?;
                org.join(id, society, &[RoleKind::Representative])?;
                let sd = config.council.personal_stance_sd;
                let stance = if sd > 0.0 {
                    rand_distr::Normal::new(pc.position, sd)
                        .map(|d| rand_distr::Distribution::sample(&d, &mut council_rng))
                        .unwrap_or(pc.position)
                } else {
                    pc.position
                };
                politicians.push(PoliticianState { id, party: party.id, personal_stance: clamp_unit(stance), weights });
            }
            parties.push(party);
        }
        let council = Council::new(parties, politicians, config.council.personal_blend)?;
        let mut activists = Vec::new();
        for (k, ec) in config.engos.iter().enumerate() {
            let name = if ec.name.is_empty() { format!("engo-{k}") } else { ec.name.clone() };
            let engo = org.add_environment(EnvironmentKind::Engo, &name)?;
            for ac in &ec.activists {
                let id = org.register_agent("activist")?;
                org.join(id, engo, &[RoleKind::Activist, RoleKind::MemberOfENGO])?;
                org.join(id, society, &[RoleKind::ProposalReviewer])?;
                activists.push(ActivistState {
                    id,
                    engo,
                    resources: ac.resources,
                    experience: ac.experience,
                    orientation: ac.orientation,
                    credibility: 1.0,
                    valence: ac.valence,
                    alliance: None,
                });
            }
        }
        org.seal();
        let support = support_share(pop.citizens.iter().map(|c| c.evaluation.stance))?;
        let finished = config.proposals.count == 0 || config.ticks == 0;
        Ok(Simulation {
            scenario: scenario.clone(),
            seed,
            rngs,
            org,
            society,
            citizens: pop.citizens,
            baselines: pop.baselines,
            network: pop.network,
            outlets,
            pool: NewsPool::new(),
            developers,
            planners,
            council,
            advocacy: Advocacy::new(activists, config.advocacy),
            proposals: Vec::new(),
            repository: PublicPlansRepository::new(),
            lobby: BTreeMap::new(),
            focal: None,
            support,
            media_sentiment: 0.0,
            pending_protests: Vec::new(),
            decisions: Vec::new(),
            metrics: Vec::new(),
            tick: 0,
            finished,
            shuffle_key: None,
        })
    }

    /// Processes agents inside each phase in a shuffled order derived from
    /// `key`. Outputs must not change; this exists to test that they don't.
    pub fn with_shuffled_processing(mut self, key: u64) -> Self {
        self.shuffle_key = Some(key);
        self
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn citizens(&self) -> &[CitizenState] {
        &self.citizens
    }

    pub fn network(&self) -> &SocialNetwork {
        &self.network
    }

    pub fn advocacy(&self) -> &Advocacy {
        &self.advocacy
    }

    pub fn organization(&self) -> &Organization {
        &self.org
    }

    pub fn proposals(&self) -> &[Proposal] {
        &self.proposals
    }

    pub fn repository(&self) -> &PublicPlansRepository {
        &self.repository
    }

    pub fn council(&self) -> &Council {
        &self.council
    }

    pub fn news(&self) -> &NewsPool {
        &self.pool
    }

    pub fn metrics(&self) -> &[TickMetrics] {
        &self.metrics
    }

    /// Council decisions with the tick they were taken at.
    pub fn decisions(&self) -> &[(u64, DecisionRecord)] {
        &self.decisions
    }

    pub fn support(&self) -> SupportShare {
        self.support
    }

    fn order(&self, n: usize, salt: u64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        if let Some(key) = self.shuffle_key {
            let mut rng = SimRng::seed_from_u64(key ^ self.tick.wrapping_mul(0x9e37_79b9) ^ salt);
            idx.shuffle(&mut rng);
        }
        idx
    }

    fn proposal_index(&self, id: ProposalId) -> Option<usize> {
        self.proposals.iter().position(|p| p.id == id)
    }

    fn focal_stage(&self) -> Option<ProposalStage> {
        self.focal.and_then(|f| self.proposal_index(f)).map(|i| self.proposals[i].stage)
    }

    /// Runs one tick. Does nothing once the run is finished.
    pub fn step(&mut self) -> Result<(), ScenarioError> {
        if self.finished {
            return Ok(());
        }
        let t = self.tick;
        let deliveries = self.org.advance(t, Phase::Media);
        self.deliver(deliveries);
        let (news_created, news_expired) = self.media_phase(t)?;

        let deliveries = self.org.advance(t, Phase::Advocacy);
        self.deliver(deliveries);
        let advocacy_actions = self.advocacy_phase(t)?;

        let deliveries = self.org.advance(t, Phase::Citizens);
        self.deliver(deliveries);
        self.apply_protests(t);
        let citizen_actions = self.citizens_phase(t)?;

        let deliveries = self.org.advance(t, Phase::Lifecycle);
        self.deliver(deliveries);
        let decisions = self.lifecycle_phase(t)?;

        let n = self.citizens.len() as f64;
        let stage = self.focal_stage();
        let lobby_pressure = match (self.focal, stage) {
            (Some(f), Some(ProposalStage::UnderDeliberation)) => self.lobby.get(&f).copied().unwrap_or(0.0),
            _ => 0.0,
        };
        self.metrics.push(TickMetrics {
            tick: t,
            focal: self.focal,
            stage,
            residents: self.citizens.len(),
            support_share: self.support.share,
            citizen_signal: self.support.signal,
            media_sentiment: self.media_sentiment,
            lobby_pressure,
            mean_dissonance: self.citizens.iter().map(|c| c.evaluation.dissonance).sum::<f64>() / n,
            citizen_actions,
            advocacy_actions,
            alliances: self.advocacy.alliances().len(),
            mean_credibility: self.advocacy.mean_credibility(),
            news_pool: self.pool.len(),
            news_created,
            news_expired,
            decisions,
        });

        self.tick += 1;
        let count = self.scenario.config.proposals.count as usize;
        let all_done = self.proposals.len() == count && self.proposals.iter().all(|p| p.stage.is_terminal());
        if all_done || self.tick >= self.scenario.config.ticks {
            self.finished = true;
        }
        Ok(())
    }

    fn deliver(&mut self, deliveries: Vec<Delivery>) {
        for d in deliveries {
            if d.message.kind != MessageKind::CoproductionRequest {
                continue;
            }
            let valence = match d.message.payload {
                Payload::Scalar(x) => Valence::from_sign(x),
                _ => Valence::Neutral,
            };
            if let Some(o) = self.outlets.iter_mut().find(|o| o.id == d.receiver) {
                o.request(d.message.sender, valence);
            }
        }
    }

    fn media_phase(&mut self, t: u64) -> Result<(usize, usize), ScenarioError> {
        let params = self.scenario.config.media;
        let out = media_tick(&mut self.pool, &mut self.outlets, self.focal, self.support.share, &params, &self.rngs, t);
        for id in &out.created {
            let source = self.pool.items().iter().find(|n| n.id == *id).map(|n| n.source).expect("just created");
            self.org.send(Message::new(
                source,
                Scope::Environment(self.society),
                MessageKind::News,
                Payload::News(id.0),
            ))?;
        }
        self.media_sentiment = out.sentiment;
        Ok((out.created.len(), out.expired))
    }

    /// Changes a participating activist would raise: the first rule-derived
    /// modification whose attribute nobody has raised yet this round.
    fn participation_point(&self) -> Option<Attributes> {
        let p = &self.proposals[self.proposal_index(self.focal?)?];
        if p.stage != ProposalStage::UnderConsultation {
            return None;
        }
        let report = evaluate_ruleset(&self.scenario.rules, &p.attributes).ok()?;
        let raised: Vec<&String> = p.consultation_revisions().flat_map(|r| r.changes.keys()).collect();
        let schema = &self.scenario.config.schema;
        report.mandatory_mods.iter().chain(&report.optional_mods).find_map(|m| {
            if raised.contains(&&m.attribute) {
                return None;
            }
            let value = repair(&m.requirement, p.attributes.get(&m.attribute)?, schema.get(&m.attribute)?)?;
            Some(Attributes::from([(m.attribute.clone(), value)]))
        })
    }

    fn advocacy_phase(&mut self, t: u64) -> Result<BTreeMap<ActionKind, u32>, ScenarioError> {
        let mut counts: BTreeMap<ActionKind, u32> = ActionKind::ALL.iter().map(|k| (*k, 0)).collect();
        self.advocacy.recover_credibility();
        let stage = self.focal_stage();
        let point = self.participation_point();
        let ids: Vec<AgentId> = self.advocacy.activists().map(|a| a.id).collect();
        let params = self.advocacy.params;
        let mut choices: Vec<(AgentId, ActionKind)> = Vec::new();
        for i in self.order(ids.len(), 1) {
            let a = self.advocacy.activist(ids[i]).expect("listed");
            let ctx = ChoiceContext {
                stage,
                support_share: self.support.share,
                has_partner: self.advocacy.partner_for(a.id).is_some(),
                spendable: self.advocacy.spendable(a.id),
                can_participate: point.is_some(),
            };
            let mut rng = self.rngs.keyed(Stream::Advocacy, t, a.id.0 as u64);
            if let Some(action) = crate::advocacy::choose_action(a, &ctx, &params, &mut rng) {
                choices.push((a.id, action));
            }
        }
        choices.sort_by_key(|c| c.0);
        for (id, action) in choices {
            let world = ActionWorld {
                participation: point.clone(),
                backlash_draw: self.rngs.keyed(Stream::Advocacy, t, (1 << 32) | id.0 as u64).random(),
            };
            let Ok(effect) = self.advocacy.apply_action(id, action, &world, t) else {
                continue;
            };
            *counts.entry(action).or_default() += 1;
            self.route_effect(t, id, effect)?;
        }
        Ok(counts)
    }

    fn route_effect(&mut self, t: u64, id: AgentId, effect: Effect) -> Result<(), ScenarioError> {
        match effect {
            Effect::Lobby(delta) => {
                if let (Some(f), Some(ProposalStage::UnderDeliberation)) = (self.focal, self.focal_stage()) {
                    let l = self.lobby.entry(f).or_insert(0.0);
                    *l = clamp_unit(*l + delta);
                    let targets: Vec<AgentId> = self.council.politicians().iter().map(|p| p.id).collect();
                    for pol in targets {
                        self.org.send(Message::new(
                            id,
                            Scope::Agent(pol),
                            MessageKind::Lobby,
                            Payload::Scalar(delta),
                        ))?;
                    }
                }
            }
            Effect::Participation(changes) => {
                if let Some(i) = self.focal.and_then(|f| self.proposal_index(f)) {
                    let roles = self.org.roles_of(id);
                    let proposal_id = self.proposals[i].id;
                    let rev = Revision {
                        proposal: proposal_id,
                        author: id,
                        origin: RevisionOrigin::PublicConsultation,
                        changes: changes.clone(),
                        tick: t,
                        round: 0,
                    };
                    if self.proposals[i].submit_revision(rev, &roles).is_ok() {
                        self.org.record(EventBody::Revision {
                            proposal_id,
                            author: id,
                            origin: RevisionOrigin::PublicConsultation,
                            changes,
                        });
                    }
                }
            }
            Effect::Coproduction(sign) => {
                if !self.outlets.is_empty() {
                    let outlet = self.outlets[id.0 as usize % self.outlets.len()].id;
                    self.org.send(Message::new(
                        id,
                        Scope::Agent(outlet),
                        MessageKind::CoproductionRequest,
                        Payload::Scalar(sign_value(sign)),
                    ))?;
                }
            }
            Effect::Protest { shift, reach, .. } => {
                self.pending_protests.push(PendingProtest { activist: id, shift, reach });
            }
            Effect::AllianceFormed(k) => {
                let a = &self.advocacy.alliances()[k as usize];
                let body = EventBody::AllianceFormed {
                    alliance: a.id,
                    members: a.members.clone(),
                    pooled_resources: a.pooled_resources,
                };
                self.org.record(body);
            }
        }
        Ok(())
    }

    /// Protests from the advocacy phase land on citizens at the boundary.
    fn apply_protests(&mut self, t: u64) {
        for p in std::mem::take(&mut self.pending_protests) {
            let mut rng = self.rngs.keyed(Stream::Advocacy, t, (2 << 32) | p.activist.0 as u64);
            for c in self.citizens.iter_mut() {
                if rng.random_bool(p.reach.clamp(0.0, 1.0)) {
                    let mut profile = c.profile;
                    profile.shift_satisfaction(Motive::Experiential, p.shift);
                    c.set_profile(profile);
                }
            }
        }
    }

    fn citizens_phase(&mut self, t: u64) -> Result<CitizenActionCounts, ScenarioError> {
        let mut counts = CitizenActionCounts::default();
        let Some(focal) = self.focal else {
            counts.no_action = self.citizens.len() as u32;
            return Ok(counts);
        };
        let cfg = &self.scenario.config.citizens;
        let th = ActionThresholds { inquire: cfg.inquire_threshold, signal: cfg.signal_threshold };
        let rate = cfg.influence_rate;
        let decay = self.scenario.config.media.decay;
        let stances: Vec<f64> = self.citizens.iter().map(|c| c.evaluation.stance).collect();
        let mut updates: Vec<Option<MotiveProfile>> = vec![None; self.citizens.len()];
        for i in self.order(self.citizens.len(), 2) {
            let c = &self.citizens[i];
            match decide_action(c.evaluation, th) {
                CitizenAction::Inquire => {
                    counts.inquire += 1;
                    let neighbours: Vec<f64> =
                        self.network.neighbours(i).iter().map(|&j| stances[j as usize]).collect();
                    let mut rng = self.rngs.keyed(Stream::Citizens, t, c.id.0 as u64);
                    let news = news_exposure(&self.pool, focal, decay, &mut rng);
                    updates[i] = Some(inquire_update(&c.profile, &neighbours, news, rate));
                }
                CitizenAction::Signal(Sign::Positive) => counts.signal_positive += 1,
                CitizenAction::Signal(Sign::Negative) => counts.signal_negative += 1,
                CitizenAction::NoAction => counts.no_action += 1,
            }
        }
        for (c, u) in self.citizens.iter_mut().zip(updates) {
            if let Some(p) = u {
                c.set_profile(p);
            }
        }
        self.support = support_share(self.citizens.iter().map(|c| c.evaluation.stance))?;
        Ok(counts)
    }

    fn transition(&mut self, i: usize, event: LifecycleEvent, t: u64) -> Result<Transition, ScenarioError> {
        let max = self.scenario.config.lifecycle.max_revision_rounds;
        let tr = self.proposals[i].transition(event, t, max)?;
        self.repository.publish(&self.proposals[i]);
        self.org.record(EventBody::Transition {
            proposal_id: self.proposals[i].id,
            from: tr.from,
            to: tr.to,
            event: tr.event,
        });
        Ok(tr)
    }

    fn lifecycle_phase(&mut self, t: u64) -> Result<Vec<DecisionSummary>, ScenarioError> {
        let lc = self.scenario.config.lifecycle.clone();
        let mut decided = Vec::new();
        for i in 0..self.proposals.len() {
            let p = &self.proposals[i];
            let elapsed = t - p.stage_entered();
            let pid = p.id;
            match p.stage {
                ProposalStage::UnderConsultation if elapsed >= lc.consultation => {
                    self.transition(i, LifecycleEvent::ConsultationClosed, t)?;
                }
                ProposalStage::UnderAssessment if elapsed >= lc.assessment => {
                    let planner = self.planners[pid.0 as usize % self.planners.len()];
                    let a = assess(planner, &self.proposals[i], &self.scenario.rules, t)?;
                    self.org.record(EventBody::AssessmentStored {
                        proposal_id: pid,
                        planner,
                        compliance_score: a.compliance_score,
                        mandatory_mods: a.mandatory_mods.len(),
                        optional_mods: a.optional_mods.len(),
                        reject_trigger: a.reject_trigger,
                    });
                    self.repository.store_assessment(a)?;
                    self.transition(i, LifecycleEvent::AssessmentAttached, t)?;
                    self.lobby.insert(pid, 0.0);
                }
                ProposalStage::UnderDeliberation if elapsed >= lc.deliberation => {
                    let a = self.repository.latest_for(pid).expect("assessed before deliberation");
                    let is_focal = self.focal == Some(pid);
                    let shared = SharedSignals {
                        assessment: a.signal(),
                        citizens: if is_focal { self.support.signal } else { 0.0 },
                        media: if is_focal { self.media_sentiment } else { 0.0 },
                        lobby: self.lobby.get(&pid).copied().unwrap_or(0.0),
                        reject_trigger: a.reject_trigger,
                    };
                    let record = self.council.decide(pid, &shared, self.scenario.config.council.thresholds);
                    let outcome = record.outcome;
                    self.org.record(EventBody::Decision(record.clone()));
                    self.decisions.push((t, record));
                    let tr = self.transition(i, LifecycleEvent::CouncilVote(outcome), t)?;
                    decided.push(DecisionSummary { proposal_id: pid, outcome: tr.to });
                }
                ProposalStage::Decided(DecisionOutcome::SentForRevision) if elapsed >= lc.rework => {
                    self.apply_rework(i, t)?;
                }
                _ => {}
            }
        }
        self.create_proposals(t)?;
        self.refresh_focal(t);
        Ok(decided)
    }

    fn developer_for(&self, p: &Proposal) -> &Developer {
        self.developers.iter().find(|d| d.id == p.developer).expect("proposal developer exists")
    }

    fn apply_rework(&mut self, i: usize, t: u64) -> Result<(), ScenarioError> {
        let pid = self.proposals[i].id;
        let dev = self.developer_for(&self.proposals[i]).clone();
        let changes = match self.repository.latest_for(pid) {
            Some(a) => {
                let mut rng = self.rngs.keyed(Stream::Developer, t, pid.0 as u64);
                rework(&self.proposals[i], a, &dev.profile, &self.scenario.config.schema, &mut rng)
            }
            None => Attributes::new(),
        };
        if !changes.is_empty() {
            let roles = self.org.roles_of(dev.id);
            let rev = Revision {
                proposal: pid,
                author: dev.id,
                origin: RevisionOrigin::DeveloperRework,
                changes: changes.clone(),
                tick: t,
                round: 0,
            };
            self.proposals[i].submit_revision(rev, &roles)?;
            self.org.record(EventBody::Revision {
                proposal_id: pid,
                author: dev.id,
                origin: RevisionOrigin::DeveloperRework,
                changes,
            });
        }
        self.transition(i, LifecycleEvent::ReworkApplied, t)?;
        Ok(())
    }

    fn create_proposals(&mut self, t: u64) -> Result<(), ScenarioError> {
        let cfg = &self.scenario.config.proposals;
        let count = cfg.count as usize;
        let live = self.proposals.iter().any(|p| !p.stage.is_terminal());
        let batch = if cfg.concurrent {
            count - self.proposals.len()
        } else if live {
            0
        } else {
            1
        };
        for _ in 0..batch.min(count - self.proposals.len()) {
            let pid = ProposalId(self.proposals.len() as u32);
            let dev = self.developers[pid.0 as usize % self.developers.len()].clone();
            let mut rng = self.rngs.keyed(Stream::Developer, t, (1 << 32) | pid.0 as u64);
            let p = generate_proposal(pid, dev.id, &dev.profile, &self.scenario.config.schema, t, &mut rng)?;
            self.org.record(EventBody::ProposalCreated {
                proposal_id: pid,
                developer: dev.id,
                attributes: p.attributes.clone(),
            });
            self.proposals.push(p);
            self.transition(self.proposals.len() - 1, LifecycleEvent::Submission, t)?;
        }
        Ok(())
    }

    /// Picks the focal proposal (lowest-id public one). A new focal proposal
    /// resets every resident to their baseline; whenever the focal proposal
    /// enters consultation the values motive is re-anchored on how well it
    /// complies with the rules.
    fn refresh_focal(&mut self, t: u64) {
        let next = self.proposals.iter().find(|p| p.stage.is_public()).map(|p| p.id);
        let changed = next != self.focal;
        self.focal = next;
        if changed {
            self.pool.retain_proposal(next);
        }
        let Some(i) = next.and_then(|f| self.proposal_index(f)) else {
            return;
        };
        let p = &self.proposals[i];
        let entered_consultation = p.stage == ProposalStage::UnderConsultation && p.stage_entered() == t;
        if !changed && !entered_consultation {
            return;
        }
        let compliance =
            evaluate_ruleset(&self.scenario.rules, &p.attributes).map(|r| r.compliance_score).unwrap_or(0.5);
        let values_shift = self.scenario.config.population.compliance_values_weight * (2.0 * compliance - 1.0);
        for (c, base) in self.citizens.iter_mut().zip(&self.baselines) {
            let mut profile = c.profile;
            if changed {
                profile.set_satisfaction(Motive::Experiential, base[0]);
                profile.set_satisfaction(Motive::Social, base[1]);
            }
            profile.set_satisfaction(Motive::Values, base[2] + values_shift);
            c.set_profile(profile);
        }
        if let Ok(s) = support_share(self.citizens.iter().map(|c| c.evaluation.stance)) {
            self.support = s;
        }
    }

    /// Runs until every proposal is final or the tick budget is spent.
    pub fn run(mut self) -> Result<RunOutput, ScenarioError> {
        while !self.finished {
            self.step()?;
        }
        Ok(self.into_output())
    }

    pub fn into_output(self) -> RunOutput {
        let budget_exhausted = self.proposals.len() < self.scenario.config.proposals.count as usize
            || self.proposals.iter().any(|p| !p.stage.is_terminal());
        let proposals = self
            .proposals
            .iter()
            .map(|p| {
                let decided_tick = p.decided_tick();
                ProposalResult {
                    proposal_id: p.id,
                    outcome: p.stage,
                    decided: p.stage.is_terminal(),
                    created_tick: p.created_tick,
                    decided_tick,
                    ticks_to_decision: decided_tick.map(|d| d - p.created_tick),
                    revision_rounds: p.revision_round,
                    assessments: self
                        .repository
                        .query(&crate::lifecycle::RepositoryFilter { proposal: Some(p.id), stage: None })
                        .len(),
                }
            })
            .collect();
        let result = RunResult {
            schema_version: SCHEMA_VERSION,
            seed: self.seed,
            config_hash: self.scenario.hash.clone(),
            ticks_executed: self.metrics.len() as u64,
            budget_exhausted,
            proposals,
            final_support_share: self.metrics.last().map_or(self.support.share, |m| m.support_share),
            metrics_file: METRICS_FILE.to_string(),
            events_file: EVENTS_FILE.to_string(),
        };
        RunOutput { result, metrics: self.metrics, events: self.org.into_log(), decisions: self.decisions }
    }
}

/// Builds and runs a scenario with the given seed.
pub fn run(scenario: &Scenario, seed: u64) -> Result<RunOutput, ScenarioError> {
    Simulation::new(scenario, seed)?.run()
}

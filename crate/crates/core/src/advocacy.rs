//! Activists and eNGO alliances.
//!
//! Each tick an activist picks at most one action from a stage-gated
//! preference table, pays for it from its own budget (or its alliance's
//! pool) and produces an [`Effect`] the engine routes to lobby pressure,
//! citizens, the consultation, or the media.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{AgentId, EnvId};
use crate::lifecycle::{Attributes, ProposalStage};
use crate::society::Sign;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Collaborative,
    Confrontational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    DirectLobbying,
    FormalParticipation,
    AwarenessCampaign,
    ProtestStandard,
    ProtestDisruptive,
    FormAlliance,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::DirectLobbying,
        ActionKind::FormalParticipation,
        ActionKind::AwarenessCampaign,
        ActionKind::ProtestStandard,
        ActionKind::ProtestDisruptive,
        ActionKind::FormAlliance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::DirectLobbying => "direct_lobbying",
            ActionKind::FormalParticipation => "formal_participation",
            ActionKind::AwarenessCampaign => "awareness_campaign",
            ActionKind::ProtestStandard => "protest_standard",
            ActionKind::ProtestDisruptive => "protest_disruptive",
            ActionKind::FormAlliance => "form_alliance",
        }
    }
}

/// Budget units per action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostTable {
    pub lobby: u32,
    pub participation: u32,
    pub campaign: u32,
    pub protest_standard: u32,
    pub protest_disruptive: u32,
    pub alliance: u32,
}

impl Default for CostTable {
    fn default() -> Self {
        Self { lobby: 3, participation: 1, campaign: 2, protest_standard: 2, protest_disruptive: 4, alliance: 0 }
    }
}

impl CostTable {
    pub fn cost(&self, action: ActionKind) -> u32 {
        match action {
            ActionKind::DirectLobbying => self.lobby,
            ActionKind::FormalParticipation => self.participation,
            ActionKind::AwarenessCampaign => self.campaign,
            ActionKind::ProtestStandard => self.protest_standard,
            ActionKind::ProtestDisruptive => self.protest_disruptive,
            ActionKind::FormAlliance => self.alliance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdvocacyParams {
    /// κ_L: lobby pressure per budget unit.
    pub lobby_gain: f64,
    /// η: experience multiplier on lobbying.
    pub experience_gain: f64,
    /// ξ: experience gained per action.
    pub experience_step: f64,
    /// δ: experiential-satisfaction shift from a standard protest.
    pub protest_shift: f64,
    /// reach_p: chance a citizen is exposed to a standard protest.
    pub protest_reach: f64,
    /// p_esc: chance a confrontational activist escalates.
    pub escalation: f64,
    /// p_b: chance a disruptive protest backfires.
    pub backlash: f64,
    /// γ: credibility factor after a backlash.
    pub backlash_credibility: f64,
    /// ρ: credibility recovered per tick.
    pub recovery: f64,
    /// σ: effect multiplier for pooled actions.
    pub synergy: f64,
    /// Activists below this budget look for an alliance partner.
    pub alliance_threshold: u32,
    pub costs: CostTable,
}

impl Default for AdvocacyParams {
    fn default() -> Self {
        Self {
            lobby_gain: 0.1,
            experience_gain: 0.1,
            experience_step: 1.0,
            protest_shift: 0.15,
            protest_reach: 0.2,
            escalation: 0.3,
            backlash: 0.25,
            backlash_credibility: 0.7,
            recovery: 0.02,
            synergy: 1.5,
            alliance_threshold: 6,
            costs: CostTable::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivistState {
    pub id: AgentId,
    pub engo: EnvId,
    /// Own budget; zero once contributed to an alliance pool.
    pub resources: u32,
    pub experience: f64,
    pub orientation: Orientation,
    pub credibility: f64,
    /// Stance toward the focal proposal.
    pub valence: Sign,
    pub alliance: Option<u32>,
}

pub fn sign_value(s: Sign) -> f64 {
    match s {
        Sign::Positive => 1.0,
        Sign::Negative => -1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alliance {
    pub id: u32,
    pub engo: EnvId,
    pub members: Vec<AgentId>,
    pub pooled_resources: u32,
    pub contributed: u32,
    pub synergy: f64,
}

/// What an activist can see when choosing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceContext {
    /// Stage of the focal proposal, if any.
    pub stage: Option<ProposalStage>,
    pub support_share: f64,
    /// An unallied same-eNGO, same-valence partner exists.
    pub has_partner: bool,
    /// Budget available: own resources, or the pool when allied.
    pub spendable: u32,
    /// The consultation has an open point this activist could raise.
    pub can_participate: bool,
}

/// Stage-gated preference table.
///
/// Exactly one uniform draw is taken on every call, so replays consume the
/// stream identically whatever branch is taken.
pub fn choose_action<R: Rng>(
    state: &ActivistState,
    ctx: &ChoiceContext,
    params: &AdvocacyParams,
    rng: &mut R,
) -> Option<ActionKind> {
    let draw: f64 = rng.random();
    if state.alliance.is_none() && state.resources < params.alliance_threshold && ctx.has_partner {
        return Some(ActionKind::FormAlliance);
    }
    let stage = ctx.stage?;
    let opposed = match state.valence {
        Sign::Positive => ctx.support_share < 0.5,
        Sign::Negative => ctx.support_share > 0.5,
    };
    let preferred = match (state.orientation, stage) {
        (_, ProposalStage::Draft) => return None,
        (_, s) if s.is_terminal() => return None,
        (Orientation::Collaborative, ProposalStage::UnderConsultation) if ctx.can_participate => {
            ActionKind::FormalParticipation
        }
        (Orientation::Collaborative, ProposalStage::UnderDeliberation) => ActionKind::DirectLobbying,
        (Orientation::Collaborative, _) => ActionKind::AwarenessCampaign,
        (Orientation::Confrontational, ProposalStage::UnderDeliberation) => {
            if opposed && draw < params.escalation {
                ActionKind::ProtestDisruptive
            } else {
                ActionKind::ProtestStandard
            }
        }
        (Orientation::Confrontational, _) => ActionKind::AwarenessCampaign,
    };
    let affordable = |a: ActionKind| params.costs.cost(a) <= ctx.spendable;
    if affordable(preferred) {
        Some(preferred)
    } else if preferred == ActionKind::ProtestDisruptive && affordable(ActionKind::ProtestStandard) {
        Some(ActionKind::ProtestStandard)
    } else {
        None
    }
}

/// ΔL = clamp(σ · κ_L · spend · (1 + η · experience) · credibility, 0, 1) · valence.
pub fn lobby_delta(
    spend: u32,
    experience: f64,
    credibility: f64,
    synergy: f64,
    valence: Sign,
    params: &AdvocacyParams,
) -> f64 {
    let raw = synergy * params.lobby_gain * spend as f64 * (1.0 + params.experience_gain * experience) * credibility;
    raw.clamp(0.0, 1.0) * sign_value(valence)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Lobby(f64),
    /// Attribute changes raised in the public consultation.
    Participation(Attributes),
    /// Ask a media outlet to co-produce an item with this valence.
    Coproduction(Sign),
    /// Each citizen is exposed with probability `reach` and shifts
    /// experiential satisfaction by `shift`.
    Protest {
        shift: f64,
        reach: f64,
        backlash: bool,
    },
    AllianceFormed(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdvocacyError {
    #[error("unknown activist {0}")]
    UnknownActivist(AgentId),
    #[error("activists {0} and {1} do not share an eNGO environment")]
    Boundary(AgentId, AgentId),
    #[error("activist {0} is already in an alliance")]
    AlreadyAllied(AgentId),
    #[error("an activist cannot ally with itself")]
    SelfAlliance,
    #[error("activists {0} and {1} hold opposite valences")]
    ValenceMismatch(AgentId, AgentId),
    #[error("{action:?} costs {cost} but only {available} is available")]
    Unaffordable { action: ActionKind, cost: u32, available: u32 },
    #[error("no alliance partner available for {0}")]
    NoPartner(AgentId),
    #[error("formal participation needs a point to raise")]
    NothingToRaise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum Payer {
    Activist(AgentId),
    Alliance(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub tick: u64,
    pub actor: AgentId,
    pub payer: Payer,
    pub action: ActionKind,
    pub cost: u32,
}

/// Inputs to [`Advocacy::apply_action`] that come from outside the eNGOs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActionWorld {
    /// Changes a participating activist would raise.
    pub participation: Option<Attributes>,
    /// Uniform draw in [0, 1) deciding a disruptive protest's backlash.
    pub backlash_draw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advocacy {
    activists: BTreeMap<AgentId, ActivistState>,
    alliances: Vec<Alliance>,
    pub params: AdvocacyParams,
    ledger: Vec<LedgerEntry>,
    initial: BTreeMap<AgentId, u32>,
}

impl Advocacy {
    pub fn new(activists: Vec<ActivistState>, params: AdvocacyParams) -> Self {
        let initial = activists.iter().map(|a| (a.id, a.resources)).collect();
        Self {
            activists: activists.into_iter().map(|a| (a.id, a)).collect(),
            alliances: Vec::new(),
            params,
            ledger: Vec::new(),
            initial,
        }
    }

    pub fn activists(&self) -> impl Iterator<Item = &ActivistState> {
        self.activists.values()
    }

    pub fn activist(&self, id: AgentId) -> Option<&ActivistState> {
        self.activists.get(&id)
    }

    pub fn alliances(&self) -> &[Alliance] {
        &self.alliances
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn len(&self) -> usize {
        self.activists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activists.is_empty()
    }

    /// Budget an activist may spend: its alliance's pool or its own resources.
    pub fn spendable(&self, id: AgentId) -> u32 {
        match self.activists.get(&id) {
            Some(a) => match a.alliance {
                Some(k) => self.alliances[k as usize].pooled_resources,
                None => a.resources,
            },
            None => 0,
        }
    }

    /// Lowest-id unallied activist in the same eNGO with the same valence.
    pub fn partner_for(&self, id: AgentId) -> Option<AgentId> {
        let a = self.activists.get(&id)?;
        self.activists
            .values()
            .find(|b| b.id != id && b.alliance.is_none() && b.engo == a.engo && b.valence == a.valence)
            .map(|b| b.id)
    }

    pub fn form_alliance(&mut self, a: AgentId, b: AgentId) -> Result<u32, AdvocacyError> {
        if a == b {
            return Err(AdvocacyError::SelfAlliance);
        }
        let sa = self.activists.get(&a).ok_or(AdvocacyError::UnknownActivist(a))?;
        let sb = self.activists.get(&b).ok_or(AdvocacyError::UnknownActivist(b))?;
        if sa.engo != sb.engo {
            return Err(AdvocacyError::Boundary(a, b));
        }
        for s in [sa, sb] {
            if s.alliance.is_some() {
                return Err(AdvocacyError::AlreadyAllied(s.id));
            }
        }
        if sa.valence != sb.valence {
            return Err(AdvocacyError::ValenceMismatch(a, b));
        }
        let id = self.alliances.len() as u32;
        let pooled = sa.resources + sb.resources;
        let engo = sa.engo;
        let mut members = vec![a, b];
        members.sort();
        for m in &members {
            let s = self.activists.get_mut(m).expect("checked above");
            s.resources = 0;
            s.alliance = Some(id);
        }
        self.alliances.push(Alliance {
            id,
            engo,
            members,
            pooled_resources: pooled,
            contributed: pooled,
            synergy: self.params.synergy,
        });
        Ok(id)
    }

    /// Pays for and applies one action. An unaffordable action (or one that
    /// cannot be carried out) leaves every piece of state untouched.
    pub fn apply_action(
        &mut self,
        id: AgentId,
        action: ActionKind,
        world: &ActionWorld,
        tick: u64,
    ) -> Result<Effect, AdvocacyError> {
        let state = self.activists.get(&id).ok_or(AdvocacyError::UnknownActivist(id))?.clone();
        let cost = self.params.costs.cost(action);
        let available = self.spendable(id);
        if cost > available {
            return Err(AdvocacyError::Unaffordable { action, cost, available });
        }
        let synergy = if state.alliance.is_some() { self.params.synergy } else { 1.0 };
        let p = self.params;
        let effect = match action {
            ActionKind::FormAlliance => {
                let partner = self.partner_for(id).ok_or(AdvocacyError::NoPartner(id))?;
                if state.alliance.is_some() {
                    return Err(AdvocacyError::AlreadyAllied(id));
                }
                Effect::AllianceFormed(self.form_alliance(id, partner)?)
            }
            ActionKind::DirectLobbying => {
                Effect::Lobby(lobby_delta(cost, state.experience, state.credibility, synergy, state.valence, &p))
            }
            ActionKind::FormalParticipation => {
                let changes =
                    world.participation.clone().filter(|c| !c.is_empty()).ok_or(AdvocacyError::NothingToRaise)?;
                Effect::Participation(changes)
            }
            ActionKind::AwarenessCampaign => Effect::Coproduction(state.valence),
            ActionKind::ProtestStandard => Effect::Protest {
                shift: synergy * p.protest_shift * sign_value(state.valence),
                reach: p.protest_reach,
                backlash: false,
            },
            ActionKind::ProtestDisruptive => {
                let backlash = world.backlash_draw < p.backlash;
                let shift = synergy * 2.0 * p.protest_shift * sign_value(state.valence);
                Effect::Protest {
                    shift: if backlash { -shift } else { shift },
                    reach: (2.0 * p.protest_reach).min(1.0),
                    backlash,
                }
            }
        };
        // An alliance formed just now pays from the fresh pool.
        let payer = match self.activists[&id].alliance {
            Some(k) => {
                self.alliances[k as usize].pooled_resources -= cost;
                Payer::Alliance(k)
            }
            None => {
                self.activists.get_mut(&id).expect("present").resources -= cost;
                Payer::Activist(id)
            }
        };
        self.ledger.push(LedgerEntry { tick, actor: id, payer, action, cost });
        let s = self.activists.get_mut(&id).expect("present");
        s.experience += p.experience_step;
        if let Effect::Protest { backlash: true, .. } = effect {
            s.credibility = (s.credibility * p.backlash_credibility).clamp(0.0, 1.0);
        }
        Ok(effect)
    }

    /// Credibility recovers by ρ toward 1 for every activist.
    pub fn recover_credibility(&mut self) {
        let rho = self.params.recovery;
        for a in self.activists.values_mut() {
            a.credibility = (a.credibility + rho).min(1.0);
        }
    }

    pub fn mean_credibility(&self) -> f64 {
        if self.activists.is_empty() {
            return 1.0;
        }
        self.activists.values().map(|a| a.credibility).sum::<f64>() / self.activists.len() as f64
    }

    /// Checks every budget against the cost ledger: each activist holds its
    /// initial budget minus what it paid (or zero after contributing), and
    /// each pool holds its contributions minus what was paid from it.
    pub fn reconcile(&self) -> Result<(), String> {
        let mut paid: BTreeMap<Payer, u64> = BTreeMap::new();
        for e in &self.ledger {
            if e.cost != self.params.costs.cost(e.action) {
                return Err(format!("ledger entry {e:?} disagrees with the cost table"));
            }
            *paid.entry(e.payer).or_default() += e.cost as u64;
        }
        for a in self.activists.values() {
            let spent = paid.get(&Payer::Activist(a.id)).copied().unwrap_or(0);
            let initial = self.initial[&a.id] as u64;
            let expected_before_pool = initial.checked_sub(spent).ok_or(format!("activist {} overspent", a.id))?;
            let ok = match a.alliance {
                Some(_) => a.resources == 0,
                None => a.resources as u64 == expected_before_pool,
            };
            if !ok {
                return Err(format!(
                    "activist {} holds {} but the ledger implies {}",
                    a.id, a.resources, expected_before_pool
                ));
            }
        }
        for al in &self.alliances {
            let spent = paid.get(&Payer::Alliance(al.id)).copied().unwrap_or(0);
            let contributed: u64 = al
                .members
                .iter()
                .map(|m| self.initial[m] as u64 - paid.get(&Payer::Activist(*m)).copied().unwrap_or(0))
                .sum();
            if contributed != al.contributed as u64 || contributed - spent != al.pooled_resources as u64 {
                return Err(format!("alliance {} pool {} does not reconcile", al.id, al.pooled_resources));
            }
        }
        Ok(())
    }
}

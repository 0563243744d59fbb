//! Agent/group/role kernel.
//!
//! Agents are opaque ids. They join environments (the groups of the
//! organisational model) under one or more roles, and may only exchange
//! messages with agents they share an environment with. Messages sent during
//! one phase are delivered at the next phase boundary, sorted by receiver and
//! then by send order, so delivery never depends on the order in which agents
//! were processed inside a phase.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::{EventBody, EventLog, Phase};
use crate::num::fixed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnvId(pub u32);

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "env#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentKind {
    Society,
    Engo,
    Municipality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RoleKind {
    Broadcaster,
    ProposalDeveloper,
    Representative,
    Resident,
    MemberOfENGO,
    ProposalReviewer,
    Activist,
    UrbanPlanner,
}

impl RoleKind {
    pub const ALL: [RoleKind; 8] = [
        RoleKind::Broadcaster,
        RoleKind::ProposalDeveloper,
        RoleKind::Representative,
        RoleKind::Resident,
        RoleKind::MemberOfENGO,
        RoleKind::ProposalReviewer,
        RoleKind::Activist,
        RoleKind::UrbanPlanner,
    ];

    /// The only environment kind this role may be played in.
    pub fn home(self) -> EnvironmentKind {
        match self {
            RoleKind::Broadcaster
            | RoleKind::ProposalDeveloper
            | RoleKind::Representative
            | RoleKind::Resident
            | RoleKind::ProposalReviewer => EnvironmentKind::Society,
            RoleKind::MemberOfENGO | RoleKind::Activist => EnvironmentKind::Engo,
            RoleKind::UrbanPlanner => EnvironmentKind::Municipality,
        }
    }

    pub fn compatible_with(self, kind: EnvironmentKind) -> bool {
        self.home() == kind
    }

    pub fn name(self) -> &'static str {
        match self {
            RoleKind::Broadcaster => "Broadcaster",
            RoleKind::ProposalDeveloper => "ProposalDeveloper",
            RoleKind::Representative => "Representative",
            RoleKind::Resident => "Resident",
            RoleKind::MemberOfENGO => "MemberOfENGO",
            RoleKind::ProposalReviewer => "ProposalReviewer",
            RoleKind::Activist => "Activist",
            RoleKind::UrbanPlanner => "UrbanPlanner",
        }
    }

    pub fn from_name(name: &str) -> Option<RoleKind> {
        RoleKind::ALL.into_iter().find(|r| r.name() == name)
    }
}

impl fmt::Display for RoleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub type RoleSet = BTreeSet<RoleKind>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Environment {
    pub id: EnvId,
    pub kind: EnvironmentKind,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub agent: AgentId,
    pub environment: EnvId,
    pub roles: RoleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Agent(AgentId),
    Environment(EnvId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    News,
    CoproductionRequest,
    Lobby,
    Notice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    None,
    Scalar(#[serde(with = "fixed")] f64),
    News(u32),
    Proposal(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: AgentId,
    pub scope: Scope,
    pub kind: MessageKind,
    pub payload: Payload,
    /// Stamped by the kernel when the message is sent.
    pub tick: u64,
}

impl Message {
    pub fn new(sender: AgentId, scope: Scope, kind: MessageKind, payload: Payload) -> Self {
        Self { sender, scope, kind, payload, tick: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Receipt {
    pub seq: u64,
    pub receivers: Vec<AgentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub receiver: AgentId,
    pub seq: u64,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("cannot {0} after the organization is sealed")]
    Sealed(&'static str),
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown environment {0}")]
    UnknownEnvironment(EnvId),
    #[error("{agent} must play at least one role in {environment}")]
    EmptyRoles { agent: AgentId, environment: EnvId },
    #[error("role {role} cannot be played in a {kind:?} environment")]
    IncompatibleRole { role: RoleKind, kind: EnvironmentKind },
    #[error("a scenario has exactly one {0:?} environment")]
    DuplicateEnvironment(EnvironmentKind),
    #[error("{sender} shares no environment with the receivers of {scope:?}")]
    BoundaryViolation { sender: AgentId, scope: Scope },
}

#[derive(Debug, Clone)]
struct Pending {
    seq: u64,
    message: Message,
    receivers: Vec<AgentId>,
}

/// Organisational state of one run: agents, environments, memberships, the
/// message buffer and the event log.
#[derive(Debug, Clone, Default)]
pub struct Organization {
    agents: BTreeMap<AgentId, String>,
    environments: Vec<Environment>,
    members: BTreeMap<EnvId, BTreeMap<AgentId, RoleSet>>,
    agent_envs: BTreeMap<AgentId, BTreeSet<EnvId>>,
    pending: Vec<Pending>,
    next_message_seq: u64,
    sealed: bool,
    tick: u64,
    phase: Option<Phase>,
    log: EventLog,
}

impl Organization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn phase(&self) -> Phase {
        self.phase.unwrap_or(Phase::Setup)
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Appends an event stamped with the current tick and phase.
    pub fn record(&mut self, body: EventBody) -> u64 {
        let (tick, phase) = (self.tick, self.phase());
        self.log.append(tick, phase, body)
    }

    pub fn register_agent(&mut self, hint: &str) -> Result<AgentId, KernelError> {
        if self.sealed {
            return Err(KernelError::Sealed("register agents"));
        }
        let id = AgentId(self.agents.len() as u32);
        self.agents.insert(id, hint.to_string());
        self.agent_envs.insert(id, BTreeSet::new());
        self.record(EventBody::AgentRegistered { agent: id, hint: hint.to_string() });
        Ok(id)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn is_registered(&self, agent: AgentId) -> bool {
        self.agents.contains_key(&agent)
    }

    pub fn add_environment(&mut self, kind: EnvironmentKind, name: &str) -> Result<EnvId, KernelError> {
        if self.sealed {
            return Err(KernelError::Sealed("create environments"));
        }
        if kind != EnvironmentKind::Engo && self.environments.iter().any(|e| e.kind == kind) {
            return Err(KernelError::DuplicateEnvironment(kind));
        }
        let id = EnvId(self.environments.len() as u32);
        self.environments.push(Environment { id, kind, name: name.to_string() });
        self.members.insert(id, BTreeMap::new());
        self.record(EventBody::EnvironmentCreated { environment: id, kind, name: name.to_string() });
        Ok(id)
    }

    pub fn environment(&self, id: EnvId) -> Option<&Environment> {
        self.environments.get(id.0 as usize)
    }

    pub fn environments(&self) -> &[Environment] {
        &self.environments
    }

    pub fn environments_of_kind(&self, kind: EnvironmentKind) -> Vec<EnvId> {
        self.environments.iter().filter(|e| e.kind == kind).map(|e| e.id).collect()
    }

    /// Adds `roles` to the agent's membership in `env`. Joining again unions
    /// the role sets; an unchanged membership records no event.
    pub fn join(&mut self, agent: AgentId, env: EnvId, roles: &[RoleKind]) -> Result<Membership, KernelError> {
        if !self.is_registered(agent) {
            return Err(KernelError::UnknownAgent(agent));
        }
        let kind = self.environment(env).ok_or(KernelError::UnknownEnvironment(env))?.kind;
        if roles.is_empty() {
            return Err(KernelError::EmptyRoles { agent, environment: env });
        }
        if let Some(&role) = roles.iter().find(|r| !r.compatible_with(kind)) {
            return Err(KernelError::IncompatibleRole { role, kind });
        }
        let entry = self.members.get_mut(&env).expect("environment table in sync").entry(agent).or_default();
        let before = entry.len();
        entry.extend(roles.iter().copied());
        let changed = entry.len() != before;
        let membership = Membership { agent, environment: env, roles: entry.clone() };
        self.agent_envs.get_mut(&agent).expect("agent table in sync").insert(env);
        if changed {
            self.record(EventBody::Membership {
                agent,
                environment: env,
                roles: membership.roles.iter().copied().collect(),
            });
        }
        Ok(membership)
    }

    pub fn members_of(&self, env: EnvId) -> Result<Vec<(AgentId, RoleSet)>, KernelError> {
        let table = self.members.get(&env).ok_or(KernelError::UnknownEnvironment(env))?;
        Ok(table.iter().map(|(a, r)| (*a, r.clone())).collect())
    }

    pub fn roles_in(&self, agent: AgentId, env: EnvId) -> Option<&RoleSet> {
        self.members.get(&env)?.get(&agent)
    }

    /// Union of the agent's roles over all of its environments.
    pub fn roles_of(&self, agent: AgentId) -> RoleSet {
        self.agent_envs
            .get(&agent)
            .into_iter()
            .flatten()
            .filter_map(|env| self.roles_in(agent, *env))
            .flatten()
            .copied()
            .collect()
    }

    pub fn environments_of(&self, agent: AgentId) -> Vec<EnvId> {
        self.agent_envs.get(&agent).map(|s| s.iter().copied().collect()).unwrap_or_default()
    }

    pub fn shared_environments(&self, a: AgentId, b: AgentId) -> Vec<EnvId> {
        match (self.agent_envs.get(&a), self.agent_envs.get(&b)) {
            (Some(x), Some(y)) => x.intersection(y).copied().collect(),
            _ => Vec::new(),
        }
    }

    /// Queues a message for delivery at the next phase boundary.
    ///
    /// An agent-scoped message needs at least one environment shared by
    /// sender and receiver; an environment-scoped message needs the sender to
    /// be a member and reaches every other member. Violations are logged and
    /// the message is dropped.
    pub fn send(&mut self, mut message: Message) -> Result<Receipt, KernelError> {
        let sender = message.sender;
        if !self.is_registered(sender) {
            return Err(KernelError::UnknownAgent(sender));
        }
        let receivers = match message.scope {
            Scope::Agent(receiver) => {
                if !self.is_registered(receiver) {
                    return Err(KernelError::UnknownAgent(receiver));
                }
                if self.shared_environments(sender, receiver).is_empty() {
                    None
                } else {
                    Some(vec![receiver])
                }
            }
            Scope::Environment(env) => {
                let table = self.members.get(&env).ok_or(KernelError::UnknownEnvironment(env))?;
                if table.contains_key(&sender) {
                    Some(table.keys().copied().filter(|a| *a != sender).collect())
                } else {
                    None
                }
            }
        };
        let Some(receivers) = receivers else {
            self.record(EventBody::BoundaryViolation { sender, scope: message.scope, kind: message.kind });
            return Err(KernelError::BoundaryViolation { sender, scope: message.scope });
        };
        message.tick = self.tick;
        let seq = self.next_message_seq;
        self.next_message_seq += 1;
        self.record(EventBody::Message {
            message_seq: seq,
            sender,
            scope: message.scope,
            kind: message.kind,
            payload: message.payload,
            receivers: receivers.len(),
        });
        self.pending.push(Pending { seq, message, receivers: receivers.clone() });
        Ok(Receipt { seq, receivers })
    }

    pub fn pending_messages(&self) -> usize {
        self.pending.len()
    }

    /// Closes the current phase: every queued message is delivered, then the
    /// clock moves to `(tick, phase)`.
    pub fn advance(&mut self, tick: u64, phase: Phase) -> Vec<Delivery> {
        let mut deliveries: Vec<Delivery> = self
            .pending
            .drain(..)
            .flat_map(|p| {
                p.receivers.into_iter().map(move |receiver| Delivery {
                    receiver,
                    seq: p.seq,
                    message: p.message.clone(),
                })
            })
            .collect();
        deliveries.sort_by_key(|d| (d.receiver, d.seq));
        self.tick = tick;
        self.phase = Some(phase);
        deliveries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn org() -> (Organization, EnvId, EnvId, EnvId) {
        let mut org = Organization::new();
        let society = org.add_environment(EnvironmentKind::Society, "society").unwrap();
        let muni = org.add_environment(EnvironmentKind::Municipality, "municipality").unwrap();
        let engo = org.add_environment(EnvironmentKind::Engo, "engo-1").unwrap();
        (org, society, muni, engo)
    }

    #[test]
    fn registration_yields_distinct_ids() {
        let (mut org, ..) = org();
        let ids: BTreeSet<_> = (0..1000).map(|_| org.register_agent("citizen").unwrap()).collect();
        assert_eq!(ids.len(), 1000);
    }

    #[test]
    fn registration_after_seal_fails() {
        let (mut org, ..) = org();
        org.register_agent("a").unwrap();
        org.seal();
        assert_eq!(org.register_agent("b"), Err(KernelError::Sealed("register agents")));
        assert!(org.add_environment(EnvironmentKind::Engo, "late").is_err());
    }

    #[test]
    fn single_society_and_municipality() {
        let (mut org, ..) = org();
        assert_eq!(
            org.add_environment(EnvironmentKind::Society, "again"),
            Err(KernelError::DuplicateEnvironment(EnvironmentKind::Society))
        );
        assert!(org.add_environment(EnvironmentKind::Engo, "engo-2").is_ok());
    }

    #[test]
    fn join_checks_roles() {
        let (mut org, society, muni, _) = org();
        let a = org.register_agent("a").unwrap();
        let m = org.join(a, society, &[RoleKind::Resident]).unwrap();
        assert_eq!(m.roles.len(), 1);
        assert_eq!(
            org.join(a, muni, &[RoleKind::Activist]),
            Err(KernelError::IncompatibleRole { role: RoleKind::Activist, kind: EnvironmentKind::Municipality })
        );
        assert_eq!(org.join(a, society, &[]), Err(KernelError::EmptyRoles { agent: a, environment: society }));
        let events = org.log().len();
        let again = org.join(a, society, &[RoleKind::Resident]).unwrap();
        assert_eq!(again, m);
        assert_eq!(org.log().len(), events, "idempotent join records nothing");
        let both = org.join(a, society, &[RoleKind::ProposalReviewer]).unwrap();
        assert_eq!(both.roles.len(), 2);
    }

    #[test]
    fn compatibility_table() {
        use EnvironmentKind::*;
        assert!(RoleKind::UrbanPlanner.compatible_with(Municipality));
        assert!(!RoleKind::UrbanPlanner.compatible_with(Society));
        assert!(RoleKind::Activist.compatible_with(Engo));
        assert!(RoleKind::MemberOfENGO.compatible_with(Engo));
        for r in [RoleKind::Broadcaster, RoleKind::Representative, RoleKind::Resident, RoleKind::ProposalReviewer] {
            assert!(r.compatible_with(Society));
        }
        for r in RoleKind::ALL {
            assert_eq!(RoleKind::from_name(r.name()), Some(r));
        }
    }

    #[test]
    fn members_sorted_and_stable() {
        let (mut org, society, _, engo) = org();
        assert!(org.members_of(engo).unwrap().is_empty());
        let ids: Vec<_> = (0..3).map(|_| org.register_agent("x").unwrap()).collect();
        for id in ids.iter().rev() {
            org.join(*id, society, &[RoleKind::Resident]).unwrap();
        }
        let listed = org.members_of(society).unwrap();
        assert_eq!(listed.iter().map(|(a, _)| *a).collect::<Vec<_>>(), ids);
        assert_eq!(listed, org.members_of(society).unwrap());
        assert_eq!(org.members_of(EnvId(99)), Err(KernelError::UnknownEnvironment(EnvId(99))));
    }

    #[test]
    fn messages_respect_boundaries_and_phase_buffering() {
        let (mut org, society, muni, engo) = org();
        let a = org.register_agent("a").unwrap();
        let b = org.register_agent("b").unwrap();
        let c = org.register_agent("c").unwrap();
        let d = org.register_agent("d").unwrap();
        org.join(a, society, &[RoleKind::Resident]).unwrap();
        org.join(b, society, &[RoleKind::Resident]).unwrap();
        org.join(c, engo, &[RoleKind::Activist]).unwrap();
        org.join(d, muni, &[RoleKind::UrbanPlanner]).unwrap();

        let r = org.send(Message::new(a, Scope::Agent(b), MessageKind::Notice, Payload::None)).unwrap();
        assert_eq!(r.receivers, vec![b]);
        assert_eq!(
            org.send(Message::new(c, Scope::Agent(d), MessageKind::Notice, Payload::None)),
            Err(KernelError::BoundaryViolation { sender: c, scope: Scope::Agent(d) })
        );
        assert!(org.send(Message::new(c, Scope::Environment(society), MessageKind::Notice, Payload::None)).is_err());
        let bc = org.send(Message::new(b, Scope::Environment(society), MessageKind::News, Payload::News(0))).unwrap();
        assert_eq!(bc.receivers, vec![a]);

        assert_eq!(org.pending_messages(), 2);
        let delivered = org.advance(1, Phase::Media);
        assert_eq!(delivered.len(), 2);
        assert_eq!(delivered[0].receiver, a);
        assert_eq!(delivered[1].receiver, b);
        assert_eq!(org.pending_messages(), 0);
        assert!(org.advance(1, Phase::Advocacy).is_empty());
    }
}

//! Append-only event log shared by every subsystem, written as JSON Lines.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::governance::DecisionRecord;
use crate::kernel::{AgentId, EnvId, EnvironmentKind, MessageKind, Payload, RoleKind, Scope};
use crate::lifecycle::{Attributes, LifecycleEvent, ProposalId, ProposalStage, RevisionOrigin};
use crate::num::fixed;

/// Phases of a tick, in execution order. `Setup` precedes tick 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Setup,
    Media,
    Advocacy,
    Citizens,
    Lifecycle,
}

impl Phase {
    pub const TICK_ORDER: [Phase; 4] = [Phase::Media, Phase::Advocacy, Phase::Citizens, Phase::Lifecycle];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Phase> {
        [Phase::Setup, Phase::Media, Phase::Advocacy, Phase::Citizens, Phase::Lifecycle].get(i as usize).copied()
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let i = u8::deserialize(d)?;
        Phase::from_index(i).ok_or_else(|| serde::de::Error::custom(format!("unknown phase index {i}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventBody {
    AgentRegistered {
        agent: AgentId,
        hint: String,
    },
    EnvironmentCreated {
        environment: EnvId,
        kind: EnvironmentKind,
        name: String,
    },
    Membership {
        agent: AgentId,
        environment: EnvId,
        roles: Vec<RoleKind>,
    },
    Message {
        message_seq: u64,
        sender: AgentId,
        scope: Scope,
        kind: MessageKind,
        payload: Payload,
        receivers: usize,
    },
    BoundaryViolation {
        sender: AgentId,
        scope: Scope,
        kind: MessageKind,
    },
    ProposalCreated {
        proposal_id: ProposalId,
        developer: AgentId,
        attributes: Attributes,
    },
    Transition {
        proposal_id: ProposalId,
        from: ProposalStage,
        to: ProposalStage,
        event: LifecycleEvent,
    },
    Revision {
        proposal_id: ProposalId,
        author: AgentId,
        origin: RevisionOrigin,
        changes: Attributes,
    },
    AssessmentStored {
        proposal_id: ProposalId,
        planner: AgentId,
        #[serde(with = "fixed")]
        compliance_score: f64,
        mandatory_mods: usize,
        optional_mods: usize,
        reject_trigger: bool,
    },
    AllianceFormed {
        alliance: u32,
        members: Vec<AgentId>,
        pooled_resources: u32,
    },
    Decision(DecisionRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub tick: u64,
    pub phase: Phase,
    #[serde(flatten)]
    pub body: EventBody,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    records: Vec<EventRecord>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, tick: u64, phase: Phase, body: EventBody) -> u64 {
        let seq = self.records.len() as u64;
        self.records.push(EventRecord { seq, tick, phase, body });
        seq
    }

    pub fn records(&self) -> &[EventRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn parse_jsonl(text: &str) -> Result<EventLog, serde_json::Error> {
        let mut records = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            records.push(serde_json::from_str(line)?);
        }
        Ok(EventLog { records })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip_through_jsonl() {
        let mut log = EventLog::new();
        log.append(
            0,
            Phase::Setup,
            EventBody::Membership { agent: AgentId(3), environment: EnvId(0), roles: vec![RoleKind::Resident] },
        );
        log.append(
            4,
            Phase::Media,
            EventBody::Message {
                message_seq: 0,
                sender: AgentId(1),
                scope: Scope::Environment(EnvId(0)),
                kind: MessageKind::Lobby,
                payload: Payload::Scalar(-0.125),
                receivers: 12,
            },
        );
        let bytes = log.to_jsonl();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains(r#""payload":{"scalar":-0.125000}"#), "{text}");
        assert!(text.starts_with(r#"{"seq":0,"tick":0,"phase":0,"type":"membership""#), "{text}");
        let back = EventLog::parse_jsonl(&text).unwrap();
        assert_eq!(back, log);
    }
}

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use civicsim_core::events::{EventBody, Phase};
use civicsim_core::kernel::{KernelError, Message, MessageKind, Payload, Scope};
use civicsim_core::{AgentId, EnvId, EnvironmentKind, Organization, RoleKind};

fn roles_for(kind: EnvironmentKind) -> Vec<RoleKind> {
    RoleKind::ALL.into_iter().filter(|r| r.home() == kind).collect()
}

/// A random organisation plus the membership table the test itself recorded
/// while building it, which serves as the co-membership oracle.
fn random_org(seed: u64) -> (Organization, Vec<AgentId>, Vec<EnvId>, BTreeMap<AgentId, BTreeSet<EnvId>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut org = Organization::new();
    let mut envs = vec![
        org.add_environment(EnvironmentKind::Society, "society").unwrap(),
        org.add_environment(EnvironmentKind::Municipality, "municipality").unwrap(),
    ];
    for k in 0..rng.random_range(0..4) {
        envs.push(org.add_environment(EnvironmentKind::Engo, &format!("engo-{k}")).unwrap());
    }
    let agents: Vec<AgentId> =
        (0..rng.random_range(2..12)).map(|i| org.register_agent(&format!("a{i}")).unwrap()).collect();
    let mut oracle: BTreeMap<AgentId, BTreeSet<EnvId>> = agents.iter().map(|a| (*a, BTreeSet::new())).collect();
    for &a in &agents {
        for &e in &envs {
            if rng.random_bool(0.4) {
                let kind = org.environment(e).unwrap().kind;
                let options = roles_for(kind);
                let role = options[rng.random_range(0..options.len())];
                org.join(a, e, &[role]).unwrap();
                oracle.get_mut(&a).unwrap().insert(e);
            }
        }
    }
    org.seal();
    (org, agents, envs, oracle)
}

/// Sends a batch of random messages and checks each outcome and every
/// delivery against the oracle. Returns the number of violations found.
fn check_config(seed: u64, sends: usize) -> usize {
    let (mut org, agents, envs, oracle) = random_org(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut violations = 0;
    let mut expected: Vec<(AgentId, u64)> = Vec::new();
    for _ in 0..sends {
        let sender = agents[rng.random_range(0..agents.len())];
        let scope = if rng.random_bool(0.5) {
            Scope::Agent(agents[rng.random_range(0..agents.len())])
        } else {
            Scope::Environment(envs[rng.random_range(0..envs.len())])
        };
        let allowed: Option<Vec<AgentId>> = match scope {
            Scope::Agent(r) => (!oracle[&sender].is_disjoint(&oracle[&r])).then(|| vec![r]),
            Scope::Environment(e) => oracle[&sender]
                .contains(&e)
                .then(|| oracle.iter().filter(|(a, es)| **a != sender && es.contains(&e)).map(|(a, _)| *a).collect()),
        };
        let msg = Message::new(sender, scope, MessageKind::Notice, Payload::None);
        match (org.send(msg), allowed) {
            (Ok(receipt), Some(receivers)) => {
                if receipt.receivers != receivers {
                    violations += 1;
                }
                expected.extend(receivers.into_iter().map(|r| (r, receipt.seq)));
            }
            (Err(KernelError::BoundaryViolation { .. }), None) => {}
            _ => violations += 1,
        }
    }
    let deliveries = org.advance(1, Phase::Media);
    expected.sort();
    let got: Vec<(AgentId, u64)> = deliveries.iter().map(|d| (d.receiver, d.seq)).collect();
    if got != expected {
        violations += 1;
    }
    for d in &deliveries {
        if oracle[&d.message.sender].is_disjoint(&oracle[&d.receiver]) {
            violations += 1;
        }
    }
    violations
}

#[test]
fn thousand_random_configurations_match_co_membership() {
    let total: usize = (0..1000).map(|seed| check_config(seed, 40)).sum();
    assert_eq!(total, 0);
}

#[test]
fn rejected_sends_are_logged_and_not_delivered() {
    let mut org = Organization::new();
    let society = org.add_environment(EnvironmentKind::Society, "society").unwrap();
    let engo = org.add_environment(EnvironmentKind::Engo, "engo").unwrap();
    let a = org.register_agent("a").unwrap();
    let b = org.register_agent("b").unwrap();
    org.join(a, society, &[RoleKind::Resident]).unwrap();
    org.join(b, engo, &[RoleKind::Activist]).unwrap();
    let err = org.send(Message::new(a, Scope::Agent(b), MessageKind::Lobby, Payload::Scalar(0.5))).unwrap_err();
    assert!(matches!(err, KernelError::BoundaryViolation { .. }));
    assert!(org.advance(0, Phase::Media).is_empty());
    assert!(org.log().records().iter().any(|r| matches!(r.body, EventBody::BoundaryViolation { .. })));
}

#[test]
fn nothing_is_delivered_before_the_phase_ends() {
    let mut org = Organization::new();
    let society = org.add_environment(EnvironmentKind::Society, "society").unwrap();
    let a = org.register_agent("a").unwrap();
    let b = org.register_agent("b").unwrap();
    org.join(a, society, &[RoleKind::Broadcaster]).unwrap();
    org.join(b, society, &[RoleKind::Resident]).unwrap();
    org.send(Message::new(a, Scope::Environment(society), MessageKind::News, Payload::News(0))).unwrap();
    assert_eq!(org.pending_messages(), 1);
    let d = org.advance(0, Phase::Advocacy);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].receiver, b);
    assert_eq!(org.pending_messages(), 0);
}

proptest! {
    #[test]
    fn random_configurations_have_no_violations(seed in any::<u64>(), sends in 1usize..80) {
        prop_assert_eq!(check_config(seed, sends), 0);
    }

    #[test]
    fn incompatible_roles_never_join(role_idx in 0usize..8, kind_idx in 0usize..3) {
        let kinds = [EnvironmentKind::Society, EnvironmentKind::Engo, EnvironmentKind::Municipality];
        let role = RoleKind::ALL[role_idx];
        let kind = kinds[kind_idx];
        let mut org = Organization::new();
        let env = org.add_environment(kind, "e").unwrap();
        let a = org.register_agent("a").unwrap();
        let joined = org.join(a, env, &[role]).is_ok();
        prop_assert_eq!(joined, role.home() == kind);
    }
}

//! Scenario documents: defaults, validation and the canonical hash.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::advocacy::{AdvocacyParams, Orientation};
use crate::governance::{ChannelWeights, DeveloperProfile, Generator, VoteThresholds};
use crate::lifecycle::{AttrValue, AttributeSchema, AttributeSpec, SCHEMA_VERSION};
use crate::nadico::{parse_rules, Operand, Severity, Statement};
use crate::society::{MediaParams, Sign};

pub const DEFAULT_RULES: &str = include_str!("default_rules.nadico");

/// Every problem found while loading a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scenario:\n  {}", .violations.join("\n  "))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

impl ConfigError {
    pub fn single(msg: impl Into<String>) -> Self {
        Self { violations: vec![msg.into()] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// Tick budget.
    pub ticks: u64,
    pub population: PopulationConfig,
    pub network: NetworkConfig,
    pub citizens: CitizenConfig,
    pub media: MediaParams,
    pub parties: Vec<PartyConfig>,
    pub council: CouncilConfig,
    pub planners: u32,
    pub developers: Vec<DeveloperProfile>,
    pub proposals: ProposalConfig,
    pub schema: AttributeSchema,
    pub rules: RuleSource,
    pub engos: Vec<EngoConfig>,
    pub advocacy: AdvocacyParams,
    pub lifecycle: LifecycleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalParam {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopulationConfig {
    pub size: usize,
    /// Relative weights of income deciles 1..=10.
    pub income_decile_weights: Vec<f64>,
    /// Inclusive age ranges, e.g. `[18, 29]`.
    pub age_bands: Vec<[u32; 2]>,
    pub age_band_weights: Vec<f64>,
    /// Relative weights of education levels 0 (basic), 1, 2 (tertiary).
    pub education_weights: Vec<f64>,
    /// Added to the values baseline per education level above the middle one.
    pub education_values_shift: f64,
    /// Mean importances (experiential, social, values) before normalisation.
    pub importance_mean: [f64; 3],
    /// Each importance is scaled by 1 + jitter·U(−1, 1).
    pub importance_jitter: f64,
    pub experiential: NormalParam,
    pub social: NormalParam,
    pub values: NormalParam,
    /// How strongly the planning rules' verdict colours the values motive.
    pub compliance_values_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub mean_degree: usize,
    pub rewiring: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CitizenConfig {
    /// θ_D.
    pub inquire_threshold: f64,
    /// θ_E.
    pub signal_threshold: f64,
    /// μ.
    pub influence_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PartyConfig {
    pub name: String,
    pub position: f64,
    pub trust: f64,
    pub seats: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CouncilConfig {
    /// (assessment, party, citizens, media, lobby).
    pub weights: [f64; 5],
    /// β.
    pub personal_blend: f64,
    pub personal_stance_sd: f64,
    pub thresholds: VoteThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposalConfig {
    pub count: u32,
    /// Submit every proposal at once instead of one after another.
    pub concurrent: bool,
}

/// Where the rule text comes from; the built-in rules when both are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleSource {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inline: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngoConfig {
    pub name: String,
    pub activists: Vec<ActivistConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ActivistConfig {
    pub orientation: Orientation,
    pub resources: u32,
    pub experience: f64,
    pub valence: Sign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifecycleConfig {
    /// Ticks spent in each stage before it closes.
    pub consultation: u64,
    pub assessment: u64,
    pub deliberation: u64,
    /// Ticks a developer takes to rework a sent-back proposal.
    pub rework: u64,
    /// R_max.
    pub max_revision_rounds: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            ticks: 500,
            population: PopulationConfig::default(),
            network: NetworkConfig::default(),
            citizens: CitizenConfig::default(),
            media: MediaParams::default(),
            parties: vec![
                PartyConfig { name: "Greens".into(), position: 0.6, trust: 0.8, seats: 6 },
                PartyConfig { name: "Social Democrats".into(), position: 0.1, trust: 0.6, seats: 8 },
                PartyConfig { name: "Growth Alliance".into(), position: -0.5, trust: 0.3, seats: 7 },
            ],
            council: CouncilConfig::default(),
            planners: 1,
            developers: vec![default_developer()],
            proposals: ProposalConfig::default(),
            schema: default_schema(),
            rules: RuleSource::default(),
            engos: vec![
                EngoConfig {
                    name: "Green Coalition".into(),
                    activists: vec![
                        ActivistConfig::default(),
                        ActivistConfig::default(),
                        ActivistConfig { orientation: Orientation::Confrontational, ..Default::default() },
                    ],
                },
                EngoConfig {
                    name: "River Action".into(),
                    activists: vec![
                        ActivistConfig { orientation: Orientation::Confrontational, ..Default::default() },
                        ActivistConfig { orientation: Orientation::Confrontational, ..Default::default() },
                        ActivistConfig::default(),
                    ],
                },
            ],
            advocacy: AdvocacyParams::default(),
            lifecycle: LifecycleConfig::default(),
        }
    }
}

impl Default for NormalParam {
    fn default() -> Self {
        Self { mean: 0.0, sd: 0.3 }
    }
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            size: 1000,
            income_decile_weights: vec![1.0; 10],
            age_bands: vec![[18, 29], [30, 44], [45, 64], [65, 80]],
            age_band_weights: vec![0.2, 0.27, 0.33, 0.2],
            education_weights: vec![0.3, 0.45, 0.25],
            education_values_shift: 0.1,
            importance_mean: [1.0, 1.0, 1.0],
            importance_jitter: 0.5,
            experiential: NormalParam { mean: 0.0, sd: 0.3 },
            social: NormalParam { mean: 0.0, sd: 0.3 },
            values: NormalParam { mean: 0.0, sd: 0.3 },
            compliance_values_weight: 0.3,
        }
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { mean_degree: 8, rewiring: 0.1 }
    }
}

impl Default for CitizenConfig {
    fn default() -> Self {
        Self { inquire_threshold: 0.4, signal_threshold: 0.3, influence_rate: 0.25 }
    }
}

impl Default for PartyConfig {
    fn default() -> Self {
        Self { name: String::new(), position: 0.0, trust: 0.5, seats: 1 }
    }
}

impl Default for CouncilConfig {
    fn default() -> Self {
        Self {
            weights: ChannelWeights::default().as_array(),
            personal_blend: 0.3,
            personal_stance_sd: 0.2,
            thresholds: VoteThresholds::default(),
        }
    }
}

impl Default for ProposalConfig {
    fn default() -> Self {
        Self { count: 1, concurrent: false }
    }
}

impl Default for ActivistConfig {
    fn default() -> Self {
        Self { orientation: Orientation::Collaborative, resources: 30, experience: 0.0, valence: Sign::Negative }
    }
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        Self { consultation: 10, assessment: 5, deliberation: 10, rework: 1, max_revision_rounds: 3 }
    }
}

pub fn default_schema() -> AttributeSchema {
    let num = |unit: &str, min: f64, max: f64| AttributeSpec::Numeric { unit: unit.into(), min, max };
    let mut s = AttributeSchema::new();
    s.insert("green_area_loss".into(), num("fraction", 0.0, 1.0));
    s.insert("height".into(), num("m", 3.0, 80.0));
    s.insert("flood_retention".into(), num("fraction", 0.0, 1.0));
    s.insert("permeable_surface".into(), num("fraction", 0.0, 1.0));
    s.insert("housing_units".into(), num("units", 0.0, 2000.0));
    s.insert(
        "zone".into(),
        AttributeSpec::Categorical {
            categories: ["residential", "mixed", "riverside", "industrial"].map(String::from).to_vec(),
        },
    );
    s
}

pub fn default_developer() -> DeveloperProfile {
    let mut g = BTreeMap::new();
    g.insert("green_area_loss".into(), Generator::Uniform { min: 0.05, max: 0.45 });
    g.insert("height".into(), Generator::Normal { mean: 30.0, sd: 12.0 });
    g.insert("flood_retention".into(), Generator::Uniform { min: 0.1, max: 0.6 });
    g.insert("permeable_surface".into(), Generator::Uniform { min: 0.2, max: 0.6 });
    g.insert("housing_units".into(), Generator::Uniform { min: 100.0, max: 1200.0 });
    let weights = [("residential", 0.4), ("mixed", 0.3), ("riverside", 0.2), ("industrial", 0.1)]
        .into_iter()
        .map(|(k, w)| (k.to_string(), w))
        .collect();
    g.insert("zone".into(), Generator::Categorical { weights });
    DeveloperProfile { name: "developer".into(), generators: g, optional_adoption: 0.5 }
}

/// A validated scenario with its rules resolved and parsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub rules_text: String,
    pub rules: Vec<Statement>,
    /// Hex SHA-256 over the canonical resolved config (seed zeroed) and the
    /// rule text.
    pub hash: String,
}

impl Scenario {
    /// Validates an in-memory config; a rule path is resolved against `base_dir`.
    pub fn from_config(config: ScenarioConfig, base_dir: &Path) -> Result<Scenario, ConfigError> {
        let mut v = Vec::new();
        let rules_text = match (&config.rules.path, &config.rules.inline) {
            (Some(_), Some(_)) => {
                v.push("rules: give either `path` or `inline`, not both".to_string());
                String::new()
            }
            (Some(p), None) => match std::fs::read_to_string(base_dir.join(p)) {
                Ok(t) => t,
                Err(e) => {
                    v.push(format!("rules.path: cannot read `{p}`: {e}"));
                    String::new()
                }
            },
            (None, Some(t)) => t.clone(),
            (None, None) => DEFAULT_RULES.to_string(),
        };
        let parsed = parse_rules(&rules_text);
        for d in parsed.diagnostics.iter().filter(|d| d.severity == Severity::Error) {
            v.push(format!("rules line {}:{}: {}", d.line, d.column, d.message));
        }
        let rules = parsed.rules();
        validate(&config, &rules, &mut v);
        if !v.is_empty() {
            return Err(ConfigError { violations: v });
        }
        let hash = config_hash(&config, &rules_text);
        Ok(Scenario { config, rules_text, rules, hash })
    }
}

/// Parses and validates a JSON scenario document.
pub fn load_config(text: &str, base_dir: &Path) -> Result<Scenario, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::single(format!("not valid JSON: {e}")))?;
    config_from_value(value, base_dir)
}

pub fn config_from_value(value: serde_json::Value, base_dir: &Path) -> Result<Scenario, ConfigError> {
    let mut unknown = Vec::new();
    let parsed: Result<ScenarioConfig, _> = {
        let mut note = |path: serde_ignored::Path| unknown.push(path.to_string());
        serde_path_to_error::deserialize(serde_ignored::Deserializer::new(value, &mut note))
    };
    let mut violations: Vec<String> = unknown.into_iter().map(|p| format!("{p}: unknown key")).collect();
    let config = match parsed {
        Ok(c) => c,
        Err(e) => {
            violations.push(format!("{}: {}", e.path(), e.inner()));
            return Err(ConfigError { violations });
        }
    };
    match Scenario::from_config(config, base_dir) {
        Ok(s) if violations.is_empty() => Ok(s),
        Ok(_) => Err(ConfigError { violations }),
        Err(e) => {
            violations.extend(e.violations);
            Err(ConfigError { violations })
        }
    }
}

pub fn config_hash(config: &ScenarioConfig, rules_text: &str) -> String {
    let mut c = config.clone();
    c.seed = 0;
    c.rules = RuleSource::default();
    let canonical =
        serde_json::to_string(&serde_json::to_value(&c).expect("config serialises")).expect("value serialises");
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update([0u8]);
    h.update(rules_text.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn in_range(v: &mut Vec<String>, field: &str, x: f64, lo: f64, hi: f64) {
    if !(x.is_finite() && x >= lo && x <= hi) {
        v.push(format!("{field}: {x} outside [{lo}, {hi}]"));
    }
}

fn weights_ok(v: &mut Vec<String>, field: &str, w: &[f64], len: Option<usize>) {
    if let Some(n) = len {
        if w.len() != n {
            v.push(format!("{field}: expected {n} weights, got {}", w.len()));
            return;
        }
    }
    if w.is_empty() || w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
        v.push(format!("{field}: weights must be non-negative with a positive sum"));
    }
}

fn validate(c: &ScenarioConfig, rules: &[Statement], v: &mut Vec<String>) {
    if c.schema_version != SCHEMA_VERSION {
        v.push(format!("schema_version: unsupported version {} (expected {SCHEMA_VERSION})", c.schema_version));
    }
    let p = &c.population;
    if p.size == 0 {
        v.push("population.size: must be at least 1".into());
    }
    weights_ok(v, "population.income_decile_weights", &p.income_decile_weights, Some(10));
    weights_ok(v, "population.age_band_weights", &p.age_band_weights, Some(p.age_bands.len()));
    for (i, [lo, hi]) in p.age_bands.iter().enumerate() {
        if lo > hi {
            v.push(format!("population.age_bands.{i}: lower bound above upper bound"));
        }
    }
    weights_ok(v, "population.education_weights", &p.education_weights, Some(3));
    weights_ok(v, "population.importance_mean", &p.importance_mean, None);
    in_range(v, "population.importance_jitter", p.importance_jitter, 0.0, 1.0);
    in_range(v, "population.education_values_shift", p.education_values_shift, -1.0, 1.0);
    in_range(v, "population.compliance_values_weight", p.compliance_values_weight, 0.0, 1.0);
    for (name, n) in [("experiential", &p.experiential), ("social", &p.social), ("values", &p.values)] {
        in_range(v, &format!("population.{name}.mean"), n.mean, -1.0, 1.0);
        in_range(v, &format!("population.{name}.sd"), n.sd, 0.0, 10.0);
    }
    let net = &c.network;
    if !net.mean_degree.is_multiple_of(2) || (net.mean_degree > 0 && net.mean_degree >= p.size) {
        v.push(format!("network.mean_degree: {} must be even and below population.size {}", net.mean_degree, p.size));
    }
    in_range(v, "network.rewiring", net.rewiring, 0.0, 1.0);
    in_range(v, "citizens.inquire_threshold", c.citizens.inquire_threshold, 0.0, 1.0);
    in_range(v, "citizens.signal_threshold", c.citizens.signal_threshold, 0.0, 1.0);
    in_range(v, "citizens.influence_rate", c.citizens.influence_rate, 0.0, 1.0);

    let m = &c.media;
    in_range(v, "media.news_probability", m.news_probability, 0.0, 1.0);
    in_range(v, "media.decay", m.decay, 0.0, 1.0);
    in_range(v, "media.expiry_epsilon", m.expiry_epsilon, 0.0, 1.0);
    in_range(v, "media.neutral_probability", m.neutral_probability, 0.0, 1.0);
    for (name, [lo, hi]) in [("impact_range", m.impact_range), ("reach_range", m.reach_range)] {
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 1.0) {
            v.push(format!("media.{name}: [{lo}, {hi}] must be an ordered range inside [0, 1]"));
        }
    }

    if c.parties.is_empty() {
        v.push("parties: at least one party is required".into());
    }
    for (i, party) in c.parties.iter().enumerate() {
        in_range(v, &format!("parties.{i}.position"), party.position, -1.0, 1.0);
        in_range(v, &format!("parties.{i}.trust"), party.trust, 0.0, 1.0);
        if party.seats == 0 {
            v.push(format!("parties.{i}.seats: must be at least 1"));
        }
    }
    if let Err(e) = ChannelWeights::new(c.council.weights) {
        v.push(format!("council.weights: {e}"));
    }
    in_range(v, "council.personal_blend", c.council.personal_blend, 0.0, 1.0);
    in_range(v, "council.personal_stance_sd", c.council.personal_stance_sd, 0.0, 10.0);
    let th = c.council.thresholds;
    in_range(v, "council.thresholds.approve", th.approve, -1.0, 1.0);
    in_range(v, "council.thresholds.reject", th.reject, -1.0, 1.0);
    if th.reject >= th.approve {
        v.push("council.thresholds: reject threshold must lie below the approve threshold".into());
    }
    if c.planners == 0 {
        v.push("planners: at least one planner is required".into());
    }
    if c.proposals.count > 0 && c.developers.is_empty() {
        v.push("developers: proposals are configured but no developer is".into());
    }

    if c.schema.is_empty() {
        v.push("schema: at least one attribute is required".into());
    }
    for (name, spec) in &c.schema {
        match spec {
            AttributeSpec::Numeric { min, max, .. } => {
                if !(min.is_finite() && max.is_finite() && min <= max) {
                    v.push(format!("schema.{name}: numeric domain [{min}, {max}] is not an ordered range"));
                }
            }
            AttributeSpec::Categorical { categories } => {
                if categories.is_empty() {
                    v.push(format!("schema.{name}: categorical attribute without categories"));
                }
            }
        }
    }
    for (i, d) in c.developers.iter().enumerate() {
        if let Err(e) = d.check(&c.schema) {
            v.push(format!("developers.{i}: {e}"));
        }
    }
    for (i, s) in rules.iter().enumerate() {
        check_rule_against_schema(v, i, s, &c.schema);
    }

    in_range(v, "advocacy.lobby_gain", c.advocacy.lobby_gain, 0.0, 10.0);
    in_range(v, "advocacy.experience_gain", c.advocacy.experience_gain, 0.0, 10.0);
    in_range(v, "advocacy.experience_step", c.advocacy.experience_step, 0.0, 100.0);
    in_range(v, "advocacy.protest_shift", c.advocacy.protest_shift, 0.0, 1.0);
    in_range(v, "advocacy.protest_reach", c.advocacy.protest_reach, 0.0, 1.0);
    in_range(v, "advocacy.escalation", c.advocacy.escalation, 0.0, 1.0);
    in_range(v, "advocacy.backlash", c.advocacy.backlash, 0.0, 1.0);
    in_range(v, "advocacy.backlash_credibility", c.advocacy.backlash_credibility, 0.0, 1.0);
    in_range(v, "advocacy.recovery", c.advocacy.recovery, 0.0, 1.0);
    in_range(v, "advocacy.synergy", c.advocacy.synergy, 1.0, 100.0);
    for (i, e) in c.engos.iter().enumerate() {
        for (j, a) in e.activists.iter().enumerate() {
            in_range(v, &format!("engos.{i}.activists.{j}.experience"), a.experience, 0.0, 1e6);
        }
    }

    let l = &c.lifecycle;
    for (name, d) in [
        ("consultation", l.consultation),
        ("assessment", l.assessment),
        ("deliberation", l.deliberation),
        ("rework", l.rework),
    ] {
        if d == 0 {
            v.push(format!("lifecycle.{name}: stage duration must be at least 1 tick"));
        }
    }
}

fn check_rule_against_schema(v: &mut Vec<String>, index: usize, s: &Statement, schema: &AttributeSchema) {
    for p in std::iter::once(&s.aim).chain(&s.conditions) {
        let Some(spec) = schema.get(&p.attribute) else {
            v.push(format!("rules statement {}: unknown attribute `{}`", index + 1, p.attribute));
            continue;
        };
        let values: Vec<&AttrValue> = match &p.value {
            Operand::Value(x) => vec![x],
            Operand::Set(xs) => xs.iter().collect(),
        };
        let numeric = matches!(spec, AttributeSpec::Numeric { .. });
        if values.iter().any(|x| matches!(x, AttrValue::Num(_)) != numeric) {
            v.push(format!("rules statement {}: `{}` compared with a value of the wrong type", index + 1, p.attribute));
        }
    }
    if let Some(crate::nadico::Consequence::Nested(child)) = &s.or_else {
        check_rule_against_schema(v, index, child, schema);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let s = load_config(r#"{"population": {"size": 50}, "seed": 3}"#, Path::new(".")).unwrap();
        assert_eq!(s.config.population.size, 50);
        assert_eq!(s.config.seed, 3);
        assert_eq!(s.config.ticks, 500);
        assert_eq!(s.config.parties.iter().map(|p| p.seats).sum::<u32>(), 21);
        assert!(!s.rules.is_empty());
    }

    #[test]
    fn bad_weights_are_named() {
        let e = load_config(r#"{"council": {"weights": [0.4, 0.2, 0.2, 0.2, 0.2]}}"#, Path::new(".")).unwrap_err();
        assert!(e.violations.iter().any(|m| m.starts_with("council.weights")), "{e}");
    }

    #[test]
    fn every_violation_is_listed() {
        let doc = r#"{"population": {"size": 0, "colour": "red"}, "network": {"rewiring": 2.0}, "bogus": 1}"#;
        let e = load_config(doc, Path::new(".")).unwrap_err();
        let all = e.violations.join("\n");
        for needle in ["population.colour", "bogus", "population.size", "network.rewiring"] {
            assert!(all.contains(needle), "missing {needle} in {all}");
        }
    }

    #[test]
    fn missing_rule_file() {
        let e = load_config(r#"{"rules": {"path": "nope.nadico"}}"#, Path::new("/nonexistent")).unwrap_err();
        assert!(e.violations[0].starts_with("rules.path"));
    }

    #[test]
    fn hash_ignores_key_order_and_seed() {
        let a = load_config(r#"{"seed": 1, "population": {"size": 40, "importance_jitter": 0.2}}"#, Path::new("."))
            .unwrap();
        let b = load_config(r#"{"population": {"importance_jitter": 0.2, "size": 40}, "seed": 9}"#, Path::new("."))
            .unwrap();
        let c = load_config(r#"{"population": {"importance_jitter": 0.3, "size": 40}}"#, Path::new(".")).unwrap();
        assert_eq!(a.hash, b.hash);
        assert_ne!(a.hash, c.hash);
    }
}

//! Statement evaluation and compliance reports.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Comparator, Consequence, Deontic, Operand, Predicate, Statement};
use crate::kernel::RoleKind;
use crate::lifecycle::{AttrValue, Attributes};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("rule references attribute `{0}` missing from the proposal")]
    MissingAttribute(String),
    #[error("attribute `{attribute}` cannot be compared with `{comparator}` against {operand}")]
    TypeMismatch { attribute: String, comparator: &'static str, operand: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    Violated,
    NotApplicable,
}

/// Position of a statement in a ruleset: `[3]` is the fourth top-level
/// statement, `[3, 0]` its nested or-else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatementId(pub Vec<usize>);

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl Serialize for StatementId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StatementId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.split('.')
            .map(|p| p.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map(StatementId)
            .map_err(serde::de::Error::custom)
    }
}

/// What an attribute must satisfy to cure a violation.
#[derive(Debug, Clone, PartialEq)]
pub enum Requirement {
    Eq(AttrValue),
    Ne(AttrValue),
    Lt(f64),
    Le(f64),
    Gt(f64),
    Ge(f64),
    In(Vec<AttrValue>),
    NotIn(Vec<AttrValue>),
}

impl Requirement {
    /// The requirement expressed by an aim, negated for prohibitions.
    /// Returns `None` for operand shapes the semantic checks reject.
    pub fn from_aim(aim: &Predicate, prohibition: bool) -> Option<Requirement> {
        use Comparator as C;
        let req = match (&aim.value, aim.comparator, prohibition) {
            (Operand::Set(s), C::In, false) => Requirement::In(s.clone()),
            (Operand::Set(s), C::In, true) => Requirement::NotIn(s.clone()),
            (Operand::Value(v), C::Eq, false) | (Operand::Value(v), C::Ne, true) => Requirement::Eq(v.clone()),
            (Operand::Value(v), C::Ne, false) | (Operand::Value(v), C::Eq, true) => Requirement::Ne(v.clone()),
            (Operand::Value(AttrValue::Num(x)), c, neg) => match (c, neg) {
                (C::Lt, false) | (C::Ge, true) => Requirement::Lt(*x),
                (C::Le, false) | (C::Gt, true) => Requirement::Le(*x),
                (C::Gt, false) | (C::Le, true) => Requirement::Gt(*x),
                (C::Ge, false) | (C::Lt, true) => Requirement::Ge(*x),
                _ => return None,
            },
            _ => return None,
        };
        Some(req)
    }

    pub fn holds(&self, v: &AttrValue) -> bool {
        match self {
            Requirement::Eq(x) => v == x,
            Requirement::Ne(x) => v != x,
            Requirement::Lt(b) => v.as_num().is_some_and(|n| n < *b),
            Requirement::Le(b) => v.as_num().is_some_and(|n| n <= *b),
            Requirement::Gt(b) => v.as_num().is_some_and(|n| n > *b),
            Requirement::Ge(b) => v.as_num().is_some_and(|n| n >= *b),
            Requirement::In(s) => s.contains(v),
            Requirement::NotIn(s) => !s.contains(v),
        }
    }
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &[AttrValue]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            Requirement::Eq(v) => write!(f, "= {v}"),
            Requirement::Ne(v) => write!(f, "!= {v}"),
            Requirement::Lt(b) => write!(f, "< {b}"),
            Requirement::Le(b) => write!(f, "<= {b}"),
            Requirement::Gt(b) => write!(f, "> {b}"),
            Requirement::Ge(b) => write!(f, ">= {b}"),
            Requirement::In(s) => write!(f, "in {{{}}}", set(s)),
            Requirement::NotIn(s) => write!(f, "not in {{{}}}", set(s)),
        }
    }
}

/// A change demanded (or recommended) by a violated statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modification {
    pub attribute: String,
    #[serde(with = "requirement_text")]
    pub requirement: Requirement,
    pub statement: StatementId,
}

mod requirement_text {
    use super::Requirement;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Requirement, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Requirement, D::Error> {
        let text = String::deserialize(d)?;
        let line = format!("A(any) D(should) I(x {})", text.replace("not in", "in"));
        let stmt = super::super::parse_statement(&line).map_err(serde::de::Error::custom)?;
        Requirement::from_aim(&stmt.aim, text.starts_with("not in"))
            .ok_or_else(|| serde::de::Error::custom(format!("bad requirement `{text}`")))
    }
}

fn mismatch(p: &Predicate) -> EvalError {
    EvalError::TypeMismatch {
        attribute: p.attribute.clone(),
        comparator: p.comparator.symbol(),
        operand: p.value.to_string(),
    }
}

/// Evaluates one predicate against proposal attributes.
pub fn evaluate_predicate(p: &Predicate, attrs: &Attributes) -> Result<bool, EvalError> {
    let actual = attrs.get(&p.attribute).ok_or_else(|| EvalError::MissingAttribute(p.attribute.clone()))?;
    match (&p.value, p.comparator) {
        (Operand::Set(items), Comparator::In) => {
            if items.iter().any(|v| !v.same_type(actual)) {
                return Err(mismatch(p));
            }
            Ok(items.contains(actual))
        }
        (Operand::Value(v), c) if c != Comparator::In => {
            if !v.same_type(actual) {
                return Err(mismatch(p));
            }
            match c {
                Comparator::Eq => Ok(actual == v),
                Comparator::Ne => Ok(actual != v),
                _ => {
                    let (Some(a), Some(b)) = (actual.as_num(), v.as_num()) else {
                        return Err(mismatch(p));
                    };
                    Ok(match c {
                        Comparator::Lt => a < b,
                        Comparator::Le => a <= b,
                        Comparator::Gt => a > b,
                        _ => a >= b,
                    })
                }
            }
        }
        _ => Err(mismatch(p)),
    }
}

/// Status of a single statement for an actor playing `actor_role`.
///
/// Every referenced attribute is checked up front, so a schema problem is
/// reported even when the conditions would make the statement inapplicable.
pub fn evaluate_statement(s: &Statement, attrs: &Attributes, actor_role: RoleKind) -> Result<Status, EvalError> {
    for p in std::iter::once(&s.aim).chain(&s.conditions) {
        if !attrs.contains_key(&p.attribute) {
            return Err(EvalError::MissingAttribute(p.attribute.clone()));
        }
    }
    if !s.attributes.admits(actor_role) {
        return Ok(Status::NotApplicable);
    }
    for c in &s.conditions {
        if !evaluate_predicate(c, attrs)? {
            return Ok(Status::NotApplicable);
        }
    }
    let aim = evaluate_predicate(&s.aim, attrs)?;
    let satisfied = match s.deontic {
        Deontic::Must | Deontic::Should => aim,
        Deontic::MustNot | Deontic::ShouldNot => !aim,
        Deontic::May => true,
    };
    Ok(if satisfied { Status::Satisfied } else { Status::Violated })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplianceReport {
    pub per_statement: Vec<(StatementId, Status)>,
    pub mandatory_mods: Vec<Modification>,
    pub optional_mods: Vec<Modification>,
    pub reject_trigger: bool,
    pub compliance_score: f64,
}

impl ComplianceReport {
    pub fn applicable(&self) -> usize {
        self.per_statement.iter().filter(|(_, s)| *s != Status::NotApplicable).count()
    }

    pub fn satisfied(&self) -> usize {
        self.per_statement.iter().filter(|(_, s)| *s == Status::Satisfied).count()
    }
}

/// Evaluates a ruleset for proposals authored by a developer.
pub fn evaluate_ruleset(rules: &[Statement], attrs: &Attributes) -> Result<ComplianceReport, EvalError> {
    evaluate_ruleset_as(rules, attrs, RoleKind::ProposalDeveloper)
}

/// Evaluates every statement; the nested or-else of a violated statement is
/// activated and evaluated in turn. The score is satisfied / applicable, and
/// 1 when nothing applies.
pub fn evaluate_ruleset_as(
    rules: &[Statement],
    attrs: &Attributes,
    role: RoleKind,
) -> Result<ComplianceReport, EvalError> {
    let mut report = ComplianceReport {
        per_statement: Vec::new(),
        mandatory_mods: Vec::new(),
        optional_mods: Vec::new(),
        reject_trigger: false,
        compliance_score: 1.0,
    };
    for (i, s) in rules.iter().enumerate() {
        visit(s, vec![i], attrs, role, &mut report)?;
    }
    let applicable = report.applicable();
    if applicable > 0 {
        report.compliance_score = report.satisfied() as f64 / applicable as f64;
    }
    Ok(report)
}

fn visit(
    s: &Statement,
    path: Vec<usize>,
    attrs: &Attributes,
    role: RoleKind,
    report: &mut ComplianceReport,
) -> Result<(), EvalError> {
    let status = evaluate_statement(s, attrs, role)?;
    report.per_statement.push((StatementId(path.clone()), status));
    if status != Status::Violated {
        return Ok(());
    }
    if let Some(requirement) = Requirement::from_aim(&s.aim, s.deontic.is_prohibition()) {
        let m = Modification { attribute: s.aim.attribute.clone(), requirement, statement: StatementId(path.clone()) };
        if s.deontic.is_binding() {
            report.mandatory_mods.push(m);
        } else {
            report.optional_mods.push(m);
        }
    }
    match &s.or_else {
        Some(Consequence::RejectTrigger) => report.reject_trigger = true,
        Some(Consequence::Nested(child)) => {
            let mut child_path = path;
            child_path.push(0);
            visit(child, child_path, attrs, role, report)?;
        }
        Some(Consequence::MandatoryModification) | None => {}
    }
    Ok(())
}

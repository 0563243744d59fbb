//! Nested institutional statements (Attributes, Deontic, aIm, Conditions,
//! Or-else).
//!
//! Rule text uses one statement per line:
//!
//! ```text
//! A(ProposalDeveloper) D(must) I(green_area_loss <= 0.1) C(zone = hillside) O(mandatory-modification)
//! A(any) D(should) I(permeable_surface >= 0.4)
//! A(any) D(must) I(flood_retention >= 0.3) O(A(any) D(must) I(height <= 20) O(reject-trigger))
//! ```
//!
//! `must`/`must-not` statements carry exactly one or-else; the weaker
//! deontics carry none. Or-else nesting is limited to [`MAX_DEPTH`] levels.

mod eval;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kernel::RoleKind;
use crate::lifecycle::AttrValue;

pub use eval::{
    evaluate_predicate, evaluate_ruleset, evaluate_ruleset_as, evaluate_statement, ComplianceReport, EvalError,
    Modification, Requirement, StatementId, Status,
};
pub use parser::{
    lint_contradictions, parse_rules, parse_statement, validate_statement, Diagnostic, NadicoError, ParseError,
    RuleFile, Severity,
};

pub const MAX_DEPTH: usize = 3;

/// Source position (1-based). Never part of structural equality.
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoleFilter {
    Any,
    Role(RoleKind),
}

impl RoleFilter {
    pub fn admits(self, role: RoleKind) -> bool {
        match self {
            RoleFilter::Any => true,
            RoleFilter::Role(r) => r == role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Deontic {
    Must,
    MustNot,
    Should,
    ShouldNot,
    May,
}

impl Deontic {
    pub const ALL: [Deontic; 5] = [Deontic::Must, Deontic::MustNot, Deontic::Should, Deontic::ShouldNot, Deontic::May];

    pub fn keyword(self) -> &'static str {
        match self {
            Deontic::Must => "must",
            Deontic::MustNot => "must-not",
            Deontic::Should => "should",
            Deontic::ShouldNot => "should-not",
            Deontic::May => "may",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Deontic> {
        Deontic::ALL.into_iter().find(|d| d.keyword() == s)
    }

    /// Binding rules (`must`, `must-not`) as opposed to guidelines.
    pub fn is_binding(self) -> bool {
        matches!(self, Deontic::Must | Deontic::MustNot)
    }

    pub fn is_prohibition(self) -> bool {
        matches!(self, Deontic::MustNot | Deontic::ShouldNot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
}

impl Comparator {
    pub const ALL: [Comparator; 7] = [
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
        Comparator::In,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::In => "in",
        }
    }

    pub fn is_ordered(self) -> bool {
        matches!(self, Comparator::Lt | Comparator::Le | Comparator::Gt | Comparator::Ge)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Value(AttrValue),
    Set(Vec<AttrValue>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub attribute: String,
    pub comparator: Comparator,
    pub value: Operand,
    pub span: Span,
}

impl Predicate {
    pub fn new(attribute: &str, comparator: Comparator, value: Operand) -> Self {
        Self { attribute: attribute.to_string(), comparator, value, span: Span::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Consequence {
    RejectTrigger,
    MandatoryModification,
    Nested(Box<Statement>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub attributes: RoleFilter,
    pub deontic: Deontic,
    pub aim: Predicate,
    /// Conjunctive; empty means always applicable.
    pub conditions: Vec<Predicate>,
    pub or_else: Option<Consequence>,
    pub span: Span,
}

impl Statement {
    /// Nesting depth, counting this statement as 1.
    pub fn depth(&self) -> usize {
        match &self.or_else {
            Some(Consequence::Nested(child)) => 1 + child.depth(),
            _ => 1,
        }
    }

    /// Every attribute name the statement (and its nested or-else) reads.
    pub fn attribute_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> =
            std::iter::once(&self.aim).chain(&self.conditions).map(|p| p.attribute.as_str()).collect();
        if let Some(Consequence::Nested(child)) = &self.or_else {
            names.extend(child.attribute_names());
        }
        names
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Value(v) => write!(f, "{v}"),
            Operand::Set(items) => {
                f.write_str("{")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("}")
            }
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.attribute, self.comparator.symbol(), self.value)
    }
}

impl fmt::Display for RoleFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoleFilter::Any => f.write_str("any"),
            RoleFilter::Role(r) => f.write_str(r.name()),
        }
    }
}

impl fmt::Display for Consequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Consequence::RejectTrigger => f.write_str("reject-trigger"),
            Consequence::MandatoryModification => f.write_str("mandatory-modification"),
            Consequence::Nested(s) => write!(f, "{s}"),
        }
    }
}

/// Canonical single-line form; parsing it yields a structurally equal statement.
impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A({}) D({}) I({})", self.attributes, self.deontic.keyword(), self.aim)?;
        for c in &self.conditions {
            write!(f, " C({c})")?;
        }
        if let Some(o) = &self.or_else {
            write!(f, " O({o})")?;
        }
        Ok(())
    }
}

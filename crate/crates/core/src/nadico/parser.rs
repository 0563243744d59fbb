//! Lexer and recursive-descent parser for statement text, plus the semantic
//! checks and the contradiction lint run over whole rule files.

use std::fmt;

use thiserror::Error;

use super::{Comparator, Consequence, Deontic, Operand, Predicate, RoleFilter, Span, Statement, MAX_DEPTH};
use crate::kernel::RoleKind;
use crate::lifecycle::AttrValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: expected {}, found {found}", expected_list(.expected))]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: Vec<String>,
    pub found: String,
}

fn expected_list(expected: &[String]) -> String {
    match expected {
        [] => "nothing".to_string(),
        [one] => one.clone(),
        many => format!("one of {}", many.join(", ")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u32,
    pub column: u32,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "line {}, column {}: {sev}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NadicoError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("{} semantic error(s); first: {}", .0.len(), .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Semantic(Vec<Diagnostic>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Number(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Cmp(Comparator),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Cmp(c) => format!("`{}`", c.symbol()),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str, line: u32) -> Result<Vec<(Tok, Span)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let span = |i: usize| Span { line, column: i as u32 + 1 };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '{' => {
                i += 1;
                Tok::LBrace
            }
            '}' => {
                i += 1;
                Tok::RBrace
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '=' => {
                i += 1;
                Tok::Cmp(Comparator::Eq)
            }
            '!' if chars.get(i + 1) == Some(&'=') => {
                i += 2;
                Tok::Cmp(Comparator::Ne)
            }
            '<' | '>' => {
                let eq = chars.get(i + 1) == Some(&'=');
                i += if eq { 2 } else { 1 };
                Tok::Cmp(match (c, eq) {
                    ('<', false) => Comparator::Lt,
                    ('<', true) => Comparator::Le,
                    ('>', false) => Comparator::Gt,
                    _ => Comparator::Ge,
                })
            }
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if matches!(chars.get(i), Some('e' | 'E')) {
                    let mut j = i + 1;
                    if matches!(chars.get(j), Some('+' | '-')) {
                        j += 1;
                    }
                    if chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                match text.parse::<f64>() {
                    Ok(x) if x.is_finite() => Tok::Number(x),
                    _ => {
                        return Err(ParseError {
                            line,
                            column: start as u32 + 1,
                            expected: vec!["a finite number".into()],
                            found: format!("`{text}`"),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let word_char = |c: char| c.is_ascii_alphanumeric() || c == '_';
                i += 1;
                loop {
                    while i < chars.len() && word_char(chars[i]) {
                        i += 1;
                    }
                    if chars.get(i) == Some(&'-') && chars.get(i + 1).is_some_and(|c| word_char(*c)) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                Tok::Word(chars[start..i].iter().collect())
            }
            other => {
                return Err(ParseError {
                    line,
                    column: start as u32 + 1,
                    expected: vec!["a statement token".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        out.push((tok, span(start)));
    }
    out.push((Tok::Eof, span(chars.len())));
    Ok(out)
}

struct Parser {
    tokens: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let span = self.span();
        ParseError {
            line: span.line,
            column: span.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn at_head(&self, name: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == name) && *self.peek_at(1) == Tok::LParen
    }

    fn head(&mut self, name: &str) -> Result<Span, ParseError> {
        if self.at_head(name) {
            let span = self.span();
            self.bump();
            self.bump();
            Ok(span)
        } else {
            Err(self.error(&[&format!("`{name}(`")]))
        }
    }

    fn close(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&["`)`"]))
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let span = self.head("A")?;
        let attributes = match self.peek().clone() {
            Tok::Word(w) if w == "any" => RoleFilter::Any,
            Tok::Word(w) if RoleKind::from_name(&w).is_some() => RoleFilter::Role(RoleKind::from_name(&w).unwrap()),
            _ => {
                let mut expected = vec!["`any`".to_string()];
                expected.extend(RoleKind::ALL.iter().map(|r| format!("`{}`", r.name())));
                let refs: Vec<&str> = expected.iter().map(String::as_str).collect();
                return Err(self.error(&refs));
            }
        };
        self.bump();
        self.close()?;

        self.head("D")?;
        let deontic = match self.peek() {
            Tok::Word(w) => Deontic::from_keyword(w),
            _ => None,
        }
        .ok_or_else(|| self.error(&["`must`", "`must-not`", "`should`", "`should-not`", "`may`"]))?;
        self.bump();
        self.close()?;

        self.head("I")?;
        let aim = self.predicate()?;
        self.close()?;

        let mut conditions = Vec::new();
        while self.at_head("C") {
            self.head("C")?;
            conditions.push(self.predicate()?);
            self.close()?;
        }

        let or_else = if self.at_head("O") {
            self.head("O")?;
            let consequence = match self.peek() {
                Tok::Word(w) if w == "reject-trigger" => {
                    self.bump();
                    Consequence::RejectTrigger
                }
                Tok::Word(w) if w == "mandatory-modification" => {
                    self.bump();
                    Consequence::MandatoryModification
                }
                _ if self.at_head("A") => Consequence::Nested(Box::new(self.statement()?)),
                _ => return Err(self.error(&["`reject-trigger`", "`mandatory-modification`", "`A(`"])),
            };
            self.close()?;
            Some(consequence)
        } else {
            None
        };

        Ok(Statement { attributes, deontic, aim, conditions, or_else, span })
    }

    fn predicate(&mut self) -> Result<Predicate, ParseError> {
        let span = self.span();
        let attribute = match self.peek() {
            Tok::Word(w) => w.clone(),
            _ => return Err(self.error(&["an attribute name"])),
        };
        self.bump();
        let comparator = match self.peek() {
            Tok::Cmp(c) => *c,
            Tok::Word(w) if w == "in" => Comparator::In,
            _ => return Err(self.error(&["`=`", "`!=`", "`<`", "`<=`", "`>`", "`>=`", "`in`"])),
        };
        self.bump();
        let value = if *self.peek() == Tok::LBrace {
            self.bump();
            let mut items = Vec::new();
            if *self.peek() != Tok::RBrace {
                loop {
                    items.push(self.scalar()?);
                    match self.peek() {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RBrace => break,
                        _ => return Err(self.error(&["`,`", "`}`"])),
                    }
                }
            }
            self.bump();
            Operand::Set(items)
        } else {
            Operand::Value(self.scalar()?)
        };
        Ok(Predicate { attribute, comparator, value, span })
    }

    fn scalar(&mut self) -> Result<AttrValue, ParseError> {
        let v = match self.peek() {
            Tok::Number(x) => AttrValue::Num(*x),
            Tok::Word(w) => AttrValue::Cat(w.clone()),
            _ => return Err(self.error(&["a number", "a category name"])),
        };
        self.bump();
        Ok(v)
    }
}

fn parse_syntax(text: &str, line: u32) -> Result<Statement, ParseError> {
    let mut parser = Parser { tokens: lex(text, line)?, pos: 0 };
    let statement = parser.statement()?;
    if *parser.peek() != Tok::Eof {
        let expected: &[&str] =
            if statement.or_else.is_some() { &["end of statement"] } else { &["`C(`", "`O(`", "end of statement"] };
        return Err(parser.error(expected));
    }
    Ok(statement)
}

/// Structural checks the grammar alone does not enforce.
pub fn validate_statement(statement: &Statement) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check(statement, 1, &mut out);
    out
}

fn check(s: &Statement, depth: usize, out: &mut Vec<Diagnostic>) {
    let mut err = |span: Span, message: String| {
        out.push(Diagnostic { line: span.line, column: span.column, severity: Severity::Error, message })
    };
    if depth > MAX_DEPTH {
        err(s.span, format!("or-else nesting deeper than {MAX_DEPTH} levels"));
    }
    match (s.deontic.is_binding(), &s.or_else) {
        (true, None) => err(s.span, format!("`{}` statement requires an or-else consequence", s.deontic.keyword())),
        (false, Some(_)) => {
            err(s.span, format!("`{}` statement cannot carry an or-else consequence", s.deontic.keyword()))
        }
        _ => {}
    }
    for p in std::iter::once(&s.aim).chain(&s.conditions) {
        match (&p.value, p.comparator) {
            (Operand::Set(items), Comparator::In) if items.is_empty() => {
                err(p.span, format!("`{}`: `in` needs a non-empty set", p.attribute))
            }
            (Operand::Set(_), Comparator::In) => {}
            (Operand::Value(_), Comparator::In) => err(p.span, format!("`{}`: `in` needs a set operand", p.attribute)),
            (Operand::Set(_), c) => err(p.span, format!("`{}`: `{}` needs a single value", p.attribute, c.symbol())),
            (Operand::Value(AttrValue::Cat(_)), c) if c.is_ordered() => {
                err(p.span, format!("`{}`: ordered comparator `{}` needs a numeric value", p.attribute, c.symbol()))
            }
            _ => {}
        }
    }
    if let Some(Consequence::Nested(child)) = &s.or_else {
        check(child, depth + 1, out);
    }
}

fn parse_line(text: &str, line: u32) -> Result<Statement, NadicoError> {
    let statement = parse_syntax(text, line)?;
    let diagnostics = validate_statement(&statement);
    if diagnostics.is_empty() {
        Ok(statement)
    } else {
        Err(NadicoError::Semantic(diagnostics))
    }
}

/// Parses one statement and runs the semantic checks.
pub fn parse_statement(text: &str) -> Result<Statement, NadicoError> {
    parse_line(text, 1)
}

/// A parsed rule file: the valid statements with their line numbers and
/// every diagnostic (errors and lint warnings) in line order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleFile {
    pub statements: Vec<(u32, Statement)>,
    pub diagnostics: Vec<Diagnostic>,
}

impl RuleFile {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn rules(&self) -> Vec<Statement> {
        self.statements.iter().map(|(_, s)| s.clone()).collect()
    }
}

/// Parses rule-file text: one statement per line, `#` starts a comment.
pub fn parse_rules(text: &str) -> RuleFile {
    let mut file = RuleFile::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx as u32 + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        match parse_line(content, line) {
            Ok(s) => file.statements.push((line, s)),
            Err(NadicoError::Syntax(e)) => file.diagnostics.push(Diagnostic {
                line: e.line,
                column: e.column,
                severity: Severity::Error,
                message: format!("expected {}, found {}", expected_list(&e.expected), e.found),
            }),
            Err(NadicoError::Semantic(ds)) => file.diagnostics.extend(ds),
        }
    }
    file.diagnostics.extend(lint_contradictions(&file.statements));
    file.diagnostics.sort_by_key(|d| (d.line, d.column));
    file
}

fn condition_key(s: &Statement) -> Vec<String> {
    let mut keys: Vec<String> = s.conditions.iter().map(|c| c.to_string()).collect();
    keys.sort();
    keys
}

/// Warns about `must` / `must-not` pairs with the same role filter, aim and
/// conditions: no proposal can satisfy both.
pub fn lint_contradictions(statements: &[(u32, Statement)]) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, (line_a, a)) in statements.iter().enumerate() {
        for (line_b, b) in &statements[i + 1..] {
            let opposed =
                matches!((a.deontic, b.deontic), (Deontic::Must, Deontic::MustNot) | (Deontic::MustNot, Deontic::Must));
            if opposed && a.attributes == b.attributes && a.aim == b.aim && condition_key(a) == condition_key(b) {
                out.push(Diagnostic {
                    line: *line_b,
                    column: b.span.column,
                    severity: Severity::Warning,
                    message: format!("contradicts line {line_a}: must and must-not on the same aim `{}`", b.aim),
                });
            }
        }
    }
    out
}

//! Random rule generation with a self-contained evaluator used as an oracle
//! against the parser and evaluator in the crate.

#![allow(dead_code)]

use rand::Rng;

use civicsim_core::lifecycle::{AttrValue, Attributes};

/// Attribute universe: numeric attributes with a range, categorical ones
/// with their labels.
pub struct Universe {
    pub numeric: Vec<(&'static str, f64, f64)>,
    pub categorical: Vec<(&'static str, Vec<&'static str>)>,
}

impl Universe {
    pub fn small() -> Self {
        Universe {
            numeric: vec![("x0", 0.0, 10.0), ("x1", 0.0, 10.0), ("x2", 0.0, 1.0)],
            categorical: vec![("c0", vec!["a", "b", "c", "d"]), ("c1", vec!["p", "q"])],
        }
    }

    /// The attributes of the default scenario schema.
    pub fn default_schema() -> Self {
        Universe {
            numeric: vec![
                ("green_area_loss", 0.0, 1.0),
                ("height", 3.0, 80.0),
                ("flood_retention", 0.0, 1.0),
                ("permeable_surface", 0.0, 1.0),
                ("housing_units", 0.0, 2000.0),
            ],
            categorical: vec![("zone", vec!["residential", "mixed", "riverside", "industrial"])],
        }
    }

    /// A value on a coarse grid, so equality comparisons hit often.
    fn num<R: Rng>(&self, i: usize, rng: &mut R) -> f64 {
        let (_, lo, hi) = self.numeric[i];
        lo + (hi - lo) * rng.random_range(0..=10) as f64 / 10.0
    }

    pub fn attributes<R: Rng>(&self, rng: &mut R) -> Attributes {
        let mut a = Attributes::new();
        for i in 0..self.numeric.len() {
            a.insert(self.numeric[i].0.to_string(), AttrValue::Num(self.num(i, rng)));
        }
        for (name, cats) in &self.categorical {
            a.insert(name.to_string(), AttrValue::Cat(cats[rng.random_range(0..cats.len())].to_string()));
        }
        a
    }
}

#[derive(Debug, Clone)]
pub enum Rhs {
    Num(f64),
    Cat(String),
    Set(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct Pred {
    pub attr: String,
    pub op: &'static str,
    pub rhs: Rhs,
}

#[derive(Debug, Clone)]
pub enum OrElse {
    Reject,
    Mandatory,
    Nested(Box<Rule>),
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub role: Option<&'static str>,
    pub deontic: &'static str,
    pub aim: Pred,
    pub conds: Vec<Pred>,
    pub or_else: Option<OrElse>,
}

pub const DEONTICS: [&str; 5] = ["must", "must-not", "should", "should-not", "may"];

impl Pred {
    pub fn text(&self) -> String {
        let rhs = match &self.rhs {
            Rhs::Num(x) => format!("{x}"),
            Rhs::Cat(s) => s.clone(),
            Rhs::Set(items) => format!("{{{}}}", items.join(", ")),
        };
        format!("{} {} {}", self.attr, self.op, rhs)
    }

    /// Direct truth-table evaluation.
    pub fn holds(&self, attrs: &Attributes) -> bool {
        match (&attrs[&self.attr], &self.rhs) {
            (AttrValue::Num(a), Rhs::Num(b)) => match self.op {
                "=" => a == b,
                "!=" => a != b,
                "<" => a < b,
                "<=" => a <= b,
                ">" => a > b,
                ">=" => a >= b,
                op => panic!("bad numeric op {op}"),
            },
            (AttrValue::Cat(a), Rhs::Cat(b)) => match self.op {
                "=" => a == b,
                "!=" => a != b,
                op => panic!("bad categorical op {op}"),
            },
            (AttrValue::Cat(a), Rhs::Set(items)) => items.iter().any(|s| s == a),
            other => panic!("ill-typed predicate {other:?}"),
        }
    }
}

impl Rule {
    pub fn text(&self) -> String {
        let mut s = format!("A({}) D({}) I({})", self.role.unwrap_or("any"), self.deontic, self.aim.text());
        for c in &self.conds {
            s.push_str(&format!(" C({})", c.text()));
        }
        match &self.or_else {
            Some(OrElse::Reject) => s.push_str(" O(reject-trigger)"),
            Some(OrElse::Mandatory) => s.push_str(" O(mandatory-modification)"),
            Some(OrElse::Nested(child)) => s.push_str(&format!(" O({})", child.text())),
            None => {}
        }
        s
    }

    pub fn binding(&self) -> bool {
        self.deontic == "must" || self.deontic == "must-not"
    }
}

pub fn random_pred<R: Rng>(u: &Universe, rng: &mut R) -> Pred {
    let n_num = u.numeric.len();
    let i = rng.random_range(0..n_num + u.categorical.len());
    if i < n_num {
        let op = ["=", "!=", "<", "<=", ">", ">="][rng.random_range(0..6)];
        Pred { attr: u.numeric[i].0.to_string(), op, rhs: Rhs::Num(u.num(i, rng)) }
    } else {
        let (name, cats) = &u.categorical[i - n_num];
        let pick = |rng: &mut R| cats[rng.random_range(0..cats.len())].to_string();
        match rng.random_range(0..3) {
            0 => Pred { attr: name.to_string(), op: "=", rhs: Rhs::Cat(pick(rng)) },
            1 => Pred { attr: name.to_string(), op: "!=", rhs: Rhs::Cat(pick(rng)) },
            _ => {
                let mut set: Vec<String> =
                    cats.iter().filter(|_| rng.random_bool(0.5)).map(|s| s.to_string()).collect();
                if set.is_empty() {
                    set.push(pick(rng));
                }
                Pred { attr: name.to_string(), op: "in", rhs: Rhs::Set(set) }
            }
        }
    }
}

/// A semantically valid random statement with at most `depth` levels.
pub fn random_rule<R: Rng>(u: &Universe, depth: usize, rng: &mut R) -> Rule {
    let deontic = DEONTICS[rng.random_range(0..5)];
    let role =
        if rng.random_bool(0.8) { None } else { Some(["ProposalDeveloper", "UrbanPlanner"][rng.random_range(0..2)]) };
    let conds = (0..rng.random_range(0..3)).map(|_| random_pred(u, rng)).collect();
    let binding = deontic == "must" || deontic == "must-not";
    let or_else = binding.then(|| match rng.random_range(0..3) {
        0 => OrElse::Reject,
        1 if depth > 1 => OrElse::Nested(Box::new(random_rule(u, depth - 1, rng))),
        _ => OrElse::Mandatory,
    });
    Rule { role, deontic, aim: random_pred(u, rng), conds, or_else }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum St {
    Sat,
    Vio,
    Na,
}

/// Oracle report: statuses in depth-first order (children only when the
/// parent is violated), binding and non-binding violations, the reject flag.
#[derive(Debug, Default)]
pub struct OracleReport {
    pub statuses: Vec<St>,
    pub mandatory: Vec<String>,
    pub optional: Vec<String>,
    pub reject: bool,
}

impl OracleReport {
    pub fn score(&self) -> f64 {
        let applicable = self.statuses.iter().filter(|s| **s != St::Na).count();
        let satisfied = self.statuses.iter().filter(|s| **s == St::Sat).count();
        if applicable == 0 {
            1.0
        } else {
            satisfied as f64 / applicable as f64
        }
    }
}

pub fn oracle_status(r: &Rule, attrs: &Attributes, role: &str) -> St {
    if r.role.is_some_and(|x| x != role) || !r.conds.iter().all(|c| c.holds(attrs)) {
        return St::Na;
    }
    let aim = r.aim.holds(attrs);
    let ok = match r.deontic {
        "must" | "should" => aim,
        "must-not" | "should-not" => !aim,
        _ => true,
    };
    if ok {
        St::Sat
    } else {
        St::Vio
    }
}

fn visit(r: &Rule, attrs: &Attributes, role: &str, out: &mut OracleReport) {
    let st = oracle_status(r, attrs, role);
    out.statuses.push(st);
    if st != St::Vio {
        return;
    }
    if r.binding() {
        out.mandatory.push(r.aim.attr.clone());
    } else {
        out.optional.push(r.aim.attr.clone());
    }
    match &r.or_else {
        Some(OrElse::Reject) => out.reject = true,
        Some(OrElse::Nested(child)) => visit(child, attrs, role, out),
        _ => {}
    }
}

pub fn oracle_evaluate(rules: &[Rule], attrs: &Attributes, role: &str) -> OracleReport {
    let mut out = OracleReport::default();
    for r in rules {
        visit(r, attrs, role, &mut out);
    }
    out
}

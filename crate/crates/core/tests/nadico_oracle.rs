mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use civicsim_core::nadico::{
    evaluate_ruleset, evaluate_ruleset_as, lint_contradictions, parse_rules, parse_statement, Severity, Statement,
    Status,
};
use civicsim_core::RoleKind;

use common::{oracle_evaluate, random_rule, Rule, St, Universe};

const CORPUS: &str = "\
# planning rules used for round-trip checks
A(ProposalDeveloper) D(must) I(green_area_loss <= 0.1) C(zone = hillside) O(mandatory-modification)
A(any) D(must) I(flood_retention >= 0.3) O(reject-trigger)
A(any) D(must-not) I(height > 40) C(zone = riverside) O(mandatory-modification)
A(any) D(should) I(permeable_surface >= 0.4)
A(any) D(should-not) I(zone = industrial) C(housing_units > 500)
A(any) D(may) I(height <= 12)
A(UrbanPlanner) D(should) I(housing_units >= 100)
A(any)   D(must)  I(height <= 60)   O(mandatory-modification)
A(any) D(must) I(zone in {residential, mixed}) C(housing_units >= 200) O(mandatory-modification)
A(any) D(must-not) I(zone in {industrial}) C(flood_retention < 0.2) O(reject-trigger)
A(any) D(must) I(flood_retention >= 0.3) O(A(any) D(must) I(height <= 20) O(reject-trigger))
A(any) D(must) I(green_area_loss < 0.25) O(A(any) D(must) I(permeable_surface >= 0.5) O(A(any) D(must) I(flood_retention >= 0.6) O(reject-trigger)))
A(ProposalDeveloper) D(must) I(housing_units <= 1500) C(zone != industrial) C(height < 50) O(mandatory-modification)
A(any) D(should) I(green_area_loss != 0)
A(any) D(should-not) I(height >= 70)
A(any) D(must) I(zone != riverside) C(flood_retention <= 0.1) O(reject-trigger)
A(any) D(may) I(zone = mixed) C(housing_units > 1000)
A(any) D(must-not) I(permeable_surface < 0.1) O(A(any) D(should) I(green_area_loss <= 0.05))
A(Representative) D(should) I(height <= 30)
A(any) D(must) I(height >= 3) O(mandatory-modification)
A(any) D(should) I(zone in {residential, mixed, riverside}) C(height <= 25) C(housing_units < 400)
A(any) D(must-not) I(flood_retention = 0) O(reject-trigger)
";

fn normalize(line: &str) -> String {
    line.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn corpus_round_trips() {
    let file = parse_rules(CORPUS);
    assert!(!file.has_errors(), "{:?}", file.diagnostics);
    let lines: Vec<&str> = CORPUS.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).collect();
    let rules = file.rules();
    assert!(rules.len() >= 20);
    assert_eq!(rules.len(), lines.len());
    assert!(rules.iter().any(|r| r.depth() == 3));
    for (line, rule) in lines.iter().zip(&rules) {
        let formatted = rule.to_string();
        assert_eq!(formatted, normalize(line));
        assert_eq!(&parse_statement(&formatted).unwrap(), rule);
    }
}

#[test]
fn syntax_error_reports_line_and_column() {
    let text = "A(any) D(should) I(height <= 10)\n# comment\nA(any) D(must I(height <= 10) O(reject-trigger)\n";
    let file = parse_rules(text);
    let errors: Vec<_> = file.diagnostics.iter().filter(|d| d.severity == Severity::Error).collect();
    assert_eq!(errors.len(), 1);
    assert_eq!(errors[0].line, 3);
    assert!(errors[0].column > 1);
}

#[test]
fn may_with_or_else_is_a_semantic_error() {
    assert!(parse_statement("A(any) D(may) I(height <= 12) O(reject-trigger)").is_err());
    assert!(parse_statement("A(any) D(must) I(height <= 12)").is_err());
}

#[test]
fn contradiction_lint_matches_pairwise_comparison() {
    // must and must-not on the same aim under the same conditions; the
    // pairwise oracle flags exactly the (0, 1) and (2, 3) pairs.
    let text = "\
A(any) D(must) I(height <= 20) O(mandatory-modification)
A(any) D(must-not) I(height <= 20) O(mandatory-modification)
A(any) D(must) I(zone = mixed) C(housing_units > 10) O(reject-trigger)
A(any) D(must-not) I(zone = mixed) C(housing_units > 10) O(reject-trigger)
A(any) D(must-not) I(height <= 20) C(zone = mixed) O(mandatory-modification)
A(any) D(should) I(height <= 20)
";
    let file = parse_rules(text);
    assert!(!file.has_errors());
    let warnings: Vec<_> = file.diagnostics.iter().filter(|d| d.severity == Severity::Warning).collect();
    let statements: Vec<(u32, Statement)> =
        file.rules().into_iter().enumerate().map(|(i, s)| (i as u32 + 1, s)).collect();
    let mut oracle = 0;
    for (i, (_, a)) in statements.iter().enumerate() {
        for (_, b) in &statements[i + 1..] {
            let opposite = a.deontic.is_binding()
                && b.deontic.is_binding()
                && a.deontic.is_prohibition() != b.deontic.is_prohibition();
            if opposite && a.aim == b.aim && a.conditions == b.conditions && a.attributes == b.attributes {
                oracle += 1;
            }
        }
    }
    assert_eq!(oracle, 2);
    assert_eq!(warnings.len(), oracle);
    assert_eq!(lint_contradictions(&statements).len(), oracle);
}

fn status_of(s: Status) -> St {
    match s {
        Status::Satisfied => St::Sat,
        Status::Violated => St::Vio,
        Status::NotApplicable => St::Na,
    }
}

fn parse_all(rules: &[Rule]) -> Vec<Statement> {
    rules.iter().map(|r| parse_statement(&r.text()).unwrap_or_else(|e| panic!("{}: {e}", r.text()))).collect()
}

fn agree(rules: &[Rule], attrs: &civicsim_core::lifecycle::Attributes, role: RoleKind) -> Result<(), String> {
    let parsed = parse_all(rules);
    let got = evaluate_ruleset_as(&parsed, attrs, role).map_err(|e| e.to_string())?;
    let want = oracle_evaluate(rules, attrs, role.name());
    let statuses: Vec<St> = got.per_statement.iter().map(|(_, s)| status_of(*s)).collect();
    let mandatory: Vec<String> = got.mandatory_mods.iter().map(|m| m.attribute.clone()).collect();
    let optional: Vec<String> = got.optional_mods.iter().map(|m| m.attribute.clone()).collect();
    if statuses != want.statuses
        || mandatory != want.mandatory
        || optional != want.optional
        || got.reject_trigger != want.reject
        || got.compliance_score != want.score()
    {
        return Err(format!(
            "disagreement on {attrs:?}\nrules: {:#?}",
            rules.iter().map(Rule::text).collect::<Vec<_>>()
        ));
    }
    Ok(())
}

#[test]
fn hundred_random_rulesets_agree_with_oracle() {
    let u = Universe::small();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let rules: Vec<Rule> = (0..rng.random_range(0..12)).map(|_| random_rule(&u, 3, &mut rng)).collect();
        for _ in 0..10 {
            let attrs = u.attributes(&mut rng);
            agree(&rules, &attrs, RoleKind::ProposalDeveloper).unwrap();
            agree(&rules, &attrs, RoleKind::UrbanPlanner).unwrap();
        }
    }
}

#[test]
fn empty_ruleset_is_fully_compliant() {
    let attrs = Universe::small().attributes(&mut ChaCha8Rng::seed_from_u64(1));
    let r = evaluate_ruleset(&[], &attrs).unwrap();
    assert_eq!(r.compliance_score, 1.0);
    assert!(r.mandatory_mods.is_empty() && r.optional_mods.is_empty());
}

#[test]
fn hand_traced_nested_cases() {
    let rule = parse_statement("A(any) D(must) I(x0 <= 5) O(A(any) D(must) I(x1 >= 5) O(reject-trigger))").unwrap();
    let attrs = |x0: f64, x1: f64| {
        let mut a = Universe::small().attributes(&mut ChaCha8Rng::seed_from_u64(0));
        a.insert("x0".into(), civicsim_core::lifecycle::AttrValue::Num(x0));
        a.insert("x1".into(), civicsim_core::lifecycle::AttrValue::Num(x1));
        a
    };
    // (x0, x1) -> (statuses, score, reject)
    let cases = [
        ((3.0, 0.0), vec![Status::Satisfied], 1.0, false),
        ((5.0, 9.0), vec![Status::Satisfied], 1.0, false),
        ((7.0, 6.0), vec![Status::Violated, Status::Satisfied], 0.5, false),
        ((7.0, 4.0), vec![Status::Violated, Status::Violated], 0.0, true),
        ((10.0, 5.0), vec![Status::Violated, Status::Satisfied], 0.5, false),
    ];
    for ((x0, x1), statuses, score, reject) in cases {
        let r = evaluate_ruleset(std::slice::from_ref(&rule), &attrs(x0, x1)).unwrap();
        assert_eq!(r.per_statement.iter().map(|(_, s)| *s).collect::<Vec<_>>(), statuses);
        assert_eq!(r.compliance_score, score);
        assert_eq!(r.reject_trigger, reject);
    }
}

/// Adds a non-nested statement and checks the direction of the score change
/// according to how the new statement itself evaluates.
fn monotonicity_trial(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let u = Universe::small();
    let base: Vec<Rule> = (0..rng.random_range(0..8)).map(|_| random_rule(&u, 3, rng)).collect();
    let attrs = u.attributes(rng);
    let extra = random_rule(&u, 1, rng);
    let before = evaluate_ruleset(&parse_all(&base), &attrs).map_err(|e| e.to_string())?.compliance_score;
    let mut grown = base.clone();
    grown.push(extra.clone());
    let after = evaluate_ruleset(&parse_all(&grown), &attrs).map_err(|e| e.to_string())?.compliance_score;
    let ok = match common::oracle_status(&extra, &attrs, "ProposalDeveloper") {
        St::Sat => after >= before,
        St::Vio => after <= before,
        St::Na => after == before,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{before} -> {after} after adding {}", extra.text()))
    }
}

#[test]
fn thousand_add_a_statement_trials() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        monotonicity_trial(&mut rng).unwrap();
    }
}

proptest! {
    #[test]
    fn random_statements_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rule = random_rule(&Universe::small(), 3, &mut rng);
        let parsed = parse_statement(&rule.text()).unwrap();
        prop_assert_eq!(parsed.to_string(), rule.text());
        prop_assert_eq!(parse_statement(&parsed.to_string()).unwrap(), parsed);
    }

    #[test]
    fn evaluation_is_pure_and_matches_oracle(seed in any::<u64>()) {
        let u = Universe::small();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rules: Vec<Rule> = (0..rng.random_range(0..10)).map(|_| random_rule(&u, 3, &mut rng)).collect();
        let attrs = u.attributes(&mut rng);
        prop_assert!(agree(&rules, &attrs, RoleKind::ProposalDeveloper).is_ok());
        let parsed = parse_all(&rules);
        prop_assert_eq!(evaluate_ruleset(&parsed, &attrs).unwrap(), evaluate_ruleset(&parsed, &attrs).unwrap());
    }

    #[test]
    fn score_is_a_fraction_and_full_compliance_has_no_mandatory_mods(seed in any::<u64>()) {
        let u = Universe::small();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rules: Vec<Rule> = (0..rng.random_range(0..10)).map(|_| random_rule(&u, 3, &mut rng)).collect();
        let r = evaluate_ruleset(&parse_all(&rules), &u.attributes(&mut rng)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.compliance_score));
        if r.compliance_score == 1.0 {
            prop_assert!(r.mandatory_mods.is_empty());
        }
    }
}

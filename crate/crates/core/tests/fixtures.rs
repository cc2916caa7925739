use cjl::fixtures::{corpus, load_kripke, run_corpus};
use cjl::syntax::{jtb, knowledge};
use cjl::{parse_formula, Dialect, Term};

#[test]
fn every_corpus_expectation_holds() {
    let outcomes = run_corpus().unwrap();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.to_string()).collect();
    assert!(failed.is_empty(), "{}", failed.join("\n"));
    assert!(outcomes.len() >= 60, "only {} expectations", outcomes.len());
}

#[test]
fn corpus_covers_every_shipped_file() {
    let cases = corpus().unwrap();
    for name in cjl::fixtures::fixture_names().filter(|n| *n != "corpus.json") {
        assert!(
            cases.iter().any(|c| c.model.as_deref() == Some(name) || c.derivation.as_deref() == Some(name)),
            "{name} unused"
        );
    }
}

#[test]
fn knowledge_macro_matches_the_corpus_text() {
    let d = Dialect::L;
    let phi = parse_formula("p|q", d).unwrap();
    let t = Term::app(Term::constant("c"), Term::var("x"));
    let text = "(p|q) & (c.x):(p|q) & (~(p|q) > ~(c.x):(p|q)) & ((p|q) > (c.x):(p|q))";
    assert_eq!(knowledge(&phi, &t), parse_formula(text, d).unwrap());
    assert_eq!(jtb(&phi, &t), parse_formula("(p|q) & (c.x):(p|q)", d).unwrap());
}

#[test]
fn gettier_jtb_without_knowledge() {
    let m = load_kripke("gettier.json").unwrap();
    let d = Dialect::L;
    let phi = parse_formula("p|q", d).unwrap();
    let t = Term::app(Term::constant("c"), Term::var("x"));
    assert!(m.eval("w", &jtb(&phi, &t), d).unwrap());
    assert!(!m.eval("w", &knowledge(&phi, &t), d).unwrap());
}

#[test]
fn flipped_expectations_are_reported() {
    use cjl::fixtures::{run_case, Check};
    for mut case in corpus().unwrap() {
        for exp in &mut case.checks {
            match &mut exp.kind {
                Check::Eval { expect, .. }
                | Check::Valid { expect, .. }
                | Check::Consequence { expect, .. }
                | Check::Derivation { expect }
                | Check::Falsify { expect, .. } => *expect = !*expect,
                Check::Conditions { expect_pass, .. } => *expect_pass = !*expect_pass,
                Check::Truthset { expect, .. } => expect.push("nowhere".into()),
                Check::Prove { expect, .. } => *expect = "EXHAUSTED".into(),
            }
        }
        let outcomes = run_case(&case).unwrap();
        assert!(outcomes.iter().all(|o| !o.passed), "{}", case.name);
    }
}

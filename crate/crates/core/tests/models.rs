use std::collections::BTreeSet;

use cjl::doc::{ModelDoc, ModelError};
use cjl::falsifier::{find_countermodel, Countermodel};
use cjl::fixtures::{fixture_names, fixture_text, load_kripke, load_routley};
use cjl::kripke::{check_conditions, ConstantSpecification, KripkeModel, VariantProfile};
use cjl::routley::{check_jrc_conditions, JrcCondition, RoutleyModel};
use cjl::syntax::closure;
use cjl::{parse_formula, Dialect, Formula};

fn f(s: &str, d: Dialect) -> Formula {
    parse_formula(s, d).unwrap()
}

#[test]
fn model_documents_round_trip() {
    for name in fixture_names().filter(|n| n.ends_with(".json") && *n != "corpus.json") {
        let doc = ModelDoc::from_json(fixture_text(name).unwrap()).unwrap();
        if doc.dialect.is_jrc() {
            let m = RoutleyModel::from_doc(&doc).unwrap();
            let back = RoutleyModel::from_doc(&ModelDoc::from_json(&m.to_doc().to_json()).unwrap()).unwrap();
            assert_eq!(back, m, "{name}");
        } else {
            let m = KripkeModel::from_doc(&doc).unwrap();
            let back = KripkeModel::from_doc(&ModelDoc::from_json(&m.to_doc().to_json()).unwrap()).unwrap();
            assert_eq!(back, m, "{name}");
        }
    }
}

#[test]
fn malformed_documents_are_rejected() {
    let base = r#"{"dialect":"LPCplus","states":["w","v"],"normal":["w"]"#;
    let cases = [
        (format!(r#"{base},"formula_rels":{{"p":[["w","v"]]}}}}"#), "override"),
        (format!(r#"{base},"term_rels":{{"x":[["w","u"]]}}}}"#), "unknown state"),
        (r#"{"dialect":"LPCplus","states":["w"],"normal":[]}"#.to_string(), "empty"),
        (format!(r#"{base},"valuation":{{"w":["p ~> q"]}}}}"#), "dialect"),
    ];
    for (text, what) in cases {
        let res = ModelDoc::from_json(&text).and_then(|d| KripkeModel::from_doc(&d));
        assert!(res.is_err(), "{what} accepted");
    }
    let e = ModelDoc::from_json(&format!(r#"{base},"formula_rels":{{"p":[["w","v"]]}}}}"#))
        .and_then(|d| KripkeModel::from_doc(&d))
        .unwrap_err();
    assert!(matches!(e, ModelError::NonNormalOverride { .. }), "{e}");
}

#[test]
fn nonnormal_states_read_formulas_literally() {
    let m = load_kripke("hyper_material.json").unwrap();
    let d = Dialect::LPCplus;
    assert!(m.eval("v", &f("p & p", d), d).unwrap());
    assert!(!m.eval("v", &f("p", d), d).unwrap());
    assert!(m.eval("w", &f("x:(p & p)", d), d).unwrap());
    assert!(!m.eval("w", &f("x:p", d), d).unwrap());
}

#[test]
fn routley_star_breaks_excluded_middle() {
    let m = load_routley("excluded_middle.json").unwrap();
    let d = Dialect::JRC;
    assert!(!m.eval("w0", &f("q ~> (p | ~p)", d)).unwrap());
    let rep = check_jrc_conditions(&m, &closure([&f("q ~> (p | ~p)", d)]));
    assert!(rep.passed(), "{rep}");
}

#[test]
fn broken_normality_is_flagged() {
    let mut m = load_routley("counterpossible.json").unwrap();
    m.ternary.insert((0, 1, 2));
    let rep = check_jrc_conditions(&m, &BTreeSet::new());
    let r = rep.result(JrcCondition::Normality).unwrap();
    assert!(!r.passed);
    assert_eq!(r.witness.as_ref().unwrap().states[0], "w0");
}

#[test]
fn countermodels_are_genuine() {
    let cases = [
        (Dialect::LPCplus, "p > q"),
        (Dialect::JCplus, "x:p > p"),
        (Dialect::J4Cplus, "x:(p & q) > x:p"),
        (Dialect::L, "[]p > p & q"),
        (Dialect::LPCint, "x:p > (x+y):q"),
    ];
    for (d, g) in cases {
        let goal = f(g, d);
        let Some(Countermodel::Kripke(m)) = find_countermodel(&[], &goal, d, 2) else { panic!("{d} {g}: none") };
        assert!(!m.eval(&m.states[0], &goal, d).unwrap(), "{d} {g}");
        let rep = check_conditions(
            &m,
            &VariantProfile::for_dialect(d),
            &m.default_universe(std::slice::from_ref(&goal)),
            &ConstantSpecification::default(),
        );
        assert!(rep.passed(), "{d} {g}: {rep}");
    }
}

#[test]
fn valid_schemes_have_no_small_countermodels() {
    for (d, g) in [
        (Dialect::LPCplus, "x:p > p"),
        (Dialect::LPCplus, "x:p > (x+y):p"),
        (Dialect::JCplus, "p > p"),
        (Dialect::L, "[]p => p"),
    ] {
        assert!(find_countermodel(&[], &f(g, d), d, 2).is_none(), "{d} {g}");
    }
}

#[test]
fn jrc_countermodels_respect_premises() {
    let d = Dialect::JRC;
    let (p, g) = (f("p ~> q", d), f("~q ~> ~p", d));
    let Some(Countermodel::Routley(m)) = find_countermodel(std::slice::from_ref(&p), &g, d, 3) else { panic!("none") };
    assert!(m.eval(&m.states[0], &p).unwrap());
    assert!(!m.eval(&m.states[0], &g).unwrap());
    assert!(check_jrc_conditions(&m, &closure([&p, &g])).passed());
}

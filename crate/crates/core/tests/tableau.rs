use cjl::falsifier::{cross_check, cross_check_with, find_jrc_countermodel, Agreement};
use cjl::routley::{check_jrc_conditions, RoutleyEvaluator};
use cjl::tableau::{
    branch_universe, prove, verify_result, Budget, Label, NodeExpr, ProofResult, Prover, Rule, Sign,
};
use cjl::{parse_formula, Dialect, Formula};

fn f(s: &str) -> Formula {
    parse_formula(s, Dialect::JRC).unwrap()
}

fn run(premises: &[&str], goal: &str) -> (Vec<Formula>, Formula, ProofResult) {
    let ps: Vec<Formula> = premises.iter().map(|p| f(p)).collect();
    let g = f(goal);
    let r = prove(&ps, &g, Budget::default()).unwrap();
    (ps, g, r)
}

fn assert_open_and_refuting(premises: &[&str], goal: &str) {
    let (ps, g, r) = run(premises, goal);
    let ProofResult::Open { branch, model, root, .. } = &r else { panic!("{goal}: {}", r.verdict()) };
    let universe = branch_universe(branch, &ps, &g);
    let report = check_jrc_conditions(model, &universe);
    assert!(report.passed(), "{goal}: {report}");
    let w = model.state(root).unwrap();
    let ev = RoutleyEvaluator::new(model);
    assert!(ps.iter().all(|p| ev.holds(w, p)));
    assert!(!ev.holds(w, &g), "{goal} holds at the root of its countermodel");
    assert!(verify_result(&r, &ps, &g, 2));
}

#[test]
fn sum_monotonicity_trace() {
    let (ps, g, r) = run(&[], "s:p ~> (s+t):p");
    let ProofResult::Closed(tree) = &r else { panic!("{}", r.verdict()) };
    let trace = tree.trace();
    assert_eq!(trace.len(), 9);
    assert_eq!(tree.rule_sequence(), vec![Rule::FRcf0, Rule::FJust, Rule::SumEdge, Rule::TJust]);
    let (_, last, rule, premises) = &trace[8];
    assert_eq!(**last, NodeExpr::Signed(f("p"), Sign::Plus, Label::plain(2)));
    assert_eq!(*rule, Some(Rule::TJust));
    assert_eq!(premises, &vec![3, 7]);
    assert_eq!(*trace[5].1, NodeExpr::Signed(f("p"), Sign::Minus, Label::plain(2)));
    assert!(verify_result(&r, &ps, &g, 2));
    let text = tree.to_string();
    assert!(text.contains("9. p, +2  [T: 3,7]"), "{text}");
}

#[test]
fn valid_sequents_close() {
    for (ps, g) in [(vec![], "p ~> p"), (vec!["p", "p ~> q"], "q"), (vec![], "(p & q) ~> p"), (vec![], "~~p ~> p")] {
        let (_, _, r) = run(&ps, g);
        assert!(r.is_closed(), "{g}: {}", r.verdict());
    }
}

#[test]
fn counterpossible_branch_model() {
    let (_, _, r) = run(&[], "(p & ~p) ~> q");
    let ProofResult::Open { model, .. } = &r else { panic!() };
    assert_eq!(model.states, vec!["w0", "w1", "w1s"]);
    assert_eq!(model.normal, vec![true, false, false]);
    assert_eq!(model.star, vec![0, 2, 1]);
    let p_states: Vec<usize> = (0..3).filter(|&w| model.valuation[w].contains("p")).collect();
    assert_eq!(p_states, vec![1]);
    assert!(model.valuation.iter().all(|v| !v.contains("q")));
    assert!(model.ternary.contains(&(0, 0, 0)) && model.ternary.contains(&(0, 1, 1)) && model.ternary.contains(&(0, 2, 2)));
    assert_open_and_refuting(&[], "(p & ~p) ~> q");
}

#[test]
fn excluded_middle_branch_model() {
    let (_, _, r) = run(&[], "q ~> (p | ~p)");
    let ProofResult::Open { model, .. } = &r else { panic!("{}", r.verdict()) };
    let w1s = model.state("w1s").unwrap();
    let p_states: Vec<usize> = (0..model.len()).filter(|&w| model.valuation[w].contains("p")).collect();
    assert_eq!(p_states, vec![w1s]);
    assert_open_and_refuting(&[], "q ~> (p | ~p)");
}

#[test]
fn paradoxes_stay_open() {
    for g in ["p ~> (q ~> p)", "~p ~> (p ~> q)", "p & ~p"] {
        assert_open_and_refuting(&[], g);
    }
}

#[test]
fn fabricated_open_result_is_rejected() {
    let (ps, g, r) = run(&[], "(p & ~p) ~> q");
    let ProofResult::Open { branch, mut model, root, tree } = r else { panic!() };
    model.formula_rels.clear();
    model.formula_rel_default = cjl::doc::RelDefault::Empty;
    let fake = ProofResult::Open { branch, model, root, tree };
    assert!(!verify_result(&fake, &ps, &g, 2));
}

#[test]
fn budget_exhaustion_is_reported() {
    let g = f("((p ~> q) ~> p) ~> p");
    let r = prove(&[], &g, Budget { max_fresh_labels: 2, max_steps: 50 }).unwrap();
    assert!(!r.is_closed());
    assert!(verify_result(&r, &[], &g, 1));
}

#[test]
fn deterministic() {
    let g = f("(s:p & t:q) ~> (s+t):p");
    let a = prove(&[], &g, Budget::default()).unwrap();
    let b = prove(&[], &g, Budget::default()).unwrap();
    assert_eq!(a.verdict(), b.verdict());
    assert_eq!(a.tree().map(|t| t.to_string()), b.tree().map(|t| t.to_string()));
}

#[test]
fn relational_implication_rules() {
    let (_, _, r) = run(&["p", "p -> q"], "q");
    assert!(r.is_closed(), "{}", r.verdict());
    assert_open_and_refuting(&[], "p -> (q -> p)");
}

#[test]
fn cross_check_examples() {
    let c = cross_check(&[], &f("s:p ~> (s+t):p"), Budget::default(), 3);
    assert_eq!((c.verdict, c.agreement), ("CLOSED", Agreement::Agree));
    assert!(c.countermodel.is_none());
    let c = cross_check(&[], &f("p ~> (q ~> p)"), Budget::default(), 3);
    assert_eq!((c.verdict, c.agreement), ("OPEN", Agreement::Agree));
    assert!(c.countermodel.is_some());
}

#[test]
fn broken_detachment_rule_is_caught() {
    let broken = Prover::new(Budget::default()).without_rule(Rule::TRcf);
    let c = cross_check_with(&broken, &[f("p"), f("p ~> q")], &f("q"), 2);
    assert!(matches!(c.agreement, Agreement::Contradiction(_)), "{:?}", c.agreement);
}

#[test]
fn falsifier_finds_counterpossible_model() {
    let g = f("(p & ~p) ~> q");
    let m = find_jrc_countermodel(&[], &g, 3).expect("countermodel");
    assert!(!m.eval("w0", &g).unwrap());
    assert!(find_jrc_countermodel(&[], &f("p ~> p"), 3).is_none());
}

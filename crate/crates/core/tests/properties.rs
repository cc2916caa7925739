use std::collections::{BTreeMap, BTreeSet};

use cjl::fixtures::{load_kripke, load_routley};
use cjl::hilbert::is_tautology;
use cjl::kripke::Evaluator;
use cjl::routley::RoutleyEvaluator;
use cjl::syntax::{atoms, check_dialect, subformulas};
use cjl::{parse_formula, print_formula, Dialect, Formula, Term};
use proptest::prelude::*;

fn term(d: Dialect) -> BoxedStrategy<Term> {
    let mut leaves = vec![Just(Term::var("x")).boxed(), Just(Term::var("y1")).boxed()];
    if !d.is_jrc() {
        leaves.push(Just(Term::constant("c2")).boxed());
    }
    prop::strategy::Union::new(leaves)
        .prop_recursive(2, 6, 2, move |inner| {
            let mut opts = vec![(inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)).boxed()];
            if !d.is_jrc() {
                opts.push(inner.clone().prop_map(Term::bang).boxed());
                opts.push((inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app(a, b)).boxed());
            }
            if d.allows_pair() {
                opts.push((inner, prop_oneof![Just("p"), Just("q")]).prop_map(|(t, a)| Term::pair(t, Formula::atom(a))).boxed());
            }
            prop::strategy::Union::new(opts)
        })
        .boxed()
}

fn formula(d: Dialect) -> BoxedStrategy<Formula> {
    prop_oneof![Just("p"), Just("q"), Just("r"), Just("p0")]
        .prop_map(Formula::atom)
        .prop_recursive(4, 24, 2, move |inner| {
            let mut opts = vec![
                inner.clone().prop_map(Formula::neg).boxed(),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)).boxed(),
                (term(d), inner.clone()).prop_map(|(t, a)| Formula::just(t, a)).boxed(),
            ];
            if d.is_jrc() {
                opts.push((inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::rel_imp(a, b)).boxed());
                opts.push((inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::rel_cf(a, b)).boxed());
            } else {
                opts.push((inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)).boxed());
                opts.push((inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::cf(a, b)).boxed());
            }
            if d.allows_box() {
                opts.push(inner.prop_map(Formula::boxed).boxed());
            }
            prop::strategy::Union::new(opts)
        })
        .boxed()
}

fn formula_in_any_dialect() -> impl Strategy<Value = (Dialect, Formula)> {
    prop::sample::select(Dialect::ALL.to_vec()).prop_flat_map(|d| formula(d).prop_map(move |f| (d, f)))
}

fn boolean() -> impl Strategy<Value = Formula> {
    prop_oneof![Just("p"), Just("q"), Just("r")].prop_map(Formula::atom).prop_recursive(4, 20, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::imp(a, b)),
        ]
    })
}

/// Truth-table evaluation of a boolean formula.
fn table_value(f: &Formula, v: &BTreeMap<String, bool>) -> bool {
    match f {
        Formula::Atom(a) => v[a],
        Formula::Neg(a) => !table_value(a, v),
        Formula::And(a, b) => table_value(a, v) && table_value(b, v),
        Formula::MatImp(a, b) => !table_value(a, v) || table_value(b, v),
        other => panic!("not boolean: {other}"),
    }
}

fn table_tautology(f: &Formula) -> bool {
    let names: Vec<String> = atoms(f).into_iter().collect();
    (0..1u32 << names.len()).all(|mask| {
        let v = names.iter().enumerate().map(|(i, a)| (a.clone(), mask >> i & 1 == 1)).collect();
        table_value(f, &v)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_round_trips((d, f) in formula_in_any_dialect()) {
        prop_assert!(check_dialect(&f, d).is_ok());
        let text = print_formula(&f);
        let back = parse_formula(&text, d).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, f);
    }

    #[test]
    fn base_formulas_belong_to_every_kripke_dialect(f in formula(Dialect::LPCplus)) {
        for d in Dialect::ALL.into_iter().filter(|d| !d.is_jrc()) {
            prop_assert!(check_dialect(&f, d).is_ok(), "{} rejected by {}", f, d);
        }
        let classical = subformulas(&f).iter().any(|g| matches!(g, Formula::MatImp(..) | Formula::Counterfactual(..)));
        prop_assert!(!classical || check_dialect(&f, Dialect::JRC).is_err());
    }

    #[test]
    fn subformulas_are_closed_and_contain_atoms(f in formula(Dialect::L)) {
        let subs = subformulas(&f);
        prop_assert!(subs.contains(&f));
        for a in atoms(&f) {
            prop_assert!(subs.contains(&Formula::atom(&a)));
        }
        for g in &subs {
            prop_assert!(subformulas(g).is_subset(&subs));
        }
    }

    #[test]
    fn double_negation_at_normal_kripke_states(f in formula(Dialect::L)) {
        for name in ["gettier.json", "mcginn.json", "aumann.json"] {
            let m = load_kripke(name).unwrap();
            let ev = Evaluator::new(&m);
            let (a, b) = (ev.truthset(&f), ev.truthset(&Formula::neg(Formula::neg(f.clone()))));
            for w in m.normal_states() {
                prop_assert_eq!(a[w], b[w]);
            }
        }
    }

    #[test]
    fn double_negation_under_an_involutive_star(f in formula(Dialect::JRC)) {
        for name in ["counterpossible.json", "excluded_middle.json", "sheep.json"] {
            let m = load_routley(name).unwrap();
            let ev = RoutleyEvaluator::new(&m);
            prop_assert_eq!(ev.truthset(&f), ev.truthset(&Formula::neg(Formula::neg(f.clone()))));
        }
    }

    #[test]
    fn tautology_check_matches_truth_tables(f in boolean()) {
        prop_assert_eq!(is_tautology(&f), table_tautology(&f));
        let lem = Formula::or(f.clone(), Formula::neg(f.clone()));
        prop_assert!(is_tautology(&lem));
    }

    #[test]
    fn atoms_survive_printing((_, f) in formula_in_any_dialect()) {
        let text = print_formula(&f);
        let found: BTreeSet<String> = atoms(&f);
        for a in found {
            prop_assert!(text.contains(&a));
        }
    }
}

//! Random generators and model samplers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use cjl::hilbert::{instantiate, is_tautology, SchemeId, Subst};
use cjl::kripke::{check_conditions, Condition, ConstantSpecification, Evaluator, KripkeModel, VariantProfile};
use cjl::routley::{check_jrc_conditions, RoutleyModel};
use cjl::syntax::{closure, subterms_into, terms};
use cjl::{Dialect, Formula, Term};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn atom(rng: &mut StdRng) -> Formula {
    Formula::atom(["p", "q"].choose(rng).unwrap())
}

pub fn jrc_term(rng: &mut StdRng) -> Term {
    match rng.gen_range(0..4) {
        0 => Term::var("x"),
        1 => Term::var("y"),
        2 => Term::sum(Term::var("x"), Term::var("y")),
        _ => Term::sum(Term::var("y"), Term::var("x")),
    }
}

/// JRC formula over atoms p, q and term variables x, y.
pub fn jrc_formula(rng: &mut StdRng, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return atom(rng);
    }
    let sub = |rng: &mut StdRng| jrc_formula(rng, depth - 1);
    match rng.gen_range(0..5) {
        0 => Formula::neg(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::rel_imp(sub(rng), sub(rng)),
        3 => Formula::rel_cf(sub(rng), sub(rng)),
        _ => Formula::just(jrc_term(rng), sub(rng)),
    }
}

/// Deterministic suite of distinct JRC sequents; about two thirds have a premise-free `~>` goal.
pub fn jrc_suite(rng: &mut StdRng, n: usize) -> Vec<(Vec<Formula>, Formula)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    while out.len() < n {
        let premises = if rng.gen_bool(0.25) { vec![jrc_formula(rng, 1)] } else { Vec::new() };
        let goal = if rng.gen_bool(0.7) {
            let (a, b) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
            Formula::rel_cf(jrc_formula(rng, a), jrc_formula(rng, b))
        } else {
            jrc_formula(rng, 2)
        };
        if seen.insert((premises.clone(), goal.clone())) {
            out.push((premises, goal));
        }
    }
    out
}

pub fn kripke_term(rng: &mut StdRng, d: Dialect) -> Term {
    let base = |rng: &mut StdRng| Term::var(["x", "y"].choose(rng).unwrap());
    match rng.gen_range(0..7) {
        0..=2 => base(rng),
        3 => Term::sum(base(rng), base(rng)),
        4 => Term::app(base(rng), base(rng)),
        5 => Term::bang(base(rng)),
        _ if d == Dialect::LPCint => Term::pair(base(rng), atom(rng)),
        _ => base(rng),
    }
}

/// Formula of the LPC family with at most `depth` nested connectives.
pub fn kripke_formula(rng: &mut StdRng, d: Dialect, depth: u32) -> Formula {
    if depth == 0 || rng.gen_bool(0.35) {
        return atom(rng);
    }
    let sub = |rng: &mut StdRng| kripke_formula(rng, d, depth - 1);
    let k = if d == Dialect::L { 6 } else { 5 };
    match rng.gen_range(0..k) {
        0 => Formula::neg(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::imp(sub(rng), sub(rng)),
        3 => Formula::cf(sub(rng), sub(rng)),
        4 => Formula::just(kripke_term(rng, d), sub(rng)),
        _ => Formula::boxed(sub(rng)),
    }
}

/// Random instance of a scheme; the tautology scheme draws from classic tautology shapes.
pub fn axiom_instance(rng: &mut StdRng, id: SchemeId, d: Dialect) -> Formula {
    let f = |rng: &mut StdRng| kripke_formula(rng, d, 1);
    if id == SchemeId::Ax(1) {
        let (a, b, c) = (f(rng), f(rng), f(rng));
        let taut = match rng.gen_range(0..6) {
            0 => Formula::imp(a.clone(), Formula::imp(b, a)),
            1 => Formula::imp(
                Formula::imp(a.clone(), Formula::imp(b.clone(), c.clone())),
                Formula::imp(Formula::imp(a.clone(), b), Formula::imp(a, c)),
            ),
            2 => Formula::imp(Formula::imp(Formula::neg(b.clone()), Formula::neg(a.clone())), Formula::imp(a, b)),
            3 => Formula::imp(Formula::and(a.clone(), b), a),
            4 => Formula::or(a.clone(), Formula::neg(a)),
            _ => Formula::imp(Formula::neg(Formula::neg(a.clone())), a),
        };
        assert!(is_tautology(&taut));
        return taut;
    }
    let mut s = Subst::default();
    for name in ["phi", "psi", "chi"] {
        s.formulas.insert(name.into(), f(rng));
    }
    for name in ["s", "t"] {
        let t = kripke_term(rng, d);
        s.terms.insert(name.into(), t);
    }
    instantiate(id, &s).expect("complete bindings")
}

fn purely_boolean(f: &Formula) -> bool {
    match f {
        Formula::Atom(_) => true,
        Formula::Neg(a) => purely_boolean(a),
        Formula::And(a, b) | Formula::MatImp(a, b) => purely_boolean(a) && purely_boolean(b),
        _ => false,
    }
}

fn rel_of(m: &KripkeModel, t: &Term, w: usize) -> BTreeSet<usize> {
    m.term_successors(t, w)
}

/// Draws a random model of at most `max_states` states for the dialect's profile and keeps it
/// only if it passes the condition check over `universe`. Bang edges stay inside the normal states.
pub fn sample_kripke(
    rng: &mut StdRng,
    d: Dialect,
    universe: &BTreeSet<Formula>,
    max_states: usize,
) -> Option<KripkeModel> {
    let profile = VariantProfile::for_dialect(d);
    let has = |c: Condition| profile.conditions.contains(&c);
    let u: Vec<Formula> = closure(universe.iter()).into_iter().collect();
    let n = rng.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut normal_names = vec![names[0].as_str()];
    for nm in &names[1..] {
        if rng.gen_bool(0.6) {
            normal_names.push(nm);
        }
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut m = KripkeModel::with_states(d, &refs, &normal_names);
    let atoms: BTreeSet<String> = u.iter().flat_map(cjl::syntax::atoms).collect();
    for w in 0..n {
        if m.normal[w] {
            m.valuation[w] = atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        } else {
            m.nonnormal_valuation[w] = u.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        }
    }
    let normal: Vec<usize> = m.normal_states().collect();
    let antecedents: BTreeSet<Formula> = u
        .iter()
        .filter_map(|f| match f {
            Formula::Counterfactual(a, _) if purely_boolean(a) => Some((**a).clone()),
            _ => None,
        })
        .collect();
    for phi in antecedents {
        if d == Dialect::LPCKplus || !rng.gen_bool(0.5) {
            continue;
        }
        let ts = Evaluator::new(&m).truthset(&phi);
        let mut rel = BTreeSet::new();
        for &w in &normal {
            for &v in &normal {
                if ts[v] && ((v == w) || rng.gen_bool(0.5)) {
                    rel.insert((w, v));
                }
            }
        }
        m.formula_rels.insert(phi, rel);
    }

    let mut all_terms = BTreeSet::new();
    for f in &u {
        for t in terms(f) {
            subterms_into(&t, &mut all_terms);
        }
    }
    let mut order: Vec<Term> = all_terms.into_iter().collect();
    order.sort_by_key(|t| t.to_string().len());
    for t in order {
        let mut rel = BTreeSet::new();
        let ev_model = m.clone();
        let ev = Evaluator::new(&ev_model);
        let holds = |w: usize, f: Formula| ev.holds(w, &f);
        for w in 0..n {
            let allowed: Vec<usize> = if !m.normal[w] {
                (0..n).collect()
            } else {
                match &t {
                    Term::Variable(_) | Term::Constant(_) => (0..n).collect(),
                    Term::Bang(_) if !has(Condition::C7) => (0..n).collect(),
                    Term::Sum(a, b) => rel_of(&m, a, w).intersection(&rel_of(&m, b, w)).copied().collect(),
                    Term::Bang(a) => {
                        let ra = rel_of(&m, a, w);
                        normal.iter().copied().filter(|&v| rel_of(&m, a, v).is_subset(&ra)).collect()
                    }
                    Term::App(s, r) => {
                        let mut ok: Vec<bool> = vec![true; n];
                        let prime = has(Condition::C5Prime);
                        let (rs, ss) = (rel_of(&m, r, w), rel_of(&m, s, w));
                        let phis: Vec<&Formula> =
                            u.iter().filter(|phi| rs.iter().all(|&v| ev.holds(v, phi))).collect();
                        let succ: Vec<Vec<Vec<usize>>> = phis
                            .iter()
                            .map(|phi| ss.iter().map(|&v| ev.formula_successors(phi, v)).collect())
                            .collect();
                        let justified = |i: usize, psi: &Formula, tp: &[bool]| {
                            if prime {
                                let ts = ev.truthset(&Formula::cf(phis[i].clone(), psi.clone()));
                                return normal.iter().any(|&v| rel_of(&m, s, v).iter().all(|&x| ts[x]));
                            }
                            ss.iter().zip(&succ[i]).all(|(&v, sv)| {
                                if m.normal[v] {
                                    sv.iter().all(|&x| tp[x])
                                } else {
                                    m.nonnormal_valuation[v].contains(&Formula::cf(phis[i].clone(), psi.clone()))
                                }
                            })
                        };
                        for psi in &u {
                            let tp = ev.truthset(psi);
                            if (0..n).all(|v| !ok[v] || tp[v]) {
                                continue;
                            }
                            if (0..phis.len()).any(|i| justified(i, psi, &tp)) {
                                for (v, o) in ok.iter_mut().enumerate() {
                                    *o &= tp[v];
                                }
                            }
                        }
                        (0..n).filter(|&v| ok[v]).collect()
                    }
                    Term::Pair(a, phi) => {
                        let mut ok: Vec<bool> = vec![true; n];
                        for psi in &u {
                            if holds(w, Formula::just((**a).clone(), psi.clone())) {
                                let cf = Formula::cf((**phi).clone(), psi.clone());
                                for (v, o) in ok.iter_mut().enumerate() {
                                    *o &= holds(v, cf.clone());
                                }
                            }
                        }
                        (0..n).filter(|&v| ok[v]).collect()
                    }
                }
            };
            if m.normal[w] && has(Condition::C6) {
                if !allowed.contains(&w) {
                    return None;
                }
                rel.insert((w, w));
            }
            for v in allowed {
                if rng.gen_bool(0.5) {
                    rel.insert((w, v));
                }
            }
        }
        m.term_rels.insert(t, rel);
    }
    let rep = check_conditions(&m, &profile, &u.iter().cloned().collect(), &ConstantSpecification::default());
    rep.passed().then_some(m)
}

/// Random Routley model of at most `max_states` states passing the JRC conditions over `universe`.
pub fn sample_routley(rng: &mut StdRng, universe: &BTreeSet<Formula>, max_states: usize) -> Option<RoutleyModel> {
    let n = rng.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    let mut normal_names = vec![names[0].as_str()];
    for nm in &names[1..] {
        if rng.gen_bool(0.5) {
            normal_names.push(nm);
        }
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut m = RoutleyModel::with_states(&refs, &normal_names);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    for pair in idx.chunks(2) {
        if let [a, b] = pair {
            if rng.gen_bool(0.6) {
                m.star[*a] = *b;
                m.star[*b] = *a;
            }
        }
    }
    for w in 0..n {
        for v in 0..n {
            for x in 0..n {
                let add = if m.normal[w] { v == x } else { rng.gen_bool(0.4) };
                if add {
                    m.ternary.insert((w, v, x));
                }
            }
        }
    }
    let u: Vec<Formula> = closure(universe.iter()).into_iter().collect();
    for w in 0..n {
        for a in ["p", "q"] {
            if rng.gen_bool(0.5) {
                m.valuation[w].insert(a.to_string());
            }
        }
    }
    for base in [Term::var("x"), Term::var("y")] {
        let rel = (0..n).flat_map(|w| (0..n).map(move |v| (w, v))).filter(|_| rng.gen_bool(0.4)).collect();
        m.term_rels.insert(base, rel);
    }
    for (a, b) in [("x", "y"), ("y", "x")] {
        let (ra, rb) = (&m.term_rels[&Term::var(a)], &m.term_rels[&Term::var(b)]);
        let rel = ra.intersection(rb).copied().filter(|_| rng.gen_bool(0.7)).collect();
        m.term_rels.insert(Term::sum(Term::var(a), Term::var(b)), rel);
    }
    let rep = check_jrc_conditions(&m, &u.iter().cloned().collect());
    rep.passed().then_some(m)
}

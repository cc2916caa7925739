//! Bounded countermodel search for both semantics, and prover/falsifier cross-checking.
//!
//! The search walks model descriptions bit by bit in a fixed order (false before true), so the
//! first model found is the first in canonical order. Partial descriptions are evaluated in
//! three-valued logic; a branch is cut as soon as the sequent or a frame condition is decided
//! against it. Every complete candidate is re-checked with the two-valued evaluator and the
//! full condition checker before it is returned.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::doc::RelDefault;
use crate::kripke::{check_conditions, Condition, ConstantSpecification, Evaluator, KripkeModel, Rel, VariantProfile};
use crate::routley::{check_jrc_conditions, RoutleyEvaluator, RoutleyModel};
use crate::syntax::{atoms, closure, terms, Dialect, Formula, Term};
use crate::tableau::{verify_result, Budget, ProofResult, Prover};

/// What the search ranges over, derived from a sequent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchSignature {
    pub atoms: BTreeSet<String>,
    pub terms: BTreeSet<Term>,
    pub antecedents: BTreeSet<Formula>,
    pub universe: BTreeSet<Formula>,
    pub bound: usize,
    pub dialect: Dialect,
}

impl SearchSignature {
    pub fn from_sequent(premises: &[Formula], goal: &Formula, dialect: Dialect, bound: usize) -> SearchSignature {
        let universe = closure(premises.iter().chain(std::iter::once(goal)));
        let mut at = BTreeSet::new();
        let mut ts = BTreeSet::new();
        let mut ants = BTreeSet::new();
        for f in &universe {
            at.extend(atoms(f));
            ts.extend(terms(f));
            if let Formula::Counterfactual(a, _) | Formula::RelCf(a, _) = f {
                ants.insert((**a).clone());
            }
        }
        SearchSignature { atoms: at, terms: ts, antecedents: ants, universe, bound, dialect }
    }
}

#[derive(Debug, Clone)]
pub enum Countermodel {
    Kripke(KripkeModel),
    Routley(RoutleyModel),
}

impl Countermodel {
    pub fn state_count(&self) -> usize {
        match self {
            Countermodel::Kripke(m) => m.len(),
            Countermodel::Routley(m) => m.len(),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            Countermodel::Kripke(m) => m.to_doc().to_json(),
            Countermodel::Routley(m) => m.to_doc().to_json(),
        }
    }
}

/// Searches up to `bound` states under the dialect's profile (and `TruthsetNormal` defaults for
/// the Kripke family). The refuting state is always `w0`.
pub fn find_countermodel(premises: &[Formula], goal: &Formula, dialect: Dialect, bound: usize) -> Option<Countermodel> {
    if dialect == Dialect::JRC {
        find_jrc_countermodel(premises, goal, bound).map(Countermodel::Routley)
    } else {
        let profile = VariantProfile::for_dialect(dialect);
        find_kripke_countermodel(premises, goal, &profile, RelDefault::TruthsetNormal, bound).map(Countermodel::Kripke)
    }
}

pub fn find_kripke_countermodel(
    premises: &[Formula],
    goal: &Formula,
    profile: &VariantProfile,
    default: RelDefault,
    bound: usize,
) -> Option<KripkeModel> {
    let sig = SearchSignature::from_sequent(premises, goal, profile.dialect, bound);
    let cs = ConstantSpecification::default();
    for n in 1..=bound {
        for normal in normal_sets(n, true) {
            let layout = Layout::new(&sig, Semantics::Kripke(default), n, normal, identity(n), &profile.conditions);
            let found = layout.search(premises, goal, &mut |lay, bits| {
                let m = lay.kripke_model(bits);
                let ev = Evaluator::new(&m);
                let ok = premises.iter().all(|p| ev.holds(0, p))
                    && !ev.holds(0, goal)
                    && check_conditions(&m, profile, &sig.universe, &cs).passed();
                ok.then_some(m)
            });
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

pub fn find_jrc_countermodel(premises: &[Formula], goal: &Formula, bound: usize) -> Option<RoutleyModel> {
    let sig = SearchSignature::from_sequent(premises, goal, Dialect::JRC, bound);
    let has_box = sig.universe.iter().any(|f| matches!(f, Formula::Box(_)));
    let has_neg = sig.universe.iter().any(|f| matches!(f, Formula::Neg(_)));
    for n in 1..=bound {
        for normal in normal_sets(n, has_box) {
            let stars = if has_neg { involutions(n) } else { vec![identity(n)] };
            for star in stars {
                let layout = Layout::new(&sig, Semantics::Routley, n, normal.clone(), star, &[]);
                let found = layout.search(premises, goal, &mut |lay, bits| {
                    let m = lay.routley_model(bits);
                    let ev = RoutleyEvaluator::new(&m);
                    let ok = premises.iter().all(|p| ev.holds(0, p))
                        && !ev.holds(0, goal)
                        && check_jrc_conditions(&m, &sig.universe).passed();
                    ok.then_some(m)
                });
                if found.is_some() {
                    return found;
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Cross-checking

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Agreement {
    Agree,
    Contradiction(String),
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct CrossCheck {
    pub verdict: &'static str,
    pub countermodel: Option<RoutleyModel>,
    pub agreement: Agreement,
}

pub fn cross_check(premises: &[Formula], goal: &Formula, budget: Budget, bound: usize) -> CrossCheck {
    cross_check_with(&Prover::new(budget), premises, goal, bound)
}

/// Cross-checks an arbitrary (possibly deliberately broken) prover against the falsifier.
pub fn cross_check_with(prover: &Prover, premises: &[Formula], goal: &Formula, bound: usize) -> CrossCheck {
    let countermodel = find_jrc_countermodel(premises, goal, bound);
    let result = match prover.prove(premises, goal) {
        Ok(r) => r,
        Err(e) => {
            return CrossCheck {
                verdict: "ERROR",
                countermodel,
                agreement: Agreement::Contradiction(format!("prover rejected the sequent: {e}")),
            }
        }
    };
    let agreement = match &result {
        ProofResult::Closed(_) if countermodel.is_some() => {
            Agreement::Contradiction("closed tableau but a countermodel exists".into())
        }
        ProofResult::Open { .. } if !verify_result(&result, premises, goal, 0) => {
            Agreement::Contradiction("extracted model does not refute the sequent".into())
        }
        ProofResult::Exhausted(_) if countermodel.is_none() => Agreement::Inconclusive,
        _ => Agreement::Agree,
    };
    CrossCheck { verdict: result.verdict(), countermodel, agreement }
}

// ---------------------------------------------------------------------------
// Search internals

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Normal-state sets containing state 0, by increasing bitmask; just `{0}` unless `all`.
fn normal_sets(n: usize, all: bool) -> Vec<Vec<bool>> {
    if !all {
        return vec![(0..n).map(|w| w == 0).collect()];
    }
    (0u32..1 << n)
        .filter(|m| m & 1 == 1)
        .map(|m| (0..n).map(|w| m >> w & 1 == 1).collect())
        .collect()
}

/// All involutions on `0..n` in lexicographic order.
fn involutions(n: usize) -> Vec<Vec<usize>> {
    fn go(star: &mut Vec<Option<usize>>, out: &mut Vec<Vec<usize>>) {
        let Some(w) = star.iter().position(|s| s.is_none()) else {
            out.push(star.iter().map(|s| s.unwrap()).collect());
            return;
        };
        for v in w..star.len() {
            if star[v].is_some() {
                continue;
            }
            star[w] = Some(v);
            star[v] = Some(w);
            go(star, out);
            star[v] = None;
            star[w] = None;
        }
    }
    let mut out = Vec::new();
    go(&mut vec![None; n], &mut out);
    out.sort();
    out
}

const F: u8 = 0;
const T: u8 = 1;
const U: u8 = 2;

fn not3(a: u8) -> u8 {
    match a {
        F => T,
        T => F,
        _ => U,
    }
}

fn and3(a: u8, b: u8) -> u8 {
    if a == F || b == F {
        F
    } else if a == T && b == T {
        T
    } else {
        U
    }
}

fn or3(a: u8, b: u8) -> u8 {
    not3(and3(not3(a), not3(b)))
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Fixed(bool),
    Bit(usize),
}

#[derive(Debug, Clone, Copy)]
enum Semantics {
    Kripke(RelDefault),
    Routley,
}

enum Node {
    Atom(usize),
    Neg(usize),
    And(usize, usize),
    Imp(usize, usize),
    /// Override index when the antecedent is overridable, antecedent node, consequent node.
    Cf(Option<usize>, usize, usize),
    RelImp(usize, usize),
    Just(usize, usize),
    Box(usize),
}

/// A literal of a frame-condition clause.
#[derive(Debug, Clone, Copy)]
enum Lit {
    Holds(usize, usize, bool),
    Term(usize, usize, usize, bool),
    Ant(usize, usize, usize, bool),
}

struct Layout<'s> {
    sig: &'s SearchSignature,
    sem: Semantics,
    n: usize,
    normal: Vec<bool>,
    star: Vec<usize>,
    formulas: Vec<Formula>,
    nodes: Vec<Node>,
    goal_idx: usize,
    premise_idx: Vec<usize>,
    atoms: Vec<String>,
    terms: Vec<Term>,
    ants: Vec<Formula>,
    ant_node: Vec<usize>,
    val: Vec<Slot>,
    nn: Vec<Slot>,
    term: Vec<Slot>,
    flag: Vec<Slot>,
    ov: Vec<Slot>,
    tern: Vec<Slot>,
    /// For each bit, the override flag that must be true for the bit to be free.
    guard: Vec<Option<usize>>,
    nbits: usize,
    /// Necessary frame conditions, each a disjunction of literals.
    clauses: Vec<Vec<Lit>>,
}

fn size(f: &Formula) -> usize {
    match f {
        Formula::Atom(_) => 1,
        Formula::Neg(a) | Formula::Box(a) | Formula::Just(_, a) => 1 + size(a),
        Formula::And(a, b)
        | Formula::MatImp(a, b)
        | Formula::Counterfactual(a, b)
        | Formula::RelImp(a, b)
        | Formula::RelCf(a, b) => 1 + size(a) + size(b),
    }
}

impl<'s> Layout<'s> {
    fn new(
        sig: &'s SearchSignature,
        sem: Semantics,
        n: usize,
        normal: Vec<bool>,
        star: Vec<usize>,
        conds: &[Condition],
    ) -> Self {
        let kripke = matches!(sem, Semantics::Kripke(_));
        let has = |c: Condition| kripke && conds.contains(&c);
        let universe: Vec<&Formula> = sig.universe.iter().collect();

        // Formulas the application and pair conditions quantify over, beyond the universe.
        let mut extra = BTreeSet::new();
        for t in &sig.terms {
            match t {
                Term::App(s, r) if has(Condition::C5) => {
                    for &phi in &universe {
                        extra.insert(Formula::just((**r).clone(), phi.clone()));
                        for &psi in &universe {
                            extra.insert(Formula::just((**s).clone(), Formula::cf(phi.clone(), psi.clone())));
                        }
                    }
                }
                Term::Pair(t, phi) if has(Condition::C8) => {
                    for &psi in &universe {
                        extra.insert(Formula::just((**t).clone(), psi.clone()));
                        extra.insert(Formula::cf((**phi).clone(), psi.clone()));
                    }
                }
                _ => {}
            }
        }
        let all = closure(sig.universe.iter().chain(extra.iter()));
        let mut formulas: Vec<Formula> = all.into_iter().collect();
        formulas.sort_by_key(size);
        let fidx: BTreeMap<&Formula, usize> = formulas.iter().enumerate().map(|(i, f)| (f, i)).collect();
        let atoms: Vec<String> = sig.atoms.iter().cloned().collect();
        let terms: Vec<Term> = sig.terms.iter().cloned().collect();
        let ants: Vec<Formula> = sig.antecedents.iter().cloned().collect();
        let aidx = |s: &str| atoms.iter().position(|a| a == s).unwrap();
        let tidx = |t: &Term| terms.iter().position(|u| u == t).unwrap();
        let kidx = |a: &Formula| ants.iter().position(|b| b == a);
        let nodes: Vec<Node> = formulas
            .iter()
            .map(|f| match f {
                Formula::Atom(p) => Node::Atom(aidx(p)),
                Formula::Neg(a) => Node::Neg(fidx[&**a]),
                Formula::And(a, b) => Node::And(fidx[&**a], fidx[&**b]),
                Formula::MatImp(a, b) => Node::Imp(fidx[&**a], fidx[&**b]),
                Formula::Counterfactual(a, b) | Formula::RelCf(a, b) => Node::Cf(kidx(a), fidx[&**a], fidx[&**b]),
                Formula::RelImp(a, b) => Node::RelImp(fidx[&**a], fidx[&**b]),
                Formula::Just(t, a) => Node::Just(tidx(t), fidx[&**a]),
                Formula::Box(a) => Node::Box(fidx[&**a]),
            })
            .collect();
        let ant_node: Vec<usize> = ants.iter().map(|a| fidx[a]).collect();
        let has_relimp = formulas.iter().any(|f| matches!(f, Formula::RelImp(..)));

        let mut nbits = 0;
        let mut guard = Vec::new();
        let mut fresh = |g: Option<usize>| {
            nbits += 1;
            guard.push(g);
            Slot::Bit(nbits - 1)
        };
        let mut val = Vec::new();
        for _ in &atoms {
            for &nw in &normal {
                val.push(if kripke && !nw { Slot::Fixed(false) } else { fresh(None) });
            }
        }
        let mut term = Vec::new();
        for _ in &terms {
            for (w, &nw) in normal.iter().enumerate() {
                for v in 0..n {
                    let reflexive = has(Condition::C6) && w == v && nw;
                    term.push(if reflexive { Slot::Fixed(true) } else { fresh(None) });
                }
            }
        }
        let mut flag = Vec::new();
        let mut ov = Vec::new();
        for _ in &ants {
            let fl = if kripke { fresh(None) } else { Slot::Fixed(true) };
            let g = match fl {
                Slot::Bit(b) => Some(b),
                Slot::Fixed(_) => None,
            };
            flag.push(fl);
            for &nw in &normal {
                for &nv in &normal {
                    ov.push(if kripke && !(nw && nv) { Slot::Fixed(false) } else { fresh(g) });
                }
            }
        }
        let mut tern = Vec::new();
        if !kripke {
            for &nw in &normal {
                for v in 0..n {
                    for u in 0..n {
                        tern.push(if nw {
                            Slot::Fixed(v == u)
                        } else if has_relimp {
                            fresh(None)
                        } else {
                            Slot::Fixed(false)
                        });
                    }
                }
            }
        }
        let mut nn = Vec::new();
        if kripke {
            for f in &formulas {
                for &nw in &normal {
                    nn.push(if nw || !sig.universe.contains(f) { Slot::Fixed(false) } else { fresh(None) });
                }
            }
        }

        let mut clauses = Vec::new();
        let scope: Vec<usize> = (0..n).filter(|&w| !kripke || normal[w]).collect();
        let normals: Vec<usize> = (0..n).filter(|&w| normal[w]).collect();
        for (k, &a) in ant_node.iter().enumerate() {
            for &w in &normals {
                for v in 0..n {
                    clauses.push(vec![Lit::Ant(k, w, v, false), Lit::Holds(a, v, true)]);
                }
            }
            for &w in &scope {
                clauses.push(vec![Lit::Holds(a, w, false), Lit::Ant(k, w, w, true)]);
            }
        }
        for (i, t) in terms.iter().enumerate() {
            match t {
                Term::Sum(l, r) => {
                    for &w in &scope {
                        for v in 0..n {
                            for part in [tidx(l), tidx(r)] {
                                clauses.push(vec![Lit::Term(i, w, v, false), Lit::Term(part, w, v, true)]);
                            }
                        }
                    }
                }
                Term::App(s, r) if has(Condition::C5) => {
                    for &phi in &universe {
                        let rj = fidx[&Formula::just((**r).clone(), phi.clone())];
                        for &psi in &universe {
                            let sj = fidx[&Formula::just((**s).clone(), Formula::cf(phi.clone(), psi.clone()))];
                            for &w in &normals {
                                for v in 0..n {
                                    clauses.push(vec![
                                        Lit::Holds(sj, w, false),
                                        Lit::Holds(rj, w, false),
                                        Lit::Term(i, w, v, false),
                                        Lit::Holds(fidx[psi], v, true),
                                    ]);
                                }
                            }
                        }
                    }
                }
                Term::Bang(inner) if has(Condition::C7) => {
                    let j = tidx(inner);
                    for &w in &normals {
                        for v in 0..n {
                            for u in 0..n {
                                clauses.push(vec![Lit::Term(i, w, v, false), Lit::Term(j, v, u, false), Lit::Term(j, w, u, true)]);
                            }
                        }
                    }
                }
                Term::Pair(t, phi) if has(Condition::C8) => {
                    for &psi in &universe {
                        let tj = fidx[&Formula::just((**t).clone(), psi.clone())];
                        let cf = fidx[&Formula::cf((**phi).clone(), psi.clone())];
                        for &w in &normals {
                            for v in 0..n {
                                clauses.push(vec![Lit::Holds(tj, w, false), Lit::Term(i, w, v, false), Lit::Holds(cf, v, true)]);
                            }
                        }
                    }
                }
                _ => {}
            }
        }

        Layout {
            sig,
            sem,
            n,
            normal,
            star,
            formulas,
            nodes,
            goal_idx: 0,
            premise_idx: Vec::new(),
            atoms,
            terms,
            ants,
            ant_node,
            val,
            nn,
            term,
            flag,
            ov,
            tern,
            guard,
            nbits,
            clauses,
        }
    }

    fn get(&self, bits: &[u8], s: Slot) -> u8 {
        match s {
            Slot::Fixed(b) => b as u8,
            Slot::Bit(i) => bits[i],
        }
    }

    fn term_rel(&self, bits: &[u8], t: usize, w: usize, v: usize) -> u8 {
        self.get(bits, self.term[(t * self.n + w) * self.n + v])
    }

    /// `w R_φ v` for the antecedent at node `a`, overridable when `k` is given.
    fn ant_rel(&self, bits: &[u8], tv: &[u8], k: Option<usize>, a: usize, w: usize, v: usize) -> u8 {
        let ov = k.map(|k| self.get(bits, self.ov[(k * self.n + w) * self.n + v]));
        let Semantics::Kripke(default) = self.sem else { return ov.unwrap_or(tv[a * self.n + v]) };
        let av = tv[a * self.n + v];
        let d = match default {
            RelDefault::TruthsetNormal => and3(av, self.normal[v] as u8),
            RelDefault::TruthsetAll => av,
            RelDefault::Empty => F,
        };
        let Some(k) = k else { return d };
        let ov = ov.unwrap();
        match self.get(bits, self.flag[k]) {
            T => ov,
            F => d,
            _ if ov == d => d,
            _ => U,
        }
    }

    fn lit(&self, bits: &[u8], tv: &[u8], l: Lit) -> u8 {
        let (v, pos) = match l {
            Lit::Holds(i, w, pos) => (tv[i * self.n + w], pos),
            Lit::Term(t, w, v, pos) => (self.term_rel(bits, t, w, v), pos),
            Lit::Ant(k, w, v, pos) => (self.ant_rel(bits, tv, Some(k), self.ant_node[k], w, v), pos),
        };
        if pos {
            v
        } else {
            not3(v)
        }
    }

    fn evaluate(&self, bits: &[u8]) -> Vec<u8> {
        let n = self.n;
        let mut tv = vec![U; self.formulas.len() * n];
        for (i, node) in self.nodes.iter().enumerate() {
            for w in 0..n {
                let kripke_nn = matches!(self.sem, Semantics::Kripke(_)) && !self.normal[w];
                let val = if kripke_nn {
                    self.get(bits, self.nn[i * n + w])
                } else {
                    match *node {
                        Node::Atom(a) => self.get(bits, self.val[a * n + w]),
                        Node::Neg(a) => match self.sem {
                            Semantics::Kripke(_) => not3(tv[a * n + w]),
                            Semantics::Routley => not3(tv[a * n + self.star[w]]),
                        },
                        Node::And(a, b) => and3(tv[a * n + w], tv[b * n + w]),
                        Node::Imp(a, b) => or3(not3(tv[a * n + w]), tv[b * n + w]),
                        Node::Cf(k, a, b) => (0..n).fold(T, |acc, v| {
                            and3(acc, or3(not3(self.ant_rel(bits, &tv, k, a, w, v)), tv[b * n + v]))
                        }),
                        Node::RelImp(a, b) => {
                            let mut acc = T;
                            for v in 0..n {
                                for u in 0..n {
                                    let r = self.get(bits, self.tern[(w * n + v) * n + u]);
                                    acc = and3(acc, or3(not3(r), or3(not3(tv[a * n + v]), tv[b * n + u])));
                                }
                            }
                            acc
                        }
                        Node::Just(t, a) => (0..n).fold(T, |acc, v| {
                            and3(acc, or3(not3(self.term_rel(bits, t, w, v)), tv[a * n + v]))
                        }),
                        Node::Box(a) => {
                            (0..n).filter(|&v| self.normal[v]).fold(T, |acc, v| and3(acc, tv[a * n + v]))
                        }
                    }
                };
                tv[i * n + w] = val;
            }
        }
        tv
    }

    /// False when the partial description can no longer extend to a countermodel.
    fn viable(&self, bits: &[u8], tv: &[u8]) -> bool {
        let n = self.n;
        if tv[self.goal_idx * n] == T || self.premise_idx.iter().any(|&p| tv[p * n] == F) {
            return false;
        }
        self.clauses.iter().all(|c| c.iter().fold(F, |acc, &l| or3(acc, self.lit(bits, tv, l))) != F)
    }

    fn search<M>(
        mut self,
        premises: &[Formula],
        goal: &Formula,
        accept: &mut dyn FnMut(&Layout, &[u8]) -> Option<M>,
    ) -> Option<M> {
        let formulas = &self.formulas;
        let pos = |f: &Formula| formulas.iter().position(|g| g == f).expect("sequent formula in layout");
        let (goal_idx, premise_idx) = (pos(goal), premises.iter().map(pos).collect());
        self.goal_idx = goal_idx;
        self.premise_idx = premise_idx;
        let mut bits = vec![U; self.nbits];
        self.dfs(&mut bits, accept)
    }

    /// The first unassigned bit that the sequent's value at state 0 still depends on, then one
    /// deciding an open frame-condition clause, then the lowest unassigned bit.
    fn next_bit(&self, bits: &[u8], tv: &[u8]) -> Option<usize> {
        let mut seen = BTreeSet::new();
        std::iter::once(self.goal_idx)
            .chain(self.premise_idx.iter().copied())
            .find_map(|i| self.relevant(bits, tv, i, 0, &mut seen))
            .or_else(|| self.obligation(bits, tv, &mut seen))
            .or_else(|| bits.iter().position(|&b| b == U))
    }

    fn obligation(&self, bits: &[u8], tv: &[u8], seen: &mut BTreeSet<(usize, usize)>) -> Option<usize> {
        let n = self.n;
        for c in &self.clauses {
            if c.iter().fold(F, |acc, &l| or3(acc, self.lit(bits, tv, l))) != U {
                continue;
            }
            for &l in c {
                if self.lit(bits, tv, l) != U {
                    continue;
                }
                let x = match l {
                    Lit::Holds(i, w, _) => self.relevant(bits, tv, i, w, seen),
                    Lit::Term(t, w, v, _) => self.free(bits, self.term[(t * n + w) * n + v]),
                    Lit::Ant(k, w, v, _) => self
                        .free(bits, self.flag[k])
                        .or_else(|| self.free(bits, self.ov[(k * n + w) * n + v]))
                        .or_else(|| self.relevant(bits, tv, self.ant_node[k], v, seen)),
                };
                if x.is_some() {
                    return x;
                }
            }
        }
        None
    }

    fn free(&self, bits: &[u8], s: Slot) -> Option<usize> {
        match s {
            Slot::Bit(b) if bits[b] == U => Some(self.guard[b].filter(|&g| bits[g] == U).unwrap_or(b)),
            _ => None,
        }
    }

    fn relevant(&self, bits: &[u8], tv: &[u8], i: usize, w: usize, seen: &mut BTreeSet<(usize, usize)>) -> Option<usize> {
        let n = self.n;
        if tv[i * n + w] != U || !seen.insert((i, w)) {
            return None;
        }
        if matches!(self.sem, Semantics::Kripke(_)) && !self.normal[w] {
            return self.free(bits, self.nn[i * n + w]);
        }
        let open = |j: usize, v: usize| tv[j * n + v] == U;
        match self.nodes[i] {
            Node::Atom(a) => self.free(bits, self.val[a * n + w]),
            Node::Neg(a) => match self.sem {
                Semantics::Kripke(_) => self.relevant(bits, tv, a, w, seen),
                Semantics::Routley => self.relevant(bits, tv, a, self.star[w], seen),
            },
            Node::And(a, b) | Node::Imp(a, b) => {
                self.relevant(bits, tv, a, w, seen).or_else(|| self.relevant(bits, tv, b, w, seen))
            }
            Node::Cf(k, a, b) => {
                if let Some(f) = k.and_then(|k| self.free(bits, self.flag[k])) {
                    return Some(f);
                }
                for v in 0..n {
                    if self.ant_rel(bits, tv, k, a, w, v) == U {
                        let r = k.and_then(|k| self.free(bits, self.ov[(k * n + w) * n + v]));
                        if let Some(x) = r.or_else(|| self.relevant(bits, tv, a, v, seen)) {
                            return Some(x);
                        }
                    }
                }
                (0..n)
                    .filter(|&v| self.ant_rel(bits, tv, k, a, w, v) != F && open(b, v))
                    .find_map(|v| self.relevant(bits, tv, b, v, seen))
            }
            Node::RelImp(a, b) => {
                for v in 0..n {
                    for u in 0..n {
                        if let Some(x) = self.free(bits, self.tern[(w * n + v) * n + u]) {
                            return Some(x);
                        }
                    }
                }
                for v in 0..n {
                    for u in 0..n {
                        if self.get(bits, self.tern[(w * n + v) * n + u]) == T && tv[b * n + u] != T {
                            if let Some(x) = self.relevant(bits, tv, a, v, seen) {
                                return Some(x);
                            }
                            if tv[a * n + v] != F {
                                if let Some(x) = self.relevant(bits, tv, b, u, seen) {
                                    return Some(x);
                                }
                            }
                        }
                    }
                }
                None
            }
            Node::Just(t, a) => {
                if let Some(x) = (0..n).find_map(|v| self.free(bits, self.term[(t * n + w) * n + v])) {
                    return Some(x);
                }
                (0..n)
                    .filter(|&v| self.term_rel(bits, t, w, v) == T && open(a, v))
                    .find_map(|v| self.relevant(bits, tv, a, v, seen))
            }
            Node::Box(a) => (0..n).filter(|&v| self.normal[v]).find_map(|v| self.relevant(bits, tv, a, v, seen)),
        }
    }

    fn dfs<M>(&self, bits: &mut Vec<u8>, accept: &mut dyn FnMut(&Layout, &[u8]) -> Option<M>) -> Option<M> {
        let tv = self.evaluate(bits);
        if !self.viable(bits, &tv) {
            return None;
        }
        let Some(bit) = self.next_bit(bits, &tv) else {
            return accept(self, bits);
        };
        let forced_false = self.guard[bit].is_some_and(|g| bits[g] == F);
        for b in [F, T] {
            if b == T && forced_false {
                break;
            }
            bits[bit] = b;
            if let Some(m) = self.dfs(bits, accept) {
                return Some(m);
            }
        }
        bits[bit] = U;
        None
    }

    fn names(&self) -> Vec<String> {
        (0..self.n).map(|w| format!("w{w}")).collect()
    }

    fn rel_of(&self, bits: &[u8], slots: &[Slot]) -> Rel {
        let n = self.n;
        (0..n * n).filter(|&i| self.get(bits, slots[i]) == T).map(|i| (i / n, i % n)).collect()
    }

    fn kripke_model(&self, bits: &[u8]) -> KripkeModel {
        let Semantics::Kripke(default) = self.sem else { unreachable!() };
        let names = self.names();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let normal: Vec<&str> = refs.iter().zip(&self.normal).filter(|(_, b)| **b).map(|(s, _)| *s).collect();
        let mut m = KripkeModel::with_states(self.sig.dialect, &refs, &normal);
        m.formula_rel_default = default;
        let n = self.n;
        for (a, p) in self.atoms.iter().enumerate() {
            for w in 0..n {
                if self.get(bits, self.val[a * n + w]) == T {
                    m.valuation[w].insert(p.clone());
                }
            }
        }
        for (i, f) in self.formulas.iter().enumerate() {
            for w in 0..n {
                if self.get(bits, self.nn[i * n + w]) == T {
                    m.nonnormal_valuation[w].insert(f.clone());
                }
            }
        }
        for (t, term) in self.terms.iter().enumerate() {
            m.term_rels.insert(term.clone(), self.rel_of(bits, &self.term[t * n * n..(t + 1) * n * n]));
        }
        for (k, a) in self.ants.iter().enumerate() {
            if self.get(bits, self.flag[k]) == T {
                m.formula_rels.insert(a.clone(), self.rel_of(bits, &self.ov[k * n * n..(k + 1) * n * n]));
            }
        }
        m
    }

    fn routley_model(&self, bits: &[u8]) -> RoutleyModel {
        let names = self.names();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let normal: Vec<&str> = refs.iter().zip(&self.normal).filter(|(_, b)| **b).map(|(s, _)| *s).collect();
        let mut m = RoutleyModel::with_states(&refs, &normal);
        m.star = self.star.clone();
        let n = self.n;
        for (a, p) in self.atoms.iter().enumerate() {
            for w in 0..n {
                if self.get(bits, self.val[a * n + w]) == T {
                    m.valuation[w].insert(p.clone());
                }
            }
        }
        for (t, term) in self.terms.iter().enumerate() {
            m.term_rels.insert(term.clone(), self.rel_of(bits, &self.term[t * n * n..(t + 1) * n * n]));
        }
        for (k, a) in self.ants.iter().enumerate() {
            m.formula_rels.insert(a.clone(), self.rel_of(bits, &self.ov[k * n * n..(k + 1) * n * n]));
        }
        for w in 0..n {
            for v in 0..n {
                for u in 0..n {
                    if self.get(bits, self.tern[(w * n + v) * n + u]) == T {
                        m.ternary.insert((w, v, u));
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn involutions_of_three() {
        assert_eq!(involutions(3).len(), 4);
        assert_eq!(involutions(1), vec![vec![0]]);
    }

    #[test]
    fn kleene_tables() {
        assert_eq!(or3(U, T), T);
        assert_eq!(and3(U, F), F);
        assert_eq!(not3(U), U);
    }

    #[test]
    fn excluded_middle_fails_in_jrc() {
        let g = parse_formula("p | ~p", Dialect::JRC).unwrap();
        let m = find_jrc_countermodel(&[], &g, 2).expect("countermodel");
        assert!(!m.eval("w0", &g).unwrap());
    }

    #[test]
    fn detachment_has_no_countermodel() {
        let p = |s| parse_formula(s, Dialect::JRC).unwrap();
        assert!(find_jrc_countermodel(&[p("p"), p("p ~> q")], &p("q"), 3).is_none());
    }
}

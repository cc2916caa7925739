//! Finite Routley models for JRC.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::doc::{index_states, lookup, ModelDoc, ModelError, RelDefault};
use crate::kripke::{Rel, Witness};
use crate::syntax::{check_dialect, closure, parse_formula, parse_term, subterms_into, terms, Dialect, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutleyModel {
    pub states: Vec<String>,
    pub normal: Vec<bool>,
    pub star: Vec<usize>,
    pub ternary: BTreeSet<(usize, usize, usize)>,
    pub formula_rels: BTreeMap<Formula, Rel>,
    pub formula_rel_default: RelDefault,
    pub term_rels: BTreeMap<Term, Rel>,
    /// Atoms true at each state.
    pub valuation: Vec<BTreeSet<String>>,
}

impl RoutleyModel {
    /// Model with identity star, no relations and an empty valuation.
    pub fn with_states(names: &[&str], normal: &[&str]) -> RoutleyModel {
        let states: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        RoutleyModel {
            normal: states.iter().map(|s| normal.contains(&s.as_str())).collect(),
            star: (0..states.len()).collect(),
            ternary: BTreeSet::new(),
            formula_rels: BTreeMap::new(),
            formula_rel_default: RelDefault::TruthsetAll,
            term_rels: BTreeMap::new(),
            valuation: vec![BTreeSet::new(); states.len()],
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, name: &str) -> Result<usize, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn normal_states(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&w| self.normal[w])
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<RoutleyModel, ModelError> {
        if !doc.dialect.is_jrc() {
            return Err(ModelError::WrongKind { expected: "JRC", found: doc.dialect });
        }
        let d = Dialect::JRC;
        let idx = index_states(&doc.states)?;
        let n = doc.states.len();
        let mut m = RoutleyModel {
            states: doc.states.clone(),
            normal: vec![false; n],
            star: (0..n).collect(),
            ternary: BTreeSet::new(),
            formula_rels: BTreeMap::new(),
            formula_rel_default: doc.formula_rel_default,
            term_rels: BTreeMap::new(),
            valuation: vec![BTreeSet::new(); n],
        };
        for s in &doc.normal {
            m.normal[lookup(&idx, s)?] = true;
        }
        for (a, b) in &doc.star {
            m.star[lookup(&idx, a)?] = lookup(&idx, b)?;
        }
        for (a, b, c) in &doc.ternary {
            m.ternary.insert((lookup(&idx, a)?, lookup(&idx, b)?, lookup(&idx, c)?));
        }
        let syn = |ctx: &str| {
            let ctx = ctx.to_string();
            move |source| ModelError::Syntax { context: ctx.clone(), source }
        };
        for (t, pairs) in &doc.term_rels {
            let rel = m.term_rels.entry(parse_term(t, d).map_err(syn(t))?).or_default();
            for (a, b) in pairs {
                rel.insert((lookup(&idx, a)?, lookup(&idx, b)?));
            }
        }
        for (f, pairs) in &doc.formula_rels {
            let rel = m.formula_rels.entry(parse_formula(f, d).map_err(syn(f))?).or_default();
            for (a, b) in pairs {
                rel.insert((lookup(&idx, a)?, lookup(&idx, b)?));
            }
        }
        for (s, atoms) in &doc.valuation {
            let w = lookup(&idx, s)?;
            for a in atoms {
                match parse_formula(a, d).map_err(syn(a))? {
                    Formula::Atom(p) => {
                        m.valuation[w].insert(p);
                    }
                    _ => return Err(ModelError::ValuationKind(s.clone())),
                }
            }
        }
        if let Some(s) = doc.nonnormal_valuation.keys().next() {
            return Err(ModelError::ValuationKind(s.clone()));
        }
        if n == 0 || !m.normal.iter().any(|&b| b) {
            return Err(ModelError::Empty);
        }
        Ok(m)
    }

    pub fn to_doc(&self) -> ModelDoc {
        let name = |i: usize| self.states[i].clone();
        let pairs = |r: &Rel| r.iter().map(|&(a, b)| (name(a), name(b))).collect::<Vec<_>>();
        ModelDoc {
            dialect: Dialect::JRC,
            states: self.states.clone(),
            normal: self.normal_states().map(name).collect(),
            term_rels: self.term_rels.iter().map(|(t, r)| (t.to_string(), pairs(r))).collect(),
            formula_rels: self.formula_rels.iter().map(|(f, r)| (f.to_string(), pairs(r))).collect(),
            formula_rel_default: self.formula_rel_default,
            valuation: (0..self.len())
                .map(|w| (name(w), self.valuation[w].iter().cloned().collect()))
                .collect(),
            nonnormal_valuation: BTreeMap::new(),
            star: (0..self.len())
                .filter(|&w| self.star[w] != w)
                .map(|w| (name(w), name(self.star[w])))
                .collect(),
            ternary: self.ternary.iter().map(|&(a, b, c)| (name(a), name(b), name(c))).collect(),
        }
    }

    fn check(&self, f: &Formula) -> Result<(), ModelError> {
        check_dialect(f, Dialect::JRC).map_err(|reason| ModelError::Dialect { dialect: Dialect::JRC, reason })
    }

    /// Truth of a JRC formula at the named state.
    pub fn eval(&self, state: &str, f: &Formula) -> Result<bool, ModelError> {
        self.check(f)?;
        let w = self.state(state)?;
        Ok(RoutleyEvaluator::new(self).holds(w, f))
    }

    pub fn truthset(&self, f: &Formula) -> Result<BTreeSet<String>, ModelError> {
        self.check(f)?;
        let ts = RoutleyEvaluator::new(self).truthset(f);
        Ok((0..self.len()).filter(|&w| ts[w]).map(|w| self.states[w].clone()).collect())
    }

    /// Every normal state satisfying all premises satisfies the goal.
    pub fn consequence(&self, premises: &[Formula], goal: &Formula) -> Result<bool, ModelError> {
        for f in premises.iter().chain(std::iter::once(goal)) {
            self.check(f)?;
        }
        let ev = RoutleyEvaluator::new(self);
        Ok(self
            .normal_states()
            .all(|w| !premises.iter().all(|p| ev.holds(w, p)) || ev.holds(w, goal)))
    }

    pub fn valid_in_model(&self, f: &Formula) -> Result<bool, ModelError> {
        self.consequence(&[], f)
    }

    pub fn term_successors(&self, t: &Term, w: usize) -> BTreeSet<usize> {
        self.term_rels
            .get(t)
            .map(|r| r.iter().filter(|p| p.0 == w).map(|p| p.1).collect())
            .unwrap_or_default()
    }
}

pub struct RoutleyEvaluator<'m> {
    m: &'m RoutleyModel,
    memo: RefCell<HashMap<Formula, Vec<bool>>>,
}

impl<'m> RoutleyEvaluator<'m> {
    pub fn new(m: &'m RoutleyModel) -> Self {
        RoutleyEvaluator { m, memo: RefCell::new(HashMap::new()) }
    }

    pub fn holds(&self, w: usize, f: &Formula) -> bool {
        self.truthset(f)[w]
    }

    pub fn truthset(&self, f: &Formula) -> Vec<bool> {
        if let Some(v) = self.memo.borrow().get(f) {
            return v.clone();
        }
        let v = self.compute(f);
        self.memo.borrow_mut().insert(f.clone(), v.clone());
        v
    }

    pub fn formula_successors(&self, phi: &Formula, w: usize) -> Vec<usize> {
        if let Some(rel) = self.m.formula_rels.get(phi) {
            return rel.iter().filter(|p| p.0 == w).map(|p| p.1).collect();
        }
        match self.m.formula_rel_default {
            RelDefault::Empty => Vec::new(),
            RelDefault::TruthsetAll => {
                let ts = self.truthset(phi);
                (0..self.m.len()).filter(|&v| ts[v]).collect()
            }
            RelDefault::TruthsetNormal => {
                let ts = self.truthset(phi);
                (0..self.m.len()).filter(|&v| ts[v] && self.m.normal[v]).collect()
            }
        }
    }

    fn compute(&self, f: &Formula) -> Vec<bool> {
        let m = self.m;
        let n = m.len();
        match f {
            Formula::Atom(p) => (0..n).map(|w| m.valuation[w].contains(p)).collect(),
            Formula::Neg(a) => {
                let ta = self.truthset(a);
                (0..n).map(|w| !ta[m.star[w]]).collect()
            }
            Formula::And(a, b) => {
                let (ta, tb) = (self.truthset(a), self.truthset(b));
                (0..n).map(|w| ta[w] && tb[w]).collect()
            }
            Formula::RelImp(a, b) => {
                let (ta, tb) = (self.truthset(a), self.truthset(b));
                let mut out = vec![true; n];
                for &(w, v, u) in &m.ternary {
                    if ta[v] && !tb[u] {
                        out[w] = false;
                    }
                }
                out
            }
            Formula::RelCf(a, b) => {
                let tb = self.truthset(b);
                (0..n).map(|w| self.formula_successors(a, w).into_iter().all(|v| tb[v])).collect()
            }
            Formula::Just(t, a) => {
                let ta = self.truthset(a);
                (0..n).map(|w| m.term_successors(t, w).into_iter().all(|v| ta[v])).collect()
            }
            Formula::Box(a) => {
                let ta = self.truthset(a);
                let all = m.normal_states().all(|v| ta[v]);
                vec![all; n]
            }
            Formula::MatImp(..) | Formula::Counterfactual(..) => vec![false; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum JrcCondition {
    StarInvolution,
    Normality,
    C1,
    C2,
    C3,
}

impl fmt::Display for JrcCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JrcCondition::StarInvolution => "star involution",
            JrcCondition::Normality => "normality",
            JrcCondition::C1 => "1",
            JrcCondition::C2 => "2",
            JrcCondition::C3 => "3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JrcResult {
    pub condition: JrcCondition,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JrcReport {
    pub results: Vec<JrcResult>,
}

impl JrcReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn result(&self, c: JrcCondition) -> Option<&JrcResult> {
        self.results.iter().find(|r| r.condition == c)
    }
}

impl fmt::Display for JrcReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile JRC")?;
        for r in &self.results {
            match &r.witness {
                None => writeln!(f, "  condition {}: pass", r.condition)?,
                Some(w) => writeln!(f, "  condition {}: FAIL ({w})", r.condition)?,
            }
        }
        Ok(())
    }
}

/// Checks the JRC frame conditions, quantifying formulas over `universe`.
pub fn check_jrc_conditions(m: &RoutleyModel, universe: &BTreeSet<Formula>) -> JrcReport {
    let u: Vec<Formula> = closure(universe.iter()).into_iter().collect();
    let ev = RoutleyEvaluator::new(m);
    let name = |w: usize| m.states[w].clone();
    let wit = |states: &[usize], formulas: &[&Formula], terms: &[&Term]| Witness {
        states: states.iter().map(|&w| name(w)).collect(),
        formulas: formulas.iter().map(|&f| f.clone()).collect(),
        terms: terms.iter().map(|&t| t.clone()).collect(),
    };
    let n = m.len();

    let involution = (0..n).find(|&w| m.star[m.star[w]] != w).map(|w| wit(&[w], &[], &[]));

    let normality = (|| {
        for w in m.normal_states() {
            for v in 0..n {
                for x in 0..n {
                    if m.ternary.contains(&(w, v, x)) != (v == x) {
                        return Some(wit(&[w, v, x], &[], &[]));
                    }
                }
            }
        }
        None
    })();

    let c1 = (|| {
        for w in m.normal_states() {
            for phi in &u {
                let ts = ev.truthset(phi);
                if let Some(v) = ev.formula_successors(phi, w).into_iter().find(|&v| !ts[v]) {
                    return Some(wit(&[w, v], &[phi], &[]));
                }
            }
        }
        None
    })();

    let c2 = (|| {
        for w in 0..n {
            for phi in &u {
                if ev.holds(w, phi) && !ev.formula_successors(phi, w).contains(&w) {
                    return Some(wit(&[w], &[phi], &[]));
                }
            }
        }
        None
    })();

    let mut tset = BTreeSet::new();
    for f in &u {
        tset.extend(terms(f));
    }
    for t in m.term_rels.keys() {
        subterms_into(t, &mut tset);
    }
    let c3 = (|| {
        for t in &tset {
            let Term::Sum(a, b) = t else { continue };
            for w in 0..n {
                let (ra, rb) = (m.term_successors(a, w), m.term_successors(b, w));
                if let Some(v) = m.term_successors(t, w).into_iter().find(|v| !ra.contains(v) || !rb.contains(v)) {
                    return Some(wit(&[w, v], &[], &[a, b]));
                }
            }
        }
        None
    })();

    let results = [
        (JrcCondition::StarInvolution, involution),
        (JrcCondition::Normality, normality),
        (JrcCondition::C1, c1),
        (JrcCondition::C2, c2),
        (JrcCondition::C3, c3),
    ]
    .into_iter()
    .map(|(condition, witness)| JrcResult { condition, passed: witness.is_none(), witness })
    .collect();
    JrcReport { results }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        parse_formula(s, Dialect::JRC).unwrap()
    }

    #[test]
    fn star_drives_negation() {
        let mut m = RoutleyModel::with_states(&["a", "b"], &["a"]);
        m.star = vec![1, 0];
        m.valuation[0].insert("p".into());
        assert!(m.eval("a", &f("p & ~p")).unwrap());
        assert!(!m.eval("b", &f("p | ~p")).unwrap());
        assert!(m.eval("a", &f("~~p")).unwrap());
    }

    #[test]
    fn broken_involution_is_reported() {
        let mut m = RoutleyModel::with_states(&["w0", "w1", "w0s"], &["w0"]);
        m.star = vec![1, 2, 1];
        for v in 0..3 {
            m.ternary.insert((0, v, v));
        }
        let r = check_jrc_conditions(&m, &BTreeSet::new());
        let inv = r.result(JrcCondition::StarInvolution).unwrap();
        assert_eq!(inv.witness.as_ref().unwrap().states, vec!["w0"]);
        assert!(r.result(JrcCondition::Normality).unwrap().passed);
    }
}

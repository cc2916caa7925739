//! Finite relational models for the LPC⁺ family: truth, frame conditions, consequence.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::doc::{index_states, lookup, ModelDoc, ModelError, RelDefault};
use crate::hilbert::{match_axiom, SchemeId};
use crate::syntax::{
    check_dialect, closure, parse_formula, parse_term, subterms_into, terms, Dialect, Formula,
    Term,
};

pub type Rel = BTreeSet<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeModel {
    pub dialect: Dialect,
    pub states: Vec<String>,
    pub normal: Vec<bool>,
    pub term_rels: BTreeMap<Term, Rel>,
    pub formula_rels: BTreeMap<Formula, Rel>,
    pub formula_rel_default: RelDefault,
    /// Atoms true at each normal state.
    pub valuation: Vec<BTreeSet<String>>,
    /// Formulas true at each non-normal state.
    pub nonnormal_valuation: Vec<BTreeSet<Formula>>,
}

impl KripkeModel {
    /// Empty model over `n` states named `w0..`, all normal.
    pub fn with_states(dialect: Dialect, names: &[&str], normal: &[&str]) -> KripkeModel {
        let states: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let normal = states.iter().map(|s| normal.contains(&s.as_str())).collect();
        KripkeModel {
            dialect,
            valuation: vec![BTreeSet::new(); states.len()],
            nonnormal_valuation: vec![BTreeSet::new(); states.len()],
            states,
            normal,
            term_rels: BTreeMap::new(),
            formula_rels: BTreeMap::new(),
            formula_rel_default: RelDefault::TruthsetNormal,
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

    pub fn from_doc(doc: &ModelDoc) -> Result<KripkeModel, ModelError> {
        if doc.dialect.is_jrc() {
            return Err(ModelError::WrongKind { expected: "an LPC-family dialect", found: doc.dialect });
        }
        let d = doc.dialect;
        let idx = index_states(&doc.states)?;
        let mut m = KripkeModel {
            dialect: d,
            states: doc.states.clone(),
            normal: vec![false; doc.states.len()],
            term_rels: BTreeMap::new(),
            formula_rels: BTreeMap::new(),
            formula_rel_default: doc.formula_rel_default,
            valuation: vec![BTreeSet::new(); doc.states.len()],
            nonnormal_valuation: vec![BTreeSet::new(); doc.states.len()],
        };
        for n in &doc.normal {
            m.normal[lookup(&idx, n)?] = true;
        }
        let syn = |ctx: &str| {
            let ctx = ctx.to_string();
            move |source| ModelError::Syntax { context: ctx.clone(), source }
        };
        for (t, pairs) in &doc.term_rels {
            let term = parse_term(t, d).map_err(syn(t))?;
            let rel = m.term_rels.entry(term).or_default();
            for (a, b) in pairs {
                rel.insert((lookup(&idx, a)?, lookup(&idx, b)?));
            }
        }
        for (f, pairs) in &doc.formula_rels {
            let phi = parse_formula(f, d).map_err(syn(f))?;
            let rel = m.formula_rels.entry(phi).or_default();
            for (a, b) in pairs {
                rel.insert((lookup(&idx, a)?, lookup(&idx, b)?));
            }
        }
        for (s, atoms) in &doc.valuation {
            let w = lookup(&idx, s)?;
            if !m.normal[w] {
                return Err(ModelError::ValuationKind(s.clone()));
            }
            for a in atoms {
                match parse_formula(a, d).map_err(syn(a))? {
                    Formula::Atom(p) => {
                        m.valuation[w].insert(p);
                    }
                    _ => return Err(ModelError::ValuationKind(s.clone())),
                }
            }
        }
        for (s, fs) in &doc.nonnormal_valuation {
            let w = lookup(&idx, s)?;
            if m.normal[w] {
                return Err(ModelError::ValuationKind(s.clone()));
            }
            for f in fs {
                m.nonnormal_valuation[w].insert(parse_formula(f, d).map_err(syn(f))?);
            }
        }
        m.validate()?;
        Ok(m)
    }

    pub fn to_doc(&self) -> ModelDoc {
        let name = |i: usize| self.states[i].clone();
        let pairs = |r: &Rel| r.iter().map(|&(a, b)| (name(a), name(b))).collect::<Vec<_>>();
        ModelDoc {
            dialect: self.dialect,
            states: self.states.clone(),
            normal: self.normal_states().map(name).collect(),
            term_rels: self.term_rels.iter().map(|(t, r)| (t.to_string(), pairs(r))).collect(),
            formula_rels: self.formula_rels.iter().map(|(f, r)| (f.to_string(), pairs(r))).collect(),
            formula_rel_default: self.formula_rel_default,
            valuation: self
                .normal_states()
                .map(|w| (name(w), self.valuation[w].iter().cloned().collect()))
                .collect(),
            nonnormal_valuation: (0..self.len())
                .filter(|&w| !self.normal[w])
                .map(|w| (name(w), self.nonnormal_valuation[w].iter().map(|f| f.to_string()).collect()))
                .collect(),
            star: BTreeMap::new(),
            ternary: Vec::new(),
        }
    }

    /// Checks the structural invariants of a relational model.
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.is_empty() || !self.normal.iter().any(|&b| b) {
            return Err(ModelError::Empty);
        }
        for (f, rel) in &self.formula_rels {
            for &(a, b) in rel {
                if !self.normal[a] || !self.normal[b] {
                    return Err(ModelError::NonNormalOverride {
                        formula: f.to_string(),
                        from: self.states[a].clone(),
                        to: self.states[b].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Truth of `f` at the named state.
    pub fn eval(&self, state: &str, f: &Formula, dialect: Dialect) -> Result<bool, ModelError> {
        check_dialect(f, dialect).map_err(|reason| ModelError::Dialect { dialect, reason })?;
        let w = self.state(state)?;
        Ok(Evaluator::new(self).holds(w, f))
    }

    /// Names of the states where `f` holds.
    pub fn truthset(&self, f: &Formula, dialect: Dialect) -> Result<BTreeSet<String>, ModelError> {
        check_dialect(f, dialect).map_err(|reason| ModelError::Dialect { dialect, reason })?;
        let ev = Evaluator::new(self);
        let ts = ev.truthset(f);
        Ok((0..self.len()).filter(|&w| ts[w]).map(|w| self.states[w].clone()).collect())
    }

    /// Local consequence: every normal state satisfying all premises satisfies the goal.
    pub fn consequence(&self, premises: &[Formula], goal: &Formula, dialect: Dialect) -> Result<bool, ModelError> {
        for f in premises.iter().chain(std::iter::once(goal)) {
            check_dialect(f, dialect).map_err(|reason| ModelError::Dialect { dialect, reason })?;
        }
        let ev = Evaluator::new(self);
        Ok(self
            .normal_states()
            .all(|w| !premises.iter().all(|p| ev.holds(w, p)) || ev.holds(w, goal)))
    }

    pub fn valid_in_model(&self, f: &Formula, dialect: Dialect) -> Result<bool, ModelError> {
        self.consequence(&[], f, dialect)
    }

    pub fn term_successors(&self, t: &Term, w: usize) -> BTreeSet<usize> {
        self.term_rels
            .get(t)
            .map(|r| r.iter().filter(|p| p.0 == w).map(|p| p.1).collect())
            .unwrap_or_default()
    }

    /// Subformula closure of the queries plus overridden formulas and non-normal valuation entries.
    pub fn default_universe(&self, queries: &[Formula]) -> BTreeSet<Formula> {
        let extra: Vec<Formula> = self
            .formula_rels
            .keys()
            .cloned()
            .chain(self.nonnormal_valuation.iter().flatten().cloned())
            .collect();
        closure(queries.iter().chain(extra.iter()))
    }
}

/// Memoizing evaluator confined to one evaluation session.
pub struct Evaluator<'m> {
    m: &'m KripkeModel,
    memo: RefCell<HashMap<Formula, Vec<bool>>>,
}

impl<'m> Evaluator<'m> {
    pub fn new(m: &'m KripkeModel) -> Self {
        Evaluator { m, memo: RefCell::new(HashMap::new()) }
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

    /// R_φ(w) for normal `w`.
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
        let mut out = vec![false; n];
        let nonnormal: Vec<usize> = (0..n).filter(|&w| !m.normal[w]).collect();
        for &w in &nonnormal {
            out[w] = m.nonnormal_valuation[w].contains(f);
        }
        let normal: Vec<usize> = m.normal_states().collect();
        match f {
            Formula::Atom(p) => {
                for &w in &normal {
                    out[w] = m.valuation[w].contains(p);
                }
            }
            Formula::Neg(a) => {
                let ta = self.truthset(a);
                for &w in &normal {
                    out[w] = !ta[w];
                }
            }
            Formula::And(a, b) => {
                let (ta, tb) = (self.truthset(a), self.truthset(b));
                for &w in &normal {
                    out[w] = ta[w] && tb[w];
                }
            }
            Formula::MatImp(a, b) => {
                let (ta, tb) = (self.truthset(a), self.truthset(b));
                for &w in &normal {
                    out[w] = !ta[w] || tb[w];
                }
            }
            Formula::Counterfactual(a, b) => {
                let tb = self.truthset(b);
                for &w in &normal {
                    out[w] = self.formula_successors(a, w).into_iter().all(|v| tb[v]);
                }
            }
            Formula::Just(t, a) => {
                let ta = self.truthset(a);
                for &w in &normal {
                    out[w] = m.term_successors(t, w).into_iter().all(|v| ta[v]);
                }
            }
            Formula::Box(a) => {
                let ta = self.truthset(a);
                let all = normal.iter().all(|&v| ta[v]);
                for &w in &normal {
                    out[w] = all;
                }
            }
            Formula::RelImp(..) | Formula::RelCf(..) => {}
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Constant specifications

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantSpecification {
    Explicit(BTreeSet<(String, Formula)>),
    /// Every axiom instance is justified by the constant allocated to its scheme.
    AxiomaticallyAppropriate,
}

impl Default for ConstantSpecification {
    fn default() -> Self {
        ConstantSpecification::Explicit(BTreeSet::new())
    }
}

/// Constant allocated to a scheme in appropriate mode.
pub fn scheme_constant(s: SchemeId) -> String {
    match s {
        SchemeId::Ax(n) => format!("c{n}"),
        SchemeId::AppPrime => "c_4p".into(),
        SchemeId::BoxK => "c_k".into(),
        SchemeId::BoxT => "c_t".into(),
        SchemeId::Box4 => "c_b4".into(),
        SchemeId::Box5 => "c_b5".into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum CsDoc {
    Mode { mode: String },
    Entries(Vec<CsEntry>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CsEntry {
    constant: String,
    formula: String,
}

impl ConstantSpecification {
    pub fn explicit<I: IntoIterator<Item = (String, Formula)>>(items: I) -> Self {
        ConstantSpecification::Explicit(items.into_iter().collect())
    }

    /// Whether `c:φ` belongs to the specification.
    pub fn contains(&self, c: &str, phi: &Formula, dialect: Dialect) -> bool {
        match self {
            ConstantSpecification::Explicit(set) => set.contains(&(c.to_string(), phi.clone())),
            ConstantSpecification::AxiomaticallyAppropriate => {
                match_axiom(phi, dialect).is_some_and(|m| scheme_constant(m.scheme) == c)
            }
        }
    }

    /// A constant `c` with `c:φ` in the specification.
    pub fn constant_for(&self, phi: &Formula, dialect: Dialect) -> Option<String> {
        match self {
            ConstantSpecification::Explicit(set) => {
                set.iter().find(|(_, f)| f == phi).map(|(c, _)| c.clone())
            }
            ConstantSpecification::AxiomaticallyAppropriate => {
                match_axiom(phi, dialect).map(|m| scheme_constant(m.scheme))
            }
        }
    }

    /// Explicit entries whose formula is not an axiom instance of `dialect`.
    pub fn non_axiom_entries(&self, dialect: Dialect) -> Vec<(String, Formula)> {
        match self {
            ConstantSpecification::Explicit(set) => set
                .iter()
                .filter(|(_, f)| match_axiom(f, dialect).is_none())
                .cloned()
                .collect(),
            ConstantSpecification::AxiomaticallyAppropriate => Vec::new(),
        }
    }

    pub fn from_json(text: &str, dialect: Dialect) -> Result<Self, ModelError> {
        match serde_json::from_str::<CsDoc>(text)? {
            CsDoc::Mode { mode } if mode == "appropriate" => {
                Ok(ConstantSpecification::AxiomaticallyAppropriate)
            }
            CsDoc::Mode { mode } => Err(ModelError::Json(serde::de::Error::custom(format!(
                "unknown constant specification mode `{mode}`"
            )))),
            CsDoc::Entries(es) => {
                let mut set = BTreeSet::new();
                for e in es {
                    let f = parse_formula(&e.formula, dialect)
                        .map_err(|source| ModelError::Syntax { context: e.formula.clone(), source })?;
                    set.insert((e.constant, f));
                }
                Ok(ConstantSpecification::Explicit(set))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Frame conditions

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
    C4,
    C5,
    C5Prime,
    C6,
    C7,
    C8,
    C9,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::C1 => "1",
            Condition::C2 => "2",
            Condition::C3 => "3",
            Condition::C4 => "4",
            Condition::C5 => "5",
            Condition::C5Prime => "5'",
            Condition::C6 => "6",
            Condition::C7 => "7",
            Condition::C8 => "8",
            Condition::C9 => "9",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantProfile {
    pub dialect: Dialect,
    pub conditions: Vec<Condition>,
    pub box_enabled: bool,
}

impl VariantProfile {
    pub fn for_dialect(dialect: Dialect) -> VariantProfile {
        use Condition::*;
        let conditions = match dialect {
            Dialect::LPCplus => vec![C1, C2, C3, C4, C5, C6, C7],
            Dialect::LPCint => vec![C1, C2, C3, C4, C5, C6, C7, C8],
            Dialect::LPCprime => vec![C1, C2, C3, C4, C5Prime, C6, C7],
            Dialect::LPCKplus => vec![C1, C2, C3, C4, C5, C6, C7, C9],
            Dialect::J4Cplus | Dialect::L => vec![C1, C2, C3, C4, C5, C7],
            Dialect::JCplus => vec![C1, C2, C3, C4, C5],
            Dialect::JRC => Vec::new(),
        };
        VariantProfile { dialect, conditions, box_enabled: dialect == Dialect::L }
    }
}

/// Counterexample data for a failed condition.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub states: Vec<String>,
    pub formulas: Vec<Formula>,
    pub terms: Vec<Term>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.states.is_empty() {
            parts.push(format!("states [{}]", self.states.join(", ")));
        }
        if !self.formulas.is_empty() {
            let fs: Vec<String> = self.formulas.iter().map(|x| x.to_string()).collect();
            parts.push(format!("formulas [{}]", fs.join(", ")));
        }
        if !self.terms.is_empty() {
            let ts: Vec<String> = self.terms.iter().map(|x| x.to_string()).collect();
            parts.push(format!("terms [{}]", ts.join(", ")));
        }
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub passed: bool,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub dialect: Dialect,
    pub results: Vec<ConditionResult>,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn result(&self, c: Condition) -> Option<&ConditionResult> {
        self.results.iter().find(|r| r.condition == c)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile {}", self.dialect)?;
        for r in &self.results {
            match &r.witness {
                None => writeln!(f, "  condition {}: pass", r.condition)?,
                Some(w) => writeln!(f, "  condition {}: FAIL ({w})", r.condition)?,
            }
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Checks the profile's conditions with formula quantifiers ranging over `universe`.
pub fn check_conditions(
    m: &KripkeModel,
    profile: &VariantProfile,
    universe: &BTreeSet<Formula>,
    cs: &ConstantSpecification,
) -> ConditionReport {
    let u: Vec<Formula> = closure(universe.iter()).into_iter().collect();
    let mut tset: BTreeSet<Term> = BTreeSet::new();
    for f in &u {
        tset.extend(terms(f));
    }
    for t in m.term_rels.keys() {
        subterms_into(t, &mut tset);
    }
    let ctx = Ctx { m, ev: Evaluator::new(m), u, terms: tset.into_iter().collect(), dialect: profile.dialect };
    let results = profile
        .conditions
        .iter()
        .map(|&c| {
            let witness = match c {
                Condition::C1 => ctx.c1(),
                Condition::C2 => ctx.c2(),
                Condition::C3 => ctx.c3(cs),
                Condition::C4 => ctx.c4(),
                Condition::C5 => ctx.c5(),
                Condition::C5Prime => ctx.c5_prime(),
                Condition::C6 => ctx.c6(),
                Condition::C7 => ctx.c7(),
                Condition::C8 => ctx.c8(),
                Condition::C9 => ctx.c9(),
            };
            ConditionResult { condition: c, passed: witness.is_none(), witness }
        })
        .collect();
    let mut notes = vec![format!(
        "formula quantifiers range over a universe of {} formulas and {} terms",
        ctx.u.len(),
        ctx.terms.len()
    )];
    if profile.conditions.iter().any(|c| matches!(c, Condition::C5 | Condition::C5Prime)) {
        notes.push("application condition checked over universe pairs only (under-approximation)".into());
    }
    ConditionReport { dialect: profile.dialect, results, notes }
}

struct Ctx<'m> {
    m: &'m KripkeModel,
    ev: Evaluator<'m>,
    u: Vec<Formula>,
    terms: Vec<Term>,
    dialect: Dialect,
}

impl Ctx<'_> {
    fn name(&self, w: usize) -> String {
        self.m.states[w].clone()
    }

    fn wit(&self, states: &[usize], formulas: &[&Formula], terms: &[&Term]) -> Option<Witness> {
        Some(Witness {
            states: states.iter().map(|&w| self.name(w)).collect(),
            formulas: formulas.iter().map(|&f| f.clone()).collect(),
            terms: terms.iter().map(|&t| t.clone()).collect(),
        })
    }

    fn normal(&self) -> Vec<usize> {
        self.m.normal_states().collect()
    }

    fn c1(&self) -> Option<Witness> {
        for w in self.normal() {
            for phi in &self.u {
                let ts = self.ev.truthset(phi);
                if let Some(v) = self.ev.formula_successors(phi, w).into_iter().find(|&v| !ts[v]) {
                    return self.wit(&[w, v], &[phi], &[]);
                }
            }
        }
        None
    }

    fn c2(&self) -> Option<Witness> {
        for w in self.normal() {
            for phi in &self.u {
                if self.ev.holds(w, phi) && !self.ev.formula_successors(phi, w).contains(&w) {
                    return self.wit(&[w], &[phi], &[]);
                }
            }
        }
        None
    }

    fn c3(&self, cs: &ConstantSpecification) -> Option<Witness> {
        let entries: Vec<(Term, Formula)> = match cs {
            ConstantSpecification::Explicit(set) => {
                set.iter().map(|(c, f)| (Term::Constant(c.clone()), f.clone())).collect()
            }
            ConstantSpecification::AxiomaticallyAppropriate => {
                let mut v = Vec::new();
                for t in &self.terms {
                    if let Term::Constant(c) = t {
                        for f in &self.u {
                            if cs.contains(c, f, self.dialect) {
                                v.push((t.clone(), f.clone()));
                            }
                        }
                    }
                }
                v
            }
        };
        for w in self.normal() {
            for (c, phi) in &entries {
                let ts = self.ev.truthset(phi);
                if let Some(v) = self.m.term_successors(c, w).into_iter().find(|&v| !ts[v]) {
                    return self.wit(&[w, v], &[phi], &[c]);
                }
            }
        }
        None
    }

    fn c4(&self) -> Option<Witness> {
        for w in self.normal() {
            for t in &self.terms {
                if let Term::Sum(a, b) = t {
                    let (ra, rb) = (self.m.term_successors(a, w), self.m.term_successors(b, w));
                    for v in self.m.term_successors(t, w) {
                        if !ra.contains(&v) || !rb.contains(&v) {
                            return self.wit(&[w, v], &[], &[a, b]);
                        }
                    }
                }
            }
        }
        None
    }

    /// Universe formulas false somewhere in `succ`.
    fn missed(&self, succ: &BTreeSet<usize>) -> Vec<&Formula> {
        self.u.iter().filter(|psi| succ.iter().any(|&v| !self.ev.holds(v, psi))).collect()
    }

    fn c5(&self) -> Option<Witness> {
        for w in self.normal() {
            for t in &self.terms {
                let Term::App(s, r) = t else { continue };
                let succ = self.m.term_successors(t, w);
                if succ.is_empty() {
                    continue;
                }
                let bad = self.missed(&succ);
                if bad.is_empty() {
                    continue;
                }
                let rs = self.m.term_successors(r, w);
                let ss = self.m.term_successors(s, w);
                let bad_ts: Vec<Vec<bool>> = bad.iter().map(|psi| self.ev.truthset(psi)).collect();
                for phi in &self.u {
                    if rs.iter().any(|&v| !self.ev.holds(v, phi)) {
                        continue;
                    }
                    let rphi: Vec<Vec<usize>> =
                        ss.iter().filter(|&&v| self.m.normal[v]).map(|&v| self.ev.formula_successors(phi, v)).collect();
                    let literal: Vec<usize> = ss.iter().copied().filter(|&v| !self.m.normal[v]).collect();
                    for (&psi, tp) in bad.iter().zip(&bad_ts) {
                        if !rphi.iter().all(|succ| succ.iter().all(|&x| tp[x])) {
                            continue;
                        }
                        if !literal.is_empty() {
                            let cf = Formula::cf(phi.clone(), psi.clone());
                            if !literal.iter().all(|&v| self.m.nonnormal_valuation[v].contains(&cf)) {
                                continue;
                            }
                        }
                        let v = *succ.iter().find(|&&v| !tp[v]).expect("psi fails in succ");
                        return self.wit(&[w, v], &[phi, psi], &[s, r]);
                    }
                }
            }
        }
        None
    }

    fn c5_prime(&self) -> Option<Witness> {
        let normal = self.normal();
        for t in &self.terms {
            let Term::App(s, r) = t else { continue };
            let reach: BTreeSet<usize> = normal.iter().flat_map(|&u| self.m.term_successors(t, u)).collect();
            let bad = self.missed(&reach);
            if bad.is_empty() {
                continue;
            }
            let rt: Vec<BTreeSet<usize>> = (0..self.m.len()).map(|u| self.m.term_successors(t, u)).collect();
            for phi in &self.u {
                let tphi = Formula::just((**r).clone(), phi.clone());
                let mut us: Vec<Vec<usize>> = vec![Vec::new(); self.m.len()];
                for &v in &normal {
                    us[v] = self.ev.formula_successors(&tphi, v).into_iter().filter(|&u| self.m.normal[u]).collect();
                }
                let targets: BTreeSet<usize> = us.iter().flatten().copied().collect();
                for &psi in &bad {
                    let tp = self.ev.truthset(psi);
                    let fails = |u: usize| rt[u].iter().copied().find(|&x| !tp[x]);
                    if targets.iter().all(|&u| fails(u).is_none()) {
                        continue;
                    }
                    let sj = Formula::just((**s).clone(), Formula::cf(phi.clone(), psi.clone()));
                    for &w in &normal {
                        for v in self.ev.formula_successors(&sj, w) {
                            if !self.m.normal[v] {
                                continue;
                            }
                            for &u in &us[v] {
                                if let Some(u2) = fails(u) {
                                    return self.wit(&[w, v, u, u2], &[phi, psi], &[s, r]);
                                }
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn c6(&self) -> Option<Witness> {
        for w in self.normal() {
            for t in &self.terms {
                if !self.m.term_successors(t, w).contains(&w) {
                    return self.wit(&[w], &[], &[t]);
                }
            }
        }
        None
    }

    fn c7(&self) -> Option<Witness> {
        for w in self.normal() {
            for bt in &self.terms {
                let Term::Bang(t) = bt else { continue };
                let direct = self.m.term_successors(t, w);
                for v in self.m.term_successors(bt, w) {
                    for u in self.m.term_successors(t, v) {
                        if !direct.contains(&u) {
                            return self.wit(&[w, v, u], &[], &[t]);
                        }
                    }
                }
            }
        }
        None
    }

    fn c8(&self) -> Option<Witness> {
        for w in self.normal() {
            for pt in &self.terms {
                let Term::Pair(t, phi) = pt else { continue };
                let succ = self.m.term_successors(pt, w);
                for psi in &self.u {
                    if !self.ev.holds(w, &Formula::just((**t).clone(), psi.clone())) {
                        continue;
                    }
                    let cf = Formula::cf((**phi).clone(), psi.clone());
                    let ts = self.ev.truthset(&cf);
                    if let Some(&v) = succ.iter().find(|&&v| !ts[v]) {
                        return self.wit(&[w, v], &[phi, psi], &[t]);
                    }
                }
            }
        }
        None
    }

    fn c9(&self) -> Option<Witness> {
        let normal = self.normal();
        let norm_ts = |f: &Formula| {
            let ts = self.ev.truthset(f);
            normal.iter().map(|&w| ts[w]).collect::<Vec<bool>>()
        };
        let rel = |f: &Formula| {
            normal
                .iter()
                .map(|&w| {
                    let mut s = self.ev.formula_successors(f, w);
                    s.sort_unstable();
                    s
                })
                .collect::<Vec<_>>()
        };
        for (i, a) in self.u.iter().enumerate() {
            for b in &self.u[i + 1..] {
                if norm_ts(a) == norm_ts(b) && rel(a) != rel(b) {
                    return self.wit(&[], &[a, b], &[]);
                }
            }
        }
        None
    }
}

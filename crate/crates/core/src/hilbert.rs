//! Hilbert-style derivations for the LPC⁺ family: axiom matching, checking,
//! derived-rule expansion and internalization.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

use crate::kripke::{scheme_constant, ConstantSpecification};
use crate::syntax::{check_dialect, parse_formula, Dialect, Formula, Term};

/// Axiom scheme identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum SchemeId {
    /// Numbered schemes 1 to 10.
    Ax(u8),
    /// Nested form of the application axiom.
    AppPrime,
    BoxK,
    BoxT,
    Box4,
    Box5,
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Ax(n) => write!(f, "ax{n}"),
            SchemeId::AppPrime => f.write_str("ax4'"),
            SchemeId::BoxK => f.write_str("axk"),
            SchemeId::BoxT => f.write_str("axt"),
            SchemeId::Box4 => f.write_str("axb4"),
            SchemeId::Box5 => f.write_str("axb5"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let l = s.trim().to_ascii_lowercase();
        let rest = l.strip_prefix("ax").ok_or_else(|| format!("unknown scheme `{s}`"))?;
        match rest {
            "4'" | "4p" | "4prime" => Ok(SchemeId::AppPrime),
            "k" => Ok(SchemeId::BoxK),
            "t" => Ok(SchemeId::BoxT),
            "b4" => Ok(SchemeId::Box4),
            "b5" => Ok(SchemeId::Box5),
            n => match n.parse::<u8>() {
                Ok(k @ 1..=10) => Ok(SchemeId::Ax(k)),
                _ => Err(format!("unknown scheme `{s}`")),
            },
        }
    }
}

/// Schemes available in a dialect, in matching order.
pub fn schemes_for(d: Dialect) -> Vec<SchemeId> {
    use SchemeId::*;
    let base = |ns: &[u8]| ns.iter().map(|&n| Ax(n)).collect::<Vec<_>>();
    match d {
        Dialect::LPCplus | Dialect::LPCKplus => base(&[1, 2, 3, 4, 5, 6, 7, 8, 9]),
        Dialect::LPCint => base(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]),
        Dialect::LPCprime => {
            let mut v = base(&[1, 2, 3, 4]);
            v.push(AppPrime);
            v.extend(base(&[6, 7, 8, 9]));
            v
        }
        Dialect::J4Cplus => base(&[1, 2, 3, 4, 5, 6, 7, 9]),
        Dialect::JCplus => base(&[1, 2, 3, 4, 5, 6, 7]),
        Dialect::L => {
            let mut v = base(&[1, 2, 3, 4, 5, 6, 7, 9]);
            v.extend([BoxK, BoxT, Box4, Box5]);
            v
        }
        Dialect::JRC => Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Templates and matching

const META: char = '?';

fn templates() -> &'static BTreeMap<SchemeId, Formula> {
    static T: OnceLock<BTreeMap<SchemeId, Formula>> = OnceLock::new();
    T.get_or_init(|| {
        use SchemeId::*;
        let src: [(SchemeId, &str); 13] = [
            (Ax(2), "(phi > (psi => chi)) => ((phi > psi) => (phi > chi))"),
            (Ax(3), "phi > phi"),
            (Ax(4), "(phi > psi) => (phi => psi)"),
            (Ax(5), "(s:(phi > psi) & t:phi) > (s.t):psi"),
            (AppPrime, "s:(phi > psi) > (t:phi > (s.t):psi)"),
            (Ax(6), "s:phi > (s+t):phi"),
            (Ax(7), "t:phi > (s+t):phi"),
            (Ax(8), "t:phi > phi"),
            (Ax(9), "t:phi > !t:t:phi"),
            (Ax(10), "t:psi => <t,phi>:(phi > psi)"),
            (BoxK, "[](phi => psi) => ([]phi => []psi)"),
            (BoxT, "[]phi => phi"),
            (Box4, "[]phi => [][]phi"),
        ];
        let mut out: BTreeMap<SchemeId, Formula> = src
            .iter()
            .map(|(id, text)| {
                let d = if matches!(id, Ax(10)) { Dialect::LPCint } else { Dialect::L };
                (*id, metafy(&parse_formula(text, d).expect("scheme templates parse")))
            })
            .collect();
        out.insert(
            Box5,
            metafy(&parse_formula("~[]phi => []~[]phi", Dialect::L).expect("scheme templates parse")),
        );
        out
    })
}

/// Renames placeholder atoms and variables into metavariables no parsed formula can contain.
fn metafy(f: &Formula) -> Formula {
    fn mt(t: &Term) -> Term {
        match t {
            Term::Variable(n) => Term::Variable(format!("{META}{n}")),
            Term::Constant(_) => t.clone(),
            Term::App(a, b) => Term::app(mt(a), mt(b)),
            Term::Sum(a, b) => Term::sum(mt(a), mt(b)),
            Term::Bang(a) => Term::bang(mt(a)),
            Term::Pair(a, g) => Term::pair(mt(a), metafy(g)),
        }
    }
    map_formula(f, &|a| Formula::Atom(format!("{META}{a}")), &mt)
}

fn map_formula(f: &Formula, atom: &dyn Fn(&str) -> Formula, term: &dyn Fn(&Term) -> Term) -> Formula {
    let r = |g: &Formula| map_formula(g, atom, term);
    match f {
        Formula::Atom(a) => atom(a),
        Formula::Neg(a) => Formula::neg(r(a)),
        Formula::And(a, b) => Formula::and(r(a), r(b)),
        Formula::MatImp(a, b) => Formula::imp(r(a), r(b)),
        Formula::Counterfactual(a, b) => Formula::cf(r(a), r(b)),
        Formula::RelImp(a, b) => Formula::rel_imp(r(a), r(b)),
        Formula::RelCf(a, b) => Formula::rel_cf(r(a), r(b)),
        Formula::Just(t, a) => Formula::just(term(t), r(a)),
        Formula::Box(a) => Formula::boxed(r(a)),
    }
}

/// Bindings for formula and term metavariables, keyed by their plain names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subst {
    pub formulas: BTreeMap<String, Formula>,
    pub terms: BTreeMap<String, Term>,
}

impl Subst {
    fn bind_f(&mut self, name: &str, f: &Formula) -> bool {
        match self.formulas.get(name) {
            Some(g) => g == f,
            None => {
                self.formulas.insert(name.to_string(), f.clone());
                true
            }
        }
    }

    fn bind_t(&mut self, name: &str, t: &Term) -> bool {
        match self.terms.get(name) {
            Some(u) => u == t,
            None => {
                self.terms.insert(name.to_string(), t.clone());
                true
            }
        }
    }

    /// Instantiates a metavariable template.
    pub fn apply(&self, template: &Formula) -> Option<Formula> {
        fn at(s: &Subst, t: &Term) -> Option<Term> {
            Some(match t {
                Term::Variable(n) => match n.strip_prefix(META) {
                    Some(m) => s.terms.get(m)?.clone(),
                    None => t.clone(),
                },
                Term::Constant(_) => t.clone(),
                Term::App(a, b) => Term::app(at(s, a)?, at(s, b)?),
                Term::Sum(a, b) => Term::sum(at(s, a)?, at(s, b)?),
                Term::Bang(a) => Term::bang(at(s, a)?),
                Term::Pair(a, g) => Term::pair(at(s, a)?, s.apply(g)?),
            })
        }
        let r = |g: &Formula| self.apply(g);
        Some(match template {
            Formula::Atom(n) => match n.strip_prefix(META) {
                Some(m) => self.formulas.get(m)?.clone(),
                None => template.clone(),
            },
            Formula::Neg(a) => Formula::neg(r(a)?),
            Formula::And(a, b) => Formula::and(r(a)?, r(b)?),
            Formula::MatImp(a, b) => Formula::imp(r(a)?, r(b)?),
            Formula::Counterfactual(a, b) => Formula::cf(r(a)?, r(b)?),
            Formula::RelImp(a, b) => Formula::rel_imp(r(a)?, r(b)?),
            Formula::RelCf(a, b) => Formula::rel_cf(r(a)?, r(b)?),
            Formula::Just(t, a) => Formula::just(at(self, t)?, r(a)?),
            Formula::Box(a) => Formula::boxed(r(a)?),
        })
    }
}

fn unify_f(pat: &Formula, f: &Formula, s: &mut Subst) -> bool {
    use Formula::*;
    match (pat, f) {
        (Atom(n), _) if n.starts_with(META) => s.bind_f(&n[META.len_utf8()..], f),
        (Atom(a), Atom(b)) => a == b,
        (Neg(a), Neg(b)) | (Box(a), Box(b)) => unify_f(a, b, s),
        (And(a1, b1), And(a2, b2))
        | (MatImp(a1, b1), MatImp(a2, b2))
        | (Counterfactual(a1, b1), Counterfactual(a2, b2))
        | (RelImp(a1, b1), RelImp(a2, b2))
        | (RelCf(a1, b1), RelCf(a2, b2)) => unify_f(a1, a2, s) && unify_f(b1, b2, s),
        (Just(t1, a), Just(t2, b)) => unify_t(t1, t2, s) && unify_f(a, b, s),
        _ => false,
    }
}

fn unify_t(pat: &Term, t: &Term, s: &mut Subst) -> bool {
    use Term::*;
    match (pat, t) {
        (Variable(n), _) if n.starts_with(META) => s.bind_t(&n[META.len_utf8()..], t),
        (Variable(a), Variable(b)) | (Constant(a), Constant(b)) => a == b,
        (App(a1, b1), App(a2, b2)) | (Sum(a1, b1), Sum(a2, b2)) => {
            unify_t(a1, a2, s) && unify_t(b1, b2, s)
        }
        (Bang(a), Bang(b)) => unify_t(a, b, s),
        (Pair(a1, f1), Pair(a2, f2)) => unify_t(a1, a2, s) && unify_f(f1, f2, s),
        _ => false,
    }
}

/// Template of a non-tautology scheme, with metavariables `?phi`, `?psi`, `?chi`, `?s`, `?t`.
pub fn scheme_template(id: SchemeId) -> Option<&'static Formula> {
    templates().get(&id)
}

/// Instantiates a scheme; `None` for the tautology scheme or incomplete bindings.
pub fn instantiate(id: SchemeId, s: &Subst) -> Option<Formula> {
    s.apply(scheme_template(id)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomMatch {
    pub scheme: SchemeId,
    pub subst: Subst,
}

/// Matches `f` against one scheme regardless of dialect.
pub fn match_scheme(f: &Formula, id: SchemeId) -> Option<Subst> {
    if id == SchemeId::Ax(1) {
        return is_tautology(f).then(Subst::default);
    }
    let mut s = Subst::default();
    unify_f(scheme_template(id)?, f, &mut s).then_some(s)
}

/// First scheme of `dialect` that `f` instantiates.
pub fn match_axiom(f: &Formula, dialect: Dialect) -> Option<AxiomMatch> {
    if check_dialect(f, dialect).is_err() {
        return None;
    }
    schemes_for(dialect)
        .into_iter()
        .find_map(|id| match_scheme(f, id).map(|subst| AxiomMatch { scheme: id, subst }))
}

/// Classical validity with maximal non-Boolean subformulas read as atoms.
pub fn is_tautology(f: &Formula) -> bool {
    fn leaves(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::Neg(a) => leaves(a, out),
            Formula::And(a, b) | Formula::MatImp(a, b) => {
                leaves(a, out);
                leaves(b, out);
            }
            _ => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
        }
    }
    fn ev(f: &Formula, ls: &[Formula], bits: u64) -> bool {
        match f {
            Formula::Neg(a) => !ev(a, ls, bits),
            Formula::And(a, b) => ev(a, ls, bits) && ev(b, ls, bits),
            Formula::MatImp(a, b) => !ev(a, ls, bits) || ev(b, ls, bits),
            _ => {
                let i = ls.iter().position(|l| l == f).expect("leaf collected");
                bits >> i & 1 == 1
            }
        }
    }
    let mut ls = Vec::new();
    leaves(f, &mut ls);
    if ls.len() > 24 {
        return false;
    }
    (0..1u64 << ls.len()).all(|bits| ev(f, &ls, bits))
}

/// `(ψ1 ∧ … ∧ ψn) ⊃ φ`, or `φ` itself when there are no premises.
pub fn premise_form(premises: &[Formula], goal: &Formula) -> Formula {
    match Formula::conj(premises) {
        Some(c) => Formula::imp(c, goal.clone()),
        None => goal.clone(),
    }
}

// ---------------------------------------------------------------------------
// Derivations

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Axiom(SchemeId),
    Cs,
    /// Minor premise, major premise (minor ⊃ this).
    Mp(usize, usize),
    /// Modus ponens whose major premise is an unlisted instance of the scheme.
    MpAx(usize, SchemeId),
    Rcn(usize),
    Rck(usize),
    /// Generalized conjunction lemma for counterfactuals.
    Cc,
    /// Propositional consequence of the cited lines.
    Pc(Vec<usize>),
    Rcea(usize),
    Nec(usize),
    Hyp,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::Axiom(s) => write!(f, "{s}"),
            Justification::Cs => f.write_str("cs"),
            Justification::Mp(i, j) => write!(f, "mp {i} {j}"),
            Justification::MpAx(i, s) => write!(f, "mp {i} {s}"),
            Justification::Rcn(i) => write!(f, "rcn {i}"),
            Justification::Rck(i) => write!(f, "rck {i}"),
            Justification::Cc => f.write_str("cc"),
            Justification::Pc(is) => {
                f.write_str("pc")?;
                for i in is {
                    write!(f, " {i}")?;
                }
                Ok(())
            }
            Justification::Rcea(i) => write!(f, "rcea {i}"),
            Justification::Nec(i) => write!(f, "nec {i}"),
            Justification::Hyp => f.write_str("hyp"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub formula: Formula,
    pub just: Justification,
}

/// Numbered proof lines; citations are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Derivation {
    pub lines: Vec<Line>,
}

impl Derivation {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn push(&mut self, formula: Formula, just: Justification) -> usize {
        self.lines.push(Line { formula, just });
        self.lines.len()
    }

    /// Formula at 1-based line `i`.
    pub fn formula(&self, i: usize) -> &Formula {
        &self.lines[i - 1].formula
    }

    pub fn conclusion(&self) -> Option<&Formula> {
        self.lines.last().map(|l| &l.formula)
    }

    pub fn hypotheses(&self) -> Vec<&Formula> {
        self.lines.iter().filter(|l| l.just == Justification::Hyp).map(|l| &l.formula).collect()
    }

    pub fn mp_count(&self) -> usize {
        self.lines.iter().filter(|l| matches!(l.just, Justification::Mp(..) | Justification::MpAx(..))).count()
    }

    pub fn to_text(&self) -> String {
        self.lines
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{}. {} ; {}\n", i + 1, l.formula, l.just))
            .collect()
    }

    /// Parses `n. <formula> ; <tag>` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str, dialect: Dialect) -> Result<Derivation, HilbertError> {
        let mut d = Derivation::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |message: String| HilbertError::Parse { line: ln + 1, message };
            let (num, rest) = line.split_once('.').ok_or_else(|| perr("expected `n.` prefix".into()))?;
            let n: usize = num.trim().parse().map_err(|_| perr(format!("bad line number `{num}`")))?;
            if n != d.len() + 1 {
                return Err(perr(format!("expected line number {}, found {n}", d.len() + 1)));
            }
            let (ftext, tag) =
                rest.rsplit_once(';').ok_or_else(|| perr("expected `; <justification>`".into()))?;
            let formula = parse_formula(ftext.trim(), dialect).map_err(|e| perr(e.to_string()))?;
            let just = parse_tag(tag.trim()).map_err(perr)?;
            d.push(formula, just);
        }
        Ok(d)
    }
}

fn parse_tag(tag: &str) -> Result<Justification, String> {
    let parts: Vec<&str> = tag.split_whitespace().collect();
    let idx = |s: &str| s.parse::<usize>().map_err(|_| format!("bad line reference `{s}`"));
    let one = |ps: &[&str]| -> Result<usize, String> {
        match ps {
            [i] => idx(i),
            _ => Err(format!("`{tag}` expects one line reference")),
        }
    };
    let Some((&head, args)) = parts.split_first() else {
        return Err("missing justification".into());
    };
    match head.to_ascii_lowercase().as_str() {
        "cs" => Ok(Justification::Cs),
        "hyp" => Ok(Justification::Hyp),
        "cc" => Ok(Justification::Cc),
        "mp" => match args {
            [i, j] => match j.parse::<usize>() {
                Ok(j) => Ok(Justification::Mp(idx(i)?, j)),
                Err(_) => Ok(Justification::MpAx(idx(i)?, j.parse()?)),
            },
            _ => Err("`mp` expects two references".into()),
        },
        "rcn" => Ok(Justification::Rcn(one(args)?)),
        "rck" => Ok(Justification::Rck(one(args)?)),
        "rcea" => Ok(Justification::Rcea(one(args)?)),
        "nec" => Ok(Justification::Nec(one(args)?)),
        "pc" => Ok(Justification::Pc(args.iter().map(|a| idx(a)).collect::<Result<_, _>>()?)),
        h if h.starts_with("ax") && args.is_empty() => Ok(Justification::Axiom(h.parse()?)),
        _ => Err(format!("unknown justification `{tag}`")),
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HilbertError {
    #[error("line {line}: {reason}")]
    Check { line: usize, reason: String },
    #[error("derivation text line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("internalization: {0}")]
    Internalize(String),
}

/// Summary of an accepted derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub premises: Vec<Formula>,
    pub conclusion: Option<Formula>,
}

/// Validates every line of `d` in `dialect` against `cs`.
pub fn check_derivation(
    d: &Derivation,
    dialect: Dialect,
    cs: &ConstantSpecification,
) -> Result<CheckReport, HilbertError> {
    if dialect.is_jrc() {
        return Err(HilbertError::Check { line: 1, reason: "JRC has no Hilbert system here".into() });
    }
    let mut seen_non_hyp = false;
    for (k0, line) in d.lines.iter().enumerate() {
        let k = k0 + 1;
        let fail = |reason: String| Err(HilbertError::Check { line: k, reason });
        if let Err(e) = check_dialect(&line.formula, dialect) {
            return fail(e);
        }
        let cite = |i: usize| -> Result<&Formula, HilbertError> {
            if i == 0 || i >= k {
                Err(HilbertError::Check { line: k, reason: format!("cites line {i}, which is not earlier") })
            } else {
                Ok(d.formula(i))
            }
        };
        let f = &line.formula;
        match &line.just {
            Justification::Hyp => {
                if seen_non_hyp {
                    return fail("hypotheses must precede all other lines".into());
                }
                continue;
            }
            Justification::Axiom(id) => {
                if !schemes_for(dialect).contains(id) {
                    return fail(format!("{id} is not a scheme of {dialect}"));
                }
                if match_scheme(f, *id).is_none() {
                    return fail(format!("not an instance of {id}"));
                }
            }
            Justification::Cs => {
                let Formula::Just(Term::Constant(c), inner) = f else {
                    return fail("a specification line must have the form c:φ".into());
                };
                if match_axiom(inner, dialect).is_none() {
                    return fail(format!("`{inner}` is not an axiom instance of {dialect}"));
                }
                if !cs.contains(c, inner, dialect) {
                    return fail(format!("`{f}` is not in the constant specification"));
                }
            }
            Justification::Mp(i, j) => {
                let (a, b) = (cite(*i)?, cite(*j)?);
                if *b != Formula::imp(a.clone(), f.clone()) {
                    return fail(format!("line {j} is not `line {i} => this line`"));
                }
            }
            Justification::MpAx(i, id) => {
                let a = cite(*i)?;
                if !schemes_for(dialect).contains(id) {
                    return fail(format!("{id} is not a scheme of {dialect}"));
                }
                if match_scheme(&Formula::imp(a.clone(), f.clone()), *id).is_none() {
                    return fail(format!("`line {i} => this line` is not an instance of {id}"));
                }
            }
            Justification::Rcn(i) => {
                let a = cite(*i)?;
                if !matches!(f, Formula::Counterfactual(_, c) if **c == *a) {
                    return fail(format!("not of the form φ > (line {i})"));
                }
            }
            Justification::Rck(i) => {
                let hyp = cite(*i)?;
                if let Err(reason) = rck_expansion(hyp, f) {
                    return fail(reason);
                }
            }
            Justification::Cc => {
                if let Err(reason) = cc_expansion(f) {
                    return fail(reason);
                }
            }
            Justification::Pc(is) => {
                let mut prem = Vec::new();
                for &i in is {
                    prem.push(cite(i)?.clone());
                }
                if !is_tautology(&premise_form(&prem, f)) {
                    return fail("not a propositional consequence of the cited lines".into());
                }
            }
            Justification::Rcea(i) => {
                if dialect != Dialect::LPCKplus {
                    return fail(format!("rcea is not a rule of {dialect}"));
                }
                let a = cite(*i)?;
                let ok = split_iff(a).is_some_and(|(p, q)| {
                    split_iff(f).is_some_and(|(l, r)| match (&l, &r) {
                        (Formula::Counterfactual(p2, c1), Formula::Counterfactual(q2, c2)) => {
                            **p2 == p && **q2 == q && c1 == c2
                        }
                        _ => false,
                    })
                });
                if !ok {
                    return fail(format!("not (φ > χ) == (ψ > χ) for line {i} = φ == ψ"));
                }
            }
            Justification::Nec(i) => {
                if dialect != Dialect::L {
                    return fail(format!("nec is not a rule of {dialect}"));
                }
                let a = cite(*i)?;
                if *f != Formula::boxed(a.clone()) {
                    return fail(format!("not [] applied to line {i}"));
                }
            }
        }
        seen_non_hyp = true;
    }
    Ok(CheckReport {
        premises: d.hypotheses().into_iter().cloned().collect(),
        conclusion: d.conclusion().cloned(),
    })
}

fn split_iff(f: &Formula) -> Option<(Formula, Formula)> {
    match f {
        Formula::And(l, r) => match (&**l, &**r) {
            (Formula::MatImp(a, b), Formula::MatImp(b2, a2)) if a == a2 && b == b2 => {
                Some(((**a).clone(), (**b).clone()))
            }
            _ => None,
        },
        _ => None,
    }
}

fn flatten_conj(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(a, b) => {
            let mut v = flatten_conj(a);
            v.push((**b).clone());
            v
        }
        _ => vec![f.clone()],
    }
}

/// Reads `(φ>ψ1)∧…∧(φ>ψn) ⊃ (φ>ψ)` (or `φ>ψ` for n = 0) as `(φ, [ψi], ψ)`.
fn rck_shape(f: &Formula) -> Option<(Formula, Vec<Formula>, Formula)> {
    match f {
        Formula::Counterfactual(a, c) => Some(((**a).clone(), Vec::new(), (**c).clone())),
        Formula::MatImp(l, r) => {
            let Formula::Counterfactual(a, c) = &**r else { return None };
            let mut psis = Vec::new();
            for conj in flatten_conj(l) {
                match conj {
                    Formula::Counterfactual(a2, p) if a2 == *a => psis.push(*p),
                    _ => return None,
                }
            }
            Some(((**a).clone(), psis, (**c).clone()))
        }
        _ => None,
    }
}

fn rck_expansion(hyp: &Formula, f: &Formula) -> Result<Derivation, String> {
    let (phi, psis, psi) = rck_shape(f).ok_or("not of the form (φ>ψ1)&…&(φ>ψn) => (φ>ψ)")?;
    if *hyp != premise_form(&psis, &psi) {
        return Err("the cited line is not the matching premise (ψ1&…&ψn) => ψ".into());
    }
    Ok(derive_rck(&phi, &psis, &psi))
}

fn cc_expansion(f: &Formula) -> Result<Derivation, String> {
    let err = "not of the form (φ>ψ1)&…&(φ>ψn) => (φ>(ψ1&…&ψn))";
    let (phi, psis, psi) = rck_shape(f).ok_or(err)?;
    if psis.is_empty() || Formula::conj(&psis).as_ref() != Some(&psi) {
        return Err(err.into());
    }
    let mut b = Derivation::default();
    push_gcc(&mut b, &phi, &psis);
    Ok(b)
}

// ---------------------------------------------------------------------------
// Derived rules

use Justification as J;

/// Primitive proof of `((φ>a)∧(φ>b)) ⊃ (φ>(a∧b))`; returns the final line.
fn push_cc(d: &mut Derivation, phi: &Formula, a: &Formula, b: &Formula) -> usize {
    let ab = Formula::and(a.clone(), b.clone());
    let b_ab = Formula::imp(b.clone(), ab.clone());
    let cf = |x: &Formula| Formula::cf(phi.clone(), x.clone());
    let l1 = d.push(Formula::imp(a.clone(), b_ab.clone()), J::Axiom(SchemeId::Ax(1)));
    let l2 = d.push(cf(d.formula(l1)), J::Rcn(l1));
    let big_a = cf(a);
    let big_b = cf(&b_ab);
    let big_c = Formula::imp(cf(b), cf(&ab));
    let l3 = d.push(
        Formula::imp(d.formula(l2).clone(), Formula::imp(big_a.clone(), big_b.clone())),
        J::Axiom(SchemeId::Ax(2)),
    );
    let l4 = d.push(Formula::imp(big_a.clone(), big_b.clone()), J::Mp(l2, l3));
    let l5 = d.push(Formula::imp(big_b.clone(), big_c.clone()), J::Axiom(SchemeId::Ax(2)));
    let ac = Formula::imp(big_a.clone(), big_c.clone());
    let l6 = d.push(
        Formula::imp(
            Formula::imp(big_a.clone(), big_b.clone()),
            Formula::imp(Formula::imp(big_b, big_c.clone()), ac.clone()),
        ),
        J::Axiom(SchemeId::Ax(1)),
    );
    let l7 = d.push(d.formula(l6).clone().into_consequent(), J::Mp(l4, l6));
    let l8 = d.push(ac.clone(), J::Mp(l5, l7));
    let target = Formula::imp(Formula::and(big_a.clone(), cf(b)), cf(&ab));
    let l9 = d.push(Formula::imp(ac, target.clone()), J::Axiom(SchemeId::Ax(1)));
    d.push(target, J::Mp(l8, l9))
}

trait Consequent {
    fn into_consequent(self) -> Formula;
}

impl Consequent for Formula {
    fn into_consequent(self) -> Formula {
        match self {
            Formula::MatImp(_, b) => *b,
            other => other,
        }
    }
}

/// Primitive proof of `(φ>ψ1)∧…∧(φ>ψn) ⊃ (φ>(ψ1∧…∧ψn))` for n ≥ 1.
fn push_gcc(d: &mut Derivation, phi: &Formula, psis: &[Formula]) -> usize {
    let cf = |x: &Formula| Formula::cf(phi.clone(), x.clone());
    if psis.len() == 1 {
        let c = cf(&psis[0]);
        return d.push(Formula::imp(c.clone(), c), J::Axiom(SchemeId::Ax(1)));
    }
    let mut acc = psis[0].clone();
    let mut lhs = cf(&psis[0]);
    let mut last = 0;
    for (k, next) in psis[1..].iter().enumerate() {
        let cc = push_cc(d, phi, &acc, next);
        let new_acc = Formula::and(acc.clone(), next.clone());
        let new_lhs = Formula::and(lhs.clone(), cf(next));
        if k == 0 {
            last = cc;
        } else {
            // (P⊃X) ⊃ (((X∧Y)⊃Z) ⊃ ((P∧Y)⊃Z))
            let (p, x, y, z) = (lhs.clone(), cf(&acc), cf(next), cf(&new_acc));
            let pz = Formula::imp(Formula::and(p.clone(), y.clone()), z.clone());
            let xyz = Formula::imp(Formula::and(x.clone(), y), z);
            let t = d.push(
                Formula::imp(Formula::imp(p, x), Formula::imp(xyz.clone(), pz.clone())),
                J::Axiom(SchemeId::Ax(1)),
            );
            let m1 = d.push(Formula::imp(xyz, pz.clone()), J::Mp(last, t));
            last = d.push(pz, J::Mp(cc, m1));
        }
        acc = new_acc;
        lhs = new_lhs;
    }
    last
}

/// Primitive proof of the RCK conclusion from the premise at line `hyp`.
fn push_rck(d: &mut Derivation, hyp: usize, phi: &Formula, psis: &[Formula], psi: &Formula) -> usize {
    let cf = |x: &Formula| Formula::cf(phi.clone(), x.clone());
    let rcn = d.push(cf(d.formula(hyp)), J::Rcn(hyp));
    if psis.is_empty() {
        return rcn;
    }
    let big = Formula::conj(psis).expect("nonempty");
    let step = Formula::imp(cf(&big), cf(psi));
    let ax2 = d.push(Formula::imp(d.formula(rcn).clone(), step.clone()), J::Axiom(SchemeId::Ax(2)));
    let l4 = d.push(step.clone(), J::Mp(rcn, ax2));
    if psis.len() == 1 {
        return l4;
    }
    let g = push_gcc(d, phi, psis);
    let lhs = Formula::conj(&psis.iter().map(cf).collect::<Vec<_>>()).expect("nonempty");
    let goal = Formula::imp(lhs.clone(), cf(psi));
    let t = d.push(
        Formula::imp(d.formula(g).clone(), Formula::imp(step.clone(), goal.clone())),
        J::Axiom(SchemeId::Ax(1)),
    );
    let m = d.push(Formula::imp(step, goal.clone()), J::Mp(g, t));
    d.push(goal, J::Mp(l4, m))
}

/// Primitive derivation of the conjunction lemma for counterfactuals.
pub fn derive_cc(phi: &Formula, psi1: &Formula, psi2: &Formula) -> Derivation {
    let mut d = Derivation::default();
    push_cc(&mut d, phi, psi1, psi2);
    d
}

/// Primitive derivation of `(φ>ψ1)∧…∧(φ>ψn) ⊃ (φ>ψ)` from the hypothesis `(ψ1∧…∧ψn) ⊃ ψ`.
pub fn derive_rck(phi: &Formula, psis: &[Formula], psi: &Formula) -> Derivation {
    let mut d = Derivation::default();
    let h = d.push(premise_form(psis, psi), J::Hyp);
    push_rck(&mut d, h, phi, psis, psi);
    d
}

/// Rewrites `rck`, `cc`, `pc` and inline-axiom `mp` lines into axioms, MP and RCN.
pub fn expand_primitive(d: &Derivation) -> Derivation {
    let mut out = Derivation::default();
    let mut map = vec![0usize];
    for line in &d.lines {
        let f = &line.formula;
        let idx = match &line.just {
            J::Rck(i) => {
                let (phi, psis, psi) = rck_shape(f).expect("checked shape");
                push_rck(&mut out, map[*i], &phi, &psis, &psi)
            }
            J::Cc => {
                let (phi, psis, _) = rck_shape(f).expect("checked shape");
                push_gcc(&mut out, &phi, &psis)
            }
            J::Pc(is) if is.is_empty() => out.push(f.clone(), J::Axiom(SchemeId::Ax(1))),
            J::Pc(is) => {
                let chain = is.iter().rev().fold(f.clone(), |acc, &i| Formula::imp(d.formula(i).clone(), acc));
                let mut cur = out.push(chain, J::Axiom(SchemeId::Ax(1)));
                for &i in is {
                    let next = out.formula(cur).clone().into_consequent();
                    cur = out.push(next, J::Mp(map[i], cur));
                }
                cur
            }
            J::MpAx(i, id) => {
                let ax = out.push(Formula::imp(d.formula(*i).clone(), f.clone()), J::Axiom(*id));
                out.push(f.clone(), J::Mp(map[*i], ax))
            }
            other => {
                let just = match other {
                    J::Mp(i, j) => J::Mp(map[*i], map[*j]),
                    J::Rcn(i) => J::Rcn(map[*i]),
                    J::Rcea(i) => J::Rcea(map[*i]),
                    J::Nec(i) => J::Nec(map[*i]),
                    j => j.clone(),
                };
                out.push(f.clone(), just)
            }
        };
        map.push(idx);
    }
    out
}

// ---------------------------------------------------------------------------
// Internalization

/// Builds a term `t` and a derivation of `t:χ` for the last line `χ` of `d`.
///
/// Modus ponens steps are internalized through the application axiom, so the major
/// premise `φ ⊃ χ` must be accompanied by an earlier line `φ > χ`.
pub fn internalize(d: &Derivation, cs: &ConstantSpecification) -> Result<(Term, Derivation), HilbertError> {
    let dialect = Dialect::LPCint;
    if *cs != ConstantSpecification::AxiomaticallyAppropriate {
        return Err(HilbertError::Internalize("the constant specification must be axiomatically appropriate".into()));
    }
    if !d.hypotheses().is_empty() {
        return Err(HilbertError::Internalize("derivation has hypotheses".into()));
    }
    if d.is_empty() {
        return Err(HilbertError::Internalize("empty derivation".into()));
    }
    check_derivation(d, dialect, cs)?;
    let prim = expand_primitive(d);
    let mut st = Internalizer { src: &prim, out: prim.clone(), memo: vec![None; prim.len() + 1] };
    let (t, line) = st.term(prim.len())?;
    let mut out = st.out;
    let last = out.formula(line).clone();
    out.lines.truncate(line);
    debug_assert_eq!(last, Formula::just(t.clone(), prim.formula(prim.len()).clone()));
    Ok((t, out))
}

struct Internalizer<'a> {
    src: &'a Derivation,
    out: Derivation,
    memo: Vec<Option<(Term, usize)>>,
}

impl Internalizer<'_> {
    fn err(k: usize, msg: &str) -> HilbertError {
        HilbertError::Internalize(format!("line {k}: {msg}"))
    }

    /// Term for source line `k` and the output line proving `term:χ_k`.
    fn term(&mut self, k: usize) -> Result<(Term, usize), HilbertError> {
        if let Some(hit) = &self.memo[k] {
            return Ok(hit.clone());
        }
        let chi = self.src.formula(k).clone();
        let res = match self.src.lines[k - 1].just.clone() {
            J::Axiom(_) => {
                let m = match_axiom(&chi, Dialect::LPCint).ok_or_else(|| Self::err(k, "not an axiom"))?;
                let c = Term::Constant(scheme_constant(m.scheme));
                let l = self.out.push(Formula::just(c.clone(), chi), J::Cs);
                (c, l)
            }
            J::Cs => {
                let Formula::Just(c, _) = &chi else { return Err(Self::err(k, "malformed cs line")) };
                let t = Term::bang(c.clone());
                let goal = Formula::just(t.clone(), chi.clone());
                let ax9 = Formula::cf(chi.clone(), goal.clone());
                let a9 = self.out.push(ax9.clone(), J::Axiom(SchemeId::Ax(9)));
                let a4 = self.out.push(
                    Formula::imp(ax9, Formula::imp(chi.clone(), goal.clone())),
                    J::Axiom(SchemeId::Ax(4)),
                );
                let m = self.out.push(Formula::imp(chi, goal.clone()), J::Mp(a9, a4));
                let l = self.out.push(goal, J::Mp(k, m));
                (t, l)
            }
            J::Rcn(i) => {
                let Formula::Counterfactual(phi, psi) = &chi else { return Err(Self::err(k, "malformed rcn line")) };
                let (s, si) = self.term(i)?;
                let t = Term::pair(s.clone(), (**phi).clone());
                let goal = Formula::just(t.clone(), chi.clone());
                let a10 = self.out.push(
                    Formula::imp(Formula::just(s, (**psi).clone()), goal.clone()),
                    J::Axiom(SchemeId::Ax(10)),
                );
                let l = self.out.push(goal, J::Mp(si, a10));
                (t, l)
            }
            J::Mp(i, _) => {
                let phi = self.src.formula(i).clone();
                let want = Formula::cf(phi.clone(), chi.clone());
                let w = (1..k)
                    .find(|&w| *self.src.formula(w) == want)
                    .ok_or_else(|| Self::err(k, "modus ponens without an earlier counterfactual `φ > χ`"))?;
                let (r, ri) = self.term(w)?;
                let (s, si) = self.term(i)?;
                let t = Term::app(r.clone(), s.clone());
                let goal = Formula::just(t.clone(), chi.clone());
                let a = Formula::just(r, want);
                let b = Formula::just(s, phi);
                let ab = Formula::and(a.clone(), b.clone());
                let taut = self.out.push(
                    Formula::imp(a.clone(), Formula::imp(b.clone(), ab.clone())),
                    J::Axiom(SchemeId::Ax(1)),
                );
                let m1 = self.out.push(Formula::imp(b, ab.clone()), J::Mp(ri, taut));
                let conj = self.out.push(ab.clone(), J::Mp(si, m1));
                let ax5 = Formula::cf(ab.clone(), goal.clone());
                let a5 = self.out.push(ax5.clone(), J::Axiom(SchemeId::Ax(5)));
                let a4 = self.out.push(
                    Formula::imp(ax5, Formula::imp(ab.clone(), goal.clone())),
                    J::Axiom(SchemeId::Ax(4)),
                );
                let m2 = self.out.push(Formula::imp(ab, goal.clone()), J::Mp(a5, a4));
                let l = self.out.push(goal, J::Mp(conj, m2));
                (t, l)
            }
            other => return Err(Self::err(k, &format!("`{other}` cannot be internalized"))),
        };
        self.memo[k] = Some(res.clone());
        Ok(res)
    }
}

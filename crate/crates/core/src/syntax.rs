//! Formula and term ASTs, the text grammar, printing, and structural queries.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Justification terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Constant(String),
    Variable(String),
    App(Box<Term>, Box<Term>),
    Sum(Box<Term>, Box<Term>),
    Bang(Box<Term>),
    Pair(Box<Term>, Box<Formula>),
}

/// Formulas of every dialect. `Neg` is classical outside JRC and Routley negation inside it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    MatImp(Box<Formula>, Box<Formula>),
    Counterfactual(Box<Formula>, Box<Formula>),
    RelImp(Box<Formula>, Box<Formula>),
    RelCf(Box<Formula>, Box<Formula>),
    Just(Term, Box<Formula>),
    Box(Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dialect {
    LPCplus,
    LPCint,
    LPCprime,
    LPCKplus,
    J4Cplus,
    JCplus,
    L,
    JRC,
}

/// Atom used to build the `false` abbreviation.
pub const FALSUM_ATOM: &str = "p0";

impl Dialect {
    pub const ALL: [Dialect; 8] = [
        Dialect::LPCplus,
        Dialect::LPCint,
        Dialect::LPCprime,
        Dialect::LPCKplus,
        Dialect::J4Cplus,
        Dialect::JCplus,
        Dialect::L,
        Dialect::JRC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dialect::LPCplus => "LPCplus",
            Dialect::LPCint => "LPCint",
            Dialect::LPCprime => "LPCprime",
            Dialect::LPCKplus => "LPCKplus",
            Dialect::J4Cplus => "J4Cplus",
            Dialect::JCplus => "JCplus",
            Dialect::L => "L",
            Dialect::JRC => "JRC",
        }
    }

    pub fn is_jrc(self) -> bool {
        self == Dialect::JRC
    }

    pub fn allows_pair(self) -> bool {
        self == Dialect::LPCint
    }

    /// Box is native to L; JRC accepts it as the universal modality over normal states.
    pub fn allows_box(self) -> bool {
        matches!(self, Dialect::L | Dialect::JRC)
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, ' ' | '_' | '-'))
            .collect::<String>()
            .to_ascii_lowercase();
        let d = match key.as_str() {
            "lpcplus" | "lpc+" | "lpc" => Dialect::LPCplus,
            "lpcint" => Dialect::LPCint,
            "lpcprime" | "lpc'" => Dialect::LPCprime,
            "lpckplus" | "lpck+" | "lpck" => Dialect::LPCKplus,
            "j4cplus" | "j4c+" | "j4c" => Dialect::J4Cplus,
            "jcplus" | "jc+" | "jc" => Dialect::JCplus,
            "l" | "j4c+s5" => Dialect::L,
            "jrc" => Dialect::JRC,
            _ => return Err(format!("unknown dialect `{s}`")),
        };
        Ok(d)
    }
}

impl serde::Serialize for Dialect {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Formulas and terms serialize as their canonical text.
impl serde::Serialize for Formula {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Dialect {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Constructors

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }
    #[allow(clippy::should_implement_trait)]
    pub fn neg(f: Formula) -> Formula {
        Formula::Neg(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::MatImp(Box::new(a), Box::new(b))
    }
    pub fn cf(a: Formula, b: Formula) -> Formula {
        Formula::Counterfactual(Box::new(a), Box::new(b))
    }
    pub fn rel_imp(a: Formula, b: Formula) -> Formula {
        Formula::RelImp(Box::new(a), Box::new(b))
    }
    pub fn rel_cf(a: Formula, b: Formula) -> Formula {
        Formula::RelCf(Box::new(a), Box::new(b))
    }
    pub fn just(t: Term, f: Formula) -> Formula {
        Formula::Just(t, Box::new(f))
    }
    pub fn boxed(f: Formula) -> Formula {
        Formula::Box(Box::new(f))
    }
    /// φ ∨ ψ ≔ ¬(¬φ ∧ ¬ψ)
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::neg(Formula::and(Formula::neg(a), Formula::neg(b)))
    }
    /// φ ≡ ψ ≔ (φ ⊃ ψ) ∧ (ψ ⊃ φ)
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }
    /// φ ⇔ ψ ≔ (φ > ψ) ∧ (ψ > φ)
    pub fn cf_iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::cf(a.clone(), b.clone()), Formula::cf(b, a))
    }
    /// φ ∘ ψ ≔ ∼(φ → ∼ψ)
    pub fn fusion(a: Formula, b: Formula) -> Formula {
        Formula::neg(Formula::rel_imp(a, Formula::neg(b)))
    }
    pub fn falsum() -> Formula {
        let p = Formula::atom(FALSUM_ATOM);
        Formula::and(p.clone(), Formula::neg(p))
    }
    pub fn verum() -> Formula {
        Formula::neg(Formula::falsum())
    }
    /// Left-nested conjunction of a nonempty list.
    pub fn conj(items: &[Formula]) -> Option<Formula> {
        let mut it = items.iter().cloned();
        let first = it.next()?;
        Some(it.fold(first, Formula::and))
    }

    pub fn is_boolean(&self) -> bool {
        matches!(self, Formula::Neg(_) | Formula::And(..) | Formula::MatImp(..))
    }
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::Constant(name.to_string())
    }
    pub fn var(name: &str) -> Term {
        Term::Variable(name.to_string())
    }
    pub fn app(a: Term, b: Term) -> Term {
        Term::App(Box::new(a), Box::new(b))
    }
    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }
    pub fn bang(t: Term) -> Term {
        Term::Bang(Box::new(t))
    }
    pub fn pair(t: Term, f: Formula) -> Term {
        Term::Pair(Box::new(t), Box::new(f))
    }

    /// Number of `·` nodes.
    pub fn app_count(&self) -> usize {
        match self {
            Term::Constant(_) | Term::Variable(_) => 0,
            Term::App(a, b) => 1 + a.app_count() + b.app_count(),
            Term::Sum(a, b) => a.app_count() + b.app_count(),
            Term::Bang(t) | Term::Pair(t, _) => t.app_count(),
        }
    }

    /// Number of pair nodes.
    pub fn pair_count(&self) -> usize {
        match self {
            Term::Constant(_) | Term::Variable(_) => 0,
            Term::App(a, b) | Term::Sum(a, b) => a.pair_count() + b.pair_count(),
            Term::Bang(t) => t.pair_count(),
            Term::Pair(t, _) => 1 + t.pair_count(),
        }
    }
}

/// Justification-of-true-belief macro: φ ∧ t:φ.
pub fn jtb(phi: &Formula, t: &Term) -> Formula {
    Formula::and(phi.clone(), Formula::just(t.clone(), phi.clone()))
}

/// Nozick knowledge macro: φ ∧ t:φ ∧ (¬φ > ¬t:φ) ∧ (φ > t:φ).
pub fn knowledge(phi: &Formula, t: &Term) -> Formula {
    let tp = Formula::just(t.clone(), phi.clone());
    Formula::conj(&[
        phi.clone(),
        tp.clone(),
        Formula::cf(Formula::neg(phi.clone()), Formula::neg(tp.clone())),
        Formula::cf(phi.clone(), tp),
    ])
    .expect("nonempty")
}

// ---------------------------------------------------------------------------
// Structural queries

/// Subformulas, extending the inductive clauses uniformly to every connective.
pub fn subformulas(f: &Formula) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    collect_sub(f, &mut out);
    out
}

fn collect_sub(f: &Formula, out: &mut BTreeSet<Formula>) {
    if !out.insert(f.clone()) {
        return;
    }
    match f {
        Formula::Atom(_) => {}
        Formula::Neg(a) | Formula::Just(_, a) | Formula::Box(a) => collect_sub(a, out),
        Formula::And(a, b)
        | Formula::MatImp(a, b)
        | Formula::Counterfactual(a, b)
        | Formula::RelImp(a, b)
        | Formula::RelCf(a, b) => {
            collect_sub(a, out);
            collect_sub(b, out);
        }
    }
}

/// Subformula closure of a set of formulas.
pub fn closure<'a>(fs: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    for f in fs {
        collect_sub(f, &mut out);
    }
    out
}

/// Atom names occurring anywhere in `f`, including inside pair terms.
pub fn atoms(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_atoms(f, &mut out);
    out
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::Atom(p) => {
            out.insert(p.clone());
        }
        Formula::Neg(a) | Formula::Box(a) => collect_atoms(a, out),
        Formula::Just(t, a) => {
            collect_term_atoms(t, out);
            collect_atoms(a, out);
        }
        Formula::And(a, b)
        | Formula::MatImp(a, b)
        | Formula::Counterfactual(a, b)
        | Formula::RelImp(a, b)
        | Formula::RelCf(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
    }
}

fn collect_term_atoms(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Constant(_) | Term::Variable(_) => {}
        Term::App(a, b) | Term::Sum(a, b) => {
            collect_term_atoms(a, out);
            collect_term_atoms(b, out);
        }
        Term::Bang(a) => collect_term_atoms(a, out),
        Term::Pair(a, f) => {
            collect_term_atoms(a, out);
            collect_atoms(f, out);
        }
    }
}

/// Every term occurring in `f`, closed under subterms.
pub fn terms(f: &Formula) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    collect_terms(f, &mut out);
    out
}

fn collect_terms(f: &Formula, out: &mut BTreeSet<Term>) {
    match f {
        Formula::Atom(_) => {}
        Formula::Neg(a) | Formula::Box(a) => collect_terms(a, out),
        Formula::Just(t, a) => {
            subterms_into(t, out);
            collect_terms(a, out);
        }
        Formula::And(a, b)
        | Formula::MatImp(a, b)
        | Formula::Counterfactual(a, b)
        | Formula::RelImp(a, b)
        | Formula::RelCf(a, b) => {
            collect_terms(a, out);
            collect_terms(b, out);
        }
    }
}

/// Adds `t` and all its subterms to `out`.
pub fn subterms_into(t: &Term, out: &mut BTreeSet<Term>) {
    if !out.insert(t.clone()) {
        return;
    }
    match t {
        Term::Constant(_) | Term::Variable(_) => {}
        Term::App(a, b) | Term::Sum(a, b) => {
            subterms_into(a, out);
            subterms_into(b, out);
        }
        Term::Bang(a) => subterms_into(a, out),
        Term::Pair(a, f) => {
            subterms_into(a, out);
            collect_terms(f, out);
        }
    }
}

/// Checks dialect well-formedness; returns a description of the first violation.
pub fn check_dialect(f: &Formula, d: Dialect) -> Result<(), String> {
    match f {
        Formula::Atom(_) => Ok(()),
        Formula::Neg(a) => check_dialect(a, d),
        Formula::And(a, b) => {
            check_dialect(a, d)?;
            check_dialect(b, d)
        }
        Formula::MatImp(a, b) | Formula::Counterfactual(a, b) => {
            if d.is_jrc() {
                return Err(format!("`{}` is not available in {d}", connective(f)));
            }
            check_dialect(a, d)?;
            check_dialect(b, d)
        }
        Formula::RelImp(a, b) | Formula::RelCf(a, b) => {
            if !d.is_jrc() {
                return Err(format!("`{}` is only available in JRC", connective(f)));
            }
            check_dialect(a, d)?;
            check_dialect(b, d)
        }
        Formula::Box(a) => {
            if !d.allows_box() {
                return Err(format!("`[]` is not available in {d}"));
            }
            check_dialect(a, d)
        }
        Formula::Just(t, a) => {
            check_term_dialect(t, d)?;
            check_dialect(a, d)
        }
    }
}

fn check_term_dialect(t: &Term, d: Dialect) -> Result<(), String> {
    match t {
        Term::Variable(_) => Ok(()),
        Term::Constant(c) if d.is_jrc() => Err(format!("constant `{c}` is not available in JRC")),
        Term::Constant(_) => Ok(()),
        Term::App(a, b) | Term::Sum(a, b) => {
            if d.is_jrc() && matches!(t, Term::App(..)) {
                return Err("`.` is not available in JRC".into());
            }
            check_term_dialect(a, d)?;
            check_term_dialect(b, d)
        }
        Term::Bang(a) => {
            if d.is_jrc() {
                return Err("`!` is not available in JRC".into());
            }
            check_term_dialect(a, d)
        }
        Term::Pair(a, f) => {
            if !d.allows_pair() {
                return Err(format!("pair terms are not available in {d}"));
            }
            check_term_dialect(a, d)?;
            check_dialect(f, d)
        }
    }
}

fn connective(f: &Formula) -> &'static str {
    match f {
        Formula::MatImp(..) => "=>",
        Formula::Counterfactual(..) => ">",
        Formula::RelImp(..) => "->",
        Formula::RelCf(..) => "~>",
        _ => "?",
    }
}

// ---------------------------------------------------------------------------
// Printing

const PREC_COND: u8 = 1;
const PREC_AND: u8 = 3;
const PREC_PREFIX: u8 = 4;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::Atom(_) | Formula::Neg(_) | Formula::Just(..) | Formula::Box(_) => PREC_PREFIX,
        Formula::And(..) => PREC_AND,
        _ => PREC_COND,
    }
}

/// Canonical text; `parse_formula(print_formula(f), d) == f` for well-formed `f`.
pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    write_formula(f, 0, &mut s);
    s
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    write_term(t, 0, &mut s);
    s
}

fn write_formula(f: &Formula, min: u8, out: &mut String) {
    let p = prec(f);
    let paren = p < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Atom(a) => out.push_str(a),
        Formula::Neg(a) => {
            out.push('~');
            write_formula(a, PREC_PREFIX, out);
        }
        Formula::Box(a) => {
            out.push_str("[]");
            write_formula(a, PREC_PREFIX, out);
        }
        Formula::Just(t, a) => {
            write_justifier(t, out);
            out.push(':');
            write_formula(a, PREC_PREFIX, out);
        }
        Formula::And(a, b) => {
            write_formula(a, PREC_AND, out);
            out.push_str(" & ");
            write_formula(b, PREC_PREFIX, out);
        }
        Formula::MatImp(a, b)
        | Formula::Counterfactual(a, b)
        | Formula::RelImp(a, b)
        | Formula::RelCf(a, b) => {
            write_formula(a, PREC_AND, out);
            out.push(' ');
            out.push_str(connective(f));
            out.push(' ');
            write_formula(b, PREC_COND, out);
        }
    }
    if paren {
        out.push(')');
    }
}

const TPREC_SUM: u8 = 1;
const TPREC_APP: u8 = 2;
const TPREC_ATOM: u8 = 3;

fn tprec(t: &Term) -> u8 {
    match t {
        Term::Sum(..) => TPREC_SUM,
        Term::App(..) => TPREC_APP,
        _ => TPREC_ATOM,
    }
}

fn write_justifier(t: &Term, out: &mut String) {
    write_term(t, TPREC_ATOM, out);
}

fn write_term(t: &Term, min: u8, out: &mut String) {
    let paren = tprec(t) < min;
    if paren {
        out.push('(');
    }
    match t {
        Term::Constant(n) | Term::Variable(n) => out.push_str(n),
        Term::Sum(a, b) => {
            write_term(a, TPREC_SUM, out);
            out.push('+');
            write_term(b, TPREC_APP, out);
        }
        Term::App(a, b) => {
            write_term(a, TPREC_APP, out);
            out.push('.');
            write_term(b, TPREC_ATOM, out);
        }
        Term::Bang(a) => {
            out.push('!');
            write_term(a, TPREC_ATOM, out);
        }
        Term::Pair(a, f) => {
            out.push('<');
            write_term(a, 0, out);
            out.push(',');
            write_formula(f, PREC_AND, out);
            out.push('>');
        }
    }
    if paren {
        out.push(')');
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

// ---------------------------------------------------------------------------
// Lexing

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Lexical,
    Grammar,
    Dialect,
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SyntaxErrorKind::Lexical => "lexical error",
            SyntaxErrorKind::Grammar => "grammar error",
            SyntaxErrorKind::Dialect => "dialect violation",
        })
    }
}

/// Parse failure with a 1-based character column and the offending token text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at column {column} near `{token}`: {message}")]
pub struct SyntaxError {
    pub kind: SyntaxErrorKind,
    pub column: usize,
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Atom(String),
    Var(String),
    Const(String),
    True,
    False,
    Tilde,
    Bang,
    Amp,
    Bar,
    At,
    MatImp,
    Gt,
    RelImp,
    RelCf,
    Iff,
    CfIff,
    LParen,
    RParen,
    LAngle,
    Comma,
    Colon,
    BoxOp,
    Dot,
    Plus,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    column: usize,
    text: String,
}

fn ident_class(s: &str) -> Tok {
    let rest_digits = |r: &str| r.chars().all(|c| c.is_ascii_digit());
    if s == "true" {
        return Tok::True;
    }
    if s == "false" {
        return Tok::False;
    }
    let mut cs = s.chars();
    let first = cs.next().unwrap_or(' ');
    let rest = cs.as_str();
    if matches!(first, 's' | 't' | 'x' | 'y' | 'z') && rest_digits(rest) {
        return Tok::Var(s.to_string());
    }
    if first == 'c'
        && (rest_digits(rest)
            || (rest.starts_with('_') && rest.len() > 1 && rest[1..].chars().all(is_ident_char)))
    {
        return Tok::Const(s.to_string());
    }
    Tok::Atom(s.to_string())
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_lowercase() {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: ident_class(&s), column, text: s });
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = match c {
            '~' if peek(1) == Some('>') => (Tok::RelCf, 2),
            '~' | '¬' | '∼' => (Tok::Tilde, 1),
            '!' => (Tok::Bang, 1),
            '&' | '∧' => (Tok::Amp, 1),
            '|' | '∨' => (Tok::Bar, 1),
            '@' | '∘' => (Tok::At, 1),
            '=' if peek(1) == Some('>') => (Tok::MatImp, 2),
            '=' if peek(1) == Some('=') => (Tok::Iff, 2),
            '⊃' => (Tok::MatImp, 1),
            '>' | '⟩' => (Tok::Gt, 1),
            '-' if peek(1) == Some('>') => (Tok::RelImp, 2),
            '→' => (Tok::RelImp, 1),
            '⇝' => (Tok::RelCf, 1),
            '≡' => (Tok::Iff, 1),
            '<' if peek(1) == Some('=') && peek(2) == Some('>') => (Tok::CfIff, 3),
            '⇔' => (Tok::CfIff, 1),
            '<' | '⟨' => (Tok::LAngle, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            ':' => (Tok::Colon, 1),
            '[' if peek(1) == Some(']') => (Tok::BoxOp, 2),
            '□' => (Tok::BoxOp, 1),
            '.' | '·' => (Tok::Dot, 1),
            '+' => (Tok::Plus, 1),
            '⊤' => (Tok::True, 1),
            '⊥' => (Tok::False, 1),
            _ => {
                return Err(SyntaxError {
                    kind: SyntaxErrorKind::Lexical,
                    column,
                    token: c.to_string(),
                    message: "unexpected character".into(),
                })
            }
        };
        let s: String = chars[i..i + len].iter().collect();
        out.push(Token { tok, column, text: s });
        i += len;
    }
    out.push(Token { tok: Tok::End, column: chars.len() + 1, text: "<end>".into() });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses `text` in `dialect`, expanding abbreviations.
pub fn parse_formula(text: &str, dialect: Dialect) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, dialect };
    let f = p.parse_iff()?;
    p.expect(Tok::End, "end of input")?;
    Ok(f)
}

/// Parses a standalone term in `dialect`.
pub fn parse_term(text: &str, dialect: Dialect) -> Result<Term, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, dialect };
    let t = p.parse_term()?;
    p.expect(Tok::End, "end of input")?;
    Ok(t)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dialect: Dialect,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: SyntaxErrorKind, tok: &Token, message: impl Into<String>) -> SyntaxError {
        SyntaxError { kind, column: tok.column, token: tok.text.clone(), message: message.into() }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Token, SyntaxError> {
        if *self.peek() == t {
            Ok(self.bump())
        } else {
            Err(self.err(SyntaxErrorKind::Grammar, self.cur(), format!("expected {what}")))
        }
    }

    fn dialect_gate(&self, tok: &Token, ok: bool, what: &str) -> Result<(), SyntaxError> {
        if ok {
            Ok(())
        } else {
            Err(self.err(
                SyntaxErrorKind::Dialect,
                tok,
                format!("{what} is not available in {}", self.dialect),
            ))
        }
    }

    fn parse_iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.parse_cond()?;
        loop {
            match self.peek() {
                Tok::Iff => {
                    let t = self.bump();
                    self.dialect_gate(&t, !self.dialect.is_jrc(), "`==`")?;
                    let right = self.parse_cond()?;
                    left = Formula::iff(left, right);
                }
                Tok::CfIff => {
                    let t = self.bump();
                    self.dialect_gate(&t, !self.dialect.is_jrc(), "`<=>`")?;
                    let right = self.parse_cond()?;
                    left = Formula::cf_iff(left, right);
                }
                _ => return Ok(left),
            }
        }
    }

    fn parse_cond(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.parse_or()?;
        let jrc = self.dialect.is_jrc();
        let build: fn(Formula, Formula) -> Formula = match self.peek() {
            Tok::MatImp => {
                let t = self.bump();
                self.dialect_gate(&t, !jrc, "`=>`")?;
                Formula::imp
            }
            Tok::Gt => {
                let t = self.bump();
                self.dialect_gate(&t, !jrc, "`>`")?;
                Formula::cf
            }
            Tok::RelImp => {
                let t = self.bump();
                self.dialect_gate(&t, jrc, "`->`")?;
                Formula::rel_imp
            }
            Tok::RelCf => {
                let t = self.bump();
                self.dialect_gate(&t, jrc, "`~>`")?;
                Formula::rel_cf
            }
            _ => return Ok(left),
        };
        let right = self.parse_cond()?;
        Ok(build(left, right))
    }

    fn parse_or(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.parse_and()?;
        loop {
            match self.peek() {
                Tok::Bar => {
                    self.bump();
                    let right = self.parse_and()?;
                    left = Formula::or(left, right);
                }
                Tok::At => {
                    let t = self.bump();
                    self.dialect_gate(&t, self.dialect.is_jrc(), "`@`")?;
                    let right = self.parse_and()?;
                    left = Formula::fusion(left, right);
                }
                _ => return Ok(left),
            }
        }
    }

    fn parse_and(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.parse_prefix()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.parse_prefix()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn parse_prefix(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::neg(self.parse_prefix()?))
            }
            Tok::BoxOp => {
                let t = self.bump();
                self.dialect_gate(&t, self.dialect.allows_box(), "`[]`")?;
                Ok(Formula::boxed(self.parse_prefix()?))
            }
            Tok::Atom(a) => {
                self.bump();
                Ok(Formula::Atom(a))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::verum())
            }
            Tok::False => {
                self.bump();
                Ok(Formula::falsum())
            }
            Tok::Var(_) | Tok::Const(_) | Tok::Bang | Tok::LAngle => self.parse_justification(),
            Tok::LParen => {
                let save = self.pos;
                if let Ok(t) = self.parse_term() {
                    if *self.peek() == Tok::Colon {
                        self.bump();
                        let body = self.parse_prefix()?;
                        return Ok(Formula::just(t, body));
                    }
                }
                self.pos = save;
                self.bump();
                let f = self.parse_iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => Err(self.err(SyntaxErrorKind::Grammar, self.cur(), "expected a formula")),
        }
    }

    fn parse_justification(&mut self) -> Result<Formula, SyntaxError> {
        let t = self.parse_term()?;
        self.expect(Tok::Colon, "`:` after justification term")?;
        let body = self.parse_prefix()?;
        Ok(Formula::just(t, body))
    }

    fn parse_term(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.parse_term_app()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let right = self.parse_term_app()?;
            left = Term::sum(left, right);
        }
        Ok(left)
    }

    fn parse_term_app(&mut self) -> Result<Term, SyntaxError> {
        let mut left = self.parse_term_atom()?;
        while *self.peek() == Tok::Dot {
            let t = self.bump();
            self.dialect_gate(&t, !self.dialect.is_jrc(), "`.`")?;
            let right = self.parse_term_atom()?;
            left = Term::app(left, right);
        }
        Ok(left)
    }

    fn parse_term_atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Variable(v))
            }
            Tok::Const(c) => {
                let t = self.bump();
                self.dialect_gate(&t, !self.dialect.is_jrc(), "a proof constant")?;
                Ok(Term::Constant(c))
            }
            Tok::Bang => {
                let t = self.bump();
                self.dialect_gate(&t, !self.dialect.is_jrc(), "`!`")?;
                Ok(Term::bang(self.parse_term_atom()?))
            }
            Tok::LAngle => {
                let t = self.bump();
                self.dialect_gate(&t, self.dialect.allows_pair(), "a pair term")?;
                let inner = self.parse_term()?;
                self.expect(Tok::Comma, "`,` in pair term")?;
                let f = self.parse_or()?;
                self.expect(Tok::Gt, "`>` closing pair term")?;
                Ok(Term::pair(inner, f))
            }
            Tok::LParen => {
                self.bump();
                let t = self.parse_term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.err(SyntaxErrorKind::Grammar, self.cur(), "expected a term")),
        }
    }
}

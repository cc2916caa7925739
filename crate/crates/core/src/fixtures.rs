//! Shipped fixture corpus: example models, derivations and sequents with expected verdicts.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::doc::{ModelDoc, ModelError};
use crate::falsifier::find_countermodel;
use crate::hilbert::{check_derivation, Derivation, HilbertError};
use crate::kripke::{check_conditions, ConstantSpecification, KripkeModel, VariantProfile, Witness};
use crate::routley::{check_jrc_conditions, RoutleyModel};
use crate::syntax::{closure, parse_formula, Dialect, Formula, SyntaxError};
use crate::tableau::{prove, verify_result, Budget, TableauError};

const FILES: &[(&str, &str)] = &[
    ("corpus.json", include_str!("../fixtures/corpus.json")),
    ("gettier.json", include_str!("../fixtures/gettier.json")),
    ("mcginn.json", include_str!("../fixtures/mcginn.json")),
    ("aumann.json", include_str!("../fixtures/aumann.json")),
    ("hyper_material.json", include_str!("../fixtures/hyper_material.json")),
    ("hyper_counterfactual.json", include_str!("../fixtures/hyper_counterfactual.json")),
    ("rcea.json", include_str!("../fixtures/rcea.json")),
    ("counterpossible.json", include_str!("../fixtures/counterpossible.json")),
    ("excluded_middle.json", include_str!("../fixtures/excluded_middle.json")),
    ("sheep.json", include_str!("../fixtures/sheep.json")),
    ("cc_lemma.txt", include_str!("../fixtures/cc_lemma.txt")),
    ("rck.txt", include_str!("../fixtures/rck.txt")),
    ("rck_inlined.txt", include_str!("../fixtures/rck_inlined.txt")),
];

/// Contents of a shipped fixture file.
pub fn fixture_text(name: &str) -> Option<&'static str> {
    FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Names of all shipped fixture files.
pub fn fixture_names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("missing fixture file `{0}`")]
    Missing(String),
    #[error("malformed corpus manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("case `{case}`: {message}")]
    Case { case: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsEntry {
    pub constant: String,
    pub formula: String,
}

/// One corpus entry. Exactly one of `model`, `derivation` or `goal` is set.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCase {
    pub name: String,
    #[serde(default)]
    pub dialect: Option<Dialect>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub derivation: Option<String>,
    #[serde(default)]
    pub premises: Vec<String>,
    #[serde(default)]
    pub goal: Option<String>,
    #[serde(default)]
    pub cs: Vec<CsEntry>,
    pub checks: Vec<Expectation>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expectation {
    pub note: String,
    #[serde(flatten)]
    pub kind: Check,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Check {
    Eval { state: String, formula: String, expect: bool },
    Truthset { formula: String, expect: Vec<String> },
    Valid { formula: String, expect: bool },
    Consequence { premises: Vec<String>, formula: String, expect: bool },
    Conditions {
        profile: Dialect,
        queries: Vec<String>,
        expect_pass: bool,
        #[serde(default)]
        failing: Vec<String>,
        #[serde(default)]
        witness_states: Option<Vec<String>>,
        #[serde(default)]
        witness_formulas: Option<Vec<String>>,
    },
    Derivation { expect: bool },
    Prove {
        expect: String,
        #[serde(default)]
        rules: Option<Vec<String>>,
        #[serde(default)]
        max_steps: Option<usize>,
    },
    Falsify { bound: usize, expect: bool },
}

impl Check {
    fn label(&self) -> String {
        match self {
            Check::Eval { state, formula, .. } => format!("eval {formula} @ {state}"),
            Check::Truthset { formula, .. } => format!("truthset {formula}"),
            Check::Valid { formula, .. } => format!("valid {formula}"),
            Check::Consequence { premises, formula, .. } => format!("consequence [{}] {formula}", premises.join(", ")),
            Check::Conditions { profile, .. } => format!("conditions {profile}"),
            Check::Derivation { .. } => "derivation".into(),
            Check::Prove { .. } => "prove".into(),
            Check::Falsify { bound, .. } => format!("falsify bound {bound}"),
        }
    }
}

/// Result of one expectation.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub case: String,
    pub check: String,
    pub note: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "pass" } else { "FAIL" };
        write!(f, "{mark}  {}: {} ({})", self.case, self.check, self.note)?;
        if !self.passed {
            write!(f, " -- {}", self.detail)?;
        }
        Ok(())
    }
}

/// Parses the corpus manifest.
pub fn corpus() -> Result<Vec<FixtureCase>, FixtureError> {
    let text = fixture_text("corpus.json").ok_or_else(|| FixtureError::Missing("corpus.json".into()))?;
    Ok(serde_json::from_str(text)?)
}

/// Loads a shipped model document.
pub fn load_model_doc(name: &str) -> Result<ModelDoc, FixtureError> {
    let text = fixture_text(name).ok_or_else(|| FixtureError::Missing(name.into()))?;
    ModelDoc::from_json(text).map_err(|e| FixtureError::Case { case: name.into(), message: e.to_string() })
}

pub fn load_kripke(name: &str) -> Result<KripkeModel, FixtureError> {
    let doc = load_model_doc(name)?;
    KripkeModel::from_doc(&doc).map_err(|e| FixtureError::Case { case: name.into(), message: e.to_string() })
}

pub fn load_routley(name: &str) -> Result<RoutleyModel, FixtureError> {
    let doc = load_model_doc(name)?;
    RoutleyModel::from_doc(&doc).map_err(|e| FixtureError::Case { case: name.into(), message: e.to_string() })
}

/// Runs every expectation of every case.
pub fn run_corpus() -> Result<Vec<Outcome>, FixtureError> {
    let mut out = Vec::new();
    for case in corpus()? {
        out.extend(run_case(&case)?);
    }
    Ok(out)
}

enum Subject {
    Kripke(KripkeModel),
    Routley(RoutleyModel),
    Derivation(Derivation),
    Sequent(Vec<Formula>, Formula),
}

#[derive(Debug, Error)]
enum CheckError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error("{0}")]
    Mismatch(String),
}

pub fn run_case(case: &FixtureCase) -> Result<Vec<Outcome>, FixtureError> {
    let bad = |message: String| FixtureError::Case { case: case.name.clone(), message };
    let (subject, dialect) = if let Some(file) = &case.model {
        let doc = load_model_doc(file)?;
        let d = doc.dialect;
        let s = if d.is_jrc() {
            Subject::Routley(RoutleyModel::from_doc(&doc).map_err(|e| bad(e.to_string()))?)
        } else {
            Subject::Kripke(KripkeModel::from_doc(&doc).map_err(|e| bad(e.to_string()))?)
        };
        (s, d)
    } else {
        let d = case.dialect.ok_or_else(|| bad("missing dialect".into()))?;
        if let Some(file) = &case.derivation {
            let text = fixture_text(file).ok_or_else(|| FixtureError::Missing(file.clone()))?;
            (Subject::Derivation(Derivation::parse(text, d).map_err(|e| bad(e.to_string()))?), d)
        } else {
            let goal = case.goal.as_ref().ok_or_else(|| bad("case has no subject".into()))?;
            let parse = |s: &String| parse_formula(s, d).map_err(|e| bad(e.to_string()));
            let premises = case.premises.iter().map(parse).collect::<Result<Vec<_>, _>>()?;
            (Subject::Sequent(premises, parse(goal)?), d)
        }
    };
    let mut cs = BTreeSet::new();
    for e in &case.cs {
        cs.insert((e.constant.clone(), parse_formula(&e.formula, dialect).map_err(|e| bad(e.to_string()))?));
    }
    let cs = ConstantSpecification::Explicit(cs);
    Ok(case
        .checks
        .iter()
        .map(|exp| {
            let res = run_check(&subject, dialect, &cs, &exp.kind);
            Outcome {
                case: case.name.clone(),
                check: exp.kind.label(),
                note: exp.note.clone(),
                passed: res.is_ok(),
                detail: res.err().map(|e| e.to_string()).unwrap_or_default(),
            }
        })
        .collect())
}

fn expect_eq<T: PartialEq + fmt::Debug>(what: &str, got: T, want: T) -> Result<(), CheckError> {
    if got == want {
        Ok(())
    } else {
        Err(CheckError::Mismatch(format!("{what}: got {got:?}, expected {want:?}")))
    }
}

fn run_check(subject: &Subject, d: Dialect, cs: &ConstantSpecification, check: &Check) -> Result<(), CheckError> {
    let parse = |s: &str| parse_formula(s, d);
    match (check, subject) {
        (Check::Eval { state, formula, expect }, Subject::Kripke(m)) => {
            expect_eq("truth value", m.eval(state, &parse(formula)?, d)?, *expect)
        }
        (Check::Eval { state, formula, expect }, Subject::Routley(m)) => {
            expect_eq("truth value", m.eval(state, &parse(formula)?)?, *expect)
        }
        (Check::Truthset { formula, expect }, Subject::Kripke(m)) => {
            let want: BTreeSet<String> = expect.iter().cloned().collect();
            expect_eq("truth set", m.truthset(&parse(formula)?, d)?, want)
        }
        (Check::Truthset { formula, expect }, Subject::Routley(m)) => {
            let want: BTreeSet<String> = expect.iter().cloned().collect();
            expect_eq("truth set", m.truthset(&parse(formula)?)?, want)
        }
        (Check::Valid { formula, expect }, Subject::Kripke(m)) => {
            expect_eq("validity", m.valid_in_model(&parse(formula)?, d)?, *expect)
        }
        (Check::Valid { formula, expect }, Subject::Routley(m)) => {
            expect_eq("validity", m.valid_in_model(&parse(formula)?)?, *expect)
        }
        (Check::Consequence { premises, formula, expect }, Subject::Kripke(m)) => {
            let ps = premises.iter().map(|p| parse(p)).collect::<Result<Vec<_>, _>>()?;
            expect_eq("consequence", m.consequence(&ps, &parse(formula)?, d)?, *expect)
        }
        (Check::Consequence { premises, formula, expect }, Subject::Routley(m)) => {
            let ps = premises.iter().map(|p| parse(p)).collect::<Result<Vec<_>, _>>()?;
            expect_eq("consequence", m.consequence(&ps, &parse(formula)?)?, *expect)
        }
        (Check::Conditions { profile, queries, expect_pass, failing, witness_states, witness_formulas }, _) => {
            let qs = queries.iter().map(|q| parse(q)).collect::<Result<Vec<_>, _>>()?;
            let (failures, first): (Vec<String>, Option<Witness>) = match subject {
                Subject::Kripke(m) => {
                    let rep = check_conditions(m, &VariantProfile::for_dialect(*profile), &m.default_universe(&qs), cs);
                    let fs: Vec<_> = rep.failures().collect();
                    (fs.iter().map(|r| r.condition.to_string()).collect(), fs.first().and_then(|r| r.witness.clone()))
                }
                Subject::Routley(m) => {
                    let rep = check_jrc_conditions(m, &closure(qs.iter()));
                    let fs: Vec<_> = rep.results.iter().filter(|r| !r.passed).collect();
                    (fs.iter().map(|r| r.condition.to_string()).collect(), fs.first().and_then(|r| r.witness.clone()))
                }
                _ => return Err(CheckError::Mismatch("condition check needs a model".into())),
            };
            expect_eq("passes", failures.is_empty(), *expect_pass)?;
            if !*expect_pass {
                expect_eq("failing conditions", failures, failing.clone())?;
                let w = first.unwrap_or_default();
                if let Some(states) = witness_states {
                    expect_eq("witness states", &w.states, states)?;
                }
                if let Some(fs) = witness_formulas {
                    let want = fs.iter().map(|f| parse(f)).collect::<Result<BTreeSet<_>, _>>()?;
                    expect_eq("witness formulas", w.formulas.into_iter().collect::<BTreeSet<_>>(), want)?;
                }
            }
            Ok(())
        }
        (Check::Derivation { expect }, Subject::Derivation(der)) => {
            let res = check_derivation(der, d, cs);
            match (res, expect) {
                (Ok(_), true) => Ok(()),
                (Err(e), true) => Err(e.into()),
                (Ok(_), false) => Err(CheckError::Mismatch("derivation accepted".into())),
                (Err(_), false) => Ok(()),
            }
        }
        (Check::Prove { expect, rules, max_steps }, Subject::Sequent(ps, g)) => {
            let mut budget = Budget::default();
            if let Some(n) = max_steps {
                budget.max_steps = *n;
            }
            let r = prove(ps, g, budget)?;
            expect_eq("verdict", r.verdict(), expect.as_str())?;
            if let (Some(want), Some(tree)) = (rules, r.tree()) {
                let got: Vec<String> = tree.rule_sequence().iter().map(|r| r.name().to_string()).collect();
                expect_eq("rule sequence", &got, want)?;
            }
            if !verify_result(&r, ps, g, 3) {
                return Err(CheckError::Mismatch("result failed verification".into()));
            }
            Ok(())
        }
        (Check::Falsify { bound, expect }, Subject::Sequent(ps, g)) => {
            expect_eq("countermodel found", find_countermodel(ps, g, d, *bound).is_some(), *expect)
        }
        _ => Err(CheckError::Mismatch("check does not apply to this kind of case".into())),
    }
}

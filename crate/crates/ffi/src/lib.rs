//! C ABI for the `cjl` toolkit.
//!
//! Every fallible function returns a [`CjlStatus`]. On failure a message is stored per thread
//! and can be read with [`cjl_last_error`]. Handles are opaque and must be released with their
//! matching `*_free` function. Strings returned through out-parameters are owned by the caller
//! and released with [`cjl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cjl::doc::ModelDoc;
use cjl::falsifier::find_countermodel;
use cjl::hilbert::{check_derivation, Derivation};
use cjl::kripke::{check_conditions, ConstantSpecification, KripkeModel, VariantProfile};
use cjl::routley::{check_jrc_conditions, RoutleyModel};
use cjl::syntax::closure;
use cjl::tableau::{prove, Budget, ProofResult};
use cjl::{parse_formula, Dialect, Formula};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Model = 4,
    Dialect = 5,
    Tableau = 6,
    Derivation = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjlDialect {
    LpcPlus = 0,
    LpcInt = 1,
    LpcPrime = 2,
    LpcKPlus = 3,
    J4CPlus = 4,
    JCPlus = 5,
    L = 6,
    Jrc = 7,
}

impl From<CjlDialect> for Dialect {
    fn from(d: CjlDialect) -> Dialect {
        match d {
            CjlDialect::LpcPlus => Dialect::LPCplus,
            CjlDialect::LpcInt => Dialect::LPCint,
            CjlDialect::LpcPrime => Dialect::LPCprime,
            CjlDialect::LpcKPlus => Dialect::LPCKplus,
            CjlDialect::J4CPlus => Dialect::J4Cplus,
            CjlDialect::JCPlus => Dialect::JCplus,
            CjlDialect::L => Dialect::L,
            CjlDialect::Jrc => Dialect::JRC,
        }
    }
}

/// Tableau outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CjlVerdict {
    Closed = 0,
    Open = 1,
    Exhausted = 2,
}

/// Parsed formula together with the dialect it was parsed in.
pub struct CjlFormula {
    formula: Formula,
    dialect: Dialect,
}

enum Model {
    Kripke(KripkeModel),
    Routley(RoutleyModel),
}

/// Finite Kripke or Routley model.
pub struct CjlModel {
    model: Model,
    dialect: Dialect,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (CjlStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CjlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CjlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CjlStatus::Panic
        }
    }
}

fn null() -> Failure {
    (CjlStatus::NullArgument, "null argument".into())
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| (CjlStatus::InvalidUtf8, e.to_string()))
}

unsafe fn writable<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(null)
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

unsafe fn formulas<'a>(items: *const *const CjlFormula, len: usize) -> Result<Vec<&'a CjlFormula>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if items.is_null() {
        return Err(null());
    }
    std::slice::from_raw_parts(items, len).iter().map(|&p| p.as_ref().ok_or_else(null)).collect()
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cjl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread, or null after a successful call.
///
/// # Safety
/// The returned pointer is valid until the next `cjl_*` call on the same thread and must not be freed.
#[no_mangle]
pub unsafe extern "C" fn cjl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn cjl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `text` in `dialect` and stores a new formula handle in `*out`.
///
/// # Safety
/// `text` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_formula_parse(
    text: *const c_char,
    dialect: CjlDialect,
    out: *mut *mut CjlFormula,
) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        let d = Dialect::from(dialect);
        let formula = parse_formula(c_str(text)?, d).map_err(|e| (CjlStatus::Syntax, e.to_string()))?;
        *slot = Box::into_raw(Box::new(CjlFormula { formula, dialect: d }));
        Ok(())
    })
}

/// Canonical text of a formula, written to `*out` as an owned string.
///
/// # Safety
/// `formula` must be a live handle and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_formula_to_string(formula: *const CjlFormula, out: *mut *mut c_char) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        let f = formula.as_ref().ok_or_else(null)?;
        *slot = owned_string(f.formula.to_string());
        Ok(())
    })
}

/// Releases a formula handle.
///
/// # Safety
/// `formula` must be null or a handle from [`cjl_formula_parse`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn cjl_formula_free(formula: *mut CjlFormula) {
    if !formula.is_null() {
        drop(Box::from_raw(formula));
    }
}

/// Loads a model from its JSON document and stores a new handle in `*out`.
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_model_from_json(json: *const c_char, out: *mut *mut CjlModel) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        let merr = |e: cjl::doc::ModelError| (CjlStatus::Model, e.to_string());
        let doc = ModelDoc::from_json(c_str(json)?).map_err(merr)?;
        let model = if doc.dialect.is_jrc() {
            Model::Routley(RoutleyModel::from_doc(&doc).map_err(merr)?)
        } else {
            Model::Kripke(KripkeModel::from_doc(&doc).map_err(merr)?)
        };
        *slot = Box::into_raw(Box::new(CjlModel { model, dialect: doc.dialect }));
        Ok(())
    })
}

/// Releases a model handle.
///
/// # Safety
/// `model` must be null or a handle from [`cjl_model_from_json`] that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn cjl_model_free(model: *mut CjlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Evaluates `formula` at the named state and writes the truth value to `*out`.
///
/// # Safety
/// `model` and `formula` must be live handles, `state` a valid nul-terminated string and `out`
/// a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_model_eval(
    model: *const CjlModel,
    state: *const c_char,
    formula: *const CjlFormula,
    out: *mut bool,
) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        let m = model.as_ref().ok_or_else(null)?;
        let f = formula.as_ref().ok_or_else(null)?;
        let s = c_str(state)?;
        let res = match &m.model {
            Model::Kripke(k) => k.eval(s, &f.formula, m.dialect),
            Model::Routley(r) => r.eval(s, &f.formula),
        };
        *slot = res.map_err(|e| (CjlStatus::Model, e.to_string()))?;
        Ok(())
    })
}

/// Checks the frame conditions of `profile` over the subformula closure of `queries` and
/// writes whether all of them hold to `*out`. Routley models take the JRC profile only. The condition report is left in [`cjl_last_error`]
/// only when a condition fails.
///
/// # Safety
/// `model` must be a live handle, `queries` must point to `len` live formula handles (or be
/// null when `len` is 0) and `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_model_check_conditions(
    model: *const CjlModel,
    profile: CjlDialect,
    queries: *const *const CjlFormula,
    len: usize,
    out: *mut bool,
) -> CjlStatus {
    let mut report = None;
    let status = guard(|| {
        let slot = writable(out)?;
        let m = model.as_ref().ok_or_else(null)?;
        let qs: Vec<Formula> = formulas(queries, len)?.into_iter().map(|f| f.formula.clone()).collect();
        let profile = Dialect::from(profile);
        if profile.is_jrc() != matches!(m.model, Model::Routley(_)) {
            return Err((CjlStatus::Dialect, format!("profile {profile} does not fit a {} model", m.dialect)));
        }
        let (passed, text) = match &m.model {
            Model::Kripke(k) => {
                let rep = check_conditions(
                    k,
                    &VariantProfile::for_dialect(profile),
                    &k.default_universe(&qs),
                    &ConstantSpecification::default(),
                );
                (rep.passed(), rep.to_string())
            }
            Model::Routley(r) => {
                let rep = check_jrc_conditions(r, &closure(qs.iter()));
                (rep.passed(), rep.to_string())
            }
        };
        *slot = passed;
        if !passed {
            report = Some(text);
        }
        Ok(())
    });
    if let Some(r) = report {
        set_error(&r);
    }
    status
}

/// Runs the JRC tableau on `premises ⊢ goal` and writes the verdict to `*out`.
///
/// # Safety
/// `premises` must point to `len` live formula handles (or be null when `len` is 0), `goal`
/// must be a live handle and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_prove(
    premises: *const *const CjlFormula,
    len: usize,
    goal: *const CjlFormula,
    max_fresh_labels: u32,
    max_steps: usize,
    out: *mut CjlVerdict,
) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        let g = goal.as_ref().ok_or_else(null)?;
        let ps = formulas(premises, len)?;
        if let Some(f) = ps.iter().copied().chain([g]).find(|f| !f.dialect.is_jrc()) {
            return Err((CjlStatus::Dialect, format!("the tableau needs JRC formulas, got {}", f.dialect)));
        }
        let ps: Vec<Formula> = ps.into_iter().map(|f| f.formula.clone()).collect();
        let budget = Budget { max_fresh_labels, max_steps };
        let r = prove(&ps, &g.formula, budget).map_err(|e| (CjlStatus::Tableau, e.to_string()))?;
        *slot = match r {
            ProofResult::Closed(_) => CjlVerdict::Closed,
            ProofResult::Open { .. } => CjlVerdict::Open,
            ProofResult::Exhausted(_) => CjlVerdict::Exhausted,
        };
        Ok(())
    })
}

/// Searches for a countermodel of at most `bound` states to `premises ⊢ goal` in the goal's
/// dialect. Writes its JSON document to `*out`, or null when there is none.
///
/// # Safety
/// `premises` must point to `len` live formula handles (or be null when `len` is 0), `goal`
/// must be a live handle and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_falsify(
    premises: *const *const CjlFormula,
    len: usize,
    goal: *const CjlFormula,
    bound: usize,
    out: *mut *mut c_char,
) -> CjlStatus {
    guard(|| {
        let slot = writable(out)?;
        *slot = ptr::null_mut();
        let g = goal.as_ref().ok_or_else(null)?;
        let ps = formulas(premises, len)?;
        if let Some(f) = ps.iter().find(|f| f.dialect != g.dialect) {
            return Err((CjlStatus::Dialect, format!("premise in {} but goal in {}", f.dialect, g.dialect)));
        }
        let ps: Vec<Formula> = ps.into_iter().map(|f| f.formula.clone()).collect();
        if let Some(cm) = find_countermodel(&ps, &g.formula, g.dialect, bound) {
            *slot = owned_string(cm.to_json());
        }
        Ok(())
    })
}

/// Checks a derivation in text form against an empty constant specification and writes
/// whether it is accepted to `*out`. The rejection reason is left in [`cjl_last_error`].
///
/// # Safety
/// `text` must be a valid nul-terminated string and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn cjl_check_derivation(
    text: *const c_char,
    dialect: CjlDialect,
    out: *mut bool,
) -> CjlStatus {
    let mut reason = None;
    let status = guard(|| {
        let slot = writable(out)?;
        let d = Dialect::from(dialect);
        let der = Derivation::parse(c_str(text)?, d).map_err(|e| (CjlStatus::Derivation, e.to_string()))?;
        match check_derivation(&der, d, &ConstantSpecification::default()) {
            Ok(_) => *slot = true,
            Err(e) => {
                *slot = false;
                reason = Some(e.to_string());
            }
        }
        Ok(())
    });
    if let Some(r) = reason {
        set_error(&r);
    }
    status
}

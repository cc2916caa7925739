use cjl::hilbert::{
    check_derivation, derive_cc, derive_rck, expand_primitive, internalize, Derivation, HilbertError,
    Justification,
};
use cjl::kripke::ConstantSpecification;
use cjl::{parse_formula, Dialect, Formula, Term};

fn f(s: &str) -> Formula {
    parse_formula(s, Dialect::LPCint).unwrap()
}

fn der(text: &str, d: Dialect) -> Derivation {
    Derivation::parse(text, d).unwrap()
}

fn appropriate() -> ConstantSpecification {
    ConstantSpecification::AxiomaticallyAppropriate
}

#[test]
fn generated_lemmas_check() {
    let d = Dialect::LPCplus;
    let cs = ConstantSpecification::default();
    let cc = derive_cc(&f("p"), &f("q"), &f("r"));
    let rep = check_derivation(&cc, d, &cs).unwrap();
    assert_eq!(rep.conclusion, Some(f("(p > q) & (p > r) => (p > q & r)")));
    let rck = derive_rck(&f("p"), &[f("q"), f("r"), f("u")], &f("u & q"));
    let rep = check_derivation(&rck, d, &cs).unwrap();
    assert_eq!(rep.premises, vec![f("q & r & u => u & q")]);
    let prim = expand_primitive(&rck);
    assert_eq!(check_derivation(&prim, d, &cs).unwrap().conclusion, rep.conclusion);
    assert!(prim.lines.iter().all(|l| matches!(
        l.just,
        Justification::Axiom(_) | Justification::Mp(..) | Justification::Rcn(_) | Justification::Hyp
    )));
}

#[test]
fn axiom_line_internalizes_to_its_constant() {
    let d = der("1. p > p ; ax3", Dialect::LPCint);
    let (t, out) = internalize(&d, &appropriate()).unwrap();
    assert_eq!(t, Term::constant("c3"));
    assert_eq!(out.conclusion(), Some(&f("c3:(p > p)")));
}

#[test]
fn detachment_through_identity_applies_terms() {
    let text = "1. p > p ; ax3\n2. (p > p) => (p > p) ; ax1\n3. (p > p) > (p > p) ; ax3\n4. p > p ; mp 1 2\n";
    let d = der(text, Dialect::LPCint);
    let (t, out) = internalize(&d, &appropriate()).unwrap();
    assert_eq!(t, Term::app(Term::constant("c3"), Term::constant("c3")));
    assert_eq!(t.app_count(), d.mp_count());
    let rep = check_derivation(&out, Dialect::LPCint, &appropriate()).unwrap();
    assert_eq!(rep.conclusion, Some(Formula::just(t, f("p > p"))));
}

#[test]
fn necessitation_builds_pair_terms() {
    let d = der("1. p > p ; ax3\n2. q > (p > p) ; rcn 1\n", Dialect::LPCint);
    let (t, out) = internalize(&d, &appropriate()).unwrap();
    assert_eq!(t, Term::pair(Term::constant("c3"), f("q")));
    assert_eq!(t.pair_count(), 1);
    check_derivation(&out, Dialect::LPCint, &appropriate()).unwrap();
}

#[test]
fn internalization_rejects_hypotheses_and_bare_detachment() {
    let hyp = der("1. p ; hyp\n2. q > p ; rcn 1\n", Dialect::LPCint);
    assert!(matches!(internalize(&hyp, &appropriate()), Err(HilbertError::Internalize(_))));
    let bare = der("1. p > p ; ax3\n2. (p > p) => (q => q) ; ax1\n3. q => q ; mp 1 2\n", Dialect::LPCint);
    assert!(matches!(internalize(&bare, &appropriate()), Err(HilbertError::Internalize(_))));
    let empty_cs = internalize(&der("1. p > p ; ax3", Dialect::LPCint), &ConstantSpecification::default());
    assert!(empty_cs.is_err());
}

#[test]
fn rejections_name_the_line() {
    let d = Dialect::LPCplus;
    let cs = ConstantSpecification::default();
    let bad = der("1. p > p ; ax3\n2. p > q ; ax3\n", d);
    assert!(matches!(check_derivation(&bad, d, &cs), Err(HilbertError::Check { line: 2, .. })));
    let forward = der("1. p > p ; ax3\n2. q > (p > p) ; rcn 3\n3. p > p ; ax3\n", d);
    assert!(matches!(check_derivation(&forward, d, &cs), Err(HilbertError::Check { line: 2, .. })));
    let cs_line = der("1. c3:(p > p) ; cs\n", d);
    assert!(matches!(check_derivation(&cs_line, d, &cs), Err(HilbertError::Check { line: 1, .. })));
    assert!(check_derivation(&cs_line, d, &appropriate()).is_ok());
}

#[test]
fn dialects_restrict_schemes() {
    let cs = ConstantSpecification::default();
    let factive = der("1. x:p > p ; ax8", Dialect::LPCplus);
    assert!(check_derivation(&factive, Dialect::LPCplus, &cs).is_ok());
    assert!(check_derivation(&factive, Dialect::J4Cplus, &cs).is_err());
    let pair = der("1. x:q => <x,p>:(p > q) ; ax10", Dialect::LPCint);
    assert!(check_derivation(&pair, Dialect::LPCint, &cs).is_ok());
    assert!(matches!(check_derivation(&pair, Dialect::JRC, &cs), Err(HilbertError::Check { .. })));
}

#[test]
fn parse_errors_report_the_text_line() {
    let e = Derivation::parse("1. p > p ; ax3\n2. p > ; ax3\n", Dialect::LPCplus).unwrap_err();
    assert!(matches!(e, HilbertError::Parse { line: 2, .. }), "{e}");
    let e = Derivation::parse("1. p > p ; axiom9\n", Dialect::LPCplus).unwrap_err();
    assert!(matches!(e, HilbertError::Parse { line: 1, .. }), "{e}");
}

#[test]
fn text_form_round_trips() {
    let d = der(cjl::fixtures::fixture_text("rck_inlined.txt").unwrap(), Dialect::LPCplus);
    assert_eq!(Derivation::parse(&d.to_text(), Dialect::LPCplus).unwrap(), d);
}

mod common;

use std::collections::BTreeSet;

use cjl::hilbert::{schemes_for, SchemeId};
use cjl::kripke::Evaluator;
use cjl::routley::RoutleyEvaluator;
use cjl::syntax::closure;
use cjl::tableau::{prove, Budget, ProofResult};
use cjl::{Dialect, Formula};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Whether some sampled model of `d` falsifies an instance of `id` at a normal state.
fn refuted_somewhere(d: Dialect, id: SchemeId, seed: u64) -> bool {
    let mut rng = StdRng::seed_from_u64(seed);
    let batch: Vec<Formula> = (0..10).map(|_| common::axiom_instance(&mut rng, id, Dialect::LPCplus)).collect();
    let universe = closure(batch.iter());
    (0..400).any(|_| {
        let Some(m) = common::sample_kripke(&mut rng, d, &universe, 3) else { return false };
        let ev = Evaluator::new(&m);
        batch.iter().any(|f| m.normal_states().any(|w| !ev.holds(w, f)))
    })
}

#[test]
fn sampled_models_satisfy_their_own_axioms() {
    let mut rng = StdRng::seed_from_u64(11);
    for d in [Dialect::LPCplus, Dialect::JCplus, Dialect::L] {
        for id in schemes_for(d) {
            let batch: Vec<Formula> = (0..5).map(|_| common::axiom_instance(&mut rng, id, d)).collect();
            let universe = closure(batch.iter());
            let mut seen = 0;
            for _ in 0..200 {
                let Some(m) = common::sample_kripke(&mut rng, d, &universe, 3) else { continue };
                let ev = Evaluator::new(&m);
                for f in &batch {
                    assert!(m.normal_states().all(|w| ev.holds(w, f)), "{d} {id}: {f}");
                }
                seen += 1;
                if seen == 5 {
                    break;
                }
            }
            assert_eq!(seen, 5, "{d} {id}: too few models");
        }
    }
}

#[test]
fn factivity_needs_reflexive_evidence() {
    assert!(refuted_somewhere(Dialect::JCplus, SchemeId::Ax(8), 1));
    assert!(!refuted_somewhere(Dialect::LPCplus, SchemeId::Ax(8), 1));
}

#[test]
fn positive_introspection_needs_transitive_evidence() {
    assert!(refuted_somewhere(Dialect::JCplus, SchemeId::Ax(9), 2));
}

#[test]
fn closed_tableaux_hold_in_sampled_routley_models() {
    let mut rng = StdRng::seed_from_u64(5);
    let mut closed = 0;
    for (premises, goal) in common::jrc_suite(&mut rng, 120) {
        let Ok(ProofResult::Closed(_)) = prove(&premises, &goal, Budget { max_fresh_labels: 6, max_steps: 500 }) else {
            continue;
        };
        closed += 1;
        let universe: BTreeSet<Formula> = closure(premises.iter().chain([&goal]));
        let mut models = 0;
        for _ in 0..300 {
            let Some(m) = common::sample_routley(&mut rng, &universe, 3) else { continue };
            let ev = RoutleyEvaluator::new(&m);
            for w in m.normal_states() {
                if premises.iter().all(|p| ev.holds(w, p)) {
                    assert!(ev.holds(w, &goal), "{goal} fails at {} of {:?}", m.states[w], m.to_doc());
                }
            }
            models += 1;
            if models == 10 {
                break;
            }
        }
        assert!(models > 0, "no sampled model for {goal}");
    }
    assert!(closed >= 5, "only {closed} closed sequents");
}

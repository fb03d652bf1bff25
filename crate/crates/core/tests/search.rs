mod common;

use closedform::problem::read_problem;
use closedform::search::StageFailure;
use closedform::{
    parse_expr_with, parse_problem, solve, verify_candidate, PdeProblem, SearchConfig, SearchFailure, ZeroVerdict,
};
use common::corpus_dir;
use proptest::prelude::*;

fn unsolvable() -> PdeProblem {
    parse_problem(b"name = no-sine\nunknown = u(x, t)\npde = u_t - a*u_xx = 0\ncoefficients = a\ntime = t\nic = sin(x)\n")
        .unwrap()
}

#[test]
fn budget_exhaustion_is_reported() {
    let p = unsolvable();
    let mut cfg = SearchConfig::for_problem(&p);
    cfg.budget = 10;
    let err = solve(&p, &cfg).unwrap_err();
    assert!(err.is_budget_exhausted(), "{err}");
    assert_eq!(
        err,
        SearchFailure::Stage { var: "t".into(), failure: StageFailure::BudgetExhausted { evaluated: 10 } }
    );
}

#[test]
fn exhausted_pool_is_not_a_budget_failure() {
    let p = unsolvable();
    let mut cfg = SearchConfig::for_problem(&p);
    cfg.max_insertions = 1;
    let err = solve(&p, &cfg).unwrap_err();
    assert!(matches!(err, SearchFailure::Stage { failure: StageFailure::Exhausted { .. }, .. }), "{err}");
}

#[test]
fn empty_function_set_is_a_config_error() {
    let p = unsolvable();
    let mut cfg = SearchConfig::for_problem(&p);
    cfg.functions.clear();
    assert!(matches!(solve(&p, &cfg), Err(SearchFailure::Config(_))));
    let mut cfg = SearchConfig::for_problem(&p);
    cfg.stage_order = Some(vec![closedform::name("y")]);
    assert!(matches!(solve(&p, &cfg), Err(SearchFailure::Config(_))));
}

#[test]
fn undecided_residual_never_passes() {
    let p = read_problem(&corpus_dir().join("heat-exp.prob")).unwrap();
    // log of a negative quantity cannot be sampled anywhere
    let c = parse_expr_with("log(-1 - x^2) + a*t", &p.plain_context()).unwrap();
    let r = verify_candidate(&p, &c);
    assert!(!matches!(r.pde_verdict, ZeroVerdict::CertifiedZero));
    assert_eq!(r.fitness(), 1);
    assert!(!r.passed());
}

#[test]
fn seed_does_not_change_the_answer() {
    let p = read_problem(&corpus_dir().join("advection.prob")).unwrap();
    let mut cfg = SearchConfig::for_problem(&p);
    cfg.record_timing = false;
    let a = solve(&p, &cfg).unwrap();
    cfg.seed = 99;
    cfg.batch_size = 7;
    let b = solve(&p, &cfg).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn larger_budgets_find_the_same_solution(extra in 0u64..500) {
        let p = read_problem(&corpus_dir().join("heat-exp.prob")).unwrap();
        let mut cfg = SearchConfig::for_problem(&p);
        cfg.record_timing = false;
        let base = solve(&p, &cfg).unwrap();
        cfg.budget = base.stats.candidates_evaluated + extra;
        let again = solve(&p, &cfg).unwrap();
        prop_assert_eq!(&again, &base);
        if base.stats.candidates_evaluated > 1 {
            cfg.budget = base.stats.candidates_evaluated - 1;
            prop_assert!(solve(&p, &cfg).unwrap_err().is_budget_exhausted());
        }
    }
}

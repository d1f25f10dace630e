mod common;

use persuasion_core::fixtures;
use persuasion_core::genericity::random_instance;
use persuasion_core::robustness::{
    classify, classify_in_box, evaluate_policy_over_types, pseudo_optimal_value, search_robust_policy, witness_type_set,
    Criterion, Verdict,
};
use persuasion_core::solver::solve_optimal;
use persuasion_core::{PersuasionInstance, UtilityBox};
use proptest::prelude::*;
use rand::Rng;

/// Checks the classifier's verdict against what nearby types actually do.
fn check_verdict(inst: &PersuasionInstance, seed: u64) {
    let report = classify(inst).unwrap();
    let (pseudo, c) = pseudo_optimal_value(inst).unwrap();
    assert!(pseudo <= report.optimal_value + 1e-9);
    match report.verdict {
        Verdict::Robust => {
            let mut rng = common::seeded(seed);
            let bx = UtilityBox::uniform_width(inst.clone(), 1e-5).unwrap();
            for _ in 0..30 {
                let v = solve_optimal(inst, &bx.sample_type(&mut rng)).unwrap().value;
                assert!(v >= report.optimal_value - 1e-3, "robust optimum {} drops to {v}", report.optimal_value);
            }
        }
        Verdict::Fragile => {
            assert!(c > inst.tol.opt);
            for delta in [0.1, 0.01, 0.001] {
                let bx = UtilityBox::uniform_width(inst.clone(), delta).unwrap();
                let r = classify_in_box(&bx).unwrap();
                match r.witness_gap {
                    Some(gap) => {
                        assert!(gap >= c / 2.0 - 1e-9, "gap {gap} below {} at delta {delta}", c / 2.0);
                        assert!(bx.contains(r.witness_type.as_ref().unwrap(), 0.0));
                    }
                    // Boxes clipped against [0, 1] may leave no room to move.
                    None => assert!(!bx.is_interior(), "interior box without a witness at delta {delta}"),
                }
            }
        }
    }
}

#[test]
fn verdicts_hold_on_fixtures() {
    for inst in [
        fixtures::example1(),
        fixtures::example2(),
        fixtures::example2_perturbed(0.05),
        fixtures::example1_box(0.1).unwrap().reference,
    ] {
        check_verdict(&inst, 5);
    }
    assert_eq!(classify(&fixtures::example2_perturbed(0.05)).unwrap().verdict, Verdict::Robust);
}

#[test]
fn verdicts_hold_on_random_instances() {
    let mut rng = common::seeded(2718);
    let mut fragile = 0;
    for k in 0..20 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        check_verdict(&random_instance(n, m, &mut rng).unwrap(), k);
    }
    for k in 0..40 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let inst = common::coarse_instance(n, m, &mut rng);
        if classify(&inst).unwrap().verdict == Verdict::Fragile {
            fragile += 1;
        }
        check_verdict(&inst, 100 + k);
    }
    assert!(fragile > 0, "coarse suite produced no fragile instance");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classifier_never_reports_internal_errors(inst in common::instance_strategy()) {
        let r = classify(&inst);
        prop_assert!(r.is_ok(), "{:?}", r.err());
        let r = r.unwrap();
        if r.verdict == Verdict::Robust {
            prop_assert_eq!(r.gap_constant, 0.0);
        } else {
            prop_assert!(r.gap_constant > 0.0);
            prop_assert!(!r.fragile_posteriors.is_empty());
        }
    }

    #[test]
    fn regret_grows_with_the_type_set(inst in common::instance_strategy(), delta in 0.01f64..0.2, seed in any::<u64>()) {
        let bx = UtilityBox::uniform_width(inst.clone(), delta).unwrap();
        let types = witness_type_set(&bx, 6, seed).unwrap();
        let policy = solve_optimal(&inst, &inst.reference_type()).unwrap().policy;
        let mut last_regret = 0.0;
        let mut last_min = f64::INFINITY;
        for k in 1..=types.len() {
            let e = evaluate_policy_over_types(&inst, &policy, &types[..k]).unwrap();
            prop_assert!(e.regret >= last_regret - 1e-12);
            prop_assert!(e.min_utility <= last_min + 1e-12);
            prop_assert!(e.regret >= 0.0);
            last_regret = e.regret;
            last_min = e.min_utility;
        }
    }
}

#[test]
fn fragile_instances_have_a_robust_search_floor() {
    let mut rng = common::seeded(4242);
    let mut checked = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let inst = common::coarse_instance(n, m, &mut rng);
        let report = classify(&inst).unwrap();
        if report.verdict != Verdict::Fragile {
            continue;
        }
        let bx = UtilityBox::uniform_width(inst.clone(), 0.02).unwrap();
        if !bx.is_interior() || classify_in_box(&bx).unwrap().witness_gap.is_none() {
            continue;
        }
        checked += 1;
        let c_star = report.gap_constant;
        let maxmin = search_robust_policy(&bx, Criterion::MaxMin, 4, 1).unwrap();
        assert!(maxmin.score <= report.optimal_value - c_star + 1e-9, "maxmin {} vs {}", maxmin.score, report.optimal_value);
        let minregret = search_robust_policy(&bx, Criterion::MinRegret, 4, 1).unwrap();
        assert!(minregret.score > 0.0);
    }
    assert!(checked > 0, "no fragile instance with an interior box");
}

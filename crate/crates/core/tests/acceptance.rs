//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p persuasion-core --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use persuasion_core::fixtures;
use persuasion_core::genericity::{genericity_trial, random_instance, trial_rng};
use persuasion_core::geometry::{all_regions, best_reply_region, containing_fulldim_region, directed_max_min_distance};
use persuasion_core::model::{indirect_sender_value, policy_value, validate_policy};
use persuasion_core::robustness::{
    adjust_to_type, build_adjustment, classify, evaluate_policy_over_types, fragile_witness_type, loss_bound,
    pseudo_optimal_value, search_robust_policy, Criterion, Verdict,
};
use persuasion_core::solver::solve_optimal;
use persuasion_core::{geometry, Belief, PersuasionInstance, ReceiverType, SignalPolicy, UtilityBox};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn split_points(policy: &SignalPolicy) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = policy.supports.iter().map(|(w, b)| (b.probs()[1], *w)).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn criterion_1() -> Check {
    let ex1 = fixtures::example1();
    let start = Instant::now();
    let s = solve_optimal(&ex1, &ex1.reference_type()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let pts = split_points(&s.policy);
    ensure!(close(s.value, 0.6, 1e-9), "value {}", s.value);
    ensure!(pts.len() == 2 && close(pts[0].0, 0.0, 1e-9) && close(pts[1].0, 0.5, 1e-9), "split {pts:?}");
    ensure!(elapsed < Duration::from_millis(100), "took {elapsed:?}");
    Ok(format!("value {:.9}, split {{0, 0.5}}, {elapsed:?}", s.value))
}

fn criterion_2() -> Check {
    let r = classify(&fixtures::example1()).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Robust, "verdict {}", r.verdict);
    let bx = fixtures::example1_box(0.1).map_err(|e| e.to_string())?;
    let maxmin = search_robust_policy(&bx, Criterion::MaxMin, 0, 1).map_err(|e| e.to_string())?;
    let minregret = search_robust_policy(&bx, Criterion::MinRegret, 0, 1).map_err(|e| e.to_string())?;
    ensure!(close(maxmin.score, 0.3 * (2.0 - 0.1), 1e-9), "maxmin {}", maxmin.score);
    ensure!(close(minregret.score, 0.06, 1e-9), "minregret {}", minregret.score);
    Ok(format!("ROBUST, maxmin {:.9}, minregret {:.9}", maxmin.score, minregret.score))
}

fn criterion_3() -> Check {
    let ex2 = fixtures::example2();
    let s = solve_optimal(&ex2, &ex2.reference_type()).map_err(|e| e.to_string())?;
    let pts = split_points(&s.policy);
    ensure!(close(s.value, 0.4, 1e-9), "value {}", s.value);
    ensure!(pts.len() == 2 && close(pts[0].0, 0.0, 1e-9) && close(pts[1].0, 0.25, 1e-9), "split {pts:?}");
    Ok(format!("value {:.9}, split {{0, 0.25}}", s.value))
}

fn criterion_4() -> Check {
    let ex2 = fixtures::example2();
    let r = classify(&ex2).map_err(|e| e.to_string())?;
    ensure!(r.verdict == Verdict::Fragile, "verdict {}", r.verdict);
    ensure!(
        r.fragile_posteriors.iter().any(|f| close(f.belief.probs()[1], 0.25, 1e-9)),
        "fragile posteriors {:?}",
        r.fragile_posteriors
    );
    let (pv, c) = pseudo_optimal_value(&ex2).map_err(|e| e.to_string())?;
    ensure!(close(pv, 1.0 / 15.0, 1e-9), "pseudo value {pv}");
    ensure!(close(c, 1.0 / 3.0, 1e-9), "value gap {c}");
    let mut gaps = Vec::new();
    for delta in [0.2, 0.02, 0.002] {
        let boxes = [
            fixtures::example2_box(delta).map_err(|e| e.to_string())?,
            UtilityBox::uniform_width(ex2.clone(), delta).map_err(|e| e.to_string())?,
        ];
        for bx in &boxes {
            let (theta, gap) = fragile_witness_type(bx).map_err(|e| e.to_string())?;
            ensure!(bx.contains(&theta, 0.0), "witness outside the box at delta {delta}");
            ensure!(gap >= 1.0 / 6.0 - 1e-9, "gap {gap} at delta {delta}");
            gaps.push(gap);
        }
    }
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("FRAGILE at p=0.25, pseudo {pv:.9}, value gap {c:.9}, min witness gap {min_gap:.9}"))
}

fn criterion_5() -> Check {
    let ex2 = fixtures::example2();
    let bx = fixtures::example2_box(0.1).map_err(|e| e.to_string())?;
    let (witness, _) = fragile_witness_type(&bx).map_err(|e| e.to_string())?;
    let baseline = SignalPolicy::new(vec![(0.6, Belief::binary(0.0)), (0.4, Belief::binary(0.25))]);
    let perturbed = SignalPolicy::new(vec![(13.0 / 15.0, Belief::binary(0.0)), (2.0 / 15.0, Belief::binary(0.75))]);
    let r1 = evaluate_policy_over_types(&ex2, &baseline, &[witness]).map_err(|e| e.to_string())?.regret;
    let r2 = evaluate_policy_over_types(&ex2, &perturbed, &[ex2.reference_type()]).map_err(|e| e.to_string())?.regret;
    ensure!(close(r1, 1.0 / 15.0, 1e-9), "baseline regret {r1}");
    ensure!(close(r2, 1.0 / 3.0, 1e-9), "perturbed regret {r2}");
    let mut scores = Vec::new();
    for delta in [0.1, 0.01, 0.001] {
        let bx = fixtures::example2_box(delta).map_err(|e| e.to_string())?;
        let s = search_robust_policy(&bx, Criterion::MinRegret, 20, 3).map_err(|e| e.to_string())?.score;
        ensure!(s >= 1.0 / 15.0 - 1e-9, "min-regret score {s} at delta {delta}");
        scores.push(s);
    }
    Ok(format!("regrets {r1:.9} / {r2:.9}, min-regret scores {scores:.6?}"))
}

fn perturbed_type(theta: &ReceiverType, eps: f64, rng: &mut ChaCha8Rng) -> ReceiverType {
    let mut u = theta.receiver_u.clone();
    for a in 0..theta.n_actions() {
        for j in 0..theta.n_states() {
            let x = u.get(a, j) + rng.random_range(-eps..=eps);
            u.set(a, j, x.clamp(0.0, 1.0));
        }
    }
    ReceiverType::new(u).unwrap()
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_ratio_err = 0.0_f64;
    for case in 0..500 {
        let n = rng.random_range(2..=5);
        let prior_inst = random_instance(n, 1, &mut rng).map_err(|e| e.to_string())?;
        let prior = prior_inst.prior.clone();
        let policy = common::random_policy(prior.probs(), &mut rng);
        let moved: Vec<Belief> = policy
            .posteriors()
            .map(|b| {
                let s = rng.random_range(0.0..0.5);
                let nu = common::random_belief(n, &mut rng);
                Belief::new(b.probs().iter().zip(&nu).map(|(x, y)| (1.0 - s) * x + s * y).collect()).unwrap()
            })
            .collect();
        let res = build_adjustment(&policy, &moved, &prior).map_err(|e| e.to_string())?;
        ensure!(
            validate_policy(&res.policy, &prior, &prior_inst.tol).is_ok(),
            "case {case}: adjusted policy invalid"
        );
        let radius = geometry::max_ball_radius(&prior).unwrap();
        let want = radius / (radius + res.shift_norm);
        for (i, w) in policy.weights().enumerate() {
            let ratio = res.policy.supports[i].0 / w;
            worst_ratio_err = worst_ratio_err.max((ratio - want).abs());
            ensure!(close(ratio, want, 1e-12), "case {case}: ratio {ratio} vs {want}");
            ensure!(ratio >= 1.0 - res.gamma / radius - 1e-12, "case {case}: ratio below 1 - gamma/R");
        }
        ensure!(
            close(res.correction_weight, res.shift_norm / (radius + res.shift_norm), 1e-15),
            "case {case}: correction weight"
        );
    }

    let mut satisfied = 0;
    let mut attempts = 0;
    let mut worst_slack = f64::INFINITY;
    while satisfied < 100 {
        attempts += 1;
        ensure!(attempts < 2000, "only {satisfied} hypothesis-satisfying pairs in {attempts} attempts");
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let src_inst = random_instance(n, m, &mut rng).map_err(|e| e.to_string())?;
        let source = src_inst.reference_type();
        let eps = rng.random_range(0.001..0.02);
        let target = perturbed_type(&source, eps, &mut rng);
        let sol = solve_optimal(&src_inst, &source).map_err(|e| e.to_string())?;
        let mut gamma_h = 0.0_f64;
        let mut ok = true;
        for b in sol.policy.posteriors() {
            let (_, a) = indirect_sender_value(&src_inst, &source, b).unwrap();
            let p = best_reply_region(&source, a, &src_inst.tol).unwrap();
            let q = best_reply_region(&target, a, &src_inst.tol).unwrap();
            if q.is_empty() {
                ok = false;
                break;
            }
            gamma_h = gamma_h.max(directed_max_min_distance(&p, &q).map_err(|e| e.to_string())?);
        }
        if !ok {
            continue;
        }
        satisfied += 1;
        let (adj, gamma) = adjust_to_type(&src_inst, &sol.policy, &source, &target).map_err(|e| e.to_string())?;
        ensure!(gamma <= gamma_h + 1e-9, "realized gamma {gamma} above hypothesis {gamma_h}");
        let after = policy_value(&src_inst, &target, &adj.policy).map_err(|e| e.to_string())?;
        let floor = sol.value - loss_bound(gamma, &src_inst.prior).unwrap();
        worst_slack = worst_slack.min(after - floor);
        ensure!(after >= floor - 1e-9, "value {after} below {floor} (gamma {gamma})");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "500 adjustments valid (ratio error {worst_ratio_err:.1e}), 100 pairs within the loss bound (min slack {worst_slack:.2e}), {elapsed:?}"
    ))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0_f64;
    let mut regions = 0;
    for case in 0..200 {
        let m = rng.random_range(2..=5);
        let inst = random_instance(2, m, &mut rng).map_err(|e| e.to_string())?;
        let theta = inst.reference_type();
        let s = solve_optimal(&inst, &theta).map_err(|e| e.to_string())?;
        let oracle = common::grid_envelope(&inst, &theta, 1e-4);
        worst = worst.max((s.value - oracle).abs());
        ensure!(close(s.value, oracle, 1e-3), "case {case}: solver {} vs grid envelope {oracle}", s.value);

        for (a, region) in all_regions(&theta, &inst.tol).iter().enumerate() {
            regions += 1;
            let exact = common::analytic_interval(&theta, a);
            let scan = common::grid_scan(&theta, a, 1e-4);
            let mut ps: Vec<f64> = region.vertices().iter().map(|b| b.probs()[1]).collect();
            ps.sort_by(f64::total_cmp);
            match exact {
                None => {
                    ensure!(ps.is_empty(), "case {case} action {a}: expected empty region, got {ps:?}");
                    ensure!(scan.is_empty(), "case {case} action {a}: scan found points in an empty region");
                }
                Some((lo, hi)) => {
                    let want: Vec<f64> = if hi - lo < 1e-7 { vec![lo] } else { vec![lo, hi] };
                    ensure!(
                        ps.len() == want.len() && ps.iter().zip(&want).all(|(x, y)| close(*x, *y, 1e-9)),
                        "case {case} action {a}: vertices {ps:?} vs {want:?}"
                    );
                    let dim = if want.len() == 1 { 0 } else { 1 };
                    ensure!(region.dimension() == dim, "case {case} action {a}: dim {} vs {dim}", region.dimension());
                    ensure!(
                        scan.iter().all(|&p| p >= lo - 1e-9 && p <= hi + 1e-9),
                        "case {case} action {a}: scan leaves [{lo}, {hi}]"
                    );
                    if hi - lo > 2e-4 {
                        ensure!(
                            scan.first().is_some_and(|&p| p <= lo + 1e-4) && scan.last().is_some_and(|&p| p >= hi - 1e-4),
                            "case {case} action {a}: scan does not span [{lo}, {hi}]"
                        );
                    }
                }
            }
        }
    }
    Ok(format!("200 instances, max envelope gap {worst:.2e}, {regions} regions match"))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let deltas = [0.1, 0.01, 0.001];
    let mut worst_small = f64::NEG_INFINITY;
    for case in 0..50 {
        let n = rng.random_range(2..=3);
        let m = rng.random_range(2..=4);
        let inst = random_instance(n, m, &mut rng).map_err(|e| e.to_string())?;
        let base = solve_optimal(&inst, &inst.reference_type()).map_err(|e| e.to_string())?.value;
        let sample_seed: u64 = rng.random();
        let mut eps = Vec::new();
        for delta in deltas {
            let bx = UtilityBox::uniform_width(inst.clone(), delta).map_err(|e| e.to_string())?;
            let mut srng = ChaCha8Rng::seed_from_u64(sample_seed);
            let mut gain = 0.0_f64;
            for _ in 0..100 {
                let theta = bx.sample_type(&mut srng);
                let v = solve_optimal(&inst, &theta).map_err(|e| e.to_string())?.value;
                gain = gain.max(v - base);
            }
            eps.push(gain);
        }
        ensure!(
            eps[0] >= eps[1] - 1e-9 && eps[1] >= eps[2] - 1e-9,
            "case {case}: upward gaps {eps:?} not nonincreasing"
        );
        ensure!(eps[2] < 0.01, "case {case}: gap {} at delta 0.001", eps[2]);
        worst_small = worst_small.max(eps[2]);
    }
    Ok(format!("50 instances, largest upward gap at delta 0.001: {worst_small:.2e}"))
}

fn criterion_9() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for (n, m) in [(2, 4), (3, 5), (4, 6)] {
        let out = genericity_trial(n, m, 1000, 2024).map_err(|e| e.to_string())?;
        for r in &out.records {
            ensure!(r.stability == r.unique_reply, "(N={n}, M={m}) trial {}: stability {} vs unique reply {}", r.trial, r.stability, r.unique_reply);
        }
        let frac_s = out.pass_stability as f64 / out.trials as f64;
        let frac_c = out.pass_classifier as f64 / out.trials as f64;
        ensure!(frac_s >= 0.99 && frac_c >= 0.99, "(N={n}, M={m}) pass fractions {frac_s} / {frac_c}");
        ensure!(out.pass_stability <= out.pass_classifier, "(N={n}, M={m}) stability passes exceed classifier passes");
        parts.push(format!("({n},{m}) {}/{}", out.pass_classifier, out.trials));
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{}, {elapsed:?}", parts.join(", ")))
}

fn lowdim_check(inst: &PersuasionInstance, theta: &ReceiverType, found: &mut usize) -> Result<(), String> {
    let n = theta.n_states() as i32;
    for (a, region) in all_regions(theta, &inst.tol).iter().enumerate() {
        let d = region.dimension();
        if d >= 0 && d <= n - 2 {
            *found += 1;
            containing_fulldim_region(theta, a, &inst.tol).map_err(|e| format!("action {a}: {e}"))?;
        }
    }
    Ok(())
}

fn criterion_10() -> Check {
    let mut found = 0;
    let mut checked = 0;
    let tie3 = PersuasionInstance::from_matrices(
        vec![0.3, 0.3, 0.4],
        vec![vec![1.0, 0.0, 0.5], vec![0.5, 0.5, 0.5], vec![0.0, 1.0, 0.5]],
        vec![vec![0.0; 3]; 3],
    )
    .map_err(|e| e.to_string())?;
    let mut fixed = vec![fixtures::example1(), fixtures::example2(), fixtures::example2_perturbed(0.05), tie3];
    fixed.push(fixtures::example1_box(0.1).map_err(|e| e.to_string())?.reference);
    for inst in &fixed {
        checked += 1;
        lowdim_check(inst, &inst.reference_type(), &mut found)?;
        let bx = UtilityBox::uniform_width(inst.clone(), 0.1).map_err(|e| e.to_string())?;
        for a in 0..inst.n_actions() {
            for mode in [persuasion_core::CornerMode::Inf, persuasion_core::CornerMode::Sup] {
                checked += 1;
                lowdim_check(inst, &bx.corner_type(a, mode).unwrap(), &mut found)?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for _ in 0..400 {
        let n = rng.random_range(2..=4);
        let m = rng.random_range(2..=6);
        let inst = common::coarse_instance(n, m, &mut rng);
        checked += 1;
        lowdim_check(&inst, &inst.reference_type(), &mut found)?;
    }
    for (n, m) in [(2, 4), (3, 5), (4, 6)] {
        for t in 0..100 {
            let inst = random_instance(n, m, &mut trial_rng(77, t)).map_err(|e| e.to_string())?;
            checked += 1;
            lowdim_check(&inst, &inst.reference_type(), &mut found)?;
        }
    }
    ensure!(found > 0, "no lower-dimensional region encountered");
    Ok(format!("{found} lower-dimensional regions across {checked} types, all contained"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("example 1 optimum", criterion_1),
        ("example 1 robustness", criterion_2),
        ("example 2 optimum", criterion_3),
        ("example 2 fragility", criterion_4),
        ("example 2 regrets", criterion_5),
        ("adjustment machinery", criterion_6),
        ("geometry oracle equivalence", criterion_7),
        ("upper semicontinuity", criterion_8),
        ("genericity", criterion_9),
        ("lower-dimensional containment", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}


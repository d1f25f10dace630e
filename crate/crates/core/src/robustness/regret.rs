//! Worst-case evaluation of signal policies over a finite set of receiver
//! types, and a search for good policies against a utility box.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::best_reply_region;
use crate::model::{
    policy_value, sender_preferred_replies, Belief, CornerMode, PersuasionInstance, ReceiverType, SignalPolicy, UtilityBox,
};
use crate::solver::solve_optimal;

use super::adjustment::{adjust_with_actions, loss_bound};
use super::classify::fragile_witness_type;
use super::stability::receiver_duplicates;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeScore {
    pub theta: ReceiverType,
    pub opt_value: f64,
    pub policy_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeEvaluation {
    pub per_type: Vec<TypeScore>,
    pub regret: f64,
    pub min_utility: f64,
}

fn optimal_values(inst: &PersuasionInstance, types: &[ReceiverType]) -> Result<Vec<f64>> {
    types
        .par_iter()
        .map(|t| solve_optimal(inst, t).map(|s| s.value))
        .collect()
}

fn evaluate_with(inst: &PersuasionInstance, policy: &SignalPolicy, types: &[ReceiverType], opts: &[f64]) -> Result<TypeEvaluation> {
    let per_type = types
        .iter()
        .zip(opts)
        .map(|(t, &opt)| {
            Ok(TypeScore {
                theta: t.clone(),
                opt_value: opt,
                policy_value: policy_value(inst, t, policy)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let regret = per_type
        .iter()
        .map(|s| s.opt_value - s.policy_value)
        .fold(0.0, f64::max);
    let min_utility = per_type.iter().map(|s| s.policy_value).fold(f64::INFINITY, f64::min);
    Ok(TypeEvaluation {
        per_type,
        regret,
        min_utility,
    })
}

/// Regret and worst-case value of `policy` against each type's own optimum.
pub fn evaluate_policy_over_types(inst: &PersuasionInstance, policy: &SignalPolicy, types: &[ReceiverType]) -> Result<TypeEvaluation> {
    if types.is_empty() {
        return Err(Error::invalid("need at least one receiver type"));
    }
    let opts = optimal_values(inst, types)?;
    evaluate_with(inst, policy, types, &opts)
}

/// The finite stand-in for the box: the reference type, both corners for
/// every action, the fragile witness when there is one, then `samples`
/// uniform draws from a generator seeded with `seed`.
pub fn witness_type_set(bx: &UtilityBox, samples: usize, seed: u64) -> Result<Vec<ReceiverType>> {
    let mut types = vec![bx.reference.reference_type()];
    for a in 0..bx.n_actions() {
        types.push(bx.corner_type(a, CornerMode::Inf)?);
        types.push(bx.corner_type(a, CornerMode::Sup)?);
    }
    match fragile_witness_type(bx) {
        Ok((theta, _)) => types.push(theta),
        Err(Error::Domain(_)) => {}
        Err(e) => return Err(e),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    types.extend((0..samples).map(|_| bx.sample_type(&mut rng)));
    Ok(types)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Maximize the worst-case sender value.
    MaxMin,
    /// Minimize the worst-case shortfall from each type's optimum.
    MinRegret,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub policy: SignalPolicy,
    /// Regret for `MinRegret`, worst-case value for `MaxMin`, over the type set.
    pub score: f64,
    pub evaluation: TypeEvaluation,
    pub candidates: usize,
    pub types: usize,
    /// For a policy obtained by adjusting into corner regions: twice the loss
    /// bound at the realized displacement.
    pub adjustment_bound: Option<f64>,
}

/// A sender-optimal reply at `belief` under `theta`, preferring one whose
/// region is full-dimensional (it is the one that survives perturbation).
fn stable_reply(inst: &PersuasionInstance, theta: &ReceiverType, belief: &Belief) -> Result<usize> {
    let replies = sender_preferred_replies(inst, theta, belief)?;
    for &a in &replies {
        if best_reply_region(theta, a, &inst.tol)?.is_full_dimensional() {
            return Ok(a);
        }
    }
    Ok(replies[0])
}

/// Searches a finite candidate family for the best policy under `criterion`
/// against [`witness_type_set`]. Candidates: every basic optimum at every
/// type in the set, each such optimum moved into the least favourable corner
/// regions of its induced actions, and the no-information policy.
///
/// The score is a bound: an upper bound on the best achievable regret, and a
/// lower bound on the best achievable worst-case value, over this type set.
pub fn search_robust_policy(bx: &UtilityBox, criterion: Criterion, samples: usize, seed: u64) -> Result<SearchResult> {
    let inst = &bx.reference;
    let types = witness_type_set(bx, samples, seed)?;
    let opts = optimal_values(inst, &types)?;

    let mut candidates: Vec<(SignalPolicy, Option<f64>)> = Vec::new();
    for theta in &types {
        let solution = solve_optimal(inst, theta)?;
        for policy in solution.all_basic_optima {
            let actions = policy
                .posteriors()
                .map(|b| stable_reply(inst, theta, b))
                .collect::<Result<Vec<_>>>()?;
            let corner = |a: usize| {
                let group = receiver_duplicates(theta, a, inst.tol.dup);
                bx.group_corner_type(&group, CornerMode::Inf)
            };
            match adjust_with_actions(inst, &policy, &actions, corner) {
                Ok((adj, gamma)) => {
                    let bound = 2.0 * loss_bound(gamma, &inst.prior)?;
                    candidates.push((policy, None));
                    candidates.push((adj.policy.merged(inst.tol.dedup), Some(bound)));
                }
                Err(Error::NoAdjustment { .. }) => candidates.push((policy, None)),
                Err(e) => return Err(e),
            }
        }
    }
    candidates.push((SignalPolicy::no_information(&inst.prior), None));

    let mut best: Option<(f64, SearchResult)> = None;
    let n_candidates = candidates.len();
    for (policy, bound) in candidates {
        let evaluation = evaluate_with(inst, &policy, &types, &opts)?;
        let (score, key) = match criterion {
            Criterion::MinRegret => (evaluation.regret, -evaluation.regret),
            Criterion::MaxMin => (evaluation.min_utility, evaluation.min_utility),
        };
        if best.as_ref().is_none_or(|(k, _)| key > *k + inst.tol.opt) {
            best = Some((
                key,
                SearchResult {
                    policy,
                    score,
                    evaluation,
                    candidates: n_candidates,
                    types: types.len(),
                    adjustment_bound: bound,
                },
            ));
        }
    }
    Ok(best.expect("the no-information policy is always a candidate").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn example2_regrets() {
        let ex2 = fixtures::example2();
        let bx = fixtures::example2_box(0.1).unwrap();
        let (theta_w, _) = fragile_witness_type(&bx).unwrap();
        let baseline = SignalPolicy::new(vec![(0.6, Belief::binary(0.0)), (0.4, Belief::binary(0.25))]);
        let ev = evaluate_policy_over_types(&ex2, &baseline, &[theta_w]).unwrap();
        assert!(close(ev.regret, 1.0 / 15.0));
        let perturbed = SignalPolicy::new(vec![(13.0 / 15.0, Belief::binary(0.0)), (2.0 / 15.0, Belief::binary(0.75))]);
        let ev = evaluate_policy_over_types(&ex2, &perturbed, &[ex2.reference_type()]).unwrap();
        assert!(close(ev.regret, 1.0 / 3.0));
        let ev = evaluate_policy_over_types(&ex2, &baseline, &[ex2.reference_type()]).unwrap();
        assert!(close(ev.regret, 0.0));
        assert!(evaluate_policy_over_types(&ex2, &baseline, &[]).is_err());
    }

    #[test]
    fn witness_set_sizes() {
        let ex1 = fixtures::example1();
        let bx = UtilityBox::uniform_width(ex1, 0.1).unwrap();
        assert_eq!(witness_type_set(&bx, 0, 1).unwrap().len(), 5);
        let bx2 = fixtures::example2_box(0.1).unwrap();
        assert_eq!(witness_type_set(&bx2, 0, 1).unwrap().len(), 10);
        let a = witness_type_set(&bx2, 5, 42).unwrap();
        let b = witness_type_set(&bx2, 5, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 15);
    }

    #[test]
    fn example1_search() {
        let bx = fixtures::example1_box(0.1).unwrap();
        let r = search_robust_policy(&bx, Criterion::MinRegret, 0, 7).unwrap();
        assert!(close(r.score, 0.06), "{}", r.score);
        let high: Vec<f64> = r.policy.posteriors().map(|b| b.probs()[1]).filter(|p| *p > 0.1).collect();
        assert_eq!(high.len(), 1);
        assert!(close(high[0], 1.0 / 1.9));
        let r = search_robust_policy(&bx, Criterion::MaxMin, 0, 7).unwrap();
        assert!(close(r.score, 0.57), "{}", r.score);
    }
}

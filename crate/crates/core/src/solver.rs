//! Concavification over the pooled extreme points of the best-reply regions.
//!
//! The sender's problem is a linear program over distributions on the pool
//! with barycenter equal to the prior. Its basic feasible solutions are
//! supports of at most N linearly independent posteriors, so the program is
//! solved by enumerating those supports directly, which also yields every
//! basic optimum.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{all_regions, RegionPolytope};
use crate::linalg;
use crate::model::{indirect_sender_value, validate_policy, Belief, PersuasionInstance, ReceiverType, SignalPolicy};
use crate::tolerance::Tolerances;

/// A pooled extreme point with the sender's value there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredPosterior {
    pub belief: Belief,
    pub best_action: usize,
    pub sender_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub value: f64,
    pub policy: SignalPolicy,
    /// Every basic optimum, ordered by the pool indices of its support.
    pub all_basic_optima: Vec<SignalPolicy>,
    pub pool: Vec<ScoredPosterior>,
}

/// De-duplicated union of region vertices, in region order.
pub(crate) fn pooled_vertices(regions: &[RegionPolytope], tol: &Tolerances) -> Vec<Belief> {
    let mut pool: Vec<Belief> = Vec::new();
    for r in regions {
        for v in r.vertices() {
            if pool.iter().all(|p| p.distance(v) > tol.dedup) {
                pool.push(v.clone());
            }
        }
    }
    pool
}

pub fn extreme_point_pool(inst: &PersuasionInstance, theta: &ReceiverType) -> Result<Vec<ScoredPosterior>> {
    inst.check_type(theta)?;
    let regions = all_regions(theta, &inst.tol);
    pooled_vertices(&regions, &inst.tol)
        .into_iter()
        .map(|belief| {
            let (sender_value, best_action) = indirect_sender_value(inst, theta, &belief)?;
            Ok(ScoredPosterior {
                belief,
                best_action,
                sender_value,
            })
        })
        .collect()
}

/// One basic feasible support: pool indices and their weights.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BasicSupport {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub value: f64,
}

impl BasicSupport {
    pub(crate) fn to_policy(&self, points: &[Belief]) -> SignalPolicy {
        SignalPolicy::new(
            self.indices
                .iter()
                .zip(&self.weights)
                .map(|(&i, &w)| (w, points[i].clone()))
                .collect(),
        )
    }
}

/// Maximizes `Σ w_e score_e` over distributions on `points` averaging to
/// `prior`. Returns the optimal value and every basic support within
/// `tol.opt` of it, in lexicographic order of pool indices.
pub(crate) fn concavify(points: &[Belief], scores: &[f64], prior: &Belief, tol: &Tolerances) -> (f64, Vec<BasicSupport>) {
    let n = prior.len();
    let mut feasible: Vec<BasicSupport> = Vec::new();
    for k in 1..=n.min(points.len()) {
        for indices in (0..points.len()).combinations(k) {
            let cols: Vec<Vec<f64>> = indices.iter().map(|&i| points[i].probs().to_vec()).collect();
            let Some(weights) = linalg::solve_columns(&cols, prior.probs(), tol.rank) else {
                continue;
            };
            if weights.iter().any(|&w| w <= tol.bary) {
                continue;
            }
            let total: f64 = weights.iter().sum();
            let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let residual = (0..n)
                .map(|j| (indices.iter().zip(&weights).map(|(&i, w)| w * points[i].probs()[j]).sum::<f64>() - prior.probs()[j]).abs())
                .fold(0.0, f64::max);
            if residual >= tol.bary {
                continue;
            }
            let value = indices.iter().zip(&weights).map(|(&i, w)| w * scores[i]).sum();
            feasible.push(BasicSupport { indices, weights, value });
        }
    }
    let best = feasible.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    let mut optima: Vec<BasicSupport> = feasible.into_iter().filter(|s| s.value >= best - tol.opt).collect();
    optima.sort_by(|a, b| a.indices.cmp(&b.indices));
    (best, optima)
}

pub fn solve_optimal(inst: &PersuasionInstance, theta: &ReceiverType) -> Result<Solution> {
    let pool = extreme_point_pool(inst, theta)?;
    let points: Vec<Belief> = pool.iter().map(|p| p.belief.clone()).collect();
    let scores: Vec<f64> = pool.iter().map(|p| p.sender_value).collect();
    let (value, optima) = concavify(&points, &scores, &inst.prior, &inst.tol);
    let first = optima
        .first()
        .ok_or_else(|| Error::internal("no basic feasible policy on the extreme-point pool"))?;
    Ok(Solution {
        value,
        policy: first.to_policy(&points),
        all_basic_optima: optima.iter().map(|s| s.to_policy(&points)).collect(),
        pool,
    })
}

/// Optimal sender value at `theta`.
pub fn optimal_value(inst: &PersuasionInstance, theta: &ReceiverType) -> Result<f64> {
    Ok(solve_optimal(inst, theta)?.value)
}

/// True when the posteriors of `policy` are linearly independent (for points
/// of the simplex this is the same as affine independence).
pub fn is_basic(policy: &SignalPolicy, tol: &Tolerances) -> bool {
    let cols: Vec<Vec<f64>> = policy.posteriors().map(|b| b.probs().to_vec()).collect();
    linalg::rank(&cols, tol.rank) == cols.len()
}

/// Shrinks the support of a policy on extreme points until its posteriors
/// are independent, never lowering the sender's value.
///
/// While the posteriors are dependent there is a direction `z` with
/// `Σ z_i μ_i = 0` (hence `Σ z_i = 0`). Moving the weights along `±z` keeps
/// the barycenter, changes the value linearly, and drops a posterior at either
/// end of the feasible segment; the end with the higher value is kept.
pub fn make_basic(inst: &PersuasionInstance, theta: &ReceiverType, policy: &SignalPolicy) -> Result<SignalPolicy> {
    let tol = &inst.tol;
    validate_policy(policy, &inst.prior, tol).map_err(|v| Error::invalid(format!("invalid policy: {v}")))?;
    let pool = extreme_point_pool(inst, theta)?;
    for b in policy.posteriors() {
        if pool.iter().all(|p| p.belief.distance(b) > tol.dedup) {
            return Err(Error::domain(format!("posterior {b} is not an extreme point of any best-reply region")));
        }
    }
    let merged = policy.merged(tol.dedup);
    let mut weights: Vec<f64> = merged.weights().collect();
    let mut posts: Vec<Belief> = merged.posteriors().cloned().collect();
    let scores: Vec<f64> = posts
        .iter()
        .map(|b| indirect_sender_value(inst, theta, b).map(|(v, _)| v))
        .collect::<Result<_>>()?;
    let mut scores = scores;

    while let Some(z) = linalg::null_combination(&posts.iter().map(|b| b.probs().to_vec()).collect::<Vec<_>>(), tol.rank) {
        // Feasible t keeps every weight nonnegative: w + t z ≥ 0.
        let (mut t_hi, mut t_lo) = (f64::INFINITY, f64::NEG_INFINITY);
        for (w, zi) in weights.iter().zip(&z) {
            if *zi < 0.0 {
                t_hi = t_hi.min(-w / zi);
            } else if *zi > 0.0 {
                t_lo = t_lo.max(-w / zi);
            }
        }
        if !t_hi.is_finite() || !t_lo.is_finite() {
            return Err(Error::internal("support reduction found a one-signed null direction"));
        }
        let slope: f64 = z.iter().zip(&scores).map(|(zi, s)| zi * s).sum();
        let t = if slope >= 0.0 { t_hi } else { t_lo };
        let mut new_w: Vec<f64> = weights.iter().zip(&z).map(|(w, zi)| w + t * zi).collect();
        // The binding coordinate becomes exactly zero.
        let (drop, _) = new_w
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty support");
        new_w[drop] = 0.0;
        let keep: Vec<usize> = (0..new_w.len()).filter(|&i| new_w[i] > tol.bary).collect();
        let total: f64 = keep.iter().map(|&i| new_w[i]).sum();
        weights = keep.iter().map(|&i| new_w[i] / total).collect();
        posts = keep.iter().map(|&i| posts[i].clone()).collect();
        scores = keep.iter().map(|&i| scores[i]).collect();
    }
    Ok(SignalPolicy::new(weights.into_iter().zip(posts).collect()))
}

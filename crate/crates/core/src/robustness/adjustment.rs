use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{best_reply_region, max_ball_radius, nearest_point};
use crate::model::{indirect_sender_value, validate_policy, Belief, PersuasionInstance, ReceiverType, SignalPolicy};

/// Below this norm the barycenter shift is treated as exactly zero.
const ZERO_SHIFT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustmentResult {
    pub policy: SignalPolicy,
    pub correction_weight: f64,
    pub correction_posterior: Belief,
    /// Norm of the barycenter shift caused by moving the posteriors.
    pub shift_norm: f64,
    /// Largest distance any posterior moved.
    pub gamma: f64,
}

/// Replaces the posteriors of `policy` by `new_posteriors` and restores the
/// barycenter. Every weight is scaled by `R / (R + ||r||)`, where `r` is the
/// barycenter shift and `R` the inscribed-ball radius at the prior, and the
/// freed mass goes to a correction posterior at distance `R` from the prior
/// opposite to `r`.
pub fn build_adjustment(policy: &SignalPolicy, new_posteriors: &[Belief], prior: &Belief) -> Result<AdjustmentResult> {
    if new_posteriors.len() != policy.len() {
        return Err(Error::invalid(format!(
            "{} replacement posteriors for a policy with {} supports",
            new_posteriors.len(),
            policy.len()
        )));
    }
    if let Some(b) = new_posteriors.iter().find(|b| b.len() != prior.len()) {
        return Err(Error::invalid(format!("replacement posterior {b} has the wrong dimension")));
    }
    let radius = max_ball_radius(prior)?;
    let n = prior.len();
    let mut shift = vec![0.0; n];
    for ((w, _), b) in policy.supports.iter().zip(new_posteriors) {
        for (s, p) in shift.iter_mut().zip(b.probs()) {
            *s += w * p;
        }
    }
    for (s, p) in shift.iter_mut().zip(prior.probs()) {
        *s -= p;
    }
    let shift_norm = shift.iter().map(|x| x * x).sum::<f64>().sqrt();
    let gamma = policy
        .posteriors()
        .zip(new_posteriors)
        .map(|(a, b)| a.distance(b))
        .fold(0.0, f64::max);

    let moved = |scale: f64| -> Vec<(f64, Belief)> {
        policy
            .weights()
            .zip(new_posteriors)
            .map(|(w, b)| (w * scale, b.clone()))
            .collect()
    };
    if shift_norm <= ZERO_SHIFT {
        return Ok(AdjustmentResult {
            policy: SignalPolicy::new(moved(1.0)),
            correction_weight: 0.0,
            correction_posterior: prior.clone(),
            shift_norm: 0.0,
            gamma,
        });
    }
    let scale = radius / (radius + shift_norm);
    let correction_weight = shift_norm / (radius + shift_norm);
    let correction: Vec<f64> = prior
        .probs()
        .iter()
        .zip(&shift)
        .map(|(p, r)| p - radius / shift_norm * r)
        .collect();
    let correction_posterior = Belief::clean(correction);
    let mut supports = moved(scale);
    supports.push((correction_weight, correction_posterior.clone()));
    let policy = SignalPolicy::new(supports);
    if let Err(v) = validate_policy(&policy, prior, &Default::default()) {
        return Err(Error::internal(format!("adjusted policy is not Bayes-plausible: {v}")));
    }
    Ok(AdjustmentResult {
        policy,
        correction_weight,
        correction_posterior,
        shift_norm,
        gamma,
    })
}

/// Moves each posterior of `policy` to the nearest belief at which `target`
/// still plays the action `source` played there, then repairs the barycenter.
/// Returns the adjustment and the displacement `gamma`.
pub fn adjust_to_type(
    inst: &PersuasionInstance,
    policy: &SignalPolicy,
    source: &ReceiverType,
    target: &ReceiverType,
) -> Result<(AdjustmentResult, f64)> {
    let actions = policy
        .posteriors()
        .map(|b| indirect_sender_value(inst, source, b).map(|(_, a)| a))
        .collect::<Result<Vec<_>>>()?;
    adjust_with_actions(inst, policy, &actions, |_| Ok(target.clone()))
}

/// Moves posterior `i` into the region of `actions[i]` at the type returned
/// by `target_for(actions[i])`.
pub(crate) fn adjust_with_actions(
    inst: &PersuasionInstance,
    policy: &SignalPolicy,
    actions: &[usize],
    target_for: impl Fn(usize) -> Result<ReceiverType>,
) -> Result<(AdjustmentResult, f64)> {
    let mut moved = Vec::with_capacity(policy.len());
    for (b, &a) in policy.posteriors().zip(actions) {
        let region = best_reply_region(&target_for(a)?, a, &inst.tol)?;
        moved.push(nearest_point(b, &region)?);
    }
    let result = build_adjustment(policy, &moved, &inst.prior)?;
    let gamma = result.gamma;
    Ok((result, gamma))
}

/// Worst-case value loss of an adjustment that moves posteriors by at most `gamma`.
pub fn loss_bound(gamma: f64, prior: &Belief) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let n = prior.len() as f64;
    Ok(n.sqrt() * gamma + gamma / max_ball_radius(prior)?)
}

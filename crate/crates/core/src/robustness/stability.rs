use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::best_reply_region;
use crate::model::{Belief, PersuasionInstance, ReceiverType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StabilityFlags {
    pub action: usize,
    pub nonempty: bool,
    /// No other action has the same receiver utilities.
    pub no_duplicate: bool,
    /// The best-reply region is full-dimensional.
    pub full_dimensional: bool,
    /// Actions with receiver utilities identical to `action`, itself included.
    pub duplicates: Vec<usize>,
}

impl StabilityFlags {
    pub fn is_stable(&self) -> bool {
        self.no_duplicate && self.full_dimensional
    }
}

/// Actions whose receiver rows match `action` entry-wise within `tol`
/// (ascending, `action` included).
pub fn receiver_duplicates(theta: &ReceiverType, action: usize, tol: f64) -> Vec<usize> {
    let row = theta.receiver_u.row(action);
    (0..theta.n_actions())
        .filter(|&b| {
            theta
                .receiver_u
                .row(b)
                .iter()
                .zip(row)
                .all(|(x, y)| (x - y).abs() <= tol)
        })
        .collect()
}

pub fn action_stability_flags(inst: &PersuasionInstance, action: usize) -> Result<StabilityFlags> {
    let theta = inst.reference_type();
    let region = best_reply_region(&theta, action, &inst.tol)?;
    let duplicates = receiver_duplicates(&theta, action, inst.tol.dup);
    Ok(StabilityFlags {
        action,
        nonempty: !region.is_empty(),
        no_duplicate: duplicates.len() == 1,
        full_dimensional: region.is_full_dimensional(),
        duplicates,
    })
}

/// True when every receiver-duplicate of `action` gives the sender the same
/// expected utility at `belief`.
pub fn duplicates_sender_indifferent(inst: &PersuasionInstance, action: usize, belief: &Belief) -> Result<bool> {
    if action >= inst.n_actions() {
        return Err(Error::invalid(format!("action index {action} out of range")));
    }
    if belief.len() != inst.n_states() {
        return Err(Error::invalid("belief dimension does not match the instance"));
    }
    let own = inst.sender_value(action, belief);
    Ok(receiver_duplicates(&inst.reference_type(), action, inst.tol.dup)
        .into_iter()
        .all(|b| (inst.sender_value(b, belief) - own).abs() <= inst.tol.tie))
}

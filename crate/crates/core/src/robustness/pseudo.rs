//! The sender-adversarial limit of nearby receiver types.
//!
//! Lower-dimensional regions are dropped (a small perturbation can make such
//! an action never optimal), and regions shared by receiver-duplicates are
//! split so each duplicate only keeps the beliefs where it is the worst one
//! for the sender. The optimum over this system bounds what the sender can
//! guarantee near the reference type.

use crate::error::Result;
use crate::geometry::{all_regions, RegionPolytope};
use crate::model::{Belief, PersuasionInstance};
use crate::solver::{concavify, optimal_value, pooled_vertices};

use super::stability::receiver_duplicates;

#[derive(Debug, Clone)]
pub struct PseudoSystem {
    pub regions: Vec<RegionPolytope>,
    /// Nonempty lower-dimensional actions, removed.
    pub low: Vec<usize>,
    /// Full-dimensional actions with receiver-duplicates, carved.
    pub carved: Vec<usize>,
    /// Full-dimensional actions without duplicates, unchanged.
    pub stable: Vec<usize>,
}

impl PseudoSystem {
    /// Sender value at `belief`: best action among regions containing it.
    pub fn value_at(&self, inst: &PersuasionInstance, belief: &Belief) -> f64 {
        self.regions
            .iter()
            .filter(|r| !r.is_empty() && r.contains(belief, inst.tol.mem))
            .map(|r| inst.sender_value(r.owner_action, belief))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn pseudo_regions(inst: &PersuasionInstance) -> PseudoSystem {
    let theta = inst.reference_type();
    let n = inst.n_states();
    let base = all_regions(&theta, &inst.tol);
    let mut sys = PseudoSystem {
        regions: Vec::with_capacity(base.len()),
        low: Vec::new(),
        carved: Vec::new(),
        stable: Vec::new(),
    };
    for (a, region) in base.into_iter().enumerate() {
        if region.is_empty() {
            sys.regions.push(region);
            continue;
        }
        if !region.is_full_dimensional() {
            sys.low.push(a);
            sys.regions.push(RegionPolytope::empty(a, n, &inst.tol));
            continue;
        }
        let dups: Vec<usize> = receiver_duplicates(&theta, a, inst.tol.dup)
            .into_iter()
            .filter(|&b| b != a)
            .collect();
        if dups.is_empty() {
            sys.stable.push(a);
            sys.regions.push(region);
            continue;
        }
        sys.carved.push(a);
        let va = inst.sender_v.row(a);
        let cuts = dups
            .iter()
            .map(|&b| inst.sender_v.row(b).iter().zip(va).map(|(vb, va)| vb - va).collect::<Vec<f64>>());
        sys.regions.push(region.with_extra_cuts(cuts));
    }
    sys
}

/// Optimal value over the pseudo system and the gap `C` to the reference optimum.
pub fn pseudo_optimal_value(inst: &PersuasionInstance) -> Result<(f64, f64)> {
    let sys = pseudo_regions(inst);
    let points = pooled_vertices(&sys.regions, &inst.tol);
    let scores: Vec<f64> = points.iter().map(|b| sys.value_at(inst, b)).collect();
    let (value, _) = concavify(&points, &scores, &inst.prior, &inst.tol);
    let reference = optimal_value(inst, &inst.reference_type())?;
    Ok((value, reference - value))
}

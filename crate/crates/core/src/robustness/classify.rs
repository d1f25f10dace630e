use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{best_replies, sender_preferred_replies, Belief, PersuasionInstance, ReceiverType, SignalPolicy, UtilityBox};
use crate::solver::{optimal_value, solve_optimal};

use super::pseudo::{pseudo_optimal_value, pseudo_regions};
use super::stability::{action_stability_flags, duplicates_sender_indifferent, StabilityFlags};

/// Width of the box used to build a witness type when the caller gives none.
const DEFAULT_WITNESS_WIDTH: f64 = 0.1;
/// Smallest perturbation tried before giving up on the witness.
const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Robust,
    Fragile,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Robust => "ROBUST",
            Verdict::Fragile => "FRAGILE",
        })
    }
}

/// A support posterior whose induced action can be displaced by a nearby
/// type in favour of a worse one for the sender.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FragilePosterior {
    pub belief: Belief,
    pub induced_action: usize,
    /// A full-dimensional best reply with lower sender value, when one exists.
    pub inferior_action: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustnessReport {
    pub verdict: Verdict,
    /// A certifying basic optimum (ROBUST) or the first basic optimum (FRAGILE).
    pub witness_policy: SignalPolicy,
    pub fragile_posteriors: Vec<FragilePosterior>,
    pub optimal_value: f64,
    /// Optimum over the adversarial pseudo system.
    pub pseudo_value: f64,
    /// Half the gap between the reference and pseudo optima (0 when ROBUST).
    pub gap_constant: f64,
    pub witness_type: Option<ReceiverType>,
    /// `optimal_value - value(witness_type)` when a witness was built.
    pub witness_gap: Option<f64>,
    /// Only basic optimal policies are examined.
    pub basic_only: bool,
}

/// Whether `action` certifies stability at `belief`: full-dimensional region
/// and either no duplicates or duplicates the sender is indifferent between.
fn certifies(inst: &PersuasionInstance, flags: &StabilityFlags, belief: &Belief) -> Result<bool> {
    Ok(flags.full_dimensional && (flags.no_duplicate || duplicates_sender_indifferent(inst, flags.action, belief)?))
}

fn posterior_certified(inst: &PersuasionInstance, flags: &[StabilityFlags], belief: &Belief) -> Result<bool> {
    let theta = inst.reference_type();
    for a in sender_preferred_replies(inst, &theta, belief)? {
        if certifies(inst, &flags[a], belief)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The worst full-dimensional best reply (for the sender) below `value`.
fn inferior_reply(inst: &PersuasionInstance, flags: &[StabilityFlags], belief: &Belief, value: f64) -> Result<Option<usize>> {
    let theta = inst.reference_type();
    let mut worst: Option<(f64, usize)> = None;
    for b in best_replies(&theta, belief, inst.tol.tie)? {
        let vb = inst.sender_value(b, belief);
        if flags[b].full_dimensional && vb < value - inst.tol.tie && worst.is_none_or(|(wv, _)| vb < wv - inst.tol.tie) {
            worst = Some((vb, b));
        }
    }
    Ok(worst.map(|(_, b)| b))
}

/// Classifies with a witness type built inside a box of width 0.1 around the
/// reference (clipped to [0, 1]).
pub fn classify(inst: &PersuasionInstance) -> Result<RobustnessReport> {
    let bx = UtilityBox::uniform_width(inst.clone(), DEFAULT_WITNESS_WIDTH)?;
    classify_in_box(&bx)
}

/// Classifies `bx.reference`; for a FRAGILE verdict the witness type is
/// built inside `bx` (left empty when the box leaves no room to perturb).
pub fn classify_in_box(bx: &UtilityBox) -> Result<RobustnessReport> {
    let mut report = classify_reference(&bx.reference)?;
    if report.verdict == Verdict::Fragile {
        match fragile_witness_type(bx) {
            Ok((theta, gap)) => {
                report.witness_type = Some(theta);
                report.witness_gap = Some(gap);
            }
            Err(Error::Domain(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

pub(crate) fn classify_reference(inst: &PersuasionInstance) -> Result<RobustnessReport> {
    let theta = inst.reference_type();
    let solution = solve_optimal(inst, &theta)?;
    let flags = (0..inst.n_actions())
        .map(|a| action_stability_flags(inst, a))
        .collect::<Result<Vec<_>>>()?;

    for policy in &solution.all_basic_optima {
        let mut ok = true;
        for b in policy.posteriors() {
            if !posterior_certified(inst, &flags, b)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(RobustnessReport {
                verdict: Verdict::Robust,
                witness_policy: policy.clone(),
                fragile_posteriors: Vec::new(),
                optimal_value: solution.value,
                pseudo_value: solution.value,
                gap_constant: 0.0,
                witness_type: None,
                witness_gap: None,
                basic_only: true,
            });
        }
    }

    let witness = solution.policy.clone();
    let mut fragile = Vec::new();
    for b in witness.posteriors() {
        if posterior_certified(inst, &flags, b)? {
            continue;
        }
        let (value, induced) = crate::model::indirect_sender_value(inst, &theta, b)?;
        fragile.push(FragilePosterior {
            belief: b.clone(),
            induced_action: induced,
            inferior_action: inferior_reply(inst, &flags, b, value)?,
        });
    }
    let (pseudo_value, gap) = pseudo_optimal_value(inst)?;
    if gap <= inst.tol.opt {
        return Err(Error::internal(format!(
            "no basic optimum is stable, yet the adversarial optimum {pseudo_value} matches the reference optimum {}",
            solution.value
        )));
    }
    Ok(RobustnessReport {
        verdict: Verdict::Fragile,
        witness_policy: witness,
        fragile_posteriors: fragile,
        optimal_value: solution.value,
        pseudo_value,
        gap_constant: gap / 2.0,
        witness_type: None,
        witness_gap: None,
        basic_only: true,
    })
}

/// A receiver type inside `bx` whose optimal value is at least `C / 2` below
/// the reference optimum.
///
/// Lower-dimensional actions are pushed down by a step `s`, and each
/// duplicate in a carved group is raised by `s · (1 - v(a, ω))`, so the
/// receiver breaks duplicate ties against the sender. The step starts at half
/// the room the box leaves in those directions and is halved until the gap
/// is certified.
pub fn fragile_witness_type(bx: &UtilityBox) -> Result<(ReceiverType, f64)> {
    let inst = &bx.reference;
    let report = classify_reference(inst)?;
    if report.verdict == Verdict::Robust {
        return Err(Error::domain("the instance is robust; there is no fragile witness"));
    }
    let target = report.gap_constant;
    let sys = pseudo_regions(inst);
    let u = &inst.receiver_u;
    let mut room = f64::INFINITY;
    for j in 0..inst.n_states() {
        for &a in &sys.low {
            room = room.min(u.get(a, j) - bx.lo.get(a, j));
        }
        for &a in &sys.carved {
            room = room.min(bx.hi.get(a, j) - u.get(a, j));
        }
    }
    if !(room > 0.0) {
        return Err(Error::domain(
            "the box leaves no room to perturb the unstable actions of the reference type",
        ));
    }
    let mut step = if room.is_finite() { room / 2.0 } else { 0.5 };
    while step >= MIN_STEP {
        let mut w = u.clone();
        for j in 0..inst.n_states() {
            for &a in &sys.low {
                w.set(a, j, u.get(a, j) - step);
            }
            for &a in &sys.carved {
                w.set(a, j, u.get(a, j) + step * (1.0 - inst.sender_v.get(a, j)));
            }
        }
        let theta = ReceiverType::new(w)?;
        let gap = report.optimal_value - optimal_value(inst, &theta)?;
        if gap >= target - inst.tol.opt {
            debug_assert!(bx.contains(&theta, 1e-12));
            return Ok((theta, gap));
        }
        step /= 2.0;
    }
    Err(Error::internal("perturbation step underflowed before the witness gap was certified"))
}

//! Monte Carlo check that randomly drawn instances are stable: every action
//! that is ever optimal is somewhere the unique best reply, equivalently has
//! no duplicate and a full-dimensional region.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{best_reply_region, max_reply_margin};
use crate::model::{PersuasionInstance, UtilityMatrix};
use crate::robustness::{action_stability_flags, classify::classify_reference, Verdict};
use crate::tolerance::Tolerances;

/// Smallest prior probability of any state in a random instance.
pub const PRIOR_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub stability: bool,
    pub unique_reply: bool,
    pub classifier: bool,
    /// First nonempty action failing the stability check, if any.
    pub failing_action: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenericityOutcome {
    pub n_states: usize,
    pub n_actions: usize,
    pub trials: usize,
    pub pass_stability: usize,
    pub pass_unique_reply: usize,
    pub pass_classifier: usize,
    pub seed: u64,
    pub prior_floor: f64,
    pub records: Vec<TrialRecord>,
}

/// True when every action with a nonempty region is the unique best reply
/// at some belief (its best margin over all rivals is positive).
pub fn check_unique_reply_property(inst: &PersuasionInstance) -> Result<bool> {
    let theta = inst.reference_type();
    for a in 0..inst.n_actions() {
        if best_reply_region(&theta, a, &inst.tol)?.is_empty() {
            continue;
        }
        if max_reply_margin(&theta, a, &inst.tol)? <= inst.tol.tie {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Utilities i.i.d. uniform on [0, 1]; prior uniform on the simplex part
/// above [`PRIOR_FLOOR`].
pub fn random_instance<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<PersuasionInstance> {
    if n < 2 || m < 1 {
        return Err(Error::invalid(format!("need N >= 2 and M >= 1, got N = {n}, M = {m}")));
    }
    if PRIOR_FLOOR * n as f64 >= 1.0 {
        return Err(Error::invalid(format!("prior floor leaves no mass for {n} states")));
    }
    let mut draw = |rows: usize| -> Vec<Vec<f64>> { (0..rows).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect() };
    let u = draw(m);
    let v = draw(m);
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + f64::MIN_POSITIVE).collect();
    let total: f64 = w.iter().sum();
    let free = 1.0 - PRIOR_FLOOR * n as f64;
    let prior: Vec<f64> = w.iter().map(|x| PRIOR_FLOOR + free * x / total).collect();
    PersuasionInstance::new(
        (0..n).map(|j| format!("w{j}")).collect(),
        (0..m).map(|a| format!("a{a}")).collect(),
        prior,
        UtilityMatrix::new(u)?,
        UtilityMatrix::new(v)?,
        Tolerances::default(),
    )
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(n: usize, m: usize, seed: u64, trial: usize) -> Result<TrialRecord> {
    let inst = random_instance(n, m, &mut trial_rng(seed, trial))?;
    let mut failing_action = None;
    for a in 0..m {
        let f = action_stability_flags(&inst, a)?;
        if f.nonempty && !f.is_stable() {
            failing_action = Some(a);
            break;
        }
    }
    Ok(TrialRecord {
        trial,
        stability: failing_action.is_none(),
        unique_reply: check_unique_reply_property(&inst)?,
        classifier: classify_reference(&inst)?.verdict == Verdict::Robust,
        failing_action,
    })
}

pub fn genericity_trial(n: usize, m: usize, trials: usize, seed: u64) -> Result<GenericityOutcome> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let records = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(n, m, seed, t))
        .collect::<Result<Vec<_>>>()?;
    let count = |f: fn(&TrialRecord) -> bool| records.iter().filter(|r| f(r)).count();
    Ok(GenericityOutcome {
        n_states: n,
        n_actions: m,
        trials,
        pass_stability: count(|r| r.stability),
        pass_unique_reply: count(|r| r.unique_reply),
        pass_classifier: count(|r| r.classifier),
        seed,
        prior_floor: PRIOR_FLOOR,
        records,
    })
}

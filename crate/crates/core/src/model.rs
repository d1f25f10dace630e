//! Domain types for finite persuasion instances and the pointwise quantities
//! everything else is built from: receiver expected utility, best replies,
//! the sender's indirect value and the value of a signal policy.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

/// A point of the probability simplex over the instance's states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Validates nonnegativity and unit sum within `1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, Tolerances::default().sum)
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::invalid(format!(
                "a belief needs at least two states, got {}",
                probs.len()
            )));
        }
        if let Some((j, p)) = probs.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < -tol) {
            return Err(Error::invalid(format!("belief entry {j} is {p}, expected a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::invalid(format!("belief sums to {total}, expected 1")));
        }
        Ok(Belief::clean(probs))
    }

    /// Two-state belief putting mass `p` on the second state.
    pub fn binary(p: f64) -> Self {
        Belief(vec![1.0 - p, p])
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut v = vec![0.0; n];
        v[state] = 1.0;
        Belief(v)
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    /// Clamps rounding-level negatives to zero and renormalizes. Callers
    /// guarantee the input is already a probability vector up to noise.
    pub(crate) fn clean(mut probs: Vec<f64>) -> Self {
        for p in probs.iter_mut() {
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let total: f64 = probs.iter().sum();
        if total > 0.0 && (total - 1.0).abs() > f64::EPSILON {
            for p in probs.iter_mut() {
                *p /= total;
            }
        }
        Belief(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, row: &[f64]) -> f64 {
        self.0.iter().zip(row).map(|(p, u)| p * u).sum()
    }

    pub fn distance(&self, other: &Belief) -> f64 {
        euclidean(&self.0, &other.0)
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl fmt::Display for Belief {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, p) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p:.6}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Dense action × state matrix of utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityMatrix {
    rows: Vec<Vec<f64>>,
}

impl UtilityMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("utility matrix has no rows"));
        };
        let cols = first.len();
        if cols == 0 {
            return Err(Error::invalid("utility matrix has no columns"));
        }
        for (a, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(format!(
                    "utility row {a} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("utility row {a} contains {x}")));
            }
        }
        Ok(UtilityMatrix { rows })
    }

    pub fn filled(actions: usize, states: usize, value: f64) -> Self {
        UtilityMatrix {
            rows: vec![vec![value; states]; actions],
        }
    }

    pub fn n_actions(&self) -> usize {
        self.rows.len()
    }

    pub fn n_states(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, action: usize) -> &[f64] {
        &self.rows[action]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, action: usize, state: usize) -> f64 {
        self.rows[action][state]
    }

    pub fn set(&mut self, action: usize, state: usize, value: f64) {
        self.rows[action][state] = value;
    }

    pub(crate) fn check_unit_range(&self, what: &str) -> Result<()> {
        for (a, row) in self.rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::invalid(format!(
                        "{what}[{a}][{j}] = {x} lies outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A receiver type: one realization of the receiver's utility matrix. The
/// prior and the sender's utilities come from the instance it is paired with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverType {
    pub receiver_u: UtilityMatrix,
}

impl ReceiverType {
    pub fn new(receiver_u: UtilityMatrix) -> Result<Self> {
        receiver_u.check_unit_range("receiver_u")?;
        Ok(ReceiverType { receiver_u })
    }

    pub fn n_actions(&self) -> usize {
        self.receiver_u.n_actions()
    }

    pub fn n_states(&self) -> usize {
        self.receiver_u.n_states()
    }

    pub fn utility(&self, action: usize, state: usize) -> f64 {
        self.receiver_u.get(action, state)
    }
}

/// A complete-information persuasion instance: prior, receiver and sender
/// utilities for the reference receiver type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersuasionInstance {
    pub state_labels: Vec<String>,
    pub action_labels: Vec<String>,
    pub prior: Belief,
    pub receiver_u: UtilityMatrix,
    pub sender_v: UtilityMatrix,
    pub tol: Tolerances,
}

impl PersuasionInstance {
    pub fn new(
        state_labels: Vec<String>,
        action_labels: Vec<String>,
        prior: Vec<f64>,
        receiver_u: UtilityMatrix,
        sender_v: UtilityMatrix,
        tol: Tolerances,
    ) -> Result<Self> {
        let n = state_labels.len();
        let m = action_labels.len();
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 states, got {n}")));
        }
        if m < 1 {
            return Err(Error::invalid("need at least 1 action"));
        }
        if prior.len() != n {
            return Err(Error::invalid(format!(
                "prior has {} entries for {n} states",
                prior.len()
            )));
        }
        if let Some((j, p)) = prior.iter().enumerate().find(|(_, p)| **p <= 0.0) {
            return Err(Error::invalid(format!(
                "prior must have full support; entry {j} is {p}"
            )));
        }
        let prior = Belief::with_tolerance(prior, tol.sum)?;
        for (name, mat) in [("receiver_u", &receiver_u), ("sender_v", &sender_v)] {
            if mat.n_actions() != m || mat.n_states() != n {
                return Err(Error::invalid(format!(
                    "{name} is {}x{}, expected {m}x{n} (actions x states)",
                    mat.n_actions(),
                    mat.n_states()
                )));
            }
            mat.check_unit_range(name)?;
        }
        Ok(PersuasionInstance {
            state_labels,
            action_labels,
            prior,
            receiver_u,
            sender_v,
            tol,
        })
    }

    /// Builds an instance with generated labels `w0..`, `a0..`.
    pub fn from_matrices(prior: Vec<f64>, receiver_u: Vec<Vec<f64>>, sender_v: Vec<Vec<f64>>) -> Result<Self> {
        let receiver_u = UtilityMatrix::new(receiver_u)?;
        let sender_v = UtilityMatrix::new(sender_v)?;
        let states = (0..prior.len()).map(|j| format!("w{j}")).collect();
        let actions = (0..receiver_u.n_actions()).map(|a| format!("a{a}")).collect();
        PersuasionInstance::new(states, actions, prior, receiver_u, sender_v, Tolerances::default())
    }

    pub fn n_states(&self) -> usize {
        self.state_labels.len()
    }

    pub fn n_actions(&self) -> usize {
        self.action_labels.len()
    }

    pub fn reference_type(&self) -> ReceiverType {
        ReceiverType {
            receiver_u: self.receiver_u.clone(),
        }
    }

    /// Same instance with a different prior (used by fixtures and tests).
    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Self> {
        PersuasionInstance::new(
            self.state_labels.clone(),
            self.action_labels.clone(),
            prior,
            self.receiver_u.clone(),
            self.sender_v.clone(),
            self.tol,
        )
    }

    /// Same instance with the reference receiver replaced by `theta`.
    pub fn with_receiver(&self, theta: &ReceiverType) -> Result<Self> {
        PersuasionInstance::new(
            self.state_labels.clone(),
            self.action_labels.clone(),
            self.prior.probs().to_vec(),
            theta.receiver_u.clone(),
            self.sender_v.clone(),
            self.tol,
        )
    }

    /// Expected sender utility of `action` at `belief`.
    pub fn sender_value(&self, action: usize, belief: &Belief) -> f64 {
        belief.dot(self.sender_v.row(action))
    }

    pub(crate) fn check_type(&self, theta: &ReceiverType) -> Result<()> {
        if theta.n_actions() != self.n_actions() || theta.n_states() != self.n_states() {
            return Err(Error::invalid(format!(
                "receiver type is {}x{}, instance is {}x{}",
                theta.n_actions(),
                theta.n_states(),
                self.n_actions(),
                self.n_states()
            )));
        }
        Ok(())
    }
}

/// Which extreme corner of a utility box to take for a given action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CornerMode {
    /// The action's utilities at their lower bounds, every rival at its upper bound.
    Inf,
    /// The action's utilities at their upper bounds, every rival at its lower bound.
    Sup,
}

/// Entry-wise interval uncertainty around a reference receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityBox {
    pub reference: PersuasionInstance,
    pub lo: UtilityMatrix,
    pub hi: UtilityMatrix,
    /// Entries whose requested bound fell outside [0, 1] and was clipped.
    pub clipped: Vec<(usize, usize)>,
}

impl UtilityBox {
    /// Explicit bounds. They must bracket the reference and stay in [0, 1].
    pub fn new(reference: PersuasionInstance, lo: UtilityMatrix, hi: UtilityMatrix) -> Result<Self> {
        let (m, n) = (reference.n_actions(), reference.n_states());
        for (name, mat) in [("lo", &lo), ("hi", &hi)] {
            if mat.n_actions() != m || mat.n_states() != n {
                return Err(Error::invalid(format!("box bound `{name}` has the wrong shape")));
            }
            mat.check_unit_range(name)?;
        }
        for a in 0..m {
            for j in 0..n {
                let u = reference.receiver_u.get(a, j);
                if !(lo.get(a, j) <= u && u <= hi.get(a, j)) {
                    return Err(Error::invalid(format!(
                        "box entry ({a}, {j}) = [{}, {}] does not contain the reference utility {u}",
                        lo.get(a, j),
                        hi.get(a, j)
                    )));
                }
            }
        }
        Ok(UtilityBox {
            reference,
            lo,
            hi,
            clipped: Vec::new(),
        })
    }

    /// Per-entry intervals `[u - below, u + above]`, clipped to [0, 1].
    pub fn from_offsets(reference: PersuasionInstance, below: &UtilityMatrix, above: &UtilityMatrix) -> Result<Self> {
        let (m, n) = (reference.n_actions(), reference.n_states());
        let mut lo = reference.receiver_u.clone();
        let mut hi = reference.receiver_u.clone();
        let mut clipped = Vec::new();
        for a in 0..m {
            for j in 0..n {
                let (d_lo, d_hi) = (below.get(a, j), above.get(a, j));
                if d_lo < 0.0 || d_hi < 0.0 {
                    return Err(Error::invalid("box offsets must be nonnegative"));
                }
                let u = reference.receiver_u.get(a, j);
                let (l, h) = (u - d_lo, u + d_hi);
                if l < 0.0 || h > 1.0 {
                    clipped.push((a, j));
                }
                lo.set(a, j, l.max(0.0));
                hi.set(a, j, h.min(1.0));
            }
        }
        let mut bx = UtilityBox::new(reference, lo, hi)?;
        bx.clipped = clipped;
        Ok(bx)
    }

    /// Every interval has length `delta`, centered on the reference (then clipped).
    pub fn uniform_width(reference: PersuasionInstance, delta: f64) -> Result<Self> {
        Self::uniform_radius(reference, delta / 2.0)
    }

    /// Every interval is `[u - radius, u + radius]` (length `2 * radius`), clipped.
    pub fn uniform_radius(reference: PersuasionInstance, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::invalid(format!("box radius must be nonnegative, got {radius}")));
        }
        let off = UtilityMatrix::filled(reference.n_actions(), reference.n_states(), radius);
        Self::from_offsets(reference, &off, &off)
    }

    pub fn n_actions(&self) -> usize {
        self.reference.n_actions()
    }

    pub fn n_states(&self) -> usize {
        self.reference.n_states()
    }

    pub fn width(&self, action: usize, state: usize) -> f64 {
        self.hi.get(action, state) - self.lo.get(action, state)
    }

    /// True when the reference lies strictly inside every interval.
    pub fn is_interior(&self) -> bool {
        (0..self.n_actions()).all(|a| {
            (0..self.n_states()).all(|j| {
                let u = self.reference.receiver_u.get(a, j);
                self.lo.get(a, j) < u && u < self.hi.get(a, j)
            })
        })
    }

    pub fn contains(&self, theta: &ReceiverType, tol: f64) -> bool {
        theta.n_actions() == self.n_actions()
            && theta.n_states() == self.n_states()
            && (0..self.n_actions()).all(|a| {
                (0..self.n_states()).all(|j| {
                    let u = theta.utility(a, j);
                    self.lo.get(a, j) - tol <= u && u <= self.hi.get(a, j) + tol
                })
            })
    }

    pub fn corner_type(&self, action: usize, mode: CornerMode) -> Result<ReceiverType> {
        self.group_corner_type(&[action], mode)
    }

    /// Corner with every action in `group` at one bound and every other
    /// action at the opposite bound.
    pub fn group_corner_type(&self, group: &[usize], mode: CornerMode) -> Result<ReceiverType> {
        if let Some(&a) = group.iter().find(|&&a| a >= self.n_actions()) {
            return Err(Error::invalid(format!("action index {a} out of range")));
        }
        let mut u = self.reference.receiver_u.clone();
        for b in 0..self.n_actions() {
            let inside = group.contains(&b);
            let low = matches!((mode, inside), (CornerMode::Inf, true) | (CornerMode::Sup, false));
            for j in 0..self.n_states() {
                u.set(b, j, if low { self.lo.get(b, j) } else { self.hi.get(b, j) });
            }
        }
        Ok(ReceiverType { receiver_u: u })
    }

    /// Independent uniform draw of every entry within its interval.
    pub fn sample_type<R: Rng + ?Sized>(&self, rng: &mut R) -> ReceiverType {
        let mut u = self.reference.receiver_u.clone();
        for a in 0..self.n_actions() {
            for j in 0..self.n_states() {
                let (l, h) = (self.lo.get(a, j), self.hi.get(a, j));
                let x = if h > l { rng.random_range(l..=h) } else { l };
                u.set(a, j, x);
            }
        }
        ReceiverType { receiver_u: u }
    }
}

/// A signal policy in splitting form: weighted posteriors averaging to the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalPolicy {
    pub supports: Vec<(f64, Belief)>,
}

impl SignalPolicy {
    pub fn new(supports: Vec<(f64, Belief)>) -> Self {
        SignalPolicy { supports }
    }

    /// Reveal nothing: a single posterior equal to the prior.
    pub fn no_information(prior: &Belief) -> Self {
        SignalPolicy {
            supports: vec![(1.0, prior.clone())],
        }
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.supports.iter().map(|(w, _)| *w)
    }

    pub fn posteriors(&self) -> impl Iterator<Item = &Belief> + '_ {
        self.supports.iter().map(|(_, b)| b)
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let n = self.supports.first().map_or(0, |(_, b)| b.len());
        let mut bary = vec![0.0; n];
        for (w, b) in &self.supports {
            for (acc, p) in bary.iter_mut().zip(b.probs()) {
                *acc += w * p;
            }
        }
        bary
    }

    /// Merges posteriors closer than `radius`, adding their weights.
    pub fn merged(&self, radius: f64) -> SignalPolicy {
        let mut out: Vec<(f64, Belief)> = Vec::with_capacity(self.supports.len());
        for (w, b) in &self.supports {
            match out.iter_mut().find(|(_, c)| c.distance(b) <= radius) {
                Some(slot) => slot.0 += w,
                None => out.push((*w, b.clone())),
            }
        }
        SignalPolicy { supports: out }
    }
}

impl fmt::Display for SignalPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (w, b)) in self.supports.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w:.6} @ {b}")?;
        }
        write!(f, "}}")
    }
}

/// The first constraint a candidate signal policy violates.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyViolation {
    Empty,
    DimensionMismatch { index: usize, expected: usize, found: usize },
    NonPositiveWeight { index: usize, weight: f64 },
    WeightSum { residual: f64 },
    Barycenter { state: usize, residual: f64 },
}

impl PolicyViolation {
    pub fn residual(&self) -> f64 {
        match self {
            PolicyViolation::Empty | PolicyViolation::DimensionMismatch { .. } => f64::NAN,
            PolicyViolation::NonPositiveWeight { weight, .. } => *weight,
            PolicyViolation::WeightSum { residual } | PolicyViolation::Barycenter { residual, .. } => *residual,
        }
    }
}

impl fmt::Display for PolicyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyViolation::Empty => write!(f, "policy has no posteriors"),
            PolicyViolation::DimensionMismatch { index, expected, found } => {
                write!(f, "posterior {index} has {found} states, expected {expected}")
            }
            PolicyViolation::NonPositiveWeight { index, weight } => {
                write!(f, "weight {index} is {weight}, must be positive")
            }
            PolicyViolation::WeightSum { residual } => write!(f, "weights sum off by {residual}"),
            PolicyViolation::Barycenter { state, residual } => {
                write!(f, "barycenter misses the prior by {residual} in state {state}")
            }
        }
    }
}

/// Checks positivity, unit weight sum and that the posteriors average to `prior`.
pub fn validate_policy(policy: &SignalPolicy, prior: &Belief, tol: &Tolerances) -> Result<(), PolicyViolation> {
    if policy.is_empty() {
        return Err(PolicyViolation::Empty);
    }
    for (index, (w, b)) in policy.supports.iter().enumerate() {
        if b.len() != prior.len() {
            return Err(PolicyViolation::DimensionMismatch {
                index,
                expected: prior.len(),
                found: b.len(),
            });
        }
        if !(*w > 0.0) {
            return Err(PolicyViolation::NonPositiveWeight { index, weight: *w });
        }
    }
    let total: f64 = policy.weights().sum();
    if (total - 1.0).abs() >= tol.sum {
        return Err(PolicyViolation::WeightSum { residual: total - 1.0 });
    }
    for (state, (got, want)) in policy.barycenter().iter().zip(prior.probs()).enumerate() {
        let residual = (got - want).abs();
        if residual >= tol.bary {
            return Err(PolicyViolation::Barycenter { state, residual });
        }
    }
    Ok(())
}

fn check_action(theta: &ReceiverType, action: usize) -> Result<()> {
    if action >= theta.n_actions() {
        return Err(Error::invalid(format!(
            "action index {action} out of range for {} actions",
            theta.n_actions()
        )));
    }
    Ok(())
}

fn check_belief(theta: &ReceiverType, belief: &Belief) -> Result<()> {
    if belief.len() != theta.n_states() {
        return Err(Error::invalid(format!(
            "belief has {} states, type has {}",
            belief.len(),
            theta.n_states()
        )));
    }
    Ok(())
}

pub fn expected_receiver_utility(theta: &ReceiverType, action: usize, belief: &Belief) -> Result<f64> {
    check_action(theta, action)?;
    check_belief(theta, belief)?;
    Ok(belief.dot(theta.receiver_u.row(action)))
}

/// All actions within `tol` of the receiver's best expected utility, ascending.
pub fn best_replies(theta: &ReceiverType, belief: &Belief, tol: f64) -> Result<Vec<usize>> {
    check_belief(theta, belief)?;
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tie tolerance must be nonnegative, got {tol}")));
    }
    let values: Vec<f64> = theta.receiver_u.rows().iter().map(|r| belief.dot(r)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v >= best - tol)
        .map(|(a, _)| a)
        .collect())
}

/// Sender's value at `belief` when the receiver breaks ties in her favour.
/// Among sender-equivalent best replies the lowest index is reported.
pub fn indirect_sender_value(inst: &PersuasionInstance, theta: &ReceiverType, belief: &Belief) -> Result<(f64, usize)> {
    inst.check_type(theta)?;
    let replies = best_replies(theta, belief, inst.tol.tie)?;
    let mut best: Option<(f64, usize)> = None;
    for a in replies {
        let v = inst.sender_value(a, belief);
        match best {
            Some((bv, _)) if v <= bv + inst.tol.tie => {}
            _ => best = Some((v, a)),
        }
    }
    // Recompute the lowest index among actions tied with the maximum.
    let (value, _) = best.expect("best replies are never empty");
    let chosen = best_replies(theta, belief, inst.tol.tie)?
        .into_iter()
        .find(|&a| inst.sender_value(a, belief) >= value - inst.tol.tie)
        .expect("maximizer is a best reply");
    Ok((inst.sender_value(chosen, belief).max(value), chosen))
}

/// Sender-optimal best replies at `belief` (every action achieving the
/// indirect value within the tie tolerance).
pub fn sender_preferred_replies(inst: &PersuasionInstance, theta: &ReceiverType, belief: &Belief) -> Result<Vec<usize>> {
    let (value, _) = indirect_sender_value(inst, theta, belief)?;
    Ok(best_replies(theta, belief, inst.tol.tie)?
        .into_iter()
        .filter(|&a| inst.sender_value(a, belief) >= value - inst.tol.tie)
        .collect())
}

pub fn policy_value(inst: &PersuasionInstance, theta: &ReceiverType, policy: &SignalPolicy) -> Result<f64> {
    validate_policy(policy, &inst.prior, &inst.tol).map_err(|v| Error::invalid(format!("invalid policy: {v}")))?;
    policy.supports.iter().try_fold(0.0, |acc, (w, b)| {
        Ok(acc + w * indirect_sender_value(inst, theta, b)?.0)
    })
}

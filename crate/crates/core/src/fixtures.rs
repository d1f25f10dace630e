//! The two worked examples, hard-coded so tests and the CLI need no files.
//!
//! Example 1: two states, prior mass 0.3 on the second. The receiver takes
//! `a0` (utility 1 in the first state) or `a1` (utility `t` in the second);
//! the sender always wants `a1`. Example 2: four actions where `a2` is a best
//! reply only at the single belief p = 0.25.

use crate::error::Result;
use crate::model::{PersuasionInstance, UtilityBox, UtilityMatrix};
use crate::tolerance::Tolerances;

fn labels(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

fn build(actions: Vec<String>, prior: Vec<f64>, u: Vec<Vec<f64>>, v: Vec<Vec<f64>>) -> PersuasionInstance {
    PersuasionInstance::new(
        labels("w", 0..2),
        actions,
        prior,
        UtilityMatrix::new(u).expect("fixture matrix"),
        UtilityMatrix::new(v).expect("fixture matrix"),
        Tolerances::default(),
    )
    .expect("fixture is valid")
}

pub fn example1() -> PersuasionInstance {
    example1_with_t(1.0).expect("t = 1 is valid")
}

/// Example 1 with the receiver's second-state utility for `a1` set to `t`
/// (requires `t ∈ [0, 1]`).
pub fn example1_with_t(t: f64) -> Result<PersuasionInstance> {
    let u = UtilityMatrix::new(vec![vec![1.0, 0.0], vec![0.0, t]])?;
    let v = UtilityMatrix::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]])?;
    PersuasionInstance::new(labels("w", 0..2), labels("a", 0..2), vec![0.7, 0.3], u, v, Tolerances::default())
}

/// Example 1's uncertainty `t ∈ [1 - delta, 1 + delta]` on the single entry
/// `(a1, w1)`.
///
/// The upper end exceeds 1, so every receiver utility is divided by
/// `1 + delta`. Positive rescaling leaves all best replies, and therefore
/// every sender value, unchanged while keeping entries in [0, 1].
pub fn example1_box(delta: f64) -> Result<UtilityBox> {
    let s = 1.0 / (1.0 + delta);
    let u = UtilityMatrix::new(vec![vec![s, 0.0], vec![0.0, s]])?;
    let reference = example1().with_receiver(&crate::model::ReceiverType::new(u)?)?;
    let mut off = UtilityMatrix::filled(2, 2, 0.0);
    off.set(1, 1, delta * s);
    UtilityBox::from_offsets(reference, &off, &off)
}

pub fn example2() -> PersuasionInstance {
    example2_with_a2(0.9, 0.3)
}

/// Example 2 with `a2`'s receiver utilities replaced.
pub fn example2_with_a2(first: f64, second: f64) -> PersuasionInstance {
    build(
        labels("a", 1..5),
        vec![0.9, 0.1],
        vec![vec![1.0, 0.0], vec![first, second], vec![0.8, 0.6], vec![0.5, 0.7]],
        vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.5]],
    )
}

/// Example 2 with `a2` lowered by `eps` in both states, so it is never played.
pub fn example2_perturbed(eps: f64) -> PersuasionInstance {
    example2_with_a2(0.9 - eps, 0.3 - eps)
}

/// Example 2 where only `a2` is uncertain: each of its entries lies in an
/// interval of length `delta` centred on the reference.
pub fn example2_box(delta: f64) -> Result<UtilityBox> {
    let mut off = UtilityMatrix::filled(4, 2, 0.0);
    off.set(1, 0, delta / 2.0);
    off.set(1, 1, delta / 2.0);
    UtilityBox::from_offsets(example2(), &off, &off)
}

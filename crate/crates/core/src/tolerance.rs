use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by every computation on an instance.
///
/// The constructions being checked are exact; these thresholds only absorb
/// floating-point noise, so they are deliberately tight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Probability vectors and weights must sum to one within this.
    pub sum: f64,
    /// Per-coordinate barycenter residual allowed in a signal policy.
    pub bary: f64,
    /// Two expected utilities closer than this count as tied.
    pub tie: f64,
    /// Slack allowed when testing membership in a best-reply region.
    pub mem: f64,
    /// Vertices closer than this (Euclidean) are merged.
    pub dedup: f64,
    /// Pivot threshold for rank decisions.
    pub rank: f64,
    /// Policies within this of the optimum are reported as optimal.
    pub opt: f64,
    /// Entry-wise threshold for receiver-duplicate rows.
    pub dup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sum: 1e-9,
            bary: 1e-9,
            tie: 1e-9,
            mem: 1e-8,
            dedup: 1e-7,
            rank: 1e-8,
            opt: 1e-9,
            dup: 1e-12,
        }
    }
}

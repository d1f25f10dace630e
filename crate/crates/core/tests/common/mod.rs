//! Test-only oracles. They recompute quantities from the raw utility
//! matrices with straightforward loops and share no code with the library's
//! solver or geometry.
#![allow(dead_code)]

use persuasion_core::{Belief, PersuasionInstance, ReceiverType, SignalPolicy};
use rand::Rng;

/// Indirect sender value at p (mass on the second state) for a two-state
/// instance, ties within 1e-9 resolved in the sender's favour.
pub fn brute_value(inst: &PersuasionInstance, theta: &ReceiverType, p: f64) -> f64 {
    let m = inst.n_actions();
    let eu: Vec<f64> = (0..m)
        .map(|a| (1.0 - p) * theta.utility(a, 0) + p * theta.utility(a, 1))
        .collect();
    let best = eu.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..m)
        .filter(|&a| eu[a] >= best - 1e-9)
        .map(|a| (1.0 - p) * inst.sender_v.get(a, 0) + p * inst.sender_v.get(a, 1))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Value at `x0` of the upper concave hull of the points `(xs[i], ys[i])`
/// (xs ascending).
pub fn upper_hull_at(xs: &[f64], ys: &[f64], x0: f64) -> f64 {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // Drop the middle point when it lies on or below the chord.
            if (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    for w in hull.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        if x0 >= x1 && x0 <= x2 {
            return y1 + (y2 - y1) * (x0 - x1) / (x2 - x1);
        }
    }
    hull.iter().find(|(x, _)| (*x - x0).abs() < 1e-15).map(|h| h.1).unwrap_or(f64::NAN)
}

/// Concave envelope of the indirect value at the prior, from a uniform grid
/// with spacing `step`.
pub fn grid_envelope(inst: &PersuasionInstance, theta: &ReceiverType, step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let xs: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&p| brute_value(inst, theta, p)).collect();
    upper_hull_at(&xs, &ys, inst.prior.probs()[1])
}

/// Closed-form region of `action` in a two-state instance as an interval of
/// p, or `None` when empty.
pub fn analytic_interval(theta: &ReceiverType, action: usize) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for b in 0..theta.n_actions() {
        if b == action {
            continue;
        }
        // d(p) = d0 + (d1 - d0) p ≥ 0
        let d0 = theta.utility(action, 0) - theta.utility(b, 0);
        let d1 = theta.utility(action, 1) - theta.utility(b, 1);
        let slope = d1 - d0;
        if slope.abs() < 1e-15 {
            if d0 < 0.0 {
                return None;
            }
        } else if slope > 0.0 {
            lo = lo.max(-d0 / slope);
        } else {
            hi = hi.min(-d0 / slope);
        }
    }
    (lo <= hi + 1e-12).then_some((lo, hi.max(lo)))
}

/// Grid points where `action` is a best reply (within 1e-12).
pub fn grid_scan(theta: &ReceiverType, action: usize, step: f64) -> Vec<f64> {
    let k = (1.0 / step).round() as usize;
    (0..=k)
        .map(|i| i as f64 / k as f64)
        .filter(|&p| {
            let eu = |a: usize| (1.0 - p) * theta.utility(a, 0) + p * theta.utility(a, 1);
            let best = (0..theta.n_actions()).map(eu).fold(f64::NEG_INFINITY, f64::max);
            eu(action) >= best - 1e-12
        })
        .collect()
}

/// Bounds on the distance from `x` to the convex hull of `vertices`, from
/// Frank-Wolfe with exact line search. The upper bound is attained by a hull
/// point; the lower bound comes from the duality gap of the last iterate.
pub fn hull_distance(x: &[f64], vertices: &[Vec<f64>], iters: usize) -> (f64, f64) {
    let n = x.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let mut y = vertices[0].clone();
    let mut gap = f64::INFINITY;
    for _ in 0..iters {
        let grad: Vec<f64> = (0..n).map(|j| y[j] - x[j]).collect();
        let s = vertices.iter().min_by(|a, b| dot(a, &grad).total_cmp(&dot(b, &grad))).unwrap();
        let d: Vec<f64> = (0..n).map(|j| s[j] - y[j]).collect();
        gap = -dot(&grad, &d);
        let dd = dot(&d, &d);
        if dd < 1e-30 || gap <= 1e-16 {
            break;
        }
        let t = (gap / dd).clamp(0.0, 1.0);
        for j in 0..n {
            y[j] += t * d[j];
        }
    }
    let sq: f64 = (0..n).map(|j| (x[j] - y[j]).powi(2)).sum();
    let lower = (sq - 2.0 * gap.max(0.0)).max(0.0).sqrt();
    (lower, sq.sqrt())
}

/// Uniform point of the probability simplex.
pub fn random_belief<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|x| x / s).collect()
}

/// Instance with utilities drawn from {0, 0.25, 0.5, 0.75, 1}, which makes
/// ties, duplicates and lower-dimensional regions common.
pub fn coarse_instance<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> PersuasionInstance {
    let mut level = || rng.random_range(0..5) as f64 * 0.25;
    let u: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| level()).collect()).collect();
    let v: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| level()).collect()).collect();
    let prior = vec![1.0 / n as f64; n];
    PersuasionInstance::from_matrices(prior, u, v).unwrap()
}

/// Instances with 2..=4 states and 1..=5 actions. Half the draws use coarse
/// utility levels so that ties and degenerate regions show up.
pub fn instance_strategy() -> impl proptest::strategy::Strategy<Value = PersuasionInstance> {
    use proptest::prelude::*;
    (2usize..=4, 1usize..=5, any::<bool>(), any::<u64>()).prop_map(|(n, m, coarse, seed)| {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        if coarse {
            coarse_instance(n, m, &mut rng)
        } else {
            persuasion_core::genericity::random_instance(n, m, &mut rng).unwrap()
        }
    })
}

pub fn seeded(seed: u64) -> rand_chacha::ChaCha8Rng {
    <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)
}

/// A random policy around `prior` with up to N+1 posteriors.
pub fn random_policy<R: Rng + ?Sized>(prior: &[f64], rng: &mut R) -> SignalPolicy {
    let n = prior.len();
    let k = rng.random_range(1..=n + 1);
    let nus: Vec<Vec<f64>> = (0..k).map(|_| random_belief(n, rng)).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    let alphas: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let bary: Vec<f64> = (0..n).map(|j| (0..k).map(|i| alphas[i] * nus[i][j]).sum()).collect();
    let mut s = 1.0_f64;
    for nu in &nus {
        for j in 0..n {
            let d = nu[j] - bary[j];
            if d < 0.0 {
                s = s.min(prior[j] / -d);
            }
        }
    }
    s *= rng.random_range(0.3..1.0);
    let supports = (0..k)
        .map(|i| {
            let probs: Vec<f64> = (0..n).map(|j| prior[j] + s * (nus[i][j] - bary[j])).collect();
            (alphas[i], Belief::new(probs).unwrap())
        })
        .collect();
    SignalPolicy::new(supports)
}


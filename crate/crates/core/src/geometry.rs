//! Best-reply regions as polytopes inside the belief simplex.
//!
//! A region is stored as a list of cuts `c · μ ≥ 0` on top of the simplex.
//! For the receiver's region of action `a` the cuts are `u_a - u_b` for every
//! rival `b`. Vertex enumeration works in the reduced coordinates
//! `x = (μ_1, .., μ_{N-1})`, where the last coordinate is implied.

use std::fmt::Write as _;
use std::sync::OnceLock;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{euclidean, Belief, ReceiverType};
use crate::tolerance::Tolerances;

/// Reduced representation `normals[k] · x ≤ offsets[k]` over `R^{N-1}`, plus
/// the implicit simplex constraints `x ≥ 0`, `Σ x ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceSystem {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub dim: usize,
}

impl HalfspaceSystem {
    fn from_cuts(cuts: &[Vec<f64>], n_states: usize) -> Self {
        let last = n_states - 1;
        let mut normals = Vec::with_capacity(cuts.len());
        let mut offsets = Vec::with_capacity(cuts.len());
        for c in cuts {
            // c · μ ≥ 0  ⇔  Σ_j (c_N - c_j) x_j ≤ c_N
            normals.push((0..last).map(|j| c[last] - c[j]).collect());
            offsets.push(c[last]);
        }
        HalfspaceSystem {
            normals,
            offsets,
            dim: last,
        }
    }

    /// Every row including the simplex constraints, in a fixed order:
    /// the region's own rows, then `-x_j ≤ 0`, then `Σ x ≤ 1`.
    pub fn full_rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rows = self.normals.clone();
        let mut rhs = self.offsets.clone();
        for j in 0..self.dim {
            let mut e = vec![0.0; self.dim];
            e[j] = -1.0;
            rows.push(e);
            rhs.push(0.0);
        }
        rows.push(vec![1.0; self.dim]);
        rhs.push(1.0);
        (rows, rhs)
    }
}

/// Vertices of `{x ∈ R^d : rows · x ≤ rhs}` (assumed bounded) by solving every
/// d-subset of constraints. Results are de-duplicated and returned in the
/// order the lexicographic subset scan first meets them.
pub(crate) fn hrep_vertices(rows: &[Vec<f64>], rhs: &[f64], d: usize, tol: &Tolerances) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    if d == 0 {
        if rhs.iter().all(|&b| b >= -tol.mem) {
            out.push(Vec::new());
        }
        return out;
    }
    for subset in (0..rows.len()).combinations(d) {
        let sub: Vec<Vec<f64>> = subset.iter().map(|&k| rows[k].clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&k| rhs[k]).collect();
        let Some(x) = linalg::solve_square(&sub, &b, tol.rank) else {
            continue;
        };
        let feasible = rows
            .iter()
            .zip(rhs)
            .all(|(r, &bk)| dot(r, &x) <= bk + tol.mem);
        if feasible && out.iter().all(|v| euclidean(v, &x) > tol.dedup) {
            out.push(x);
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn lift(x: &[f64]) -> Belief {
    let mut probs = x.to_vec();
    probs.push(1.0 - x.iter().sum::<f64>());
    Belief::clean(probs)
}

/// A best-reply region (or a carved variant of one) with lazily cached
/// vertices and dimension.
#[derive(Debug)]
pub struct RegionPolytope {
    pub owner_action: usize,
    /// Cuts `c · μ ≥ 0` in full coordinates.
    pub cuts: Vec<Vec<f64>>,
    pub system: HalfspaceSystem,
    n_states: usize,
    tol: Tolerances,
    vertices: OnceLock<Vec<Belief>>,
    dim: OnceLock<i32>,
}

impl Clone for RegionPolytope {
    fn clone(&self) -> Self {
        RegionPolytope {
            owner_action: self.owner_action,
            cuts: self.cuts.clone(),
            system: self.system.clone(),
            n_states: self.n_states,
            tol: self.tol,
            vertices: self.vertices.clone(),
            dim: self.dim.clone(),
        }
    }
}

impl RegionPolytope {
    pub fn from_cuts(owner_action: usize, n_states: usize, cuts: Vec<Vec<f64>>, tol: &Tolerances) -> Self {
        let system = HalfspaceSystem::from_cuts(&cuts, n_states);
        RegionPolytope {
            owner_action,
            cuts,
            system,
            n_states,
            tol: *tol,
            vertices: OnceLock::new(),
            dim: OnceLock::new(),
        }
    }

    /// Adds cuts, returning a new region with fresh caches.
    pub fn with_extra_cuts(&self, extra: impl IntoIterator<Item = Vec<f64>>) -> Self {
        let mut cuts = self.cuts.clone();
        cuts.extend(extra);
        RegionPolytope::from_cuts(self.owner_action, self.n_states, cuts, &self.tol)
    }

    /// An always-empty region (used for removed actions).
    pub fn empty(owner_action: usize, n_states: usize, tol: &Tolerances) -> Self {
        let r = RegionPolytope::from_cuts(owner_action, n_states, vec![vec![-1.0; n_states]], tol);
        let _ = r.vertices.set(Vec::new());
        let _ = r.dim.set(-1);
        r
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn vertices(&self) -> &[Belief] {
        self.vertices.get_or_init(|| {
            let (rows, rhs) = self.system.full_rows();
            hrep_vertices(&rows, &rhs, self.system.dim, &self.tol)
                .iter()
                .map(|x| lift(x))
                .collect()
        })
    }

    /// Affine dimension of the region; -1 when empty.
    pub fn dimension(&self) -> i32 {
        *self.dim.get_or_init(|| {
            let pts: Vec<Vec<f64>> = self.vertices().iter().map(|b| b.probs().to_vec()).collect();
            linalg::affine_rank(&pts, self.tol.rank)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.vertices().is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dimension() == self.n_states as i32 - 1
    }

    pub fn contains(&self, belief: &Belief, tol: f64) -> bool {
        belief.len() == self.n_states
            && belief.probs().iter().all(|&p| p >= -tol)
            && self.cuts.iter().all(|c| belief.dot(c) >= -tol)
    }

    /// Text dump of halfspaces (reduced form) and vertices.
    pub fn describe(&self, labels: &[String]) -> String {
        let mut s = String::new();
        let name = labels.get(self.owner_action).cloned().unwrap_or_else(|| self.owner_action.to_string());
        let _ = writeln!(s, "region {name}: dim {}", self.dimension());
        for (n, b) in self.system.normals.iter().zip(&self.system.offsets) {
            let terms: Vec<String> = n.iter().enumerate().map(|(j, c)| format!("{c:+.6}*x{j}")).collect();
            let _ = writeln!(s, "  {} <= {b:.6}", terms.join(" "));
        }
        for v in self.vertices() {
            let _ = writeln!(s, "  vertex {v}");
        }
        s
    }
}

/// The receiver's best-reply region for `action` at type `theta`.
pub fn best_reply_region(theta: &ReceiverType, action: usize, tol: &Tolerances) -> Result<RegionPolytope> {
    if action >= theta.n_actions() {
        return Err(Error::invalid(format!("action index {action} out of range")));
    }
    let ua = theta.receiver_u.row(action);
    let cuts = (0..theta.n_actions())
        .filter(|&b| b != action)
        .map(|b| ua.iter().zip(theta.receiver_u.row(b)).map(|(x, y)| x - y).collect())
        .collect();
    Ok(RegionPolytope::from_cuts(action, theta.n_states(), cuts, tol))
}

pub fn all_regions(theta: &ReceiverType, tol: &Tolerances) -> Vec<RegionPolytope> {
    (0..theta.n_actions())
        .map(|a| best_reply_region(theta, a, tol).expect("index in range"))
        .collect()
}

/// Reduced halfspace system of the region of `action` (one row per rival).
pub fn reduce_region(theta: &ReceiverType, action: usize) -> Result<HalfspaceSystem> {
    Ok(best_reply_region(theta, action, &Tolerances::default())?.system)
}

pub fn enumerate_vertices(region: &RegionPolytope) -> Vec<Belief> {
    region.vertices().to_vec()
}

pub fn region_dimension(region: &RegionPolytope) -> i32 {
    region.dimension()
}

/// Nearest point of the region to `x` and its distance. Projects onto the
/// affine hull of every candidate face (independent active sets) and keeps
/// the closest projection that is feasible.
fn project_onto(x: &Belief, region: &RegionPolytope) -> Result<(f64, Vec<f64>)> {
    let n = region.n_states;
    if x.len() != n {
        return Err(Error::invalid("belief dimension does not match the region"));
    }
    let tol = &region.tol;
    if region.contains(x, tol.mem) {
        return Ok((0.0, x.probs().to_vec()));
    }
    let mut ineq: Vec<Vec<f64>> = region.cuts.clone();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        ineq.push(e);
    }
    let ones = vec![1.0; n];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..n {
        for active in (0..ineq.len()).combinations(k) {
            let mut rows: Vec<Vec<f64>> = active.iter().map(|&i| ineq[i].clone()).collect();
            rows.push(ones.clone());
            if linalg::rank(&rows, tol.rank) != rows.len() {
                continue;
            }
            let mut rhs = vec![0.0; k];
            rhs.push(1.0);
            let Some(y) = linalg::project_affine(x.probs(), &rows, &rhs) else {
                continue;
            };
            if ineq.iter().all(|c| dot(c, &y) >= -tol.mem) {
                let d = euclidean(x.probs(), &y);
                if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                    best = Some((d, y));
                }
            }
        }
    }
    best.ok_or_else(|| Error::internal("no feasible face found for a nonempty region"))
}

/// Euclidean distance from `x` to a nonempty region.
pub fn distance_to_region(x: &Belief, region: &RegionPolytope) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::domain(format!("region of action {} is empty", region.owner_action)));
    }
    Ok(project_onto(x, region)?.0)
}

/// Nearest point of the region to `x`.
pub fn nearest_point(x: &Belief, region: &RegionPolytope) -> Result<Belief> {
    if region.is_empty() {
        return Err(Error::NoAdjustment {
            action: region.owner_action,
        });
    }
    Ok(Belief::clean(project_onto(x, region)?.1))
}

/// `max_{x ∈ P} min_{y ∈ Q} ||x - y||`, attained at a vertex of `P`.
pub fn directed_max_min_distance(p: &RegionPolytope, q: &RegionPolytope) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::domain("directed distance needs two nonempty regions"));
    }
    p.vertices()
        .iter()
        .try_fold(0.0_f64, |acc, v| Ok(acc.max(distance_to_region(v, q)?)))
}

/// Radius of the largest ball around the prior (within the simplex's affine
/// hull) that stays in the simplex.
pub fn max_ball_radius(prior: &Belief) -> Result<f64> {
    let n = prior.len() as f64;
    let m = prior.min_entry();
    if !(m > 0.0) {
        return Err(Error::domain("prior must have full support"));
    }
    Ok((n / (n - 1.0)).sqrt() * m)
}

/// A full-dimensional rival region containing the lower-dimensional region of
/// `action`.
pub fn containing_fulldim_region(theta: &ReceiverType, action: usize, tol: &Tolerances) -> Result<usize> {
    let regions = all_regions(theta, tol);
    let own = regions
        .get(action)
        .ok_or_else(|| Error::invalid(format!("action index {action} out of range")))?;
    if own.is_empty() {
        return Err(Error::domain(format!("region of action {action} is empty")));
    }
    if own.is_full_dimensional() {
        return Err(Error::domain(format!("region of action {action} is already full-dimensional")));
    }
    regions
        .iter()
        .enumerate()
        .filter(|(b, r)| *b != action && r.is_full_dimensional())
        .find(|(_, r)| own.vertices().iter().all(|v| r.contains(v, tol.mem)))
        .map(|(b, _)| b)
        .ok_or_else(|| {
            Error::internal(format!(
                "lower-dimensional region of action {action} is not contained in any full-dimensional region"
            ))
        })
}

/// Largest `s` such that some belief makes `action` beat every rival by at
/// least `s`. Positive iff the action is somewhere the unique best reply;
/// negative iff its region is empty. `+∞` when there are no rivals.
pub fn max_reply_margin(theta: &ReceiverType, action: usize, tol: &Tolerances) -> Result<f64> {
    let region = best_reply_region(theta, action, tol)?;
    if region.cuts.is_empty() {
        return Ok(f64::INFINITY);
    }
    let n = theta.n_states();
    let last = n - 1;
    let d = n; // (x_1..x_{N-1}, s)
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in &region.cuts {
        // s - c · μ ≤ 0  ⇔  Σ_j (c_N - c_j) x_j + s ≤ c_N
        let mut r: Vec<f64> = (0..last).map(|j| c[last] - c[j]).collect();
        r.push(1.0);
        rows.push(r);
        rhs.push(c[last]);
    }
    for j in 0..last {
        let mut e = vec![0.0; d];
        e[j] = -1.0;
        rows.push(e);
        rhs.push(0.0);
    }
    let mut sum = vec![1.0; d];
    sum[last] = 0.0;
    rows.push(sum);
    rhs.push(1.0);
    let vertices = hrep_vertices(&rows, &rhs, d, tol);
    vertices
        .iter()
        .map(|v| v[last])
        .max_by(f64::total_cmp)
        .ok_or_else(|| Error::internal("margin program has no vertex"))
}

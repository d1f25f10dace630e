//! The sender's indirect value along the belief segment of a two-state
//! instance, as plot-ready rows.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::all_regions;
use crate::model::{indirect_sender_value, Belief, PersuasionInstance};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    /// Mass on the second state.
    pub p: f64,
    pub value: f64,
    pub action: usize,
    /// True where a region boundary lies strictly inside the segment.
    pub breakpoint: bool,
}

/// Rows on a uniform grid of `resolution` points plus every interior region
/// vertex, sorted by `p`. A grid point that coincides with a breakpoint
/// appears once.
pub fn emit_indirect_utility_curve(inst: &PersuasionInstance, resolution: usize) -> Result<Vec<CurveRow>> {
    if inst.n_states() != 2 {
        return Err(Error::domain(format!(
            "the value curve needs exactly 2 states, the instance has {}",
            inst.n_states()
        )));
    }
    if resolution < 2 {
        return Err(Error::invalid("resolution must be at least 2"));
    }
    let theta = inst.reference_type();
    let merge = inst.tol.dedup;
    let mut breaks: Vec<f64> = all_regions(&theta, &inst.tol)
        .iter()
        .flat_map(|r| r.vertices().iter().map(|b| b.probs()[1]).collect::<Vec<_>>())
        .filter(|&p| p > merge && p < 1.0 - merge)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() <= merge);

    let mut points: Vec<(f64, bool)> = breaks.iter().map(|&p| (p, true)).collect();
    for k in 0..resolution {
        let p = k as f64 / (resolution - 1) as f64;
        if breaks.iter().all(|b| (b - p).abs() > merge) {
            points.push((p, false));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
        .into_iter()
        .map(|(p, breakpoint)| {
            let (value, action) = indirect_sender_value(inst, &theta, &Belief::binary(p))?;
            Ok(CurveRow {
                p,
                value,
                action,
                breakpoint,
            })
        })
        .collect()
}

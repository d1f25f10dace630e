//! TOML instance files.
//!
//! ```toml
//! states = ["w0", "w1"]
//! actions = ["a0", "a1"]
//! prior = [0.7, 0.3]
//! receiver_u = [[1.0, 0.0], [0.0, 1.0]]   # one row per action
//! sender_v = [[0.0, 0.0], [1.0, 1.0]]
//!
//! [box]            # optional; exactly one of delta, radius or lo + hi
//! delta = 0.1      # every interval has length delta around the reference
//!
//! [tolerances]     # optional overrides
//! tie = 1e-9
//! ```
//!
//! Every error carries the line and column of the offending value.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::model::{Belief, PersuasionInstance, UtilityBox, UtilityMatrix};
use crate::tolerance::Tolerances;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    states: Spanned<Vec<String>>,
    actions: Spanned<Vec<String>>,
    prior: Spanned<Vec<f64>>,
    receiver_u: Spanned<Vec<Vec<f64>>>,
    sender_v: Spanned<Vec<Vec<f64>>>,
    #[serde(rename = "box")]
    utility_box: Option<Spanned<RawBox>>,
    tolerances: Option<Tolerances>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: PersuasionInstance,
    pub utility_box: Option<UtilityBox>,
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.chars().count(), |i| before[i + 1..].chars().count()) + 1;
    (line, column)
}

fn at(text: &str, span: Range<usize>, err: impl std::fmt::Display) -> Error {
    let (line, column) = position(text, span.start);
    let message = err.to_string();
    let message = message.strip_prefix("invalid input: ").unwrap_or(&message).to_string();
    Error::Parse { line, column, message }
}

fn check_matrix(text: &str, field: &Spanned<Vec<Vec<f64>>>, name: &str, m: usize, n: usize) -> Result<UtilityMatrix> {
    let mat = UtilityMatrix::new(field.get_ref().clone()).map_err(|e| at(text, field.span(), format!("{name}: {e}")))?;
    if mat.n_actions() != m || mat.n_states() != n {
        return Err(at(
            text,
            field.span(),
            format!("{name} is {}x{}, expected {m}x{n} (actions x states)", mat.n_actions(), mat.n_states()),
        ));
    }
    mat.check_unit_range(name).map_err(|e| at(text, field.span(), e))?;
    Ok(mat)
}

pub fn parse_instance(text: &str) -> Result<LoadedInstance> {
    let raw: RawInstance = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
        Error::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    let tol = raw.tolerances.unwrap_or_default();
    let states = raw.states.get_ref().clone();
    let actions = raw.actions.get_ref().clone();
    let (n, m) = (states.len(), actions.len());
    if n < 2 {
        return Err(at(text, raw.states.span(), format!("need at least 2 states, got {n}")));
    }
    if m < 1 {
        return Err(at(text, raw.actions.span(), "need at least 1 action"));
    }
    let prior = raw.prior.get_ref().clone();
    if prior.len() != n {
        return Err(at(text, raw.prior.span(), format!("prior has {} entries for {n} states", prior.len())));
    }
    if let Some((j, p)) = prior.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(at(text, raw.prior.span(), format!("prior must have full support; entry {j} is {p}")));
    }
    Belief::with_tolerance(prior.clone(), tol.sum).map_err(|e| at(text, raw.prior.span(), e))?;
    let receiver_u = check_matrix(text, &raw.receiver_u, "receiver_u", m, n)?;
    let sender_v = check_matrix(text, &raw.sender_v, "sender_v", m, n)?;
    let instance = PersuasionInstance::new(states, actions, prior, receiver_u, sender_v, tol).map_err(|e| at(text, 0..0, e))?;

    let utility_box = match raw.utility_box {
        None => None,
        Some(spanned) => {
            let span = spanned.span();
            let b = spanned.into_inner();
            let built = match (b.delta, b.radius, b.lo, b.hi) {
                (Some(d), None, None, None) => UtilityBox::uniform_width(instance.clone(), d),
                (None, Some(r), None, None) => UtilityBox::uniform_radius(instance.clone(), r),
                (None, None, Some(lo), Some(hi)) => UtilityMatrix::new(lo)
                    .and_then(|lo| Ok((lo, UtilityMatrix::new(hi)?)))
                    .and_then(|(lo, hi)| UtilityBox::new(instance.clone(), lo, hi)),
                _ => Err(Error::invalid("box needs exactly one of `delta`, `radius`, or both `lo` and `hi`")),
            };
            Some(built.map_err(|e| at(text, span, e))?)
        }
    };
    Ok(LoadedInstance { instance, utility_box })
}

pub fn load_instance(path: &Path) -> Result<LoadedInstance> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text)
}

#[derive(Serialize)]
struct OutInstance<'a> {
    states: &'a [String],
    actions: &'a [String],
    prior: &'a [f64],
    receiver_u: &'a [Vec<f64>],
    sender_v: &'a [Vec<f64>],
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    utility_box: Option<RawBox>,
    tolerances: &'a Tolerances,
}

/// Serializes an instance (and optionally its box, as explicit bounds) in
/// the format [`parse_instance`] reads.
pub fn to_toml_string(inst: &PersuasionInstance, utility_box: Option<&UtilityBox>) -> Result<String> {
    let out = OutInstance {
        states: &inst.state_labels,
        actions: &inst.action_labels,
        prior: inst.prior.probs(),
        receiver_u: inst.receiver_u.rows(),
        sender_v: inst.sender_v.rows(),
        utility_box: utility_box.map(|b| RawBox {
            lo: Some(b.lo.rows().to_vec()),
            hi: Some(b.hi.rows().to_vec()),
            ..RawBox::default()
        }),
        tolerances: &inst.tol,
    };
    toml::to_string(&out).map_err(|e| Error::internal(format!("could not serialize instance: {e}")))
}

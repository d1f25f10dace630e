//! Robustness of the reference optimum to receiver-utility uncertainty:
//! adjustment policies, stability flags, the classifier with its fragile
//! witness, and regret / max-min evaluation over a utility box.

mod adjustment;
pub(crate) mod classify;
mod pseudo;
mod regret;
mod stability;

pub use adjustment::{adjust_to_type, build_adjustment, loss_bound, AdjustmentResult};
pub use classify::{classify, classify_in_box, fragile_witness_type, FragilePosterior, RobustnessReport, Verdict};
pub use pseudo::{pseudo_optimal_value, pseudo_regions, PseudoSystem};
pub use regret::{
    evaluate_policy_over_types, search_robust_policy, witness_type_set, Criterion, SearchResult, TypeEvaluation,
    TypeScore,
};
pub use stability::{action_stability_flags, duplicates_sender_indifferent, receiver_duplicates, StabilityFlags};

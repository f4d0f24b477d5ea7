//! The fill loop and its instrumentation.

mod cost;
mod engine;
mod metrics;
pub mod priority;

pub use cost::{masked_cost, target_origin};
pub use engine::{
    brute_force_best, inpaint, inpaint_with_index, make_query, paste, query_best_patch,
    select_index, select_target, InpaintConfig, InpaintOutcome, IterationRecord, Match, SearchMode,
};
pub use metrics::{acceleration_error, AccelerationSummary};
pub use priority::{compute_priority, ConfidenceMap};

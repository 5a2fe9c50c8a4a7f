//! Decay fits, path verdicts, finite-rank and dominance checks.

pub mod decay;
pub mod dominance;
pub mod rankdiff;
pub mod tensor;
pub mod verdict;

pub use decay::{
    classify, default_window, estimate_decay, fit_power_law, summability_margin, summability_test,
    DecayEstimate, Summability, SummabilityReport,
};
pub use dominance::{dominance_trace, exact_circle_ratio_sum, zeta, DominanceReport, DEFAULT_RIDGE};
pub use rankdiff::{finite_rank_difference, RankOutcome, RankReport};
pub use tensor::{largest_products, tensor_verdict, tensor_verdict_with, TensorVerdict};
pub use verdict::{
    decompose, default_rule, kernel_json, rkhs_path_verdict, rkhs_path_verdict_with,
    verdict_from_decomposition, Decision, Verdict, VerdictOptions,
};

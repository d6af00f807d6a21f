//! Round-statistics accounting, typical-execution verification, property
//! checkers over simulation traces and the closed-form parameter formulas.

mod counters;
mod lineage;
mod metrics;
mod params;
mod properties;
mod report;

use thiserror::Error;

use crate::blocktree::{TreeError, WeightError};

pub use counters::{
    typical_execution_check, window_sums, Condition, ConditionOutcome, Counters, TypicalOptions,
    TypicalReport, Window, WindowSums,
};
pub use metrics::{
    distance_metrics, fork_duration, psi_f_expected, subtree_weight_samples, throughput_metrics,
    ThroughputMetrics,
};
pub use params::{
    balance_bound, compute_k, compute_r_u, derive_params, expected_subtree_weight, growth_levels,
    growth_tau, BalanceBound, DerivedParams, FreshParams, KProfile,
};
pub use properties::{
    chain_growth_check, common_prefix_check, fresh_block_check, honest_node_mining_check,
    ledger_checks, length_sandwich_check, weight_growth_check, FreshBlockReport, LedgerReport,
    LivenessReport, PropertyReport, SandwichReport, Violation, WeightGrowthReport,
};
pub use report::{params_digest, write_check_csv, CheckRecord};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("trace has {rounds} rounds, fewer than lambda = {lambda}")]
    TraceTooShort { rounds: u64, lambda: u64 },
    #[error("window {start}..={end} outside the trace of {rounds} rounds")]
    BadWindow { start: u64, end: u64, rounds: u64 },
    #[error("the check needs per-round heads (record = Full)")]
    NeedsFullRecord,
    #[error("the check needs stable prefixes recorded during the run")]
    NeedsStability,
    #[error("the check needs public main-chain lengths (track_public)")]
    NeedsPublicLengths,
    #[error("undefined for the longest-chain limit")]
    LimitCoefficient,
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

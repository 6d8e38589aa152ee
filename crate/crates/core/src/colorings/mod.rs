//! Defective, frugal and list coloring pipelines, each reduced to LLL
//! instances and checked by an exact verifier.

mod defective;
mod frugal;
mod list;
mod verify;

use serde::{Deserialize, Serialize};

use crate::runtime::RoundLedger;

pub use defective::{bucket_once, defective_coloring, BucketState};
pub use frugal::{frugal_coloring, frugal_coloring_with, frugal_progress_step, sample_partial_frugal, FrugalConfig, PartialFrugal};
pub use list::{
    check_pruning, list_coloring, list_coloring_with, prune_once, prune_once_with, ListConfig, ListState,
    PruneCheck,
};
pub use verify::{verify_coloring, ColoringReport, VerifyMode};

/// `λ` used for the decompositions inside the pipelines' LLL solves.
pub(crate) const INNER_LAMBDA: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub stage: String,
    pub delta_in: usize,
    pub delta_out: usize,
    /// Buckets (defective), sampling steps (frugal) or list bound (list).
    pub param: f64,
    pub new_colors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoringResult {
    pub colors: Vec<usize>,
    /// Distinct colors used.
    pub count: usize,
    /// Bound on the palette the pipeline could have used.
    pub cap: f64,
    /// Colors allocated so far (frugal palettes are never reused).
    pub watermark: Option<usize>,
    /// A schedule step failed to contract and was skipped.
    pub clamped: bool,
    pub steps: Vec<StepRecord>,
    pub ledger: RoundLedger,
}

impl ColoringResult {
    pub(crate) fn new(colors: Vec<usize>, cap: f64, ledger: RoundLedger) -> Self {
        ColoringResult {
            count: distinct(&colors),
            colors,
            cap,
            watermark: None,
            clamped: false,
            steps: Vec::new(),
            ledger,
        }
    }
}

pub(crate) fn distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

pub(crate) fn log2(x: f64) -> f64 {
    x.max(1.0).log2()
}

//! Mining with wall-clock and heap measurements filled in.

use std::time::Instant;

use phui_core::model::{Thresholds, UncertainDatabase, UtilityTable};
use phui_core::{mine, MineError, MiningConfig, MiningOutcome};

use crate::alloc_track;

/// Runs the miner and records `elapsed` and, when the counting allocator is
/// installed, `peak_alloc`.
pub fn timed_mine(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    config: &MiningConfig,
) -> Result<MiningOutcome, MineError> {
    let baseline = alloc_track::current();
    alloc_track::reset_peak();
    let start = Instant::now();
    let mut outcome = mine(db, table, th, config)?;
    outcome.stats.elapsed = start.elapsed();
    outcome.stats.peak_alloc = alloc_track::peak_since_reset(baseline);
    Ok(outcome)
}

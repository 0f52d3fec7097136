//! Differential checking of the miner against the brute-force oracle.

use std::fmt;

use phui_core::fuzz::fuzz_case;
use phui_core::model::{MinedPattern, Thresholds, UncertainDatabase, UtilityTable};
use phui_core::oracle::{brute_force_mine, OracleError};
use phui_core::{mine, MineError, MiningConfig, MiningOutcome, Preset};

use crate::dataio::format_number;

/// Relative tolerance on expected support. Utilities must match exactly.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// A miner under test, normally [`phui_core::mine`].
pub type Miner = dyn Fn(
    &UncertainDatabase,
    &UtilityTable,
    &Thresholds,
    &MiningConfig,
) -> Result<MiningOutcome, MineError>;

#[derive(Clone, Debug, PartialEq)]
pub enum Mismatch {
    /// Found by the oracle, missed by the miner.
    Missing(MinedPattern),
    /// Reported by the miner, not a PHUI.
    Extra(MinedPattern),
    Values {
        miner: MinedPattern,
        oracle: MinedPattern,
    },
}

fn describe(m: &MinedPattern) -> String {
    format!(
        "{} (utility {}, expected support {})",
        m.pattern,
        format_number(m.utility),
        format_number(m.expected_support)
    )
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Missing(m) => write!(f, "missing {}", describe(m)),
            Mismatch::Extra(m) => write!(f, "unexpected {}", describe(m)),
            Mismatch::Values { miner, oracle } => {
                write!(
                    f,
                    "miner reports {} but oracle has {}",
                    describe(miner),
                    describe(oracle)
                )
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{config}: {source}")]
    Mine { config: String, source: MineError },
    #[error("{config}: {mismatch}")]
    Diverged { config: String, mismatch: Mismatch },
}

fn values_agree(a: &MinedPattern, b: &MinedPattern) -> bool {
    a.utility == b.utility
        && (a.expected_support - b.expected_support).abs()
            <= PROBABILITY_TOLERANCE * a.expected_support.abs().max(b.expected_support.abs())
}

/// First difference between two canonically ordered result lists.
pub fn first_mismatch(miner: &[MinedPattern], oracle: &[MinedPattern]) -> Option<Mismatch> {
    let (mut i, mut j) = (0, 0);
    while i < miner.len() || j < oracle.len() {
        match (miner.get(i), oracle.get(j)) {
            (Some(m), Some(o)) => match m.pattern.canonical_cmp(&o.pattern) {
                std::cmp::Ordering::Less => return Some(Mismatch::Extra(m.clone())),
                std::cmp::Ordering::Greater => return Some(Mismatch::Missing(o.clone())),
                std::cmp::Ordering::Equal => {
                    if !values_agree(m, o) {
                        return Some(Mismatch::Values {
                            miner: m.clone(),
                            oracle: o.clone(),
                        });
                    }
                    i += 1;
                    j += 1;
                }
            },
            (Some(m), None) => return Some(Mismatch::Extra(m.clone())),
            (None, Some(o)) => return Some(Mismatch::Missing(o.clone())),
            (None, None) => unreachable!(),
        }
    }
    None
}

/// Checks every preset on one database. Returns the oracle's result count.
pub fn verify_case(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    max_items: usize,
    miner: &Miner,
) -> Result<usize, VerifyError> {
    let oracle = brute_force_mine(db, table, th, max_items)?;
    for preset in Preset::EVERY {
        let config = MiningConfig::from_preset(preset);
        let got = miner(db, table, th, &config).map_err(|source| VerifyError::Mine {
            config: config.to_string(),
            source,
        })?;
        if let Some(mismatch) = first_mismatch(&got.patterns, &oracle) {
            return Err(VerifyError::Diverged {
                config: config.to_string(),
                mismatch,
            });
        }
    }
    Ok(oracle.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzFailure {
    pub case_seed: u64,
    pub error: VerifyError,
}

impl fmt::Display for FuzzFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case seed {}: {}", self.case_seed, self.error)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FuzzSummary {
    pub cases: usize,
    pub patterns: usize,
}

/// Seed of the `k`-th case of a fuzz run.
pub fn case_seed(run_seed: u64, k: u64) -> u64 {
    run_seed.wrapping_mul(1_000_003).wrapping_add(k)
}

/// Runs `cases` generated cases and stops at the first divergence.
pub fn verify_fuzz(
    cases: usize,
    run_seed: u64,
    max_items: usize,
    max_transactions: usize,
    miner: &Miner,
) -> Result<FuzzSummary, FuzzFailure> {
    let mut summary = FuzzSummary::default();
    for k in 0..cases as u64 {
        let seed = case_seed(run_seed, k);
        let case = fuzz_case(seed, max_items, max_transactions);
        summary.patterns += verify_case(&case.db, &case.table, &case.thresholds, max_items, miner)
            .map_err(|error| FuzzFailure {
                case_seed: seed,
                error,
            })?;
        summary.cases += 1;
    }
    Ok(summary)
}

/// The library miner with the [`Miner`] signature.
pub fn library_miner() -> &'static Miner {
    &mine
}

/// A deliberately broken miner that drops the longest reported pattern.
/// Used to check that divergences are detected.
pub fn faulty_miner() -> &'static Miner {
    &drop_last
}

fn drop_last(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    config: &MiningConfig,
) -> Result<MiningOutcome, MineError> {
    let mut out = mine(db, table, th, config)?;
    out.patterns.pop();
    Ok(out)
}

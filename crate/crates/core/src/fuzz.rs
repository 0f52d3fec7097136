//! Small random mining cases for equivalence testing against the oracle.
//!
//! Half of the cases draw probabilities from the grid `{0.25, 0.5, 0.75, 1}`.
//! Every product and sum of such values is exact in binary floating point, so
//! thresholds can sit exactly on a pattern's expected support without the
//! membership test depending on evaluation order. Utilities are integral and
//! always exact, so utility thresholds are placed on pattern boundaries in
//! every case.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::datagen::{generate, GenParams};
use crate::measures::{expected_support, pattern_utility};
use crate::model::{Thresholds, UncertainDatabase, UtilityTable};
use crate::oracle::occurring_patterns;

pub const NEGATIVE_FRACTIONS: [f64; 4] = [0.0, 0.2, 0.5, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct FuzzCase {
    pub seed: u64,
    pub params: GenParams,
    pub db: UncertainDatabase,
    pub table: UtilityTable,
    pub thresholds: Thresholds,
    /// Whether probabilities come from the exact grid.
    pub exact_probabilities: bool,
}

/// Finds `min_pro` with `min_pro × n == target` exactly, if one exists
/// within a few ulps of `target / n`.
fn exact_min_pro(target: f64, n: usize) -> Option<f64> {
    let n_f = n as f64;
    let mut candidate = target / n_f;
    for _ in 0..4 {
        candidate = candidate.next_down();
    }
    for _ in 0..9 {
        if candidate * n_f == target && (0.0..=1.0).contains(&candidate) {
            return Some(candidate);
        }
        candidate = candidate.next_up();
    }
    None
}

/// Builds case number `seed` with at most `max_items` items and
/// `max_tx` transactions.
pub fn fuzz_case(seed: u64, max_items: usize, max_tx: usize) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f00d);
    let n_items = rng.random_range(1..=max_items.max(1));
    let n_transactions = rng.random_range(1..=max_tx.max(1));
    let max_tx_len = n_items.min(8);
    let avg_tx_len = rng.random_range(1.0..=(max_tx_len as f64).min(5.0));
    let negative_fraction = NEGATIVE_FRACTIONS[(seed % 4) as usize];
    let exact_probabilities = (seed / 4).is_multiple_of(2);
    let params = GenParams {
        n_transactions,
        n_items,
        avg_tx_len,
        max_tx_len,
        utility_range: (-100.0, 100.0),
        lognormal_mu: 2.5,
        lognormal_sigma: 1.0,
        quantity_max: 5,
        negative_fraction,
        probability_grid: exact_probabilities.then_some(4),
        seed,
        ..GenParams::default()
    };
    let (db, table) = generate(&params).expect("fuzz parameters are valid");

    let measured: Vec<(f64, f64)> = occurring_patterns(&db)
        .iter()
        .map(|p| (pattern_utility(p, &db, &table), expected_support(p, &db)))
        .collect();
    let n = db.len();
    let pick = |rng: &mut ChaCha8Rng| measured[rng.random_range(0..measured.len())];

    let min_util = match rng.random_range(0..4) {
        // Exactly on some pattern's utility.
        0 | 1 => pick(&mut rng).0,
        2 => {
            let (lo, hi) = measured
                .iter()
                .fold((0.0f64, 0.0f64), |(lo, hi), &(u, _)| (lo.min(u), hi.max(u)));
            let span = (hi - lo).max(1.0);
            (lo + rng.random_range(0.0..=1.0) * span) as i64 as f64
        }
        _ => -(rng.random_range(0..=50) as f64),
    };
    let min_pro = match rng.random_range(0..3) {
        0 if exact_probabilities => {
            exact_min_pro(pick(&mut rng).1, n).unwrap_or_else(|| rng.random_range(0.0..=0.5))
        }
        1 => 0.0,
        _ => rng.random_range(0.0..=0.5),
    };
    FuzzCase {
        seed,
        params,
        db,
        table,
        thresholds: Thresholds { min_util, min_pro },
        exact_probabilities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_database;

    #[test]
    fn cases_are_valid_and_deterministic() {
        for seed in 0..40 {
            let case = fuzz_case(seed, 12, 30);
            assert!(validate_database(&case.db, &case.table).is_ok());
            assert!(case.thresholds.validate().is_ok());
            assert!(case.db.item_universe().len() <= 12);
            assert!(case.db.len() <= 30);
            assert_eq!(case, fuzz_case(seed, 12, 30));
        }
    }

    #[test]
    fn exact_min_pro_hits_target() {
        for (target, n) in [(1.25, 5usize), (2.75, 30), (0.5625, 7), (3.0, 3)] {
            let m = exact_min_pro(target, n).unwrap();
            assert_eq!(m * n as f64, target);
        }
    }

    #[test]
    fn some_cases_sit_on_probability_boundaries() {
        let hits = (0..200)
            .map(|seed| fuzz_case(seed, 12, 30))
            .filter(|c| {
                let bound = c.thresholds.min_expected_support(c.db.len());
                bound > 0.0
                    && occurring_patterns(&c.db)
                        .iter()
                        .any(|p| expected_support(p, &c.db) == bound)
            })
            .count();
        assert!(hits > 10, "{hits}");
    }
}

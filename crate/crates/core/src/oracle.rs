//! Brute-force reference miner.
//!
//! Enumerates every non-empty subset of every distinct transaction itemset
//! and applies the PHUI definition through [`crate::measures`]. No pruning,
//! no processing order, no lists.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use crate::measures::{expected_support, pattern_utility};
use crate::model::{
    sort_canonical, Item, MinedPattern, Pattern, Thresholds, UncertainDatabase, UtilityTable,
};

/// Default bound on the item universe accepted by [`brute_force_mine`].
pub const DEFAULT_MAX_ITEMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("item universe has {size} items, oracle limit is {max}")]
    UniverseTooLarge { size: usize, max: usize },
}

/// Every pattern occurring in at least one transaction.
pub fn occurring_patterns(db: &UncertainDatabase) -> BTreeSet<Pattern> {
    let itemsets: BTreeSet<Vec<Item>> = db
        .transactions()
        .iter()
        .map(|t| t.items().collect())
        .collect();
    let mut patterns = BTreeSet::new();
    for items in itemsets {
        let n = items.len();
        for mask in 1u64..(1u64 << n) {
            let subset = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| items[k]);
            if let Ok(p) = Pattern::new(subset) {
                patterns.insert(p);
            }
        }
    }
    patterns
}

/// All PHUIs of `db`, in canonical order.
pub fn brute_force_mine(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    max_items: usize,
) -> Result<Vec<MinedPattern>, OracleError> {
    let size = db.item_universe().len();
    if size > max_items {
        return Err(OracleError::UniverseTooLarge {
            size,
            max: max_items,
        });
    }
    let min_support = th.min_expected_support(db.len());
    let mut out: Vec<MinedPattern> = occurring_patterns(db)
        .into_iter()
        .filter_map(|pattern| {
            let utility = pattern_utility(&pattern, db, table);
            let support = expected_support(&pattern, db);
            (utility >= th.min_util && support >= min_support).then_some(MinedPattern {
                pattern,
                utility,
                expected_support: support,
            })
        })
        .collect();
    sort_canonical(&mut out);
    Ok(out)
}

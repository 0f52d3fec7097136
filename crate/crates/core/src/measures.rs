//! Direct evaluation of every scalar measure, straight from the definitions.
//!
//! These functions are deliberately naive and serve as ground truth for the
//! list-based miner. Database-wide sums accumulate in ascending tid order.
//! Items missing from the utility table contribute zero utility at the
//! database level; run [`crate::model::validate_database`] first.

use thiserror::Error;

use crate::model::{
    is_positive_utility, Item, Pattern, Thresholds, Transaction, UncertainDatabase, UtilityTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("item {item} does not occur in transaction T{tid}")]
    ItemAbsent { item: Item, tid: u32 },
    #[error("pattern is not contained in transaction T{tid}")]
    PatternNotContained { tid: u32 },
    #[error("item {0} has no unit utility")]
    MissingUtility(Item),
}

/// `u(i, T) = pr(i) × q(i, T)`.
pub fn item_utility(
    item: Item,
    t: &Transaction,
    table: &UtilityTable,
) -> Result<f64, MeasureError> {
    let entry = t
        .get(item)
        .ok_or(MeasureError::ItemAbsent { item, tid: t.tid() })?;
    let unit = table.get(item).ok_or(MeasureError::MissingUtility(item))?;
    Ok(unit * f64::from(entry.quantity))
}

/// `u(X, T)`, the sum of member utilities.
pub fn pattern_utility_in_tx(
    pattern: &Pattern,
    t: &Transaction,
    table: &UtilityTable,
) -> Result<f64, MeasureError> {
    if !t.contains_all(pattern) {
        return Err(MeasureError::PatternNotContained { tid: t.tid() });
    }
    pattern
        .items()
        .iter()
        .try_fold(0.0, |acc, &i| Ok(acc + item_utility(i, t, table)?))
}

fn supporting<'a>(
    pattern: &'a Pattern,
    db: &'a UncertainDatabase,
) -> impl Iterator<Item = &'a Transaction> + 'a {
    db.transactions().iter().filter(|t| t.contains_all(pattern))
}

fn utility_or_zero(item: Item, t: &Transaction, table: &UtilityTable) -> f64 {
    item_utility(item, t, table).unwrap_or(0.0)
}

/// `u(X)`, summed over supporting transactions. Zero if unsupported.
pub fn pattern_utility(pattern: &Pattern, db: &UncertainDatabase, table: &UtilityTable) -> f64 {
    supporting(pattern, db)
        .map(|t| {
            pattern
                .items()
                .iter()
                .map(|&i| utility_or_zero(i, t, table))
                .sum::<f64>()
        })
        .sum()
}

/// `p(X, T)`, the product of member existence probabilities.
pub fn pattern_probability_in_tx(pattern: &Pattern, t: &Transaction) -> Result<f64, MeasureError> {
    pattern.items().iter().try_fold(1.0, |acc, &i| {
        let e = t
            .get(i)
            .ok_or(MeasureError::PatternNotContained { tid: t.tid() })?;
        Ok(acc * e.probability)
    })
}

/// `Pro(X)`, the expected support. Zero if unsupported.
pub fn expected_support(pattern: &Pattern, db: &UncertainDatabase) -> f64 {
    supporting(pattern, db)
        .map(|t| {
            pattern
                .items()
                .iter()
                .map(|&i| t.get(i).map_or(0.0, |e| e.probability))
                .product::<f64>()
        })
        .sum()
}

/// `TU(T)`, including negative utilities.
pub fn transaction_utility(t: &Transaction, table: &UtilityTable) -> f64 {
    t.items().map(|i| utility_or_zero(i, t, table)).sum()
}

/// `RTU(T)`, the sum over positive-group items only.
pub fn redefined_transaction_utility(t: &Transaction, table: &UtilityTable) -> f64 {
    t.items()
        .filter(|&i| table.get(i).is_some_and(is_positive_utility))
        .map(|i| utility_or_zero(i, t, table))
        .sum()
}

/// `RTWU(X)`, the sum of RTU over supporting transactions.
pub fn rtwu(pattern: &Pattern, db: &UncertainDatabase, table: &UtilityTable) -> f64 {
    supporting(pattern, db)
        .map(|t| redefined_transaction_utility(t, table))
        .sum()
}

/// Positive and negative parts of `u(X)`: `(pu(X), nu(X))`.
pub fn utility_parts(
    pattern: &Pattern,
    db: &UncertainDatabase,
    table: &UtilityTable,
) -> (f64, f64) {
    let mut pu = 0.0;
    let mut nu = 0.0;
    for t in supporting(pattern, db) {
        for &i in pattern.items() {
            let u = utility_or_zero(i, t, table);
            if table.get(i).is_some_and(is_positive_utility) {
                pu += u;
            } else {
                nu += u;
            }
        }
    }
    (pu, nu)
}

/// The PHUI predicate: `u(X) ≥ min_util` and `Pro(X) ≥ min_pro × |D|`.
pub fn is_phui(
    pattern: &Pattern,
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
) -> bool {
    pattern_utility(pattern, db, table) >= th.min_util
        && expected_support(pattern, db) >= th.min_expected_support(db.len())
}

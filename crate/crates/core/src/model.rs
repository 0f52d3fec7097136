//! Domain types shared by every other module.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// An item identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item(pub u32);

impl Item {
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for Item {
    fn from(id: u32) -> Self {
        Item(id)
    }
}

/// External (unit) utility of every item. Values may be negative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UtilityTable {
    entries: BTreeMap<Item, f64>,
}

impl UtilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the unit utility of `item`, returning the previous value if any.
    pub fn insert(&mut self, item: Item, utility: f64) -> Option<f64> {
        self.entries.insert(item, utility)
    }

    pub fn get(&self, item: Item) -> Option<f64> {
        self.entries.get(&item).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending item order.
    pub fn iter(&self) -> impl Iterator<Item = (Item, f64)> + '_ {
        self.entries.iter().map(|(&i, &u)| (i, u))
    }
}

impl FromIterator<(Item, f64)> for UtilityTable {
    fn from_iter<T: IntoIterator<Item = (Item, f64)>>(iter: T) -> Self {
        UtilityTable {
            entries: iter.into_iter().collect(),
        }
    }
}

/// Whether an item belongs to the positive group (unit utility ≥ 0) or the
/// negative group. Zero-utility items are grouped with the positives.
pub fn is_positive_utility(unit_utility: f64) -> bool {
    unit_utility >= 0.0
}

/// One `(item, quantity, probability)` occurrence inside a transaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransactionEntry {
    pub item: Item,
    pub quantity: u32,
    pub probability: f64,
}

impl TransactionEntry {
    pub fn new(item: impl Into<Item>, quantity: u32, probability: f64) -> Self {
        TransactionEntry {
            item: item.into(),
            quantity,
            probability,
        }
    }
}

/// A transaction. Entries are kept sorted by ascending item id.
#[derive(Clone, Debug, PartialEq)]
pub struct Transaction {
    tid: u32,
    entries: Vec<TransactionEntry>,
}

impl Transaction {
    fn new(tid: u32, mut entries: Vec<TransactionEntry>) -> Self {
        entries.sort_by_key(|e| e.item);
        Transaction { tid, entries }
    }

    /// 1-based position in the database.
    pub fn tid(&self) -> u32 {
        self.tid
    }

    pub fn entries(&self) -> &[TransactionEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, item: Item) -> Option<&TransactionEntry> {
        self.entries
            .binary_search_by_key(&item, |e| e.item)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn contains(&self, item: Item) -> bool {
        self.get(item).is_some()
    }

    pub fn contains_all(&self, pattern: &Pattern) -> bool {
        pattern.items().iter().all(|&i| self.contains(i))
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.entries.iter().map(|e| e.item)
    }
}

/// An ordered sequence of transactions with tids `1..=n`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UncertainDatabase {
    transactions: Vec<Transaction>,
}

impl UncertainDatabase {
    /// Builds a database, assigning tids by position. Entries of each
    /// transaction are normalized to ascending item id.
    pub fn from_entries<I>(transactions: I) -> Self
    where
        I: IntoIterator<Item = Vec<TransactionEntry>>,
    {
        let transactions = transactions
            .into_iter()
            .enumerate()
            .map(|(pos, entries)| Transaction::new(pos as u32 + 1, entries))
            .collect();
        UncertainDatabase { transactions }
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    /// |D|, the number of transactions.
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    pub fn item_universe(&self) -> BTreeSet<Item> {
        self.transactions.iter().flat_map(|t| t.items()).collect()
    }

    /// The database made of the first `k` transactions.
    pub fn prefix(&self, k: usize) -> UncertainDatabase {
        UncertainDatabase {
            transactions: self.transactions.iter().take(k).cloned().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum ThresholdError {
    #[error("min-pro must be in [0,1], got {0}")]
    MinProOutOfRange(f64),
    #[error("min-util must be finite, got {0}")]
    MinUtilNotFinite(f64),
}

/// Mining thresholds: an absolute utility bound and a relative expected
/// support bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    pub min_util: f64,
    pub min_pro: f64,
}

impl Thresholds {
    pub fn new(min_util: f64, min_pro: f64) -> Result<Self, ThresholdError> {
        let th = Thresholds { min_util, min_pro };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<(), ThresholdError> {
        if !self.min_util.is_finite() {
            return Err(ThresholdError::MinUtilNotFinite(self.min_util));
        }
        if !(0.0..=1.0).contains(&self.min_pro) {
            return Err(ThresholdError::MinProOutOfRange(self.min_pro));
        }
        Ok(())
    }

    /// The absolute expected-support bound `min_pro × |D|`.
    pub fn min_expected_support(&self, db_len: usize) -> f64 {
        self.min_pro * db_len as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("pattern is empty")]
    Empty,
    #[error("item {0} appears more than once")]
    DuplicateItem(Item),
}

/// A non-empty itemset, stored sorted by ascending item id.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern(Vec<Item>);

impl Pattern {
    pub fn new<I: IntoIterator<Item = Item>>(items: I) -> Result<Self, PatternError> {
        let mut items: Vec<Item> = items.into_iter().collect();
        if items.is_empty() {
            return Err(PatternError::Empty);
        }
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(PatternError::DuplicateItem(w[0]));
        }
        Ok(Pattern(items))
    }

    /// Convenience constructor from raw ids.
    pub fn of(ids: &[u32]) -> Result<Self, PatternError> {
        Pattern::new(ids.iter().map(|&i| Item(i)))
    }

    pub fn singleton(item: Item) -> Self {
        Pattern(alloc::vec![item])
    }

    pub fn items(&self) -> &[Item] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; patterns are non-empty.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: Item) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// This pattern extended by `item`. Returns `None` if already present.
    pub fn with(&self, item: Item) -> Option<Pattern> {
        match self.0.binary_search(&item) {
            Ok(_) => None,
            Err(pos) => {
                let mut items = self.0.clone();
                items.insert(pos, item);
                Some(Pattern(items))
            }
        }
    }

    /// Ordering used for result files: by length, then lexicographically.
    pub fn canonical_cmp(&self, other: &Pattern) -> core::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, item) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

/// A discovered PHUI with its exact utility and expected support.
#[derive(Clone, Debug, PartialEq)]
pub struct MinedPattern {
    pub pattern: Pattern,
    pub utility: f64,
    pub expected_support: f64,
}

/// Sorts results by pattern length, then lexicographic item ids.
pub fn sort_canonical(patterns: &mut [MinedPattern]) {
    patterns.sort_by(|a, b| a.pattern.canonical_cmp(&b.pattern));
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyTransaction {
        tid: u32,
    },
    DuplicateItem {
        tid: u32,
        item: Item,
    },
    ProbabilityOutOfRange {
        tid: u32,
        item: Item,
        probability: f64,
    },
    QuantityTooSmall {
        tid: u32,
        item: Item,
        quantity: u32,
    },
    MissingUtility {
        item: Item,
    },
    NonFiniteUtility {
        item: Item,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTransaction { tid } => write!(f, "T{tid}: empty transaction"),
            Violation::DuplicateItem { tid, item } => {
                write!(f, "T{tid}: duplicate item {item}")
            }
            Violation::ProbabilityOutOfRange {
                tid,
                item,
                probability,
            } => write!(
                f,
                "T{tid}: probability out of range (0,1] for item {item}: {probability}"
            ),
            Violation::QuantityTooSmall {
                tid,
                item,
                quantity,
            } => write!(
                f,
                "T{tid}: quantity must be >= 1 for item {item}: {quantity}"
            ),
            Violation::MissingUtility { item } => {
                write!(f, "item {item} missing from utility table")
            }
            Violation::NonFiniteUtility { item } => {
                write!(f, "item {item} has a non-finite unit utility")
            }
        }
    }
}

/// Outcome of [`validate_database`]; empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every structural rule a database and its utility table must obey.
pub fn validate_database(db: &UncertainDatabase, table: &UtilityTable) -> ValidationReport {
    let mut violations = Vec::new();
    let mut missing = BTreeSet::new();
    for t in db.transactions() {
        let tid = t.tid();
        if t.is_empty() {
            violations.push(Violation::EmptyTransaction { tid });
        }
        for w in t.entries().windows(2) {
            if w[0].item == w[1].item {
                violations.push(Violation::DuplicateItem {
                    tid,
                    item: w[0].item,
                });
            }
        }
        for e in t.entries() {
            if !(e.probability > 0.0 && e.probability <= 1.0) {
                violations.push(Violation::ProbabilityOutOfRange {
                    tid,
                    item: e.item,
                    probability: e.probability,
                });
            }
            if e.quantity < 1 {
                violations.push(Violation::QuantityTooSmall {
                    tid,
                    item: e.item,
                    quantity: e.quantity,
                });
            }
            match table.get(e.item) {
                None => {
                    missing.insert(e.item);
                }
                Some(u) if !u.is_finite() => {
                    missing.insert(e.item);
                }
                Some(_) => {}
            }
        }
    }
    for item in missing {
        match table.get(item) {
            None => violations.push(Violation::MissingUtility { item }),
            Some(_) => violations.push(Violation::NonFiniteUtility { item }),
        }
    }
    ValidationReport { violations }
}

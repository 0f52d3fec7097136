//! The PU±-list: a vertical, tid-sorted list of
//! `(tid, pro, pu, nu, rpu)` entries per pattern, with cached column sums.
//!
//! Lists of single items come from one pass over the [`OrderedDatabase`];
//! longer patterns are built by joining two sibling lists (and their common
//! prefix) with [`construct`].

use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;
use thiserror::Error;

use crate::model::{is_positive_utility, Item, Pattern, UncertainDatabase, UtilityTable};

/// Total order in which items are appended to patterns.
///
/// Positive-group items come first, then negative-group items; each group is
/// sorted by ascending RTWU with ties broken by ascending item id.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessingOrder {
    items: Vec<Item>,
    ranks: HashMap<Item, u32>,
    positive_count: usize,
}

impl ProcessingOrder {
    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn rank(&self, item: Item) -> Option<u32> {
        self.ranks.get(&item).copied()
    }

    pub fn item(&self, rank: u32) -> Item {
        self.items[rank as usize]
    }

    /// Number of positive-group items; they occupy ranks `0..positive_count`.
    pub fn positive_count(&self) -> usize {
        self.positive_count
    }

    pub fn is_positive_rank(&self, rank: u32) -> bool {
        (rank as usize) < self.positive_count
    }
}

/// Orders `surviving` items (given with their RTWU) for processing.
/// Items missing from `table` are treated as positive.
pub fn compute_processing_order(
    table: &UtilityTable,
    surviving: &[(Item, f64)],
) -> ProcessingOrder {
    let mut keyed: Vec<(bool, f64, Item)> = surviving
        .iter()
        .map(|&(item, rtwu)| {
            let negative = table.get(item).is_some_and(|u| !is_positive_utility(u));
            (negative, rtwu, item)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.total_cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    let positive_count = keyed.iter().filter(|k| !k.0).count();
    let items: Vec<Item> = keyed.into_iter().map(|k| k.2).collect();
    let ranks = items
        .iter()
        .enumerate()
        .map(|(r, &i)| (i, r as u32))
        .collect();
    ProcessingOrder {
        items,
        ranks,
        positive_count,
    }
}

/// An item occurrence after reordering: rank in the processing order,
/// utility `u(i, T)` and existence probability.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedEntry {
    pub rank: u32,
    pub utility: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderedTransaction {
    pub tid: u32,
    /// Entries sorted by ascending rank.
    pub entries: Vec<OrderedEntry>,
}

impl OrderedTransaction {
    /// RTU of the filtered transaction.
    pub fn rtu(&self, order: &ProcessingOrder) -> f64 {
        self.entries
            .iter()
            .filter(|e| order.is_positive_rank(e.rank))
            .map(|e| e.utility)
            .sum()
    }

    pub fn find(&self, rank: u32) -> Option<&OrderedEntry> {
        self.entries
            .binary_search_by_key(&rank, |e| e.rank)
            .ok()
            .map(|k| &self.entries[k])
    }
}

/// The database restricted to the items of a [`ProcessingOrder`], with each
/// transaction's entries sorted by that order. Transactions left empty are
/// dropped from storage but still count towards [`OrderedDatabase::db_len`].
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedDatabase {
    order: ProcessingOrder,
    transactions: Vec<OrderedTransaction>,
    db_len: usize,
}

impl OrderedDatabase {
    pub fn new(db: &UncertainDatabase, table: &UtilityTable, order: ProcessingOrder) -> Self {
        let mut transactions = Vec::with_capacity(db.len());
        for t in db.transactions() {
            let mut entries: Vec<OrderedEntry> = t
                .entries()
                .iter()
                .filter_map(|e| {
                    let rank = order.rank(e.item)?;
                    let unit = table.get(e.item).unwrap_or(0.0);
                    Some(OrderedEntry {
                        rank,
                        utility: unit * f64::from(e.quantity),
                        probability: e.probability,
                    })
                })
                .collect();
            if entries.is_empty() {
                continue;
            }
            entries.sort_unstable_by_key(|e| e.rank);
            transactions.push(OrderedTransaction {
                tid: t.tid(),
                entries,
            });
        }
        OrderedDatabase {
            order,
            transactions,
            db_len: db.len(),
        }
    }

    pub fn order(&self) -> &ProcessingOrder {
        &self.order
    }

    pub fn transactions(&self) -> &[OrderedTransaction] {
        &self.transactions
    }

    /// |D| of the source database.
    pub fn db_len(&self) -> usize {
        self.db_len
    }
}

/// One row of a PU±-list.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PuEntry {
    pub tid: u32,
    /// `p(X, T)`.
    pub pro: f64,
    /// Sum of the pattern's positive item utilities in `T`.
    pub pu: f64,
    /// Sum of the pattern's negative item utilities in `T`.
    pub nu: f64,
    /// Positive utility of the items of `T` after the pattern's last item.
    pub rpu: f64,
}

/// Column sums of a PU±-list.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sums {
    pub pro: f64,
    pub pu: f64,
    pub nu: f64,
    pub rpu: f64,
}

impl Sums {
    /// `SUM(X.iu) = SUM(X.pu) + SUM(X.nu)`, the exact utility of the pattern.
    pub fn iu(&self) -> f64 {
        self.pu + self.nu
    }

    /// Upper bound on the utility of any order-respecting extension.
    pub fn extension_bound(&self) -> f64 {
        self.pu + self.rpu
    }

    fn add(&mut self, e: &PuEntry) {
        self.pro += e.pro;
        self.pu += e.pu;
        self.nu += e.nu;
        self.rpu += e.rpu;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PuList {
    pattern: Pattern,
    last: Item,
    entries: Vec<PuEntry>,
    sums: Sums,
}

impl PuList {
    /// Entries must be sorted by ascending tid; `last` is the pattern's last
    /// item in processing order.
    pub fn from_entries(pattern: Pattern, last: Item, entries: Vec<PuEntry>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].tid < w[1].tid));
        let mut sums = Sums::default();
        entries.iter().for_each(|e| sums.add(e));
        PuList {
            pattern,
            last,
            entries,
            sums,
        }
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    /// The item most recently appended in processing order.
    pub fn last_item(&self) -> Item {
        self.last
    }

    pub fn entries(&self) -> &[PuEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sums(&self) -> Sums {
        self.sums
    }

    fn find_from(&self, from: usize, tid: u32) -> Option<usize> {
        let k = from + self.entries[from..].partition_point(|e| e.tid < tid);
        (k < self.entries.len() && self.entries[k].tid == tid).then_some(k)
    }
}

/// Builds the list of every item in the order, indexed by rank.
///
/// `rpu` comes from a single reverse suffix scan per transaction that only
/// accumulates positive-group utilities.
pub fn build_initial_pulists(odb: &OrderedDatabase) -> Vec<PuList> {
    let order = odb.order();
    let mut columns: Vec<Vec<PuEntry>> = alloc::vec![Vec::new(); order.len()];
    for t in odb.transactions() {
        let mut suffix = 0.0;
        for e in t.entries.iter().rev() {
            let positive = order.is_positive_rank(e.rank);
            let (pu, nu) = if positive {
                (e.utility, 0.0)
            } else {
                (0.0, e.utility)
            };
            columns[e.rank as usize].push(PuEntry {
                tid: t.tid,
                pro: e.probability,
                pu,
                nu,
                rpu: suffix,
            });
            if positive {
                suffix += e.utility;
            }
        }
    }
    columns
        .into_iter()
        .enumerate()
        .map(|(rank, entries)| {
            let item = order.item(rank as u32);
            PuList::from_entries(Pattern::singleton(item), item, entries)
        })
        .collect()
}

/// Builds the list of `pattern` by scanning the ordered database directly.
/// Returns `None` if some item of the pattern is not in the order.
pub fn scan_build(pattern: &Pattern, odb: &OrderedDatabase) -> Option<PuList> {
    let order = odb.order();
    let ranks: Vec<u32> = pattern
        .items()
        .iter()
        .map(|&i| order.rank(i))
        .collect::<Option<_>>()?;
    let last_rank = *ranks.iter().max()?;
    let mut entries = Vec::new();
    'tx: for t in odb.transactions() {
        let mut pro = 1.0;
        let mut pu = 0.0;
        let mut nu = 0.0;
        for &r in &ranks {
            let Some(e) = t.find(r) else { continue 'tx };
            pro *= e.probability;
            if order.is_positive_rank(r) {
                pu += e.utility;
            } else {
                nu += e.utility;
            }
        }
        let rpu = t
            .entries
            .iter()
            .filter(|e| e.rank > last_rank && order.is_positive_rank(e.rank))
            .map(|e| e.utility)
            .sum();
        entries.push(PuEntry {
            tid: t.tid,
            pro,
            pu,
            nu,
            rpu,
        });
    }
    Some(PuList::from_entries(
        pattern.clone(),
        order.item(last_rank),
        entries,
    ))
}

/// Thresholds in the absolute form the join needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JoinBounds {
    pub min_util: f64,
    /// `min_pro × |D|`.
    pub min_expected_support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Join {
    Built(PuList),
    /// The running bound of the left operand fell below a threshold; neither
    /// the joined pattern nor any extension of it can qualify.
    Abandoned,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum PuListError {
    #[error("prefix list has no entry for T{tid} shared by both operands")]
    MissingPrefixTid { tid: u32 },
    #[error("item {0} is already part of the left operand")]
    OverlappingOperands(Item),
}

/// Joins `Py` and `Pz` (with `y` before `z`) into the list of `Pyz`.
///
/// `prefix` is the list of `P`, or `None` when `Py` and `Pz` are single
/// items. With `la_prune` set, the running probability and `pu + rpu` budget
/// of `Py` is reduced for every tid of `Py` missing from `Pz`, and the join
/// is abandoned as soon as either falls below its threshold.
pub fn construct(
    prefix: Option<&PuList>,
    py: &PuList,
    pz: &PuList,
    bounds: JoinBounds,
    la_prune: bool,
) -> Result<Join, PuListError> {
    let z = pz.last_item();
    let pattern = py
        .pattern()
        .with(z)
        .ok_or(PuListError::OverlappingOperands(z))?;
    let mut probability = py.sums.pro;
    let mut utility = py.sums.pu + py.sums.rpu;
    let mut entries = Vec::with_capacity(py.len().min(pz.len()));
    let mut z_cursor = 0;
    let mut p_cursor = 0;
    for ey in py.entries() {
        match pz.find_from(z_cursor, ey.tid) {
            Some(kz) => {
                z_cursor = kz + 1;
                let ez = &pz.entries[kz];
                let joined = match prefix {
                    Some(p) => {
                        let kp = p
                            .find_from(p_cursor, ey.tid)
                            .ok_or(PuListError::MissingPrefixTid { tid: ey.tid })?;
                        p_cursor = kp + 1;
                        let e = &p.entries[kp];
                        PuEntry {
                            tid: ey.tid,
                            pro: ey.pro * ez.pro / e.pro,
                            pu: ey.pu + ez.pu - e.pu,
                            nu: ey.nu + ez.nu - e.nu,
                            rpu: ez.rpu,
                        }
                    }
                    None => PuEntry {
                        tid: ey.tid,
                        pro: ey.pro * ez.pro,
                        pu: ey.pu + ez.pu,
                        nu: ey.nu + ez.nu,
                        rpu: ez.rpu,
                    },
                };
                entries.push(joined);
            }
            None if la_prune => {
                probability -= ey.pro;
                utility -= ey.pu + ey.rpu;
                if probability < bounds.min_expected_support || utility < bounds.min_util {
                    return Ok(Join::Abandoned);
                }
            }
            None => {}
        }
    }
    Ok(Join::Built(PuList::from_entries(pattern, z, entries)))
}

/// Compares two lists entry by entry: tids and utilities exactly, `pro`
/// within `rel_tol` relative error.
pub fn lists_match(a: &PuList, b: &PuList, rel_tol: f64) -> bool {
    a.pattern == b.pattern
        && a.entries.len() == b.entries.len()
        && a.entries.iter().zip(&b.entries).all(|(x, y)| {
            x.tid == y.tid
                && x.pu == y.pu
                && x.nu == y.nu
                && x.rpu == y.rpu
                && relative_eq(x.pro, y.pro, rel_tol)
        })
}

pub(crate) fn relative_eq(a: f64, b: f64, rel_tol: f64) -> bool {
    match a.partial_cmp(&b) {
        Some(Ordering::Equal) => true,
        Some(_) => (a - b).abs() <= rel_tol * a.abs().max(b.abs()),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures;
    use crate::sample::{ptable, table1, A, B, C, D, E_};
    use alloc::vec;

    fn sample_order() -> ProcessingOrder {
        let db = table1();
        let table = ptable();
        let surviving: Vec<(Item, f64)> = [A, B, C, D, E_]
            .iter()
            .map(|&i| (i, measures::rtwu(&Pattern::singleton(i), &db, &table)))
            .collect();
        compute_processing_order(&table, &surviving)
    }

    fn sample_lists() -> (OrderedDatabase, Vec<PuList>) {
        let odb = OrderedDatabase::new(&table1(), &ptable(), sample_order());
        let lists = build_initial_pulists(&odb);
        (odb, lists)
    }

    fn list_of(lists: &[PuList], odb: &OrderedDatabase, item: Item) -> PuList {
        lists[odb.order().rank(item).unwrap() as usize].clone()
    }

    fn rows(list: &PuList) -> Vec<(u32, f64, f64, f64, f64)> {
        list.entries()
            .iter()
            .map(|e| (e.tid, e.pro, e.pu, e.nu, e.rpu))
            .collect()
    }

    fn assert_rows(list: &PuList, expected: &[(u32, f64, f64, f64, f64)]) {
        let got = rows(list);
        assert_eq!(got.len(), expected.len(), "{got:?}");
        for (g, e) in got.iter().zip(expected) {
            assert_eq!((g.0, g.2, g.3, g.4), (e.0, e.2, e.3, e.4), "{got:?}");
            assert!(relative_eq(g.1, e.1, 1e-9), "{got:?}");
        }
    }

    const BOUNDS: JoinBounds = JoinBounds {
        min_util: 20.0,
        min_expected_support: 1.25,
    };

    #[test]
    fn sample_processing_order() {
        assert_eq!(sample_order().items(), &[A, D, B, E_, C]);
        assert_eq!(sample_order().positive_count(), 4);
    }

    #[test]
    fn order_single_group_and_ties() {
        let table: UtilityTable = [(Item(1), 1.0), (Item(2), 1.0), (Item(3), 1.0)]
            .into_iter()
            .collect();
        let order =
            compute_processing_order(&table, &[(Item(3), 5.0), (Item(1), 9.0), (Item(2), 5.0)]);
        assert_eq!(order.items(), &[Item(2), Item(3), Item(1)]);
    }

    #[test]
    fn zero_utility_items_group_with_positives() {
        let table: UtilityTable = [(Item(1), 0.0), (Item(2), -1.0), (Item(3), 4.0)]
            .into_iter()
            .collect();
        let order =
            compute_processing_order(&table, &[(Item(1), 50.0), (Item(2), 1.0), (Item(3), 10.0)]);
        assert_eq!(order.items(), &[Item(3), Item(1), Item(2)]);
        assert_eq!(order.positive_count(), 2);
    }

    #[test]
    fn initial_lists_match_worked_example() {
        let (odb, lists) = sample_lists();
        assert_rows(
            &list_of(&lists, &odb, C),
            &[
                (2, 0.75, 0.0, -2.0, 0.0),
                (3, 0.70, 0.0, -4.0, 0.0),
                (4, 0.90, 0.0, -2.0, 0.0),
                (5, 0.95, 0.0, -8.0, 0.0),
            ],
        );
        assert_rows(
            &list_of(&lists, &odb, A),
            &[
                (1, 0.60, 40.0, 0.0, 67.0),
                (3, 1.00, 32.0, 0.0, 22.0),
                (4, 0.90, 24.0, 0.0, 0.0),
            ],
        );
    }

    #[test]
    fn two_item_join() {
        let (odb, lists) = sample_lists();
        let a = list_of(&lists, &odb, A);
        let c = list_of(&lists, &odb, C);
        let Join::Built(ac) = construct(None, &a, &c, BOUNDS, true).unwrap() else {
            panic!("abandoned");
        };
        assert_eq!(ac.pattern(), &Pattern::of(&[1, 3]).unwrap());
        assert_rows(
            &ac,
            &[(3, 0.70, 32.0, -4.0, 0.0), (4, 0.81, 24.0, -2.0, 0.0)],
        );
    }

    #[test]
    fn three_item_join_uses_prefix() {
        let (odb, lists) = sample_lists();
        let d = list_of(&lists, &odb, D);
        let b = list_of(&lists, &odb, B);
        let e = list_of(&lists, &odb, E_);
        let built = |j: Join| match j {
            Join::Built(l) => l,
            Join::Abandoned => panic!("abandoned"),
        };
        let db_ = built(construct(None, &d, &b, BOUNDS, false).unwrap());
        let de = built(construct(None, &d, &e, BOUNDS, false).unwrap());
        let dbe = built(construct(Some(&d), &db_, &de, BOUNDS, false).unwrap());
        assert_rows(
            &dbe,
            &[(1, 0.36, 67.0, 0.0, 0.0), (5, 0.60, 98.0, 0.0, 0.0)],
        );
        let scanned = scan_build(&Pattern::of(&[2, 4, 5]).unwrap(), &odb).unwrap();
        assert!(lists_match(&dbe, &scanned, 1e-9));
    }

    #[test]
    fn la_prune_abandons() {
        let (odb, lists) = sample_lists();
        let a = list_of(&lists, &odb, A);
        let d = list_of(&lists, &odb, D);
        assert_eq!(construct(None, &a, &d, BOUNDS, true), Ok(Join::Abandoned));
        let Join::Built(ad) = construct(None, &a, &d, BOUNDS, false).unwrap() else {
            panic!("abandoned without la-prune");
        };
        assert_eq!(ad.len(), 1);
    }

    #[test]
    fn missing_prefix_tid_is_structural_error() {
        let (odb, lists) = sample_lists();
        let a = list_of(&lists, &odb, A);
        let d = list_of(&lists, &odb, D);
        let e = list_of(&lists, &odb, E_);
        let Join::Built(de) = construct(None, &d, &e, BOUNDS, false).unwrap() else {
            panic!()
        };
        let Join::Built(db_) =
            construct(None, &d, &list_of(&lists, &odb, B), BOUNDS, false).unwrap()
        else {
            panic!()
        };
        // {a} lacks T5, which both {d,b} and {d,e} contain.
        assert_eq!(
            construct(Some(&a), &db_, &de, BOUNDS, false),
            Err(PuListError::MissingPrefixTid { tid: 5 })
        );
    }

    #[test]
    fn column_sums() {
        let (odb, lists) = sample_lists();
        let a = list_of(&lists, &odb, A).sums();
        assert!(relative_eq(a.pro, 2.5, 1e-12));
        assert_eq!((a.pu, a.nu, a.rpu, a.iu()), (96.0, 0.0, 89.0, 96.0));
        let c = list_of(&lists, &odb, C).sums();
        assert!(relative_eq(c.pro, 3.3, 1e-12));
        assert_eq!((c.pu, c.nu, c.rpu, c.iu()), (0.0, -16.0, 0.0, -16.0));
        let empty = PuList::from_entries(Pattern::singleton(A), A, vec![]).sums();
        assert_eq!(empty, Sums::default());
        assert_eq!(empty.iu(), 0.0);
    }

    #[test]
    fn scan_build_agrees_with_initial_lists() {
        let (odb, lists) = sample_lists();
        for l in &lists {
            let s = scan_build(l.pattern(), &odb).unwrap();
            assert!(lists_match(l, &s, 0.0));
        }
        assert!(scan_build(&Pattern::of(&[42]).unwrap(), &odb).is_none());
    }
}

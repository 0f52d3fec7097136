//! Depth-first PHUI mining over the set-enumeration tree of PU±-lists.
//!
//! Six pruning strategies can be switched independently through
//! [`MiningConfig`]. All of them are sound: the mined set never depends on
//! the configuration, only the amount of work (see [`MiningStats`]) does.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use core::time::Duration;

use hashbrown::HashMap;
use thiserror::Error;

use crate::model::{
    is_positive_utility, sort_canonical, validate_database, Item, MinedPattern, ThresholdError,
    Thresholds, UncertainDatabase, UtilityTable, ValidationReport,
};
use crate::pulist::{
    build_initial_pulists, compute_processing_order, construct, Join, JoinBounds, OrderedDatabase,
    ProcessingOrder, PuList, PuListError,
};

/// Named strategy combinations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    /// Strategies 1 and 2.
    P12,
    /// Strategies 1 to 3.
    P123,
    /// Strategies 1 to 4.
    P1234,
    /// All six strategies.
    All,
    /// No pruning; the initial scan keeps every item.
    None,
}

impl Preset {
    /// The four ablation presets, from least to most pruning.
    pub const ABLATION: [Preset; 4] = [Preset::P12, Preset::P123, Preset::P1234, Preset::All];
    pub const EVERY: [Preset; 5] = [
        Preset::None,
        Preset::P12,
        Preset::P123,
        Preset::P1234,
        Preset::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::P12 => "P12",
            Preset::P123 => "P123",
            Preset::P1234 => "P1234",
            Preset::All => "ALL",
            Preset::None => "NONE",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown preset {0:?} (expected P12, P123, P1234, ALL or NONE)")]
pub struct UnknownPreset(pub alloc::string::String);

impl FromStr for Preset {
    type Err = UnknownPreset;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "P12" => Ok(Preset::P12),
            "P123" => Ok(Preset::P123),
            "P1234" => Ok(Preset::P1234),
            "ALL" => Ok(Preset::All),
            "NONE" => Ok(Preset::None),
            _ => Err(UnknownPreset(s.into())),
        }
    }
}

/// Strategy toggles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MiningConfig {
    /// Abandon list joins early (PU-Prune).
    pub s1_pu_prune: bool,
    /// Drop single items failing the RTWU or expected-support bound.
    pub s2_initial_filter: bool,
    /// Do not extend nodes whose expected support is below the bound.
    pub s3_probability_bound: bool,
    /// Do not extend nodes whose `pu + rpu` sum is below `min_util`.
    pub s4_remaining_utility_bound: bool,
    /// Drop joined lists whose expected support is below the bound.
    pub s5_empty_or_lowpro_skip: bool,
    /// Skip joins whose pair RTWU in the co-occurrence structure is below
    /// `min_util`.
    pub s6_eucp: bool,
    pub preset: Option<Preset>,
}

impl MiningConfig {
    pub fn from_preset(preset: Preset) -> Self {
        let on = |n: u8| match preset {
            Preset::None => false,
            Preset::P12 => n <= 2,
            Preset::P123 => n <= 3,
            Preset::P1234 => n <= 4,
            Preset::All => true,
        };
        MiningConfig {
            s1_pu_prune: on(1),
            s2_initial_filter: on(2),
            s3_probability_bound: on(3),
            s4_remaining_utility_bound: on(4),
            s5_empty_or_lowpro_skip: on(5),
            s6_eucp: on(6),
            preset: Some(preset),
        }
    }

    /// A configuration with exactly the given strategies (numbered 1 to 6)
    /// switched on. Returns `None` for numbers outside that range.
    pub fn from_strategies(strategies: &[u8]) -> Option<Self> {
        let mut config = MiningConfig::from_preset(Preset::None);
        config.preset = None;
        for &s in strategies {
            *config.toggle_mut(s)? = true;
        }
        Some(config)
    }

    fn toggle_mut(&mut self, strategy: u8) -> Option<&mut bool> {
        Some(match strategy {
            1 => &mut self.s1_pu_prune,
            2 => &mut self.s2_initial_filter,
            3 => &mut self.s3_probability_bound,
            4 => &mut self.s4_remaining_utility_bound,
            5 => &mut self.s5_empty_or_lowpro_skip,
            6 => &mut self.s6_eucp,
            _ => return None,
        })
    }

    pub fn enabled(&self) -> Vec<u8> {
        let flags = [
            self.s1_pu_prune,
            self.s2_initial_filter,
            self.s3_probability_bound,
            self.s4_remaining_utility_bound,
            self.s5_empty_or_lowpro_skip,
            self.s6_eucp,
        ];
        (1..=6)
            .zip(flags)
            .filter(|&(_, on)| on)
            .map(|(n, _)| n)
            .collect()
    }
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig::from_preset(Preset::All)
    }
}

impl fmt::Display for MiningConfig {
    /// The preset name, or the enabled strategies as `s1+s3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.preset {
            return f.write_str(p.name());
        }
        let enabled = self.enabled();
        if enabled.is_empty() {
            return f.write_str("none");
        }
        for (k, s) in enabled.iter().enumerate() {
            if k > 0 {
                f.write_str("+")?;
            }
            write!(f, "s{s}")?;
        }
        Ok(())
    }
}

/// Work counters of one mining run.
///
/// `visited_nodes` counts every tree node examined by the search, single
/// items included. `elapsed` and `peak_alloc` are left for the caller to
/// fill in (this crate has no clock or allocator hooks).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningStats {
    pub visited_nodes: u64,
    pub joins_attempted: u64,
    pub joins_abandoned: u64,
    pub eucs_skips: u64,
    pub s3_cuts: u64,
    pub s4_cuts: u64,
    pub s5_skips: u64,
    pub phuis_found: u64,
    pub elapsed: Duration,
    pub peak_alloc: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiningOutcome {
    /// In canonical order: by length, then lexicographic item ids.
    pub patterns: Vec<MinedPattern>,
    pub stats: MiningStats,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum MineError {
    #[error("invalid database:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error(transparent)]
    List(#[from] PuListError),
}

/// Per-item measures from the first database pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItemMeasures {
    pub item: Item,
    pub rtwu: f64,
    pub expected_support: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialScan {
    /// Every item of the database, ascending id.
    pub items: Vec<ItemMeasures>,
    /// Items kept for mining, ascending id.
    pub surviving: Vec<ItemMeasures>,
    pub db_len: usize,
}

/// Computes RTWU and expected support of every item and keeps those
/// passing both single-item bounds (or all of them when `filter` is off).
pub fn initial_scan(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    filter: bool,
) -> InitialScan {
    let mut acc: HashMap<Item, (f64, f64)> = HashMap::new();
    for t in db.transactions() {
        let rtu: f64 = t
            .entries()
            .iter()
            .filter_map(|e| {
                let unit = table.get(e.item)?;
                is_positive_utility(unit).then(|| unit * f64::from(e.quantity))
            })
            .sum();
        for e in t.entries() {
            let slot = acc.entry(e.item).or_insert((0.0, 0.0));
            slot.0 += rtu;
            slot.1 += e.probability;
        }
    }
    let mut items: Vec<ItemMeasures> = acc
        .into_iter()
        .map(|(item, (rtwu, expected_support))| ItemMeasures {
            item,
            rtwu,
            expected_support,
        })
        .collect();
    items.sort_unstable_by_key(|m| m.item);
    let min_support = th.min_expected_support(db.len());
    let surviving = items
        .iter()
        .filter(|m| !filter || (m.expected_support >= min_support && m.rtwu >= th.min_util))
        .copied()
        .collect();
    InitialScan {
        items,
        surviving,
        db_len: db.len(),
    }
}

const DENSE_EUCS_LIMIT: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
enum PairStore {
    /// Upper triangle indexed by rank.
    Dense(Vec<f64>),
    Sparse(HashMap<(u32, u32), f64>),
}

/// Estimated utility co-occurrence structure: RTWU of every co-occurring
/// pair of items.
#[derive(Clone, Debug, PartialEq)]
pub struct Eucs {
    order: ProcessingOrder,
    pairs: PairStore,
}

impl Eucs {
    fn dense_index(n: usize, lo: u32, hi: u32) -> usize {
        let (lo, hi) = (lo as usize, hi as usize);
        lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
    }

    fn by_rank(&self, a: u32, b: u32) -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if lo == hi {
            return 0.0;
        }
        match &self.pairs {
            PairStore::Dense(v) => v[Self::dense_index(self.order.len(), lo, hi)],
            PairStore::Sparse(m) => m.get(&(lo, hi)).copied().unwrap_or(0.0),
        }
    }

    /// Accumulated RTWU of `{a, b}`; zero if the pair never co-occurs.
    pub fn pair_rtwu(&self, a: Item, b: Item) -> f64 {
        match (self.order.rank(a), self.order.rank(b)) {
            (Some(ra), Some(rb)) => self.by_rank(ra, rb),
            _ => 0.0,
        }
    }
}

/// Registers every co-occurring pair of the ordered database with the RTU of
/// its (filtered) transaction.
pub fn build_eucs(odb: &OrderedDatabase) -> Eucs {
    let order = odb.order().clone();
    let n = order.len();
    let mut pairs = if n <= DENSE_EUCS_LIMIT {
        PairStore::Dense(alloc::vec![0.0; n * n.saturating_sub(1) / 2])
    } else {
        PairStore::Sparse(HashMap::new())
    };
    for t in odb.transactions() {
        let rtu = t.rtu(&order);
        for (k, lo) in t.entries.iter().enumerate() {
            for hi in &t.entries[k + 1..] {
                match &mut pairs {
                    PairStore::Dense(v) => v[Eucs::dense_index(n, lo.rank, hi.rank)] += rtu,
                    PairStore::Sparse(m) => *m.entry((lo.rank, hi.rank)).or_insert(0.0) += rtu,
                }
            }
        }
    }
    Eucs { order, pairs }
}

/// Initial scan, processing order and reordered database: everything the
/// search needs before the first list is built.
pub fn prepare(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    filter: bool,
) -> OrderedDatabase {
    let scan = initial_scan(db, table, th, filter);
    let keyed: Vec<(Item, f64)> = scan.surviving.iter().map(|m| (m.item, m.rtwu)).collect();
    let order = compute_processing_order(table, &keyed);
    OrderedDatabase::new(db, table, order)
}

/// Mines every PHUI of `db`.
pub fn mine(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    config: &MiningConfig,
) -> Result<MiningOutcome, MineError> {
    mine_observed(db, table, th, config, |_| {})
}

/// Like [`mine`], calling `observer` with the list of every visited node.
pub fn mine_observed<F>(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    config: &MiningConfig,
    observer: F,
) -> Result<MiningOutcome, MineError>
where
    F: FnMut(&PuList),
{
    th.validate()?;
    let report = validate_database(db, table);
    if !report.is_ok() {
        return Err(MineError::Invalid(report));
    }

    let mut stats = MiningStats::default();
    let odb = prepare(db, table, th, config.s2_initial_filter);
    if odb.order().is_empty() {
        return Ok(MiningOutcome {
            patterns: Vec::new(),
            stats,
        });
    }
    let eucs = config.s6_eucp.then(|| build_eucs(&odb));
    let singles = build_initial_pulists(&odb);

    let mut search = Search {
        bounds: JoinBounds {
            min_util: th.min_util,
            min_expected_support: th.min_expected_support(db.len()),
        },
        config,
        eucs: eucs.as_ref(),
        order: odb.order(),
        stats: &mut stats,
        out: Vec::new(),
        observer,
    };
    search.run(None, &singles)?;
    let mut patterns = core::mem::take(&mut search.out);
    sort_canonical(&mut patterns);
    stats.phuis_found = patterns.len() as u64;
    Ok(MiningOutcome { patterns, stats })
}

struct Search<'a, F> {
    bounds: JoinBounds,
    config: &'a MiningConfig,
    eucs: Option<&'a Eucs>,
    order: &'a ProcessingOrder,
    stats: &'a mut MiningStats,
    out: Vec<MinedPattern>,
    observer: F,
}

impl<F: FnMut(&PuList)> Search<'_, F> {
    fn run(&mut self, prefix: Option<&PuList>, extensions: &[PuList]) -> Result<(), PuListError> {
        let min_util = self.bounds.min_util;
        let min_support = self.bounds.min_expected_support;
        for (k, py) in extensions.iter().enumerate() {
            self.stats.visited_nodes += 1;
            (self.observer)(py);
            let sums = py.sums();
            let support_ok = sums.pro >= min_support;
            if support_ok && sums.iu() >= min_util {
                self.out.push(MinedPattern {
                    pattern: py.pattern().clone(),
                    utility: sums.iu(),
                    expected_support: sums.pro,
                });
            }
            if self.config.s3_probability_bound && !support_ok {
                self.stats.s3_cuts += 1;
                continue;
            }
            if self.config.s4_remaining_utility_bound && sums.extension_bound() < min_util {
                self.stats.s4_cuts += 1;
                continue;
            }

            let y_rank = self.rank(py);
            let mut next = Vec::new();
            for pz in &extensions[k + 1..] {
                if let Some(eucs) = self.eucs {
                    if eucs.by_rank(y_rank, self.rank(pz)) < min_util {
                        self.stats.eucs_skips += 1;
                        continue;
                    }
                }
                self.stats.joins_attempted += 1;
                match construct(prefix, py, pz, self.bounds, self.config.s1_pu_prune)? {
                    Join::Abandoned => self.stats.joins_abandoned += 1,
                    Join::Built(list) if list.is_empty() => {}
                    Join::Built(list) => {
                        if self.config.s5_empty_or_lowpro_skip && list.sums().pro < min_support {
                            self.stats.s5_skips += 1;
                        } else {
                            next.push(list);
                        }
                    }
                }
            }
            if !next.is_empty() {
                self.run(Some(py), &next)?;
            }
        }
        Ok(())
    }

    fn rank(&self, list: &PuList) -> u32 {
        self.order
            .rank(list.last_item())
            .expect("list items come from the processing order")
    }
}

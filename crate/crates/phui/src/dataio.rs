//! Text formats for databases, utility tables, results, stats and item
//! name maps.
//!
//! Database: one transaction per line, `item:quantity:probability` tokens
//! separated by spaces. Utility table: `item:utility` tokens. In both, `#`
//! starts a comment and blank lines are ignored. Results: one pattern per
//! line, `ids #UTIL: u #PROB: p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use phui_core::model::{
    Item, MinedPattern, Pattern, TransactionEntry, UncertainDatabase, UtilityTable,
};
use phui_core::MiningStats;
use serde::Serialize;

/// A parse failure with a 1-based line and column pointing at the token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Whitespace-separated tokens of a line with their 1-based char columns,
/// stopping at a `#` comment.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let content = line.split('#').next().unwrap_or("");
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in content.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((col + 1, byte)),
            (true, Some((c, b))) => {
                out.push((c, &content[b..byte]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((c, b)) = start {
        out.push((c, &content[b..]));
    }
    out
}

fn parse_item(text: &str, line: usize, col: usize) -> Result<Item, ParseError> {
    text.parse::<u32>().map(Item).map_err(|_| {
        ParseError::at(
            line,
            col,
            format!("item id must be a non-negative integer: {text:?}"),
        )
    })
}

pub fn parse_database(text: &str) -> Result<UncertainDatabase, ParseError> {
    let mut transactions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokens(raw);
        if toks.is_empty() {
            continue;
        }
        let mut seen = BTreeSet::new();
        let mut entries = Vec::with_capacity(toks.len());
        for (col, tok) in toks {
            let parts: Vec<&str> = tok.split(':').collect();
            let [item, quantity, probability] = parts[..] else {
                return Err(ParseError::at(
                    line,
                    col,
                    format!("expected item:quantity:probability, got {tok:?}"),
                ));
            };
            let item = parse_item(item, line, col)?;
            let quantity: u32 = quantity.parse().map_err(|_| {
                ParseError::at(
                    line,
                    col,
                    format!("quantity must be an integer: {quantity:?}"),
                )
            })?;
            if quantity < 1 {
                return Err(ParseError::at(line, col, "quantity must be ≥ 1"));
            }
            let probability: f64 = probability.parse().map_err(|_| {
                ParseError::at(
                    line,
                    col,
                    format!("probability must be a number: {probability:?}"),
                )
            })?;
            if !(probability > 0.0 && probability <= 1.0) {
                return Err(ParseError::at(line, col, "probability must be in (0,1]"));
            }
            if !seen.insert(item) {
                return Err(ParseError::at(line, col, format!("duplicate item {item}")));
            }
            entries.push(TransactionEntry::new(item, quantity, probability));
        }
        transactions.push(entries);
    }
    Ok(UncertainDatabase::from_entries(transactions))
}

pub fn parse_ptable(text: &str) -> Result<UtilityTable, ParseError> {
    let mut table = UtilityTable::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        for (col, tok) in tokens(raw) {
            let Some((item, utility)) = tok.split_once(':') else {
                return Err(ParseError::at(
                    line,
                    col,
                    format!("expected item:utility, got {tok:?}"),
                ));
            };
            let item = parse_item(item, line, col)?;
            let utility: f64 = utility
                .parse()
                .ok()
                .filter(|u: &f64| u.is_finite())
                .ok_or_else(|| {
                    ParseError::at(
                        line,
                        col,
                        format!("utility must be a finite number: {utility:?}"),
                    )
                })?;
            if table.insert(item, utility).is_some() {
                return Err(ParseError::at(line, col, format!("duplicate item {item}")));
            }
        }
    }
    Ok(table)
}

/// One line per transaction, entries in ascending item id. Probabilities use
/// the shortest representation that parses back to the same value.
pub fn serialize_database(db: &UncertainDatabase) -> String {
    let mut out = String::new();
    for t in db.transactions() {
        for (k, e) in t.entries().iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            write!(out, "{}:{}:{}", e.item, e.quantity, e.probability).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn serialize_ptable(table: &UtilityTable) -> String {
    let mut out = String::new();
    for (item, utility) in table.iter() {
        writeln!(out, "{item}:{utility}").unwrap();
    }
    out
}

/// Decimal notation with at most six fractional digits, trailing zeros
/// trimmed.
pub fn format_number(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        &s
    };
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn write_result_line(out: &mut String, m: &MinedPattern, label: &dyn Fn(Item) -> String) {
    for (k, &i) in m.pattern.items().iter().enumerate() {
        if k > 0 {
            out.push(' ');
        }
        out.push_str(&label(i));
    }
    writeln!(
        out,
        " #UTIL: {} #PROB: {}",
        format_number(m.utility),
        format_number(m.expected_support)
    )
    .unwrap();
}

fn sorted(patterns: &[MinedPattern]) -> Vec<&MinedPattern> {
    let mut refs: Vec<&MinedPattern> = patterns.iter().collect();
    refs.sort_by(|a, b| a.pattern.canonical_cmp(&b.pattern));
    refs
}

/// Result lines sorted by pattern length, then item ids.
pub fn serialize_results(patterns: &[MinedPattern]) -> String {
    let mut out = String::new();
    for m in sorted(patterns) {
        write_result_line(&mut out, m, &|i| i.to_string());
    }
    out
}

/// Like [`serialize_results`] with item ids replaced by names where known.
pub fn serialize_results_named(patterns: &[MinedPattern], names: &NameMap) -> String {
    let mut out = String::new();
    for m in sorted(patterns) {
        write_result_line(&mut out, m, &|i| {
            names.name(i).map_or_else(|| i.to_string(), str::to_owned)
        });
    }
    out
}

/// Parses numeric result lines back. Values carry at most six fractional
/// digits, so this is for comparing files, not for exact measures.
pub fn parse_results(text: &str) -> Result<Vec<MinedPattern>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let bad = |col: usize, msg: &str| ParseError::at(line, col, msg);
        let (items, rest) = raw
            .split_once(" #UTIL: ")
            .ok_or_else(|| bad(1, "missing #UTIL:"))?;
        let (util, prob) = rest
            .split_once(" #PROB: ")
            .ok_or_else(|| bad(items.len() + 1, "missing #PROB:"))?;
        let ids = tokens(items)
            .into_iter()
            .map(|(col, t)| parse_item(t, line, col))
            .collect::<Result<Vec<_>, _>>()?;
        let pattern = Pattern::new(ids).map_err(|e| bad(1, &e.to_string()))?;
        let utility = util
            .trim()
            .parse()
            .map_err(|_| bad(items.len() + 9, "bad utility"))?;
        let expected_support = prob
            .trim()
            .parse()
            .map_err(|_| bad(raw.len() - prob.len() + 1, "bad probability"))?;
        out.push(MinedPattern {
            pattern,
            utility,
            expected_support,
        });
    }
    Ok(out)
}

/// Bidirectional `name ↔ id` mapping read from `name id` lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NameMap {
    by_name: BTreeMap<String, u32>,
    by_id: BTreeMap<u32, String>,
}

impl NameMap {
    pub fn insert(&mut self, name: &str, id: u32) -> bool {
        if self.by_name.contains_key(name) || self.by_id.contains_key(&id) {
            return false;
        }
        self.by_name.insert(name.to_owned(), id);
        self.by_id.insert(id, name.to_owned());
        true
    }

    pub fn id(&self, name: &str) -> Option<Item> {
        self.by_name.get(name).copied().map(Item)
    }

    pub fn name(&self, item: Item) -> Option<&str> {
        self.by_id.get(&item.0).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

pub fn parse_name_map(text: &str) -> Result<NameMap, ParseError> {
    let mut map = NameMap::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokens(raw);
        match toks[..] {
            [] => continue,
            [(_, name), (col, id)] => {
                let id = parse_item(id, line, col)?;
                if !map.insert(name, id.0) {
                    return Err(ParseError::at(
                        line,
                        1,
                        format!("duplicate mapping for {name:?} or {id}"),
                    ));
                }
            }
            _ => return Err(ParseError::at(line, 1, "expected `name id`")),
        }
    }
    Ok(map)
}

pub fn serialize_name_map(map: &NameMap) -> String {
    let mut out = String::new();
    for (id, name) in &map.by_id {
        writeln!(out, "{name} {id}").unwrap();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsFormat {
    Csv,
    Json,
}

pub const STATS_CSV_HEADER: &str = "preset,min_util,min_pro,visited_nodes,joins_attempted,joins_abandoned,eucs_skips,phuis_found,elapsed_ms";

/// One mining run as recorded in stats files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRecord {
    pub preset: String,
    pub min_util: f64,
    pub min_pro: f64,
    pub visited_nodes: u64,
    pub joins_attempted: u64,
    pub joins_abandoned: u64,
    pub eucs_skips: u64,
    pub s3_cuts: u64,
    pub s4_cuts: u64,
    pub s5_skips: u64,
    pub phuis_found: u64,
    pub elapsed_ms: f64,
    pub peak_alloc: Option<u64>,
}

impl StatsRecord {
    pub fn new(
        preset: impl fmt::Display,
        min_util: f64,
        min_pro: f64,
        stats: &MiningStats,
    ) -> Self {
        StatsRecord {
            preset: preset.to_string(),
            min_util,
            min_pro,
            visited_nodes: stats.visited_nodes,
            joins_attempted: stats.joins_attempted,
            joins_abandoned: stats.joins_abandoned,
            eucs_skips: stats.eucs_skips,
            s3_cuts: stats.s3_cuts,
            s4_cuts: stats.s4_cuts,
            s5_skips: stats.s5_skips,
            phuis_found: stats.phuis_found,
            elapsed_ms: stats.elapsed.as_secs_f64() * 1e3,
            peak_alloc: stats.peak_alloc,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.preset,
            format_number(self.min_util),
            format_number(self.min_pro),
            self.visited_nodes,
            self.joins_attempted,
            self.joins_abandoned,
            self.eucs_skips,
            self.phuis_found,
            format_number(self.elapsed_ms)
        )
    }
}

/// CSV (one header, one row per record) or a JSON array.
pub fn serialize_stats(records: &[StatsRecord], format: StatsFormat) -> String {
    match format {
        StatsFormat::Csv => {
            let mut out = String::from(STATS_CSV_HEADER);
            out.push('\n');
            for r in records {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
        StatsFormat::Json => {
            let mut out = serde_json::to_string_pretty(records).expect("stats serialize");
            out.push('\n');
            out
        }
    }
}

/// Text to append to an existing CSV stats file: the header is only emitted
/// when `existing` is empty.
pub fn append_stats_csv(existing: &str, record: &StatsRecord) -> String {
    let mut out = String::new();
    if existing.trim().is_empty() {
        out.push_str(STATS_CSV_HEADER);
        out.push('\n');
    }
    out.push_str(&record.csv_row());
    out.push('\n');
    out
}

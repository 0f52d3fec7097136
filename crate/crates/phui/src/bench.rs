//! Benchmark sweeps over thresholds, presets and database prefixes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use phui_core::model::{Thresholds, UncertainDatabase, UtilityTable};
use phui_core::{MineError, MiningConfig, MiningStats, Preset};

use crate::dataio::{format_number, StatsRecord, STATS_CSV_HEADER};
use crate::run::timed_mine;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchPlan {
    pub min_utils: Vec<f64>,
    pub min_pros: Vec<f64>,
    pub presets: Vec<Preset>,
    /// Runs per cell; the median elapsed time is reported.
    pub repeats: usize,
    /// Database prefix lengths for a scalability sweep. Empty means the
    /// whole database only.
    pub prefix_sizes: Vec<usize>,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            min_utils: vec![0.0],
            min_pros: vec![0.0],
            presets: Preset::ABLATION.to_vec(),
            repeats: 3,
            prefix_sizes: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum BenchError {
    #[error("benchmark plan needs at least one {0}")]
    Empty(&'static str),
    #[error("prefix size {size} exceeds the database's {len} transactions")]
    PrefixTooLarge { size: usize, len: usize },
    #[error(transparent)]
    Mine(#[from] MineError),
}

impl BenchPlan {
    pub fn validate(&self, db_len: usize) -> Result<(), BenchError> {
        if self.min_utils.is_empty() {
            return Err(BenchError::Empty("min-util value"));
        }
        if self.min_pros.is_empty() {
            return Err(BenchError::Empty("min-pro value"));
        }
        if self.presets.is_empty() {
            return Err(BenchError::Empty("preset"));
        }
        if self.repeats == 0 {
            return Err(BenchError::Empty("repeat"));
        }
        for &pro in &self.min_pros {
            Thresholds::new(0.0, pro).map_err(MineError::from)?;
        }
        if let Some(&size) = self.prefix_sizes.iter().find(|&&s| s > db_len || s == 0) {
            return Err(BenchError::PrefixTooLarge { size, len: db_len });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub transactions: usize,
    pub record: StatsRecord,
}

/// Middle value of the sorted durations (the lower one for even counts).
pub fn median(durations: &mut [Duration]) -> Duration {
    durations.sort_unstable();
    durations
        .get((durations.len().saturating_sub(1)) / 2)
        .copied()
        .unwrap_or_default()
}

/// Runs one cell `repeats` times and returns its stats with the median
/// elapsed time.
pub fn measure(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    preset: Preset,
    repeats: usize,
) -> Result<MiningStats, MineError> {
    let config = MiningConfig::from_preset(preset);
    let mut times = Vec::with_capacity(repeats);
    let mut stats = MiningStats::default();
    for _ in 0..repeats.max(1) {
        stats = timed_mine(db, table, th, &config)?.stats;
        times.push(stats.elapsed);
    }
    stats.elapsed = median(&mut times);
    Ok(stats)
}

fn grid(
    db: &UncertainDatabase,
    table: &UtilityTable,
    plan: &BenchPlan,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &min_util in &plan.min_utils {
        for &min_pro in &plan.min_pros {
            let th = Thresholds::new(min_util, min_pro).map_err(MineError::from)?;
            for &preset in &plan.presets {
                let stats = measure(db, table, &th, preset, plan.repeats)?;
                rows.push(BenchRow {
                    transactions: db.len(),
                    record: StatsRecord::new(preset, min_util, min_pro, &stats),
                });
            }
        }
    }
    Ok(rows)
}

/// Every threshold pair × preset on the whole database, or on each prefix
/// when the plan lists prefix sizes.
pub fn run(
    db: &UncertainDatabase,
    table: &UtilityTable,
    plan: &BenchPlan,
) -> Result<Vec<BenchRow>, BenchError> {
    plan.validate(db.len())?;
    if plan.prefix_sizes.is_empty() {
        return grid(db, table, plan);
    }
    let mut sizes = plan.prefix_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut rows = Vec::new();
    for size in sizes {
        rows.extend(grid(&db.prefix(size), table, plan)?);
    }
    Ok(rows)
}

pub fn grid_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{STATS_CSV_HEADER}\n");
    for r in rows {
        writeln!(out, "{}", r.record.csv_row()).unwrap();
    }
    out
}

pub fn scalability_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("transactions,{STATS_CSV_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{}", r.transactions, r.record.csv_row()).unwrap();
    }
    out
}

type ThresholdKey = (String, String);

fn threshold_key(r: &StatsRecord) -> ThresholdKey {
    (format_number(r.min_util), format_number(r.min_pro))
}

/// Visited nodes pivoted to presets × threshold pairs, one table per
/// database size, with the PHUI count as the last row.
pub fn markdown_table(rows: &[BenchRow]) -> String {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.transactions).collect();
    sizes.dedup();
    let mut out = String::new();
    for (k, &size) in sizes.iter().enumerate() {
        let part: Vec<&BenchRow> = rows.iter().filter(|r| r.transactions == size).collect();
        let mut columns: Vec<ThresholdKey> = Vec::new();
        let mut presets: Vec<String> = Vec::new();
        let mut cells: BTreeMap<(String, ThresholdKey), u64> = BTreeMap::new();
        let mut found: BTreeMap<ThresholdKey, u64> = BTreeMap::new();
        for r in &part {
            let key = threshold_key(&r.record);
            if !columns.contains(&key) {
                columns.push(key.clone());
            }
            if !presets.contains(&r.record.preset) {
                presets.push(r.record.preset.clone());
            }
            cells.insert(
                (r.record.preset.clone(), key.clone()),
                r.record.visited_nodes,
            );
            found.insert(key, r.record.phuis_found);
        }
        if k > 0 {
            out.push('\n');
        }
        writeln!(out, "Visited nodes, {size} transactions\n").unwrap();
        out.push_str("| preset |");
        for (u, p) in &columns {
            write!(out, " minUtil={u}, minPro={p} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(columns.len()));
        out.push('\n');
        for preset in &presets {
            write!(out, "| {preset} |").unwrap();
            for c in &columns {
                match cells.get(&(preset.clone(), c.clone())) {
                    Some(v) => write!(out, " {v} |").unwrap(),
                    None => out.push_str(" |"),
                }
            }
            out.push('\n');
        }
        out.push_str("| PHUIs |");
        for c in &columns {
            write!(out, " {} |", found[c]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Cells where a preset with more strategies visited more nodes than one
/// with fewer, or visited fewer nodes than there are PHUIs.
pub fn preset_violations(rows: &[BenchRow]) -> Vec<String> {
    let mut groups: BTreeMap<(usize, ThresholdKey), Vec<(Preset, &StatsRecord)>> = BTreeMap::new();
    for r in rows {
        if let Ok(p) = r.record.preset.parse::<Preset>() {
            groups
                .entry((r.transactions, threshold_key(&r.record)))
                .or_default()
                .push((p, &r.record));
        }
    }
    let mut out = Vec::new();
    for ((size, (u, p)), mut cell) in groups {
        cell.retain(|(preset, _)| Preset::ABLATION.contains(preset));
        cell.sort_by_key(|(preset, _)| Preset::ABLATION.iter().position(|x| x == preset));
        for w in cell.windows(2) {
            let ((pa, a), (pb, b)) = (w[0], w[1]);
            if b.visited_nodes > a.visited_nodes {
                out.push(format!(
                    "{size} transactions, minUtil={u}, minPro={p}: {pb} visited {} > {pa} visited {}",
                    b.visited_nodes, a.visited_nodes
                ));
            }
        }
        for (preset, r) in &cell {
            if r.visited_nodes < r.phuis_found {
                out.push(format!(
                    "{size} transactions, minUtil={u}, minPro={p}: {preset} visited {} < {} PHUIs",
                    r.visited_nodes, r.phuis_found
                ));
            }
        }
    }
    out
}

/// Presets whose elapsed time dropped as the database prefix grew.
pub fn elapsed_trend_violations(rows: &[BenchRow]) -> Vec<String> {
    let mut series: BTreeMap<(String, ThresholdKey), Vec<(usize, f64)>> = BTreeMap::new();
    for r in rows {
        series
            .entry((r.record.preset.clone(), threshold_key(&r.record)))
            .or_default()
            .push((r.transactions, r.record.elapsed_ms));
    }
    let mut out = Vec::new();
    for ((preset, (u, p)), mut points) in series {
        points.sort_by_key(|&(n, _)| n);
        for w in points.windows(2) {
            if w[1].1 < w[0].1 {
                out.push(format!(
                    "{preset}, minUtil={u}, minPro={p}: {} ms at {} transactions < {} ms at {}",
                    format_number(w[1].1),
                    w[1].0,
                    format_number(w[0].1),
                    w[0].0
                ));
            }
        }
    }
    out
}

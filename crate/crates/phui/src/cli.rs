//! The `phui` command-line interface.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 bad arguments,
//! 3 verification divergence, 4 benchmark monotonicity violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use phui_core::datagen::{generate, GenParams, ProbabilityMode};
use phui_core::model::{validate_database, Thresholds, UncertainDatabase, UtilityTable};
use phui_core::oracle::brute_force_mine;
use phui_core::{MineError, MiningConfig, Preset};

use crate::bench::{self, BenchPlan};
use crate::dataio::{
    self, append_stats_csv, parse_database, parse_name_map, parse_ptable, serialize_results,
    serialize_results_named, ParseError, StatsFormat, StatsRecord,
};
use crate::run::timed_mine;
use crate::verify::{self, verify_case, verify_fuzz};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_NOT_MONOTONE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "phui",
    version,
    about = "Potential high-utility itemset mining with negative utilities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine all potential high-utility itemsets.
    Mine(MineArgs),
    /// Mine by brute-force enumeration (small item universes only).
    Oracle(OracleArgs),
    /// Compare the miner under every preset with the brute-force oracle.
    Verify(VerifyArgs),
    /// Generate a synthetic database and utility table.
    Gen(GenArgs),
    /// Time presets across thresholds or database prefixes.
    Bench(BenchArgs),
}

fn parse_min_pro(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("min-pro must be in [0,1], got {s}")),
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a finite number, got {s}"))
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse()
        .map_err(|e: phui_core::miner::UnknownPreset| e.to_string())
}

fn parse_strategy(s: &str) -> Result<u8, String> {
    let digits = s.trim().trim_start_matches(['s', 'S']);
    match digits.parse::<u8>() {
        Ok(n @ 1..=6) => Ok(n),
        _ => Err(format!("strategies are s1 to s6, got {s}")),
    }
}

/// Counts such as `20000`, `20k` or `1m`.
fn parse_count(s: &str) -> Result<usize, String> {
    let lower = s.trim().to_ascii_lowercase();
    let (digits, scale) = match lower.strip_suffix('k') {
        Some(d) => (d, 1_000),
        None => match lower.strip_suffix('m') {
            Some(d) => (d, 1_000_000),
            None => (lower.as_str(), 1),
        },
    };
    digits
        .parse::<usize>()
        .ok()
        .and_then(|n| n.checked_mul(scale))
        .ok_or_else(|| format!("expected a count such as 20000 or 20k, got {s}"))
}

#[derive(Debug, Args)]
struct Inputs {
    /// Database file: one transaction per line, `item:quantity:probability` tokens.
    #[arg(long)]
    db: PathBuf,
    /// Utility table file: `item:utility` tokens.
    #[arg(long)]
    ptable: PathBuf,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Minimum utility (may be negative).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_finite)]
    min_util: f64,
    /// Minimum expected support as a fraction of the database size.
    #[arg(long, value_parser = parse_min_pro)]
    min_pro: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatsFormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct MineArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Strategy preset: P12, P123, P1234, ALL or NONE.
    #[arg(long, default_value = "ALL", value_parser = parse_preset, conflicts_with = "strategies")]
    preset: Preset,
    /// Explicit strategy set, e.g. `s1,s3`.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Option<Vec<u8>>,
    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append run statistics to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Statistics format; defaults to JSON for `.json` files, CSV otherwise.
    #[arg(long, value_enum)]
    stats_format: Option<StatsFormatArg>,
    /// `name id` sidecar used to print item names in results.
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Refuse item universes larger than this.
    #[arg(long, default_value_t = phui_core::oracle::DEFAULT_MAX_ITEMS)]
    max_items: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, requires_all = ["ptable", "min_util", "min_pro"], conflicts_with = "fuzz")]
    db: Option<PathBuf>,
    #[arg(long, requires = "db")]
    ptable: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_finite, requires = "db")]
    min_util: Option<f64>,
    #[arg(long, value_parser = parse_min_pro, requires = "db")]
    min_pro: Option<f64>,
    /// Number of generated cases to check.
    #[arg(long, required_unless_present = "db")]
    fuzz: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Item universe bound for generated cases and for the oracle.
    #[arg(long, default_value_t = 10)]
    max_items: usize,
    /// Transaction count bound for generated cases.
    #[arg(long, default_value_t = 24)]
    max_transactions: usize,
    /// Drop one pattern from every miner result, to check that divergences
    /// are reported.
    #[arg(long)]
    inject_fault: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_count)]
    transactions: usize,
    #[arg(long, value_parser = parse_count)]
    items: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of items with a negative unit utility.
    #[arg(long, default_value_t = 0.2)]
    negative_fraction: f64,
    #[arg(long, default_value_t = 10.0)]
    avg_len: f64,
    #[arg(long, default_value_t = 30)]
    max_len: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1000.0)]
    utility_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1000.0)]
    utility_max: f64,
    /// Log-normal location of utility magnitudes.
    #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
    mu: f64,
    /// Log-normal scale of utility magnitudes.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 5)]
    max_quantity: u32,
    /// Draw one probability per item instead of per occurrence.
    #[arg(long)]
    per_item_probability: bool,
    /// Restrict probabilities to multiples of 1/N.
    #[arg(long)]
    probability_grid: Option<u32>,
    #[arg(long)]
    out_db: PathBuf,
    #[arg(long)]
    out_ptable: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Comma-separated minimum utilities.
    #[arg(long, required = true, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_finite)]
    min_util: Vec<f64>,
    /// Comma-separated minimum expected-support fractions.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_min_pro)]
    min_pro: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_preset, default_value = "P12,P123,P1234,ALL")]
    presets: Vec<Preset>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Database prefix sizes for a scalability run, e.g. `20k,40k`.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    prefix_sizes: Vec<usize>,
    /// CSV output; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a markdown table of visited nodes.
    #[arg(long)]
    markdown: Option<PathBuf>,
    /// Fail when stronger presets visit more nodes than weaker ones or, in
    /// prefix mode, when elapsed time drops as the prefix grows.
    #[arg(long)]
    assert_monotone: bool,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

type CliResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ParseError) -> Failure {
    Failure::input(format!(
        "{}:{}:{}: {}",
        path.display(),
        e.line,
        e.column,
        e.message
    ))
}

fn load(inputs: &Inputs) -> Result<(UncertainDatabase, UtilityTable), Failure> {
    let db = parse_database(&read(&inputs.db)?).map_err(|e| located(&inputs.db, e))?;
    let table = parse_ptable(&read(&inputs.ptable)?).map_err(|e| located(&inputs.ptable, e))?;
    let report = validate_database(&db, &table);
    if !report.is_ok() {
        return Err(Failure::input(format!("{}: {report}", inputs.db.display())));
    }
    Ok((db, table))
}

fn thresholds(args: &ThresholdArgs) -> Result<Thresholds, Failure> {
    Thresholds::new(args.min_util, args.min_pro).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })
}

fn mine_failure(e: MineError) -> Failure {
    match e {
        MineError::Threshold(t) => Failure {
            code: EXIT_USAGE,
            message: t.to_string(),
        },
        other => Failure::input(other.to_string()),
    }
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::input(format!("stdout: {e}"))),
    }
}

fn append_stats(path: &Path, format: StatsFormat, record: StatsRecord) -> CliResult {
    let existing = if path.exists() {
        read(path)?
    } else {
        String::new()
    };
    let text = match format {
        StatsFormat::Csv => existing.clone() + &append_stats_csv(&existing, &record),
        StatsFormat::Json => {
            let mut all: Vec<serde_json::Value> = if existing.trim().is_empty() {
                Vec::new()
            } else {
                serde_json::from_str(&existing).map_err(|e| {
                    Failure::input(format!("{}: not a JSON stats array: {e}", path.display()))
                })?
            };
            all.push(serde_json::to_value(&record).expect("stats serialize"));
            serde_json::to_string_pretty(&all).expect("stats serialize") + "\n"
        }
    };
    write_file(path, &text)
}

fn cmd_mine(args: MineArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let th = thresholds(&args.thresholds)?;
    let names = match &args.names {
        Some(p) => Some(parse_name_map(&read(p)?).map_err(|e| located(p, e))?),
        None => None,
    };
    let (db, table) = load(&args.inputs)?;
    let config = match &args.strategies {
        Some(s) => MiningConfig::from_strategies(s).expect("strategies validated by the parser"),
        None => MiningConfig::from_preset(args.preset),
    };
    let outcome = timed_mine(&db, &table, &th, &config).map_err(mine_failure)?;
    let text = match &names {
        Some(n) => serialize_results_named(&outcome.patterns, n),
        None => serialize_results(&outcome.patterns),
    };
    emit(out, args.out.as_deref(), &text)?;
    if let Some(path) = &args.stats {
        let format = match args.stats_format {
            Some(StatsFormatArg::Json) => StatsFormat::Json,
            Some(StatsFormatArg::Csv) => StatsFormat::Csv,
            None if path.extension().is_some_and(|e| e == "json") => StatsFormat::Json,
            None => StatsFormat::Csv,
        };
        let record = StatsRecord::new(config, th.min_util, th.min_pro, &outcome.stats);
        append_stats(path, format, record)?;
    }
    let s = &outcome.stats;
    let _ = writeln!(
        err,
        "{}: {} PHUIs, {} nodes visited, {} ms",
        config,
        s.phuis_found,
        s.visited_nodes,
        dataio::format_number(s.elapsed.as_secs_f64() * 1e3)
    );
    Ok(())
}

fn cmd_oracle(args: OracleArgs, out: &mut dyn Write) -> CliResult {
    let th = thresholds(&args.thresholds)?;
    let (db, table) = load(&args.inputs)?;
    let found = brute_force_mine(&db, &table, &th, args.max_items)
        .map_err(|e| Failure::input(e.to_string()))?;
    emit(out, args.out.as_deref(), &serialize_results(&found))
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> CliResult {
    let miner = if args.inject_fault {
        verify::faulty_miner()
    } else {
        verify::library_miner()
    };
    let diverged = |message: String| Failure {
        code: EXIT_DIVERGED,
        message: format!("DIVERGENCE {message}"),
    };
    if let Some(db_path) = args.db {
        let inputs = Inputs {
            db: db_path,
            ptable: args.ptable.expect("required with --db"),
        };
        let th = thresholds(&ThresholdArgs {
            min_util: args.min_util.expect("required with --db"),
            min_pro: args.min_pro.expect("required with --db"),
        })?;
        let (db, table) = load(&inputs)?;
        return match verify_case(&db, &table, &th, args.max_items, miner) {
            Ok(n) => {
                let _ = writeln!(out, "OK: {n} PHUIs, all presets agree with the oracle");
                Ok(())
            }
            Err(verify::VerifyError::Diverged { config, mismatch }) => {
                Err(diverged(format!("{config}: {mismatch}")))
            }
            Err(e) => Err(Failure::input(e.to_string())),
        };
    }
    let cases = args.fuzz.expect("required without --db");
    match verify_fuzz(
        cases,
        args.seed,
        args.max_items,
        args.max_transactions,
        miner,
    ) {
        Ok(s) => {
            let _ = writeln!(
                out,
                "OK: {} cases, {} PHUIs, all presets agree with the oracle",
                s.cases, s.patterns
            );
            Ok(())
        }
        Err(f) => match f.error {
            verify::VerifyError::Diverged { .. } => Err(diverged(f.to_string())),
            _ => Err(Failure::input(f.to_string())),
        },
    }
}

fn cmd_gen(args: GenArgs, out: &mut dyn Write) -> CliResult {
    let params = GenParams {
        n_transactions: args.transactions,
        n_items: args.items,
        avg_tx_len: args.avg_len,
        max_tx_len: args.max_len,
        utility_range: (args.utility_min, args.utility_max),
        lognormal_mu: args.mu,
        lognormal_sigma: args.sigma,
        quantity_max: args.max_quantity,
        negative_fraction: args.negative_fraction,
        probability_mode: if args.per_item_probability {
            ProbabilityMode::PerItem
        } else {
            ProbabilityMode::PerOccurrence
        },
        probability_grid: args.probability_grid,
        seed: args.seed,
    };
    let (db, table) = generate(&params).map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    })?;
    write_file(&args.out_db, &dataio::serialize_database(&db))?;
    write_file(&args.out_ptable, &dataio::serialize_ptable(&table))?;
    let entries: usize = db.transactions().iter().map(|t| t.len()).sum();
    let _ = writeln!(
        out,
        "{} transactions, {} items ({} negative), average length {:.2}, seed {}",
        db.len(),
        table.len(),
        params.negative_count(),
        entries as f64 / db.len().max(1) as f64,
        params.seed
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let (db, table) = load(&args.inputs)?;
    let plan = BenchPlan {
        min_utils: args.min_util,
        min_pros: args.min_pro,
        presets: args.presets,
        repeats: args.repeats,
        prefix_sizes: args.prefix_sizes,
    };
    let rows = bench::run(&db, &table, &plan).map_err(|e| match e {
        bench::BenchError::Mine(m) => mine_failure(m),
        other => Failure {
            code: EXIT_USAGE,
            message: other.to_string(),
        },
    })?;
    let csv = if plan.prefix_sizes.is_empty() {
        bench::grid_csv(&rows)
    } else {
        bench::scalability_csv(&rows)
    };
    emit(out, args.out.as_deref(), &csv)?;
    if let Some(p) = &args.markdown {
        write_file(p, &bench::markdown_table(&rows))?;
    }
    let mut violations = bench::preset_violations(&rows);
    if !plan.prefix_sizes.is_empty() {
        violations.extend(bench::elapsed_trend_violations(&rows));
    }
    for v in &violations {
        let _ = writeln!(err, "not monotone: {v}");
    }
    if args.assert_monotone && !violations.is_empty() {
        return Err(Failure {
            code: EXIT_NOT_MONOTONE,
            message: format!("{} monotonicity violation(s)", violations.len()),
        });
    }
    Ok(())
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Mine(a) => cmd_mine(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_parsers() {
        assert_eq!(parse_count("20k"), Ok(20_000));
        assert_eq!(parse_count("1M"), Ok(1_000_000));
        assert_eq!(parse_count("150"), Ok(150));
        assert!(parse_count("k").is_err());
        assert_eq!(parse_strategy("s3"), Ok(3));
        assert_eq!(parse_strategy("6"), Ok(6));
        assert!(parse_strategy("s7").is_err());
        assert_eq!(parse_min_pro("0.25"), Ok(0.25));
        assert!(parse_min_pro("1.5")
            .unwrap_err()
            .contains("min-pro must be in [0,1]"));
        assert!(parse_finite("nan").is_err());
        assert_eq!(parse_preset("p123"), Ok(Preset::P123));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so every line is printed even when
//! output capture is on. Exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use phui::bench::median;
use phui::dataio::{parse_database, parse_ptable, serialize_database, serialize_ptable};
use phui::run::timed_mine;
use phui::verify::{first_mismatch, library_miner, verify_case};
use phui_core::datagen::{generate, GenParams};
use phui_core::fuzz::{fuzz_case, FuzzCase};
use phui_core::measures::{expected_support, redefined_transaction_utility, rtwu};
use phui_core::miner::{mine_observed, prepare};
use phui_core::model::{MinedPattern, Pattern, Thresholds, UncertainDatabase, UtilityTable};
use phui_core::oracle::occurring_patterns;
use phui_core::pulist::{
    build_initial_pulists, construct, lists_match, scan_build, Join, JoinBounds, PuList,
};
use phui_core::sample::{ptable, table1, A, B, C, D, E_};
use phui_core::{mine, MiningConfig, MiningOutcome, Preset};

const FUZZ_CASES: u64 = 500;
const FUZZ_MAX_ITEMS: usize = 12;
const FUZZ_MAX_TX: usize = 30;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn ids(p: &Pattern) -> Vec<u32> {
    p.items().iter().map(|i| i.0).collect()
}

fn pattern_set(ps: &[MinedPattern]) -> BTreeSet<Vec<u32>> {
    ps.iter().map(|m| ids(&m.pattern)).collect()
}

fn run(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
    config: &MiningConfig,
) -> Result<MiningOutcome, String> {
    mine(db, table, th, config).map_err(|e| e.to_string())
}

fn sample_th() -> Thresholds {
    Thresholds::new(20.0, 0.25).unwrap()
}

fn criterion_1() -> Outcome {
    let expected: [(&[u32], f64, f64); 10] = [
        (&[1], 96.0, 2.50),
        (&[2], 40.0, 2.50),
        (&[4], 96.0, 2.40),
        (&[5], 77.0, 3.55),
        (&[1, 2], 102.0, 1.30),
        (&[1, 3], 50.0, 1.51),
        (&[2, 5], 103.0, 2.15),
        (&[3, 5], 35.0, 2.225),
        (&[4, 5], 166.0, 2.22),
        (&[2, 3, 5], 48.0, 1.475),
    ];
    let (db, table, th) = (table1(), ptable(), sample_th());
    let mut times = Vec::new();
    for preset in Preset::EVERY {
        let out = timed_mine(&db, &table, &th, &MiningConfig::from_preset(preset))
            .map_err(|e| e.to_string())?;
        ensure!(
            out.patterns.len() == expected.len(),
            "{preset}: {} PHUIs",
            out.patterns.len()
        );
        for (got, (items, u, p)) in out.patterns.iter().zip(expected) {
            ensure!(
                ids(&got.pattern) == items
                    && got.utility == u
                    && close(got.expected_support, p, 1e-9),
                "{preset}: got {} u={} p={}, expected {items:?} u={u} p={p}",
                got.pattern,
                got.utility,
                got.expected_support
            );
        }
    }
    let config = MiningConfig::default();
    for _ in 0..11 {
        times.push(timed_mine(&db, &table, &th, &config).unwrap().stats.elapsed);
    }
    let t = median(&mut times);
    ensure!(t < Duration::from_millis(1), "median runtime {t:?} >= 1 ms");
    Ok(format!(
        "10 PHUIs exact under all presets, median runtime {t:?}"
    ))
}

fn criterion_2() -> Outcome {
    let (db, table, th) = (table1(), ptable(), sample_th());
    let rtu2 = redefined_transaction_utility(&db.transactions()[1], &table);
    ensure!(rtu2 == 26.0, "RTU(T2) = {rtu2}");
    for (item, want) in [(A, 185.0), (B, 259.0), (C, 202.0), (D, 231.0), (E_, 285.0)] {
        let got = rtwu(&Pattern::singleton(item), &db, &table);
        ensure!(got == want, "RTWU({item}) = {got}, expected {want}");
    }
    let abe = rtwu(&Pattern::new([A, B, E_]).unwrap(), &db, &table);
    ensure!(abe == 161.0, "RTWU({{a,b,e}}) = {abe}");

    let odb = prepare(&db, &table, &th, true);
    let order = odb.order();
    ensure!(
        order.items() == [A, D, B, E_, C],
        "processing order {:?}",
        order.items()
    );

    let lists = build_initial_pulists(&odb);
    let list = |item| lists[order.rank(item).unwrap() as usize].clone();
    let rows = |l: &PuList| -> Vec<(u32, f64, f64, f64, f64)> {
        l.entries()
            .iter()
            .map(|e| (e.tid, e.pro, e.pu, e.nu, e.rpu))
            .collect()
    };
    let matches = |got: &[(u32, f64, f64, f64, f64)], want: &[(u32, f64, f64, f64, f64)]| {
        got.len() == want.len()
            && got.iter().zip(want).all(|(g, w)| {
                g.0 == w.0 && close(g.1, w.1, 1e-9) && g.2 == w.2 && g.3 == w.3 && g.4 == w.4
            })
    };
    let c = list(C);
    let c_want = [
        (2, 0.75, 0.0, -2.0, 0.0),
        (3, 0.70, 0.0, -4.0, 0.0),
        (4, 0.90, 0.0, -2.0, 0.0),
        (5, 0.95, 0.0, -8.0, 0.0),
    ];
    ensure!(matches(&rows(&c), &c_want), "{{c}}.PUL = {:?}", rows(&c));
    let bounds = JoinBounds {
        min_util: th.min_util,
        min_expected_support: th.min_expected_support(db.len()),
    };
    let Ok(Join::Built(ac)) = construct(None, &list(A), &c, bounds, true) else {
        return Err("{a,c} join was not built".into());
    };
    let ac_want = [(3, 0.70, 32.0, -4.0, 0.0), (4, 0.81, 24.0, -2.0, 0.0)];
    ensure!(
        matches(&rows(&ac), &ac_want),
        "{{a,c}}.PUL = {:?}",
        rows(&ac)
    );
    Ok("RTU, RTWU, order and {c}, {a,c} lists match".into())
}

fn criterion_3(cases: &[FuzzCase]) -> Outcome {
    let start = Instant::now();
    let mut patterns = 0;
    let mut boundary = 0;
    for case in cases {
        patterns += verify_case(
            &case.db,
            &case.table,
            &case.thresholds,
            FUZZ_MAX_ITEMS,
            library_miner(),
        )
        .map_err(|e| format!("case seed {}: {e}", case.seed))?;
        let bound = case.thresholds.min_expected_support(case.db.len());
        if bound > 0.0
            && occurring_patterns(&case.db)
                .iter()
                .any(|p| expected_support(p, &case.db) == bound)
        {
            boundary += 1;
        }
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(60), "took {t:?}");
    Ok(format!(
        "{} cases x 5 presets agree ({patterns} PHUIs, {boundary} cases with a pattern exactly on the probability bound) in {:.1} s",
        cases.len(),
        t.as_secs_f64()
    ))
}

/// Visited nodes per ablation preset after checking identical results.
fn preset_chain(
    db: &UncertainDatabase,
    table: &UtilityTable,
    th: &Thresholds,
) -> Result<Vec<u64>, String> {
    let outs: Vec<MiningOutcome> = Preset::ABLATION
        .iter()
        .map(|&p| run(db, table, th, &MiningConfig::from_preset(p)))
        .collect::<Result<_, _>>()?;
    for (p, o) in Preset::ABLATION.iter().zip(&outs).skip(1) {
        if let Some(m) = first_mismatch(&o.patterns, &outs[0].patterns) {
            return Err(format!("{p} vs P12: {m}"));
        }
    }
    let mut chain: Vec<u64> = outs.iter().map(|o| o.stats.visited_nodes).collect();
    chain.push(outs[3].stats.phuis_found);
    if chain.windows(2).any(|w| w[0] < w[1]) {
        return Err(format!("visited P12, P123, P1234, ALL, PHUIs = {chain:?}"));
    }
    Ok(chain)
}

fn criterion_4(cases: &[FuzzCase]) -> Outcome {
    for case in cases {
        preset_chain(&case.db, &case.table, &case.thresholds)
            .map_err(|e| format!("case seed {}: {e}", case.seed))?;
    }
    let params = GenParams {
        n_transactions: 10_000,
        n_items: 50,
        avg_tx_len: 8.0,
        max_tx_len: 20,
        seed: 11,
        ..GenParams::default()
    };
    let (db, table) = generate(&params).unwrap();
    let mut chains = Vec::new();
    for min_util in [200_000.0, 500_000.0, 1_000_000.0] {
        let th = Thresholds::new(min_util, 0.001).unwrap();
        let chain =
            preset_chain(&db, &table, &th).map_err(|e| format!("10k, minUtil {min_util}: {e}"))?;
        chains.push(chain);
    }
    Ok(format!(
        "{} fuzz cases and 10k dataset; 10k chains {chains:?}",
        cases.len()
    ))
}

fn criterion_5(cases: &[FuzzCase]) -> Outcome {
    let config = MiningConfig::default();
    let mut pairs = 0;
    for case in cases {
        let loose = case.thresholds;
        let base = pattern_set(&run(&case.db, &case.table, &loose, &config)?.patterns);
        for (du, dp) in [(0.0, 0.05), (10.0, 0.0), (25.0, 0.1), (1.0, 0.3)] {
            let strict =
                Thresholds::new(loose.min_util + du, (loose.min_pro + dp).min(1.0)).unwrap();
            let got = pattern_set(&run(&case.db, &case.table, &strict, &config)?.patterns);
            ensure!(
                got.is_subset(&base),
                "case seed {}: {strict:?} adds patterns",
                case.seed
            );
            pairs += 1;
        }
    }
    Ok(format!("{pairs} nested threshold pairs"))
}

fn criterion_6(cases: &[FuzzCase]) -> Outcome {
    let configs = [
        MiningConfig::from_preset(Preset::None),
        MiningConfig::from_strategies(&[2, 3, 4, 5, 6]).unwrap(),
    ];
    let mut checked = 0;
    for case in cases {
        for config in &configs {
            let odb = prepare(
                &case.db,
                &case.table,
                &case.thresholds,
                config.s2_initial_filter,
            );
            let mut seen: Vec<PuList> = Vec::new();
            mine_observed(
                &case.db,
                &case.table,
                &case.thresholds,
                config,
                |l: &PuList| seen.push(l.clone()),
            )
            .map_err(|e| e.to_string())?;
            for list in &seen {
                let scanned = scan_build(list.pattern(), &odb).ok_or_else(|| {
                    format!(
                        "case seed {}: {} has no scan list",
                        case.seed,
                        list.pattern()
                    )
                })?;
                ensure!(
                    lists_match(list, &scanned, 1e-9),
                    "case seed {} ({config}): {} join-built list differs from scan",
                    case.seed,
                    list.pattern()
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} join-built lists equal their scans"))
}

fn criterion_7() -> Outcome {
    const PREFIXES: [usize; 5] = [20_000, 40_000, 60_000, 80_000, 100_000];
    const REPEATS: usize = 5;
    let start = Instant::now();
    let params = GenParams {
        n_transactions: 100_000,
        n_items: 50,
        avg_tx_len: 8.0,
        max_tx_len: 20,
        seed: 7,
        ..GenParams::default()
    };
    let (db, table) = generate(&params).unwrap();
    let th = Thresholds::new(13_000_000.0, 0.0).unwrap();
    let prefixes: Vec<UncertainDatabase> = PREFIXES.iter().map(|&k| db.prefix(k)).collect();
    let presets = Preset::ABLATION;
    let mut samples = vec![vec![Vec::new(); PREFIXES.len()]; presets.len()];
    for _ in 0..REPEATS {
        for (k, prefix) in prefixes.iter().enumerate() {
            for (j, &preset) in presets.iter().enumerate() {
                let out = timed_mine(prefix, &table, &th, &MiningConfig::from_preset(preset))
                    .map_err(|e| e.to_string())?;
                samples[j][k].push(out.stats.elapsed);
            }
        }
    }
    let medians: Vec<Vec<Duration>> = samples
        .iter_mut()
        .map(|row| row.iter_mut().map(|s| median(s)).collect())
        .collect();
    let ms = |d: &Duration| format!("{:.0}", d.as_secs_f64() * 1e3);
    let table_text: Vec<String> = presets
        .iter()
        .zip(&medians)
        .map(|(p, row)| {
            format!(
                "{p} [{}] ms",
                row.iter().map(ms).collect::<Vec<_>>().join(", ")
            )
        })
        .collect();
    for (p, row) in presets.iter().zip(&medians) {
        ensure!(
            row.windows(2).all(|w| w[0] <= w[1]),
            "{p} not non-decreasing: {}",
            table_text.join("; ")
        );
    }
    let (p12, all) = (medians[0][4], medians[3][4]);
    ensure!(all <= p12, "ALL {all:?} > P12 {p12:?} on 100k");
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(300), "took {t:?}");
    Ok(format!(
        "{}; total {:.0} s",
        table_text.join("; "),
        t.as_secs_f64()
    ))
}

fn criterion_8(cases: &[FuzzCase]) -> Outcome {
    for case in cases {
        let db_text = serialize_database(&case.db);
        let db = parse_database(&db_text).map_err(|e| format!("case seed {}: {e}", case.seed))?;
        ensure!(
            db == case.db,
            "case seed {}: database changed on round trip",
            case.seed
        );
        ensure!(
            serialize_database(&db) == db_text,
            "case seed {}: database text changed",
            case.seed
        );
        let pt_text = serialize_ptable(&case.table);
        let table = parse_ptable(&pt_text).map_err(|e| format!("case seed {}: {e}", case.seed))?;
        ensure!(
            table == case.table,
            "case seed {}: table changed on round trip",
            case.seed
        );
        ensure!(
            serialize_ptable(&table) == pt_text,
            "case seed {}: table text changed",
            case.seed
        );
    }
    Ok(format!("{} databases and tables", cases.len()))
}

fn main() {
    let cases: Vec<FuzzCase> = (0..FUZZ_CASES)
        .map(|s| fuzz_case(s, FUZZ_MAX_ITEMS, FUZZ_MAX_TX))
        .collect();
    let criteria: Vec<Criterion> = vec![
        ("running-example exactness", Box::new(criterion_1)),
        ("intermediate values", Box::new(criterion_2)),
        ("oracle equivalence", Box::new(|| criterion_3(&cases))),
        ("counter monotonicity", Box::new(|| criterion_4(&cases))),
        ("threshold monotonicity", Box::new(|| criterion_5(&cases))),
        ("join equivalence", Box::new(|| criterion_6(&cases))),
        ("scalability shape", Box::new(criterion_7)),
        ("format round-trip", Box::new(|| criterion_8(&cases))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Measure and list invariants on small generated databases.

use phui_core::datagen::{generate, GenParams};
use phui_core::measures::{
    expected_support, pattern_utility, redefined_transaction_utility, rtwu, transaction_utility,
    utility_parts,
};
use phui_core::miner::{mine_observed, prepare};
use phui_core::model::{validate_database, Item, Pattern, Thresholds};
use phui_core::oracle::occurring_patterns;
use phui_core::pulist::{lists_match, scan_build, PuList};
use phui_core::{MiningConfig, Preset};
use proptest::prelude::*;

fn small_params() -> impl Strategy<Value = GenParams> {
    (
        any::<u64>(),
        1usize..=8,
        1usize..=20,
        prop::sample::select(vec![0.0, 0.2, 0.5, 1.0]),
    )
        .prop_map(|(seed, n_items, n_tx, neg)| GenParams {
            n_transactions: n_tx,
            n_items,
            avg_tx_len: 3.0_f64.min(n_items as f64),
            max_tx_len: n_items.min(6),
            utility_range: (-50.0, 50.0),
            lognormal_mu: 2.0,
            negative_fraction: neg,
            seed,
            ..GenParams::default()
        })
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn measure_properties(params in small_params()) {
        let (db, table) = generate(&params).unwrap();
        prop_assert!(validate_database(&db, &table).is_ok());
        for t in db.transactions() {
            let tu = transaction_utility(t, &table);
            let rtu = redefined_transaction_utility(t, &table);
            prop_assert!(rtu >= tu);
            prop_assert!(rtu >= 0.0);
            let has_negative = t.items().any(|i| table.get(i).unwrap() < 0.0);
            prop_assert_eq!(rtu == tu, !has_negative);
        }
        let patterns: Vec<Pattern> = occurring_patterns(&db).into_iter().collect();
        for x in &patterns {
            let u = pattern_utility(x, &db, &table);
            let (pu, nu) = utility_parts(x, &db, &table);
            prop_assert_eq!(pu + nu, u);
            prop_assert!(nu <= u && u <= pu);
            prop_assert!(rtwu(x, &db, &table) >= u);
            for &extra in db.item_universe().iter() {
                if let Some(y) = x.with(extra) {
                    prop_assert!(expected_support(&y, &db) <= expected_support(x, &db));
                    prop_assert!(rtwu(&y, &db, &table) <= rtwu(x, &db, &table));
                }
            }
        }
    }

    #[test]
    fn list_invariants(params in small_params(), min_util in -30.0f64..100.0) {
        let (db, table) = generate(&params).unwrap();
        let th = Thresholds::new(min_util, 0.0).unwrap();
        let config = MiningConfig::from_preset(Preset::None);
        let odb = prepare(&db, &table, &th, false);
        let mut visited: Vec<PuList> = Vec::new();
        mine_observed(&db, &table, &th, &config, |l: &PuList| visited.push(l.clone())).unwrap();
        prop_assert_eq!(visited.len(), occurring_patterns(&db).len());

        let order = odb.order();
        for list in &visited {
            let x = list.pattern();
            let scanned = scan_build(x, &odb).unwrap();
            prop_assert!(lists_match(list, &scanned, 1e-9), "{x}");

            let sums = list.sums();
            prop_assert_eq!(sums.iu(), pattern_utility(x, &db, &table));
            prop_assert!(rel_close(sums.pro, expected_support(x, &db)));
            for e in list.entries() {
                prop_assert!(e.pu >= 0.0 && e.nu <= 0.0 && e.rpu >= 0.0);
                prop_assert!(e.pro > 0.0 && e.pro <= 1.0);
            }

            // Every order-respecting extension is bounded by pu + rpu and pro.
            let last = order.rank(list.last_item()).unwrap() as usize;
            let later: Vec<Item> = order.items()[last + 1..].to_vec();
            for mask in 1u32..(1 << later.len()) {
                let mut y = x.clone();
                for (k, &i) in later.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        y = y.with(i).unwrap();
                    }
                }
                prop_assert!(sums.extension_bound() >= pattern_utility(&y, &db, &table));
                prop_assert!(sums.pro >= expected_support(&y, &db) - 1e-12);
            }
        }
    }
}

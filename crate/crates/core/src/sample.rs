//! A five-transaction sample database with one loss-making item, used
//! throughout the docs and tests. Items `a..e` map to ids `1..5`.

use alloc::vec;

use crate::model::{Item, TransactionEntry as E, UncertainDatabase, UtilityTable};

pub const A: Item = Item(1);
pub const B: Item = Item(2);
pub const C: Item = Item(3);
pub const D: Item = Item(4);
pub const E_: Item = Item(5);

/// The sample database.
pub fn table1() -> UncertainDatabase {
    UncertainDatabase::from_entries(vec![
        vec![
            E::new(1, 5, 0.6),
            E::new(2, 3, 0.5),
            E::new(4, 2, 0.9),
            E::new(5, 4, 0.8),
        ],
        vec![E::new(3, 1, 0.75), E::new(4, 1, 0.9), E::new(5, 2, 1.0)],
        vec![
            E::new(1, 4, 1.0),
            E::new(2, 3, 1.0),
            E::new(3, 2, 0.7),
            E::new(5, 1, 0.75),
        ],
        vec![E::new(1, 3, 0.9), E::new(3, 1, 0.9)],
        vec![
            E::new(2, 2, 1.0),
            E::new(3, 4, 0.95),
            E::new(4, 5, 0.6),
            E::new(5, 4, 1.0),
        ],
    ])
}

/// Unit utilities `{a: 8, b: 5, c: -2, d: 12, e: 7}`.
pub fn ptable() -> UtilityTable {
    [(A, 8.0), (B, 5.0), (C, -2.0), (D, 12.0), (E_, 7.0)]
        .into_iter()
        .collect()
}

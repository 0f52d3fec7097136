//! Potential high-utility itemset (PHUI) mining over uncertain quantitative
//! transaction databases whose items may carry negative unit utilities.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`model`]: databases, utility tables, thresholds and mined patterns.
//! - [`measures`]: direct reference implementations of utility, expected
//!   support, TU/RTU/RTWU and the PHUI predicate.
//! - [`pulist`]: the vertical probability/utility list (PU±-list), its
//!   construction and the join with early abandonment.
//! - [`miner`]: the depth-first list-based miner with six toggleable pruning
//!   strategies and instrumentation.
//! - [`oracle`]: a brute-force miner used as ground truth.
//! - [`datagen`]: a seeded synthetic database generator.
//! - [`fuzz`]: small random cases with thresholds on pattern boundaries.
//!
//! File formats, timing and the command-line tool live in the `phui` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod datagen;
pub mod fuzz;
pub mod measures;
pub mod miner;
pub mod model;
pub mod oracle;
pub mod pulist;
pub mod sample;

pub use miner::{mine, MineError, MiningConfig, MiningOutcome, MiningStats, Preset};
pub use model::{
    Item, MinedPattern, Pattern, Thresholds, Transaction, TransactionEntry, UncertainDatabase,
    UtilityTable,
};
pub use oracle::brute_force_mine;

//! File formats, measurement harnesses and the command-line tool for the
//! `phui-core` miner.
//!
//! - [`dataio`]: database, utility table, result, stats and name-map formats.
//! - [`run`]: mining with elapsed time and peak heap filled in.
//! - [`alloc_track`]: the counting allocator behind peak-heap figures.
//! - [`verify`]: differential checks against the brute-force oracle.
//! - [`bench`]: threshold, preset and prefix sweeps.
//! - [`cli`]: the `phui` binary's argument handling.

pub mod alloc_track;
pub mod bench;
pub mod cli;
pub mod dataio;
pub mod run;
pub mod verify;

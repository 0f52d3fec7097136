//! Seeded synthetic uncertain databases.
//!
//! Randomness is drawn from a single ChaCha stream in a fixed order: item
//! utilities, the negative-item selection, per-item probabilities (if any),
//! transaction lengths, then transaction entries. Output is therefore stable
//! across platforms for a given seed.

use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use thiserror::Error;

use crate::model::{Item, TransactionEntry, UncertainDatabase, UtilityTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbabilityMode {
    /// Every occurrence draws its own probability.
    PerOccurrence,
    /// Each item draws one probability used for all of its occurrences.
    PerItem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n_transactions: usize,
    pub n_items: usize,
    pub avg_tx_len: f64,
    pub max_tx_len: usize,
    /// `[lo, hi]` for unit utilities.
    pub utility_range: (f64, f64),
    pub lognormal_mu: f64,
    pub lognormal_sigma: f64,
    /// Quantities are uniform in `1..=quantity_max`.
    pub quantity_max: u32,
    /// Share of items whose unit utility is negative.
    pub negative_fraction: f64,
    pub probability_mode: ProbabilityMode,
    /// When set to `g`, probabilities are drawn uniformly from
    /// `{1/g, 2/g, .., 1}` instead of the open interval `(0, 1)`.
    pub probability_grid: Option<u32>,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_transactions: 1000,
            n_items: 100,
            avg_tx_len: 10.0,
            max_tx_len: 30,
            utility_range: (-1000.0, 1000.0),
            lognormal_mu: 5.0,
            lognormal_sigma: 1.0,
            quantity_max: 5,
            negative_fraction: 0.2,
            probability_mode: ProbabilityMode::PerOccurrence,
            probability_grid: None,
            seed: 0,
        }
    }
}

impl GenParams {
    /// Small databases the brute-force oracle can check quickly.
    pub fn small(seed: u64) -> Self {
        GenParams {
            n_transactions: 20,
            n_items: 8,
            avg_tx_len: 4.0,
            max_tx_len: 7,
            seed,
            ..GenParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let (lo, hi) = self.utility_range;
        if self.n_transactions > 0 && self.n_items == 0 {
            return Err(GenError::NoItems);
        }
        if !(self.avg_tx_len.is_finite() && self.avg_tx_len >= 1.0) {
            return Err(GenError::AverageLength(self.avg_tx_len));
        }
        if self.max_tx_len == 0 {
            return Err(GenError::MaxLength);
        }
        if !(0.0..=1.0).contains(&self.negative_fraction) {
            return Err(GenError::NegativeFraction(self.negative_fraction));
        }
        if self.negative_fraction > 0.0 && (lo.is_nan() || lo > -1.0) {
            return Err(GenError::UtilityRange(lo, hi));
        }
        if self.negative_fraction < 1.0 && (hi.is_nan() || hi < 1.0) {
            return Err(GenError::UtilityRange(lo, hi));
        }
        if !(self.lognormal_mu.is_finite()
            && self.lognormal_sigma.is_finite()
            && self.lognormal_sigma >= 0.0)
        {
            return Err(GenError::LogNormal);
        }
        if self.quantity_max == 0 {
            return Err(GenError::QuantityMax);
        }
        if self.probability_grid == Some(0) {
            return Err(GenError::ProbabilityGrid);
        }
        Ok(())
    }

    /// Number of negative items the generator will produce.
    pub fn negative_count(&self) -> usize {
        round_half_up(self.negative_fraction * self.n_items as f64) as usize
    }
}

fn round_half_up(x: f64) -> f64 {
    // non-negative inputs only; f64::round needs std
    let t = x as i64 as f64;
    if x - t >= 0.5 {
        t + 1.0
    } else {
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum GenError {
    #[error("transactions requested but the item count is zero")]
    NoItems,
    #[error("average transaction length must be >= 1, got {0}")]
    AverageLength(f64),
    #[error("maximum transaction length must be >= 1")]
    MaxLength,
    #[error("negative fraction must be in [0,1], got {0}")]
    NegativeFraction(f64),
    #[error("utility range [{0}, {1}] cannot hold the requested signs")]
    UtilityRange(f64, f64),
    #[error("invalid log-normal parameters")]
    LogNormal,
    #[error("maximum quantity must be >= 1")]
    QuantityMax,
    #[error("probability grid must be >= 1")]
    ProbabilityGrid,
}

fn draw_probability(rng: &mut ChaCha8Rng, grid: Option<u32>) -> f64 {
    match grid {
        Some(g) => f64::from(rng.random_range(1..=g)) / f64::from(g),
        None => loop {
            let p: f64 = rng.random();
            if p > 0.0 {
                break p;
            }
        },
    }
}

/// Generates a database and its utility table. Item ids are `1..=n_items`.
pub fn generate(params: &GenParams) -> Result<(UncertainDatabase, UtilityTable), GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_items;
    let (lo, hi) = params.utility_range;

    let magnitude = LogNormal::new(params.lognormal_mu, params.lognormal_sigma)
        .map_err(|_| GenError::LogNormal)?;
    let raw: Vec<f64> = (0..n).map(|_| magnitude.sample(&mut rng)).collect();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let mut negative = alloc::vec![false; n];
    for &k in &ids[..params.negative_count()] {
        negative[k] = true;
    }
    let table: UtilityTable = raw
        .iter()
        .zip(&negative)
        .enumerate()
        .map(|(k, (&m, &neg))| {
            let cap = if neg { -lo } else { hi };
            let value = round_half_up(m.clamp(1.0, cap)).clamp(1.0, cap);
            (Item(k as u32 + 1), if neg { -value } else { value })
        })
        .collect();

    let item_probability: Vec<f64> = match params.probability_mode {
        ProbabilityMode::PerItem => (0..n)
            .map(|_| draw_probability(&mut rng, params.probability_grid))
            .collect(),
        ProbabilityMode::PerOccurrence => Vec::new(),
    };

    let cap = params.max_tx_len.min(n).max(1);
    let extra = params.avg_tx_len - 1.0;
    let poisson = (extra > 0.0)
        .then(|| Poisson::new(extra).map_err(|_| GenError::AverageLength(params.avg_tx_len)))
        .transpose()?;
    let lengths: Vec<usize> = (0..params.n_transactions)
        .map(|_| {
            let drawn = poisson.map_or(0.0, |p| p.sample(&mut rng)) as usize;
            (1 + drawn).min(cap)
        })
        .collect();

    let transactions: Vec<Vec<TransactionEntry>> = lengths
        .iter()
        .map(|&len| {
            let mut picked: Vec<usize> = index::sample(&mut rng, n, len).into_vec();
            picked.sort_unstable();
            picked
                .into_iter()
                .map(|k| {
                    let quantity = rng.random_range(1..=params.quantity_max);
                    let probability = match params.probability_mode {
                        ProbabilityMode::PerItem => item_probability[k],
                        ProbabilityMode::PerOccurrence => {
                            draw_probability(&mut rng, params.probability_grid)
                        }
                    };
                    TransactionEntry::new(k as u32 + 1, quantity, probability)
                })
                .collect()
        })
        .collect();

    Ok((UncertainDatabase::from_entries(transactions), table))
}

//! Two-stage Monte Carlo estimate of the rounding tax.
//!
//! Each simulated transaction draws a basket size, then one price ending
//! per item, and records the rounding delta of the total's residue. Both
//! draws use inverse-CDF sampling over the explicit pmfs.
//!
//! Transaction `i` draws from its own ChaCha8 stream: the generator is
//! keyed by the run seed and the stream number is `i`. Deltas are summed
//! as integers, so the result does not depend on how transactions are
//! split across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{BasketSizeDistribution, EndingDistribution, StoreProfile};
use crate::error::{Error, Result};
use crate::expectation::{MINOR_PER_MAJOR, RESIDUES};
use crate::money::RoundingRule;

pub const DEFAULT_TRANSACTIONS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n_transactions: u64,
    pub seed: u64,
    pub rule: RoundingRule,
    /// Keep every simulated transaction in the result.
    pub keep_sample: bool,
}

impl SimulationConfig {
    pub fn new(n_transactions: u64, seed: u64, rule: RoundingRule) -> Self {
        SimulationConfig {
            n_transactions,
            seed,
            rule,
            keep_sample: false,
        }
    }
}

/// One simulated transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransactionDraw {
    pub index: u64,
    pub basket_size: u32,
    /// Last digit of the basket total, in minor units.
    pub residue: u8,
    pub delta_minor: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    /// Sample mean of the per-transaction tax, NIS.
    pub mean_tax: f64,
    /// Standard error of `mean_tax`, NIS.
    pub std_error: f64,
    pub n: u64,
    pub sample: Option<Vec<TransactionDraw>>,
}

/// Cumulative table for inverse-CDF draws.
#[derive(Debug, Clone)]
struct Sampler<T> {
    values: Vec<T>,
    cumulative: Vec<f64>,
}

impl<T: Copy> Sampler<T> {
    fn new(pairs: impl IntoIterator<Item = (T, f64)>) -> Self {
        let mut values = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (v, p) in pairs {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            values.push(v);
            cumulative.push(acc);
        }
        // absorb float slack so a uniform in [0, 1) always lands
        if let Some(last) = cumulative.last_mut() {
            *last = f64::INFINITY;
        }
        Sampler { values, cumulative }
    }

    fn draw(&self, rng: &mut impl Rng) -> T {
        let u: f64 = rng.gen();
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.values[i]
    }
}

/// Per-store draw tables, built once and shared by all transactions.
struct TransactionSampler<'a> {
    sizes: Sampler<u32>,
    endings: Sampler<u8>,
    kernel: Vec<i64>,
    rule: &'a RoundingRule,
}

impl<'a> TransactionSampler<'a> {
    fn new(
        endings: &EndingDistribution,
        baskets: &BasketSizeDistribution,
        rule: &'a RoundingRule,
    ) -> Result<Self> {
        if RESIDUES as u32 % rule.grid() != 0 {
            return Err(Error::Domain(format!(
                "rule grid {} does not divide 10",
                rule.grid()
            )));
        }
        Ok(TransactionSampler {
            sizes: Sampler::new(baskets.entries().iter().copied()),
            endings: Sampler::new(endings.probs().iter().enumerate().map(|(d, &p)| (d as u8, p))),
            kernel: rule.delta_by_residue(),
            rule,
        })
    }

    fn draw(&self, seed: u64, index: u64) -> TransactionDraw {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let basket_size = self.sizes.draw(&mut rng);
        let mut residue = 0u32;
        for _ in 0..basket_size {
            residue = (residue + u32::from(self.endings.draw(&mut rng))) % RESIDUES as u32;
        }
        let delta_minor = self.kernel[(residue % self.rule.grid()) as usize];
        TransactionDraw {
            index,
            basket_size,
            residue: residue as u8,
            delta_minor,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: i128,
    sum_sq: i128,
}

impl Moments {
    fn add(self, delta: i64) -> Moments {
        let d = i128::from(delta);
        Moments {
            sum: self.sum + d,
            sum_sq: self.sum_sq + d * d,
        }
    }

    fn merge(self, other: Moments) -> Moments {
        Moments {
            sum: self.sum + other.sum,
            sum_sq: self.sum_sq + other.sum_sq,
        }
    }
}

/// Simulates `config.n_transactions` cash transactions for one store type.
pub fn simulate(profile: &StoreProfile, config: &SimulationConfig) -> Result<SimulationResult> {
    simulate_distributions(&profile.endings, &profile.baskets, config)
}

pub fn simulate_distributions(
    endings: &EndingDistribution,
    baskets: &BasketSizeDistribution,
    config: &SimulationConfig,
) -> Result<SimulationResult> {
    let n = config.n_transactions;
    if n == 0 {
        return Err(Error::Domain("n_transactions must be at least 1".into()));
    }
    let sampler = TransactionSampler::new(endings, baskets, &config.rule)?;

    let (moments, sample) = if config.keep_sample {
        let draws: Vec<TransactionDraw> = (0..n)
            .into_par_iter()
            .map(|i| sampler.draw(config.seed, i))
            .collect();
        let m = draws
            .iter()
            .fold(Moments::default(), |m, d| m.add(d.delta_minor));
        (m, Some(draws))
    } else {
        let m = (0..n)
            .into_par_iter()
            .fold(Moments::default, |m, i| m.add(sampler.draw(config.seed, i).delta_minor))
            .reduce(Moments::default, Moments::merge);
        (m, None)
    };

    let nn = i128::from(n);
    let mean_minor = moments.sum as f64 / n as f64;
    let std_error_minor = if n > 1 {
        // n * sum_sq - sum^2 is exact in integers and never negative
        let centered = (nn * moments.sum_sq - moments.sum * moments.sum) as f64;
        let variance = centered / (n as f64 * (n - 1) as f64);
        (variance / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(SimulationResult {
        mean_tax: mean_minor / MINOR_PER_MAJOR,
        std_error: std_error_minor / MINOR_PER_MAJOR,
        n,
        sample,
    })
}

/// Renders retained draws as `txn_index,basket_size,residue,delta_agorot`.
pub fn sample_to_csv(sample: &[TransactionDraw]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("txn_index,basket_size,residue,delta_agorot\n");
    for d in sample {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            d.index, d.basket_size, d.residue, d.delta_minor
        );
    }
    out
}

//! Independent oracles shared by the integration tests.  They deliberately
//! avoid the library's own algorithms: the expectation oracle enumerates
//! every basket, and the extremizer oracle searches a share grid.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use roundtax::{
    BasketSizeDistribution, EndingDistribution, MinorUnits, RoundingRule, ShareWeights, StoreStats,
    StoreTax,
};

pub fn data_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

/// Expected delta (minor units) by enumerating every ordered basket of
/// every size.  Items cost 12.00 NIS plus their ending digit in agorot.
pub fn brute_force_delta(
    endings: &EndingDistribution,
    baskets: &BasketSizeDistribution,
    rule: &RoundingRule,
) -> f64 {
    fn walk(
        left: u32,
        total: i64,
        prob: f64,
        endings: &EndingDistribution,
        rule: &RoundingRule,
    ) -> f64 {
        if prob == 0.0 {
            return 0.0;
        }
        if left == 0 {
            let delta = rule.rounding_delta(MinorUnits(total)).expect("non-negative total");
            return prob * delta.0 as f64;
        }
        (0..10)
            .map(|d| walk(left - 1, total + 1200 + d as i64, prob * endings.prob(d), endings, rule))
            .sum()
    }
    baskets
        .entries()
        .iter()
        .map(|&(n, q)| walk(n, 0, q, endings, rule))
        .sum()
}

/// A random ending law with at most `max_digits` nonzero digits.
pub fn random_endings(rng: &mut impl Rng, max_digits: usize) -> EndingDistribution {
    let k = rng.gen_range(1..=max_digits);
    let mut p = [0.0; 10];
    for _ in 0..k {
        p[rng.gen_range(0..10)] += rng.gen_range(0.05..1.0);
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sum);
    EndingDistribution::new(p).expect("normalized")
}

/// A random basket-size law with at most `max_support` sizes in 1..=max_size.
pub fn random_baskets(rng: &mut impl Rng, max_support: usize, max_size: u32) -> BasketSizeDistribution {
    let k = rng.gen_range(1..=max_support);
    let mut entries: Vec<(u32, f64)> = Vec::new();
    while entries.len() < k {
        let n = rng.gen_range(1..=max_size);
        if entries.iter().all(|&(m, _)| m != n) {
            entries.push((n, rng.gen_range(0.05..1.0)));
        }
    }
    let sum: f64 = entries.iter().map(|e| e.1).sum();
    entries.iter_mut().for_each(|e| e.1 /= sum);
    BasketSizeDistribution::new(entries).expect("normalized")
}

/// A random market of `n` stores with revenue shares summing to one.
pub fn random_market(rng: &mut impl Rng, n: usize) -> Vec<StoreTax> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter()
        .enumerate()
        .map(|(i, r)| {
            let stats = StoreStats::new(
                format!("store_{i}"),
                r / sum,
                rng.gen_range(100.0..200_000.0),
            )
            .expect("valid stats");
            StoreTax::new(stats, rng.gen_range(0.0..0.01))
        })
        .collect()
}

/// Best total tax found on a share grid of step `step`.  Each store in
/// turn takes the share that closes the weighted-mean constraint while
/// the others range over the grid; the best feasible point wins.
pub fn grid_search(
    stores: &[StoreTax],
    overall: f64,
    weights: ShareWeights,
    maximize: bool,
    step: f64,
) -> Option<f64> {
    assert_eq!(stores.len(), 3, "grid search is written for three stores");
    let w: Vec<f64> = stores.iter().map(|s| weights.weight(&s.stats)).collect();
    let c: Vec<f64> = stores.iter().map(StoreTax::full_cash_tax).collect();
    let budget = overall * w.iter().sum::<f64>();
    let steps = (1.0 / step).round() as usize;
    let mut best: Option<f64> = None;
    for free in 0..3 {
        if w[free] == 0.0 {
            continue;
        }
        let (a, b) = match free {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for i in 0..=steps {
            let sa = i as f64 * step;
            for j in 0..=steps {
                let sb = j as f64 * step;
                let sf = (budget - w[a] * sa - w[b] * sb) / w[free];
                if !(-1e-12..=1.0 + 1e-12).contains(&sf) {
                    continue;
                }
                let sf = sf.clamp(0.0, 1.0);
                let value = c[a] * sa + c[b] * sb + c[free] * sf;
                best = Some(match best {
                    None => value,
                    Some(v) if maximize => v.max(value),
                    Some(v) => v.min(value),
                });
            }
        }
    }
    best
}

//! Distributional checks on the Monte Carlo engine.

mod common;

use roundtax::simulation::simulate_distributions;
use roundtax::{
    expected_tax_per_transaction, load_profile_dir, LoadOptions, RoundingRule, SimulationConfig,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SIGNIFICANCE: f64 = 0.001;

fn sample_profiles() -> Vec<roundtax::StoreProfile> {
    load_profile_dir(
        &common::data_dir("sample_text"),
        &LoadOptions {
            share_tolerance: 2e-3,
        },
    )
    .unwrap()
}

/// Pearson statistic against `expected` probabilities, pooling cells whose
/// expected count is below five into one.
fn chi_square(observed: &[u64], expected: &[f64], n: u64) -> (f64, usize) {
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected) {
        let e = p * n as f64;
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp.max(1e-300);
        cells += 1;
    }
    (stat, cells)
}

fn critical(cells: usize) -> f64 {
    ChiSquared::new((cells - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - SIGNIFICANCE)
}

#[test]
fn basket_sizes_follow_their_law() {
    for p in sample_profiles() {
        let mut cfg = SimulationConfig::new(50_000, 3, RoundingRule::israel_2008());
        cfg.keep_sample = true;
        let r = simulate_distributions(&p.endings, &p.baskets, &cfg).unwrap();
        let sample = r.sample.unwrap();
        let entries = p.baskets.entries();
        let mut observed = vec![0u64; entries.len()];
        for d in &sample {
            let i = entries.iter().position(|e| e.0 == d.basket_size).expect("size in support");
            observed[i] += 1;
        }
        let expected: Vec<f64> = entries.iter().map(|e| e.1).collect();
        let (stat, cells) = chi_square(&observed, &expected, sample.len() as u64);
        assert!(stat < critical(cells), "{}: chi2 {stat} over {cells} cells", p.name());
    }
}

#[test]
fn single_item_residues_follow_the_ending_law() {
    for p in sample_profiles() {
        let mut cfg = SimulationConfig::new(100_000, 5, RoundingRule::israel_2008());
        cfg.keep_sample = true;
        let r = simulate_distributions(&p.endings, &p.baskets, &cfg).unwrap();
        let mut observed = [0u64; 10];
        let mut n = 0;
        for d in r.sample.unwrap().iter().filter(|d| d.basket_size == 1) {
            observed[d.residue as usize] += 1;
            n += 1;
        }
        assert!(n > 1_000, "{}: too few single-item baskets", p.name());
        let (stat, cells) = chi_square(&observed, p.endings.probs(), n);
        assert!(stat < critical(cells), "{}: chi2 {stat} over {cells} cells", p.name());
    }
}

#[test]
fn standard_error_matches_spread_across_seeds() {
    let rule = RoundingRule::israel_2008();
    for p in sample_profiles() {
        let exact = expected_tax_per_transaction(&p, &rule).unwrap();
        let runs: Vec<_> = (0..100)
            .map(|seed| roundtax::simulate(&p, &SimulationConfig::new(10_000, seed, rule.clone())).unwrap())
            .collect();
        let means: Vec<f64> = runs.iter().map(|r| r.mean_tax).collect();
        let grand = means.iter().sum::<f64>() / means.len() as f64;
        let spread = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / 99.0).sqrt();
        let typical_se = runs.iter().map(|r| r.std_error).sum::<f64>() / runs.len() as f64;
        let ratio = spread / typical_se;
        assert!((0.75..1.3).contains(&ratio), "{}: spread/se = {ratio}", p.name());
        assert!((grand - exact).abs() < 4.0 * typical_se / 10.0, "{}: {grand} vs {exact}", p.name());
    }
}

#[test]
fn seeds_give_distinct_streams() {
    let p = &sample_profiles()[0];
    let rule = RoundingRule::israel_2008();
    let a = roundtax::simulate(p, &SimulationConfig::new(10_000, 1, rule.clone())).unwrap();
    let b = roundtax::simulate(p, &SimulationConfig::new(10_000, 2, rule)).unwrap();
    assert_ne!(a.mean_tax, b.mean_tax);
}

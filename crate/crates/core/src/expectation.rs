//! Exact expected rounding tax per cash transaction.
//!
//! A basket total's last digit is the sum of the item endings mod 10, so
//! its law is the n-fold cyclic convolution of the ending distribution.
//! Mixing over basket sizes and weighting by the rule's residue deltas
//! gives the value the Monte Carlo estimator converges to.

use crate::distributions::{BasketSizeDistribution, EndingDistribution, StoreProfile};
use crate::error::{Error, Result};
use crate::money::RoundingRule;

pub const RESIDUES: usize = 10;

/// Minor units per major unit.
pub const MINOR_PER_MAJOR: f64 = 100.0;

/// Distribution of a basket total modulo 10.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueDistribution(pub [f64; RESIDUES]);

impl ResidueDistribution {
    /// Point mass on residue 0, the identity for cyclic convolution.
    pub const IDENTITY: ResidueDistribution = {
        let mut p = [0.0; RESIDUES];
        p[0] = 1.0;
        ResidueDistribution(p)
    };

    pub fn probs(&self) -> &[f64; RESIDUES] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Distribution of `(x + y) mod 10` for independent `x ~ self`, `y ~ other`.
    pub fn convolve(&self, other: &ResidueDistribution) -> ResidueDistribution {
        let mut out = [0.0; RESIDUES];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                out[(i + j) % RESIDUES] += a * b;
            }
        }
        ResidueDistribution(out)
    }

    /// n-fold self convolution by repeated squaring.
    pub fn power(&self, mut n: u32) -> ResidueDistribution {
        let mut acc = ResidueDistribution::IDENTITY;
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.convolve(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.convolve(&base);
            }
        }
        acc
    }
}

impl From<&EndingDistribution> for ResidueDistribution {
    fn from(e: &EndingDistribution) -> Self {
        ResidueDistribution(*e.probs())
    }
}

/// Law of the last digit of a basket of `n` items with i.i.d. endings.
pub fn convolve_endings(endings: &EndingDistribution, n: u32) -> Result<ResidueDistribution> {
    if n == 0 {
        return Err(Error::Domain("basket size must be at least 1".into()));
    }
    Ok(ResidueDistribution::from(endings).power(n))
}

/// Law of the last digit of a basket whose size is itself random.
pub fn basket_residues(
    endings: &EndingDistribution,
    baskets: &BasketSizeDistribution,
) -> ResidueDistribution {
    let single = ResidueDistribution::from(endings);
    let mut mix = [0.0; RESIDUES];
    for &(n, q) in baskets.entries() {
        if q == 0.0 {
            continue;
        }
        let r = single.power(n);
        for (m, p) in mix.iter_mut().zip(r.0) {
            *m += q * p;
        }
    }
    ResidueDistribution(mix)
}

fn check_grid(rule: &RoundingRule) -> Result<()> {
    if RESIDUES as u32 % rule.grid() != 0 {
        return Err(Error::Domain(format!(
            "rule grid {} does not divide 10; last digits alone cannot determine the rounding",
            rule.grid()
        )));
    }
    Ok(())
}

/// Expected delta of one transaction, in minor units.
pub fn expected_delta_minor(
    endings: &EndingDistribution,
    baskets: &BasketSizeDistribution,
    rule: &RoundingRule,
) -> Result<f64> {
    check_grid(rule)?;
    let kernel = rule.delta_by_residue();
    let grid = kernel.len();
    let residues = basket_residues(endings, baskets);
    Ok(residues
        .0
        .iter()
        .enumerate()
        .map(|(r, &p)| p * kernel[r % grid] as f64)
        .sum())
}

/// Expected rounding tax per cash transaction, in NIS.
pub fn expected_tax_per_transaction(profile: &StoreProfile, rule: &RoundingRule) -> Result<f64> {
    Ok(expected_delta_minor(&profile.endings, &profile.baskets, rule)? / MINOR_PER_MAJOR)
}

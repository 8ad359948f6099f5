//! Economy-wide rounding tax under cash-share scenarios.
//!
//! Only cash transactions are rounded, so a store type's annual tax is its
//! per-transaction tax times its transaction count times its cash share.
//! [`Market::extremize`] finds the store-level cash shares that maximize or
//! minimize the total while the weighted mean cash share stays fixed. That
//! is a linear program with one equality constraint and box bounds, solved
//! greedily by tax-to-weight ratio: at most one store ends up strictly
//! between 0 and 1.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::distributions::{StoreStats, Table};
use crate::error::{Error, Result};

/// Shares this close to 1 are snapped to the bound.
const SHARE_SNAP: f64 = 1e-12;

/// A store type together with its rounding tax per cash transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreTax {
    pub stats: StoreStats,
    /// NIS per cash transaction.
    pub tax_per_transaction: f64,
}

impl StoreTax {
    pub fn new(stats: StoreStats, tax_per_transaction: f64) -> Self {
        StoreTax {
            stats,
            tax_per_transaction,
        }
    }

    pub fn name(&self) -> &str {
        &self.stats.name
    }

    /// Annual tax if every transaction were paid in cash, NIS.
    pub fn full_cash_tax(&self) -> f64 {
        self.tax_per_transaction * self.stats.annual_transactions()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CashShareScenario {
    pub label: String,
    pub shares: BTreeMap<String, f64>,
}

impl CashShareScenario {
    pub fn new(label: impl Into<String>, shares: BTreeMap<String, f64>) -> Result<Self> {
        for (store, &share) in &shares {
            if !(0.0..=1.0).contains(&share) {
                return Err(Error::Infeasible(format!(
                    "cash share {share} for {store:?} is outside [0, 1]"
                )));
            }
        }
        Ok(CashShareScenario {
            label: label.into(),
            shares,
        })
    }

    pub fn share(&self, store: &str) -> Option<f64> {
        self.shares.get(store).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl FromStr for Sense {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Sense::Max),
            "min" => Ok(Sense::Min),
            other => Err(Error::Invalid(format!("sense must be max or min, got {other:?}"))),
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Max => "max",
            Sense::Min => "min",
        })
    }
}

/// What the overall cash share is averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShareWeights {
    /// Weighted by revenue share. Reproduces the published extremal shares.
    #[default]
    Revenue,
    /// Weighted by annual transaction count.
    Transactions,
}

impl FromStr for ShareWeights {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "revenue" => Ok(ShareWeights::Revenue),
            "transactions" => Ok(ShareWeights::Transactions),
            other => Err(Error::Invalid(format!(
                "weights must be revenue or transactions, got {other:?}"
            ))),
        }
    }
}

impl fmt::Display for ShareWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShareWeights::Revenue => "revenue",
            ShareWeights::Transactions => "transactions",
        })
    }
}

impl ShareWeights {
    pub fn weight(self, stats: &StoreStats) -> f64 {
        match self {
            ShareWeights::Revenue => stats.revenue_share,
            ShareWeights::Transactions => stats.annual_transactions_thousands,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreAggregate {
    pub name: String,
    pub cash_share: f64,
    /// Annual rounding tax, NIS.
    pub tax: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub per_store: Vec<StoreAggregate>,
    /// NIS per year.
    pub total_tax: f64,
    /// `total_tax` over total market revenue.
    pub share_of_revenue: f64,
    /// Present when the scenario came out of [`Market::extremize`].
    pub extremal_shares: Option<CashShareScenario>,
}

/// The store types of one market plus its total annual revenue.
#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    stores: Vec<StoreTax>,
    total_revenue: f64,
}

impl Market {
    pub fn new(stores: Vec<StoreTax>, total_revenue: f64) -> Result<Self> {
        if stores.is_empty() {
            return Err(Error::Invalid("a market needs at least one store type".into()));
        }
        let mut seen = HashSet::new();
        for s in &stores {
            if !seen.insert(s.name()) {
                return Err(Error::Invalid(format!("store {:?} listed twice", s.name())));
            }
            if !s.tax_per_transaction.is_finite() {
                return Err(Error::Invalid(format!("store {:?} has a non-finite tax", s.name())));
            }
        }
        if !(total_revenue > 0.0 && total_revenue.is_finite()) {
            return Err(Error::Invalid("total revenue must be positive".into()));
        }
        Ok(Market {
            stores,
            total_revenue,
        })
    }

    pub fn stores(&self) -> &[StoreTax] {
        &self.stores
    }

    pub fn total_revenue(&self) -> f64 {
        self.total_revenue
    }

    pub fn uniform_scenario(&self, share: f64, label: impl Into<String>) -> Result<CashShareScenario> {
        let shares = self
            .stores
            .iter()
            .map(|s| (s.name().to_owned(), share))
            .collect();
        CashShareScenario::new(label, shares)
    }

    /// Weighted mean cash share of a scenario.
    pub fn overall_share(&self, scenario: &CashShareScenario, weights: ShareWeights) -> Result<f64> {
        let total_weight: f64 = self.stores.iter().map(|s| weights.weight(&s.stats)).sum();
        let mut acc = 0.0;
        for s in &self.stores {
            let share = scenario
                .share(s.name())
                .ok_or_else(|| Error::MissingStore(s.name().to_owned()))?;
            acc += weights.weight(&s.stats) * share;
        }
        Ok(acc / total_weight)
    }

    pub fn aggregate(&self, scenario: &CashShareScenario) -> Result<AggregateResult> {
        let known: HashSet<&str> = self.stores.iter().map(StoreTax::name).collect();
        if let Some(extra) = scenario.shares.keys().find(|k| !known.contains(k.as_str())) {
            return Err(Error::Invalid(format!(
                "scenario {:?} names unknown store {extra:?}",
                scenario.label
            )));
        }
        let per_store = self
            .stores
            .iter()
            .map(|s| {
                let cash_share = scenario
                    .share(s.name())
                    .ok_or_else(|| Error::MissingStore(s.name().to_owned()))?;
                Ok(StoreAggregate {
                    name: s.name().to_owned(),
                    cash_share,
                    tax: s.full_cash_tax() * cash_share,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total_tax = per_store.iter().map(|s| s.tax).sum::<f64>();
        Ok(AggregateResult {
            per_store,
            total_tax,
            share_of_revenue: total_tax / self.total_revenue,
            extremal_shares: None,
        })
    }

    /// Cash shares that maximize or minimize the total tax subject to the
    /// weighted mean cash share equalling `overall`.
    pub fn extremize(&self, overall: f64, sense: Sense, weights: ShareWeights) -> Result<AggregateResult> {
        if !(0.0..=1.0).contains(&overall) {
            return Err(Error::Infeasible(format!(
                "overall cash share {overall} is outside [0, 1]"
            )));
        }
        let w: Vec<f64> = self.stores.iter().map(|s| weights.weight(&s.stats)).collect();
        let total_weight: f64 = w.iter().sum();
        if !(total_weight > 0.0) {
            return Err(Error::Infeasible(format!(
                "{weights} weights sum to zero; the overall share is undefined"
            )));
        }
        let value: Vec<f64> = self.stores.iter().map(StoreTax::full_cash_tax).collect();
        let better = |a: f64, b: f64| match sense {
            Sense::Max => b.partial_cmp(&a),
            Sense::Min => a.partial_cmp(&b),
        };

        let mut shares = vec![0.0; self.stores.len()];
        // zero-weight stores do not touch the constraint; put them on the better bound
        for i in (0..shares.len()).filter(|&i| w[i] == 0.0) {
            if better(value[i], 0.0) == Some(Ordering::Less) {
                shares[i] = 1.0;
            }
        }

        let mut order: Vec<usize> = (0..shares.len()).filter(|&i| w[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            better(value[a] / w[a], value[b] / w[b])
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.stores[a].name().cmp(self.stores[b].name()))
        });

        let mut remaining = overall * total_weight;
        for i in order {
            if remaining <= SHARE_SNAP * total_weight {
                break;
            }
            let mut take = (remaining / w[i]).min(1.0);
            if take > 1.0 - SHARE_SNAP {
                take = 1.0;
            }
            shares[i] = take;
            remaining -= take * w[i];
        }

        let label = format!("{sense} at overall {overall} ({weights}-weighted)");
        let scenario = CashShareScenario::new(
            label,
            self.stores
                .iter()
                .zip(&shares)
                .map(|(s, &c)| (s.name().to_owned(), c))
                .collect(),
        )?;
        let mut result = self.aggregate(&scenario)?;
        result.extremal_shares = Some(scenario);
        Ok(result)
    }
}

pub fn aggregate(
    stores: &[StoreTax],
    scenario: &CashShareScenario,
    total_revenue: f64,
) -> Result<AggregateResult> {
    Market::new(stores.to_vec(), total_revenue)?.aggregate(scenario)
}

pub fn extremize_cash_shares(
    stores: &[StoreTax],
    overall_share: f64,
    sense: Sense,
    weights: ShareWeights,
    total_revenue: f64,
) -> Result<AggregateResult> {
    Market::new(stores.to_vec(), total_revenue)?.extremize(overall_share, sense, weights)
}

/// Parses a taxes file, `store,tax_per_txn` with the tax in NIS per cash
/// transaction, into (store, tax) pairs in file order.
pub fn parse_taxes(source: &str, content: &str) -> Result<Vec<(String, f64)>> {
    let table = Table::parse(source, content, &["store", "tax_per_txn"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (row, record) in &table.rows {
        let store = table.store(*row, record)?;
        if !seen.insert(store.clone()) {
            return Err(Error::format(source, *row, format!("duplicate store {store:?}")));
        }
        out.push((store, table.number(*row, record, "tax_per_txn")?));
    }
    Ok(out)
}

/// Pairs market statistics with taxes by store name. Both lists must name
/// the same stores; the result follows the order of `stats`.
pub fn join_taxes(stats: Vec<StoreStats>, taxes: &[(String, f64)]) -> Result<Vec<StoreTax>> {
    let by_name: BTreeMap<&str, f64> = taxes.iter().map(|(n, t)| (n.as_str(), *t)).collect();
    let known: HashSet<&str> = stats.iter().map(|s| s.name.as_str()).collect();
    if let Some((extra, _)) = taxes.iter().find(|(n, _)| !known.contains(n.as_str())) {
        return Err(Error::Invalid(format!("tax given for unknown store {extra:?}")));
    }
    stats
        .into_iter()
        .map(|s| {
            let tax = *by_name
                .get(s.name.as_str())
                .ok_or_else(|| Error::Invalid(format!("no tax given for store {:?}", s.name)))?;
            Ok(StoreTax::new(s, tax))
        })
        .collect()
}

/// Contents of a scenario file: `store=share` lines, plus the reserved keys
/// `overall=` (target for extremization) and `label=`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioFile {
    pub label: Option<String>,
    pub overall: Option<f64>,
    pub shares: BTreeMap<String, f64>,
}

impl ScenarioFile {
    pub fn parse(source: &str, content: &str) -> Result<Self> {
        let mut file = ScenarioFile::default();
        for (i, line) in content.lines().enumerate() {
            let row = i as u64 + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(source, row, format!("expected key=value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "label" {
                if file.label.replace(value.to_owned()).is_some() {
                    return Err(Error::format(source, row, "label given twice"));
                }
                continue;
            }
            let share: f64 = value
                .parse()
                .map_err(|_| Error::format(source, row, format!("{key}: {value:?} is not a number")))?;
            if !(0.0..=1.0).contains(&share) {
                return Err(Error::format(
                    source,
                    row,
                    format!("{key}: share {share} is outside [0, 1]"),
                ));
            }
            if key == "overall" {
                if file.overall.replace(share).is_some() {
                    return Err(Error::format(source, row, "overall given twice"));
                }
            } else if file.shares.insert(key.to_owned(), share).is_some() {
                return Err(Error::format(source, row, format!("store {key:?} given twice")));
            }
        }
        Ok(file)
    }

    pub fn scenario(&self, default_label: &str) -> Result<CashShareScenario> {
        CashShareScenario::new(
            self.label.clone().unwrap_or_else(|| default_label.to_owned()),
            self.shares.clone(),
        )
    }
}

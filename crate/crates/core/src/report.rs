//! Table-style reports and per-capita / share-of-revenue metrics.
//!
//! Human-readable tables print money to whole NIS and per-transaction taxes
//! to four decimals. The machine-readable [`KeyValueDoc`] carries the same
//! quantities at full precision.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::scenario::{AggregateResult, Market, Sense, ShareWeights};

/// Facts about the economy the totals are scaled against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportContext {
    /// Total annual market revenue, NIS.
    pub total_revenue: f64,
    pub population: f64,
    /// NIS per USD.
    pub exchange_rate: f64,
}

impl ReportContext {
    /// Israel, 2013: FMCG revenue, population and average exchange rate.
    pub const ISRAEL_2013: ReportContext = ReportContext {
        total_revenue: 40.8e9,
        population: 8.1e6,
        exchange_rate: 3.6097,
    };

    pub fn new(total_revenue: f64, population: f64, exchange_rate: f64) -> Result<Self> {
        for (name, v) in [
            ("total revenue", total_revenue),
            ("population", population),
            ("exchange rate", exchange_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(ReportContext {
            total_revenue,
            population,
            exchange_rate,
        })
    }
}

impl Default for ReportContext {
    fn default() -> Self {
        ReportContext::ISRAEL_2013
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedMetrics {
    pub per_capita_nis: f64,
    /// US cents per person.
    pub per_capita_cents: f64,
    pub share_of_revenue: f64,
}

pub fn derived_metrics(total_tax: f64, ctx: &ReportContext) -> DerivedMetrics {
    let per_capita_nis = total_tax / ctx.population;
    DerivedMetrics {
        per_capita_nis,
        per_capita_cents: per_capita_nis / ctx.exchange_rate * 100.0,
        share_of_revenue: total_tax / ctx.total_revenue,
    }
}

/// A flat, ordered `key=value` document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyValueDoc {
    entries: Vec<(String, String)>,
}

impl KeyValueDoc {
    pub fn new() -> Self {
        KeyValueDoc::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.get(key)?.parse().ok()
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn extend(&mut self, other: KeyValueDoc) {
        self.entries.extend(other.entries);
    }

    pub fn parse(content: &str) -> Result<Self> {
        let mut doc = KeyValueDoc::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
                source_name: "key-value document".into(),
                row: i as u64 + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            doc.push(k, v);
        }
        Ok(doc)
    }
}

impl fmt::Display for KeyValueDoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Formats a whole number with comma thousands separators.
pub fn group_thousands(v: i64) -> String {
    let digits = v.unsigned_abs().to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3 + 1);
    if v < 0 {
        out.push('-');
    }
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn whole(v: f64) -> i64 {
    v.round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub tax_per_transaction: f64,
    pub revenue_share: f64,
    pub transactions_thousands: f64,
    pub equal_tax: f64,
    pub max_tax: f64,
    pub min_tax: f64,
    pub max_share: f64,
    pub min_share: f64,
}

/// Which optional sections [`TableReport::render`] prints.
#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    pub per_capita: bool,
    pub share_of_revenue: bool,
}

/// Per-store taxes under equal, maximizing and minimizing cash shares.
#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub overall_share: f64,
    pub weights: ShareWeights,
    pub context: ReportContext,
    pub rows: Vec<ReportRow>,
    pub equal: AggregateResult,
    pub max: AggregateResult,
    pub min: AggregateResult,
}

impl TableReport {
    pub fn build(
        market: &Market,
        overall_share: f64,
        weights: ShareWeights,
        context: ReportContext,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&overall_share) {
            return Err(Error::Infeasible(format!(
                "overall cash share {overall_share} is outside [0, 1]"
            )));
        }
        let market = Market::new(market.stores().to_vec(), context.total_revenue)?;
        let equal = market.aggregate(&market.uniform_scenario(overall_share, "equal shares")?)?;
        let max = market.extremize(overall_share, Sense::Max, weights)?;
        let min = market.extremize(overall_share, Sense::Min, weights)?;

        for (label, r) in [("equal", &equal), ("max", &max), ("min", &min)] {
            let sum: f64 = r.per_store.iter().map(|s| s.tax).sum();
            if sum != r.total_tax {
                return Err(Error::Invariant(format!("{label} total differs from its rows")));
            }
        }
        for (label, r) in [("max", &max), ("min", &min)] {
            let shares = r.extremal_shares.as_ref().expect("extremize sets shares");
            let achieved = market.overall_share(shares, weights)?;
            if (achieved - overall_share).abs() > 1e-9 {
                return Err(Error::Invariant(format!(
                    "{label} scenario averages {achieved}, not {overall_share}"
                )));
            }
        }
        let slack = 1e-9 * max.total_tax.abs().max(1.0);
        if !(min.total_tax <= equal.total_tax + slack && equal.total_tax <= max.total_tax + slack) {
            return Err(Error::Invariant(
                "equal-share total is not between the min and max totals".into(),
            ));
        }

        let rows = market
            .stores()
            .iter()
            .enumerate()
            .map(|(i, s)| ReportRow {
                name: s.name().to_owned(),
                tax_per_transaction: s.tax_per_transaction,
                revenue_share: s.stats.revenue_share,
                transactions_thousands: s.stats.annual_transactions_thousands,
                equal_tax: equal.per_store[i].tax,
                max_tax: max.per_store[i].tax,
                min_tax: min.per_store[i].tax,
                max_share: max.per_store[i].cash_share,
                min_share: min.per_store[i].cash_share,
            })
            .collect();
        Ok(TableReport {
            overall_share,
            weights,
            context,
            rows,
            equal,
            max,
            min,
        })
    }

    pub fn metrics(&self) -> [(&'static str, DerivedMetrics); 3] {
        [
            ("min", derived_metrics(self.min.total_tax, &self.context)),
            ("equal", derived_metrics(self.equal.total_tax, &self.context)),
            ("max", derived_metrics(self.max.total_tax, &self.context)),
        ]
    }

    /// Printed totals are sums of the printed (rounded) rows.
    pub fn printed_totals(&self) -> [i64; 3] {
        let mut t = [0i64; 3];
        for r in &self.rows {
            t[0] += whole(r.equal_tax);
            t[1] += whole(r.max_tax);
            t[2] += whole(r.min_tax);
        }
        t
    }

    pub fn render(&self, options: RenderOptions) -> String {
        let header = [
            "Store type",
            "Tax/txn (NIS)",
            "Revenue (%)",
            "Txns (1,000s)",
            "Equal shares",
            "Maximum",
            "Minimum",
        ];
        let mut cells: Vec<[String; 7]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    format!("{:.4}", r.tax_per_transaction),
                    format!("{:.2}", r.revenue_share * 100.0),
                    group_thousands(whole(r.transactions_thousands)),
                    group_thousands(whole(r.equal_tax)),
                    group_thousands(whole(r.max_tax)),
                    group_thousands(whole(r.min_tax)),
                ]
            })
            .collect();
        let [eq, mx, mn] = self.printed_totals();
        let revenue_pct: f64 = self.rows.iter().map(|r| (r.revenue_share * 1e4).round() / 100.0).sum();
        let txns: i64 = self.rows.iter().map(|r| whole(r.transactions_thousands)).sum();
        cells.push([
            "Total".into(),
            String::new(),
            format!("{revenue_pct:.2}"),
            group_thousands(txns),
            group_thousands(eq),
            group_thousands(mx),
            group_thousands(mn),
        ]);

        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[String]| {
            for (i, c) in row.iter().enumerate() {
                if i == 0 {
                    let _ = write!(out, "{c:<w$}", w = width[0]);
                } else {
                    let _ = write!(out, "  {c:>w$}", w = width[i]);
                }
            }
            out.push('\n');
        };
        line(&mut out, &header.map(String::from));
        let rule_len = width.iter().sum::<usize>() + 2 * (width.len() - 1);
        out.push_str(&"-".repeat(rule_len));
        out.push('\n');
        let last = cells.len() - 1;
        for (i, row) in cells.iter().enumerate() {
            if i == last {
                out.push_str(&"-".repeat(rule_len));
                out.push('\n');
            }
            line(&mut out, row);
        }

        let _ = writeln!(
            out,
            "\nOverall cash share {:.1}% ({}-weighted); rounding tax in NIS per year.",
            self.overall_share * 100.0,
            self.weights
        );
        for (label, r) in [("Maximum", &self.max), ("Minimum", &self.min)] {
            let shares: Vec<String> = r
                .per_store
                .iter()
                .map(|s| format!("{} {:.1}%", s.name, s.cash_share * 100.0))
                .collect();
            let _ = writeln!(out, "{label} at cash shares: {}", shares.join(", "));
        }
        if options.share_of_revenue {
            let parts: Vec<String> = self
                .metrics()
                .iter()
                .map(|(k, m)| format!("{k} {:.5}%", m.share_of_revenue * 100.0))
                .collect();
            let _ = writeln!(
                out,
                "Share of revenue (NIS {:.1} billion): {}",
                self.context.total_revenue / 1e9,
                parts.join(", ")
            );
        }
        if options.per_capita {
            let parts: Vec<String> = self
                .metrics()
                .iter()
                .map(|(k, m)| format!("{k} NIS {:.4} ({:.2}¢)", m.per_capita_nis, m.per_capita_cents))
                .collect();
            let _ = writeln!(
                out,
                "Per person ({:.1} million people, $1 = NIS {}): {}",
                self.context.population / 1e6,
                self.context.exchange_rate,
                parts.join(", ")
            );
        }
        out
    }

    pub fn key_values(&self) -> KeyValueDoc {
        let mut doc = KeyValueDoc::new();
        doc.push("report.overall_share", self.overall_share);
        doc.push("report.weights", self.weights);
        doc.push("report.total_revenue", self.context.total_revenue);
        doc.push("report.population", self.context.population);
        doc.push("report.exchange_rate", self.context.exchange_rate);
        for r in &self.rows {
            let n = &r.name;
            doc.push(format!("{n}.tax_per_txn"), r.tax_per_transaction);
            doc.push(format!("{n}.revenue_share"), r.revenue_share);
            doc.push(format!("{n}.transactions_thousands"), r.transactions_thousands);
            doc.push(format!("{n}.equal_tax"), r.equal_tax);
            doc.push(format!("{n}.max_tax"), r.max_tax);
            doc.push(format!("{n}.min_tax"), r.min_tax);
            doc.push(format!("{n}.max_share"), r.max_share);
            doc.push(format!("{n}.min_share"), r.min_share);
        }
        let txns: f64 = self.rows.iter().map(|r| r.transactions_thousands).sum();
        doc.push("total.transactions_thousands", txns);
        doc.push("total.equal_tax", self.equal.total_tax);
        doc.push("total.max_tax", self.max.total_tax);
        doc.push("total.min_tax", self.min.total_tax);
        for (k, m) in self.metrics() {
            doc.push(format!("total.{k}.share_of_revenue"), m.share_of_revenue);
            doc.push(format!("total.{k}.per_capita_nis"), m.per_capita_nis);
            doc.push(format!("total.{k}.per_capita_cents"), m.per_capita_cents);
        }
        doc
    }
}

//! Price-ending and basket-size distributions per store type, plus the
//! delimited-text formats they are loaded from.
//!
//! Three comma-separated files describe a set of store types. Blank lines
//! and lines starting with `#` are ignored; column order is free but every
//! column must be present and no other column is accepted.
//!
//! * endings: `store,d0,d1,...,d9`, one row per store, the probability
//!   that a posted price ends in each digit (minor units).
//! * baskets: `store,size,prob`, one row per (store, size). Sizes are
//!   explicit item counts. An open-ended top bucket ("15 or more") must be
//!   written as a single representative size.
//! * profiles: `store,revenue_share,annual_transactions_thousands`.
//!
//! Probabilities must sum to one within [`PROBABILITY_TOLERANCE`]; nothing
//! is renormalized on load.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use crate::error::{Error, Result};

pub const PROBABILITY_TOLERANCE: f64 = 1e-9;
pub const REVENUE_SHARE_TOLERANCE: f64 = 1e-6;

pub const ENDINGS_FILE: &str = "endings.csv";
pub const BASKETS_FILE: &str = "baskets.csv";
pub const PROFILES_FILE: &str = "profiles.csv";

/// Names that collide with keys of the machine-readable report.
const RESERVED_NAMES: &[&str] = &["total", "overall", "label", "report"];

/// Probability that a posted price ends in each digit 0..=9.
#[derive(Debug, Clone, PartialEq)]
pub struct EndingDistribution([f64; 10]);

impl EndingDistribution {
    pub fn new(p: [f64; 10]) -> Result<Self> {
        check_masses(p.iter().copied()).map_err(Error::Invalid)?;
        Ok(EndingDistribution(p))
    }

    pub fn point_mass(digit: usize) -> Self {
        assert!(digit < 10, "digit out of range");
        let mut p = [0.0; 10];
        p[digit] = 1.0;
        EndingDistribution(p)
    }

    pub fn uniform() -> Self {
        EndingDistribution([0.1; 10])
    }

    pub fn probs(&self) -> &[f64; 10] {
        &self.0
    }

    pub fn prob(&self, digit: usize) -> f64 {
        self.0[digit]
    }
}

/// Probability mass over basket sizes (item counts, all >= 1), sorted by size.
#[derive(Debug, Clone, PartialEq)]
pub struct BasketSizeDistribution {
    entries: Vec<(u32, f64)>,
}

impl BasketSizeDistribution {
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("basket distribution is empty".into()));
        }
        entries.sort_by_key(|&(n, _)| n);
        if entries[0].0 == 0 {
            return Err(Error::Invalid("basket sizes start at 1".into()));
        }
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid(format!("basket size {} listed twice", w[0].0)));
        }
        check_masses(entries.iter().map(|&(_, q)| q)).map_err(Error::Invalid)?;
        Ok(BasketSizeDistribution { entries })
    }

    pub fn point_mass(size: u32) -> Result<Self> {
        BasketSizeDistribution::new(vec![(size, 1.0)])
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn max_size(&self) -> u32 {
        self.entries.last().map_or(0, |&(n, _)| n)
    }

    /// Expected number of items per basket.
    pub fn mean(&self) -> f64 {
        self.entries.iter().map(|&(n, q)| f64::from(n) * q).sum()
    }
}

pub fn mean_basket_size(baskets: &BasketSizeDistribution) -> f64 {
    baskets.mean()
}

/// Market-level facts about one store type.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreStats {
    pub name: String,
    /// Fraction of total revenue, in [0, 1].
    pub revenue_share: f64,
    /// Annual number of transactions, in thousands.
    pub annual_transactions_thousands: f64,
}

impl StoreStats {
    pub fn new(
        name: impl Into<String>,
        revenue_share: f64,
        annual_transactions_thousands: f64,
    ) -> Result<Self> {
        let name = name.into();
        validate_store_name(&name).map_err(Error::Invalid)?;
        if !(0.0..=1.0).contains(&revenue_share) {
            return Err(Error::Invalid(format!(
                "{name}: revenue share {revenue_share} is outside [0, 1]"
            )));
        }
        if !(annual_transactions_thousands > 0.0 && annual_transactions_thousands.is_finite()) {
            return Err(Error::Invalid(format!(
                "{name}: annual transactions must be positive"
            )));
        }
        Ok(StoreStats {
            name,
            revenue_share,
            annual_transactions_thousands,
        })
    }

    pub fn annual_transactions(&self) -> f64 {
        self.annual_transactions_thousands * 1000.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoreProfile {
    pub stats: StoreStats,
    pub endings: EndingDistribution,
    pub baskets: BasketSizeDistribution,
}

impl StoreProfile {
    pub fn name(&self) -> &str {
        &self.stats.name
    }

    pub fn avg_items_per_trip(&self) -> f64 {
        self.baskets.mean()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    /// Allowed gap between the summed revenue shares and 1.
    pub share_tolerance: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            share_tolerance: REVENUE_SHARE_TOLERANCE,
        }
    }
}

fn check_masses(masses: impl Iterator<Item = f64>) -> std::result::Result<(), String> {
    let mut sum = 0.0;
    for q in masses {
        if !(0.0..=1.0).contains(&q) {
            return Err(format!("probability {q} is outside [0, 1]"));
        }
        sum += q;
    }
    if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
        return Err(format!(
            "probabilities sum to {sum}, not 1 (tolerance {PROBABILITY_TOLERANCE:e})"
        ));
    }
    Ok(())
}

fn validate_store_name(name: &str) -> std::result::Result<(), String> {
    if name.is_empty() {
        return Err("store name is empty".into());
    }
    if !name
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(format!(
            "store name {name:?} may only contain ASCII letters, digits, '_' and '-'"
        ));
    }
    if RESERVED_NAMES.contains(&name) {
        return Err(format!("store name {name:?} is reserved"));
    }
    Ok(())
}

/// A parsed CSV table with header-to-index resolution.
pub(crate) struct Table<'a> {
    source: &'a str,
    columns: HashMap<String, usize>,
    pub(crate) rows: Vec<(u64, StringRecord)>,
}

impl<'a> Table<'a> {
    pub(crate) fn parse(source: &'a str, content: &str, expected: &[&str]) -> Result<Self> {
        let mut reader = ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(Trim::All)
            .flexible(true)
            .from_reader(content.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::format(source, 1, e.to_string()))?
            .clone();
        let header_row = header.position().map_or(1, |p| p.line());
        let mut columns = HashMap::new();
        for (i, name) in header.iter().enumerate() {
            if !expected.contains(&name) {
                return Err(Error::format(
                    source,
                    header_row,
                    format!("unknown column {name:?}"),
                ));
            }
            if columns.insert(name.to_owned(), i).is_some() {
                return Err(Error::format(
                    source,
                    header_row,
                    format!("column {name:?} appears twice"),
                ));
            }
        }
        if let Some(missing) = expected.iter().find(|c| !columns.contains_key(**c)) {
            return Err(Error::format(
                source,
                header_row,
                format!("missing column {missing:?}"),
            ));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let row = e.position().map_or(0, |p| p.line());
                Error::format(source, row, e.to_string())
            })?;
            let row = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(Error::format(
                    source,
                    row,
                    format!("expected {} fields, found {}", header.len(), record.len()),
                ));
            }
            rows.push((row, record));
        }
        Ok(Table {
            source,
            columns,
            rows,
        })
    }

    fn get<'r>(&self, record: &'r StringRecord, column: &str) -> &'r str {
        &record[self.columns[column]]
    }

    pub(crate) fn number(&self, row: u64, record: &StringRecord, column: &str) -> Result<f64> {
        let raw = self.get(record, column);
        let v: f64 = raw.parse().map_err(|_| {
            Error::format(self.source, row, format!("{column}: {raw:?} is not a number"))
        })?;
        if !v.is_finite() {
            return Err(Error::format(self.source, row, format!("{column}: {raw:?} is not finite")));
        }
        Ok(v)
    }

    fn probability(&self, row: u64, record: &StringRecord, column: &str) -> Result<f64> {
        let v = self.number(row, record, column)?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::format(
                self.source,
                row,
                format!("{column}: probability {v} is outside [0, 1]"),
            ));
        }
        Ok(v)
    }

    pub(crate) fn store(&self, row: u64, record: &StringRecord) -> Result<String> {
        let name = self.get(record, "store");
        validate_store_name(name).map_err(|m| Error::format(self.source, row, m))?;
        Ok(name.to_owned())
    }
}

const DIGIT_COLUMNS: [&str; 10] = ["d0", "d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8", "d9"];

/// Parses an endings file into (store, distribution) pairs in file order.
pub fn parse_endings(source: &str, content: &str) -> Result<Vec<(String, EndingDistribution)>> {
    let mut expected = vec!["store"];
    expected.extend(DIGIT_COLUMNS);
    let table = Table::parse(source, content, &expected)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    for (row, record) in &table.rows {
        let store = table.store(*row, record)?;
        if !seen.insert(store.clone()) {
            return Err(Error::format(source, *row, format!("duplicate store {store:?}")));
        }
        let mut p = [0.0; 10];
        for (d, column) in DIGIT_COLUMNS.iter().enumerate() {
            p[d] = table.probability(*row, record, column)?;
        }
        let dist = EndingDistribution::new(p)
            .map_err(|e| Error::format(source, *row, format!("{store}: {}", inner(e))))?;
        out.push((store, dist));
    }
    Ok(out)
}

/// Parses a long-format baskets file. Stores keep the order of their first row.
pub fn parse_baskets(source: &str, content: &str) -> Result<Vec<(String, BasketSizeDistribution)>> {
    let table = Table::parse(source, content, &["store", "size", "prob"])?;
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, (u64, BTreeMap<u32, f64>)> = HashMap::new();
    for (row, record) in &table.rows {
        let store = table.store(*row, record)?;
        let raw = table.get(record, "size");
        let size: u32 = raw.parse().map_err(|_| {
            Error::format(source, *row, format!("size: {raw:?} is not a positive integer"))
        })?;
        if size == 0 {
            return Err(Error::format(source, *row, "size: basket sizes start at 1"));
        }
        let prob = table.probability(*row, record, "prob")?;
        let entry = grouped.entry(store.clone()).or_insert_with(|| {
            order.push(store.clone());
            (*row, BTreeMap::new())
        });
        entry.0 = *row;
        if entry.1.insert(size, prob).is_some() {
            return Err(Error::format(
                source,
                *row,
                format!("{store}: size {size} listed twice"),
            ));
        }
    }
    order
        .into_iter()
        .map(|store| {
            let (last_row, sizes) = grouped.remove(&store).expect("grouped store");
            let dist = BasketSizeDistribution::new(sizes.into_iter().collect())
                .map_err(|e| Error::format(source, last_row, format!("{store}: {}", inner(e))))?;
            Ok((store, dist))
        })
        .collect()
}

/// Parses a profiles file and checks that revenue shares sum to one.
pub fn parse_store_stats(source: &str, content: &str, options: &LoadOptions) -> Result<Vec<StoreStats>> {
    let table = Table::parse(
        source,
        content,
        &["store", "revenue_share", "annual_transactions_thousands"],
    )?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(table.rows.len());
    let mut last_row = 1;
    for (row, record) in &table.rows {
        last_row = *row;
        let store = table.store(*row, record)?;
        if !seen.insert(store.clone()) {
            return Err(Error::format(source, *row, format!("duplicate store {store:?}")));
        }
        let share = table.number(*row, record, "revenue_share")?;
        let txns = table.number(*row, record, "annual_transactions_thousands")?;
        let stats = StoreStats::new(store, share, txns)
            .map_err(|e| Error::format(source, *row, inner(e)))?;
        out.push(stats);
    }
    if out.is_empty() {
        return Err(Error::format(source, last_row, "no store rows"));
    }
    let total: f64 = out.iter().map(|s| s.revenue_share).sum();
    if (total - 1.0).abs() > options.share_tolerance {
        return Err(Error::format(
            source,
            last_row,
            format!(
                "revenue shares sum to {total}, not 1 (tolerance {:e})",
                options.share_tolerance
            ),
        ));
    }
    Ok(out)
}

/// Joins the three files into validated profiles, in profiles-file order.
/// Every store must appear in all three files.
pub fn load_profiles(
    endings: &str,
    baskets: &str,
    profiles: &str,
    options: &LoadOptions,
) -> Result<Vec<StoreProfile>> {
    let stats = parse_store_stats(PROFILES_FILE, profiles, options)?;
    let mut endings: HashMap<_, _> = parse_endings(ENDINGS_FILE, endings)?.into_iter().collect();
    let mut baskets: HashMap<_, _> = parse_baskets(BASKETS_FILE, baskets)?.into_iter().collect();

    let mut out = Vec::with_capacity(stats.len());
    for stats in stats {
        let e = endings.remove(&stats.name).ok_or_else(|| {
            Error::Invalid(format!("store {:?} has no row in {ENDINGS_FILE}", stats.name))
        })?;
        let b = baskets.remove(&stats.name).ok_or_else(|| {
            Error::Invalid(format!("store {:?} has no rows in {BASKETS_FILE}", stats.name))
        })?;
        out.push(StoreProfile {
            stats,
            endings: e,
            baskets: b,
        });
    }
    let extra = endings.keys().chain(baskets.keys()).min();
    if let Some(extra) = extra {
        return Err(Error::Invalid(format!(
            "store {extra:?} is not listed in {PROFILES_FILE}"
        )));
    }
    Ok(out)
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Loads `endings.csv`, `baskets.csv` and `profiles.csv` from a directory.
pub fn load_profile_dir(dir: &Path, options: &LoadOptions) -> Result<Vec<StoreProfile>> {
    let endings = read_file(&dir.join(ENDINGS_FILE))?;
    let baskets = read_file(&dir.join(BASKETS_FILE))?;
    let profiles = read_file(&dir.join(PROFILES_FILE))?;
    load_profiles(&endings, &baskets, &profiles, options)
}

/// Loads only `profiles.csv` from a directory.
pub fn load_stats_dir(dir: &Path, options: &LoadOptions) -> Result<Vec<StoreStats>> {
    let path = dir.join(PROFILES_FILE);
    parse_store_stats(PROFILES_FILE, &read_file(&path)?, options)
}

// f64 Display prints the shortest string that parses back to the same value.

pub fn write_endings(profiles: &[StoreProfile]) -> String {
    let mut out = String::from("store");
    for c in DIGIT_COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for p in profiles {
        out.push_str(p.name());
        for q in p.endings.probs() {
            let _ = write!(out, ",{q}");
        }
        out.push('\n');
    }
    out
}

pub fn write_baskets(profiles: &[StoreProfile]) -> String {
    let mut out = String::from("store,size,prob\n");
    for p in profiles {
        for (n, q) in p.baskets.entries() {
            let _ = writeln!(out, "{},{n},{q}", p.name());
        }
    }
    out
}

pub fn write_store_stats<'a>(stats: impl IntoIterator<Item = &'a StoreStats>) -> String {
    let mut out = String::from("store,revenue_share,annual_transactions_thousands\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{},{},{}",
            s.name, s.revenue_share, s.annual_transactions_thousands
        );
    }
    out
}

fn inner(e: Error) -> String {
    match e {
        Error::Invalid(m) => m,
        other => other.to_string(),
    }
}

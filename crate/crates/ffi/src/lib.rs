//! C ABI for the `roundtax` library.
//!
//! Objects cross the boundary as opaque handles created by `rt_*_new` /
//! `rt_*_load` functions and released with the matching `rt_*_free`.
//! Every fallible call returns an [`RtStatus`]; on failure a description is
//! available from [`rt_last_error`] on the same thread until the next call.
//!
//! Status values line up with the CLI exit codes: 2 input, 3 infeasible,
//! 4 internal invariant breach.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use roundtax::distributions::{self, LoadOptions, StoreProfile, StoreStats};
use roundtax::report::{derived_metrics, ReportContext};
use roundtax::scenario::{CashShareScenario, Market, Sense, ShareWeights, StoreTax};
use roundtax::simulation::{simulate, SimulationConfig};
use roundtax::{expected_tax_per_transaction, Error, MinorUnits, RoundingRule};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    /// A required pointer was null or a string was not UTF-8.
    NullOrEncoding = 1,
    /// Bad input data, file or argument.
    Input = 2,
    Infeasible = 3,
    Internal = 4,
    /// An index or store name did not refer to an existing entry.
    NotFound = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtSense {
    Max = 0,
    Min = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtWeights {
    Revenue = 0,
    Transactions = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RtSimulationResult {
    pub mean_tax: f64,
    pub std_error: f64,
    pub n: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RtDerivedMetrics {
    pub per_capita_nis: f64,
    pub per_capita_cents: f64,
    pub share_of_revenue: f64,
}

/// A parsed rounding rule.
pub struct RtRule(RoundingRule);

/// A validated set of store profiles.
pub struct RtProfileSet {
    profiles: Vec<StoreProfile>,
    names: Vec<CString>,
}

/// Store types with per-transaction taxes, built up one store at a time.
pub struct RtMarket {
    stores: Vec<StoreTax>,
    total_revenue: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let msg = CString::new(message).unwrap_or_else(|_| CString::new("error message contained NUL").expect("no NUL"));
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(err: Error) -> RtStatus {
    let status = match err {
        Error::Infeasible(_) => RtStatus::Infeasible,
        Error::Invariant(_) => RtStatus::Internal,
        _ => RtStatus::Input,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> RtStatus {
    set_error(format!("{what} is null"));
    RtStatus::NullOrEncoding
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, RtStatus> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        RtStatus::NullOrEncoding
    })
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(status) => return status,
        }
    };
}

macro_rules! try_rt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return fail(err),
        }
    };
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `rt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- rules --------------------------------------------------------------

/// Parses `israel_2008`, `symmetric_<grid>` or `grid=..; down=..; up=..`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_rule_parse(text: *const c_char, out: *mut *mut RtRule) -> RtStatus {
    clear_error();
    if out.is_null() {
        return null("out");
    }
    let text = try_status!(str_arg(text, "text"));
    let rule = try_rt!(text.parse::<RoundingRule>());
    *out = Box::into_raw(Box::new(RtRule(rule)));
    RtStatus::Ok
}

/// # Safety
/// `rule` must be null or a handle from [`rt_rule_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_rule_free(rule: *mut RtRule) {
    if !rule.is_null() {
        drop(Box::from_raw(rule));
    }
}

/// Grid size in minor units, or 0 for a null handle.
///
/// # Safety
/// `rule` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_rule_grid(rule: *const RtRule) -> u32 {
    rule.as_ref().map_or(0, |r| r.0.grid())
}

/// Rounds a non-negative amount in minor units.
///
/// # Safety
/// `rule` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_round_amount(rule: *const RtRule, amount: i64, out: *mut i64) -> RtStatus {
    clear_error();
    let (Some(rule), false) = (rule.as_ref(), out.is_null()) else {
        return null("rule or out");
    };
    *out = try_rt!(rule.0.round_amount(MinorUnits(amount))).value();
    RtStatus::Ok
}

/// Signed rounding delta in minor units (positive: customer pays more).
///
/// # Safety
/// `rule` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_rounding_delta(rule: *const RtRule, amount: i64, out: *mut i64) -> RtStatus {
    clear_error();
    let (Some(rule), false) = (rule.as_ref(), out.is_null()) else {
        return null("rule or out");
    };
    *out = try_rt!(rule.0.rounding_delta(MinorUnits(amount))).value();
    RtStatus::Ok
}

// ---- profiles -----------------------------------------------------------

fn profile_set(profiles: Vec<StoreProfile>) -> RtProfileSet {
    let names = profiles
        .iter()
        .map(|p| CString::new(p.name()).expect("store names are validated ASCII"))
        .collect();
    RtProfileSet { profiles, names }
}

/// Loads `endings.csv`, `baskets.csv` and `profiles.csv` from `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_profiles_load_dir(
    dir: *const c_char,
    share_tolerance: f64,
    out: *mut *mut RtProfileSet,
) -> RtStatus {
    clear_error();
    if out.is_null() {
        return null("out");
    }
    let dir = try_status!(str_arg(dir, "dir"));
    let profiles = try_rt!(distributions::load_profile_dir(
        Path::new(dir),
        &LoadOptions { share_tolerance }
    ));
    *out = Box::into_raw(Box::new(profile_set(profiles)));
    RtStatus::Ok
}

/// Loads profiles from in-memory CSV contents of the three files.
///
/// # Safety
/// The three strings must be NUL-terminated and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_profiles_load_csv(
    endings: *const c_char,
    baskets: *const c_char,
    profiles: *const c_char,
    share_tolerance: f64,
    out: *mut *mut RtProfileSet,
) -> RtStatus {
    clear_error();
    if out.is_null() {
        return null("out");
    }
    let endings = try_status!(str_arg(endings, "endings"));
    let baskets = try_status!(str_arg(baskets, "baskets"));
    let profiles = try_status!(str_arg(profiles, "profiles"));
    let loaded = try_rt!(distributions::load_profiles(
        endings,
        baskets,
        profiles,
        &LoadOptions { share_tolerance }
    ));
    *out = Box::into_raw(Box::new(profile_set(loaded)));
    RtStatus::Ok
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_profiles_free(set: *mut RtProfileSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_profiles_len(set: *const RtProfileSet) -> usize {
    set.as_ref().map_or(0, |s| s.profiles.len())
}

/// Store name at `index`, or null when out of range. Owned by the set.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_profiles_name(set: *const RtProfileSet, index: usize) -> *const c_char {
    set.as_ref()
        .and_then(|s| s.names.get(index))
        .map_or(ptr::null(), |n| n.as_ptr())
}

unsafe fn profile_at<'a>(set: *const RtProfileSet, index: usize) -> Result<&'a StoreProfile, RtStatus> {
    let set = set.as_ref().ok_or_else(|| null("set"))?;
    set.profiles.get(index).ok_or_else(|| {
        set_error(format!("profile index {index} out of range ({} profiles)", set.profiles.len()));
        RtStatus::NotFound
    })
}

/// Exact expected tax per cash transaction, NIS.
///
/// # Safety
/// `set` and `rule` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_expected_tax(
    set: *const RtProfileSet,
    index: usize,
    rule: *const RtRule,
    out: *mut f64,
) -> RtStatus {
    clear_error();
    let profile = try_status!(profile_at(set, index));
    let (Some(rule), false) = (rule.as_ref(), out.is_null()) else {
        return null("rule or out");
    };
    *out = try_rt!(expected_tax_per_transaction(profile, &rule.0));
    RtStatus::Ok
}

/// Monte Carlo estimate for one store type. Deterministic in `seed`.
///
/// # Safety
/// `set` and `rule` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_simulate(
    set: *const RtProfileSet,
    index: usize,
    rule: *const RtRule,
    n_transactions: u64,
    seed: u64,
    out: *mut RtSimulationResult,
) -> RtStatus {
    clear_error();
    let profile = try_status!(profile_at(set, index));
    let (Some(rule), false) = (rule.as_ref(), out.is_null()) else {
        return null("rule or out");
    };
    let r = try_rt!(simulate(
        profile,
        &SimulationConfig::new(n_transactions, seed, rule.0.clone())
    ));
    *out = RtSimulationResult {
        mean_tax: r.mean_tax,
        std_error: r.std_error,
        n: r.n,
    };
    RtStatus::Ok
}

// ---- market -------------------------------------------------------------

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_market_new(total_revenue: f64, out: *mut *mut RtMarket) -> RtStatus {
    clear_error();
    if out.is_null() {
        return null("out");
    }
    if !(total_revenue > 0.0 && total_revenue.is_finite()) {
        set_error("total revenue must be positive");
        return RtStatus::Input;
    }
    *out = Box::into_raw(Box::new(RtMarket {
        stores: Vec::new(),
        total_revenue,
    }));
    RtStatus::Ok
}

/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_market_free(market: *mut RtMarket) {
    if !market.is_null() {
        drop(Box::from_raw(market));
    }
}

/// Appends a store type. Stores keep insertion order in every array argument.
///
/// # Safety
/// `market` must be a live handle and `name` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rt_market_add_store(
    market: *mut RtMarket,
    name: *const c_char,
    revenue_share: f64,
    annual_transactions_thousands: f64,
    tax_per_transaction: f64,
) -> RtStatus {
    clear_error();
    let Some(market) = market.as_mut() else {
        return null("market");
    };
    let name = try_status!(str_arg(name, "name"));
    let stats = try_rt!(StoreStats::new(name, revenue_share, annual_transactions_thousands));
    let mut stores = market.stores.clone();
    stores.push(StoreTax::new(stats, tax_per_transaction));
    // validates uniqueness and finiteness
    try_rt!(Market::new(stores.clone(), market.total_revenue));
    market.stores = stores;
    RtStatus::Ok
}

/// # Safety
/// `market` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rt_market_len(market: *const RtMarket) -> usize {
    market.as_ref().map_or(0, |m| m.stores.len())
}

unsafe fn build_market(market: *const RtMarket) -> Result<Market, RtStatus> {
    let m = market.as_ref().ok_or_else(|| null("market"))?;
    Market::new(m.stores.clone(), m.total_revenue).map_err(fail)
}

/// Annual totals for explicit cash shares (`shares[i]` for store `i`).
/// `per_store_out` may be null; otherwise it receives `len` values.
///
/// # Safety
/// `shares` must point to `len` doubles, `per_store_out` must be null or
/// point to `len` writable doubles, and `total_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rt_market_aggregate(
    market: *const RtMarket,
    shares: *const f64,
    len: usize,
    per_store_out: *mut f64,
    total_out: *mut f64,
) -> RtStatus {
    clear_error();
    let m = try_status!(build_market(market));
    if shares.is_null() || total_out.is_null() {
        return null("shares or total_out");
    }
    if len != m.stores().len() {
        set_error(format!("expected {} shares, got {len}", m.stores().len()));
        return RtStatus::Input;
    }
    let shares = std::slice::from_raw_parts(shares, len);
    let scenario = try_rt!(CashShareScenario::new(
        "ffi",
        m.stores()
            .iter()
            .zip(shares)
            .map(|(s, &c)| (s.name().to_owned(), c))
            .collect()
    ));
    let r = try_rt!(m.aggregate(&scenario));
    if !per_store_out.is_null() {
        let out = std::slice::from_raw_parts_mut(per_store_out, len);
        for (o, s) in out.iter_mut().zip(&r.per_store) {
            *o = s.tax;
        }
    }
    *total_out = r.total_tax;
    RtStatus::Ok
}

/// Cash shares that maximize or minimize the annual total with the weighted
/// mean share fixed at `overall`. Writes `len` shares and the total.
///
/// # Safety
/// `shares_out` must point to `len` writable doubles and `total_out` must
/// be valid.
#[no_mangle]
pub unsafe extern "C" fn rt_market_extremize(
    market: *const RtMarket,
    overall: f64,
    sense: RtSense,
    weights: RtWeights,
    shares_out: *mut f64,
    len: usize,
    total_out: *mut f64,
) -> RtStatus {
    clear_error();
    let m = try_status!(build_market(market));
    if shares_out.is_null() || total_out.is_null() {
        return null("shares_out or total_out");
    }
    if len != m.stores().len() {
        set_error(format!("expected room for {} shares, got {len}", m.stores().len()));
        return RtStatus::Input;
    }
    let sense = match sense {
        RtSense::Max => Sense::Max,
        RtSense::Min => Sense::Min,
    };
    let weights = match weights {
        RtWeights::Revenue => ShareWeights::Revenue,
        RtWeights::Transactions => ShareWeights::Transactions,
    };
    let r = try_rt!(m.extremize(overall, sense, weights));
    let out = std::slice::from_raw_parts_mut(shares_out, len);
    for (o, s) in out.iter_mut().zip(&r.per_store) {
        *o = s.cash_share;
    }
    *total_out = r.total_tax;
    RtStatus::Ok
}

/// Per-capita and share-of-revenue figures for an annual total.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_derived_metrics(
    total_tax: f64,
    population: f64,
    exchange_rate: f64,
    total_revenue: f64,
    out: *mut RtDerivedMetrics,
) -> RtStatus {
    clear_error();
    if out.is_null() {
        return null("out");
    }
    let ctx = try_rt!(ReportContext::new(total_revenue, population, exchange_rate));
    let m = derived_metrics(total_tax, &ctx);
    *out = RtDerivedMetrics {
        per_capita_nis: m.per_capita_nis,
        per_capita_cents: m.per_capita_cents,
        share_of_revenue: m.share_of_revenue,
    };
    RtStatus::Ok
}

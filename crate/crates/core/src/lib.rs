//! Estimating the consumer cost of cash rounding.
//!
//! When the smallest coins are withdrawn, cash totals are rounded to the
//! nearest payable amount and the customer absorbs the difference. This
//! crate computes that rounding tax per transaction, exactly via modular
//! convolution of price-ending distributions ([`expectation`]) or by
//! two-stage Monte Carlo simulation ([`simulation`]), and scales it up to
//! economy-wide totals under cash-share scenarios ([`scenario`]).

pub mod distributions;
pub mod error;
pub mod expectation;
pub mod money;
pub mod report;
pub mod scenario;
pub mod simulation;

pub use distributions::{
    load_profile_dir, load_profiles, mean_basket_size, BasketSizeDistribution, EndingDistribution,
    LoadOptions, StoreProfile, StoreStats,
};
pub use error::{Error, Result};
pub use expectation::{convolve_endings, expected_tax_per_transaction, ResidueDistribution};
pub use money::{Direction, MinorUnits, RoundingRule};
pub use report::{derived_metrics, DerivedMetrics, ReportContext, TableReport};
pub use scenario::{
    aggregate, extremize_cash_shares, AggregateResult, CashShareScenario, Market, Sense,
    ShareWeights, StoreTax,
};
pub use simulation::{simulate, SimulationConfig, SimulationResult};

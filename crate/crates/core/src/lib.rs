//! Tradeability premiums of illiquid real options.
//!
//! An exchange option on a project value `E` driven by a spectrally negative
//! exponential Lévy process, priced in units of a liquid asset `S`. The crate
//! covers European prices (series and Fourier), the American obstacle problem
//! on a log grid, the exponential-horizon free boundary, illiquidity factor
//! tables and Monte-Carlo oracles.

pub mod american;
pub mod error;
pub mod european;
pub mod levy;
pub mod mc;
pub mod premium;
pub mod quadrature;
pub mod randomized;
mod roots;

pub use american::{
    exercise_boundary, instantaneous_benefit, perpetual_boundary, premium_det, solve_american,
    solve_european_grid, AmericanSolution, BoundaryCurve, GridSpec, LogGrid, Scheme,
};
pub use error::{Error, Result};
pub use european::{euro_price, euro_price_fourier, full_euro_price, EuroQuote, PricingMethod};
pub use levy::{
    esscher_shift, inverse_laplace_roots, laplace_y, laplace_y1, project_value_from_cashflow, validate,
    AssetAggregates, EffectiveModel, HorizonSpec, ProjectModel, ValidationReport, Violation,
};
pub use mc::{
    mc_american_ls, mc_martingale_check, mc_randomized_euro, mc_single_asset_euro, mc_two_asset_euro,
    McEstimate, SimConfig,
};
pub use premium::{
    figure_series, generate_table, illiquidity_factor_det, illiquidity_factor_stoch, valuate, value_det_many,
    value_stoch_many, FactorTable, FigureBase, FigureSeries, HorizonKind, JumpCase, ScenarioGrid, SweepParam,
    TableComparison, TableSettings, ValuationResult,
};
pub use randomized::{
    amer_randomized, euro_randomized, premium_stoch, solve_randomized, RandomizedEuro, RandomizedSolution,
    Regime,
};

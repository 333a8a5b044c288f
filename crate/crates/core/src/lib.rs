//! Power system dispatch modelling around the cost pass-through from CO2
//! emission prices to electricity prices.
//!
//! The crate bundles five parts:
//!
//! - [`domain`]: validated system instances (fuels, technology clusters, CHP
//!   operating regions, hydro storage, penalties, reserve requirement).
//! - [`timeseries`]: the hourly exogenous series, CSV ingestion, a seeded
//!   synthetic-year generator and pointwise scenario transforms.
//! - [`dispatch`]: the hourly economic dispatch LP; power prices are the
//!   duals of the hourly power balance.
//! - [`scenario`]: emission-price sweeps, finite-difference pass-through
//!   estimates and sensitivity experiments.
//! - [`dh`]: closed-form cost thresholds for district heating portfolios
//!   running boilers next to CHP units.
//!
//! Solves go through the [`lp`] crate's bounded revised simplex; scenario
//! sweeps fan out over a worker pool when the `parallel` feature (default)
//! is enabled and fall back to a sequential loop without it.

pub mod dh;
pub mod dispatch;
pub mod domain;
pub mod presets;
pub mod scenario;
pub mod timeseries;

pub use merit_lp as lp;

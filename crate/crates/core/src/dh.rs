//! Closed-form model of a district heating operator running natural-gas
//! boilers next to CHP units: marginal heat costs of both unit types, the
//! electricity mark-up at which CHP overtakes boilers, and the minimum
//! emission-cost pass-through at which rising emission prices reduce the
//! portfolio's total heat generation cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DhError {
    #[error("portfolio invariant breached: {0}")]
    InvalidPortfolio(String),
    #[error("price invariant breached: {0}")]
    InvalidPrices(String),
    #[error("electricity price is zero but the supply elasticity is positive")]
    ZeroPriceWithElasticity,
    #[error("pass-through guess {0} outside [0, 1.5]")]
    GuessOutOfRange(f64),
    #[error("grid is empty or contains values outside the invariant ranges")]
    BadGrid,
}

/// Technical description of a boiler-plus-CHP heat portfolio.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DhPortfolio {
    /// Fuel-to-heat efficiency of the boiler.
    pub eta_th_boiler: f64,
    /// Fuel-to-heat efficiency of the CHP unit.
    pub eta_th_chp: f64,
    /// Fuel-to-power efficiency of the CHP unit.
    pub eta_el_chp: f64,
    /// Emission factor of the (single) fuel, t CO2 per MWh of fuel.
    pub emission_factor: f64,
    /// CHP share of total fossil heat generation, in (0, 1].
    pub chp_heat_share: f64,
    /// Electricity-price elasticity of CHP heat supply, >= 0.
    pub elasticity: f64,
}

impl DhPortfolio {
    pub fn validate(&self) -> Result<(), DhError> {
        let ok_eta = |v: f64| v > 0.0 && v <= 1.0;
        if !ok_eta(self.eta_th_boiler) || !ok_eta(self.eta_th_chp) || !ok_eta(self.eta_el_chp) {
            return Err(DhError::InvalidPortfolio(
                "efficiencies must lie in (0, 1]".into(),
            ));
        }
        if self.eta_th_boiler < self.eta_th_chp {
            return Err(DhError::InvalidPortfolio(
                "the boiler must convert fuel to heat at least as efficiently as the CHP".into(),
            ));
        }
        if !(self.chp_heat_share > 0.0 && self.chp_heat_share <= 1.0) {
            return Err(DhError::InvalidPortfolio(
                "CHP heat share must lie in (0, 1]".into(),
            ));
        }
        if !(self.emission_factor >= 0.0) {
            return Err(DhError::InvalidPortfolio(
                "emission factor must be nonnegative".into(),
            ));
        }
        if !(self.elasticity >= 0.0) {
            return Err(DhError::InvalidPortfolio(
                "elasticity must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Prices the portfolio faces: fuel, emissions, electricity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PriceEnv {
    /// EUR per MWh of fuel.
    pub p_fuel: f64,
    /// EUR per t CO2.
    pub p_emission: f64,
    /// EUR per MWh electric; sign-free.
    pub p_electricity: f64,
}

impl PriceEnv {
    pub fn validate(&self) -> Result<(), DhError> {
        if !(self.p_fuel >= 0.0) || !(self.p_emission >= 0.0) {
            return Err(DhError::InvalidPrices(
                "fuel and emission prices must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Marginal cost of one MWh of boiler heat: fuel plus emission cost over the
/// boiler efficiency.
pub fn boiler_heat_cost(portfolio: &DhPortfolio, prices: &PriceEnv) -> f64 {
    (prices.p_fuel + prices.p_emission * portfolio.emission_factor) / portfolio.eta_th_boiler
}

/// Marginal cost of one MWh of CHP heat: fuel plus emission cost net of the
/// revenue from co-generated electricity, over the CHP heat efficiency. May
/// be negative when electricity is dear.
pub fn chp_heat_cost(portfolio: &DhPortfolio, prices: &PriceEnv) -> f64 {
    (prices.p_fuel + prices.p_emission * portfolio.emission_factor
        - portfolio.eta_el_chp * prices.p_electricity)
        / portfolio.eta_th_chp
}

/// Minimum electricity mark-up over fuel-plus-emission cost at which CHP
/// heat is no dearer than boiler heat.
pub fn min_markup(portfolio: &DhPortfolio) -> f64 {
    (portfolio.eta_th_boiler - portfolio.eta_th_chp)
        / (portfolio.eta_th_boiler * portfolio.eta_el_chp)
}

/// Which unit a cost-minimising operator runs first at the given prices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchOrder {
    ChpFirst,
    BoilerFirst,
    Indifferent,
}

pub const DEFAULT_INDIFFERENCE_TOL: f64 = 1e-9;

/// Compare the two heat costs with a tolerance band for indifference.
pub fn dispatch_order(portfolio: &DhPortfolio, prices: &PriceEnv, tol: f64) -> DispatchOrder {
    let boiler = boiler_heat_cost(portfolio, prices);
    let chp = chp_heat_cost(portfolio, prices);
    if (chp - boiler).abs() <= tol * (1.0 + boiler.abs()) {
        DispatchOrder::Indifferent
    } else if chp < boiler {
        DispatchOrder::ChpFirst
    } else {
        DispatchOrder::BoilerFirst
    }
}

/// Minimum pass-through from emission prices to electricity prices at which
/// the portfolio's total heat cost declines in the emission price, in the
/// most adverse case (capacity-constrained CHP).
pub fn min_passthrough(portfolio: &DhPortfolio) -> f64 {
    let s = portfolio.chp_heat_share;
    let boiler_to_chp = (1.0 - s) / s;
    (boiler_to_chp * portfolio.eta_th_chp / (portfolio.eta_th_boiler * portfolio.eta_el_chp)
        + 1.0 / portfolio.eta_el_chp)
        * portfolio.emission_factor
}

/// General form of the threshold including the supply-response term: when
/// CHP holds a cost advantage and heat supply responds to the electricity
/// price, the required pass-through drops below [`min_passthrough`].
///
/// The response term itself contains the pass-through, so it is evaluated at
/// a supplied guess rather than solved to a fixed point.
pub fn min_passthrough_general(
    portfolio: &DhPortfolio,
    prices: &PriceEnv,
    passthrough_guess: f64,
) -> Result<f64, DhError> {
    if !(0.0..=1.5).contains(&passthrough_guess) {
        return Err(DhError::GuessOutOfRange(passthrough_guess));
    }
    let adverse = min_passthrough(portfolio);
    if portfolio.elasticity == 0.0 {
        return Ok(adverse);
    }
    if prices.p_electricity == 0.0 {
        return Err(DhError::ZeroPriceWithElasticity);
    }
    let cost_gap = boiler_heat_cost(portfolio, prices) - chp_heat_cost(portfolio, prices);
    let response = -(cost_gap / prices.p_electricity)
        * portfolio.elasticity
        * (portfolio.eta_th_chp / portfolio.eta_el_chp)
        * passthrough_guess;
    Ok(adverse + response)
}

/// Threshold matrix over a CHP-share grid (rows) and an electrical
/// efficiency grid (columns); entry `[i][j]` uses `share_grid[i]` and
/// `eta_el_grid[j]` on top of the template portfolio.
pub fn threshold_surface(
    eta_el_grid: &[f64],
    share_grid: &[f64],
    template: &DhPortfolio,
) -> Result<Vec<Vec<f64>>, DhError> {
    if eta_el_grid.is_empty() || share_grid.is_empty() {
        return Err(DhError::BadGrid);
    }
    let mut surface = Vec::with_capacity(share_grid.len());
    for &share in share_grid {
        let mut row = Vec::with_capacity(eta_el_grid.len());
        for &eta_el in eta_el_grid {
            let point = DhPortfolio {
                eta_el_chp: eta_el,
                chp_heat_share: share,
                ..*template
            };
            point.validate().map_err(|_| DhError::BadGrid)?;
            row.push(min_passthrough(&point));
        }
        surface.push(row);
    }
    Ok(surface)
}

/// One row of the reference threshold table: the calibrated CHP heat
/// efficiency for an electrical efficiency, with both derived thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CalibratedRow {
    pub eta_el: f64,
    pub eta_th_chp: f64,
    pub min_markup: f64,
    pub min_passthrough: f64,
}

/// A parameter set reproducing the reference mark-up and pass-through table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ThresholdCalibration {
    pub eta_th_boiler: f64,
    pub emission_factor: f64,
    pub chp_heat_share: f64,
    pub rows: Vec<CalibratedRow>,
}

/// Reference mark-up column: electrical efficiencies 0.3 to 0.6.
pub const REFERENCE_ETA_EL: [f64; 4] = [0.3, 0.4, 0.5, 0.6];
pub const REFERENCE_MARKUP: [f64; 4] = [0.481, 0.389, 0.333, 0.296];
pub const REFERENCE_PASSTHROUGH: [f64; 4] = [0.759, 0.556, 0.433, 0.352];

/// Search the parameter grid for a set reproducing the reference table:
/// per-row CHP heat efficiency in [0.5, 0.9] (step 0.005), one emission
/// factor in [0.18, 0.25] (step 0.001) and one CHP heat share in [0.8, 1.0]
/// (step 0.005) shared by all rows. Boiler efficiency is fixed at 0.9.
///
/// Among parameter sets whose mark-ups all land within `markup_tol`, the one
/// minimising the worst pass-through deviation is returned together with
/// that deviation.
pub fn calibrate_thresholds(markup_tol: f64) -> Option<(ThresholdCalibration, f64)> {
    let eta_th_boiler = 0.9;

    // Mark-up only depends on the per-row heat efficiency, so those can be
    // pinned first; candidates within tolerance are carried per row.
    let mut eta_candidates: Vec<Vec<f64>> = Vec::new();
    for (i, &eta_el) in REFERENCE_ETA_EL.iter().enumerate() {
        let mut candidates = Vec::new();
        for step in 0..=80 {
            let eta_th = 0.5 + 0.005 * step as f64;
            let probe = DhPortfolio {
                eta_th_boiler,
                eta_th_chp: eta_th,
                eta_el_chp: eta_el,
                emission_factor: 0.2,
                chp_heat_share: 1.0,
                elasticity: 0.0,
            };
            if (min_markup(&probe) - REFERENCE_MARKUP[i]).abs() <= markup_tol {
                candidates.push(eta_th);
            }
        }
        if candidates.is_empty() {
            return None;
        }
        eta_candidates.push(candidates);
    }

    let mut best: Option<(ThresholdCalibration, f64)> = None;
    for em_step in 0..=70 {
        let emission_factor = 0.18 + 0.001 * em_step as f64;
        for share_step in 0..=40 {
            let share = 0.8 + 0.005 * share_step as f64;
            // For each row pick the candidate heat efficiency that best fits
            // the pass-through target under (emission_factor, share).
            let mut rows = Vec::with_capacity(4);
            let mut worst = 0.0f64;
            for (i, &eta_el) in REFERENCE_ETA_EL.iter().enumerate() {
                let mut row_best: Option<(f64, f64)> = None;
                for &eta_th in &eta_candidates[i] {
                    let portfolio = DhPortfolio {
                        eta_th_boiler,
                        eta_th_chp: eta_th,
                        eta_el_chp: eta_el,
                        emission_factor,
                        chp_heat_share: share,
                        elasticity: 0.0,
                    };
                    let deviation = (min_passthrough(&portfolio) - REFERENCE_PASSTHROUGH[i]).abs();
                    if row_best.map(|(_, d)| deviation < d).unwrap_or(true) {
                        row_best = Some((eta_th, deviation));
                    }
                }
                let (eta_th, deviation) = row_best.unwrap();
                worst = worst.max(deviation);
                let portfolio = DhPortfolio {
                    eta_th_boiler,
                    eta_th_chp: eta_th,
                    eta_el_chp: eta_el,
                    emission_factor,
                    chp_heat_share: share,
                    elasticity: 0.0,
                };
                rows.push(CalibratedRow {
                    eta_el,
                    eta_th_chp: eta_th,
                    min_markup: min_markup(&portfolio),
                    min_passthrough: min_passthrough(&portfolio),
                });
            }
            if best.as_ref().map(|(_, w)| worst < *w).unwrap_or(true) {
                best = Some((
                    ThresholdCalibration {
                        eta_th_boiler,
                        emission_factor,
                        chp_heat_share: share,
                        rows,
                    },
                    worst,
                ));
            }
        }
    }
    best
}

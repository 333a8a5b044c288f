//! Emission-price scenario sweeps, pass-through estimates and sensitivity
//! experiments.
//!
//! A sweep runs one dispatch per scenario, shifting the emission price
//! series by a constant so the annual mean lands on `base + s * step`.
//! Scenario solves are independent; with the `parallel` feature they run on
//! a worker pool and results are re-assembled by scenario index, so the
//! output does not depend on the number of workers.

use crate::dispatch::{emissions_and_burn, run_dispatch, DispatchError};
use crate::domain::SystemInstance;
use crate::timeseries::{scale_series, SeriesSelector, TimeSeriesBundle, TimeSeriesError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("sweep needs step > 0 and count >= 2, got step {step}, count {count}")]
    BadSpec { step: f64, count: usize },
    #[error("scenario {scenario}: {source}")]
    Dispatch {
        scenario: usize,
        #[source]
        source: DispatchError,
    },
    #[error("sensitivity transform failed: {0}")]
    Transform(#[from] TimeSeriesError),
    #[error("pass-through needs at least two scenarios")]
    TooFewScenarios,
    #[error("zero emission-price step between scenarios {0} and {1}")]
    ZeroDenominator(usize, usize),
}

/// Pre-sweep transform reproducing one of the robustness experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sensitivity {
    #[default]
    None,
    /// Net imports and exports scaled by 1.25.
    Imports125,
    /// Hard coal price scaled by 0.75.
    Coal075,
    /// Ancillary-service requirement halved.
    Ancillary05,
    /// Renewables expansion to 2025: solar x1.40, wind x1.50, coal and
    /// lignite power capacity x0.90.
    Res2025,
    /// Renewables expansion to 2030: solar x1.70, wind x2.00, coal and
    /// lignite power capacity x0.80.
    Res2030,
}

impl Sensitivity {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "none" => Self::None,
            "imports" | "imports_1.25" => Self::Imports125,
            "coal" | "coal_0.75" => Self::Coal075,
            "ancillary" | "ancillary_0.5" => Self::Ancillary05,
            "res2025" | "res_2025" => Self::Res2025,
            "res2030" | "res_2030" => Self::Res2030,
            _ => return None,
        })
    }
}

/// Specification of an emission-price sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Target annual mean of the first scenario, EUR/t.
    pub base_eua_mean: f64,
    /// Increment between scenarios, EUR/t.
    pub step: f64,
    pub count: usize,
    #[serde(default)]
    pub sensitivity: Sensitivity,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.step > 0.0) || self.count < 2 {
            return Err(ScenarioError::BadSpec {
                step: self.step,
                count: self.count,
            });
        }
        Ok(())
    }
}

/// Aggregates of one scenario in a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioPoint {
    pub scenario: usize,
    /// Realised annual mean of the shifted emission price series, EUR/t.
    pub eua_mean: f64,
    /// Annual mean of the hourly power-balance duals, EUR/MWh.
    pub base_price: f64,
    pub emissions_t: f64,
    pub total_cost_eur: f64,
    pub burn_mwh: BTreeMap<String, f64>,
}

/// Results of a full sweep: one point per scenario plus the pass-through
/// estimate of each adjacent scenario pair.
#[derive(Debug, Clone, Serialize)]
pub struct PassThroughCurve {
    pub scenarios: Vec<ScenarioPoint>,
    pub passthrough: Vec<f64>,
}

/// Finite-difference pass-through per adjacent scenario pair: the change of
/// the base electricity price over the change of the mean emission price.
pub fn passthrough(scenarios: &[ScenarioPoint]) -> Result<Vec<f64>, ScenarioError> {
    if scenarios.len() < 2 {
        return Err(ScenarioError::TooFewScenarios);
    }
    let mut out = Vec::with_capacity(scenarios.len() - 1);
    for pair in scenarios.windows(2) {
        let de = pair[1].eua_mean - pair[0].eua_mean;
        if de == 0.0 {
            return Err(ScenarioError::ZeroDenominator(
                pair[0].scenario,
                pair[1].scenario,
            ));
        }
        out.push((pair[1].base_price - pair[0].base_price) / de);
    }
    Ok(out)
}

/// Apply the renewables-expansion assumptions for a target year: wind and
/// solar generation scale up, coal- and lignite-fired power capacity scales
/// down. Fuels are recognised by the ids `lignite`, `hard_coal` and `coal`.
pub fn apply_res_expansion(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    year: u16,
) -> Result<(SystemInstance, TimeSeriesBundle), ScenarioError> {
    let (solar, wind, capacity) = match year {
        2025 => (1.40, 1.50, 0.90),
        2030 => (1.70, 2.00, 0.80),
        other => {
            return Err(ScenarioError::Transform(TimeSeriesError::UnknownSelector(
                format!("res_{other}"),
            )))
        }
    };
    let bundle = scale_series(bundle, &SeriesSelector::Solar, solar)?;
    let bundle = scale_series(&bundle, &SeriesSelector::Wind, wind)?;
    let mut instance = instance.clone();
    for cluster in &mut instance.clusters {
        if matches!(cluster.fuel.as_str(), "lignite" | "hard_coal" | "coal") {
            cluster.power_capacity_mw *= capacity;
        }
    }
    Ok((instance, bundle))
}

fn apply_sensitivity(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    sensitivity: Sensitivity,
) -> Result<(SystemInstance, TimeSeriesBundle), ScenarioError> {
    Ok(match sensitivity {
        Sensitivity::None => (instance.clone(), bundle.clone()),
        Sensitivity::Imports125 => (
            instance.clone(),
            scale_series(bundle, &SeriesSelector::NetImports, 1.25)?,
        ),
        Sensitivity::Coal075 => (
            instance.clone(),
            scale_series(bundle, &SeriesSelector::FuelPrice("hard_coal".into()), 0.75)?,
        ),
        Sensitivity::Ancillary05 => {
            let mut instance = instance.clone();
            instance.ancillary_min_mw *= 0.5;
            (instance, bundle.clone())
        }
        Sensitivity::Res2025 => apply_res_expansion(instance, bundle, 2025)?,
        Sensitivity::Res2030 => apply_res_expansion(instance, bundle, 2030)?,
    })
}

fn run_one_scenario(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    spec: &SweepSpec,
    scenario: usize,
) -> Result<ScenarioPoint, ScenarioError> {
    let target_mean = spec.base_eua_mean + spec.step * scenario as f64;
    let shift = target_mean - bundle.eua_mean();
    let result = run_dispatch(instance, bundle, shift)
        .map_err(|source| ScenarioError::Dispatch { scenario, source })?;
    let totals = emissions_and_burn(&result);
    Ok(ScenarioPoint {
        scenario,
        eua_mean: bundle.eua_mean() + shift,
        base_price: result.mean_power_price(),
        emissions_t: totals.total_emissions_t,
        total_cost_eur: result.total_cost_eur,
        burn_mwh: totals.burn_mwh,
    })
}

#[cfg(feature = "parallel")]
fn solve_scenarios(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    spec: &SweepSpec,
    jobs: Option<usize>,
) -> Result<Vec<ScenarioPoint>, ScenarioError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .expect("worker pool");
    let results: Vec<Result<ScenarioPoint, ScenarioError>> = pool.install(|| {
        (0..spec.count)
            .into_par_iter()
            .map(|s| run_one_scenario(instance, bundle, spec, s))
            .collect()
    });
    // Collected in index order; surface the first error deterministically.
    results.into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
fn solve_scenarios(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    spec: &SweepSpec,
    _jobs: Option<usize>,
) -> Result<Vec<ScenarioPoint>, ScenarioError> {
    (0..spec.count)
        .map(|s| run_one_scenario(instance, bundle, spec, s))
        .collect()
}

/// Run the sweep: the sensitivity transform is applied once, then one
/// dispatch per scenario with the emission price shifted to its target mean.
///
/// `jobs` caps the number of concurrent scenario solves; `None` uses one
/// worker per CPU. Without the `parallel` feature scenarios run
/// sequentially. Results are identical either way.
pub fn run_sweep(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    spec: &SweepSpec,
    jobs: Option<usize>,
) -> Result<PassThroughCurve, ScenarioError> {
    spec.validate()?;
    let (instance, bundle) = apply_sensitivity(instance, bundle, spec.sensitivity)?;
    let scenarios = solve_scenarios(&instance, &bundle, spec, jobs)?;
    let passthrough = passthrough(&scenarios)?;
    Ok(PassThroughCurve {
        scenarios,
        passthrough,
    })
}

/// Emission totals per scenario and the marginal change between adjacent
/// scenarios (nonpositive along a well-posed sweep).
#[derive(Debug, Clone, Serialize)]
pub struct EmissionsCurve {
    pub emissions_t: Vec<f64>,
    pub marginal_t: Vec<f64>,
}

pub fn emissions_curve(curve: &PassThroughCurve) -> EmissionsCurve {
    let emissions: Vec<f64> = curve.scenarios.iter().map(|s| s.emissions_t).collect();
    let marginal = emissions.windows(2).map(|w| w[1] - w[0]).collect();
    EmissionsCurve {
        emissions_t: emissions,
        marginal_t: marginal,
    }
}

/// Serialise the sweep as the documented `sweep.csv` layout: one row per
/// scenario with means, totals and per-fuel burn.
pub fn write_sweep_csv<W: std::io::Write>(
    curve: &PassThroughCurve,
    writer: W,
) -> Result<(), std::io::Error> {
    let mut w = csv::Writer::from_writer(writer);
    let fuels: Vec<String> = curve
        .scenarios
        .first()
        .map(|s| s.burn_mwh.keys().cloned().collect())
        .unwrap_or_default();
    let mut header = vec![
        "scenario".to_string(),
        "eua_mean_eur_t".into(),
        "base_price_eur_mwh".into(),
        "emissions_t".into(),
        "total_cost_eur".into(),
    ];
    for fuel in &fuels {
        header.push(format!("burn_mwh_{fuel}"));
    }
    w.write_record(&header)?;
    for point in &curve.scenarios {
        let mut record = vec![
            point.scenario.to_string(),
            point.eua_mean.to_string(),
            point.base_price.to_string(),
            point.emissions_t.to_string(),
            point.total_cost_eur.to_string(),
        ];
        for fuel in &fuels {
            record.push(point.burn_mwh.get(fuel).copied().unwrap_or(0.0).to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()
}

/// Serialise the adjacent-pair pass-through estimates (`passthrough.csv`).
pub fn write_passthrough_csv<W: std::io::Write>(
    curve: &PassThroughCurve,
    writer: W,
) -> Result<(), std::io::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["from_scenario", "to_scenario", "eua_from", "eua_to", "passthrough"])?;
    for (i, estimate) in curve.passthrough.iter().enumerate() {
        w.write_record([
            curve.scenarios[i].scenario.to_string(),
            curve.scenarios[i + 1].scenario.to_string(),
            curve.scenarios[i].eua_mean.to_string(),
            curve.scenarios[i + 1].eua_mean.to_string(),
            estimate.to_string(),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{fuel_switch_bundle, fuel_switch_instance, single_gas_bundle, single_gas_instance};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn sweep_spec_validation() {
        let bad = SweepSpec {
            base_eua_mean: 5.89,
            step: 0.0,
            count: 16,
            sensitivity: Sensitivity::None,
        };
        assert!(matches!(
            run_sweep(&single_gas_instance(2), &single_gas_bundle(2), &bad, Some(1)),
            Err(ScenarioError::BadSpec { .. })
        ));
    }

    #[test]
    fn default_sweep_hits_the_target_means() {
        let spec = SweepSpec {
            base_eua_mean: 5.89,
            step: 5.0,
            count: 16,
            sensitivity: Sensitivity::None,
        };
        let instance = single_gas_instance(4);
        let bundle = single_gas_bundle(4);
        let curve = run_sweep(&instance, &bundle, &spec, Some(1)).unwrap();
        assert_eq!(curve.scenarios.len(), 16);
        assert_eq!(curve.passthrough.len(), 15);
        assert_relative_eq!(curve.scenarios[0].eua_mean, 5.89, epsilon = 1e-10);
        assert_relative_eq!(curve.scenarios[15].eua_mean, 80.89, epsilon = 1e-10);
    }

    #[test]
    fn fixed_marginal_unit_passes_through_its_emission_intensity() {
        let spec = SweepSpec {
            base_eua_mean: 10.0,
            step: 10.0,
            count: 3,
            sensitivity: Sensitivity::None,
        };
        let curve = run_sweep(&single_gas_instance(4), &single_gas_bundle(4), &spec, Some(1)).unwrap();
        for estimate in &curve.passthrough {
            // em / eta = 0.2 / 0.5
            assert_abs_diff_eq!(*estimate, 0.4, epsilon = 1e-9);
        }
    }

    #[test]
    fn passthrough_of_flat_prices_is_zero() {
        let points = vec![
            ScenarioPoint {
                scenario: 0,
                eua_mean: 10.0,
                base_price: 40.0,
                emissions_t: 8.0,
                total_cost_eur: 1.0,
                burn_mwh: BTreeMap::new(),
            },
            ScenarioPoint {
                scenario: 1,
                eua_mean: 20.0,
                base_price: 40.0,
                emissions_t: 8.0,
                total_cost_eur: 2.0,
                burn_mwh: BTreeMap::new(),
            },
            ScenarioPoint {
                scenario: 2,
                eua_mean: 30.0,
                base_price: 44.0,
                emissions_t: 7.0,
                total_cost_eur: 3.0,
                burn_mwh: BTreeMap::new(),
            },
        ];
        let estimates = passthrough(&points).unwrap();
        assert_eq!(estimates.len(), 2);
        assert_abs_diff_eq!(estimates[0], 0.0);
        assert_abs_diff_eq!(estimates[1], 0.4, epsilon = 1e-12);

        let curve = PassThroughCurve {
            scenarios: points,
            passthrough: estimates,
        };
        let em = emissions_curve(&curve);
        assert_eq!(em.marginal_t, vec![0.0, -1.0]);
    }

    #[test]
    fn emission_free_and_single_fuel_sweeps_have_flat_emission_curves() {
        let spec = SweepSpec {
            base_eua_mean: 10.0,
            step: 20.0,
            count: 3,
            sensitivity: Sensitivity::None,
        };
        // A single-fuel system with fixed demand has no abatement channel:
        // emissions are constant along the sweep.
        let instance = single_gas_instance(4);
        let bundle = single_gas_bundle(4);
        let curve = run_sweep(&instance, &bundle, &spec, Some(1)).unwrap();
        let em = emissions_curve(&curve);
        for marginal in &em.marginal_t {
            assert_abs_diff_eq!(*marginal, 0.0, epsilon = 1e-7);
        }
        assert!(em.emissions_t[0] > 0.0);

        // An emission-free variant reports zero everywhere.
        let mut clean = instance.clone();
        clean.fuels[0].emission_factor = 0.0;
        let clean_curve = run_sweep(&clean, &bundle, &spec, Some(1)).unwrap();
        let clean_em = emissions_curve(&clean_curve);
        for total in &clean_em.emissions_t {
            assert_abs_diff_eq!(*total, 0.0);
        }
    }

    #[test]
    fn res_expansion_scales_series_and_capacity() {
        let instance = fuel_switch_instance();
        let bundle = fuel_switch_bundle();
        let (inst25, bund25) = apply_res_expansion(&instance, &bundle, 2025).unwrap();
        assert_abs_diff_eq!(inst25.clusters[0].power_capacity_mw, 28.0 * 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(inst25.clusters[1].power_capacity_mw, 22.0 * 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(inst25.clusters[2].power_capacity_mw, 85.0, epsilon = 1e-12);
        assert_relative_eq!(bund25.wind_mw[7], bundle.wind_mw[7] * 1.5, epsilon = 1e-12);
        assert_relative_eq!(bund25.solar_mw[12], bundle.solar_mw[12] * 1.4, epsilon = 1e-12);

        let (_, bund30) = apply_res_expansion(&instance, &bundle, 2030).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert_relative_eq!(mean(&bund30.wind_mw), 2.0 * mean(&bundle.wind_mw), epsilon = 1e-12);

        // Applying twice compounds rather than repeats.
        let (inst_twice, _) = apply_res_expansion(&inst25, &bund25, 2025).unwrap();
        assert_abs_diff_eq!(
            inst_twice.clusters[0].power_capacity_mw,
            28.0 * 0.81,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sensitivity_transforms_are_applied_before_the_sweep() {
        let instance = fuel_switch_instance();
        let bundle = fuel_switch_bundle();
        let spec = SweepSpec {
            base_eua_mean: 5.89,
            step: 25.0,
            count: 2,
            sensitivity: Sensitivity::Coal075,
        };
        let curve = run_sweep(&instance, &bundle, &spec, Some(1)).unwrap();
        let base_spec = SweepSpec {
            sensitivity: Sensitivity::None,
            ..spec
        };
        let base = run_sweep(&instance, &bundle, &base_spec, Some(1)).unwrap();
        // Cheaper coal can only lower the cost-minimal total cost.
        for (with_coal, without) in curve.scenarios.iter().zip(&base.scenarios) {
            assert!(with_coal.total_cost_eur <= without.total_cost_eur + 1e-6);
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_results() {
        let spec = SweepSpec {
            base_eua_mean: 5.89,
            step: 15.0,
            count: 4,
            sensitivity: Sensitivity::None,
        };
        let instance = fuel_switch_instance();
        let bundle = fuel_switch_bundle().truncated(24);
        let mut instance24 = instance.clone();
        instance24.horizon_hours = 24;
        let one = run_sweep(&instance24, &bundle, &spec, Some(1)).unwrap();
        let four = run_sweep(&instance24, &bundle, &spec, Some(4)).unwrap();
        for (a, b) in one.scenarios.iter().zip(&four.scenarios) {
            assert_eq!(a.base_price.to_bits(), b.base_price.to_bits());
            assert_eq!(a.emissions_t.to_bits(), b.emissions_t.to_bits());
        }
        assert_eq!(one.passthrough, four.passthrough);
    }
}

//! Hourly economic dispatch as a linear program.
//!
//! [`build_lp`] assembles the cost-minimising dispatch problem for a system
//! instance and its exogenous series: an hourly power balance (whose dual is
//! the electricity price), a heat balance served by CHP units and boilers,
//! capacity and conversion limits, CHP operating regions as convex corner
//! combinations, a minimum operating level for ancillary services, and
//! reservoir dynamics for hydro storage plants. [`run_dispatch`] solves it
//! and maps the solution back into named hourly series.

use crate::domain::{validate_instance, SystemInstance};
use crate::timeseries::TimeSeriesBundle;
use merit_lp::{ColId, LinearProgram, LpOutcome, RowId, RowSense, Solver, Tolerances};
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("instance is invalid: {0}")]
    InvalidInstance(String),
    #[error("bundle is invalid: {0}")]
    InvalidBundle(String),
    #[error("bundle covers {bundle} hours but the instance horizon is {instance}")]
    HorizonMismatch { bundle: usize, instance: usize },
    #[error("no price series `{series}` for fuel `{fuel}` in the bundle")]
    MissingFuelPrice { fuel: String, series: String },
    #[error("cluster `{0}` has heat capacity but is neither a boiler nor a CHP with an operating region")]
    HeatWithoutRegion(String),
    #[error("emission price shift {shift} makes hour {hour} negative")]
    NegativeEmissionPrice { shift: f64, hour: usize },
    #[error(
        "ancillary requirement of {required} MW exceeds the {available} MW of thermal and \
         storage capacity that could ever be operating"
    )]
    AncillaryUnattainable { required: f64, available: f64 },
    #[error("model construction failed: {0}")]
    Build(#[from] merit_lp::LpError),
    #[error(
        "dispatch model ended {status:?} despite relief variables ({rows} rows, {cols} \
         columns); check that every operating region admits a point within its cluster's \
         capacity limits"
    )]
    NotSolved {
        status: merit_lp::SolveStatus,
        rows: usize,
        cols: usize,
    },
    #[error("goodness of fit needs two series of equal length >= 2")]
    FitLength,
    #[error("goodness of fit is undefined for a zero-variance series")]
    FitZeroVariance,
}

/// Construction switches. The default keeps the ancillary constraint on
/// turbining plus pumping; the `storage_level` variant counts the reservoir
/// level instead of pumping, for comparison.
#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub ancillary_uses_storage_level: bool,
}

/// Column and row handles of one built model, for mapping solutions back.
pub struct VarMap {
    pub hours: usize,
    /// `[cluster][hour]`
    pub fuel_use: Vec<Vec<ColId>>,
    pub power_out: Vec<Option<Vec<ColId>>>,
    pub heat_out: Vec<Option<Vec<ColId>>>,
    /// `[cluster][hour][corner]`
    pub convexity: Vec<Option<Vec<Vec<ColId>>>>,
    /// `[storage][hour]`
    pub turbine: Vec<Vec<ColId>>,
    pub pump: Vec<Vec<ColId>>,
    pub level: Vec<Vec<ColId>>,
    pub non_served_power: Vec<ColId>,
    pub non_served_heat: Option<Vec<ColId>>,
    pub curtailment: Vec<ColId>,
    pub power_balance: Vec<RowId>,
    pub heat_balance: Option<Vec<RowId>>,
}

/// A dispatch LP together with the handles needed to read a solution.
pub struct DispatchModel {
    pub lp: LinearProgram,
    pub vars: VarMap,
}

/// Whether the instance/bundle pair carries a heat side at all. Without one,
/// the heat balance rows and their relief columns are omitted.
fn has_heat_side(instance: &SystemInstance, bundle: &TimeSeriesBundle) -> bool {
    instance.clusters.iter().any(|c| c.serves_heat()) || bundle.heat_mw.iter().any(|&h| h > 0.0)
}

/// The bundle carries one aggregate reservoir-inflow series; each storage
/// plant receives a share proportional to its reservoir capacity.
pub fn inflow_allocation(instance: &SystemInstance) -> Vec<f64> {
    let total: f64 = instance
        .storages
        .iter()
        .map(|s| s.reservoir_capacity_mwh)
        .sum();
    instance
        .storages
        .iter()
        .map(|s| {
            if total > 0.0 {
                s.reservoir_capacity_mwh / total
            } else {
                0.0
            }
        })
        .collect()
}

/// Assemble the dispatch LP. `eua_shift` is added to the emission price
/// series when pricing fuel burn, leaving the bundle untouched.
pub fn build_model(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    eua_shift: f64,
    options: &BuildOptions,
) -> Result<DispatchModel, DispatchError> {
    let violations = validate_instance(instance);
    if !violations.is_empty() {
        let text = violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(DispatchError::InvalidInstance(text));
    }
    let bundle_issues = bundle.validate();
    if !bundle_issues.is_empty() {
        return Err(DispatchError::InvalidBundle(bundle_issues.join("; ")));
    }
    if bundle.hours != instance.horizon_hours {
        return Err(DispatchError::HorizonMismatch {
            bundle: bundle.hours,
            instance: instance.horizon_hours,
        });
    }
    for cluster in &instance.clusters {
        if cluster.heat_capacity_mw > 0.0 && !cluster.serves_heat() {
            return Err(DispatchError::HeatWithoutRegion(cluster.id.clone()));
        }
        let fuel = instance.fuel(&cluster.fuel).expect("validated above");
        if bundle.fuel_price(&fuel.base_price_series_ref).is_none() {
            return Err(DispatchError::MissingFuelPrice {
                fuel: fuel.id.clone(),
                series: fuel.base_price_series_ref.clone(),
            });
        }
    }
    if let Some(hour) = bundle.eua_price.iter().position(|p| p + eua_shift < 0.0) {
        return Err(DispatchError::NegativeEmissionPrice {
            shift: eua_shift,
            hour,
        });
    }
    // The relief variables cover both balances, so the one constraint that
    // can genuinely starve the model is the reserve requirement.
    let operable: f64 = instance
        .clusters
        .iter()
        .map(|c| c.power_capacity_mw)
        .sum::<f64>()
        + instance
            .storages
            .iter()
            .map(|s| s.turbine_capacity_mw + s.pump_capacity_mw)
            .sum::<f64>();
    if instance.ancillary_min_mw > operable {
        return Err(DispatchError::AncillaryUnattainable {
            required: instance.ancillary_min_mw,
            available: operable,
        });
    }

    let hours = bundle.hours;
    let heat_side = has_heat_side(instance, bundle);
    let voll = instance.penalty.voll;
    let curtail_cost = instance.penalty.curtailment_cost;

    let mut lp = LinearProgram::new("dispatch");
    let inf = f64::INFINITY;

    let mut fuel_use = Vec::with_capacity(instance.clusters.len());
    let mut power_out = Vec::with_capacity(instance.clusters.len());
    let mut heat_out = Vec::with_capacity(instance.clusters.len());
    let mut convexity = Vec::with_capacity(instance.clusters.len());

    for cluster in &instance.clusters {
        let fuel = instance.fuel(&cluster.fuel).unwrap();
        let prices = bundle.fuel_price(&fuel.base_price_series_ref).unwrap();
        let mut qf = Vec::with_capacity(hours);
        for t in 0..hours {
            let cost = prices[t]
                + fuel.emission_factor * (bundle.eua_price[t] + eua_shift)
                + cluster.om_cost;
            qf.push(lp.add_column(format!("qf[{t},{}]", cluster.id), 0.0, inf, cost)?);
        }
        fuel_use.push(qf);

        power_out.push(if cluster.is_boiler {
            None
        } else {
            let mut qp = Vec::with_capacity(hours);
            for t in 0..hours {
                qp.push(lp.add_column(format!("qp_pwr[{t},{}]", cluster.id), 0.0, inf, 0.0)?);
            }
            Some(qp)
        });

        heat_out.push(if cluster.serves_heat() {
            let mut qh = Vec::with_capacity(hours);
            for t in 0..hours {
                qh.push(lp.add_column(format!("qp_ht[{t},{}]", cluster.id), 0.0, inf, 0.0)?);
            }
            Some(qh)
        } else {
            None
        });

        convexity.push(match &cluster.operating_region {
            Some(region) => {
                let mut per_hour = Vec::with_capacity(hours);
                for t in 0..hours {
                    let mut weights = Vec::with_capacity(region.corners.len());
                    for l in 0..region.corners.len() {
                        weights.push(lp.add_column(
                            format!("sconv[{t},{},{l}]", cluster.id),
                            0.0,
                            1.0,
                            0.0,
                        )?);
                    }
                    per_hour.push(weights);
                }
                Some(per_hour)
            }
            None => None,
        });
    }

    let mut turbine = Vec::with_capacity(instance.storages.len());
    let mut pump = Vec::with_capacity(instance.storages.len());
    let mut level = Vec::with_capacity(instance.storages.len());
    for storage in &instance.storages {
        let mut qpsp = Vec::with_capacity(hours);
        let mut ppsp = Vec::with_capacity(hours);
        let mut qstor = Vec::with_capacity(hours);
        for t in 0..hours {
            qpsp.push(lp.add_column(
                format!("qpsp[{t},{}]", storage.id),
                0.0,
                storage.turbine_capacity_mw,
                0.0,
            )?);
            ppsp.push(lp.add_column(
                format!("ppsp[{t},{}]", storage.id),
                0.0,
                storage.pump_capacity_mw,
                0.0,
            )?);
            // The terminal level may not fall below the initial fill, so the
            // horizon cannot profit from draining the reservoir.
            let floor = if t + 1 == hours {
                storage.initial_level_mwh
            } else {
                0.0
            };
            qstor.push(lp.add_column(
                format!("qstor[{t},{}]", storage.id),
                floor,
                storage.reservoir_capacity_mwh,
                0.0,
            )?);
        }
        turbine.push(qpsp);
        pump.push(ppsp);
        level.push(qstor);
    }

    let mut non_served_power = Vec::with_capacity(hours);
    let mut curtailment = Vec::with_capacity(hours);
    let mut non_served_heat = heat_side.then(Vec::new);
    for t in 0..hours {
        non_served_power.push(lp.add_column(format!("qns_pwr[{t}]"), 0.0, inf, voll)?);
        if let Some(qns_ht) = non_served_heat.as_mut() {
            qns_ht.push(lp.add_column(format!("qns_ht[{t}]"), 0.0, inf, voll)?);
        }
        curtailment.push(lp.add_column(format!("qct[{t}]"), 0.0, inf, curtail_cost)?);
    }

    // Power balance: thermal generation plus net storage output plus fixed
    // renewables less curtailment plus relief covers load less net imports.
    let mut power_balance = Vec::with_capacity(hours);
    for t in 0..hours {
        let mut coeffs: Vec<(ColId, f64)> = Vec::new();
        for qp in power_out.iter().flatten() {
            coeffs.push((qp[t], 1.0));
        }
        for s in 0..instance.storages.len() {
            coeffs.push((turbine[s][t], 1.0));
            coeffs.push((pump[s][t], -1.0));
        }
        coeffs.push((curtailment[t], -1.0));
        coeffs.push((non_served_power[t], 1.0));
        let rhs = bundle.load_mw[t]
            - bundle.net_import_mw[t]
            - bundle.wind_mw[t]
            - bundle.solar_mw[t]
            - bundle.ror_mw[t];
        power_balance.push(lp.add_row(format!("power_balance[{t}]"), RowSense::Equal, rhs, &coeffs)?);
    }

    let mut heat_balance = None;
    if heat_side {
        let qns_ht = non_served_heat.as_ref().unwrap();
        let mut rows = Vec::with_capacity(hours);
        for t in 0..hours {
            let mut coeffs: Vec<(ColId, f64)> = Vec::new();
            for qh in heat_out.iter().flatten() {
                coeffs.push((qh[t], 1.0));
            }
            rows.push(lp.add_row(
                format!("heat_balance[{t}]"),
                RowSense::GreaterEq,
                bundle.heat_mw[t],
                &[coeffs.as_slice(), &[(qns_ht[t], 1.0)]].concat(),
            )?);
        }
        heat_balance = Some(rows);
    }

    // Installed capacity per product.
    for (g, cluster) in instance.clusters.iter().enumerate() {
        for t in 0..hours {
            if let Some(qp) = &power_out[g] {
                lp.add_row(
                    format!("cap_pwr[{t},{}]", cluster.id),
                    RowSense::LessEq,
                    cluster.power_capacity_mw,
                    &[(qp[t], 1.0)],
                )?;
            }
            if let Some(qh) = &heat_out[g] {
                lp.add_row(
                    format!("cap_ht[{t},{}]", cluster.id),
                    RowSense::LessEq,
                    cluster.heat_capacity_mw,
                    &[(qh[t], 1.0)],
                )?;
            }
        }
    }

    // CHP co-production: outputs are pinned to a convex combination of the
    // operating-region corners, and fuel use must cover that combination.
    for (g, cluster) in instance.clusters.iter().enumerate() {
        let Some(region) = &cluster.operating_region else {
            continue;
        };
        let weights = convexity[g].as_ref().unwrap();
        let qp = power_out[g].as_ref().unwrap();
        let qh = heat_out[g].as_ref().unwrap();
        for t in 0..hours {
            let ones: Vec<(ColId, f64)> = weights[t].iter().map(|&w| (w, 1.0)).collect();
            lp.add_row(format!("conv[{t},{}]", cluster.id), RowSense::Equal, 1.0, &ones)?;

            let mut pwr: Vec<(ColId, f64)> = weights[t]
                .iter()
                .zip(&region.corners)
                .map(|(&w, corner)| (w, corner.power_mwh))
                .collect();
            pwr.push((qp[t], -1.0));
            lp.add_row(format!("or_pwr[{t},{}]", cluster.id), RowSense::Equal, 0.0, &pwr)?;

            let mut heat: Vec<(ColId, f64)> = weights[t]
                .iter()
                .zip(&region.corners)
                .map(|(&w, corner)| (w, corner.heat_mwh))
                .collect();
            heat.push((qh[t], -1.0));
            lp.add_row(format!("or_ht[{t},{}]", cluster.id), RowSense::Equal, 0.0, &heat)?;

            let mut fuel_row: Vec<(ColId, f64)> = weights[t]
                .iter()
                .zip(&region.corners)
                .map(|(&w, corner)| (w, corner.fuel_mwh))
                .collect();
            fuel_row.push((fuel_use[g][t], -1.0));
            lp.add_row(
                format!("or_fuel[{t},{}]", cluster.id),
                RowSense::LessEq,
                0.0,
                &fuel_row,
            )?;
        }
    }

    // Conversion efficiency for single-product clusters.
    for (g, cluster) in instance.clusters.iter().enumerate() {
        if cluster.is_chp() {
            continue;
        }
        let eta = cluster.efficiency_power;
        for t in 0..hours {
            if cluster.is_boiler {
                let qh = heat_out[g].as_ref().unwrap();
                lp.add_row(
                    format!("eff[{t},{}]", cluster.id),
                    RowSense::LessEq,
                    0.0,
                    &[(qh[t], 1.0), (fuel_use[g][t], -eta)],
                )?;
            } else {
                let qp = power_out[g].as_ref().unwrap();
                lp.add_row(
                    format!("eff[{t},{}]", cluster.id),
                    RowSense::LessEq,
                    0.0,
                    &[(qp[t], 1.0), (fuel_use[g][t], -eta)],
                )?;
            }
        }
    }

    // Ancillary services: enough thermal generation plus active storage in
    // every hour. Storage activity is turbining plus pumping; the
    // alternative formulation counts the stored energy level instead.
    for t in 0..hours {
        let mut coeffs: Vec<(ColId, f64)> = Vec::new();
        for qp in power_out.iter().flatten() {
            coeffs.push((qp[t], 1.0));
        }
        for s in 0..instance.storages.len() {
            coeffs.push((turbine[s][t], 1.0));
            if options.ancillary_uses_storage_level {
                coeffs.push((level[s][t], 1.0));
            } else {
                coeffs.push((pump[s][t], 1.0));
            }
        }
        lp.add_row(
            format!("ancillary[{t}]"),
            RowSense::GreaterEq,
            instance.ancillary_min_mw,
            &coeffs,
        )?;
    }

    // Reservoir dynamics: level change equals pumping net of losses minus
    // turbining plus the plant's share of natural inflow.
    let inflow_share = inflow_allocation(instance);
    for (s, storage) in instance.storages.iter().enumerate() {
        for t in 0..hours {
            let mut coeffs: Vec<(ColId, f64)> = vec![
                (level[s][t], 1.0),
                (pump[s][t], -storage.cycle_efficiency),
                (turbine[s][t], 1.0),
            ];
            let mut rhs = inflow_share[s] * bundle.inflow_mwh[t];
            if t == 0 {
                rhs += storage.initial_level_mwh;
            } else {
                coeffs.push((level[s][t - 1], -1.0));
            }
            lp.add_row(
                format!("storage_level[{t},{}]", storage.id),
                RowSense::Equal,
                rhs,
                &coeffs,
            )?;
        }
    }

    Ok(DispatchModel {
        lp,
        vars: VarMap {
            hours,
            fuel_use,
            power_out,
            heat_out,
            convexity,
            turbine,
            pump,
            level,
            non_served_power,
            non_served_heat,
            curtailment,
            power_balance,
            heat_balance,
        },
    })
}

/// Assemble the dispatch LP with default construction options.
pub fn build_lp(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    eua_shift: f64,
) -> Result<LinearProgram, DispatchError> {
    Ok(build_model(instance, bundle, eua_shift, &BuildOptions::default())?.lp)
}

/// Hourly dispatch of one technology cluster.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterDispatch {
    pub cluster_id: String,
    pub fuel_id: String,
    pub emission_factor: f64,
    pub power_mwh: Vec<f64>,
    pub heat_mwh: Vec<f64>,
    pub fuel_mwh: Vec<f64>,
    /// Corner weights per hour for CHP clusters.
    pub convexity: Option<Vec<Vec<f64>>>,
}

/// Hourly operation of one hydro storage plant.
#[derive(Debug, Clone, Serialize)]
pub struct StorageDispatch {
    pub storage_id: String,
    pub turbine_mwh: Vec<f64>,
    pub pump_mwh: Vec<f64>,
    pub level_mwh: Vec<f64>,
}

/// Full solution of one dispatch run.
#[derive(Debug, Clone, Serialize)]
pub struct DispatchResult {
    pub hours: usize,
    /// Dual of the hourly power balance: the model's electricity price.
    pub power_price: Vec<f64>,
    /// Dual of the hourly heat balance, when the model has a heat side.
    pub heat_price: Option<Vec<f64>>,
    pub clusters: Vec<ClusterDispatch>,
    pub storages: Vec<StorageDispatch>,
    pub non_served_power_mwh: Vec<f64>,
    pub non_served_heat_mwh: Vec<f64>,
    pub curtailment_mwh: Vec<f64>,
    /// Optimal objective: total system cost in EUR.
    pub total_cost_eur: f64,
}

impl DispatchResult {
    pub fn mean_power_price(&self) -> f64 {
        self.power_price.iter().sum::<f64>() / self.hours.max(1) as f64
    }

    /// Fuel burnt per fuel id, MWh.
    pub fn fuel_burn_mwh(&self) -> BTreeMap<String, f64> {
        let mut burn: BTreeMap<String, f64> = BTreeMap::new();
        for cluster in &self.clusters {
            *burn.entry(cluster.fuel_id.clone()).or_default() +=
                cluster.fuel_mwh.iter().sum::<f64>();
        }
        burn
    }

    /// Total CO2 emissions in tonnes: emission factor times fuel burn,
    /// summed over clusters and hours.
    pub fn total_emissions_t(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.emission_factor * c.fuel_mwh.iter().sum::<f64>())
            .sum()
    }

    /// Residual of the hourly power balance under this solution, for
    /// conservation checks.
    pub fn power_balance_residuals(&self, bundle: &TimeSeriesBundle) -> Vec<f64> {
        (0..self.hours)
            .map(|t| {
                let thermal: f64 = self.clusters.iter().map(|c| c.power_mwh[t]).sum();
                let storage_net: f64 = self
                    .storages
                    .iter()
                    .map(|s| s.turbine_mwh[t] - s.pump_mwh[t])
                    .sum();
                thermal + storage_net + bundle.wind_mw[t] + bundle.solar_mw[t] + bundle.ror_mw[t]
                    - self.curtailment_mwh[t]
                    + self.non_served_power_mwh[t]
                    - (bundle.load_mw[t] - bundle.net_import_mw[t])
            })
            .collect()
    }

    /// Hourly series as CSV: price, per-cluster dispatch, storage operation
    /// and relief variables.
    pub fn write_hourly_csv<W: std::io::Write>(&self, writer: W) -> Result<(), std::io::Error> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["hour".to_string(), "price_eur_mwh".into()];
        if self.heat_price.is_some() {
            header.push("heat_price_eur_mwh".into());
        }
        for c in &self.clusters {
            header.push(format!("power_mwh_{}", c.cluster_id));
            header.push(format!("heat_mwh_{}", c.cluster_id));
            header.push(format!("fuel_mwh_{}", c.cluster_id));
        }
        for s in &self.storages {
            header.push(format!("turbine_mwh_{}", s.storage_id));
            header.push(format!("pump_mwh_{}", s.storage_id));
            header.push(format!("level_mwh_{}", s.storage_id));
        }
        header.push("non_served_power_mwh".into());
        header.push("non_served_heat_mwh".into());
        header.push("curtailment_mwh".into());
        w.write_record(&header)?;
        for t in 0..self.hours {
            let mut record = vec![t.to_string(), self.power_price[t].to_string()];
            if let Some(hp) = &self.heat_price {
                record.push(hp[t].to_string());
            }
            for c in &self.clusters {
                record.push(c.power_mwh[t].to_string());
                record.push(c.heat_mwh[t].to_string());
                record.push(c.fuel_mwh[t].to_string());
            }
            for s in &self.storages {
                record.push(s.turbine_mwh[t].to_string());
                record.push(s.pump_mwh[t].to_string());
                record.push(s.level_mwh[t].to_string());
            }
            record.push(self.non_served_power_mwh[t].to_string());
            record.push(self.non_served_heat_mwh[t].to_string());
            record.push(self.curtailment_mwh[t].to_string());
            w.write_record(&record)?;
        }
        w.flush()
    }
}

/// Aggregate fuel burn and emissions of a solved dispatch.
#[derive(Debug, Clone, Serialize)]
pub struct FuelTotals {
    pub burn_mwh: BTreeMap<String, f64>,
    pub emissions_t: BTreeMap<String, f64>,
    pub total_emissions_t: f64,
}

/// Per-fuel burn and CO2 totals of a result.
pub fn emissions_and_burn(result: &DispatchResult) -> FuelTotals {
    let mut burn: BTreeMap<String, f64> = BTreeMap::new();
    let mut emissions: BTreeMap<String, f64> = BTreeMap::new();
    for cluster in &result.clusters {
        let fuel_sum: f64 = cluster.fuel_mwh.iter().sum();
        *burn.entry(cluster.fuel_id.clone()).or_default() += fuel_sum;
        *emissions.entry(cluster.fuel_id.clone()).or_default() +=
            cluster.emission_factor * fuel_sum;
    }
    let total = emissions.values().sum();
    FuelTotals {
        burn_mwh: burn,
        emissions_t: emissions,
        total_emissions_t: total,
    }
}

/// Solve the dispatch problem and extract the hourly solution.
pub fn run_dispatch(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    eua_shift: f64,
) -> Result<DispatchResult, DispatchError> {
    run_dispatch_with(
        &merit_lp::SimplexSolver,
        &Tolerances::default(),
        instance,
        bundle,
        eua_shift,
        &BuildOptions::default(),
    )
}

/// [`run_dispatch`] with an explicit solver, tolerances and build options.
pub fn run_dispatch_with(
    solver: &dyn Solver,
    tolerances: &Tolerances,
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    eua_shift: f64,
    options: &BuildOptions,
) -> Result<DispatchResult, DispatchError> {
    let DispatchModel { lp, vars } = build_model(instance, bundle, eua_shift, options)?;
    let outcome = solver.solve(&lp, tolerances)?;
    let solution = match outcome {
        LpOutcome::Optimal(solution) => solution,
        other => {
            return Err(DispatchError::NotSolved {
                status: other.status(),
                rows: lp.num_rows(),
                cols: lp.num_cols(),
            })
        }
    };

    let value = |id: ColId| solution.primal[id.index()];
    let series = |ids: &[ColId]| ids.iter().map(|&id| value(id)).collect::<Vec<f64>>();
    let hours = vars.hours;

    let clusters = instance
        .clusters
        .iter()
        .enumerate()
        .map(|(g, cluster)| {
            let fuel = instance.fuel(&cluster.fuel).unwrap();
            ClusterDispatch {
                cluster_id: cluster.id.clone(),
                fuel_id: fuel.id.clone(),
                emission_factor: fuel.emission_factor,
                power_mwh: vars.power_out[g]
                    .as_ref()
                    .map(|ids| series(ids))
                    .unwrap_or_else(|| vec![0.0; hours]),
                heat_mwh: vars.heat_out[g]
                    .as_ref()
                    .map(|ids| series(ids))
                    .unwrap_or_else(|| vec![0.0; hours]),
                fuel_mwh: series(&vars.fuel_use[g]),
                convexity: vars.convexity[g]
                    .as_ref()
                    .map(|per_hour| per_hour.iter().map(|ids| series(ids)).collect()),
            }
        })
        .collect();

    let storages = instance
        .storages
        .iter()
        .enumerate()
        .map(|(s, storage)| StorageDispatch {
            storage_id: storage.id.clone(),
            turbine_mwh: series(&vars.turbine[s]),
            pump_mwh: series(&vars.pump[s]),
            level_mwh: series(&vars.level[s]),
        })
        .collect();

    Ok(DispatchResult {
        hours,
        power_price: vars
            .power_balance
            .iter()
            .map(|&r| solution.row_duals[r.index()])
            .collect(),
        heat_price: vars.heat_balance.as_ref().map(|rows| {
            rows.iter()
                .map(|&r| solution.row_duals[r.index()])
                .collect()
        }),
        clusters,
        storages,
        non_served_power_mwh: series(&vars.non_served_power),
        non_served_heat_mwh: vars
            .non_served_heat
            .as_ref()
            .map(|ids| series(ids))
            .unwrap_or_else(|| vec![0.0; hours]),
        curtailment_mwh: series(&vars.curtailment),
        total_cost_eur: solution.objective,
    })
}

/// Pearson correlation and root-mean-squared error between a modelled price
/// series and a reference series.
pub fn goodness_of_fit(model: &[f64], reference: &[f64]) -> Result<(f64, f64), DispatchError> {
    if model.len() != reference.len() || model.len() < 2 {
        return Err(DispatchError::FitLength);
    }
    let n = model.len() as f64;
    let mean_m = model.iter().sum::<f64>() / n;
    let mean_r = reference.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_m = 0.0;
    let mut var_r = 0.0;
    let mut sq_err = 0.0;
    for (m, r) in model.iter().zip(reference) {
        let dm = m - mean_m;
        let dr = r - mean_r;
        cov += dm * dr;
        var_m += dm * dm;
        var_r += dr * dr;
        let e = m - r;
        sq_err += e * e;
    }
    if var_m == 0.0 || var_r == 0.0 {
        return Err(DispatchError::FitZeroVariance);
    }
    let correlation = cov / (var_m * var_r).sqrt();
    let rmse = (sq_err / n).sqrt();
    Ok((correlation, rmse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{single_gas_bundle, single_gas_instance};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn column_and_row_counts_for_minimal_power_only_model() {
        let instance = single_gas_instance(2);
        let bundle = single_gas_bundle(2);
        let lp = build_lp(&instance, &bundle, 0.0).unwrap();
        // Per hour: fuel, generation and the two relief columns.
        assert_eq!(lp.num_cols(), 2 * (1 + 1 + 2));
        // Per hour: balance, capacity, efficiency, ancillary.
        assert_eq!(lp.num_rows(), 2 * 4);
        assert!(lp.row_by_name("power_balance[0]").is_some());
        assert!(lp.row_by_name("power_balance[1]").is_some());
        assert!(lp.row_by_name("heat_balance[0]").is_none());
    }

    #[test]
    fn chp_gets_exactly_one_convexity_and_three_region_rows() {
        let mut instance = single_gas_instance(1);
        instance.clusters[0].heat_capacity_mw = 50.0;
        instance.clusters[0].operating_region = Some(OperatingRegion {
            corners: vec![
                RegionCorner { power_mwh: 0.0, heat_mwh: 0.0, fuel_mwh: 0.0 },
                RegionCorner { power_mwh: 100.0, heat_mwh: 0.0, fuel_mwh: 200.0 },
                RegionCorner { power_mwh: 80.0, heat_mwh: 50.0, fuel_mwh: 200.0 },
                RegionCorner { power_mwh: 40.0, heat_mwh: 25.0, fuel_mwh: 100.0 },
            ],
        });
        let bundle = single_gas_bundle(1);
        let lp = build_lp(&instance, &bundle, 0.0).unwrap();
        assert!(lp.row_by_name("conv[0,gas_cc]").is_some());
        assert!(lp.row_by_name("or_pwr[0,gas_cc]").is_some());
        assert!(lp.row_by_name("or_ht[0,gas_cc]").is_some());
        assert!(lp.row_by_name("or_fuel[0,gas_cc]").is_some());
        assert!(lp.row_by_name("eff[0,gas_cc]").is_none());
        // Four corner weights for the single hour.
        for l in 0..4 {
            assert!(lp.col_by_name(&format!("sconv[0,gas_cc,{l}]")).is_some());
        }
    }

    #[test]
    fn zero_shift_uses_raw_emission_prices() {
        let instance = single_gas_instance(1);
        let bundle = single_gas_bundle(1);
        let lp = build_lp(&instance, &bundle, 0.0).unwrap();
        let qf = lp.col_by_name("qf[0,gas_cc]").unwrap();
        // 20 EUR fuel + 0.2 t/MWh x 10 EUR/t.
        assert_abs_diff_eq!(lp.col(qf).objective, 22.0, epsilon = 1e-12);
        let shifted = build_lp(&instance, &bundle, 5.0).unwrap();
        let qf = shifted.col_by_name("qf[0,gas_cc]").unwrap();
        assert_abs_diff_eq!(shifted.col(qf).objective, 23.0, epsilon = 1e-12);
    }

    #[test]
    fn single_gas_cluster_prices_at_marginal_cost() {
        let instance = single_gas_instance(6);
        let bundle = single_gas_bundle(6);
        let result = run_dispatch(&instance, &bundle, 0.0).unwrap();
        // (20 + 0.2 x 10) / 0.5
        for t in 0..6 {
            assert_abs_diff_eq!(result.power_price[t], 44.0, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(result.total_cost_eur, 6.0 * 10.0 / 0.5 * 22.0, epsilon = 1e-6);
        for r in result.power_balance_residuals(&bundle) {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn capped_cheap_cluster_leaves_the_price_with_the_marginal_unit() {
        let mut instance = single_gas_instance(4);
        instance.fuels.push(FuelSpec {
            id: "hard_coal".into(),
            emission_factor: 0.3,
            base_price_series_ref: "hard_coal".into(),
        });
        instance.clusters.push(TechnologyCluster {
            id: "coal_st".into(),
            fuel: "hard_coal".into(),
            num_plants: 1,
            power_capacity_mw: 5.0,
            heat_capacity_mw: 0.0,
            efficiency_power: 0.45,
            om_cost: 0.0,
            operating_region: None,
            is_boiler: false,
        });
        let mut bundle = single_gas_bundle(4);
        bundle
            .fuel_price
            .insert("hard_coal".into(), vec![8.0; 4]);
        let result = run_dispatch(&instance, &bundle, 0.0).unwrap();
        // Coal at (8 + 3) / 0.45 = 24.4 runs at its 5 MW cap; gas covers the
        // remaining 5 MW and sets the price.
        for t in 0..4 {
            assert_abs_diff_eq!(result.power_price[t], 44.0, epsilon = 1e-6);
            assert_abs_diff_eq!(result.clusters[1].power_mwh[t], 5.0, epsilon = 1e-7);
            assert_abs_diff_eq!(result.clusters[0].power_mwh[t], 5.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn excess_demand_prices_at_value_of_lost_load() {
        let mut bundle = single_gas_bundle(3);
        bundle.load_mw[1] = 150.0;
        let instance = single_gas_instance(3);
        let result = run_dispatch(&instance, &bundle, 0.0).unwrap();
        assert!(result.non_served_power_mwh[1] > 49.0);
        assert_abs_diff_eq!(result.power_price[1], instance.penalty.voll, epsilon = 1e-6);
        assert_abs_diff_eq!(result.non_served_power_mwh[0], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn emissions_and_burn_totals() {
        let instance = single_gas_instance(1);
        let bundle = single_gas_bundle(1);
        let result = run_dispatch(&instance, &bundle, 0.0).unwrap();
        let totals = emissions_and_burn(&result);
        // 10 MWh at 0.5 efficiency burns 20 MWh of fuel and emits 4 t.
        assert_abs_diff_eq!(totals.burn_mwh["natural_gas"], 20.0, epsilon = 1e-7);
        assert_abs_diff_eq!(totals.total_emissions_t, 4.0, epsilon = 1e-7);

        let mut clean_instance = instance.clone();
        clean_instance.fuels[0].emission_factor = 0.0;
        let clean = run_dispatch(&clean_instance, &bundle, 0.0).unwrap();
        let clean_totals = emissions_and_burn(&clean);
        assert!(clean_totals.burn_mwh["natural_gas"] > 0.0);
        assert_abs_diff_eq!(clean_totals.total_emissions_t, 0.0);

        let mut idle_bundle = single_gas_bundle(1);
        idle_bundle.load_mw[0] = 0.0;
        let idle = run_dispatch(&instance, &idle_bundle, 0.0).unwrap();
        let idle_totals = emissions_and_burn(&idle);
        assert_abs_diff_eq!(idle_totals.burn_mwh["natural_gas"], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(idle_totals.total_emissions_t, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let instance = single_gas_instance(4);
        let bundle = single_gas_bundle(3);
        assert!(matches!(
            build_lp(&instance, &bundle, 0.0),
            Err(DispatchError::HorizonMismatch { bundle: 3, instance: 4 })
        ));
    }

    #[test]
    fn unattainable_reserve_requirement_is_caught_before_solving() {
        let mut instance = single_gas_instance(2);
        instance.ancillary_min_mw = 500.0;
        assert!(matches!(
            build_lp(&instance, &single_gas_bundle(2), 0.0),
            Err(DispatchError::AncillaryUnattainable { .. })
        ));
    }

    #[test]
    fn heat_capacity_without_region_is_rejected() {
        let mut instance = single_gas_instance(2);
        instance.clusters[0].heat_capacity_mw = 10.0;
        assert!(matches!(
            build_lp(&instance, &single_gas_bundle(2), 0.0),
            Err(DispatchError::HeatWithoutRegion(_))
        ));
    }

    #[test]
    fn ancillary_variant_swaps_pumping_for_level() {
        let mut instance = single_gas_instance(1);
        instance.storages.push(crate::domain::HydroStoragePlant {
            id: "psp".into(),
            turbine_capacity_mw: 5.0,
            pump_capacity_mw: 5.0,
            reservoir_capacity_mwh: 20.0,
            cycle_efficiency: 0.8,
            storage_class: crate::domain::StorageClass::Daily,
            initial_level_mwh: 10.0,
        });
        let bundle = single_gas_bundle(1);
        let default_model = build_model(&instance, &bundle, 0.0, &BuildOptions::default()).unwrap();
        let printed = build_model(
            &instance,
            &bundle,
            0.0,
            &BuildOptions {
                ancillary_uses_storage_level: true,
            },
        )
        .unwrap();
        let row_cols = |model: &DispatchModel| {
            let row = model.lp.row_by_name("ancillary[0]").unwrap();
            model
                .lp
                .row(row)
                .coeffs
                .iter()
                .map(|&(c, _)| c)
                .collect::<Vec<_>>()
        };
        let pump_col = default_model.vars.pump[0][0].index();
        let level_col = printed.vars.level[0][0].index();
        assert!(row_cols(&default_model).contains(&pump_col));
        assert!(!row_cols(&default_model).contains(&level_col));
        assert!(row_cols(&printed).contains(&level_col));
        assert!(!row_cols(&printed).contains(&pump_col));
    }

    use crate::domain::{FuelSpec, OperatingRegion, RegionCorner, TechnologyCluster};

    #[test]
    fn rich_instance_emits_every_constraint_family() {
        let mut instance = crate::presets::default_instance();
        instance.horizon_hours = 2;
        let bundle = crate::timeseries::synthesize_year(
            1,
            &crate::timeseries::SynthesisProfile::default(),
        )
        .unwrap()
        .truncated(2);
        let lp = build_lp(&instance, &bundle, 0.0).unwrap();
        assert!(lp.validate().is_empty());
        for name in [
            "power_balance[1]",
            "heat_balance[1]",
            "cap_pwr[0,gas_cc]",
            "cap_ht[0,gas_boiler]",
            "conv[1,gas_chp]",
            "or_fuel[0,coal_chp]",
            "eff[1,gas_boiler]",
            "ancillary[0]",
            "storage_level[1,psp_daily]",
        ] {
            assert!(lp.row_by_name(name).is_some(), "missing row {name}");
        }
        // Boilers have no power column, power-only clusters no heat column.
        assert!(lp.col_by_name("qp_pwr[0,gas_boiler]").is_none());
        assert!(lp.col_by_name("qp_ht[0,nuclear_st]").is_none());
        assert!(lp.col_by_name("qns_ht[1]").is_some());
    }

    #[test]
    fn fit_examples() {
        let series = vec![1.0, 5.0, 3.0, 8.0];
        let (corr, rmse) = goodness_of_fit(&series, &series).unwrap();
        assert_abs_diff_eq!(corr, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rmse, 0.0, epsilon = 1e-12);

        let offset: Vec<f64> = series.iter().map(|v| v + 10.0).collect();
        let (corr, rmse) = goodness_of_fit(&series, &offset).unwrap();
        assert_abs_diff_eq!(corr, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rmse, 10.0, epsilon = 1e-12);

        let anti: Vec<f64> = vec![2.0, -1.0, 1.0, -2.0];
        let negated: Vec<f64> = anti.iter().map(|v| -v).collect();
        let (corr, _) = goodness_of_fit(&anti, &negated).unwrap();
        assert_abs_diff_eq!(corr, -1.0, epsilon = 1e-12);

        assert!(matches!(
            goodness_of_fit(&series, &[1.0, 1.0, 1.0, 1.0]),
            Err(DispatchError::FitZeroVariance)
        ));
        assert!(matches!(
            goodness_of_fit(&series, &offset[..3]),
            Err(DispatchError::FitLength)
        ));
    }
}

//! Ready-made synthetic instances and series.
//!
//! These are illustrative parameterisations for tests, benchmarks and first
//! runs, not a reconstruction of any real fleet. All series are closed-form
//! and deterministic so runs against them are reproducible bit for bit.

use crate::domain::{
    FuelSpec, HydroStoragePlant, OperatingRegion, PenaltyConfig, RegionCorner, StorageClass,
    SystemInstance, TechnologyCluster,
};
use crate::timeseries::TimeSeriesBundle;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

fn fuel(id: &str, emission_factor: f64) -> FuelSpec {
    FuelSpec {
        id: id.to_string(),
        emission_factor,
        base_price_series_ref: id.to_string(),
    }
}

fn power_cluster(id: &str, fuel: &str, cap_mw: f64, efficiency: f64, om: f64) -> TechnologyCluster {
    TechnologyCluster {
        id: id.to_string(),
        fuel: fuel.to_string(),
        num_plants: 1,
        power_capacity_mw: cap_mw,
        heat_capacity_mw: 0.0,
        efficiency_power: efficiency,
        om_cost: om,
        operating_region: None,
        is_boiler: false,
    }
}

/// Extraction-type operating region: full power with no heat, a back
/// pressure corner trading power for heat at constant fuel, and shutdown.
fn extraction_region(power_max: f64, heat_max: f64, eta_el: f64, beta: f64) -> OperatingRegion {
    let fuel_max = power_max / eta_el;
    OperatingRegion {
        corners: vec![
            RegionCorner {
                power_mwh: 0.0,
                heat_mwh: 0.0,
                fuel_mwh: 0.0,
            },
            RegionCorner {
                power_mwh: power_max,
                heat_mwh: 0.0,
                fuel_mwh: fuel_max,
            },
            RegionCorner {
                power_mwh: power_max - beta * heat_max,
                heat_mwh: heat_max,
                fuel_mwh: fuel_max,
            },
        ],
    }
}

/// One gas cluster, flat demand far below capacity, constant prices. The
/// marginal cost of the cluster sets the price in every hour, so the
/// pass-through of an emission price step is its emission intensity over its
/// efficiency.
pub fn single_gas_instance(hours: usize) -> SystemInstance {
    SystemInstance {
        fuels: vec![fuel("natural_gas", 0.2)],
        clusters: vec![power_cluster("gas_cc", "natural_gas", 100.0, 0.5, 0.0)],
        storages: vec![],
        penalty: PenaltyConfig::default(),
        ancillary_min_mw: 0.0,
        horizon_hours: hours,
    }
}

/// Flat companion bundle for [`single_gas_instance`].
pub fn single_gas_bundle(hours: usize) -> TimeSeriesBundle {
    let mut fuel_price = BTreeMap::new();
    fuel_price.insert("natural_gas".to_string(), vec![20.0; hours]);
    TimeSeriesBundle {
        hours,
        timestamps: (0..hours).map(|t| format!("h{t}")).collect(),
        load_mw: vec![10.0; hours],
        heat_mw: vec![0.0; hours],
        wind_mw: vec![0.0; hours],
        solar_mw: vec![0.0; hours],
        ror_mw: vec![0.0; hours],
        inflow_mwh: vec![0.0; hours],
        net_import_mw: vec![0.0; hours],
        fuel_price,
        eua_price: vec![10.0; hours],
        reference_price: None,
    }
}

/// Three thermal fuels sized so the merit order reshuffles as emission
/// prices rise: lignite is cheap and dirty, hard coal sits in the middle,
/// natural gas is clean and dear. Lignite is fully loaded in every hour at
/// low emission prices, becomes the mid-merit price setter around
/// 25-35 EUR/t and leaves the stack at high prices.
pub fn fuel_switch_instance() -> SystemInstance {
    SystemInstance {
        fuels: vec![
            fuel("lignite", 0.399),
            fuel("hard_coal", 0.337),
            fuel("natural_gas", 0.201),
        ],
        clusters: vec![
            power_cluster("lignite_st", "lignite", 28.0, 0.38, 0.0),
            power_cluster("coal_st", "hard_coal", 22.0, 0.44, 0.0),
            power_cluster("gas_cc", "natural_gas", 85.0, 0.50, 0.0),
        ],
        storages: vec![],
        penalty: PenaltyConfig::default(),
        ancillary_min_mw: 40.0,
        horizon_hours: 168,
    }
}

/// One synthetic week for [`fuel_switch_instance`]: a diurnal demand wave
/// with a weekly swell, night-peaking wind and a small midday solar hump.
/// In the lowest-demand night hours the residual load falls below the
/// ancillary requirement, so reserve provision forces curtailment there.
pub fn fuel_switch_bundle() -> TimeSeriesBundle {
    let hours = 168;
    let mut load = Vec::with_capacity(hours);
    let mut wind = Vec::with_capacity(hours);
    let mut solar = Vec::with_capacity(hours);
    let mut net_import = Vec::with_capacity(hours);
    for t in 0..hours {
        let hour = (t % 24) as f64;
        let day_wave = -(TAU * (hour - 3.0) / 24.0).cos();
        let week_wave = (TAU * (t as f64 - 30.0) / 168.0).sin();
        load.push(68.0 + 14.0 * day_wave + 4.0 * week_wave);
        wind.push(11.0 + 7.0 * (TAU * (hour - 3.0) / 24.0).cos());
        let daylight = (std::f64::consts::PI * (hour - 6.0) / 12.0).sin().max(0.0);
        solar.push(6.0 * daylight);
        net_import.push(-2.0 - 1.5 * (TAU * (hour - 15.0) / 24.0).cos());
    }

    let mut fuel_price = BTreeMap::new();
    fuel_price.insert("lignite".to_string(), vec![5.5; hours]);
    fuel_price.insert("hard_coal".to_string(), vec![9.65; hours]);
    fuel_price.insert("natural_gas".to_string(), vec![17.27; hours]);
    TimeSeriesBundle {
        hours,
        timestamps: (0..hours).map(|t| format!("h{t}")).collect(),
        load_mw: load,
        heat_mw: vec![0.0; hours],
        wind_mw: wind,
        solar_mw: solar,
        ror_mw: vec![0.0; hours],
        inflow_mwh: vec![0.0; hours],
        net_import_mw: net_import,
        fuel_price,
        eua_price: vec![5.89; hours],
        reference_price: None,
    }
}

/// Small illustrative thermal-plus-hydro system with CHP clusters, a boiler
/// block and all three storage classes. Pairs with the synthetic year from
/// the series generator; capacities are in MW against a roughly 69 GW mean
/// load. The default horizon is two days; longer horizons work but the
/// model grows by about forty rows per hour, which the reference solver
/// feels beyond a few thousand rows.
pub fn default_instance() -> SystemInstance {
    SystemInstance {
        fuels: vec![
            fuel("nuclear", 0.0),
            fuel("lignite", 0.399),
            fuel("hard_coal", 0.337),
            fuel("natural_gas", 0.201),
            fuel("oil", 0.266),
            fuel("biomass", 0.0),
        ],
        clusters: vec![
            power_cluster("nuclear_st", "nuclear", 10_000.0, 0.33, 1.0),
            power_cluster("lignite_st", "lignite", 17_000.0, 0.39, 1.2),
            TechnologyCluster {
                id: "lignite_chp".into(),
                fuel: "lignite".into(),
                num_plants: 12,
                power_capacity_mw: 3_000.0,
                heat_capacity_mw: 4_000.0,
                efficiency_power: 0.36,
                om_cost: 1.2,
                operating_region: Some(extraction_region(3_000.0, 4_000.0, 0.36, 0.2)),
                is_boiler: false,
            },
            power_cluster("coal_st", "hard_coal", 22_000.0, 0.42, 1.0),
            TechnologyCluster {
                id: "coal_chp".into(),
                fuel: "hard_coal".into(),
                num_plants: 20,
                power_capacity_mw: 4_000.0,
                heat_capacity_mw: 5_000.0,
                efficiency_power: 0.38,
                om_cost: 1.0,
                operating_region: Some(extraction_region(4_000.0, 5_000.0, 0.38, 0.2)),
                is_boiler: false,
            },
            power_cluster("gas_cc", "natural_gas", 18_000.0, 0.55, 0.8),
            TechnologyCluster {
                id: "gas_chp".into(),
                fuel: "natural_gas".into(),
                num_plants: 30,
                power_capacity_mw: 4_000.0,
                heat_capacity_mw: 6_000.0,
                efficiency_power: 0.45,
                om_cost: 0.8,
                operating_region: Some(extraction_region(4_000.0, 6_000.0, 0.45, 0.18)),
                is_boiler: false,
            },
            power_cluster("gas_turbine", "natural_gas", 6_000.0, 0.38, 0.5),
            power_cluster("oil_st", "oil", 2_500.0, 0.36, 1.5),
            power_cluster("biomass_st", "biomass", 5_000.0, 0.30, 2.0),
            TechnologyCluster {
                id: "gas_boiler".into(),
                fuel: "natural_gas".into(),
                num_plants: 200,
                power_capacity_mw: 0.0,
                heat_capacity_mw: 30_000.0,
                efficiency_power: 0.9,
                om_cost: 0.3,
                operating_region: None,
                is_boiler: true,
            },
        ],
        storages: vec![
            HydroStoragePlant {
                id: "psp_daily".into(),
                turbine_capacity_mw: 5_000.0,
                pump_capacity_mw: 5_000.0,
                reservoir_capacity_mwh: 30_000.0,
                cycle_efficiency: 0.75,
                storage_class: StorageClass::Daily,
                initial_level_mwh: 15_000.0,
            },
            HydroStoragePlant {
                id: "psp_weekly".into(),
                turbine_capacity_mw: 3_000.0,
                pump_capacity_mw: 2_500.0,
                reservoir_capacity_mwh: 300_000.0,
                cycle_efficiency: 0.75,
                storage_class: StorageClass::Weekly,
                initial_level_mwh: 150_000.0,
            },
            HydroStoragePlant {
                id: "reservoir_seasonal".into(),
                turbine_capacity_mw: 4_000.0,
                pump_capacity_mw: 0.0,
                reservoir_capacity_mwh: 2_000_000.0,
                cycle_efficiency: 1.0,
                storage_class: StorageClass::Seasonal,
                initial_level_mwh: 1_000_000.0,
            },
        ],
        penalty: PenaltyConfig::default(),
        ancillary_min_mw: 21_000.0,
        horizon_hours: 48,
    }
}

//! Shared helpers for the integration suites: an independent merit-order
//! price oracle, a generator for random power-only systems and conservation
//! assertions. The oracle deliberately avoids the LP path: it sorts clusters
//! by marginal cost and fills residual load greedily.

use merit_core::domain::{FuelSpec, PenaltyConfig, SystemInstance, TechnologyCluster};
use merit_core::dispatch::{inflow_allocation, DispatchResult};
use merit_core::timeseries::TimeSeriesBundle;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Greedy merit-order prices for a power-only, storage-free instance whose
/// ancillary constraint never binds: the hourly price is the fuel, emission
/// and O&M cost per MWh of the most expensive dispatched cluster, the value
/// of lost load when demand exceeds installed capacity, and the negative
/// curtailment cost when renewables exceed demand.
pub fn merit_order_prices(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    eua_shift: f64,
) -> Vec<f64> {
    (0..bundle.hours)
        .map(|t| {
            let residual = bundle.load_mw[t]
                - bundle.net_import_mw[t]
                - bundle.wind_mw[t]
                - bundle.solar_mw[t]
                - bundle.ror_mw[t];
            if residual < 0.0 {
                return -instance.penalty.curtailment_cost;
            }
            let mut stack: Vec<(f64, f64)> = instance
                .clusters
                .iter()
                .map(|cluster| {
                    let fuel = instance.fuel(&cluster.fuel).unwrap();
                    let price = bundle.fuel_price(&fuel.base_price_series_ref).unwrap()[t];
                    let marginal = (price
                        + fuel.emission_factor * (bundle.eua_price[t] + eua_shift)
                        + cluster.om_cost)
                        / cluster.efficiency_power;
                    (marginal, cluster.power_capacity_mw)
                })
                .collect();
            stack.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut remaining = residual;
            for (marginal, capacity) in stack {
                if remaining <= capacity {
                    return marginal;
                }
                remaining -= capacity;
            }
            instance.penalty.voll
        })
        .collect()
}

/// Random thermal-only instance plus a matching bundle. Continuous draws
/// keep marginal costs distinct and residual loads away from capacity
/// boundaries almost surely.
pub fn random_power_only_system(rng: &mut ChaCha8Rng) -> (SystemInstance, TimeSeriesBundle) {
    let n_clusters = rng.random_range(1..=8);
    let hours = rng.random_range(2..=48);

    let mut fuels = Vec::new();
    let mut clusters = Vec::new();
    let mut fuel_price = BTreeMap::new();
    let mut total_cap = 0.0;
    for i in 0..n_clusters {
        let fuel_id = format!("fuel{i}");
        fuels.push(FuelSpec {
            id: fuel_id.clone(),
            emission_factor: rng.random_range(0.0..0.45),
            base_price_series_ref: fuel_id.clone(),
        });
        let level = rng.random_range(4.0..30.0);
        let series: Vec<f64> = (0..hours)
            .map(|_| level * rng.random_range(0.9..1.1))
            .collect();
        fuel_price.insert(fuel_id.clone(), series);
        let capacity = rng.random_range(10.0..100.0);
        total_cap += capacity;
        clusters.push(TechnologyCluster {
            id: format!("cluster{i}"),
            fuel: fuel_id,
            num_plants: 1,
            power_capacity_mw: capacity,
            heat_capacity_mw: 0.0,
            efficiency_power: rng.random_range(0.28..0.62),
            om_cost: rng.random_range(0.0..3.0),
            operating_region: None,
            is_boiler: false,
        });
    }

    let instance = SystemInstance {
        fuels,
        clusters,
        storages: vec![],
        penalty: PenaltyConfig::default(),
        ancillary_min_mw: 0.0,
        horizon_hours: hours,
    };

    let load: Vec<f64> = (0..hours)
        .map(|_| total_cap * rng.random_range(0.05..1.15))
        .collect();
    let wind: Vec<f64> = (0..hours)
        .map(|_| total_cap * rng.random_range(0.0..0.25))
        .collect();
    let net_import: Vec<f64> = (0..hours)
        .map(|_| total_cap * rng.random_range(-0.1..0.1))
        .collect();
    let bundle = TimeSeriesBundle {
        hours,
        timestamps: (0..hours).map(|t| format!("h{t}")).collect(),
        load_mw: load,
        heat_mw: vec![0.0; hours],
        wind_mw: wind,
        solar_mw: vec![0.0; hours],
        ror_mw: vec![0.0; hours],
        inflow_mwh: vec![0.0; hours],
        net_import_mw: net_import,
        fuel_price,
        eua_price: (0..hours).map(|_| rng.random_range(3.0..30.0)).collect(),
        reference_price: None,
    };
    (instance, bundle)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Conservation identities of one solved dispatch, asserted to `tol`:
/// hourly power balance, per-plant storage balance against its inflow
/// share, and the emissions accounting identity.
pub fn assert_conserved(
    instance: &SystemInstance,
    bundle: &TimeSeriesBundle,
    result: &DispatchResult,
    tol: f64,
) {
    for (t, residual) in result.power_balance_residuals(bundle).iter().enumerate() {
        assert!(
            residual.abs() <= tol * (1.0 + bundle.load_mw[t].abs()),
            "hour {t}: power balance residual {residual}"
        );
    }

    let shares = inflow_allocation(instance);
    for (s, storage) in instance.storages.iter().enumerate() {
        let dispatch = &result.storages[s];
        let inflow: f64 = bundle.inflow_mwh.iter().map(|v| shares[s] * v).sum();
        let pumped: f64 = dispatch.pump_mwh.iter().sum();
        let turbined: f64 = dispatch.turbine_mwh.iter().sum();
        let terminal = dispatch.level_mwh[result.hours - 1];
        let balance =
            inflow + storage.cycle_efficiency * pumped - turbined - (terminal - storage.initial_level_mwh);
        let scale = 1.0 + inflow.abs() + pumped + turbined + storage.initial_level_mwh;
        assert!(
            balance.abs() <= tol * scale,
            "storage {}: conservation residual {balance}",
            storage.id
        );
        for (t, level) in dispatch.level_mwh.iter().enumerate() {
            assert!(
                *level >= -tol * scale && *level <= storage.reservoir_capacity_mwh + tol * scale,
                "storage {} hour {t}: level {level} outside reservoir",
                storage.id
            );
        }
    }

    // Emissions identity: totals equal the sum over clusters of emission
    // factor times fuel burn.
    let recomputed: f64 = result
        .clusters
        .iter()
        .map(|c| c.emission_factor * c.fuel_mwh.iter().sum::<f64>())
        .sum();
    let reported = result.total_emissions_t();
    assert!(
        (recomputed - reported).abs() <= tol * (1.0 + recomputed.abs()),
        "emissions identity violated: {recomputed} vs {reported}"
    );
}

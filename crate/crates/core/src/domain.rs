//! Validated domain types describing a power system instance: fuels, thermal
//! technology clusters, combined heat and power operating regions, hydro
//! storage plants and system-wide penalty and reserve settings.
//!
//! All types are plain data, immutable after construction and safe to share
//! across concurrent scenario evaluations. Invariants are not enforced by
//! constructors; [`validate_instance`] reports every breach as data so that
//! callers can surface all problems of an input file at once.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

/// A fuel with its CO2 emission factor in tonnes per MWh of fuel burnt.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FuelSpec {
    pub id: String,
    /// t CO2 per MWh of fuel burnt.
    pub emission_factor: f64,
    /// Name of the price series carrying this fuel's cost, as found in the
    /// time series bundle (column `price_<base_price_series_ref>`).
    pub base_price_series_ref: String,
}

/// One corner of a CHP feasible operating region: a viable combination of
/// power output, heat output and the fuel required to produce it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RegionCorner {
    pub power_mwh: f64,
    pub heat_mwh: f64,
    pub fuel_mwh: f64,
}

/// Convex hull of viable (power, heat, fuel) operating points of a CHP
/// cluster. Actual operation is a convex combination of the corners.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OperatingRegion {
    pub corners: Vec<RegionCorner>,
}

/// A group of similar plants dispatched as one aggregate unit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TechnologyCluster {
    pub id: String,
    /// Id of the fuel this cluster burns.
    pub fuel: String,
    /// Number of physical plants aggregated here; metadata only, capacities
    /// below are cluster-level aggregates.
    pub num_plants: u32,
    pub power_capacity_mw: f64,
    pub heat_capacity_mw: f64,
    /// Fuel-to-power conversion efficiency. For boiler clusters this is the
    /// fuel-to-heat efficiency instead.
    pub efficiency_power: f64,
    /// Variable operation and maintenance cost, charged per MWh of fuel.
    pub om_cost: f64,
    /// Present exactly when the cluster co-generates heat and power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_region: Option<OperatingRegion>,
    /// Heat-only cluster (no power output, no operating region).
    #[serde(default)]
    pub is_boiler: bool,
}

impl TechnologyCluster {
    pub fn is_chp(&self) -> bool {
        self.operating_region.is_some()
    }

    /// Whether the cluster can put heat on the heat balance.
    pub fn serves_heat(&self) -> bool {
        self.is_boiler || self.is_chp()
    }
}

/// Operational class of a hydro storage plant; groups plants by the cycle
/// length their reservoir is sized for.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StorageClass {
    Daily,
    Weekly,
    Seasonal,
}

/// A reservoir or pumped hydro storage plant.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HydroStoragePlant {
    pub id: String,
    pub turbine_capacity_mw: f64,
    /// Zero for reservoir-only plants without pumps.
    pub pump_capacity_mw: f64,
    pub reservoir_capacity_mwh: f64,
    /// Round-trip efficiency, charged on pumping.
    pub cycle_efficiency: f64,
    pub storage_class: StorageClass,
    pub initial_level_mwh: f64,
}

/// Penalties attached to the two relief variables of the balances.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PenaltyConfig {
    /// Value of lost load, EUR per MWh of non-served demand. Must exceed any
    /// plausible marginal generation cost so relief is always a last resort.
    pub voll: f64,
    /// Cost per MWh of curtailed renewable generation.
    pub curtailment_cost: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            voll: 12_500.0,
            curtailment_cost: 100.0,
        }
    }
}

/// A complete, self-contained description of the modelled power system.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemInstance {
    pub fuels: Vec<FuelSpec>,
    pub clusters: Vec<TechnologyCluster>,
    pub storages: Vec<HydroStoragePlant>,
    pub penalty: PenaltyConfig,
    /// Minimum thermal-or-storage capacity that must be operating in every
    /// hour to provide ancillary services, MW.
    pub ancillary_min_mw: f64,
    pub horizon_hours: usize,
}

impl SystemInstance {
    pub fn fuel(&self, id: &str) -> Option<&FuelSpec> {
        self.fuels.iter().find(|f| f.id == id)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialises")
    }
}

/// A breached invariant, naming the offending entity and the rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

fn violation(entity: impl Into<String>, rule: impl Into<String>) -> Violation {
    Violation {
        entity: entity.into(),
        rule: rule.into(),
    }
}

/// Check every invariant of the instance. The empty list certifies a
/// well-formed instance; the function is pure and idempotent.
pub fn validate_instance(instance: &SystemInstance) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut fuel_ids = HashSet::new();
    for fuel in &instance.fuels {
        if !fuel_ids.insert(fuel.id.as_str()) {
            out.push(violation(
                format!("fuel {}", fuel.id),
                "fuel ids must be unique",
            ));
        }
        if !(fuel.emission_factor >= 0.0) {
            out.push(violation(
                format!("fuel {}", fuel.id),
                format!(
                    "emission factor must be nonnegative, got {}",
                    fuel.emission_factor
                ),
            ));
        }
    }

    let mut cluster_ids = HashSet::new();
    for cluster in &instance.clusters {
        let entity = format!("cluster {}", cluster.id);
        if !cluster_ids.insert(cluster.id.as_str()) {
            out.push(violation(&entity, "cluster ids must be unique"));
        }
        if instance.fuel(&cluster.fuel).is_none() {
            out.push(violation(
                &entity,
                format!("references unknown fuel `{}`", cluster.fuel),
            ));
        }
        if !(cluster.power_capacity_mw >= 0.0) || !(cluster.heat_capacity_mw >= 0.0) {
            out.push(violation(&entity, "capacities must be nonnegative"));
        }
        if !(cluster.efficiency_power > 0.0 && cluster.efficiency_power <= 1.0) {
            out.push(violation(
                &entity,
                format!(
                    "efficiency must lie in (0, 1], got {}",
                    cluster.efficiency_power
                ),
            ));
        }
        if !(cluster.om_cost >= 0.0) {
            out.push(violation(&entity, "O&M cost must be nonnegative"));
        }
        if cluster.is_boiler {
            if cluster.power_capacity_mw != 0.0 {
                out.push(violation(&entity, "a boiler must have zero power capacity"));
            }
            if cluster.operating_region.is_some() {
                out.push(violation(&entity, "a boiler cannot have an operating region"));
            }
        }
        if let Some(region) = &cluster.operating_region {
            if region.corners.len() < 2 {
                out.push(violation(
                    &entity,
                    "operating region needs at least two corners",
                ));
            }
            if region.corners.iter().any(|c| {
                !(c.power_mwh >= 0.0) || !(c.heat_mwh >= 0.0) || !(c.fuel_mwh >= 0.0)
            }) {
                out.push(violation(
                    &entity,
                    "operating region corners must be nonnegative",
                ));
            }
            if !region.corners.iter().any(|c| c.power_mwh > 0.0) {
                out.push(violation(
                    &entity,
                    "operating region needs a corner with positive power output",
                ));
            }
        }
    }

    let mut storage_ids = HashSet::new();
    for storage in &instance.storages {
        let entity = format!("storage {}", storage.id);
        if !storage_ids.insert(storage.id.as_str()) {
            out.push(violation(&entity, "storage ids must be unique"));
        }
        if !(storage.cycle_efficiency > 0.0 && storage.cycle_efficiency <= 1.0) {
            out.push(violation(
                &entity,
                format!(
                    "cycle efficiency must lie in (0, 1], got {}",
                    storage.cycle_efficiency
                ),
            ));
        }
        if !(storage.turbine_capacity_mw >= 0.0)
            || !(storage.pump_capacity_mw >= 0.0)
            || !(storage.reservoir_capacity_mwh >= 0.0)
        {
            out.push(violation(&entity, "capacities must be nonnegative"));
        }
        if !(storage.initial_level_mwh >= 0.0
            && storage.initial_level_mwh <= storage.reservoir_capacity_mwh)
        {
            out.push(violation(
                &entity,
                format!(
                    "initial level {} outside [0, {}]",
                    storage.initial_level_mwh, storage.reservoir_capacity_mwh
                ),
            ));
        }
    }

    if !(instance.penalty.curtailment_cost >= 0.0) {
        out.push(violation("penalty", "curtailment cost must be nonnegative"));
    }
    if !(instance.penalty.voll > instance.penalty.curtailment_cost) {
        out.push(violation(
            "penalty",
            "value of lost load must exceed the curtailment cost",
        ));
    }
    if !(instance.ancillary_min_mw >= 0.0) {
        out.push(violation(
            "ancillary_min_mw",
            "ancillary requirement must be nonnegative",
        ));
    }
    if instance.horizon_hours < 1 {
        out.push(violation("horizon_hours", "horizon must cover at least one hour"));
    }

    out
}

/// Reserve capacity that must stay operational: 12.5% of peak load plus 7.5%
/// of installed wind and solar capacity.
pub fn ancillary_requirement(
    peak_load_mw: f64,
    wind_capacity_mw: f64,
    solar_capacity_mw: f64,
) -> Result<f64, DomainError> {
    for (name, value) in [
        ("peak_load_mw", peak_load_mw),
        ("wind_capacity_mw", wind_capacity_mw),
        ("solar_capacity_mw", solar_capacity_mw),
    ] {
        if !(value >= 0.0) {
            return Err(DomainError::Negative { name, value });
        }
    }
    Ok(0.125 * peak_load_mw + 0.075 * (wind_capacity_mw + solar_capacity_mw))
}

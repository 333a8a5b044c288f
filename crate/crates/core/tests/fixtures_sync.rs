//! The committed data files must stay in lockstep with the preset builders.

use merit_core::domain::SystemInstance;
use merit_core::presets::{default_instance, fuel_switch_bundle, fuel_switch_instance};
use merit_core::timeseries::load_bundle_csv;
use std::path::PathBuf;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn committed_instances_match_presets() {
    let default_file =
        SystemInstance::from_json(&std::fs::read_to_string(data("default_instance.json")).unwrap())
            .unwrap();
    assert_eq!(default_file, default_instance());

    let switch_file = SystemInstance::from_json(
        &std::fs::read_to_string(data("fuel_switch_instance.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(switch_file, fuel_switch_instance());
}

#[test]
fn committed_week_matches_preset_bundle() {
    let file = load_bundle_csv(data("fuel_switch_week.csv")).unwrap();
    assert_eq!(file, fuel_switch_bundle());
}

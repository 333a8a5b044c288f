//! `merit`: dispatch runs, emission-price sweeps, sensitivity experiments,
//! synthetic years and district-heating threshold reports from the command
//! line.
//!
//! Exit codes: 0 on success, 1 when inputs fail validation or a run fails,
//! 2 on usage errors.

mod manifest;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use manifest::ManifestBuilder;
use merit_core::dh::{calibrate_thresholds, min_markup, min_passthrough, threshold_surface, DhPortfolio};
use merit_core::dispatch::{emissions_and_burn, run_dispatch, goodness_of_fit};
use merit_core::domain::{validate_instance, SystemInstance};
use merit_core::scenario::{
    run_sweep, write_passthrough_csv, write_sweep_csv, Sensitivity, SweepSpec,
};
use merit_core::timeseries::{
    load_bundle_csv, synthesize_year, SynthesisProfile, TimeSeriesBundle,
};
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "merit", version, about = "Power system dispatch, emission-price sweeps and district-heating thresholds")]
struct Cli {
    /// Optional JSON file with default values for common flags; explicit
    /// flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct InputArgs {
    /// System instance (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Hourly series (CSV).
    #[arg(long)]
    series: Option<PathBuf>,
    /// Use only the first N hours of the series (and set the horizon to N).
    #[arg(long)]
    hours: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file (and optionally a series file) against every
    /// invariant; exits 1 listing all breaches if any.
    Validate {
        #[command(flatten)]
        input: InputArgs,
    },
    /// One dispatch run; writes dispatch_hourly.csv and totals.json.
    Run {
        #[command(flatten)]
        input: InputArgs,
        /// Constant added to the emission price series, EUR/t.
        #[arg(long, default_value_t = 0.0)]
        eua_shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emission-price sweep; writes sweep.csv and passthrough.csv.
    Sweep {
        #[command(flatten)]
        input: InputArgs,
        /// Mean emission price of the first scenario, EUR/t.
        #[arg(long)]
        start: Option<f64>,
        /// Increment between scenarios, EUR/t.
        #[arg(long)]
        step: Option<f64>,
        /// Number of scenarios.
        #[arg(long)]
        count: Option<usize>,
        /// Cap on concurrent scenario solves.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep under one robustness transform.
    Sensitivity {
        #[command(flatten)]
        input: InputArgs,
        /// One of: imports, coal, ancillary, res2025, res2030.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// District-heating threshold report; writes thresholds.csv and
    /// surface.csv.
    DhThresholds {
        /// Electrical efficiencies for the report rows, comma separated.
        #[arg(long, default_value = "0.3,0.4,0.5,0.6")]
        eta_el: String,
        /// CHP heat efficiency per row (one value or a matching list).
        /// Defaults to the calibrated reference set for the standard rows.
        #[arg(long)]
        eta_th: Option<String>,
        /// Boiler heat efficiency.
        #[arg(long, default_value_t = 0.9)]
        eta_boiler: f64,
        /// Fuel emission factor, t/MWh. Defaults to the calibrated value.
        #[arg(long)]
        em: Option<f64>,
        /// CHP share of fossil heat. Defaults to the calibrated value.
        #[arg(long)]
        share: Option<f64>,
        /// Electrical-efficiency grid of the surface, comma separated.
        #[arg(long, default_value = "0.3,0.35,0.4,0.45,0.5,0.55,0.6")]
        surface_eta_el: String,
        /// CHP-share grid of the surface, comma separated.
        #[arg(long, default_value = "0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1.0")]
        surface_share: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deterministic synthetic year; writes series.csv.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
        /// Optional synthesis profile (JSON); defaults approximate a recent
        /// Austrian-German year.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Goodness of fit of modelled prices against the bundle's ref_price
    /// column; writes fit.json.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0.0)]
        eua_shift: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Defaults that a config file may supply for the common flags.
#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    instance: Option<PathBuf>,
    series: Option<PathBuf>,
    out: Option<PathBuf>,
    hours: Option<usize>,
    jobs: Option<usize>,
    seed: Option<u64>,
    start: Option<f64>,
    step: Option<f64>,
    count: Option<usize>,
}

struct Usage(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(cli.config.as_deref()) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match dispatch_command(cli.command, &config) {
        Ok(code) => code,
        Err(err) => {
            if let Some(Usage(msg)) = err.downcast_ref::<Usage>() {
                eprintln!("usage error: {msg}");
                ExitCode::from(EXIT_USAGE)
            } else {
                eprintln!("error: {err:#}");
                ExitCode::from(EXIT_FAILURE)
            }
        }
    }
}

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Debug for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

fn load_config(path: Option<&Path>) -> anyhow::Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config `{}`", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("config `{}` is not valid", path.display()))
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| usage(format!("missing --{flag} (flag or config file)")))
}

fn dispatch_command(command: Command, config: &FileConfig) -> anyhow::Result<ExitCode> {
    match command {
        Command::Validate { input } => cmd_validate(input, config),
        Command::Run {
            input,
            eua_shift,
            out,
        } => cmd_run(input, eua_shift, out, config),
        Command::Sweep {
            input,
            start,
            step,
            count,
            jobs,
            out,
        } => cmd_sweep(input, start, step, count, jobs, out, config, Sensitivity::None, "sweep"),
        Command::Sensitivity {
            input,
            kind,
            start,
            step,
            count,
            jobs,
            out,
        } => {
            let sensitivity = Sensitivity::parse(&kind)
                .filter(|s| *s != Sensitivity::None)
                .ok_or_else(|| {
                    usage(format!(
                        "unknown sensitivity kind `{kind}` (expected imports, coal, ancillary, \
                         res2025 or res2030)"
                    ))
                })?;
            cmd_sweep(input, start, step, count, jobs, out, config, sensitivity, "sensitivity")
        }
        Command::DhThresholds {
            eta_el,
            eta_th,
            eta_boiler,
            em,
            share,
            surface_eta_el,
            surface_share,
            out,
        } => cmd_dh_thresholds(
            eta_el,
            eta_th,
            eta_boiler,
            em,
            share,
            surface_eta_el,
            surface_share,
            out,
            config,
        ),
        Command::Synth { seed, profile, out } => cmd_synth(seed, profile, out, config),
        Command::Fit {
            input,
            eua_shift,
            out,
        } => cmd_fit(input, eua_shift, out, config),
    }
}

fn load_inputs(
    input: &InputArgs,
    config: &FileConfig,
    series_required: bool,
) -> anyhow::Result<(SystemInstance, Option<TimeSeriesBundle>, PathBuf, Option<PathBuf>)> {
    let instance_path = require(
        input.instance.clone().or_else(|| config.instance.clone()),
        "instance",
    )?;
    let text = std::fs::read_to_string(&instance_path)
        .with_context(|| format!("cannot read instance `{}`", instance_path.display()))?;
    let mut instance = SystemInstance::from_json(&text)
        .with_context(|| format!("instance `{}` is not valid JSON", instance_path.display()))?;

    let series_path = input.series.clone().or_else(|| config.series.clone());
    if series_required && series_path.is_none() {
        return Err(usage("missing --series (flag or config file)"));
    }
    let hours = input.hours.or(config.hours);
    let bundle = match &series_path {
        Some(path) => {
            let mut bundle = load_bundle_csv(path)
                .map_err(|e| anyhow!("series `{}`: {e}", path.display()))?;
            if let Some(n) = hours {
                bundle = bundle.truncated(n);
                instance.horizon_hours = bundle.hours;
            } else if bundle.hours > instance.horizon_hours {
                // A year-long file against a short-horizon instance: use the
                // leading window.
                bundle = bundle.truncated(instance.horizon_hours);
            }
            Some(bundle)
        }
        None => None,
    };
    Ok((instance, bundle, instance_path, series_path))
}

fn prepare_out(out: Option<PathBuf>, config: &FileConfig) -> anyhow::Result<PathBuf> {
    let dir = require(out.or_else(|| config.out.clone()), "out")?;
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory `{}`", dir.display()))?;
    Ok(dir)
}

fn cmd_validate(input: InputArgs, config: &FileConfig) -> anyhow::Result<ExitCode> {
    let (instance, bundle, instance_path, _) = load_inputs(&input, config, false)?;
    let mut problems: Vec<String> = validate_instance(&instance)
        .into_iter()
        .map(|v| v.to_string())
        .collect();
    if let Some(bundle) = &bundle {
        problems.extend(bundle.validate());
        for fuel in &instance.fuels {
            if bundle.fuel_price(&fuel.base_price_series_ref).is_none() {
                problems.push(format!(
                    "fuel {}: series is missing column price_{}",
                    fuel.id, fuel.base_price_series_ref
                ));
            }
        }
    }
    if problems.is_empty() {
        println!("ok: `{}` passes validation", instance_path.display());
        Ok(ExitCode::SUCCESS)
    } else {
        for p in &problems {
            eprintln!("violation: {p}");
        }
        Ok(ExitCode::from(EXIT_FAILURE))
    }
}

fn cmd_run(
    input: InputArgs,
    eua_shift: f64,
    out: Option<PathBuf>,
    config: &FileConfig,
) -> anyhow::Result<ExitCode> {
    let (instance, bundle, instance_path, series_path) = load_inputs(&input, config, true)?;
    let bundle = bundle.expect("series required");
    let out_dir = prepare_out(out, config)?;

    let mut manifest = ManifestBuilder::new(
        "run",
        json!({
            "instance": instance_path,
            "series": series_path,
            "eua_shift": eua_shift,
            "hours": bundle.hours,
        }),
    );
    manifest.input(&instance_path)?;
    manifest.input(series_path.as_ref().unwrap())?;

    let result = run_dispatch(&instance, &bundle, eua_shift)?;

    let hourly = out_dir.join("dispatch_hourly.csv");
    result.write_hourly_csv(std::fs::File::create(&hourly)?)?;
    manifest.output("dispatch_hourly.csv");

    let totals = emissions_and_burn(&result);
    let totals_json = json!({
        "total_cost_eur": result.total_cost_eur,
        "mean_power_price_eur_mwh": result.mean_power_price(),
        "emissions_t": totals.total_emissions_t,
        "emissions_t_by_fuel": totals.emissions_t,
        "burn_mwh_by_fuel": totals.burn_mwh,
        "non_served_power_mwh": result.non_served_power_mwh.iter().sum::<f64>(),
        "non_served_heat_mwh": result.non_served_heat_mwh.iter().sum::<f64>(),
        "curtailment_mwh": result.curtailment_mwh.iter().sum::<f64>(),
    });
    std::fs::write(
        out_dir.join("totals.json"),
        serde_json::to_string_pretty(&totals_json)?,
    )?;
    manifest.output("totals.json");
    manifest.write(&out_dir)?;
    println!(
        "dispatch over {} hours: mean price {:.2} EUR/MWh, emissions {:.0} t",
        result.hours,
        result.mean_power_price(),
        totals.total_emissions_t
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    input: InputArgs,
    start: Option<f64>,
    step: Option<f64>,
    count: Option<usize>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
    config: &FileConfig,
    sensitivity: Sensitivity,
    command: &str,
) -> anyhow::Result<ExitCode> {
    let (instance, bundle, instance_path, series_path) = load_inputs(&input, config, true)?;
    let bundle = bundle.expect("series required");
    let out_dir = prepare_out(out, config)?;

    let spec = SweepSpec {
        base_eua_mean: start.or(config.start).unwrap_or(5.89),
        step: step.or(config.step).unwrap_or(5.0),
        count: count.or(config.count).unwrap_or(16),
        sensitivity,
    };
    let jobs = jobs.or(config.jobs);

    let mut manifest = ManifestBuilder::new(
        command,
        json!({
            "instance": instance_path,
            "series": series_path,
            "spec": spec,
            "jobs": jobs,
            "hours": bundle.hours,
        }),
    );
    manifest.input(&instance_path)?;
    manifest.input(series_path.as_ref().unwrap())?;

    let curve = run_sweep(&instance, &bundle, &spec, jobs)?;

    write_sweep_csv(&curve, std::fs::File::create(out_dir.join("sweep.csv"))?)?;
    manifest.output("sweep.csv");
    write_passthrough_csv(&curve, std::fs::File::create(out_dir.join("passthrough.csv"))?)?;
    manifest.output("passthrough.csv");
    manifest.write(&out_dir)?;

    let estimates: Vec<String> = curve.passthrough.iter().map(|p| format!("{p:.3}")).collect();
    println!(
        "{} scenarios from {:.2} EUR/t in steps of {:.2}; pass-through: {}",
        spec.count,
        spec.base_eua_mean,
        spec.step,
        estimates.join(" ")
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_list(text: &str, flag: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("--{flag}: `{part}` is not a number")))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_dh_thresholds(
    eta_el: String,
    eta_th: Option<String>,
    eta_boiler: f64,
    em: Option<f64>,
    share: Option<f64>,
    surface_eta_el: String,
    surface_share: String,
    out: Option<PathBuf>,
    config: &FileConfig,
) -> anyhow::Result<ExitCode> {
    let eta_el = parse_list(&eta_el, "eta-el")?;
    let out_dir = prepare_out(out, config)?;

    // Fall back on the calibrated reference set for any parameter not
    // supplied explicitly.
    let calibration = calibrate_thresholds(0.005)
        .ok_or_else(|| anyhow!("reference calibration failed"))?
        .0;
    let em = em.unwrap_or(calibration.emission_factor);
    let share = share.unwrap_or(calibration.chp_heat_share);
    let eta_th: Vec<f64> = match eta_th {
        Some(text) => {
            let parsed = parse_list(&text, "eta-th")?;
            match parsed.len() {
                1 => vec![parsed[0]; eta_el.len()],
                n if n == eta_el.len() => parsed,
                n => {
                    return Err(usage(format!(
                        "--eta-th has {n} values for {} efficiencies",
                        eta_el.len()
                    )))
                }
            }
        }
        None => eta_el
            .iter()
            .map(|eta| {
                calibration
                    .rows
                    .iter()
                    .find(|row| (row.eta_el - eta).abs() < 1e-9)
                    .map(|row| row.eta_th_chp)
                    .ok_or_else(|| {
                        usage(format!(
                            "--eta-th is required for non-reference electrical efficiency {eta}"
                        ))
                    })
            })
            .collect::<Result<_, _>>()?,
    };

    let mut manifest = ManifestBuilder::new(
        "dh-thresholds",
        json!({
            "eta_el": eta_el,
            "eta_th": eta_th,
            "eta_boiler": eta_boiler,
            "emission_factor": em,
            "chp_heat_share": share,
        }),
    );

    let mut thresholds = String::from("eta_el,eta_th_chp,min_markup,min_passthrough\n");
    for (eta, eta_th) in eta_el.iter().zip(&eta_th) {
        let portfolio = DhPortfolio {
            eta_th_boiler: eta_boiler,
            eta_th_chp: *eta_th,
            eta_el_chp: *eta,
            emission_factor: em,
            chp_heat_share: share,
            elasticity: 0.0,
        };
        portfolio
            .validate()
            .map_err(|e| usage(format!("portfolio for eta_el {eta}: {e}")))?;
        thresholds.push_str(&format!(
            "{eta},{eta_th},{},{}\n",
            min_markup(&portfolio),
            min_passthrough(&portfolio)
        ));
    }
    std::fs::write(out_dir.join("thresholds.csv"), thresholds)?;
    manifest.output("thresholds.csv");

    let surface_etas = parse_list(&surface_eta_el, "surface-eta-el")?;
    let surface_shares = parse_list(&surface_share, "surface-share")?;
    let template = DhPortfolio {
        eta_th_boiler: eta_boiler,
        eta_th_chp: eta_th.first().copied().unwrap_or(0.75),
        eta_el_chp: 0.4,
        emission_factor: em,
        chp_heat_share: 1.0,
        elasticity: 0.0,
    };
    let surface = threshold_surface(&surface_etas, &surface_shares, &template)
        .map_err(|e| usage(e.to_string()))?;
    let mut surface_csv = String::from("eta_el,chp_heat_share,min_passthrough\n");
    for (i, share_value) in surface_shares.iter().enumerate() {
        for (j, eta_value) in surface_etas.iter().enumerate() {
            surface_csv.push_str(&format!("{eta_value},{share_value},{}\n", surface[i][j]));
        }
    }
    std::fs::write(out_dir.join("surface.csv"), surface_csv)?;
    manifest.output("surface.csv");
    manifest.write(&out_dir)?;
    println!(
        "threshold report for {} efficiencies and a {}x{} surface grid",
        eta_el.len(),
        surface_etas.len(),
        surface_shares.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(
    seed: Option<u64>,
    profile: Option<PathBuf>,
    out: Option<PathBuf>,
    config: &FileConfig,
) -> anyhow::Result<ExitCode> {
    let seed = seed.or(config.seed).unwrap_or(0);
    let out_dir = prepare_out(out, config)?;
    let profile_value = match &profile {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read profile `{}`", path.display()))?;
            serde_json::from_str::<SynthesisProfile>(&text)
                .with_context(|| format!("profile `{}` is not valid", path.display()))?
        }
        None => SynthesisProfile::default(),
    };

    let mut manifest = ManifestBuilder::new(
        "synth",
        json!({ "profile": profile, "seed": seed }),
    );
    if let Some(path) = &profile {
        manifest.input(path)?;
    }
    manifest.seed(seed);

    let bundle = synthesize_year(seed, &profile_value)?;
    let path = out_dir.join("series.csv");
    bundle.write_csv(std::fs::File::create(&path)?)?;
    manifest.output("series.csv");
    manifest.write(&out_dir)?;
    println!("wrote {} hours to `{}`", bundle.hours, path.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(
    input: InputArgs,
    eua_shift: f64,
    out: Option<PathBuf>,
    config: &FileConfig,
) -> anyhow::Result<ExitCode> {
    let (instance, bundle, instance_path, series_path) = load_inputs(&input, config, true)?;
    let bundle = bundle.expect("series required");
    let reference = bundle
        .reference_price
        .clone()
        .ok_or_else(|| anyhow!("series has no ref_price column to compare against"))?;
    let out_dir = prepare_out(out, config)?;

    let mut manifest = ManifestBuilder::new(
        "fit",
        json!({
            "instance": instance_path,
            "series": series_path,
            "eua_shift": eua_shift,
            "hours": bundle.hours,
        }),
    );
    manifest.input(&instance_path)?;
    manifest.input(series_path.as_ref().unwrap())?;

    let result = run_dispatch(&instance, &bundle, eua_shift)?;
    let (correlation, rmse) = goodness_of_fit(&result.power_price, &reference)?;
    std::fs::write(
        out_dir.join("fit.json"),
        serde_json::to_string_pretty(&json!({
            "hours": result.hours,
            "correlation": correlation,
            "rmse_eur_mwh": rmse,
        }))?,
    )?;
    manifest.output("fit.json");
    manifest.write(&out_dir)?;
    println!("correlation {correlation:.4}, rmse {rmse:.4} EUR/MWh over {} hours", result.hours);
    Ok(ExitCode::SUCCESS)
}

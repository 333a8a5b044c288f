//! Hourly exogenous series: loading from CSV, synthetic-year generation and
//! the pointwise transforms used by scenario runs.
//!
//! The CSV schema is one row per hour with the header
//! `timestamp,load_mw,heat_mw,wind_mw,solar_mw,ror_mw,inflow_mwh,net_import_mw,
//! price_<fuelid>...,price_eua,ref_price`, decimal points, no thousands
//! separators, UTF-8. The timestamp column must be present but is not
//! interpreted beyond giving rows their order; `ref_price` is optional.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

pub const HOURS_PER_YEAR: usize = 8760;

#[derive(Debug, Error)]
pub enum TimeSeriesError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse failure: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: {rule}, got {value}")]
    OutOfRange {
        row: usize,
        column: String,
        rule: &'static str,
        value: f64,
    },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("file contains no data rows")]
    Empty,
    #[error("unknown series selector `{0}`")]
    UnknownSelector(String),
    #[error("shifting the emission price by {delta} makes hour {hour} negative")]
    NegativePrice { delta: f64, hour: usize },
    #[error("synthesis profile: {name} mean must be positive, got {value}")]
    NonPositiveMean { name: String, value: f64 },
}

/// The full set of hourly exogenous series the dispatch model consumes.
///
/// All series have the same length. Physical series are nonnegative except
/// `net_import_mw`, which is negative in net-export hours; prices are
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesBundle {
    pub hours: usize,
    pub timestamps: Vec<String>,
    pub load_mw: Vec<f64>,
    pub heat_mw: Vec<f64>,
    pub wind_mw: Vec<f64>,
    pub solar_mw: Vec<f64>,
    pub ror_mw: Vec<f64>,
    pub inflow_mwh: Vec<f64>,
    pub net_import_mw: Vec<f64>,
    /// One price series per fuel id.
    pub fuel_price: BTreeMap<String, Vec<f64>>,
    pub eua_price: Vec<f64>,
    /// Observed day-ahead price for goodness-of-fit comparisons.
    pub reference_price: Option<Vec<f64>>,
}

impl TimeSeriesBundle {
    /// Check the structural invariants, returning one message per breach.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check_len = |name: &str, len: usize| {
            if len != self.hours {
                out.push(format!(
                    "series {name} has {len} entries, expected {}",
                    self.hours
                ));
            }
        };
        check_len("timestamp", self.timestamps.len());
        check_len("load_mw", self.load_mw.len());
        check_len("heat_mw", self.heat_mw.len());
        check_len("wind_mw", self.wind_mw.len());
        check_len("solar_mw", self.solar_mw.len());
        check_len("ror_mw", self.ror_mw.len());
        check_len("inflow_mwh", self.inflow_mwh.len());
        check_len("net_import_mw", self.net_import_mw.len());
        for (fuel, series) in &self.fuel_price {
            check_len(&format!("price_{fuel}"), series.len());
        }
        check_len("price_eua", self.eua_price.len());
        if let Some(series) = &self.reference_price {
            check_len("ref_price", series.len());
        }

        let mut check_nonneg = |name: &str, series: &[f64]| {
            if let Some((i, v)) = series
                .iter()
                .enumerate()
                .find(|(_, v)| !v.is_finite() || **v < 0.0)
            {
                out.push(format!("series {name}, hour {i}: must be nonnegative, got {v}"));
            }
        };
        check_nonneg("load_mw", &self.load_mw);
        check_nonneg("heat_mw", &self.heat_mw);
        check_nonneg("wind_mw", &self.wind_mw);
        check_nonneg("solar_mw", &self.solar_mw);
        check_nonneg("ror_mw", &self.ror_mw);
        check_nonneg("inflow_mwh", &self.inflow_mwh);
        for (fuel, series) in &self.fuel_price {
            check_nonneg(&format!("price_{fuel}"), series);
        }
        check_nonneg("price_eua", &self.eua_price);
        out
    }

    pub fn fuel_price(&self, fuel: &str) -> Option<&[f64]> {
        self.fuel_price.get(fuel).map(|v| v.as_slice())
    }

    pub fn eua_mean(&self) -> f64 {
        mean(&self.eua_price)
    }

    /// First `hours` rows of the bundle, for running short horizons against
    /// a long input file.
    pub fn truncated(&self, hours: usize) -> TimeSeriesBundle {
        let n = hours.min(self.hours);
        let cut = |v: &Vec<f64>| v[..n].to_vec();
        TimeSeriesBundle {
            hours: n,
            timestamps: self.timestamps[..n].to_vec(),
            load_mw: cut(&self.load_mw),
            heat_mw: cut(&self.heat_mw),
            wind_mw: cut(&self.wind_mw),
            solar_mw: cut(&self.solar_mw),
            ror_mw: cut(&self.ror_mw),
            inflow_mwh: cut(&self.inflow_mwh),
            net_import_mw: cut(&self.net_import_mw),
            fuel_price: self
                .fuel_price
                .iter()
                .map(|(k, v)| (k.clone(), v[..n].to_vec()))
                .collect(),
            eua_price: cut(&self.eua_price),
            reference_price: self.reference_price.as_ref().map(|v| v[..n].to_vec()),
        }
    }

    /// Write the bundle in the documented CSV schema.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), TimeSeriesError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "timestamp".to_string(),
            "load_mw".into(),
            "heat_mw".into(),
            "wind_mw".into(),
            "solar_mw".into(),
            "ror_mw".into(),
            "inflow_mwh".into(),
            "net_import_mw".into(),
        ];
        for fuel in self.fuel_price.keys() {
            header.push(format!("price_{fuel}"));
        }
        header.push("price_eua".into());
        if self.reference_price.is_some() {
            header.push("ref_price".into());
        }
        w.write_record(&header)?;
        for t in 0..self.hours {
            let mut record = vec![
                self.timestamps[t].clone(),
                self.load_mw[t].to_string(),
                self.heat_mw[t].to_string(),
                self.wind_mw[t].to_string(),
                self.solar_mw[t].to_string(),
                self.ror_mw[t].to_string(),
                self.inflow_mwh[t].to_string(),
                self.net_import_mw[t].to_string(),
            ];
            for series in self.fuel_price.values() {
                record.push(series[t].to_string());
            }
            record.push(self.eua_price[t].to_string());
            if let Some(reference) = &self.reference_price {
                record.push(reference[t].to_string());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| TimeSeriesError::Io {
            path: "<writer>".into(),
            source: e,
        })?;
        Ok(())
    }
}

fn mean(series: &[f64]) -> f64 {
    if series.is_empty() {
        return 0.0;
    }
    series.iter().sum::<f64>() / series.len() as f64
}

const FIXED_COLUMNS: &[&str] = &[
    "timestamp",
    "load_mw",
    "heat_mw",
    "wind_mw",
    "solar_mw",
    "ror_mw",
    "inflow_mwh",
    "net_import_mw",
];

/// Load and validate a bundle from a CSV file.
pub fn load_bundle_csv(path: impl AsRef<Path>) -> Result<TimeSeriesBundle, TimeSeriesError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| TimeSeriesError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_bundle_reader(file)
}

/// Same as [`load_bundle_csv`] but from any reader.
pub fn load_bundle_reader<R: Read>(reader: R) -> Result<TimeSeriesBundle, TimeSeriesError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    for required in FIXED_COLUMNS.iter().chain(["price_eua"].iter()) {
        if !header.iter().any(|h| h == required) {
            return Err(TimeSeriesError::MissingColumn((*required).to_string()));
        }
    }
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let fuel_columns: Vec<(String, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            h.strip_prefix("price_")
                .filter(|rest| *rest != "eua")
                .map(|rest| (rest.to_string(), i))
        })
        .collect();
    let ref_col = header.iter().position(|h| h == "ref_price");

    let mut bundle = TimeSeriesBundle {
        hours: 0,
        timestamps: Vec::new(),
        load_mw: Vec::new(),
        heat_mw: Vec::new(),
        wind_mw: Vec::new(),
        solar_mw: Vec::new(),
        ror_mw: Vec::new(),
        inflow_mwh: Vec::new(),
        net_import_mw: Vec::new(),
        fuel_price: fuel_columns
            .iter()
            .map(|(name, _)| (name.clone(), Vec::new()))
            .collect(),
        eua_price: Vec::new(),
        reference_price: ref_col.map(|_| Vec::new()),
    };

    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(TimeSeriesError::Ragged {
                row,
                expected: header.len(),
                found: record.len(),
            });
        }
        let parse = |column: &str, i: usize| -> Result<f64, TimeSeriesError> {
            let raw = record.get(i).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| TimeSeriesError::BadCell {
                    row,
                    column: column.to_string(),
                    value: raw.to_string(),
                })
        };
        let nonneg = |column: &str, v: f64| -> Result<f64, TimeSeriesError> {
            if v < 0.0 {
                Err(TimeSeriesError::OutOfRange {
                    row,
                    column: column.to_string(),
                    rule: "must be nonnegative",
                    value: v,
                })
            } else {
                Ok(v)
            }
        };

        bundle
            .timestamps
            .push(record.get(col("timestamp")).unwrap_or("").to_string());
        bundle
            .load_mw
            .push(nonneg("load_mw", parse("load_mw", col("load_mw"))?)?);
        bundle
            .heat_mw
            .push(nonneg("heat_mw", parse("heat_mw", col("heat_mw"))?)?);
        bundle
            .wind_mw
            .push(nonneg("wind_mw", parse("wind_mw", col("wind_mw"))?)?);
        bundle
            .solar_mw
            .push(nonneg("solar_mw", parse("solar_mw", col("solar_mw"))?)?);
        bundle
            .ror_mw
            .push(nonneg("ror_mw", parse("ror_mw", col("ror_mw"))?)?);
        bundle
            .inflow_mwh
            .push(nonneg("inflow_mwh", parse("inflow_mwh", col("inflow_mwh"))?)?);
        bundle
            .net_import_mw
            .push(parse("net_import_mw", col("net_import_mw"))?);
        for (fuel, i) in &fuel_columns {
            let column = format!("price_{fuel}");
            let value = nonneg(&column, parse(&column, *i)?)?;
            bundle.fuel_price.get_mut(fuel).unwrap().push(value);
        }
        bundle
            .eua_price
            .push(nonneg("price_eua", parse("price_eua", col("price_eua"))?)?);
        if let Some(i) = ref_col {
            bundle
                .reference_price
                .as_mut()
                .unwrap()
                .push(parse("ref_price", i)?);
        }
        bundle.hours += 1;
    }

    if bundle.hours == 0 {
        return Err(TimeSeriesError::Empty);
    }
    Ok(bundle)
}

/// Which series a pointwise transform addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesSelector {
    Load,
    Heat,
    Wind,
    Solar,
    RunOfRiver,
    Inflow,
    NetImports,
    EuaPrice,
    FuelPrice(String),
}

impl SeriesSelector {
    /// Parse a selector name as used on the command line; fuel price series
    /// are addressed as `price_<fuelid>`, with `coal_price` as a shorthand
    /// for `price_hard_coal`.
    pub fn parse(name: &str) -> Result<Self, TimeSeriesError> {
        Ok(match name {
            "load" => Self::Load,
            "heat" => Self::Heat,
            "wind" => Self::Wind,
            "solar" => Self::Solar,
            "ror" => Self::RunOfRiver,
            "inflow" => Self::Inflow,
            "net_imports" => Self::NetImports,
            "eua_price" => Self::EuaPrice,
            "coal_price" => Self::FuelPrice("hard_coal".into()),
            other => match other.strip_prefix("price_") {
                Some(fuel) => Self::FuelPrice(fuel.to_string()),
                None => return Err(TimeSeriesError::UnknownSelector(name.to_string())),
            },
        })
    }
}

/// Multiply the selected series pointwise by `factor`, leaving everything
/// else untouched.
pub fn scale_series(
    bundle: &TimeSeriesBundle,
    selector: &SeriesSelector,
    factor: f64,
) -> Result<TimeSeriesBundle, TimeSeriesError> {
    if !(factor > 0.0) {
        return Err(TimeSeriesError::OutOfRange {
            row: 0,
            column: "factor".into(),
            rule: "scale factor must be positive",
            value: factor,
        });
    }
    let mut out = bundle.clone();
    let apply = |series: &mut Vec<f64>| {
        for v in series.iter_mut() {
            *v *= factor;
        }
    };
    match selector {
        SeriesSelector::Load => apply(&mut out.load_mw),
        SeriesSelector::Heat => apply(&mut out.heat_mw),
        SeriesSelector::Wind => apply(&mut out.wind_mw),
        SeriesSelector::Solar => apply(&mut out.solar_mw),
        SeriesSelector::RunOfRiver => apply(&mut out.ror_mw),
        SeriesSelector::Inflow => apply(&mut out.inflow_mwh),
        SeriesSelector::NetImports => apply(&mut out.net_import_mw),
        SeriesSelector::EuaPrice => apply(&mut out.eua_price),
        SeriesSelector::FuelPrice(fuel) => match out.fuel_price.get_mut(fuel) {
            Some(series) => {
                for v in series.iter_mut() {
                    *v *= factor;
                }
            }
            None => return Err(TimeSeriesError::UnknownSelector(format!("price_{fuel}"))),
        },
    }
    Ok(out)
}

/// Shift the emission price series pointwise by `delta` EUR/t, moving the
/// annual mean by exactly `delta`. Every other series is carried over
/// bit-exactly.
pub fn shift_eua(
    bundle: &TimeSeriesBundle,
    delta_eur_per_t: f64,
) -> Result<TimeSeriesBundle, TimeSeriesError> {
    if let Some(hour) = bundle
        .eua_price
        .iter()
        .position(|v| v + delta_eur_per_t < 0.0)
    {
        return Err(TimeSeriesError::NegativePrice {
            delta: delta_eur_per_t,
            hour,
        });
    }
    let mut out = bundle.clone();
    for v in &mut out.eua_price {
        *v += delta_eur_per_t;
    }
    Ok(out)
}

/// Mean levels and shape parameters for one synthesised year.
///
/// Seasonal and diurnal amplitudes are relative (0 disables the component);
/// noise amplitudes are relative and bounded below one so nonnegative series
/// stay nonnegative. Defaults approximate a recent Austrian-German year.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisProfile {
    pub load_mean_mw: f64,
    pub load_seasonal: f64,
    pub load_diurnal: f64,
    pub load_noise: f64,
    pub heat_mean_mw: f64,
    pub heat_seasonal: f64,
    pub heat_noise: f64,
    pub wind_mean_mw: f64,
    pub wind_seasonal: f64,
    pub wind_noise: f64,
    pub solar_mean_mw: f64,
    pub solar_seasonal: f64,
    pub solar_noise: f64,
    pub ror_mean_mw: f64,
    pub ror_noise: f64,
    pub inflow_mean_mwh: f64,
    pub inflow_noise: f64,
    /// Sign-free; negative means the system exports on average.
    pub net_import_mean_mw: f64,
    pub net_import_swing_mw: f64,
    pub net_import_noise_mw: f64,
    /// Mean price per fuel id.
    pub fuel_price_means: BTreeMap<String, f64>,
    pub fuel_price_noise: f64,
    pub eua_mean: f64,
    pub eua_noise: f64,
}

impl Default for SynthesisProfile {
    fn default() -> Self {
        let mut fuel_price_means = BTreeMap::new();
        fuel_price_means.insert("nuclear".to_string(), 3.5);
        fuel_price_means.insert("lignite".to_string(), 5.5);
        fuel_price_means.insert("hard_coal".to_string(), 9.65);
        fuel_price_means.insert("natural_gas".to_string(), 17.27);
        fuel_price_means.insert("oil".to_string(), 28.25);
        fuel_price_means.insert("biomass".to_string(), 6.0);
        fuel_price_means.insert("water".to_string(), 0.0);
        Self {
            load_mean_mw: 69_090.0,
            load_seasonal: 0.12,
            load_diurnal: 0.18,
            load_noise: 0.05,
            heat_mean_mw: 13_490.0,
            heat_seasonal: 0.85,
            heat_noise: 0.08,
            wind_mean_mw: 12_490.0,
            wind_seasonal: 0.30,
            wind_noise: 0.60,
            solar_mean_mw: 4_230.0,
            solar_seasonal: 0.45,
            solar_noise: 0.25,
            ror_mean_mw: 4_780.0,
            ror_noise: 0.15,
            inflow_mean_mwh: 790.0,
            inflow_noise: 0.40,
            net_import_mean_mw: -4_870.0,
            net_import_swing_mw: 2_500.0,
            net_import_noise_mw: 800.0,
            fuel_price_means,
            fuel_price_noise: 0.03,
            eua_mean: 5.89,
            eua_noise: 0.10,
        }
    }
}

impl SynthesisProfile {
    fn validate(&self) -> Result<(), TimeSeriesError> {
        let positive = [
            ("load_mean_mw", self.load_mean_mw),
            ("heat_mean_mw", self.heat_mean_mw),
            ("wind_mean_mw", self.wind_mean_mw),
            ("solar_mean_mw", self.solar_mean_mw),
            ("ror_mean_mw", self.ror_mean_mw),
            ("inflow_mean_mwh", self.inflow_mean_mwh),
            ("eua_mean", self.eua_mean),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(TimeSeriesError::NonPositiveMean {
                    name: name.into(),
                    value,
                });
            }
        }
        for (fuel, &value) in &self.fuel_price_means {
            if value < 0.0 {
                return Err(TimeSeriesError::NonPositiveMean {
                    name: format!("fuel_price_means[{fuel}]"),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Build one deterministic synthetic year (8760 hours) from the profile.
///
/// Nonnegative series are produced as shape x noise and then rescaled so the
/// sample mean hits the profile mean exactly; hour zero is midnight on the
/// first of January, so winter-peaking shapes peak at the year's edges.
pub fn synthesize_year(
    seed: u64,
    profile: &SynthesisProfile,
) -> Result<TimeSeriesBundle, TimeSeriesError> {
    profile.validate()?;
    let n = HOURS_PER_YEAR;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let seasonal = |t: usize| (TAU * t as f64 / n as f64).cos();
    let noise = |amp: f64, rng: &mut ChaCha8Rng| {
        let amp = amp.clamp(0.0, 0.95);
        1.0 + amp * (rng.random_range(0.0..1.0) * 2.0 - 1.0)
    };

    let mut load = Vec::with_capacity(n);
    for t in 0..n {
        let hour = (t % 24) as f64;
        let diurnal = (TAU * (hour - 14.0) / 24.0).cos();
        let shape = (1.0 + profile.load_seasonal * seasonal(t))
            * (1.0 + profile.load_diurnal * diurnal)
            * noise(profile.load_noise, &mut rng);
        load.push(shape.max(0.0));
    }
    rescale_to_mean(&mut load, profile.load_mean_mw);

    let mut heat = Vec::with_capacity(n);
    for t in 0..n {
        let shape = (1.0 + profile.heat_seasonal * seasonal(t)) * noise(profile.heat_noise, &mut rng);
        heat.push(shape.max(0.0));
    }
    rescale_to_mean(&mut heat, profile.heat_mean_mw);

    let mut wind = Vec::with_capacity(n);
    for t in 0..n {
        let shape = (1.0 + profile.wind_seasonal * seasonal(t)) * noise(profile.wind_noise, &mut rng);
        wind.push(shape.max(0.0));
    }
    rescale_to_mean(&mut wind, profile.wind_mean_mw);

    let mut solar = Vec::with_capacity(n);
    for t in 0..n {
        let hour = (t % 24) as f64;
        let daylight = (std::f64::consts::PI * (hour - 6.0) / 12.0).sin().max(0.0);
        let shape =
            daylight * (1.0 - profile.solar_seasonal * seasonal(t)) * noise(profile.solar_noise, &mut rng);
        solar.push(shape.max(0.0));
    }
    rescale_to_mean(&mut solar, profile.solar_mean_mw);

    let mut ror = Vec::with_capacity(n);
    for t in 0..n {
        // Spring melt: peak around one third into the year.
        let shape = (1.0 + 0.35 * (TAU * (t as f64 / n as f64 - 0.33)).cos())
            * noise(profile.ror_noise, &mut rng);
        ror.push(shape.max(0.0));
    }
    rescale_to_mean(&mut ror, profile.ror_mean_mw);

    let mut inflow = Vec::with_capacity(n);
    for t in 0..n {
        let shape = (1.0 + 0.8 * (TAU * (t as f64 / n as f64 - 0.38)).cos())
            * noise(profile.inflow_noise, &mut rng);
        inflow.push(shape.max(0.0));
    }
    rescale_to_mean(&mut inflow, profile.inflow_mean_mwh);

    let mut net_import = Vec::with_capacity(n);
    for t in 0..n {
        let hour = (t % 24) as f64;
        let swing = profile.net_import_swing_mw * (TAU * (hour - 4.0) / 24.0).cos();
        let jitter = profile.net_import_noise_mw * (rng.random_range(0.0..1.0) * 2.0 - 1.0);
        net_import.push(profile.net_import_mean_mw + swing + jitter);
    }

    let mut fuel_price = BTreeMap::new();
    for (fuel, &level) in &profile.fuel_price_means {
        let mut series = Vec::with_capacity(n);
        for _ in 0..n {
            series.push(level * noise(profile.fuel_price_noise, &mut rng));
        }
        if level > 0.0 {
            rescale_to_mean(&mut series, level);
        }
        fuel_price.insert(fuel.clone(), series);
    }

    let mut eua = Vec::with_capacity(n);
    for _ in 0..n {
        eua.push(noise(profile.eua_noise, &mut rng));
    }
    rescale_to_mean(&mut eua, profile.eua_mean);

    let timestamps = (0..n).map(timestamp_for_hour).collect();
    let bundle = TimeSeriesBundle {
        hours: n,
        timestamps,
        load_mw: load,
        heat_mw: heat,
        wind_mw: wind,
        solar_mw: solar,
        ror_mw: ror,
        inflow_mwh: inflow,
        net_import_mw: net_import,
        fuel_price,
        eua_price: eua,
        reference_price: None,
    };
    debug_assert!(bundle.validate().is_empty());
    Ok(bundle)
}

fn rescale_to_mean(series: &mut [f64], target: f64) {
    let current = mean(series);
    if current > 0.0 {
        let factor = target / current;
        for v in series.iter_mut() {
            *v *= factor;
        }
    }
}

/// ISO-8601 timestamp for hour `t` of a non-leap year.
fn timestamp_for_hour(t: usize) -> String {
    const DAYS_PER_MONTH: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];
    let hour = t % 24;
    let mut day = t / 24;
    let mut month = 0;
    while day >= DAYS_PER_MONTH[month] {
        day -= DAYS_PER_MONTH[month];
        month += 1;
    }
    format!("2017-{:02}-{:02}T{hour:02}:00:00Z", month + 1, day + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn small_csv() -> String {
        "timestamp,load_mw,heat_mw,wind_mw,solar_mw,ror_mw,inflow_mwh,net_import_mw,price_natural_gas,price_eua\n\
         2017-01-01T00:00:00Z,50,10,5,0,2,1,-3,17.27,5.89\n\
         2017-01-01T01:00:00Z,52,11,6,0,2,1,-3,17.3,5.9\n\
         2017-01-01T02:00:00Z,49,10,4,0,2,1,-2,17.2,5.88\n"
            .to_string()
    }

    #[test]
    fn loads_well_formed_file() {
        let bundle = load_bundle_reader(small_csv().as_bytes()).unwrap();
        assert_eq!(bundle.hours, 3);
        assert_eq!(bundle.load_mw, vec![50.0, 52.0, 49.0]);
        assert_eq!(bundle.fuel_price["natural_gas"][2], 17.2);
        assert!(bundle.reference_price.is_none());
        assert!(bundle.validate().is_empty());
    }

    #[test]
    fn missing_column_is_named() {
        let text = small_csv().replace("heat_mw", "warmth");
        match load_bundle_reader(text.as_bytes()) {
            Err(TimeSeriesError::MissingColumn(col)) => assert_eq!(col, "heat_mw"),
            other => panic!("expected missing column, got {other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let text = small_csv().replace("2017-01-01T01:00:00Z,52", "2017-01-01T01:00:00Z,abc");
        match load_bundle_reader(text.as_bytes()) {
            Err(TimeSeriesError::BadCell { row, column, value }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "load_mw");
                assert_eq!(value, "abc");
            }
            other => panic!("expected bad cell, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_is_rejected_with_its_row_number() {
        let text = small_csv().replace(",17.2,5.88", ",17.2");
        match load_bundle_reader(text.as_bytes()) {
            Err(TimeSeriesError::Ragged { row, expected, found }) => {
                assert_eq!(row, 3);
                assert_eq!(expected, 10);
                assert_eq!(found, 9);
            }
            other => panic!("expected ragged row, got {other:?}"),
        }
    }

    #[test]
    fn negative_price_is_rejected() {
        let text = small_csv().replace(",5.9\n", ",-5.9\n");
        match load_bundle_reader(text.as_bytes()) {
            Err(TimeSeriesError::OutOfRange { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "price_eua");
            }
            other => panic!("expected out of range, got {other:?}"),
        }
    }

    #[test]
    fn scale_identity_and_selected_series() {
        let bundle = load_bundle_reader(small_csv().as_bytes()).unwrap();
        let same = scale_series(&bundle, &SeriesSelector::NetImports, 1.0).unwrap();
        assert_eq!(bundle, same);

        let scaled = scale_series(&bundle, &SeriesSelector::NetImports, 1.25).unwrap();
        assert_eq!(scaled.net_import_mw, vec![-3.75, -3.75, -2.5]);
        assert_eq!(scaled.load_mw, bundle.load_mw);

        let coal_selector = SeriesSelector::parse("coal_price").unwrap();
        assert_eq!(coal_selector, SeriesSelector::FuelPrice("hard_coal".into()));
        assert!(scale_series(&bundle, &coal_selector, 0.75).is_err());
        let gas = scale_series(&bundle, &SeriesSelector::parse("price_natural_gas").unwrap(), 0.75)
            .unwrap();
        assert_abs_diff_eq!(gas.fuel_price["natural_gas"][0], 12.9525, epsilon = 1e-12);
    }

    #[test]
    fn shift_moves_mean_by_exactly_delta() {
        let mut bundle = load_bundle_reader(small_csv().as_bytes()).unwrap();
        bundle.eua_price = vec![5.89; 3];
        let same = shift_eua(&bundle, 0.0).unwrap();
        assert_eq!(bundle, same);

        let up = shift_eua(&bundle, 5.0).unwrap();
        assert_relative_eq!(up.eua_mean(), 10.89, epsilon = 1e-12);
        assert_eq!(up.load_mw, bundle.load_mw);
        assert_eq!(up.fuel_price, bundle.fuel_price);

        let top = shift_eua(&bundle, 75.0).unwrap();
        assert_relative_eq!(top.eua_mean(), 80.89, epsilon = 1e-12);

        assert!(matches!(
            shift_eua(&bundle, -6.0),
            Err(TimeSeriesError::NegativePrice { .. })
        ));
    }

    #[test]
    fn synthesis_is_deterministic_per_seed() {
        let profile = SynthesisProfile::default();
        let a = synthesize_year(7, &profile).unwrap();
        let b = synthesize_year(7, &profile).unwrap();
        assert_eq!(a, b);
        let c = synthesize_year(8, &profile).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_heat_is_sinusoidal_and_peaks_in_winter() {
        let mut profile = SynthesisProfile::default();
        profile.heat_noise = 0.0;
        let bundle = synthesize_year(1, &profile).unwrap();
        let (argmax, _) = bundle
            .heat_mw
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let winter = argmax < HOURS_PER_YEAR / 4 || argmax >= 3 * HOURS_PER_YEAR / 4;
        assert!(winter, "heat peak at hour {argmax} is not in the winter half-year");
        // Pure scaled sinusoid: value at the half-period equals the trough.
        let mid = HOURS_PER_YEAR / 2;
        assert!(bundle.heat_mw[mid] < bundle.heat_mw[0]);
        let reconstructed: Vec<f64> = (0..HOURS_PER_YEAR)
            .map(|t| {
                let base = bundle.heat_mw[0] / (1.0 + profile.heat_seasonal);
                base * (1.0 + profile.heat_seasonal * (TAU * t as f64 / 8760.0).cos())
            })
            .collect();
        for (a, b) in bundle.heat_mw.iter().zip(&reconstructed) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn sample_means_hit_profile_means() {
        let profile = SynthesisProfile::default();
        let bundle = synthesize_year(42, &profile).unwrap();
        assert_relative_eq!(mean(&bundle.load_mw), 69_090.0, max_relative = 0.01);
        assert_relative_eq!(mean(&bundle.heat_mw), 13_490.0, max_relative = 0.01);
        assert_relative_eq!(mean(&bundle.wind_mw), 12_490.0, max_relative = 0.01);
        assert_relative_eq!(bundle.eua_mean(), 5.89, max_relative = 0.01);
    }

    #[test]
    fn non_positive_mean_is_rejected() {
        let mut profile = SynthesisProfile::default();
        profile.load_mean_mw = 0.0;
        assert!(matches!(
            synthesize_year(1, &profile),
            Err(TimeSeriesError::NonPositiveMean { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let profile = SynthesisProfile::default();
        let bundle = synthesize_year(3, &profile).unwrap().truncated(100);
        let mut buffer = Vec::new();
        bundle.write_csv(&mut buffer).unwrap();
        let back = load_bundle_reader(buffer.as_slice()).unwrap();
        assert_eq!(bundle, back);
    }

    proptest! {
        #[test]
        fn scale_round_trip_recovers_bundle(factor in 0.05f64..20.0, scale_wind in proptest::bool::ANY) {
            let bundle = load_bundle_reader(small_csv().as_bytes()).unwrap();
            let selector = if scale_wind { SeriesSelector::Wind } else { SeriesSelector::EuaPrice };
            let there = scale_series(&bundle, &selector, factor).unwrap();
            let back = scale_series(&there, &selector, 1.0 / factor).unwrap();
            let (orig, recovered) = match selector {
                SeriesSelector::Wind => (&bundle.wind_mw, &back.wind_mw),
                _ => (&bundle.eua_price, &back.eua_price),
            };
            for (a, b) in orig.iter().zip(recovered) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn synthesized_bundle_always_validates(seed in 0u64..200) {
            let profile = SynthesisProfile::default();
            let bundle = synthesize_year(seed, &profile).unwrap();
            prop_assert!(bundle.validate().is_empty());
            prop_assert_eq!(bundle.hours, HOURS_PER_YEAR);
        }
    }
}

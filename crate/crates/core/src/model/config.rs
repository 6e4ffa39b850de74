//! TOML configuration with CSV profiles.
//!
//! A user file only needs the keys it changes: it is merged over the bundled
//! dataset before validation. Profile entries may be a path to a `slot,value`
//! CSV (relative to the config file) or an inline array of 24 numbers. The
//! `dr.elasticity` entry may likewise be a path to a headerless 24x24 CSV.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Value;

use super::profile::{TimeProfile, Unit};
use super::tariff::TouPriceSchedule;
use crate::bilevel::{GaConfig, GridParams};
use crate::biomass::{BiogasParams, PyrolysisParams};
use crate::carbon::CarbonMarketParams;
use crate::demand_response::{ComfortParams, DrParams, ElasticityMatrix, StorageParams};
use crate::devices::{
    check_nonneg, ChpParams, EbParams, GasParams, GbParams, GtParams, HpParams, PvParams,
    WindParams,
};
use crate::error::ConfigError;
use crate::sensitivity::SensitivityConfig;

const BUNDLED_TOML: &str = include_str!("../../data/default.toml");

const BUNDLED_FILES: &[(&str, &str)] = &[
    ("profiles/electric_load.csv", include_str!("../../data/profiles/electric_load.csv")),
    ("profiles/thermal_load.csv", include_str!("../../data/profiles/thermal_load.csv")),
    ("profiles/wind_speed.csv", include_str!("../../data/profiles/wind_speed.csv")),
    ("profiles/irradiance.csv", include_str!("../../data/profiles/irradiance.csv")),
    ("profiles/cell_temperature.csv", include_str!("../../data/profiles/cell_temperature.csv")),
    ("profiles/outdoor_temperature.csv", include_str!("../../data/profiles/outdoor_temperature.csv")),
    ("profiles/straw.csv", include_str!("../../data/profiles/straw.csv")),
    ("profiles/garbage.csv", include_str!("../../data/profiles/garbage.csv")),
    ("profiles/wastewater.csv", include_str!("../../data/profiles/wastewater.csv")),
    ("profiles/wet_garbage.csv", include_str!("../../data/profiles/wet_garbage.csv")),
    ("profiles/urban_load.csv", include_str!("../../data/profiles/urban_load.csv")),
];

/// Chance-constraint settings for wind and PV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableParams {
    /// Confidence level of the renewable output caps.
    pub confidence: f64,
    /// Forecast standard deviation as a fraction of the forecast.
    pub wind_sigma_ratio: f64,
    pub pv_sigma_ratio: f64,
}

/// Connection to the main grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSupply {
    /// Import limit, kW.
    pub import_cap: f64,
    /// Multiplier on every retail price the park pays; models pass-through
    /// of upstream fuel prices.
    pub tariff_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalNetwork {
    /// Fraction of supplied heat lost in distribution.
    pub loss_rate: f64,
}

/// Linear operation and maintenance costs, CNY/kWh of output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmCosts {
    pub wind: f64,
    pub pv: f64,
    pub chp: f64,
    pub gt: f64,
    pub gb: f64,
    pub eb: f64,
    pub hp: f64,
    /// Per kWh of storage throughput (charge plus discharge).
    pub storage: f64,
    /// Per Nm3 of upgraded biogas.
    pub b2g: f64,
    /// Penalty per kWh of curtailed wind or PV.
    pub curtailment_penalty: f64,
}

/// Day-ahead hourly input series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfiles", into = "RawProfiles")]
pub struct Profiles {
    pub electric_load: TimeProfile,
    pub thermal_load: TimeProfile,
    pub wind_speed: TimeProfile,
    pub irradiance: TimeProfile,
    pub cell_temperature: TimeProfile,
    pub outdoor_temperature: TimeProfile,
    /// Feedstock per slot: straw and municipal garbage (kg), wastewater
    /// (m3), wet organic garbage (kg).
    pub straw: TimeProfile,
    pub garbage: TimeProfile,
    pub wastewater: TimeProfile,
    pub wet_garbage: TimeProfile,
    /// Grid-side demand outside the park, kW.
    pub urban_load: TimeProfile,
}

macro_rules! profile_fields {
    ($mac:ident) => {
        $mac! {
            electric_load: Kilowatt,
            thermal_load: Kilowatt,
            wind_speed: MetrePerSecond,
            irradiance: WattPerSquareMetre,
            cell_temperature: Celsius,
            outdoor_temperature: Celsius,
            straw: Kilogram,
            garbage: Kilogram,
            wastewater: CubicMetre,
            wet_garbage: Kilogram,
            urban_load: Kilowatt,
        }
    };
}

macro_rules! raw_profiles {
    ($($name:ident: $unit:ident),* $(,)?) => {
        #[derive(Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct RawProfiles {
            $($name: Vec<f64>,)*
        }

        impl TryFrom<RawProfiles> for Profiles {
            type Error = String;

            fn try_from(raw: RawProfiles) -> Result<Self, String> {
                Ok(Profiles {
                    $($name: TimeProfile::new(&raw.$name, Unit::$unit)
                        .map_err(|e| format!("profile `{}`: {e}", stringify!($name)))?,)*
                })
            }
        }

        impl From<Profiles> for RawProfiles {
            fn from(p: Profiles) -> Self {
                RawProfiles {
                    $($name: p.$name.values().to_vec(),)*
                }
            }
        }

        const PROFILE_NAMES: &[&str] = &[$(stringify!($name)),*];
    };
}

profile_fields!(raw_profiles);

impl Profiles {
    pub fn scale_loads(&mut self, factor: f64) {
        self.electric_load = self
            .electric_load
            .map(Unit::Kilowatt, |v| v * factor)
            .expect("non-negative scaling");
        self.thermal_load = self
            .thermal_load
            .map(Unit::Kilowatt, |v| v * factor)
            .expect("non-negative scaling");
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Seed for every randomised routine.
    pub seed: u64,
    pub tariff: TouPriceSchedule,
    pub grid: GridSupply,
    pub gas: GasParams,
    pub network: ThermalNetwork,
    pub renewables: RenewableParams,
    pub wind: WindParams,
    pub pv: PvParams,
    pub chp: ChpParams,
    pub gt: GtParams,
    pub gb: GbParams,
    pub eb: EbParams,
    pub hp: HpParams,
    pub electric_storage: StorageParams,
    pub thermal_storage: StorageParams,
    pub pyrolysis: PyrolysisParams,
    pub biogas: BiogasParams,
    pub comfort: ComfortParams,
    pub dr: DrParams,
    pub carbon: CarbonMarketParams,
    pub om: OmCosts,
    pub upper: GridParams,
    pub ga: GaConfig,
    pub sensitivity: SensitivityConfig,
    pub profiles: Profiles,
}

impl SystemConfig {
    /// The bundled dataset.
    pub fn bundled() -> Self {
        load_config_str("", None).expect("bundled dataset is valid")
    }

    /// Checks every cross-field invariant; the error names the first failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_inner().map_err(ConfigError::Invalid)
    }

    fn validate_inner(&self) -> Result<(), String> {
        let r = &self.renewables;
        if !(r.confidence > 0.0 && r.confidence < 1.0) {
            return Err(format!("renewables.confidence = {} must lie in (0, 1)", r.confidence));
        }
        check_nonneg("renewables.wind_sigma_ratio", r.wind_sigma_ratio)?;
        check_nonneg("renewables.pv_sigma_ratio", r.pv_sigma_ratio)?;
        check_nonneg("grid.import_cap", self.grid.import_cap)?;
        check_nonneg("grid.tariff_scale", self.grid.tariff_scale)?;
        if !(0.0..1.0).contains(&self.network.loss_rate) {
            return Err("network.loss_rate must lie in [0, 1)".into());
        }
        self.gas.validate()?;
        self.wind.validate()?;
        self.pv.validate()?;
        self.chp.validate()?;
        self.gt.validate()?;
        self.gb.validate()?;
        self.eb.validate()?;
        self.hp.validate()?;
        self.electric_storage.validate("electric_storage")?;
        self.thermal_storage.validate("thermal_storage")?;
        self.pyrolysis.validate()?;
        self.biogas.validate()?;
        self.comfort.validate()?;
        self.dr.validate()?;
        self.carbon.validate()?;
        for (n, v) in [
            ("om.wind", self.om.wind),
            ("om.pv", self.om.pv),
            ("om.chp", self.om.chp),
            ("om.gt", self.om.gt),
            ("om.gb", self.om.gb),
            ("om.eb", self.om.eb),
            ("om.hp", self.om.hp),
            ("om.storage", self.om.storage),
            ("om.b2g", self.om.b2g),
            ("om.curtailment_penalty", self.om.curtailment_penalty),
        ] {
            check_nonneg(n, v)?;
        }
        self.upper.validate()?;
        self.ga.validate()?;
        self.sensitivity.validate()?;
        Ok(())
    }

    /// TOML text that [`load_config_str`] reads back to an identical config.
    /// Profiles are written inline.
    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn elasticity(&self) -> ElasticityMatrix {
        self.dr.elasticity_for(&self.tariff)
    }

    /// GA settings carrying this config's seed.
    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            seed: self.seed,
            ..self.ga.clone()
        }
    }
}

/// Reads, merges over the bundled dataset, and validates a config file.
pub fn load_config(path: &Path) -> Result<SystemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    load_config_str(&text, Some(&dir))
}

/// As [`load_config`], for text already in memory. Relative profile paths
/// resolve against `base_dir` (the working directory when `None`).
pub fn load_config_str(text: &str, base_dir: Option<&Path>) -> Result<SystemConfig, ConfigError> {
    let mut merged: Value = BUNDLED_TOML
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(format!("bundled dataset: {e}")))?;
    resolve_files(&mut merged, &FileSource::Bundled)?;

    let mut user: Value = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    let dir = base_dir.map(Path::to_path_buf).unwrap_or_default();
    resolve_files(&mut user, &FileSource::Dir(dir))?;
    merge(&mut merged, user);

    let cfg: SystemConfig = merged
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

enum FileSource {
    Bundled,
    Dir(PathBuf),
}

impl FileSource {
    fn read(&self, rel: &str) -> Result<(String, String), ConfigError> {
        match self {
            FileSource::Bundled => BUNDLED_FILES
                .iter()
                .find(|(n, _)| *n == rel)
                .map(|(n, t)| (n.to_string(), t.to_string()))
                .ok_or_else(|| ConfigError::Invalid(format!("no bundled file `{rel}`"))),
            FileSource::Dir(dir) => {
                let p = dir.join(rel);
                let text = std::fs::read_to_string(&p).map_err(|e| ConfigError::Io {
                    path: p.display().to_string(),
                    source: e,
                })?;
                Ok((p.display().to_string(), text))
            }
        }
    }
}

/// Replaces file references with inline values.
fn resolve_files(root: &mut Value, src: &FileSource) -> Result<(), ConfigError> {
    if let Some(profiles) = root.get_mut("profiles").and_then(Value::as_table_mut) {
        for (name, v) in profiles.iter_mut() {
            if let Value::String(rel) = v {
                let (shown, text) = src.read(rel)?;
                // Units are checked when the typed config is built; parse
                // leniently here so temperatures may be negative.
                let p = TimeProfile::from_csv_reader(text.as_bytes(), Unit::Celsius).map_err(|e| {
                    ConfigError::Profile {
                        name: name.clone(),
                        source: e.with_path(&shown),
                    }
                })?;
                *v = Value::Array(p.values().iter().map(|&x| Value::Float(x)).collect());
            }
        }
    }
    if let Some(dr) = root.get_mut("dr").and_then(Value::as_table_mut) {
        if let Some(v) = dr.get_mut("elasticity") {
            if let Value::String(rel) = v {
                let (shown, text) = src.read(rel)?;
                let m = ElasticityMatrix::from_csv_str(&text)
                    .map_err(|e| ConfigError::Invalid(format!("{shown}: {e}")))?;
                let rows: Vec<Vec<f64>> = m.into();
                *v = Value::Array(
                    rows.into_iter()
                        .map(|r| Value::Array(r.into_iter().map(Value::Float).collect()))
                        .collect(),
                );
            }
        }
    }
    Ok(())
}

/// Deep-merges `over` into `base`; tables merge key by key, anything else
/// replaces.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(existing) => merge(existing, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

/// Names of every profile key.
pub fn profile_names() -> &'static [&'static str] {
    PROFILE_NAMES
}

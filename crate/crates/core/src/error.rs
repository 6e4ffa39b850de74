use thiserror::Error;

use crate::model::Unit;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile must have exactly 24 slots, got {0}")]
    Length(usize),
    #[error("profile value at slot {slot} is not finite")]
    NonFinite { slot: usize },
    #[error("profile value {value} at slot {slot} is negative, not allowed for unit {unit}")]
    Negative { slot: usize, value: f64, unit: Unit },
    #[error("profile CSV header must be `slot,value`, found `{0}`")]
    Header(String),
    #[error("profile CSV row {row}: cannot parse `{field}`")]
    Parse { row: usize, field: String },
    #[error("profile CSV row {row} has slot {slot}; slots must run 0..23 in order")]
    SlotOrder { row: usize, slot: usize },
    #[error("profile CSV: {0}")]
    Csv(String),
    #[error("cannot read profile {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {inner}")]
    InFile {
        path: String,
        #[source]
        inner: Box<ProfileError>,
    },
}

impl ProfileError {
    pub(crate) fn csv(e: csv::Error) -> Self {
        ProfileError::Csv(e.to_string())
    }

    pub(crate) fn with_path(self, path: &str) -> Self {
        ProfileError::InFile {
            path: path.to_string(),
            inner: Box::new(self),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("profile `{name}`: {source}")]
    Profile {
        name: String,
        #[source]
        source: ProfileError,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("{device} output {requested} kW exceeds capacity {capacity} kW")]
    AboveCapacity {
        device: &'static str,
        requested: f64,
        capacity: f64,
    },
    #[error("{device} input {value} is negative")]
    NegativeInput { device: &'static str, value: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum StorageError {
    #[error("charge {charge} kW and discharge {discharge} kW are both positive")]
    SimultaneousChargeDischarge { charge: f64, discharge: f64 },
    #[error("{what} power {value} kW outside [0, {limit}]")]
    PowerLimit {
        what: &'static str,
        value: f64,
        limit: f64,
    },
    #[error("state of charge {soc} kWh outside [0, {capacity}] kWh")]
    StateOfCharge { soc: f64, capacity: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum ProbabilityError {
    #[error("probability {0} is outside the open interval (0, 1)")]
    OutOfRange(f64),
}

/// Energy carrier named in an infeasibility diagnosis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carrier {
    Electric,
    Thermal,
}

impl std::fmt::Display for Carrier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Carrier::Electric => "electric",
            Carrier::Thermal => "thermal",
        })
    }
}

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error(
        "infeasible: {carrier} demand {demand:.3} kW in slot {slot} exceeds the sum of \
         capacity bounds {capacity:.3} kW"
    )]
    CapacityShortfall {
        slot: usize,
        carrier: Carrier,
        demand: f64,
        capacity: f64,
    },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unbounded dispatch problem (check cost coefficients in the config)")]
    Unbounded,
    #[error("LP solver failure: {0}")]
    Solver(String),
    #[error("invalid dispatch input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("slot {slot}: demand {demand:.3} kW exceeds grid-side generation capacity {capacity:.3} kW")]
    Capacity {
        slot: usize,
        demand: f64,
        capacity: f64,
    },
    #[error("price vector length {0} differs from the park solution horizon {1}")]
    Horizon(usize, usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum ChromosomeError {
    #[error("chromosome must have between 1 and {max} segments, got {got}")]
    SegmentCount { got: usize, max: usize },
    #[error("first segment must start at slot 0")]
    FirstBoundary,
    #[error("segment boundaries must be strictly increasing within 0..23")]
    Boundaries,
    #[error("price {price} outside [{floor}, {cap}]")]
    Price { price: f64, floor: f64, cap: f64 },
}

#[derive(Debug, Error)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error("every individual in generation {generation} was penalised; last failure: {last}")]
    AllPenalized { generation: usize, last: String },
    #[error(transparent)]
    Chromosome(#[from] ChromosomeError),
}

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error("sweep needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("parameter {id}: range [{lo}, {hi}] is empty")]
    EmptyRange { id: String, lo: f64, hi: f64 },
    #[error("unknown parameter id `{0}`")]
    UnknownParameter(String),
    #[error("base configuration is infeasible: {0}")]
    BaseInfeasible(#[source] DispatchError),
}

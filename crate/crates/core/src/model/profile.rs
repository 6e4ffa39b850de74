//! Hourly day-ahead profiles.

use std::fmt;
use std::io::Read;
use std::ops::Index;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;

/// Number of scheduling slots in the day-ahead horizon.
pub const SLOTS: usize = 24;

/// Slot length in hours.
pub const DT_HOURS: f64 = 1.0;

/// Physical unit carried by a [`TimeProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Kilowatt,
    KilowattHour,
    NormalCubicMetre,
    Celsius,
    YuanPerKwh,
    KgCo2,
    MetrePerSecond,
    WattPerSquareMetre,
    Kilogram,
    CubicMetre,
    Dimensionless,
}

impl Unit {
    /// Temperatures may be negative; every other quantity is a non-negative
    /// power, energy, mass, volume or price.
    pub fn allows_negative(self) -> bool {
        matches!(self, Unit::Celsius)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Kilowatt => "kW",
            Unit::KilowattHour => "kWh",
            Unit::NormalCubicMetre => "Nm3",
            Unit::Celsius => "degC",
            Unit::YuanPerKwh => "CNY/kWh",
            Unit::KgCo2 => "kgCO2",
            Unit::MetrePerSecond => "m/s",
            Unit::WattPerSquareMetre => "W/m2",
            Unit::Kilogram => "kg",
            Unit::CubicMetre => "m3",
            Unit::Dimensionless => "-",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A 24-slot hourly series. Slot 0 covers 00:00-01:00.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeProfile {
    values: [f64; SLOTS],
    unit: Unit,
}

impl TimeProfile {
    pub fn new(values: &[f64], unit: Unit) -> Result<Self, ProfileError> {
        if values.len() != SLOTS {
            return Err(ProfileError::Length(values.len()));
        }
        let mut out = [0.0; SLOTS];
        for (slot, (&v, dst)) in values.iter().zip(out.iter_mut()).enumerate() {
            if !v.is_finite() {
                return Err(ProfileError::NonFinite { slot });
            }
            if v < 0.0 && !unit.allows_negative() {
                return Err(ProfileError::Negative { slot, value: v, unit });
            }
            *dst = v;
        }
        Ok(Self { values: out, unit })
    }

    pub fn constant(value: f64, unit: Unit) -> Result<Self, ProfileError> {
        Self::new(&[value; SLOTS], unit)
    }

    pub fn zeros(unit: Unit) -> Self {
        Self {
            values: [0.0; SLOTS],
            unit,
        }
    }

    pub fn values(&self) -> &[f64; SLOTS] {
        &self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().copied()
    }

    /// Applies `f` slot-wise, re-validating the result against `unit`.
    pub fn map(&self, unit: Unit, f: impl Fn(f64) -> f64) -> Result<Self, ProfileError> {
        let v: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        Self::new(&v, unit)
    }

    /// Reads a `slot,value` CSV with exactly 24 data rows in slot order.
    pub fn read_csv(path: &Path, unit: Unit) -> Result<Self, ProfileError> {
        let file = std::fs::File::open(path).map_err(|e| ProfileError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_csv_reader(file, unit)
            .map_err(|e| e.with_path(&path.display().to_string()))
    }

    pub fn from_csv_reader<R: Read>(reader: R, unit: Unit) -> Result<Self, ProfileError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(ProfileError::csv)?.clone();
        if headers.len() != 2 || &headers[0] != "slot" || &headers[1] != "value" {
            return Err(ProfileError::Header(headers.iter().collect::<Vec<_>>().join(",")));
        }
        let mut values = Vec::with_capacity(SLOTS);
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(ProfileError::csv)?;
            let slot: usize = record[0]
                .parse()
                .map_err(|_| ProfileError::Parse { row, field: record[0].to_string() })?;
            if slot != row {
                return Err(ProfileError::SlotOrder { row, slot });
            }
            let value: f64 = record[1]
                .parse()
                .map_err(|_| ProfileError::Parse { row, field: record[1].to_string() })?;
            values.push(value);
        }
        Self::new(&values, unit)
    }

    /// Writes the profile in the same `slot,value` schema it is read from.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("slot,value\n");
        for (slot, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{slot},{v}\n"));
        }
        out
    }
}

impl Index<usize> for TimeProfile {
    type Output = f64;

    fn index(&self, slot: usize) -> &f64 {
        &self.values[slot]
    }
}

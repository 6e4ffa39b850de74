use serde::{Deserialize, Serialize};

use super::profile::{TimeProfile, Unit, SLOTS};
use crate::error::ConfigError;

/// Time-of-use period class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Period {
    Valley,
    Flat,
    Peak,
}

impl Period {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'V' | 'v' => Some(Period::Valley),
            'F' | 'f' => Some(Period::Flat),
            'P' | 'p' => Some(Period::Peak),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Period::Valley => 'V',
            Period::Flat => 'F',
            Period::Peak => 'P',
        }
    }
}

/// Valley 23:00-07:00; flat 07:00-10:00, 15:00-18:00, 21:00-23:00;
/// peak 10:00-15:00, 18:00-21:00.
pub const DEFAULT_PERIOD_MAP: &str = "VVVVVVVFFFPPPPPFFFPPPFFV";

/// Three-level time-of-use tariff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTou", into = "RawTou")]
pub struct TouPriceSchedule {
    pub valley_price: f64,
    pub flat_price: f64,
    pub peak_price: f64,
    period_map: [Period; SLOTS],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTou {
    valley_price: f64,
    flat_price: f64,
    peak_price: f64,
    periods: String,
}

impl TryFrom<RawTou> for TouPriceSchedule {
    type Error = ConfigError;

    fn try_from(raw: RawTou) -> Result<Self, Self::Error> {
        Self::new(raw.valley_price, raw.flat_price, raw.peak_price, &raw.periods)
    }
}

impl From<TouPriceSchedule> for RawTou {
    fn from(s: TouPriceSchedule) -> Self {
        RawTou {
            valley_price: s.valley_price,
            flat_price: s.flat_price,
            peak_price: s.peak_price,
            periods: s.period_map.iter().map(|p| p.as_char()).collect(),
        }
    }
}

impl TouPriceSchedule {
    /// `periods` is a 24-character string of `V`/`F`/`P`, one per slot.
    pub fn new(valley: f64, flat: f64, peak: f64, periods: &str) -> Result<Self, ConfigError> {
        if !(valley.is_finite() && flat.is_finite() && peak.is_finite()) || valley < 0.0 {
            return Err(ConfigError::Invalid("TOU prices must be finite and non-negative".into()));
        }
        if !(valley <= flat && flat <= peak) {
            return Err(ConfigError::Invalid(format!(
                "TOU prices must satisfy valley <= flat <= peak, got {valley}, {flat}, {peak}"
            )));
        }
        let chars: Vec<char> = periods.chars().collect();
        if chars.len() != SLOTS {
            return Err(ConfigError::Invalid(format!(
                "TOU period map must have 24 entries, got {}",
                chars.len()
            )));
        }
        let mut period_map = [Period::Flat; SLOTS];
        for (slot, c) in chars.into_iter().enumerate() {
            period_map[slot] = Period::from_char(c).ok_or_else(|| {
                ConfigError::Invalid(format!("TOU period map: bad tag `{c}` at slot {slot}"))
            })?;
        }
        Ok(Self {
            valley_price: valley,
            flat_price: flat,
            peak_price: peak,
            period_map,
        })
    }

    /// The Beijing schedule used by the bundled dataset.
    pub fn table_default() -> Self {
        Self::new(0.2988, 0.5855, 0.8882, DEFAULT_PERIOD_MAP).expect("default tariff is valid")
    }

    pub fn period_map(&self) -> &[Period; SLOTS] {
        &self.period_map
    }

    pub fn price_of(&self, period: Period) -> f64 {
        match period {
            Period::Valley => self.valley_price,
            Period::Flat => self.flat_price,
            Period::Peak => self.peak_price,
        }
    }

    pub fn price_profile(&self) -> TimeProfile {
        let v: Vec<f64> = self.period_map.iter().map(|&p| self.price_of(p)).collect();
        TimeProfile::new(&v, Unit::YuanPerKwh).expect("prices validated non-negative")
    }
}

/// Period tag of `slot` under `schedule`.
pub fn period_of(slot: usize, schedule: &TouPriceSchedule) -> Period {
    schedule.period_map[slot]
}

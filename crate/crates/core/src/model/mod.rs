//! Shared domain types: profiles, tariffs, scenarios and the system
//! configuration.

mod config;
mod profile;
mod scenario;
mod tariff;

pub use config::{
    load_config, load_config_str, profile_names, GridSupply, OmCosts, Profiles, RenewableParams, SystemConfig,
    ThermalNetwork,
};
pub use profile::{TimeProfile, Unit, DT_HOURS, SLOTS};
pub use scenario::{Scenario, ScenarioFlags};
pub use tariff::{period_of, Period, TouPriceSchedule, DEFAULT_PERIOD_MAP};

//! Steady-state conversion models for the park's generators and boilers.
//!
//! Every function here is pure. Powers are in kW and, with one-hour slots,
//! numerically equal to the energy delivered in the slot.

use serde::{Deserialize, Serialize};

use crate::error::DeviceError;
use crate::model::DT_HOURS;

/// kWh per MJ.
pub const KWH_PER_MJ: f64 = 1.0 / 3.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindParams {
    /// Cut-in speed, m/s.
    pub v_in: f64,
    /// Rated speed, m/s.
    pub v_star: f64,
    /// Cut-out speed, m/s.
    pub v_out: f64,
    /// Rated power, kW.
    pub p_star: f64,
}

impl WindParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0 < self.v_in && self.v_in < self.v_star && self.v_star < self.v_out) {
            return Err(format!(
                "wind speeds must satisfy 0 < v_in < v_star < v_out, got {}, {}, {}",
                self.v_in, self.v_star, self.v_out
            ));
        }
        if !(self.p_star > 0.0) {
            return Err("wind rated power must be positive".into());
        }
        Ok(())
    }
}

/// Turbine power curve: zero outside `[v_in, v_out)`, linear ramp up to the
/// rated speed, flat at rated power above it.
pub fn wind_output(v: f64, p: &WindParams) -> f64 {
    if v < p.v_in || v >= p.v_out {
        0.0
    } else if v < p.v_star {
        (v - p.v_in) / (p.v_star - p.v_in) * p.p_star
    } else {
        p.p_star
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PvParams {
    /// Rated array power, kW.
    pub p_max: f64,
    /// Nominal irradiance, W/m2.
    pub g_nominal: f64,
    /// Power temperature coefficient, 1/degC (negative for silicon).
    pub temp_coeff: f64,
    /// Reference cell temperature, degC.
    pub t_ref: f64,
}

impl PvParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.p_max > 0.0 && self.g_nominal > 0.0) {
            return Err("PV p_max and g_nominal must be positive".into());
        }
        if !self.temp_coeff.is_finite() || !self.t_ref.is_finite() {
            return Err("PV temperature parameters must be finite".into());
        }
        Ok(())
    }
}

/// Irradiance- and temperature-corrected array output, floored at zero.
pub fn pv_output(g: f64, t_cell: f64, p: &PvParams) -> f64 {
    let raw = p.p_max * (g / p.g_nominal) * (1.0 + p.temp_coeff * (t_cell - p.t_ref));
    raw.max(0.0)
}

/// Conversion result of a fuel-fired cogeneration unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CogenOutput {
    pub electric: f64,
    pub thermal: f64,
    /// Fuel energy actually burnt after the electric cap is applied, kWh.
    pub fuel_used: f64,
}

fn cogen(fuel_energy: f64, eta_e: f64, eta_h: f64, capacity: f64) -> CogenOutput {
    let fuel_cap = capacity * DT_HOURS / eta_e;
    let fuel_used = fuel_energy.max(0.0).min(fuel_cap);
    CogenOutput {
        electric: eta_e * fuel_used,
        thermal: eta_h * fuel_used,
        fuel_used,
    }
}

/// Biomass CHP fed with pyrolysis syngas and upgraded biogas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChpParams {
    /// Electric capacity, kW.
    pub capacity: f64,
    pub eta_e: f64,
    pub eta_h: f64,
    /// Lower heating value of pyrolysis fuel, MJ/kg.
    pub lhv_fuel: f64,
    /// Maximum fuel input, kW. Defaults to `capacity / eta_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_cap: Option<f64>,
    /// Ramp limits on electric output, kW/h.
    pub ramp_up: f64,
    pub ramp_down: f64,
}

impl ChpParams {
    pub fn max_fuel(&self) -> f64 {
        self.fuel_cap.unwrap_or(self.capacity / self.eta_e)
    }

    pub fn validate(&self) -> Result<(), String> {
        check_eff("chp.eta_e", self.eta_e)?;
        check_eff("chp.eta_h", self.eta_h)?;
        if self.eta_e + self.eta_h > 1.0 {
            return Err("chp.eta_e + chp.eta_h must not exceed 1".into());
        }
        check_pos("chp.capacity", self.capacity)?;
        check_pos("chp.lhv_fuel", self.lhv_fuel)?;
        check_nonneg("chp.ramp_up", self.ramp_up)?;
        check_nonneg("chp.ramp_down", self.ramp_down)?;
        if let Some(c) = self.fuel_cap {
            check_nonneg("chp.fuel_cap", c)?;
        }
        Ok(())
    }
}

/// CHP electric and thermal output for `fuel_energy` kWh of fuel.
pub fn chp_output(fuel_energy: f64, p: &ChpParams) -> CogenOutput {
    cogen(fuel_energy, p.eta_e, p.eta_h, p.capacity)
}

/// Gas turbine with exhaust heat recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtParams {
    pub capacity: f64,
    pub eta_e: f64,
    /// Recovered-heat efficiency of the exhaust heat boiler.
    pub eta_h: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
}

impl GtParams {
    pub fn validate(&self) -> Result<(), String> {
        check_eff("gt.eta_e", self.eta_e)?;
        check_eff("gt.eta_h", self.eta_h)?;
        if self.eta_e + self.eta_h > 1.0 {
            return Err("gt.eta_e + gt.eta_h must not exceed 1".into());
        }
        check_pos("gt.capacity", self.capacity)?;
        check_nonneg("gt.ramp_up", self.ramp_up)?;
        check_nonneg("gt.ramp_down", self.ramp_down)
    }
}

pub fn gt_output(gas_energy: f64, p: &GtParams) -> CogenOutput {
    cogen(gas_energy, p.eta_e, p.eta_h, p.capacity)
}

/// Pipeline gas properties shared by every gas-fired device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParams {
    /// Purchase price, CNY/Nm3.
    pub price: f64,
    /// Lower heating value, MJ/Nm3.
    pub lhv: f64,
    /// Combustion emission factor, kgCO2/Nm3.
    pub co2_factor: f64,
    /// Price received for upgraded biogas injected into the pipeline, CNY/Nm3.
    #[serde(default)]
    pub biomethane_price: f64,
}

impl GasParams {
    pub fn kwh_per_nm3(&self) -> f64 {
        self.lhv * KWH_PER_MJ
    }

    pub fn validate(&self) -> Result<(), String> {
        check_nonneg("gas.price", self.price)?;
        check_pos("gas.lhv", self.lhv)?;
        check_nonneg("gas.co2_factor", self.co2_factor)?;
        check_nonneg("gas.biomethane_price", self.biomethane_price)
    }
}

/// Gas boiler. Fuel volume follows `a*q^2 + b*q + c` in the heat setpoint `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbParams {
    pub capacity: f64,
    pub eta_h: f64,
    #[serde(default)]
    pub fuel_a: f64,
    /// Linear coefficient, Nm3/kWh. Defaults to `1 / (eta_h * LHV)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fuel_b: Option<f64>,
    #[serde(default)]
    pub fuel_c: f64,
    #[serde(default)]
    pub min_output: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
}

impl GbParams {
    pub fn validate(&self) -> Result<(), String> {
        check_eff("gb.eta_h", self.eta_h)?;
        check_pos("gb.capacity", self.capacity)?;
        check_nonneg("gb.fuel_a", self.fuel_a)?;
        check_nonneg("gb.fuel_c", self.fuel_c)?;
        if let Some(b) = self.fuel_b {
            check_nonneg("gb.fuel_b", b)?;
        }
        if !(0.0..=self.capacity).contains(&self.min_output) {
            return Err("gb.min_output must lie in [0, capacity]".into());
        }
        check_nonneg("gb.ramp_up", self.ramp_up)?;
        check_nonneg("gb.ramp_down", self.ramp_down)
    }

    pub fn fuel_coefficients(&self, gas: &GasParams) -> (f64, f64, f64) {
        let b = self
            .fuel_b
            .unwrap_or_else(|| 1.0 / (self.eta_h * gas.kwh_per_nm3()));
        (self.fuel_a, b, self.fuel_c)
    }

    /// Chord linearisation of the fuel curve on `segments` equal-width
    /// pieces over `[0, capacity]`: returns `(width, slope)` per piece. The
    /// intercept is `fuel_c`. Slopes are non-decreasing because `a >= 0`.
    pub fn fuel_segments(&self, gas: &GasParams, segments: usize) -> Vec<(f64, f64)> {
        let (a, b, _) = self.fuel_coefficients(gas);
        let n = segments.max(1);
        let w = self.capacity / n as f64;
        (0..n)
            .map(|k| {
                let lo = k as f64 * w;
                let hi = lo + w;
                // (F(hi) - F(lo)) / w for F = a q^2 + b q
                (w, a * (lo + hi) + b)
            })
            .collect()
    }

    /// Fuel volume implied by the linearised curve, Nm3.
    pub fn fuel_pwl(&self, heat_out: f64, gas: &GasParams, segments: usize) -> f64 {
        let mut remaining = heat_out.max(0.0);
        let mut fuel = self.fuel_c;
        for (w, slope) in self.fuel_segments(gas, segments) {
            let take = remaining.min(w);
            fuel += take * slope;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        fuel
    }
}

/// Exact gas volume (Nm3) and emissions (kgCO2) at heat setpoint `heat_out`.
pub fn gb_fuel_and_emissions(
    heat_out: f64,
    p: &GbParams,
    gas: &GasParams,
) -> Result<(f64, f64), DeviceError> {
    if heat_out < 0.0 {
        return Err(DeviceError::NegativeInput {
            device: "gas boiler",
            value: heat_out,
        });
    }
    if heat_out > p.capacity {
        return Err(DeviceError::AboveCapacity {
            device: "gas boiler",
            requested: heat_out,
            capacity: p.capacity,
        });
    }
    let (a, b, c) = p.fuel_coefficients(gas);
    let fuel = a * heat_out * heat_out + b * heat_out + c;
    Ok((fuel, gas.co2_factor * fuel))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EbParams {
    /// Thermal output capacity, kW.
    pub capacity: f64,
    pub eta: f64,
}

impl EbParams {
    pub fn validate(&self) -> Result<(), String> {
        check_eff("eb.eta", self.eta)?;
        check_nonneg("eb.capacity", self.capacity)
    }
}

pub fn eb_output(electric_in: f64, p: &EbParams) -> f64 {
    (p.eta * electric_in.max(0.0)).min(p.capacity)
}

/// Heat pump; COP may exceed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HpParams {
    /// Thermal output capacity, kW.
    pub capacity: f64,
    pub cop: f64,
}

impl HpParams {
    pub fn validate(&self) -> Result<(), String> {
        check_pos("hp.cop", self.cop)?;
        check_nonneg("hp.capacity", self.capacity)
    }
}

pub fn hp_output(electric_in: f64, p: &HpParams) -> f64 {
    (p.cop * electric_in.max(0.0)).min(p.capacity)
}

pub(crate) fn check_eff(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(format!("{name} = {v} must lie in (0, 1]"))
    }
}

pub(crate) fn check_pos(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} = {v} must be positive"))
    }
}

pub(crate) fn check_nonneg(name: &str, v: f64) -> Result<(), String> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(format!("{name} = {v} must be non-negative"))
    }
}

//! Biomass chain: pyrolysis gasification feed, co-digestion biogas yield,
//! digester heating and biogas upgrading.

use serde::{Deserialize, Serialize};

use crate::devices::{check_eff, check_nonneg, check_pos, KWH_PER_MJ};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyrolysisParams {
    pub beta_straw: f64,
    pub beta_garbage: f64,
    pub beta_straw_r2f: f64,
    pub beta_garbage_r2f: f64,
    /// Gasifier (pyrolysis furnace) efficiency.
    pub eta_pf: f64,
    /// Share of the fuel heating value delivered to the engine as syngas.
    pub eta_pg: f64,
    /// Operating temperature, degC. Informational only.
    #[serde(default = "default_pg_temperature")]
    pub temperature: f64,
}

fn default_pg_temperature() -> f64 {
    700.0
}

impl PyrolysisParams {
    pub fn validate(&self) -> Result<(), String> {
        check_eff("pyrolysis.beta_straw", self.beta_straw)?;
        check_eff("pyrolysis.beta_garbage", self.beta_garbage)?;
        check_eff("pyrolysis.beta_straw_r2f", self.beta_straw_r2f)?;
        check_eff("pyrolysis.beta_garbage_r2f", self.beta_garbage_r2f)?;
        check_eff("pyrolysis.eta_pf", self.eta_pf)?;
        check_eff("pyrolysis.eta_pg", self.eta_pg)
    }
}

/// Pyrolysis fuel mass (kg) from straw and municipal garbage feeds (kg).
pub fn pyrolysis_fuel(m_straw: f64, m_garbage: f64, p: &PyrolysisParams) -> f64 {
    (m_straw * p.beta_straw * p.beta_straw_r2f + m_garbage * p.beta_garbage * p.beta_garbage_r2f)
        * p.eta_pf
}

/// Syngas energy (kWh) offered to the CHP by `fuel_mass` kg of pyrolysis
/// fuel with heating value `lhv_fuel` MJ/kg.
pub fn syngas_energy(fuel_mass: f64, lhv_fuel: f64, p: &PyrolysisParams) -> f64 {
    fuel_mass * lhv_fuel * KWH_PER_MJ * p.eta_pg
}

/// Digester wall heat-transfer model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DigesterParams {
    /// Effective heat exchange area, m2.
    pub area: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Efficiency of the equipment supplying digester heat.
    pub eta_eq: f64,
    /// Replaces the computed heat-exchange coefficient when set, kW/(m2 K).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_bd_override: Option<f64>,
    /// Mesophilic operating temperature, degC.
    pub target_temp: f64,
}

impl DigesterParams {
    pub fn validate(&self) -> Result<(), String> {
        check_nonneg("digester.area", self.area)?;
        for (n, v) in [
            ("digester.alpha1", self.alpha1),
            ("digester.alpha2", self.alpha2),
            ("digester.theta1", self.theta1),
            ("digester.theta2", self.theta2),
        ] {
            check_pos(n, v)?;
        }
        check_nonneg("digester.phi1", self.phi1)?;
        check_nonneg("digester.phi2", self.phi2)?;
        check_eff("digester.eta_eq", self.eta_eq)?;
        if let Some(v) = self.eta_bd_override {
            check_nonneg("digester.eta_bd_override", v)?;
        }
        Ok(())
    }
}

/// Series-resistance heat exchange coefficient of the digester wall.
pub fn eta_bd(d: &DigesterParams) -> f64 {
    d.eta_bd_override.unwrap_or_else(|| {
        1.0 / (1.0 / d.alpha1 + 1.0 / d.alpha2 + d.phi1 / d.theta1 + d.phi2 / d.theta2)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiogasParams {
    /// Sedimentation coefficient of rural wastewater.
    pub beta_st: f64,
    /// Fermentable (anaerobically digestible) fraction.
    pub eta_ab: f64,
    pub beta_sludge: f64,
    /// Sludge density, kg/m3.
    pub rho_sludge: f64,
    /// Biogas yield, Nm3 per kg of digester feed.
    pub beta_bg: f64,
    pub eta_b2g: f64,
    /// Methane content of upgraded gas. Informational only.
    #[serde(default = "default_ch4")]
    pub ch4_content: f64,
    /// Upgrading unit electricity use, kWh per Nm3 of upgraded gas.
    pub b2g_kwh_per_nm3: f64,
    /// Power-to-gas unit. No model exists for it, so it is a fixed
    /// zero-capacity placeholder; the coefficient is carried so sweeps can
    /// demonstrate it has no effect.
    #[serde(default)]
    pub p2g_kwh_per_nm3: f64,
    pub digester: DigesterParams,
}

fn default_ch4() -> f64 {
    0.96
}

impl BiogasParams {
    pub fn validate(&self) -> Result<(), String> {
        check_eff("biogas.beta_st", self.beta_st)?;
        check_eff("biogas.eta_ab", self.eta_ab)?;
        check_pos("biogas.beta_sludge", self.beta_sludge)?;
        check_pos("biogas.rho_sludge", self.rho_sludge)?;
        check_pos("biogas.beta_bg", self.beta_bg)?;
        check_eff("biogas.eta_b2g", self.eta_b2g)?;
        check_nonneg("biogas.b2g_kwh_per_nm3", self.b2g_kwh_per_nm3)?;
        check_nonneg("biogas.p2g_kwh_per_nm3", self.p2g_kwh_per_nm3)?;
        self.digester.validate()
    }
}

/// Raw biogas (Nm3) from wastewater (m3) through the sedimentation tank,
/// co-digested with wet organic garbage (kg).
pub fn biogas_yield(wastewater: f64, wet_garbage: f64, p: &BiogasParams) -> f64 {
    let sludge_volume = wastewater * p.beta_st * p.eta_ab;
    let sludge_mass = sludge_volume * p.beta_sludge * p.rho_sludge;
    (sludge_mass + wet_garbage) * p.beta_bg
}

/// Heat (kW) needed to hold the digester `delta_t` degC above ambient.
pub fn digester_heat_demand(delta_t: f64, p: &BiogasParams) -> f64 {
    p.digester.area * eta_bd(&p.digester) * delta_t.max(0.0)
}

/// Pipeline-quality gas (Nm3) from raw biogas.
pub fn upgrade_biogas(biogas: f64, p: &BiogasParams) -> f64 {
    biogas * p.eta_b2g
}

//! Numeric inputs of one dispatch problem.

use serde::{Deserialize, Serialize};

use super::normal::inverse_normal_cdf;
use crate::biomass::{biogas_yield, digester_heat_demand, pyrolysis_fuel, syngas_energy, upgrade_biogas};
use crate::carbon::CarbonMarketParams;
use crate::demand_response::{ComfortParams, IbdrOffer, StorageParams, ThermalDrBounds};
use crate::devices::{pv_output, wind_output, ChpParams, EbParams, GasParams, GbParams, GtParams, HpParams};
use crate::error::DispatchError;
use crate::model::{OmCosts, ScenarioFlags, SystemConfig, TimeProfile, DT_HOURS, SLOTS};

/// Pieces used for the gas boiler fuel curve.
pub const GB_SEGMENTS: usize = 8;

/// Weight of the secondary objective (emissions, then grid purchase).
pub const TIE_BREAK: f64 = 1e-6;

/// Everything the lower-level LP needs, already reduced to per-slot
/// numbers. Vectors share one length, the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchInput {
    pub flags: ScenarioFlags,
    /// Base electric and thermal loads, kW.
    pub electric_load: Vec<f64>,
    pub thermal_load: Vec<f64>,
    /// Price paid for grid electricity, CNY/kWh.
    pub price: Vec<f64>,
    pub wind_forecast: Vec<f64>,
    pub pv_forecast: Vec<f64>,
    /// Chance-constrained dispatch caps, kW.
    pub wind_cap: Vec<f64>,
    pub pv_cap: Vec<f64>,
    /// Pyrolysis syngas offered to the CHP, kWh of fuel.
    pub syngas: Vec<f64>,
    /// Upgraded biogas available, Nm3.
    pub biomethane: Vec<f64>,
    /// Heat drawn by the digester heating equipment, kW.
    pub digester_heat: Vec<f64>,
    /// Fixed electric auxiliaries (biogas upgrading, power-to-gas), kW.
    pub aux_electric: Vec<f64>,
    /// Price-based load change at full participation, kW.
    pub pbdr: Vec<f64>,
    pub ibdr: Vec<IbdrOffer>,
    /// Electric load that may be served as heat instead, kW.
    pub replaceable: Vec<f64>,
    pub thermal_dr: ThermalDrBounds,
    pub chp: ChpParams,
    pub gt: GtParams,
    pub gb: GbParams,
    pub gas: GasParams,
    pub eb: EbParams,
    pub hp: HpParams,
    pub electric_storage: StorageParams,
    pub thermal_storage: StorageParams,
    pub comfort: ComfortParams,
    pub carbon: CarbonMarketParams,
    pub om: OmCosts,
    pub import_cap: f64,
    pub loss_rate: f64,
    pub replace_heat_ratio: f64,
    pub thermal_curtail_price: f64,
    pub gb_segments: usize,
    pub tie_break: f64,
}

impl DispatchInput {
    pub fn horizon(&self) -> usize {
        self.electric_load.len()
    }

    /// A horizon of `horizon` slots with every series zero and device
    /// parameters copied from `cfg`. Meant for hand-built instances.
    pub fn blank(horizon: usize, cfg: &SystemConfig, flags: ScenarioFlags) -> Self {
        let z = vec![0.0; horizon];
        DispatchInput {
            flags,
            electric_load: z.clone(),
            thermal_load: z.clone(),
            price: z.clone(),
            wind_forecast: z.clone(),
            pv_forecast: z.clone(),
            wind_cap: z.clone(),
            pv_cap: z.clone(),
            syngas: z.clone(),
            biomethane: z.clone(),
            digester_heat: z.clone(),
            aux_electric: z.clone(),
            pbdr: z.clone(),
            ibdr: (0..horizon).map(|_| cfg.dr.offer_for(0.0)).collect(),
            replaceable: z.clone(),
            thermal_dr: cfg.dr.thermal_bounds(&z),
            chp: cfg.chp.clone(),
            gt: cfg.gt.clone(),
            gb: cfg.gb.clone(),
            gas: cfg.gas.clone(),
            eb: cfg.eb.clone(),
            hp: cfg.hp.clone(),
            electric_storage: cfg.electric_storage.clone(),
            thermal_storage: cfg.thermal_storage.clone(),
            comfort: cfg.comfort.clone(),
            carbon: cfg.carbon.clone(),
            om: cfg.om.clone(),
            import_cap: cfg.grid.import_cap,
            loss_rate: cfg.network.loss_rate,
            replace_heat_ratio: cfg.dr.replace_heat_ratio,
            thermal_curtail_price: cfg.dr.thermal_curtail_price,
            gb_segments: GB_SEGMENTS,
            tie_break: TIE_BREAK,
        }
    }

    /// The day-ahead problem for `cfg` under `flags` when the grid sells at
    /// `prices`.
    pub fn from_config(
        cfg: &SystemConfig,
        flags: ScenarioFlags,
        prices: &TimeProfile,
    ) -> Result<Self, DispatchError> {
        let p = &cfg.profiles;
        let mut inp = Self::blank(SLOTS, cfg, flags);
        inp.electric_load = p.electric_load.values().to_vec();
        inp.thermal_load = p.thermal_load.values().to_vec();
        inp.price = prices.iter().map(|v| v * cfg.grid.tariff_scale).collect();

        let z = inverse_normal_cdf(1.0 - cfg.renewables.confidence)
            .map_err(|e| DispatchError::InvalidInput(e.to_string()))?;
        let cap = |fore: f64, ratio: f64| (fore * (1.0 + ratio * z)).max(0.0);
        for t in 0..SLOTS {
            let w = wind_output(p.wind_speed[t], &cfg.wind);
            let s = pv_output(p.irradiance[t], p.cell_temperature[t], &cfg.pv);
            inp.wind_forecast[t] = w;
            inp.pv_forecast[t] = s;
            inp.wind_cap[t] = cap(w, cfg.renewables.wind_sigma_ratio);
            inp.pv_cap[t] = cap(s, cfg.renewables.pv_sigma_ratio);

            let fuel = pyrolysis_fuel(p.straw[t], p.garbage[t], &cfg.pyrolysis);
            inp.syngas[t] = syngas_energy(fuel, cfg.chp.lhv_fuel, &cfg.pyrolysis) / DT_HOURS;
            let raw = biogas_yield(p.wastewater[t], p.wet_garbage[t], &cfg.biogas);
            let up = upgrade_biogas(raw, &cfg.biogas);
            inp.biomethane[t] = up;
            inp.aux_electric[t] = up * cfg.biogas.b2g_kwh_per_nm3 / DT_HOURS;
            let dt = cfg.biogas.digester.target_temp - p.outdoor_temperature[t];
            inp.digester_heat[t] =
                digester_heat_demand(dt, &cfg.biogas) / cfg.biogas.digester.eta_eq;
        }

        if flags.demand_response_enabled {
            let e = cfg.elasticity();
            inp.pbdr = cfg.dr.pbdr_for(&p.electric_load, prices, &e).to_vec();
            inp.ibdr = inp
                .electric_load
                .iter()
                .map(|l| cfg.dr.offer_for(cfg.dr.shares.reducible * l * DT_HOURS))
                .collect();
            inp.replaceable = inp
                .electric_load
                .iter()
                .map(|l| cfg.dr.shares.replaceable * l)
                .collect();
            inp.thermal_dr = cfg.dr.thermal_bounds(&inp.thermal_load);
        }
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<(), DispatchError> {
        let n = self.horizon();
        let bad = |m: String| Err(DispatchError::InvalidInput(m));
        if n == 0 {
            return bad("empty horizon".into());
        }
        let series: [(&str, &[f64]); 14] = [
            ("electric_load", &self.electric_load),
            ("thermal_load", &self.thermal_load),
            ("price", &self.price),
            ("wind_forecast", &self.wind_forecast),
            ("pv_forecast", &self.pv_forecast),
            ("wind_cap", &self.wind_cap),
            ("pv_cap", &self.pv_cap),
            ("syngas", &self.syngas),
            ("biomethane", &self.biomethane),
            ("digester_heat", &self.digester_heat),
            ("aux_electric", &self.aux_electric),
            ("replaceable", &self.replaceable),
            ("thermal_dr.curtail_max", &self.thermal_dr.curtail_max),
            ("thermal_dr.shift_max", &self.thermal_dr.shift_max),
        ];
        for (name, v) in series {
            if v.len() != n {
                return bad(format!("{name} has {} slots, expected {n}", v.len()));
            }
            if let Some(t) = v.iter().position(|x| !x.is_finite() || *x < 0.0) {
                return bad(format!("{name} is negative or not finite at slot {t}"));
            }
        }
        if self.pbdr.len() != n || self.pbdr.iter().any(|x| !x.is_finite()) {
            return bad("pbdr must be finite with one value per slot".into());
        }
        if self.ibdr.len() != n {
            return bad("one IBDR offer per slot is required".into());
        }
        for o in &self.ibdr {
            o.validate().map_err(DispatchError::InvalidInput)?;
        }
        self.thermal_dr.validate().map_err(DispatchError::InvalidInput)?;
        if self.thermal_dr.shift_min.len() != n {
            return bad("thermal DR bounds do not match the horizon".into());
        }
        if self.gb_segments == 0 {
            return bad("gb_segments must be positive".into());
        }
        for (name, v) in [
            ("import_cap", self.import_cap),
            ("replace_heat_ratio", self.replace_heat_ratio),
            ("thermal_curtail_price", self.thermal_curtail_price),
            ("tie_break", self.tie_break),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and non-negative"));
            }
        }
        if !(0.0..1.0).contains(&self.loss_rate) {
            return bad("loss_rate must lie in [0, 1)".into());
        }
        Ok(())
    }

    /// Gas boiler heat-to-fuel pieces `(width kW, slope Nm3/kWh)`.
    pub fn gb_pieces(&self) -> Vec<(f64, f64)> {
        self.gb.fuel_segments(&self.gas, self.gb_segments)
    }
}

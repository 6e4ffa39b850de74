//! Solving the LP and reading the schedule back.

use serde::{Deserialize, Serialize};

use super::build::{build_lp, DispatchLp};
use super::input::DispatchInput;
use crate::carbon::{settle, CarbonLedger, LedgerInputs};
use crate::error::DispatchError;
use crate::model::DT_HOURS;

/// Per-slot decisions; every vector has one entry per slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub wind: Vec<f64>,
    pub pv: Vec<f64>,
    /// Syngas burnt in the CHP, kWh.
    pub syngas: Vec<f64>,
    /// Upgraded biogas burnt in the CHP and sold to the pipeline, Nm3.
    pub chp_biomethane: Vec<f64>,
    pub biomethane_export: Vec<f64>,
    pub chp_electric: Vec<f64>,
    pub chp_heat: Vec<f64>,
    /// Gas turbine fuel, Nm3.
    pub gt_gas: Vec<f64>,
    pub gt_electric: Vec<f64>,
    pub gt_heat: Vec<f64>,
    /// Gas boiler heat per linearisation piece, kW.
    pub gb_segments: Vec<Vec<f64>>,
    pub gb_heat: Vec<f64>,
    /// Gas boiler fuel, Nm3.
    pub gb_gas: Vec<f64>,
    pub eb_in: Vec<f64>,
    pub eb_heat: Vec<f64>,
    pub hp_in: Vec<f64>,
    pub hp_heat: Vec<f64>,
    pub grid_buy: Vec<f64>,
    /// Nm3.
    pub gas_buy: Vec<f64>,
    pub es_charge: Vec<f64>,
    pub es_discharge: Vec<f64>,
    /// State of charge at the end of each slot, kWh.
    pub es_soc: Vec<f64>,
    pub ts_charge: Vec<f64>,
    pub ts_discharge: Vec<f64>,
    pub ts_soc: Vec<f64>,
    pub heat_dump: Vec<f64>,
    /// Share of the price-based response taken up, 0..1.
    pub pbdr_scale: f64,
    /// Applied price-based load change, kW.
    pub pbdr: Vec<f64>,
    /// Incentive-based load increase and decrease per tier, kW.
    pub ibdr_up: Vec<Vec<f64>>,
    pub ibdr_down: Vec<Vec<f64>>,
    pub replaced: Vec<f64>,
    pub heat_shift: Vec<f64>,
    pub heat_curtail: Vec<f64>,
    /// Indoor temperature at the end of each slot, degC.
    pub indoor_temp: Vec<f64>,
}

impl Schedule {
    fn sum_rows(v: &[Vec<f64>]) -> Vec<f64> {
        v.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn ibdr_up_total(&self) -> Vec<f64> {
        Self::sum_rows(&self.ibdr_up)
    }

    pub fn ibdr_down_total(&self) -> Vec<f64> {
        Self::sum_rows(&self.ibdr_down)
    }
}

/// Day cost split, CNY.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Electricity and gas purchases net of biomethane sales.
    pub energy_purchase: f64,
    /// Device O&M, renewable curtailment penalty and demand response
    /// compensation.
    pub om: f64,
    /// Part of `om` paid to demand response participants.
    pub dr_compensation: f64,
    pub carbon: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    pub schedule: Schedule,
    pub costs: CostBreakdown,
    pub ledger: CarbonLedger,
    /// LP objective value, including the tie-break terms.
    pub objective: f64,
    pub variables: usize,
    pub constraints: usize,
}

impl DispatchSolution {
    pub fn emissions(&self) -> f64 {
        self.ledger.actual
    }

    pub fn horizon(&self) -> usize {
        self.schedule.grid_buy.len()
    }
}

/// Builds and solves the dispatch LP for `inp`.
pub fn solve_dispatch(inp: &DispatchInput) -> Result<DispatchSolution, DispatchError> {
    let lp = build_lp(inp)?;
    solve_lp(inp, &lp)
}

/// Solves an already built LP.
pub fn solve_lp(inp: &DispatchInput, lp: &DispatchLp) -> Result<DispatchSolution, DispatchError> {
    let (x, objective) = lp.model.solve()?;
    let schedule = extract(inp, lp, &x);
    let ledger = ledger_for(inp, &schedule)?;
    let costs = cost_breakdown(inp, &schedule, &ledger);
    Ok(DispatchSolution {
        schedule,
        costs,
        ledger,
        objective,
        variables: lp.model.vars.len(),
        constraints: lp.model.rows.len(),
    })
}

fn extract(inp: &DispatchInput, lp: &DispatchLp, x: &[f64]) -> Schedule {
    let c = &lp.cols;
    let n = inp.horizon();
    let get = |v: &[usize]| v.iter().map(|&i| x[i]).collect::<Vec<f64>>();
    let l = inp.gas.kwh_per_nm3();
    let pieces = inp.gb_pieces();

    let syngas = get(&c.syngas);
    let chp_biomethane = get(&c.chp_bio);
    let chp_fuel: Vec<f64> = (0..n).map(|t| syngas[t] + l * chp_biomethane[t]).collect();
    let gt_gas = get(&c.gt_gas);
    let gb_segments: Vec<Vec<f64>> = c.gb_seg.iter().map(|r| get(r)).collect();
    let gb_heat: Vec<f64> = gb_segments.iter().map(|r| r.iter().sum()).collect();
    let gb_gas = gb_segments
        .iter()
        .map(|r| inp.gb.fuel_c + r.iter().zip(&pieces).map(|(q, &(_, s))| q * s).sum::<f64>())
        .collect();
    let eb_in = get(&c.eb_in);
    let hp_in = get(&c.hp_in);

    let zeros = vec![0.0; n];
    let (pbdr_scale, pbdr, ibdr_up, ibdr_down, replaced, heat_shift, heat_curtail, indoor_temp) =
        match &c.dr {
            Some(d) => {
                let u = x[d.pbdr_scale];
                (
                    u,
                    inp.pbdr.iter().map(|p| u * p).collect(),
                    d.ibdr_up.iter().map(|r| get(r)).collect(),
                    d.ibdr_down.iter().map(|r| get(r)).collect(),
                    get(&d.replace),
                    get(&d.shift),
                    get(&d.curtail),
                    get(&d.indoor),
                )
            }
            None => (
                0.0,
                zeros.clone(),
                inp.ibdr.iter().map(|o| vec![0.0; o.tiers.len()]).collect(),
                inp.ibdr.iter().map(|o| vec![0.0; o.tiers.len()]).collect(),
                zeros.clone(),
                zeros.clone(),
                zeros.clone(),
                vec![inp.comfort.t_set; n],
            ),
        };

    Schedule {
        wind: get(&c.wind),
        pv: get(&c.pv),
        chp_electric: chp_fuel.iter().map(|f| inp.chp.eta_e * f).collect(),
        chp_heat: chp_fuel.iter().map(|f| inp.chp.eta_h * f).collect(),
        syngas,
        chp_biomethane,
        biomethane_export: get(&c.bio_export),
        gt_electric: gt_gas.iter().map(|g| inp.gt.eta_e * l * g).collect(),
        gt_heat: gt_gas.iter().map(|g| inp.gt.eta_h * l * g).collect(),
        gt_gas,
        gb_segments,
        gb_heat,
        gb_gas,
        eb_heat: eb_in.iter().map(|e| inp.eb.eta * e).collect(),
        eb_in,
        hp_heat: hp_in.iter().map(|e| inp.hp.cop * e).collect(),
        hp_in,
        grid_buy: get(&c.buy),
        gas_buy: get(&c.gas_buy),
        es_charge: get(&c.es_ch),
        es_discharge: get(&c.es_dis),
        es_soc: get(&c.es_soc),
        ts_charge: get(&c.ts_ch),
        ts_discharge: get(&c.ts_dis),
        ts_soc: get(&c.ts_soc),
        heat_dump: get(&c.dump),
        pbdr_scale,
        pbdr,
        ibdr_up,
        ibdr_down,
        replaced,
        heat_shift,
        heat_curtail,
        indoor_temp,
    }
}

/// Carbon settlement of a schedule.
pub fn ledger_for(inp: &DispatchInput, s: &Schedule) -> Result<CarbonLedger, DispatchError> {
    settle(
        LedgerInputs {
            grid_buy: &s.grid_buy,
            gt_gas: &s.gt_gas,
            gb_gas: &s.gb_gas,
            gb_heat: &s.gb_heat,
            gas_co2_factor: inp.gas.co2_factor,
        },
        &inp.carbon,
        inp.flags.carbon_trading_enabled,
    )
    .map_err(|e| DispatchError::Solver(format!("carbon settlement: {e}")))
}

/// Recomputes the day's costs from the decisions.
pub fn cost_breakdown(inp: &DispatchInput, s: &Schedule, ledger: &CarbonLedger) -> CostBreakdown {
    let n = inp.horizon();
    let om = &inp.om;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let energy_purchase = (0..n).map(|t| inp.price[t] * s.grid_buy[t] * DT_HOURS).sum::<f64>()
        + inp.gas.price * sum(&s.gas_buy)
        - inp.gas.biomethane_price * sum(&s.biomethane_export);
    let device_om = DT_HOURS
        * (om.wind * sum(&s.wind)
            + om.pv * sum(&s.pv)
            + om.chp * sum(&s.chp_electric)
            + om.gt * sum(&s.gt_electric)
            + om.gb * sum(&s.gb_heat)
            + om.eb * sum(&s.eb_heat)
            + om.hp * sum(&s.hp_heat)
            + om.storage
                * (sum(&s.es_charge) + sum(&s.es_discharge) + sum(&s.ts_charge) + sum(&s.ts_discharge)))
        + om.b2g * sum(&inp.biomethane)
        + om.curtailment_penalty
            * DT_HOURS
            * (0..n)
                .map(|t| (inp.wind_cap[t] - s.wind[t]).max(0.0) + (inp.pv_cap[t] - s.pv[t]).max(0.0))
                .sum::<f64>();
    let mut dr_compensation = inp.thermal_curtail_price * DT_HOURS * sum(&s.heat_curtail);
    for t in 0..n {
        for (k, tier) in inp.ibdr[t].tiers.iter().enumerate() {
            dr_compensation += tier.price * DT_HOURS * (s.ibdr_up[t][k] + s.ibdr_down[t][k]);
        }
    }
    let om_total = device_om + dr_compensation;
    CostBreakdown {
        energy_purchase,
        om: om_total,
        dr_compensation,
        carbon: ledger.cost,
        total: energy_purchase + om_total + ledger.cost,
    }
}

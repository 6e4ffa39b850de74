//! CSV and JSON views of a solved schedule.

use serde::Serialize;

use super::solution::{CostBreakdown, DispatchSolution, Schedule};
use crate::carbon::CarbonLedger;

/// Named per-slot columns, in output order.
pub fn schedule_columns(s: &Schedule) -> Vec<(String, Vec<f64>)> {
    let mut cols: Vec<(String, Vec<f64>)> = vec![
        ("wind".into(), s.wind.clone()),
        ("pv".into(), s.pv.clone()),
        ("syngas".into(), s.syngas.clone()),
        ("chp_biomethane".into(), s.chp_biomethane.clone()),
        ("biomethane_export".into(), s.biomethane_export.clone()),
        ("chp_electric".into(), s.chp_electric.clone()),
        ("chp_heat".into(), s.chp_heat.clone()),
        ("gt_gas".into(), s.gt_gas.clone()),
        ("gt_electric".into(), s.gt_electric.clone()),
        ("gt_heat".into(), s.gt_heat.clone()),
        ("gb_heat".into(), s.gb_heat.clone()),
        ("gb_gas".into(), s.gb_gas.clone()),
        ("eb_in".into(), s.eb_in.clone()),
        ("eb_heat".into(), s.eb_heat.clone()),
        ("hp_in".into(), s.hp_in.clone()),
        ("hp_heat".into(), s.hp_heat.clone()),
        ("grid_buy".into(), s.grid_buy.clone()),
        ("gas_buy".into(), s.gas_buy.clone()),
        ("es_charge".into(), s.es_charge.clone()),
        ("es_discharge".into(), s.es_discharge.clone()),
        ("es_soc".into(), s.es_soc.clone()),
        ("ts_charge".into(), s.ts_charge.clone()),
        ("ts_discharge".into(), s.ts_discharge.clone()),
        ("ts_soc".into(), s.ts_soc.clone()),
        ("heat_dump".into(), s.heat_dump.clone()),
        ("pbdr".into(), s.pbdr.clone()),
        ("ibdr_up".into(), s.ibdr_up_total()),
        ("ibdr_down".into(), s.ibdr_down_total()),
        ("replaced".into(), s.replaced.clone()),
        ("heat_shift".into(), s.heat_shift.clone()),
        ("heat_curtail".into(), s.heat_curtail.clone()),
        ("indoor_temp".into(), s.indoor_temp.clone()),
    ];
    cols.retain(|(_, v)| !v.is_empty());
    cols
}

/// One row per slot, one column per decision, shortest round-trip decimals.
pub fn schedule_csv(s: &Schedule) -> String {
    let cols = schedule_columns(s);
    let n = cols.first().map_or(0, |c| c.1.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["slot".to_string()];
    header.extend(cols.iter().map(|c| c.0.clone()));
    w.write_record(&header).expect("in-memory write");
    for t in 0..n {
        let mut rec = vec![t.to_string()];
        rec.extend(cols.iter().map(|c| c.1[t].to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

/// Cost and emission summary of one run.
#[derive(Debug, Clone, Serialize)]
pub struct DispatchSummary<'a> {
    pub label: &'a str,
    pub costs: &'a CostBreakdown,
    pub ledger: &'a CarbonLedger,
    pub objective: f64,
    pub variables: usize,
    pub constraints: usize,
}

pub fn summary<'a>(label: &'a str, sol: &'a DispatchSolution) -> DispatchSummary<'a> {
    DispatchSummary {
        label,
        costs: &sol.costs,
        ledger: &sol.ledger,
        objective: sol.objective,
        variables: sol.variables,
        constraints: sol.constraints,
    }
}

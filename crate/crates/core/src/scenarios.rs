//! The four comparison cases at the configured tariff.

use rayon::prelude::*;
use serde::Serialize;

use crate::dispatch::{solve_dispatch, verify_solution, DispatchInput, DispatchSolution, VerifyReport};
use crate::error::DispatchError;
use crate::model::{Scenario, SystemConfig};

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub input: DispatchInput,
    pub solution: DispatchSolution,
    pub report: VerifyReport,
}

/// One row of the comparison table, CNY and kg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scenario: Scenario,
    pub total_cost: f64,
    pub energy_purchase: f64,
    pub om: f64,
    pub carbon_cost: f64,
    pub emissions: f64,
}

impl ComparisonRow {
    pub fn of(run: &ScenarioRun) -> Self {
        let c = &run.solution.costs;
        Self {
            scenario: run.scenario,
            total_cost: c.total,
            energy_purchase: c.energy_purchase,
            om: c.om,
            carbon_cost: c.carbon,
            emissions: run.solution.emissions(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{scenario}: {source}")]
pub struct ScenarioError {
    pub scenario: Scenario,
    #[source]
    pub source: DispatchError,
}

pub fn run_scenario(cfg: &SystemConfig, scenario: Scenario) -> Result<ScenarioRun, ScenarioError> {
    let tag = |source| ScenarioError { scenario, source };
    let input = DispatchInput::from_config(cfg, scenario.flags(), &cfg.tariff.price_profile()).map_err(tag)?;
    let solution = solve_dispatch(&input).map_err(tag)?;
    let report = verify_solution(&solution, &input);
    Ok(ScenarioRun {
        scenario,
        input,
        solution,
        report,
    })
}

/// Solves the requested scenarios in parallel, returned in input order.
pub fn run_scenarios(cfg: &SystemConfig, which: &[Scenario]) -> Result<Vec<ScenarioRun>, ScenarioError> {
    which.par_iter().map(|&s| run_scenario(cfg, s)).collect()
}

pub fn comparison(runs: &[ScenarioRun]) -> Vec<ComparisonRow> {
    runs.iter().map(ComparisonRow::of).collect()
}

/// Formats `v` with six significant digits, no exponent for ordinary
/// magnitudes.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=14).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

/// Fixed-width text table of the comparison rows.
pub fn comparison_table(rows: &[ComparisonRow]) -> String {
    let head = ["Scenario", "Total cost", "Energy purchase", "O&M", "Carbon cost", "Emissions (kg)"];
    let mut lines = vec![head.map(|h| h.to_string()).to_vec()];
    for r in rows {
        lines.push(vec![
            r.scenario.to_string(),
            sig6(r.total_cost),
            sig6(r.energy_purchase),
            sig6(r.om),
            sig6(r.carbon_cost),
            sig6(r.emissions),
        ]);
    }
    let widths: Vec<usize> = (0..head.len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for l in &lines {
        let cells: Vec<String> = l
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// `scenario,total_cost,...` with full precision.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "total_cost", "energy_purchase", "om", "carbon_cost", "emissions_kg"])
        .expect("in-memory write");
    for r in rows {
        w.write_record([
            r.scenario.to_string(),
            r.total_cost.to_string(),
            r.energy_purchase.to_string(),
            r.om.to_string(),
            r.carbon_cost.to_string(),
            r.emissions.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
}

//! One-at-a-time parameter sweeps of day emissions under the combined
//! scenario at the configured tariff.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::{solve_dispatch, DispatchInput};
use crate::error::SensitivityError;
use crate::model::{Scenario, SystemConfig};

/// Number of swept parameters.
pub const PARAM_COUNT: usize = 27;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivityConfig {
    pub samples: usize,
    /// A parameter is High when its spread exceeds this share of the largest.
    pub high_fraction: f64,
    /// Physical range per parameter id.
    pub ranges: BTreeMap<String, [f64; 2]>,
}

impl SensitivityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.samples < 3 {
            return Err(format!("sensitivity.samples must be at least 3, got {}", self.samples));
        }
        if !(self.high_fraction > 0.0 && self.high_fraction < 1.0) {
            return Err("sensitivity.high_fraction must lie in (0, 1)".into());
        }
        for (id, r) in &self.ranges {
            if param_by_id(id).is_none() {
                return Err(format!("sensitivity.ranges: unknown parameter `{id}`"));
            }
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(format!("sensitivity.ranges.{id}: [{}, {}] is empty", r[0], r[1]));
            }
        }
        Ok(())
    }
}

/// A swept parameter and the config field it drives.
#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub id: &'static str,
    pub symbol: &'static str,
    pub name: &'static str,
    /// Dotted config path.
    pub field: &'static str,
    apply: fn(&mut SystemConfig, f64),
    read: fn(&SystemConfig) -> f64,
}

impl ParamDef {
    pub fn apply(&self, cfg: &mut SystemConfig, v: f64) {
        (self.apply)(cfg, v)
    }

    /// Value in `cfg`, in the same units as the sweep range.
    pub fn read(&self, cfg: &SystemConfig) -> f64 {
        (self.read)(cfg)
    }
}

macro_rules! param {
    ($id:literal, $sym:literal, $name:literal, $($path:ident).+) => {
        ParamDef {
            id: $id,
            symbol: $sym,
            name: $name,
            field: stringify!($($path).+),
            apply: |c, v| c.$($path).+ = v,
            read: |c| c.$($path).+,
        }
    };
}

pub static PARAMS: [ParamDef; PARAM_COUNT] = [
    param!("F1", "eta_gt", "gas turbine electrical efficiency", gt.eta_e),
    param!("F2", "eta_gb", "gas boiler thermal efficiency", gb.eta_h),
    param!("F3", "eta_pf", "pyrolysis gasifier efficiency", pyrolysis.eta_pf),
    param!("F4", "eta_pg", "pyrolysis gas production efficiency", pyrolysis.eta_pg),
    param!("F5", "f_grid", "grid emission factor", carbon.f_grid),
    param!("F6", "loss", "thermal network loss rate", network.loss_rate),
    param!("F7", "eta_h", "gas turbine heat recovery efficiency", gt.eta_h),
    param!("F8", "eta_ch", "electric storage charge efficiency", electric_storage.eta_ch),
    param!("F9", "eta_dis", "electric storage discharge efficiency", electric_storage.eta_dis),
    param!("F10", "eta_eb", "electric boiler efficiency", eb.eta),
    ParamDef {
        id: "F11",
        symbol: "gamma_t",
        name: "PV temperature coefficient magnitude",
        field: "pv.temp_coeff",
        apply: |c, v| c.pv.temp_coeff = -v,
        read: |c| -c.pv.temp_coeff,
    },
    param!("F12", "eta_b2g", "biogas upgrading efficiency", biogas.eta_b2g),
    param!("F13", "lambda_e", "electricity carbon quota", carbon.lambda_e),
    param!("F14", "lambda_g", "gas heat carbon quota", carbon.lambda_g),
    param!("F15", "c_coal", "retail price scale", grid.tariff_scale),
    param!("F16", "c_gas", "gas price", gas.price),
    param!("F17", "beta_st", "wastewater sedimentation coefficient", biogas.beta_st),
    param!("F18", "eta_ab", "fermentable organic fraction", biogas.eta_ab),
    param!("F19", "beta_sludge", "sludge conversion coefficient", biogas.beta_sludge),
    param!("F20", "beta_bg", "biogas production coefficient", biogas.beta_bg),
    param!("F21", "c_curt", "renewable curtailment penalty", om.curtailment_penalty),
    param!("F22", "alpha1", "digester inner wall heat transfer", biogas.digester.alpha1),
    param!("F23", "alpha2", "digester outer wall heat transfer", biogas.digester.alpha2),
    param!("F24", "theta1", "digester wall conductivity", biogas.digester.theta1),
    param!("F25", "theta2", "digester insulation conductivity", biogas.digester.theta2),
    ParamDef {
        id: "F26",
        symbol: "eta_bd",
        name: "digester heat exchange coefficient",
        field: "biogas.digester.eta_bd_override",
        apply: |c, v| c.biogas.digester.eta_bd_override = Some(v),
        read: |c| crate::biomass::eta_bd(&c.biogas.digester),
    },
    param!("F27", "eta_eq", "digester heating equipment efficiency", biogas.digester.eta_eq),
];

pub fn param_by_id(id: &str) -> Option<&'static ParamDef> {
    PARAMS.iter().find(|p| p.id == id)
}

/// Resolves a `--params` style list: `all` or comma-separated ids.
pub fn select_params(spec: &str) -> Result<Vec<&'static ParamDef>, SensitivityError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(PARAMS.iter().collect());
    }
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|id| param_by_id(id).ok_or_else(|| SensitivityError::UnknownParameter(id.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    /// Position in the range, 0..1.
    pub normalized: f64,
    pub value: f64,
    /// Day emissions, kg; `None` when the dispatch had no solution.
    pub emissions: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Total day emissions for the combined scenario under `cfg`.
pub fn scenario_emissions(cfg: &SystemConfig) -> Result<f64, String> {
    let flags = Scenario::Combined.flags();
    let inp = DispatchInput::from_config(cfg, flags, &cfg.tariff.price_profile()).map_err(|e| e.to_string())?;
    solve_dispatch(&inp).map(|s| s.emissions()).map_err(|e| e.to_string())
}

/// Evenly spaced samples of one parameter over `[lo, hi]`.
pub fn sweep(
    param: &ParamDef,
    range: [f64; 2],
    samples: usize,
    base: &SystemConfig,
) -> Result<Vec<Sample>, SensitivityError> {
    if samples < 3 {
        return Err(SensitivityError::TooFewSamples(samples));
    }
    let [lo, hi] = range;
    if !(lo < hi) {
        return Err(SensitivityError::EmptyRange {
            id: param.id.to_string(),
            lo,
            hi,
        });
    }
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / (samples - 1) as f64;
            let v = lo + x * (hi - lo);
            let mut cfg = base.clone();
            param.apply(&mut cfg, v);
            let result = cfg
                .validate()
                .map_err(|e| e.to_string())
                .and_then(|_| scenario_emissions(&cfg));
            Sample {
                normalized: x,
                value: v,
                emissions: result.as_ref().ok().copied(),
                error: result.err(),
            }
        })
        .collect())
}

/// Product-moment correlation; `None` when either side has no variance or
/// there are fewer than three pairs.
pub fn pearson(xy: &[(f64, f64)]) -> Option<f64> {
    if xy.len() < 3 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in xy {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    // relative zero test so rounding noise in flat series reads as flat
    let scale_y = my.abs().max(1.0);
    if sxx <= 0.0 || syy.sqrt() <= 1e-9 * scale_y * n.sqrt() {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensitivityClass {
    High,
    Low,
}

impl std::fmt::Display for SensitivityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SensitivityClass::High => "High",
            SensitivityClass::Low => "Low",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub id: String,
    pub symbol: String,
    pub name: String,
    pub field: String,
    pub range: [f64; 2],
    pub samples: Vec<Sample>,
    /// `None` marks a degenerate sweep (flat emissions).
    pub pearson: Option<f64>,
    /// Max minus min emissions over the solved samples, kg.
    pub spread: f64,
    pub missing: usize,
    pub class: SensitivityClass,
    /// 1 is the most influential.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub base_emissions: f64,
    pub high_fraction: f64,
    /// Ordered by rank.
    pub params: Vec<ParamReport>,
}

impl SensitivityReport {
    pub fn get(&self, id: &str) -> Option<&ParamReport> {
        self.params.iter().find(|p| p.id == id)
    }

    /// `param,normalized_value,emissions_kg` rows, missing samples left blank.
    pub fn samples_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["param", "normalized_value", "emissions_kg"]).expect("in-memory write");
        for p in &self.params {
            for s in &p.samples {
                let e = s.emissions.map(|e| e.to_string()).unwrap_or_default();
                w.write_record([p.id.clone(), s.normalized.to_string(), e]).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

/// Orders sweeps by spread (ties broken by |r|, then id) and splits them
/// into High and Low.
pub fn classify_and_rank(
    sweeps: Vec<(&ParamDef, [f64; 2], Vec<Sample>)>,
    high_fraction: f64,
    base_emissions: f64,
) -> SensitivityReport {
    let mut params: Vec<ParamReport> = sweeps
        .into_iter()
        .map(|(def, range, samples)| {
            let pts: Vec<(f64, f64)> = samples
                .iter()
                .filter_map(|s| s.emissions.map(|e| (s.normalized, e)))
                .collect();
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
            ParamReport {
                id: def.id.to_string(),
                symbol: def.symbol.to_string(),
                name: def.name.to_string(),
                field: def.field.to_string(),
                range,
                missing: samples.len() - pts.len(),
                pearson: pearson(&pts),
                spread: if pts.is_empty() { 0.0 } else { hi - lo },
                samples,
                class: SensitivityClass::Low,
                rank: 0,
            }
        })
        .collect();
    params.sort_by(|a, b| {
        b.spread
            .total_cmp(&a.spread)
            .then(b.pearson.map_or(0.0, f64::abs).total_cmp(&a.pearson.map_or(0.0, f64::abs)))
            .then_with(|| id_number(&a.id).cmp(&id_number(&b.id)))
    });
    let max = params.first().map_or(0.0, |p| p.spread);
    for (i, p) in params.iter_mut().enumerate() {
        p.rank = i + 1;
        if max > 0.0 && p.spread > high_fraction * max {
            p.class = SensitivityClass::High;
        }
    }
    SensitivityReport {
        base_emissions,
        high_fraction,
        params,
    }
}

fn id_number(id: &str) -> usize {
    id.trim_start_matches('F').parse().unwrap_or(usize::MAX)
}

/// Sweeps every selected parameter over its configured range.
pub fn run(
    base: &SystemConfig,
    params: &[&'static ParamDef],
    samples: usize,
) -> Result<SensitivityReport, SensitivityError> {
    if samples < 3 {
        return Err(SensitivityError::TooFewSamples(samples));
    }
    let flags = Scenario::Combined.flags();
    let inp = DispatchInput::from_config(base, flags, &base.tariff.price_profile())
        .map_err(SensitivityError::BaseInfeasible)?;
    let base_emissions = solve_dispatch(&inp)
        .map_err(SensitivityError::BaseInfeasible)?
        .emissions();
    let mut sweeps = Vec::with_capacity(params.len());
    for def in params {
        let range = match base.sensitivity.ranges.get(def.id) {
            Some(r) => *r,
            None => default_range(def, base),
        };
        sweeps.push((*def, range, sweep(def, range, samples, base)?));
    }
    Ok(classify_and_rank(sweeps, base.sensitivity.high_fraction, base_emissions))
}

/// +-20% around the base value when no range is configured.
pub fn default_range(def: &ParamDef, base: &SystemConfig) -> [f64; 2] {
    let v = def.read(base);
    if v == 0.0 {
        [0.0, 1.0]
    } else {
        let (a, b) = (0.8 * v, 1.2 * v);
        [a.min(b), a.max(b)]
    }
}

//! Toy dispatch instances (gas turbine, gas boiler, grid) and a brute-force
//! oracle that enumerates a 20-point grid per device and slot.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use ries_core::carbon::SurplusCredit;
use ries_core::dispatch::{DispatchInput, DispatchSolution};
use ries_core::model::{Scenario, SystemConfig};

pub const GRID: usize = 20;
const STEPS: f64 = (GRID - 1) as f64;

pub struct Toy {
    pub input: DispatchInput,
    /// Gas turbine fuel per grid step, Nm3.
    pub gas_step: f64,
    /// Gas boiler heat per grid step, kW.
    pub heat_step: f64,
    pub carbon_in_objective: bool,
}

/// Builds a random instance whose data are integer multiples of the grid
/// steps, so every vertex of the LP lies on the oracle grid.
pub fn random_toy(rng: &mut ChaCha8Rng) -> Toy {
    let cfg = SystemConfig::bundled();
    let n = rng.gen_range(1..=3);
    let scenario = if rng.gen_bool(0.5) { Scenario::Baseline } else { Scenario::CarbonTradingOnly };
    let mut inp = DispatchInput::blank(n, &cfg, scenario.flags());
    inp.tie_break = 0.0;
    inp.loss_rate = 0.0;
    inp.eb.capacity = 0.0;
    inp.hp.capacity = 0.0;
    for st in [&mut inp.electric_storage, &mut inp.thermal_storage] {
        st.capacity = 0.0;
        st.q0 = 0.0;
        st.p_ch_max = 0.0;
        st.p_dis_max = 0.0;
    }

    inp.gt.eta_e = rng.gen_range(0.25..0.35);
    inp.gt.eta_h = rng.gen_range(0.35..0.5);
    inp.gt.capacity = rng.gen_range(200.0..2000.0);
    inp.gb.eta_h = rng.gen_range(0.8..0.95);
    inp.gb.fuel_a = 0.0;
    inp.gb.fuel_b = None;
    inp.gb.fuel_c = 0.0;
    inp.gb.min_output = 0.0;
    inp.gas.price = rng.gen_range(2.0..4.0);
    inp.om.gt = rng.gen_range(0.0..0.05);
    inp.om.gb = rng.gen_range(0.0..0.05);

    let l = inp.gas.kwh_per_nm3();
    let gas_step = inp.gt.capacity / (inp.gt.eta_e * l) / STEPS;
    let e_step = inp.gt.eta_e * l * gas_step;
    let heat_step = inp.gt.eta_h * l * gas_step;
    inp.gb.capacity = STEPS * heat_step;
    inp.gt.ramp_up = rng.gen_range(3..=19) as f64 * e_step;
    inp.gt.ramp_down = rng.gen_range(3..=19) as f64 * e_step;
    inp.gb.ramp_up = rng.gen_range(3..=19) as f64 * heat_step;
    inp.gb.ramp_down = rng.gen_range(3..=19) as f64 * heat_step;
    inp.import_cap = rng.gen_range(0..=19) as f64 * e_step;

    for t in 0..n {
        inp.electric_load[t] = rng.gen_range(0..=19) as f64 * e_step;
        inp.thermal_load[t] = rng.gen_range(0..=30) as f64 * heat_step;
        inp.price[t] = rng.gen_range(0.2..1.0);
    }

    let carbon_in_objective = scenario == Scenario::CarbonTradingOnly || rng.gen_bool(0.5);
    inp.carbon.baseline_carbon_in_objective = carbon_in_objective;
    // one tier within reach keeps the objective linear
    inp.carbon.l = 1e9;
    inp.carbon.surplus_credit = SurplusCredit::FlatBeta;

    Toy {
        input: inp,
        gas_step,
        heat_step,
        carbon_in_objective,
    }
}

/// One slot's decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub gt_gas: f64,
    pub gb_heat: f64,
}

pub struct OracleResult {
    pub cost: f64,
    pub plan: Vec<Point>,
}

fn gb_gas(toy: &Toy, q: f64) -> f64 {
    q / (toy.input.gb.eta_h * toy.input.gas.kwh_per_nm3())
}

/// Slot cost of a decision, or `None` when it breaks a per-slot constraint.
pub fn slot_cost(toy: &Toy, t: usize, p: Point, tol: f64) -> Option<f64> {
    let inp = &toy.input;
    let l = inp.gas.kwh_per_nm3();
    let gt_e = inp.gt.eta_e * l * p.gt_gas;
    let gt_h = inp.gt.eta_h * l * p.gt_gas;
    let buy = inp.electric_load[t] - gt_e;
    if p.gt_gas < -tol || gt_e > inp.gt.capacity + tol {
        return None;
    }
    if p.gb_heat < -tol || p.gb_heat > inp.gb.capacity + tol {
        return None;
    }
    if buy < -tol || buy > inp.import_cap + tol {
        return None;
    }
    if gt_h + p.gb_heat < inp.thermal_load[t] - tol {
        return None;
    }
    let fuel = p.gt_gas + gb_gas(toy, p.gb_heat);
    let mut c = inp.price[t] * buy + inp.gas.price * fuel + inp.om.gt * gt_e + inp.om.gb * p.gb_heat;
    if toy.carbon_in_objective {
        let m = &inp.carbon;
        let actual = m.f_grid * buy + inp.gas.co2_factor * fuel;
        let quota = if inp.flags.carbon_trading_enabled {
            m.lambda_e * buy + m.lambda_g * p.gb_heat
        } else {
            0.0
        };
        c += m.beta * (actual - quota);
    }
    Some(c)
}

pub fn ramp_ok(toy: &Toy, prev: Point, next: Point, tol: f64) -> bool {
    let inp = &toy.input;
    let l = inp.gas.kwh_per_nm3();
    let de = inp.gt.eta_e * l * (next.gt_gas - prev.gt_gas);
    let dq = next.gb_heat - prev.gb_heat;
    de <= inp.gt.ramp_up + tol
        && -de <= inp.gt.ramp_down + tol
        && dq <= inp.gb.ramp_up + tol
        && -dq <= inp.gb.ramp_down + tol
}

/// Exhaustive search over the grid with dynamic programming across slots.
pub fn oracle(toy: &Toy) -> Option<OracleResult> {
    let n = toy.input.horizon();
    let points: Vec<Point> = (0..GRID)
        .flat_map(|i| {
            (0..GRID).map(move |j| Point {
                gt_gas: i as f64 * toy.gas_step,
                gb_heat: j as f64 * toy.heat_step,
            })
        })
        .collect();
    let tol = 1e-9;
    let mut best: Vec<Option<(f64, Vec<Point>)>> = points
        .iter()
        .map(|&p| slot_cost(toy, 0, p, tol).map(|c| (c, vec![p])))
        .collect();
    for t in 1..n {
        best = points
            .iter()
            .map(|&p| {
                let here = slot_cost(toy, t, p, tol)?;
                best.iter()
                    .zip(&points)
                    .filter_map(|(b, &q)| {
                        let (c, plan) = b.as_ref()?;
                        ramp_ok(toy, q, p, tol).then(|| (c + here, plan))
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(c, plan)| {
                        let mut plan = plan.clone();
                        plan.push(p);
                        (c, plan)
                    })
            })
            .collect();
    }
    best.into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(cost, plan)| OracleResult { cost, plan })
}

/// Checks an LP schedule against the oracle's own constraint model and
/// returns its cost under the oracle's objective.
pub fn check_feasible(toy: &Toy, sol: &DispatchSolution) -> Result<f64, String> {
    let tol = 1e-6;
    let s = &sol.schedule;
    let n = toy.input.horizon();
    let mut cost = 0.0;
    let l = toy.input.gas.kwh_per_nm3();
    for t in 0..n {
        let p = Point {
            gt_gas: s.gt_gas[t],
            gb_heat: s.gb_heat[t],
        };
        let gt_e = toy.input.gt.eta_e * l * p.gt_gas;
        let balance = gt_e + s.grid_buy[t] - toy.input.electric_load[t];
        if balance.abs() > tol {
            return Err(format!("slot {t}: electric balance off by {balance}"));
        }
        cost += slot_cost(toy, t, p, tol).ok_or_else(|| format!("slot {t}: bounds violated by {p:?}"))?;
        if t > 0 {
            let q = Point {
                gt_gas: s.gt_gas[t - 1],
                gb_heat: s.gb_heat[t - 1],
            };
            if !ramp_ok(toy, q, p, tol) {
                return Err(format!("slot {t}: ramp violated"));
            }
        }
    }
    Ok(cost)
}

/// The bundled config with every swept parameter drawn from its range,
/// loads scaled by 0.8..1.0. Draws failing validation are redrawn.
pub fn random_config(rng: &mut ChaCha8Rng) -> SystemConfig {
    use ries_core::sensitivity::{default_range, PARAMS};
    let base = SystemConfig::bundled();
    loop {
        let mut cfg = base.clone();
        for p in &PARAMS {
            let [lo, hi] = base.sensitivity.ranges.get(p.id).copied().unwrap_or_else(|| default_range(p, &base));
            p.apply(&mut cfg, rng.gen_range(lo..=hi));
        }
        cfg.profiles.scale_loads(rng.gen_range(0.8..=1.0));
        if cfg.validate().is_ok() {
            return cfg;
        }
    }
}

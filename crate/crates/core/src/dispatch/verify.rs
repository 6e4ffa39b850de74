//! Independent recomputation of every constraint family from raw decisions.

use serde::Serialize;

use super::input::DispatchInput;
use super::solution::{cost_breakdown, ledger_for, DispatchSolution};
use crate::demand_response::{is_day_slot, pmv, thermal_dr_feasible};
use crate::model::DT_HOURS;

/// Absolute tolerance on balances, bounds and recursions (kW, kWh, Nm3).
pub const BALANCE_TOL: f64 = 1e-6;
/// Relative tolerance on cost and carbon identities.
pub const IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCheck {
    pub family: &'static str,
    pub passed: bool,
    /// Largest violation found (0 when none).
    pub worst: f64,
    /// Location of the worst violation.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<FamilyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&FamilyCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn family(&self, name: &str) -> Option<&FamilyCheck> {
        self.checks.iter().find(|c| c.family == name)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            write!(f, "{tag} {:<20} worst {:.3e}", c.family, c.worst)?;
            if !c.passed {
                write!(f, "  ({})", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Family {
    name: &'static str,
    tol: f64,
    worst: f64,
    detail: String,
}

impl Family {
    fn new(name: &'static str, tol: f64) -> Self {
        Family {
            name,
            tol,
            worst: 0.0,
            detail: String::new(),
        }
    }

    /// Records a violation of size `v` (values <= 0 are satisfied).
    fn see(&mut self, v: f64, what: impl FnOnce() -> String) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > self.worst {
            self.worst = v;
            self.detail = what();
        }
    }

    fn upper(&mut self, value: f64, cap: f64, what: &str, t: usize) {
        self.see(value - cap, || format!("{what} = {value} above {cap} in slot {t}"));
    }

    fn lower(&mut self, value: f64, floor: f64, what: &str, t: usize) {
        self.see(floor - value, || format!("{what} = {value} below {floor} in slot {t}"));
    }

    fn within(&mut self, value: f64, lo: f64, hi: f64, what: &str, t: usize) {
        self.lower(value, lo, what, t);
        self.upper(value, hi, what, t);
    }

    fn done(self) -> FamilyCheck {
        FamilyCheck {
            family: self.name,
            passed: self.worst <= self.tol,
            worst: self.worst,
            detail: self.detail,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Checks `sol` against the problem it claims to solve.
pub fn verify_solution(sol: &DispatchSolution, inp: &DispatchInput) -> VerifyReport {
    let s = &sol.schedule;
    let n = inp.horizon();
    let mut checks = Vec::new();
    let lens = [
        s.wind.len(),
        s.pv.len(),
        s.syngas.len(),
        s.gt_gas.len(),
        s.gb_segments.len(),
        s.eb_in.len(),
        s.hp_in.len(),
        s.grid_buy.len(),
        s.gas_buy.len(),
        s.es_soc.len(),
        s.ts_soc.len(),
        s.heat_dump.len(),
        s.heat_shift.len(),
        s.heat_curtail.len(),
        s.indoor_temp.len(),
        s.replaced.len(),
        s.ibdr_up.len(),
        s.ibdr_down.len(),
    ];
    let mut shape = Family::new("shape", 0.0);
    if let Some(bad) = lens.iter().find(|&&x| x != n) {
        shape.see(1.0, || format!("a decision vector has {bad} slots, expected {n}"));
        checks.push(shape.done());
        return VerifyReport { checks };
    }
    checks.push(shape.done());

    let l = inp.gas.kwh_per_nm3();
    let pieces = inp.gb_pieces();
    let chp_fuel: Vec<f64> = (0..n).map(|t| s.syngas[t] + l * s.chp_biomethane[t]).collect();
    let chp_e: Vec<f64> = chp_fuel.iter().map(|f| inp.chp.eta_e * f).collect();
    let chp_h: Vec<f64> = chp_fuel.iter().map(|f| inp.chp.eta_h * f).collect();
    let gt_e: Vec<f64> = s.gt_gas.iter().map(|g| inp.gt.eta_e * l * g).collect();
    let gt_h: Vec<f64> = s.gt_gas.iter().map(|g| inp.gt.eta_h * l * g).collect();
    let gb_h: Vec<f64> = s.gb_segments.iter().map(|r| r.iter().sum()).collect();
    let gb_gas: Vec<f64> = s
        .gb_segments
        .iter()
        .map(|r| inp.gb.fuel_c + r.iter().zip(&pieces).map(|(q, &(_, k))| q * k).sum::<f64>())
        .collect();
    let up = s.ibdr_up_total();
    let down = s.ibdr_down_total();
    let dr = inp.flags.demand_response_enabled;

    // derived columns agree with the raw decisions
    let mut fam = Family::new("derived_quantities", BALANCE_TOL);
    for t in 0..n {
        for (name, stored, want) in [
            ("chp_electric", s.chp_electric[t], chp_e[t]),
            ("chp_heat", s.chp_heat[t], chp_h[t]),
            ("gt_electric", s.gt_electric[t], gt_e[t]),
            ("gt_heat", s.gt_heat[t], gt_h[t]),
            ("gb_heat", s.gb_heat[t], gb_h[t]),
            ("gb_gas", s.gb_gas[t], gb_gas[t]),
            ("eb_heat", s.eb_heat[t], inp.eb.eta * s.eb_in[t]),
            ("hp_heat", s.hp_heat[t], inp.hp.cop * s.hp_in[t]),
            ("pbdr", s.pbdr[t], s.pbdr_scale * inp.pbdr[t]),
        ] {
            fam.see((stored - want).abs(), || format!("{name} inconsistent in slot {t}"));
        }
    }
    checks.push(fam.done());

    let mut fam = Family::new("bounds", BALANCE_TOL);
    for t in 0..n {
        let nonneg = [
            ("wind", s.wind[t]),
            ("pv", s.pv[t]),
            ("syngas", s.syngas[t]),
            ("chp_biomethane", s.chp_biomethane[t]),
            ("biomethane_export", s.biomethane_export[t]),
            ("gt_gas", s.gt_gas[t]),
            ("eb_in", s.eb_in[t]),
            ("hp_in", s.hp_in[t]),
            ("grid_buy", s.grid_buy[t]),
            ("gas_buy", s.gas_buy[t]),
            ("es_charge", s.es_charge[t]),
            ("es_discharge", s.es_discharge[t]),
            ("ts_charge", s.ts_charge[t]),
            ("ts_discharge", s.ts_discharge[t]),
            ("heat_dump", s.heat_dump[t]),
            ("replaced", s.replaced[t]),
            ("heat_curtail", s.heat_curtail[t]),
        ];
        for (name, v) in nonneg {
            fam.lower(v, 0.0, name, t);
        }
        for (k, &q) in s.gb_segments[t].iter().enumerate() {
            fam.within(q, 0.0, pieces.get(k).map_or(0.0, |p| p.0), "gb piece", t);
        }
        fam.upper(s.syngas[t], inp.syngas[t], "syngas", t);
        fam.upper(s.chp_biomethane[t] + s.biomethane_export[t], inp.biomethane[t], "biomethane use", t);
        fam.upper(gt_e[t], inp.gt.capacity, "gt electric", t);
        fam.within(gb_h[t], inp.gb.min_output, inp.gb.capacity, "gb heat", t);
        fam.upper(inp.eb.eta * s.eb_in[t], inp.eb.capacity, "eb heat", t);
        fam.upper(inp.hp.cop * s.hp_in[t], inp.hp.capacity, "hp heat", t);
        fam.upper(s.grid_buy[t], inp.import_cap, "grid_buy", t);
        fam.upper(s.es_charge[t], inp.electric_storage.p_ch_max, "es_charge", t);
        fam.upper(s.es_discharge[t], inp.electric_storage.p_dis_max, "es_discharge", t);
        fam.upper(s.ts_charge[t], inp.thermal_storage.p_ch_max, "ts_charge", t);
        fam.upper(s.ts_discharge[t], inp.thermal_storage.p_dis_max, "ts_discharge", t);
        fam.within(s.es_soc[t], 0.0, inp.electric_storage.capacity, "es_soc", t);
        fam.within(s.ts_soc[t], 0.0, inp.thermal_storage.capacity, "ts_soc", t);
    }
    checks.push(fam.done());

    let mut fam = Family::new("renewable_cap", BALANCE_TOL);
    for t in 0..n {
        fam.within(s.wind[t], 0.0, inp.wind_cap[t], "wind", t);
        fam.within(s.pv[t], 0.0, inp.pv_cap[t], "pv", t);
    }
    checks.push(fam.done());

    let mut fam = Family::new("chp_limits", BALANCE_TOL);
    for t in 0..n {
        fam.upper(chp_e[t], inp.chp.capacity, "chp electric", t);
        fam.upper(chp_fuel[t], inp.chp.max_fuel(), "chp fuel", t);
    }
    checks.push(fam.done());

    let mut fam = Family::new("electric_balance", BALANCE_TOL);
    for t in 0..n {
        let supply = s.wind[t] + s.pv[t] + chp_e[t] + gt_e[t] + s.grid_buy[t] + s.es_discharge[t];
        let mut demand = inp.electric_load[t] + inp.aux_electric[t] + s.es_charge[t] + s.eb_in[t] + s.hp_in[t];
        if dr {
            demand += inp.ibdr[t].contract / DT_HOURS + s.pbdr[t] + up[t] - down[t] - s.replaced[t];
        }
        let r = (supply - demand).abs();
        fam.see(r, || format!("residual {:.3e} kW in slot {t}", supply - demand));
    }
    checks.push(fam.done());

    let mut fam = Family::new("thermal_balance", BALANCE_TOL);
    for t in 0..n {
        let gen = chp_h[t] + gt_h[t] + gb_h[t] + inp.eb.eta * s.eb_in[t] + inp.hp.cop * s.hp_in[t]
            + s.ts_discharge[t]
            - s.ts_charge[t]
            - s.heat_dump[t];
        let supply = (1.0 - inp.loss_rate) * gen;
        let mut demand = inp.thermal_load[t] + inp.digester_heat[t];
        if dr {
            demand += s.heat_shift[t] - s.heat_curtail[t] + inp.replace_heat_ratio * s.replaced[t];
        }
        let r = (supply - demand).abs();
        fam.see(r, || format!("residual {:.3e} kW in slot {t}", supply - demand));
    }
    checks.push(fam.done());

    let mut fam = Family::new("gas_balance", BALANCE_TOL);
    for t in 0..n {
        let r = s.gas_buy[t] - s.gt_gas[t] - gb_gas[t];
        fam.see(r.abs(), || format!("residual {r:.3e} Nm3 in slot {t}"));
    }
    checks.push(fam.done());

    let mut fam = Family::new("ramps", BALANCE_TOL);
    for t in 1..n {
        for (name, v, up_lim, down_lim) in [
            ("chp", &chp_e, inp.chp.ramp_up, inp.chp.ramp_down),
            ("gt", &gt_e, inp.gt.ramp_up, inp.gt.ramp_down),
            ("gb", &gb_h, inp.gb.ramp_up, inp.gb.ramp_down),
        ] {
            let d = v[t] - v[t - 1];
            fam.see(d - up_lim * DT_HOURS, || format!("{name} ramps up {d} in slot {t}"));
            fam.see(-d - down_lim * DT_HOURS, || format!("{name} ramps down {} in slot {t}", -d));
        }
    }
    checks.push(fam.done());

    let mut rec = Family::new("storage_recursion", BALANCE_TOL);
    let mut cyc = Family::new("storage_cyclic", BALANCE_TOL);
    for (name, st, ch, dis, soc) in [
        ("electric", &inp.electric_storage, &s.es_charge, &s.es_discharge, &s.es_soc),
        ("thermal", &inp.thermal_storage, &s.ts_charge, &s.ts_discharge, &s.ts_soc),
    ] {
        let mut q = st.q0;
        for t in 0..n {
            let want = q + (st.eta_ch * ch[t] - dis[t] / st.eta_dis) * DT_HOURS;
            let r = soc[t] - want;
            rec.see(r.abs(), || format!("{name} storage off by {r:.3e} kWh in slot {t}"));
            q = soc[t];
        }
        let r = soc[n - 1] - st.q0;
        cyc.see(r.abs(), || format!("{name} storage ends {r:.3e} kWh away from its initial state"));
    }
    checks.push(rec.done());
    checks.push(cyc.done());

    let mut fam = Family::new("comfort", BALANCE_TOL);
    let c = &inp.comfort;
    let cap = c.heat_capacity();
    let a = c.kf * DT_HOURS / cap;
    for t in 0..n {
        let v = pmv(s.indoor_temp[t], c);
        let (lo, hi) = if is_day_slot(t) {
            (c.pmv_day_min, c.pmv_day_max)
        } else {
            (-c.pmv_night, c.pmv_night)
        };
        fam.within(v, lo, hi, "PMV", t);
        let prev = s.indoor_temp[(t + n - 1) % n];
        let want = prev - a * (prev - c.t_set) + (s.heat_shift[t] - s.heat_curtail[t]) * DT_HOURS / cap;
        let r = s.indoor_temp[t] - want;
        fam.see(r.abs(), || format!("indoor temperature off by {r:.3e} K in slot {t}"));
    }
    checks.push(fam.done());

    let mut fam = Family::new("demand_response", BALANCE_TOL);
    if dr {
        if let Err(v) = thermal_dr_feasible(&s.heat_shift, &s.heat_curtail, &inp.thermal_dr, BALANCE_TOL) {
            fam.see(f64::INFINITY, || v.to_string());
        }
        fam.within(s.pbdr_scale, 0.0, 1.0, "pbdr_scale", 0);
        for t in 0..n {
            fam.upper(s.replaced[t], inp.replaceable[t], "replaced", t);
            for (k, tier) in inp.ibdr[t].tiers.iter().enumerate() {
                fam.within(s.ibdr_up[t][k] * DT_HOURS, 0.0, tier.max_up, "ibdr up", t);
                fam.within(s.ibdr_down[t][k] * DT_HOURS, 0.0, tier.max_down, "ibdr down", t);
            }
        }
    } else {
        let moved: f64 = (0..n)
            .map(|t| {
                s.pbdr[t].abs() + up[t] + down[t] + s.replaced[t] + s.heat_shift[t].abs() + s.heat_curtail[t]
            })
            .sum();
        fam.see(moved, || "demand response used while disabled".into());
    }
    checks.push(fam.done());

    let mut fam = Family::new("carbon", IDENTITY_TOL);
    match ledger_for(inp, s) {
        Ok(l) => {
            fam.see(sol.ledger.balance_residual() / (1.0 + sol.ledger.actual), || {
                "ledger source totals do not add up".into()
            });
            for (name, a, b) in [
                ("actual", l.actual, sol.ledger.actual),
                ("quota", l.quota, sol.ledger.quota),
                ("cost", l.cost, sol.ledger.cost),
                ("grid_purchase", l.grid_purchase, sol.ledger.grid_purchase),
                ("gas_turbine", l.gas_turbine, sol.ledger.gas_turbine),
                ("gas_boiler", l.gas_boiler, sol.ledger.gas_boiler),
            ] {
                fam.see(rel(a, b), || format!("ledger {name} {b} differs from recomputed {a}"));
            }
            let mut costs = Family::new("cost_decomposition", IDENTITY_TOL);
            let k = &sol.costs;
            costs.see(rel(k.total, k.energy_purchase + k.om + k.carbon), || {
                "total differs from the sum of its parts".into()
            });
            let want = cost_breakdown(inp, s, &l);
            for (name, a, b) in [
                ("energy_purchase", want.energy_purchase, k.energy_purchase),
                ("om", want.om, k.om),
                ("carbon", want.carbon, k.carbon),
                ("total", want.total, k.total),
            ] {
                costs.see(rel(a, b), || format!("{name} {b} differs from recomputed {a}"));
            }
            checks.push(fam.done());
            checks.push(costs.done());
        }
        Err(e) => {
            fam.see(f64::INFINITY, || e.to_string());
            checks.push(fam.done());
            let mut costs = Family::new("cost_decomposition", IDENTITY_TOL);
            costs.see(f64::INFINITY, || "no ledger to price".into());
            checks.push(costs.done());
        }
    }

    VerifyReport { checks }
}

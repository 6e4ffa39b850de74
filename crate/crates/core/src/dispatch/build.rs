//! Assembles the lower-level LP.

use super::input::DispatchInput;
use super::lp::{Cmp, LpModel};
use crate::demand_response::comfort_band;
use crate::error::{Carrier, DispatchError};
use crate::model::DT_HOURS;

#[derive(Debug, Clone)]
pub(crate) struct DrCols {
    pub pbdr_scale: usize,
    pub ibdr_up: Vec<Vec<usize>>,
    pub ibdr_down: Vec<Vec<usize>>,
    pub replace: Vec<usize>,
    pub shift: Vec<usize>,
    pub curtail: Vec<usize>,
    pub indoor: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Cols {
    pub wind: Vec<usize>,
    pub pv: Vec<usize>,
    pub syngas: Vec<usize>,
    pub chp_bio: Vec<usize>,
    pub bio_export: Vec<usize>,
    pub gt_gas: Vec<usize>,
    pub gb_seg: Vec<Vec<usize>>,
    pub eb_in: Vec<usize>,
    pub hp_in: Vec<usize>,
    pub buy: Vec<usize>,
    pub gas_buy: Vec<usize>,
    pub es_ch: Vec<usize>,
    pub es_dis: Vec<usize>,
    pub es_soc: Vec<usize>,
    pub ts_ch: Vec<usize>,
    pub ts_dis: Vec<usize>,
    pub ts_soc: Vec<usize>,
    pub dump: Vec<usize>,
    pub dr: Option<DrCols>,
}

/// An LP together with the meaning of its columns.
#[derive(Debug, Clone)]
pub struct DispatchLp {
    pub model: LpModel,
    pub(crate) cols: Cols,
}

impl DispatchLp {
    /// Columns indexed by slot, i.e. excluding day-level scalars.
    pub fn per_slot_columns(&self) -> usize {
        self.model.vars.iter().filter(|v| v.name.ends_with(']')).count()
    }
}

const INF: f64 = f64::INFINITY;

/// First slot whose demand cannot be met even with every source at its
/// upper bound.
pub fn capacity_check(inp: &DispatchInput) -> Result<(), DispatchError> {
    let l = inp.gas.kwh_per_nm3();
    let dr = inp.flags.demand_response_enabled;
    for t in 0..inp.horizon() {
        let chp_fuel = inp.chp.max_fuel().min(inp.syngas[t] + l * inp.biomethane[t]);
        let chp_e = (inp.chp.eta_e * chp_fuel).min(inp.chp.capacity);
        let chp_h = inp.chp.eta_h * chp_e / inp.chp.eta_e;
        let es = if inp.electric_storage.capacity > 0.0 {
            inp.electric_storage.p_dis_max
        } else {
            0.0
        };
        let ts = if inp.thermal_storage.capacity > 0.0 {
            inp.thermal_storage.p_dis_max
        } else {
            0.0
        };
        let supply_e =
            inp.wind_cap[t] + inp.pv_cap[t] + chp_e + inp.gt.capacity + inp.import_cap + es;
        let mut demand_e = inp.electric_load[t] + inp.aux_electric[t];
        if dr {
            let down: f64 = inp.ibdr[t].tiers.iter().map(|k| k.max_down).sum::<f64>() / DT_HOURS;
            demand_e += inp.ibdr[t].contract / DT_HOURS + inp.pbdr[t].min(0.0)
                - down
                - inp.replaceable[t];
        }
        if demand_e > supply_e * (1.0 + 1e-9) + 1e-9 {
            return Err(DispatchError::CapacityShortfall {
                slot: t,
                carrier: Carrier::Electric,
                demand: demand_e,
                capacity: supply_e,
            });
        }
        let gt_h = inp.gt.eta_h * inp.gt.capacity / inp.gt.eta_e;
        let supply_h = (1.0 - inp.loss_rate)
            * (chp_h + gt_h + inp.gb.capacity + inp.eb.capacity + inp.hp.capacity + ts);
        let mut demand_h = inp.thermal_load[t] + inp.digester_heat[t];
        if dr {
            demand_h += inp.thermal_dr.shift_min[t] - inp.thermal_dr.curtail_max[t];
        }
        if demand_h > supply_h * (1.0 + 1e-9) + 1e-9 {
            return Err(DispatchError::CapacityShortfall {
                slot: t,
                carrier: Carrier::Thermal,
                demand: demand_h,
                capacity: supply_h,
            });
        }
    }
    Ok(())
}

/// Builds the scheduling LP: energy balances, device limits, ramps,
/// storage, renewable caps, emission bookkeeping, optional demand response
/// and optional tiered carbon cost.
pub fn build_lp(inp: &DispatchInput) -> Result<DispatchLp, DispatchError> {
    inp.validate()?;
    capacity_check(inp)?;
    let n = inp.horizon();
    let tb = inp.tie_break;
    let l = inp.gas.kwh_per_nm3();
    let om = &inp.om;
    let mut m = LpModel::default();
    let per = |m: &mut LpModel, name: &str, lo: &dyn Fn(usize) -> f64, hi: &dyn Fn(usize) -> f64, cost: &dyn Fn(usize) -> f64| {
        (0..n)
            .map(|t| m.var(format!("{name}[{t}]"), lo(t), hi(t), cost(t)))
            .collect::<Vec<_>>()
    };
    let zero = |_: usize| 0.0;

    // curtailment penalty on (cap - output), constant part dropped
    let wind = per(&mut m, "wind", &zero, &|t| inp.wind_cap[t], &|_| om.wind - om.curtailment_penalty);
    let pv = per(&mut m, "pv", &zero, &|t| inp.pv_cap[t], &|_| om.pv - om.curtailment_penalty);
    let syngas = per(&mut m, "syngas", &zero, &|t| inp.syngas[t], &|_| om.chp * inp.chp.eta_e);
    let chp_bio = per(&mut m, "chp_biomethane", &zero, &|t| inp.biomethane[t], &|_| {
        om.chp * inp.chp.eta_e * l
    });
    let bio_export = per(&mut m, "biomethane_export", &zero, &|t| inp.biomethane[t], &|_| {
        -inp.gas.biomethane_price
    });
    let gt_max = inp.gt.capacity * DT_HOURS / (inp.gt.eta_e * l);
    let gt_gas = per(&mut m, "gt_gas", &zero, &|_| gt_max, &|_| om.gt * inp.gt.eta_e * l);
    let pieces = inp.gb_pieces();
    let gb_seg: Vec<Vec<usize>> = (0..n)
        .map(|t| {
            pieces
                .iter()
                .enumerate()
                .map(|(k, &(w, _))| m.var(format!("gb_seg{k}[{t}]"), 0.0, w, om.gb))
                .collect()
        })
        .collect();
    let eb_in = per(&mut m, "eb_in", &zero, &|_| inp.eb.capacity / inp.eb.eta, &|_| {
        om.eb * inp.eb.eta
    });
    let hp_in = per(&mut m, "hp_in", &zero, &|_| inp.hp.capacity / inp.hp.cop, &|_| {
        om.hp * inp.hp.cop
    });
    let buy = per(&mut m, "grid_buy", &zero, &|_| inp.import_cap, &|t| inp.price[t] * DT_HOURS + tb);
    let gas_buy = per(&mut m, "gas_buy", &zero, &|_| INF, &|_| inp.gas.price);
    let es = &inp.electric_storage;
    let ts = &inp.thermal_storage;
    let scost = om.storage * DT_HOURS + tb;
    let es_ch = per(&mut m, "es_charge", &zero, &|_| es.p_ch_max, &|_| scost);
    let es_dis = per(&mut m, "es_discharge", &zero, &|_| es.p_dis_max, &|_| scost);
    let es_soc = per(&mut m, "es_soc", &zero, &|t| if t + 1 == n { es.q0 } else { es.capacity }, &zero);
    let ts_ch = per(&mut m, "ts_charge", &zero, &|_| ts.p_ch_max, &|_| scost);
    let ts_dis = per(&mut m, "ts_discharge", &zero, &|_| ts.p_dis_max, &|_| scost);
    let ts_soc = per(&mut m, "ts_soc", &zero, &|t| if t + 1 == n { ts.q0 } else { ts.capacity }, &zero);
    // cyclic condition: the last state equals the initial one
    m.vars[es_soc[n - 1]].lo = es.q0;
    m.vars[ts_soc[n - 1]].lo = ts.q0;
    let dump = per(&mut m, "heat_dump", &zero, &|_| INF, &|_| tb);

    let ct = inp.flags.carbon_trading_enabled;
    let e_cost = if !ct && inp.carbon.baseline_carbon_in_objective {
        inp.carbon.beta
    } else {
        0.0
    };
    let emissions = m.var("emissions", 0.0, INF, e_cost + tb);

    let dr = if inp.flags.demand_response_enabled {
        let pbdr_scale = m.var("pbdr_scale", 0.0, 1.0, 0.0);
        let mut ibdr_up = Vec::with_capacity(n);
        let mut ibdr_down = Vec::with_capacity(n);
        for t in 0..n {
            let mut up = Vec::new();
            let mut down = Vec::new();
            for (k, tier) in inp.ibdr[t].tiers.iter().enumerate() {
                up.push(m.var(format!("ibdr_up{k}[{t}]"), 0.0, tier.max_up / DT_HOURS, tier.price * DT_HOURS));
                down.push(m.var(format!("ibdr_down{k}[{t}]"), 0.0, tier.max_down / DT_HOURS, tier.price * DT_HOURS));
            }
            ibdr_up.push(up);
            ibdr_down.push(down);
        }
        let replace = per(&mut m, "replace", &zero, &|t| inp.replaceable[t], &zero);
        let shift = per(
            &mut m,
            "heat_shift",
            &|t| inp.thermal_dr.shift_min[t],
            &|t| inp.thermal_dr.shift_max[t],
            &zero,
        );
        let curtail = per(&mut m, "heat_curtail", &zero, &|t| inp.thermal_dr.curtail_max[t], &|_| {
            inp.thermal_curtail_price * DT_HOURS
        });
        let indoor = per(
            &mut m,
            "indoor_temp",
            &|t| comfort_band(t, &inp.comfort).0,
            &|t| comfort_band(t, &inp.comfort).1,
            &zero,
        );
        Some(DrCols {
            pbdr_scale,
            ibdr_up,
            ibdr_down,
            replace,
            shift,
            curtail,
            indoor,
        })
    } else {
        None
    };

    let (quota, carbon_cost) = if ct {
        let q = m.var("quota", 0.0, INF, 0.0);
        let lo = match inp.carbon.surplus_credit {
            crate::carbon::SurplusCredit::None => 0.0,
            crate::carbon::SurplusCredit::FlatBeta => -INF,
        };
        let c = m.var("carbon_cost", lo, INF, 1.0);
        (Some(q), Some(c))
    } else {
        (None, None)
    };

    let (ce, ch) = (inp.chp.eta_e, inp.chp.eta_h);
    let (ge, gh) = (inp.gt.eta_e * l, inp.gt.eta_h * l);
    let keep = 1.0 - inp.loss_rate;
    for t in 0..n {
        let s = Some(t);
        // electric balance
        let mut terms = vec![
            (wind[t], 1.0),
            (pv[t], 1.0),
            (syngas[t], ce),
            (chp_bio[t], ce * l),
            (gt_gas[t], ge),
            (buy[t], 1.0),
            (es_dis[t], 1.0),
            (es_ch[t], -1.0),
            (eb_in[t], -1.0),
            (hp_in[t], -1.0),
        ];
        let mut rhs = inp.electric_load[t] + inp.aux_electric[t];
        if let Some(d) = &dr {
            terms.push((d.pbdr_scale, -inp.pbdr[t]));
            terms.extend(d.ibdr_up[t].iter().map(|&v| (v, -1.0)));
            terms.extend(d.ibdr_down[t].iter().map(|&v| (v, 1.0)));
            terms.push((d.replace[t], 1.0));
            rhs += inp.ibdr[t].contract / DT_HOURS;
        }
        m.row("electric_balance", s, terms, Cmp::Eq, rhs);

        // thermal balance, net of distribution losses
        let mut terms = vec![
            (syngas[t], keep * ch),
            (chp_bio[t], keep * ch * l),
            (gt_gas[t], keep * gh),
            (eb_in[t], keep * inp.eb.eta),
            (hp_in[t], keep * inp.hp.cop),
            (ts_dis[t], keep),
            (ts_ch[t], -keep),
            (dump[t], -keep),
        ];
        terms.extend(gb_seg[t].iter().map(|&v| (v, keep)));
        if let Some(d) = &dr {
            terms.push((d.shift[t], -1.0));
            terms.push((d.curtail[t], 1.0));
            terms.push((d.replace[t], -inp.replace_heat_ratio));
        }
        m.row("thermal_balance", s, terms, Cmp::Eq, inp.thermal_load[t] + inp.digester_heat[t]);

        // gas balance, Nm3
        let mut terms = vec![(gas_buy[t], 1.0), (gt_gas[t], -1.0)];
        terms.extend(gb_seg[t].iter().zip(&pieces).map(|(&v, &(_, slope))| (v, -slope)));
        m.row("gas_balance", s, terms, Cmp::Eq, inp.gb.fuel_c);

        m.row("chp_capacity", s, vec![(syngas[t], ce), (chp_bio[t], ce * l)], Cmp::Le, inp.chp.capacity);
        m.row("chp_fuel_cap", s, vec![(syngas[t], 1.0), (chp_bio[t], l)], Cmp::Le, inp.chp.max_fuel());
        m.row("biomethane_use", s, vec![(chp_bio[t], 1.0), (bio_export[t], 1.0)], Cmp::Le, inp.biomethane[t]);
        let gb_sum: Vec<_> = gb_seg[t].iter().map(|&v| (v, 1.0)).collect();
        m.row("gb_capacity", s, gb_sum.clone(), Cmp::Le, inp.gb.capacity);
        if inp.gb.min_output > 0.0 {
            m.row("gb_min_output", s, gb_sum, Cmp::Ge, inp.gb.min_output);
        }

        if t > 0 {
            let p = t - 1;
            let chp_d = vec![(syngas[t], ce), (chp_bio[t], ce * l), (syngas[p], -ce), (chp_bio[p], -ce * l)];
            ramp(&mut m, t, "chp_ramp", chp_d, inp.chp.ramp_up, inp.chp.ramp_down);
            let gt_d = vec![(gt_gas[t], ge), (gt_gas[p], -ge)];
            ramp(&mut m, t, "gt_ramp", gt_d, inp.gt.ramp_up, inp.gt.ramp_down);
            let mut gb_d: Vec<_> = gb_seg[t].iter().map(|&v| (v, 1.0)).collect();
            gb_d.extend(gb_seg[p].iter().map(|&v| (v, -1.0)));
            ramp(&mut m, t, "gb_ramp", gb_d, inp.gb.ramp_up, inp.gb.ramp_down);
        }

        for (soc, chg, dis, st, fam) in [
            (&es_soc, &es_ch, &es_dis, es, "es_dynamics"),
            (&ts_soc, &ts_ch, &ts_dis, ts, "ts_dynamics"),
        ] {
            let mut terms = vec![
                (soc[t], 1.0),
                (chg[t], -st.eta_ch * DT_HOURS),
                (dis[t], DT_HOURS / st.eta_dis),
            ];
            let rhs = if t == 0 {
                st.q0
            } else {
                terms.push((soc[t - 1], -1.0));
                0.0
            };
            m.row(fam, s, terms, Cmp::Eq, rhs);
        }
    }

    // emissions, kg
    let f = inp.carbon.f_grid * DT_HOURS;
    let co2 = inp.gas.co2_factor;
    let mut terms = vec![(emissions, 1.0)];
    for t in 0..n {
        terms.push((buy[t], -f));
        terms.push((gas_buy[t], -co2));
    }
    m.row("emission_total", None, terms, Cmp::Eq, 0.0);

    if let (Some(q), Some(c)) = (quota, carbon_cost) {
        let mut terms = vec![(q, 1.0)];
        for t in 0..n {
            terms.push((buy[t], -inp.carbon.lambda_e * DT_HOURS));
            terms.extend(gb_seg[t].iter().map(|&v| (v, -inp.carbon.lambda_g * DT_HOURS)));
        }
        m.row("quota", None, terms, Cmp::Eq, 0.0);
        for (slope, icpt) in inp.carbon.tier_lines() {
            m.row(
                "carbon_tier",
                None,
                vec![(c, 1.0), (emissions, -slope), (q, slope)],
                Cmp::Ge,
                icpt,
            );
        }
    }

    if let Some(d) = &dr {
        let terms = d.shift.iter().map(|&v| (v, 1.0)).collect();
        m.row("heat_shift_neutral", None, terms, Cmp::Eq, 0.0);
        let cap = inp.comfort.heat_capacity();
        let a = inp.comfort.kf * DT_HOURS / cap;
        for t in 0..n {
            let prev = d.indoor[(t + n - 1) % n];
            let mut terms = vec![(d.indoor[t], 1.0), (d.shift[t], -DT_HOURS / cap), (d.curtail[t], DT_HOURS / cap)];
            if prev == d.indoor[t] {
                terms[0].1 -= 1.0 - a;
            } else {
                terms.push((prev, -(1.0 - a)));
            }
            m.row("indoor_temperature", Some(t), terms, Cmp::Eq, a * inp.comfort.t_set);
        }
    }

    let cols = Cols {
        wind,
        pv,
        syngas,
        chp_bio,
        bio_export,
        gt_gas,
        gb_seg,
        eb_in,
        hp_in,
        buy,
        gas_buy,
        es_ch,
        es_dis,
        es_soc,
        ts_ch,
        ts_dis,
        ts_soc,
        dump,
        dr,
    };
    Ok(DispatchLp { model: m, cols })
}

fn ramp(m: &mut LpModel, t: usize, family: &'static str, delta: Vec<(usize, f64)>, up: f64, down: f64) {
    let neg = delta.iter().map(|&(v, c)| (v, -c)).collect();
    m.row(family, Some(t), delta, Cmp::Le, up * DT_HOURS);
    m.row(family, Some(t), neg, Cmp::Le, down * DT_HOURS);
}

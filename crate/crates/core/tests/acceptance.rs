//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero when any of them fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ries_core::bilevel::evolve;
use ries_core::carbon::{tiered_trading_cost, CarbonMarketParams};
use ries_core::dispatch::{inverse_normal_cdf, solve_dispatch, verify_solution, DispatchInput};
use ries_core::error::DispatchError;
use ries_core::model::{Scenario, SystemConfig};
use ries_core::scenarios::{comparison, run_scenarios};
use ries_core::sensitivity::{self, PARAMS};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

/// Tier-by-tier integral of the marginal price.
fn tiered_by_integration(e: f64, m: &CarbonMarketParams) -> f64 {
    (0..5)
        .map(|k| {
            let lo = k as f64 * m.l;
            let width = if k == 4 { f64::INFINITY } else { m.l };
            let used = (e - lo).clamp(0.0, width);
            used * m.beta * (1.0 + k as f64 * m.zeta)
        })
        .sum()
}

fn tiered_cost() -> Outcome {
    let start = Instant::now();
    let m = SystemConfig::bundled().carbon;
    let (a, b) = (tiered_trading_cost(3000.0, &m), tiered_trading_cost(8000.0, &m));
    ensure((a - 975.0).abs() < 1e-9, format!("C(3000) = {a}"))?;
    ensure((b - 3300.0).abs() < 1e-9, format!("C(8000) = {b}"))?;
    let mut worst_jump: f64 = 0.0;
    for k in 1..=4 {
        let x = k as f64 * m.l;
        let eps = 1e-9 * x;
        let left = tiered_trading_cost(x - eps, &m);
        let right = tiered_trading_cost(x + eps, &m);
        let at = tiered_trading_cost(x, &m);
        // remove the slope contribution of the tiny offsets
        let slope = m.beta * (1.0 + 4.0 * m.zeta);
        worst_jump = worst_jump.max((at - left).abs() - slope * eps).max((right - at).abs() - slope * eps);
        ensure((at - tiered_by_integration(x, &m)).abs() < 1e-9, format!("tier {k} base"))?;
    }
    ensure(worst_jump <= 1e-12, format!("boundary jump {worst_jump:e}"))?;
    let n = 10_000;
    let hi = 6.0 * m.l;
    let h = hi / n as f64;
    let ys: Vec<f64> = (0..=n).map(|i| tiered_trading_cost(i as f64 * h, &m)).collect();
    let mut worst_curv: f64 = 0.0;
    for (i, w) in ys.windows(3).enumerate() {
        worst_curv = worst_curv.min(w[0] - 2.0 * w[1] + w[2]);
        let x = (i + 1) as f64 * h;
        let o = tiered_by_integration(x, &m);
        ensure((w[1] - o).abs() <= 1e-9 * o.max(1.0), format!("E = {x}: {} vs {o}", w[1]))?;
    }
    ensure(worst_curv >= -1e-9, format!("second difference {worst_curv:e}"))?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("C(3000)={a}, C(8000)={b}, {:.2?}", start.elapsed()))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut solved, mut tries, mut worst): (usize, usize, f64) = (0, 0, 0.0);
    while solved < 25 {
        tries += 1;
        ensure(tries < 500, "too many infeasible draws")?;
        let toy = common::random_toy(&mut rng);
        let lp = solve_dispatch(&toy.input);
        let Some(best) = common::oracle(&toy) else {
            ensure(lp.is_err(), "oracle infeasible but LP solved")?;
            continue;
        };
        let sol = lp.map_err(|e| format!("LP failed where oracle found {}: {e}", best.cost))?;
        let rel = (sol.objective - best.cost).abs() / best.cost.abs().max(1.0);
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("LP {} vs oracle {}", sol.objective, best.cost))?;
        let again = common::check_feasible(&toy, &sol)?;
        ensure(
            (again - sol.objective).abs() <= 1e-6 * again.abs().max(1.0),
            format!("recomputed {again} vs LP {}", sol.objective),
        )?;
        solved += 1;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("25 instances, worst rel gap {worst:.1e}, {:.2?}", start.elapsed()))
}

fn scenario_ordering_and_verify() -> (Outcome, Outcome) {
    let start = Instant::now();
    let runs = match run_scenarios(&SystemConfig::bundled(), &Scenario::ALL) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let elapsed = start.elapsed();
    let rows = comparison(&runs);
    let order = || -> Outcome {
        for w in rows.windows(2) {
            ensure(w[1].emissions < w[0].emissions, format!("emissions {} !< {}", w[1].scenario, w[0].scenario))?;
            ensure(w[1].total_cost < w[0].total_cost, format!("cost {} !< {}", w[1].scenario, w[0].scenario))?;
        }
        let cut = 1.0 - rows[2].emissions / rows[0].emissions;
        ensure(cut >= 0.02, format!("S3 only {:.2}% below S1", 100.0 * cut))?;
        ensure(rows[3].emissions < rows[2].emissions, "S4 not below S3")?;
        within(elapsed, Duration::from_secs(300))?;
        let e: Vec<String> = rows.iter().map(|r| format!("{:.0}", r.emissions)).collect();
        let c: Vec<String> = rows.iter().map(|r| format!("{:.0}", r.total_cost)).collect();
        Ok(format!("emissions [{}], cost [{}], S3 -{:.1}%, {elapsed:.2?}", e.join(" "), c.join(" "), 100.0 * cut))
    };
    let verify = || -> Outcome {
        for r in &runs {
            ensure(r.report.all_passed(), format!("{}:\n{}", r.scenario, r.report))?;
        }
        Ok("4 scenarios, all constraint families within tolerance".into())
    };
    (order(), verify())
}

fn ga_dominance() -> Outcome {
    let start = Instant::now();
    let cfg = SystemConfig::bundled();
    let ga = cfg.ga_config();
    ensure(ga.population == 20 && ga.generations <= 50, "GA settings differ from 20 x 50")?;
    let flags = Scenario::Combined.flags();
    let a = evolve(&ga, &cfg, flags).map_err(|e| e.to_string())?;
    let b = evolve(&ga, &cfg, flags).map_err(|e| e.to_string())?;
    ensure(a.trace.windows(2).all(|w| w[1] <= w[0]), "trace not monotone")?;
    let bytes = |r: &ries_core::bilevel::EvolveResult| {
        let mut v: Vec<u8> = r.best.to_string().into_bytes();
        for x in &r.trace {
            v.extend_from_slice(&x.to_le_bytes());
        }
        for x in r.evaluation.prices.values() {
            v.extend_from_slice(&x.to_le_bytes());
        }
        v
    };
    ensure(bytes(&a) == bytes(&b), "two runs with one seed differ")?;
    let (best, base) = (a.evaluation.grid.total, a.baseline.grid.total);
    ensure(best <= base, format!("GA grid cost {best} above static {base}"))?;
    within(start.elapsed(), Duration::from_secs(600))?;
    Ok(format!("grid cost {best:.0} <= static {base:.0}, {} generations, {:.2?} for two runs", a.trace.len(), start.elapsed()))
}

fn sensitivity_ranking() -> Outcome {
    let start = Instant::now();
    let cfg = SystemConfig::bundled();
    ensure(PARAMS.len() == 27, format!("{} parameters", PARAMS.len()))?;
    let all: Vec<_> = PARAMS.iter().collect();
    let rep = sensitivity::run(&cfg, &all, 11).map_err(|e| e.to_string())?;
    ensure(rep.params.len() == 27, format!("{} reported", rep.params.len()))?;
    let mut top: Vec<&str> = rep.params[..4].iter().map(|p| p.id.as_str()).collect();
    top.sort_unstable();
    ensure(top == ["F1", "F2", "F3", "F4"], format!("top four {top:?}"))?;
    for id in ["F1", "F2", "F3", "F4"] {
        let r = rep.get(id).and_then(|p| p.pearson);
        ensure(r.is_some_and(|r| r <= -0.95), format!("{id} r = {r:?}"))?;
    }
    for id in ["F5", "F6"] {
        let r = rep.get(id).and_then(|p| p.pearson);
        ensure(r.is_some_and(|r| r > 0.0), format!("{id} r = {r:?}"))?;
    }
    within(start.elapsed(), Duration::from_secs(900))?;
    let r = |id: &str| rep.get(id).and_then(|p| p.pearson).unwrap_or(f64::NAN);
    Ok(format!(
        "top4 {top:?}, r(F1..F4) = {:.3} {:.3} {:.3} {:.3}, r(F5) = {:.3}, r(F6) = {:.3}, {:.2?}",
        r("F1"),
        r("F2"),
        r("F3"),
        r("F4"),
        r("F5"),
        r("F6"),
        start.elapsed()
    ))
}

fn normal_quantile() -> Outcome {
    let z = inverse_normal_cdf(0.975).map_err(|e| e.to_string())?;
    ensure((z - 1.959964).abs() <= 1e-6, format!("quantile {z}"))?;
    let mut worst: f64 = 0.0;
    for k in 1..=1000 {
        // dyadic p keeps 1 - p exact
        let p = k as f64 / 2048.0;
        let a = inverse_normal_cdf(p).map_err(|e| e.to_string())?;
        let b = inverse_normal_cdf(1.0 - p).map_err(|e| e.to_string())?;
        worst = worst.max((a + b).abs());
    }
    ensure(worst <= 1e-12, format!("asymmetry {worst:e}"))?;
    Ok(format!("Phi^-1(0.975) = {z:.9}, worst asymmetry {worst:e}"))
}

fn robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cases: Vec<(SystemConfig, Scenario)> = (0..100)
        .map(|_| (common::random_config(&mut rng), Scenario::ALL[rng.gen_range(0..4)]))
        .collect();
    let failures: Vec<String> = cases
        .par_iter()
        .enumerate()
        .filter_map(|(i, (cfg, s))| {
            let inp = match DispatchInput::from_config(cfg, s.flags(), &cfg.tariff.price_profile()) {
                Ok(x) => x,
                Err(e) => return Some(format!("#{i} {s}: {e}")),
            };
            match solve_dispatch(&inp) {
                Ok(sol) => {
                    let rep = verify_solution(&sol, &inp);
                    (!rep.all_passed()).then(|| format!("#{i} {s}: verify\n{rep}"))
                }
                Err(e) => Some(format!("#{i} {s}: {e}")),
            }
        })
        .collect();
    ensure(failures.is_empty(), failures.join("\n"))?;

    let base = SystemConfig::bundled();
    let mut big = base.clone();
    big.profiles.scale_loads(20.0);
    let inp = DispatchInput::from_config(&big, Scenario::Combined.flags(), &big.tariff.price_profile())
        .map_err(|e| e.to_string())?;
    let shortfall = catch_unwind(AssertUnwindSafe(|| solve_dispatch(&inp)));
    match shortfall {
        Ok(Err(DispatchError::CapacityShortfall { slot, .. })) => ensure(slot < 24, "slot index out of range")?,
        Ok(other) => return Err(format!("oversized load gave {other:?}")),
        Err(_) => return Err("oversized load panicked".into()),
    }

    let mut inp = DispatchInput::blank(2, &base, Scenario::Baseline.flags());
    inp.import_cap = 0.0;
    inp.electric_storage.capacity = 0.0;
    inp.electric_storage.p_dis_max = 0.0;
    inp.electric_load = vec![0.0, inp.gt.capacity];
    inp.gt.ramp_up = 0.1 * inp.gt.capacity;
    match catch_unwind(AssertUnwindSafe(|| solve_dispatch(&inp))) {
        Ok(Err(DispatchError::Infeasible(_))) => {}
        Ok(other) => return Err(format!("ramp-locked case gave {other:?}")),
        Err(_) => return Err("ramp-locked case panicked".into()),
    }
    Ok("100 random configs verified, shortfall and infeasible cases diagnosed".into())
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
}

fn main() {
    let (c3, c4) = catch_unwind(scenario_ordering_and_verify)
        .unwrap_or_else(|_| (Err("panicked".into()), Err("panicked".into())));
    let results = [
        ("tiered carbon cost", guarded(tiered_cost)),
        ("LP matches exhaustive search", guarded(oracle_equivalence)),
        ("scenario ordering", c3),
        ("scenario verification", c4),
        ("bilevel GA", guarded(ga_dominance)),
        ("sensitivity ranking", guarded(sensitivity_ranking)),
        ("normal quantile", guarded(normal_quantile)),
        ("robustness", guarded(robustness)),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(msg) => println!("criterion {}: PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

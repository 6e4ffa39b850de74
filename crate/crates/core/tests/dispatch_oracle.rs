mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{check_feasible, oracle, random_toy};
use ries_core::dispatch::solve_dispatch;

#[test]
fn lp_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut solved = 0;
    let mut tries = 0;
    while solved < 25 {
        tries += 1;
        assert!(tries < 200, "too many infeasible toy draws");
        let toy = random_toy(&mut rng);
        let lp = solve_dispatch(&toy.input);
        let Some(best) = oracle(&toy) else {
            assert!(lp.is_err(), "oracle infeasible but LP solved");
            continue;
        };
        let sol = lp.unwrap_or_else(|e| panic!("oracle found {} but LP failed: {e}", best.cost));
        let rel = (sol.objective - best.cost).abs() / best.cost.abs().max(1.0);
        assert!(rel <= 1e-6, "LP {} vs oracle {} ({rel:e})", sol.objective, best.cost);
        let recomputed = check_feasible(&toy, &sol).unwrap();
        assert!((recomputed - sol.objective).abs() <= 1e-6 * recomputed.abs().max(1.0));
        solved += 1;
    }
}

#[test]
fn oracle_plan_is_feasible_for_itself() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let toy = random_toy(&mut rng);
        if let Some(best) = oracle(&toy) {
            assert_eq!(best.plan.len(), toy.input.horizon());
            let mut c = 0.0;
            for (t, p) in best.plan.iter().enumerate() {
                c += common::slot_cost(&toy, t, *p, 1e-9).unwrap();
            }
            assert!((c - best.cost).abs() < 1e-9 * c.abs().max(1.0));
        }
    }
}

#[test]
fn two_slot_turbine_only_by_hand() {
    // cheap grid, no heat demand: the turbine stays off and the grid covers load
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut toy = random_toy(&mut rng);
    while toy.input.horizon() != 2 {
        toy = random_toy(&mut rng);
    }
    let inp = &mut toy.input;
    inp.electric_load = vec![500.0, 500.0];
    inp.thermal_load = vec![0.0, 0.0];
    inp.price = vec![0.01, 0.01];
    inp.import_cap = 1000.0;
    inp.carbon.baseline_carbon_in_objective = false;
    inp.flags.carbon_trading_enabled = false;
    inp.om.gt = 0.0;
    toy.carbon_in_objective = false;
    let sol = solve_dispatch(&toy.input).unwrap();
    assert!(sol.schedule.gt_gas.iter().all(|&g| g.abs() < 1e-9));
    assert!((sol.objective - 10.0).abs() < 1e-9);
}

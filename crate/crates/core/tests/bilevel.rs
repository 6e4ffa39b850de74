use proptest::prelude::*;

use ries_core::bilevel::{economic_dispatch, evolve_with, random_population, GaConfig, PriceChromosome, PENALTY};
use ries_core::model::{SystemConfig, SLOTS};

fn ga(seed: u64) -> GaConfig {
    GaConfig {
        seed,
        generations: 30,
        ..SystemConfig::bundled().ga
    }
}

/// Smooth bowl with its minimum at a flat price of 0.6.
fn bowl(c: &PriceChromosome) -> Result<f64, String> {
    Ok(c.decode().values().iter().map(|p| (p - 0.6).powi(2)).sum())
}

#[test]
fn decode_fills_each_segment() {
    let c = PriceChromosome::new(vec![(0, 0.3), (7, 0.5), (20, 0.9)], 0.1, 1.2).unwrap();
    let p = c.decode();
    for t in 0..SLOTS {
        let want = if t < 7 {
            0.3
        } else if t < 20 {
            0.5
        } else {
            0.9
        };
        assert_eq!(p[t], want);
    }
}

#[test]
fn chromosome_rejects_bad_shapes() {
    assert!(PriceChromosome::new(vec![], 0.1, 1.0).is_err());
    assert!(PriceChromosome::new(vec![(1, 0.5)], 0.1, 1.0).is_err());
    assert!(PriceChromosome::new(vec![(0, 0.5), (5, 0.5), (5, 0.6)], 0.1, 1.0).is_err());
    assert!(PriceChromosome::new(vec![(0, 0.5), (24, 0.6)], 0.1, 1.0).is_err());
    assert!(PriceChromosome::new(vec![(0, 1.5)], 0.1, 1.0).is_err());
}

#[test]
fn tariff_round_trips_through_chromosome() {
    let cfg = SystemConfig::bundled();
    let c = PriceChromosome::from_tou(&cfg.tariff, cfg.upper.price_floor, cfg.upper.price_cap).unwrap();
    assert_eq!(c.decode().values(), cfg.tariff.price_profile().values());
}

#[test]
fn trace_is_monotone_and_run_is_reproducible() {
    let g = ga(5);
    let init = random_population(&g, 0.2, 1.2, g.population);
    let a = evolve_with(&g, 0.2, 1.2, init.clone(), bowl).unwrap();
    let b = evolve_with(&g, 0.2, 1.2, init, bowl).unwrap();
    assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(a.best, b.best);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.trace), bits(&b.trace));
    assert!(a.best_fitness < a.trace[0]);
}

#[test]
fn failing_individuals_are_penalized_not_fatal() {
    let g = ga(9);
    let init = random_population(&g, 0.2, 1.2, g.population);
    let out = evolve_with(&g, 0.2, 1.2, init, |c| {
        if c.segments()[0].1 > 0.7 {
            Err("rejected".into())
        } else {
            bowl(c)
        }
    })
    .unwrap();
    assert!(out.best_fitness < PENALTY);
    assert!(out.best.segments()[0].1 <= 0.7);
}

#[test]
fn all_penalized_population_is_an_error() {
    let g = ga(1);
    let init = random_population(&g, 0.2, 1.2, g.population);
    assert!(evolve_with(&g, 0.2, 1.2, init, |_| Err("no".into())).is_err());
}

proptest! {
    #[test]
    fn economic_dispatch_meets_demand(share in 0.0f64..1.0) {
        let g = SystemConfig::bundled().upper;
        let cap: f64 = g.coal_units.iter().map(|u| u.capacity).sum::<f64>()
            + g.gas_units.iter().map(|u| u.capacity).sum::<f64>();
        let demand = share * cap;
        let (coal, gas) = economic_dispatch(demand, &g).unwrap();
        let total: f64 = coal.iter().sum::<f64>() + gas.iter().sum::<f64>();
        prop_assert!((total - demand).abs() <= 1e-6 * cap.max(1.0));
        for (p, u) in coal.iter().zip(&g.coal_units) {
            prop_assert!(*p >= -1e-9 && *p <= u.capacity + 1e-9);
        }
        prop_assert!(economic_dispatch(cap * 1.01, &g).is_err());
    }
}

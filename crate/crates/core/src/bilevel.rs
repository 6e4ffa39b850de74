//! Upper level: the main grid prices electricity for the park and evolves
//! the price schedule with a variable-length genetic algorithm.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::devices::{check_nonneg, check_pos};
use crate::dispatch::{solve_dispatch, DispatchInput, DispatchSolution};
use crate::error::{ChromosomeError, GaError, GridError};
use crate::model::{ScenarioFlags, SystemConfig, TimeProfile, TouPriceSchedule, Unit, DT_HOURS, SLOTS};

/// Fitness assigned to an individual whose park problem has no solution.
pub const PENALTY: f64 = 1e12;

/// Most segments a price chromosome may carry.
pub const MAX_SEGMENTS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoalUnit {
    /// Cost `a*P^2 + b*P + c` per hour, CNY.
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub capacity: f64,
    /// kgCO2/kWh.
    pub emission_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasUnit {
    /// CNY/kWh.
    pub q: f64,
    pub capacity: f64,
    pub emission_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub coal_units: Vec<CoalUnit>,
    pub gas_units: Vec<GasUnit>,
    /// Penalty on curtailed park PV, CNY/kWh.
    pub curtailment_price: f64,
    /// Price on grid-side generation emissions, CNY/kg.
    pub carbon_price: f64,
    pub price_floor: f64,
    pub price_cap: f64,
}

impl GridParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.coal_units.is_empty() && self.gas_units.is_empty() {
            return Err("upper: at least one generating unit is required".into());
        }
        for u in &self.coal_units {
            check_nonneg("upper.coal_units.a", u.a)?;
            check_nonneg("upper.coal_units.b", u.b)?;
            check_nonneg("upper.coal_units.c", u.c)?;
            check_pos("upper.coal_units.capacity", u.capacity)?;
            check_nonneg("upper.coal_units.emission_factor", u.emission_factor)?;
        }
        for u in &self.gas_units {
            check_nonneg("upper.gas_units.q", u.q)?;
            check_pos("upper.gas_units.capacity", u.capacity)?;
            check_nonneg("upper.gas_units.emission_factor", u.emission_factor)?;
        }
        check_nonneg("upper.curtailment_price", self.curtailment_price)?;
        check_nonneg("upper.carbon_price", self.carbon_price)?;
        check_pos("upper.price_floor", self.price_floor)?;
        if self.price_cap <= self.price_floor {
            return Err("upper.price_cap must exceed upper.price_floor".into());
        }
        Ok(())
    }

    fn capacity(&self) -> f64 {
        self.coal_units.iter().map(|u| u.capacity).sum::<f64>()
            + self.gas_units.iter().map(|u| u.capacity).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    /// Convergence threshold on the change of best fitness.
    pub epsilon: f64,
    /// Generations the best fitness must stay within `epsilon` to stop.
    pub patience: usize,
    pub min_segments: usize,
    pub max_segments: usize,
    /// Filled from the top-level config seed.
    #[serde(skip)]
    pub seed: u64,
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.population < 4 {
            return Err("ga.population must be at least 4".into());
        }
        if self.generations < 1 {
            return Err("ga.generations must be at least 1".into());
        }
        for (n, v) in [
            ("ga.mutation_rate", self.mutation_rate),
            ("ga.crossover_rate", self.crossover_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{n} must lie in [0, 1]"));
            }
        }
        check_nonneg("ga.epsilon", self.epsilon)?;
        if self.patience < 1 {
            return Err("ga.patience must be at least 1".into());
        }
        if self.min_segments < 1
            || self.min_segments > self.max_segments
            || self.max_segments > MAX_SEGMENTS
        {
            return Err(format!("ga segments must satisfy 1 <= min <= max <= {MAX_SEGMENTS}"));
        }
        Ok(())
    }
}

/// Piecewise-constant daily price: `(first slot, price)` per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceChromosome {
    segments: Vec<(usize, f64)>,
}

impl PriceChromosome {
    pub fn new(segments: Vec<(usize, f64)>, floor: f64, cap: f64) -> Result<Self, ChromosomeError> {
        if segments.is_empty() || segments.len() > MAX_SEGMENTS {
            return Err(ChromosomeError::SegmentCount {
                got: segments.len(),
                max: MAX_SEGMENTS,
            });
        }
        if segments[0].0 != 0 {
            return Err(ChromosomeError::FirstBoundary);
        }
        if segments.windows(2).any(|w| w[1].0 <= w[0].0) || segments.iter().any(|s| s.0 >= SLOTS) {
            return Err(ChromosomeError::Boundaries);
        }
        if let Some(&(_, price)) = segments
            .iter()
            .find(|s| !(s.1.is_finite() && s.1 >= floor && s.1 <= cap))
        {
            return Err(ChromosomeError::Price { price, floor, cap });
        }
        Ok(Self { segments })
    }

    /// The tariff's period structure, one segment per run of equal periods.
    pub fn from_tou(s: &TouPriceSchedule, floor: f64, cap: f64) -> Result<Self, ChromosomeError> {
        let p = s.price_profile();
        let mut segs: Vec<(usize, f64)> = Vec::new();
        for t in 0..SLOTS {
            let v = p[t].clamp(floor, cap);
            if segs.last().map_or(true, |l| l.1 != v) {
                segs.push((t, v));
            }
        }
        Self::new(segs, floor, cap)
    }

    pub fn segments(&self) -> &[(usize, f64)] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn decode(&self) -> TimeProfile {
        let mut v = [0.0; SLOTS];
        for (i, &(start, price)) in self.segments.iter().enumerate() {
            let end = self.segments.get(i + 1).map_or(SLOTS, |s| s.0);
            v[start..end].fill(price);
        }
        TimeProfile::new(&v, Unit::YuanPerKwh).expect("validated prices")
    }

    fn key(&self) -> Vec<(usize, u64)> {
        self.segments.iter().map(|&(s, p)| (s, p.to_bits())).collect()
    }
}

impl std::fmt::Display for PriceChromosome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .segments
            .iter()
            .map(|(s, p)| format!("{s:02}:00@{p:.4}"))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Grid-side cost of serving the park, CNY. `total = coal + gas +
/// curtailment + market - sales`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCost {
    pub coal: f64,
    pub gas: f64,
    pub curtailment: f64,
    pub market: f64,
    pub sales: f64,
    pub total: f64,
    /// Grid-side generation emissions, kg.
    pub emissions: f64,
}

/// Unit outputs meeting `demand` kW at least cost (all units committed,
/// no minimum stable output).
pub fn economic_dispatch(demand: f64, g: &GridParams) -> Result<(Vec<f64>, Vec<f64>), f64> {
    let cap = g.capacity();
    if demand > cap * (1.0 + 1e-12) {
        return Err(cap);
    }
    let coal_at = |u: &CoalUnit, lam: f64| {
        if u.a > 0.0 {
            ((lam - u.b) / (2.0 * u.a)).clamp(0.0, u.capacity)
        } else if lam > u.b {
            u.capacity
        } else {
            0.0
        }
    };
    let gas_at = |u: &GasUnit, lam: f64| if lam > u.q { u.capacity } else { 0.0 };
    let total = |lam: f64| {
        g.coal_units.iter().map(|u| coal_at(u, lam)).sum::<f64>()
            + g.gas_units.iter().map(|u| gas_at(u, lam)).sum::<f64>()
    };
    let mut hi = g
        .coal_units
        .iter()
        .map(|u| u.b + 2.0 * u.a * u.capacity)
        .chain(g.gas_units.iter().map(|u| u.q))
        .fold(0.0, f64::max)
        + 1.0;
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < demand {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // units strictly below lo are full; units priced in [lo, hi] share the rest
    let mut coal: Vec<f64> = g.coal_units.iter().map(|u| coal_at(u, lo)).collect();
    let mut gas: Vec<f64> = g.gas_units.iter().map(|u| gas_at(u, lo)).collect();
    let mut rest = demand - coal.iter().sum::<f64>() - gas.iter().sum::<f64>();
    for (i, u) in g.coal_units.iter().enumerate() {
        if rest <= 0.0 {
            break;
        }
        let room = coal_at(u, hi) - coal[i];
        let take = rest.min(room).max(0.0);
        coal[i] += take;
        rest -= take;
    }
    for (i, u) in g.gas_units.iter().enumerate() {
        if rest <= 0.0 {
            break;
        }
        let room = gas_at(u, hi) - gas[i];
        let take = rest.min(room).max(0.0);
        gas[i] += take;
        rest -= take;
    }
    Ok((coal, gas))
}

/// Evaluates the grid objective for a park response.
///
/// `prices` is what the park pays per kWh, `pv_forecast` the park's PV
/// forecast and `urban_load` the grid's other demand.
pub fn grid_cost(
    prices: &[f64],
    park: &DispatchSolution,
    pv_forecast: &[f64],
    urban_load: &[f64],
    g: &GridParams,
) -> Result<GridCost, GridError> {
    let n = park.horizon();
    for len in [prices.len(), pv_forecast.len(), urban_load.len()] {
        if len != n {
            return Err(GridError::Horizon(len, n));
        }
    }
    let s = &park.schedule;
    let mut out = GridCost {
        coal: 0.0,
        gas: 0.0,
        curtailment: 0.0,
        market: 0.0,
        sales: 0.0,
        total: 0.0,
        emissions: 0.0,
    };
    for t in 0..n {
        let demand = urban_load[t] + s.grid_buy[t].max(0.0);
        let (coal, gas) = economic_dispatch(demand, g).map_err(|capacity| GridError::Capacity {
            slot: t,
            demand,
            capacity,
        })?;
        for (u, &p) in g.coal_units.iter().zip(&coal) {
            if p > 0.0 {
                out.coal += (u.a * p * p + u.b * p + u.c) * DT_HOURS;
            }
            out.emissions += u.emission_factor * p * DT_HOURS;
        }
        for (u, &p) in g.gas_units.iter().zip(&gas) {
            out.gas += u.q * p * DT_HOURS;
            out.emissions += u.emission_factor * p * DT_HOURS;
        }
        out.curtailment += g.curtailment_price * (pv_forecast[t] - s.pv[t]).max(0.0) * DT_HOURS;
        out.sales += prices[t] * s.grid_buy[t] * DT_HOURS;
    }
    out.market = g.carbon_price * out.emissions;
    out.total = out.coal + out.gas + out.curtailment + out.market - out.sales;
    Ok(out)
}

/// Park response and grid cost for one price schedule.
#[derive(Debug, Clone)]
pub struct PriceEvaluation {
    pub prices: TimeProfile,
    pub park: DispatchSolution,
    pub input: DispatchInput,
    pub grid: GridCost,
}

pub fn evaluate_prices(
    cfg: &SystemConfig,
    flags: ScenarioFlags,
    prices: &TimeProfile,
) -> Result<PriceEvaluation, String> {
    let input = DispatchInput::from_config(cfg, flags, prices).map_err(|e| e.to_string())?;
    let park = solve_dispatch(&input).map_err(|e| e.to_string())?;
    let grid = grid_cost(
        &input.price,
        &park,
        &input.pv_forecast,
        cfg.profiles.urban_load.values(),
        &cfg.upper,
    )
    .map_err(|e| e.to_string())?;
    Ok(PriceEvaluation {
        prices: prices.clone(),
        park,
        input,
        grid,
    })
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: PriceChromosome,
    pub best_fitness: f64,
    /// Best fitness after each generation, starting with the initial one.
    pub trace: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct EvolveResult {
    pub best: PriceChromosome,
    pub evaluation: PriceEvaluation,
    pub trace: Vec<f64>,
    pub converged: bool,
    /// Grid cost of the configured tariff, for reference.
    pub baseline: PriceEvaluation,
}

/// Runs the genetic algorithm on the park/grid game.
pub fn evolve(ga: &GaConfig, cfg: &SystemConfig, flags: ScenarioFlags) -> Result<EvolveResult, GaError> {
    ga.validate().map_err(GaError::Config)?;
    let (floor, cap) = (cfg.upper.price_floor, cfg.upper.price_cap);
    let seed_chrom = PriceChromosome::from_tou(&cfg.tariff, floor, cap)?;
    let fitness = |c: &PriceChromosome| {
        evaluate_prices(cfg, flags, &c.decode()).map(|e| e.grid.total)
    };
    let mut initial = vec![seed_chrom.clone()];
    initial.extend(random_population(ga, floor, cap, ga.population - 1));
    let out = evolve_with(ga, floor, cap, initial, fitness)?;
    let evaluation = evaluate_prices(cfg, flags, &out.best.decode()).map_err(|last| GaError::AllPenalized {
        generation: out.trace.len(),
        last,
    })?;
    let baseline = evaluate_prices(cfg, flags, &seed_chrom.decode()).map_err(|last| {
        GaError::AllPenalized {
            generation: 0,
            last,
        }
    })?;
    Ok(EvolveResult {
        best: out.best,
        evaluation,
        trace: out.trace,
        converged: out.converged,
        baseline,
    })
}

fn rng_for(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(((generation as u64) << 32) | index as u64);
    r
}

/// `count` random chromosomes drawn from the stream of generation 0,
/// offset by one so index 0 stays free for a seeded individual.
pub fn random_population(ga: &GaConfig, floor: f64, cap: f64, count: usize) -> Vec<PriceChromosome> {
    (0..count)
        .map(|i| random_chromosome(&mut rng_for(ga.seed, 0, i + 1), ga, floor, cap))
        .collect()
}

fn random_chromosome(rng: &mut ChaCha8Rng, ga: &GaConfig, floor: f64, cap: f64) -> PriceChromosome {
    let k = rng.gen_range(ga.min_segments..=ga.max_segments);
    let mut starts = rand::seq::index::sample(rng, SLOTS - 1, k - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect::<Vec<_>>();
    starts.sort_unstable();
    let mut segs = vec![(0, rng.gen_range(floor..=cap))];
    segs.extend(starts.into_iter().map(|s| (s, rng.gen_range(floor..=cap))));
    PriceChromosome::new(segs, floor, cap).expect("constructed within bounds")
}

/// The GA loop over an arbitrary fitness. Individuals whose fitness fails
/// get [`PENALTY`].
pub fn evolve_with<F>(
    ga: &GaConfig,
    floor: f64,
    cap: f64,
    initial: Vec<PriceChromosome>,
    fitness: F,
) -> Result<GaOutcome, GaError>
where
    F: Fn(&PriceChromosome) -> Result<f64, String> + Sync,
{
    ga.validate().map_err(GaError::Config)?;
    if initial.is_empty() {
        return Err(GaError::Config("initial population is empty".into()));
    }
    let cache: Mutex<HashMap<Vec<(usize, u64)>, Result<f64, String>>> = Mutex::new(HashMap::new());
    let score = |pop: &[PriceChromosome]| -> Vec<Result<f64, String>> {
        pop.par_iter()
            .map(|c| {
                let key = c.key();
                if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
                    return hit.clone();
                }
                let r = fitness(c).and_then(|f| {
                    if f.is_finite() {
                        Ok(f)
                    } else {
                        Err(format!("non-finite fitness {f}"))
                    }
                });
                cache.lock().expect("cache lock").insert(key, r.clone());
                r
            })
            .collect()
    };
    let flatten = |r: &[Result<f64, String>]| -> Vec<f64> {
        r.iter().map(|x| x.as_ref().map_or(PENALTY, |f| f.min(PENALTY))).collect()
    };

    let mut pop = initial;
    let raw = score(&pop);
    let mut fit = flatten(&raw);
    check_penalized(&raw, &fit, 0)?;
    let mut best_i = argmin(&fit);
    let mut best = (pop[best_i].clone(), fit[best_i]);
    let mut trace = vec![best.1];
    let mut still = 0;
    let mut converged = false;

    for generation in 1..ga.generations {
        let size = ga.population.max(1);
        let mut next = Vec::with_capacity(size);
        next.push(best.0.clone());
        let children: Vec<PriceChromosome> = (1..size)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_for(ga.seed, generation, i);
                let a = tournament(&mut rng, &fit);
                let b = tournament(&mut rng, &fit);
                let mut child = if rng.gen::<f64>() < ga.crossover_rate {
                    crossover(&mut rng, &pop[a], &pop[b], ga)
                } else {
                    pop[a].clone()
                };
                mutate(&mut rng, &mut child, ga, floor, cap);
                child
            })
            .collect();
        next.extend(children);
        pop = next;
        let raw = score(&pop);
        fit = flatten(&raw);
        check_penalized(&raw, &fit, generation)?;
        best_i = argmin(&fit);
        let prev = best.1;
        if fit[best_i] < best.1 {
            best = (pop[best_i].clone(), fit[best_i]);
        }
        trace.push(best.1);
        if (prev - best.1).abs() < ga.epsilon {
            still += 1;
            if still >= ga.patience {
                converged = true;
                break;
            }
        } else {
            still = 0;
        }
    }
    Ok(GaOutcome {
        best: best.0,
        best_fitness: best.1,
        trace,
        converged,
    })
}

fn check_penalized(raw: &[Result<f64, String>], fit: &[f64], generation: usize) -> Result<(), GaError> {
    if fit.iter().all(|&f| f >= PENALTY) {
        let last = raw
            .iter()
            .rev()
            .find_map(|r| r.as_ref().err().cloned())
            .unwrap_or_else(|| "fitness at or above the penalty value".into());
        return Err(GaError::AllPenalized { generation, last });
    }
    Ok(())
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn tournament(rng: &mut ChaCha8Rng, fit: &[f64]) -> usize {
    let a = rng.gen_range(0..fit.len());
    let b = rng.gen_range(0..fit.len());
    if fit[b] < fit[a] {
        b
    } else {
        a
    }
}

/// Head of `a` before a random cut slot, tail of `b` from it.
fn crossover(rng: &mut ChaCha8Rng, a: &PriceChromosome, b: &PriceChromosome, ga: &GaConfig) -> PriceChromosome {
    let cut = rng.gen_range(1..SLOTS);
    let mut segs: Vec<(usize, f64)> = a.segments.iter().copied().filter(|s| s.0 < cut).collect();
    let at_cut = b.segments.iter().rev().find(|s| s.0 <= cut).expect("first segment starts at 0").1;
    segs.push((cut, at_cut));
    segs.extend(b.segments.iter().copied().filter(|s| s.0 > cut));
    repair(rng, &mut segs, ga);
    PriceChromosome { segments: segs }
}

/// Brings the segment count back within the configured range.
fn repair(rng: &mut ChaCha8Rng, segs: &mut Vec<(usize, f64)>, ga: &GaConfig) {
    while segs.len() > ga.max_segments {
        let i = rng.gen_range(1..segs.len());
        let merged = 0.5 * (segs[i - 1].1 + segs[i].1);
        segs[i - 1].1 = merged;
        segs.remove(i);
    }
    while segs.len() < ga.min_segments {
        split(rng, segs);
    }
}

fn split(rng: &mut ChaCha8Rng, segs: &mut Vec<(usize, f64)>) {
    // pick a segment longer than one slot
    let spans: Vec<(usize, usize, usize)> = segs
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.0, segs.get(i + 1).map_or(SLOTS, |n| n.0)))
        .filter(|&(_, a, b)| b - a > 1)
        .collect();
    if spans.is_empty() {
        return;
    }
    let (i, a, b) = spans[rng.gen_range(0..spans.len())];
    let at = rng.gen_range(a + 1..b);
    segs.insert(i + 1, (at, segs[i].1));
}

fn mutate(rng: &mut ChaCha8Rng, c: &mut PriceChromosome, ga: &GaConfig, floor: f64, cap: f64) {
    if ga.mutation_rate <= 0.0 {
        return;
    }
    let normal = Normal::new(0.0, 0.05 * (cap - floor)).expect("positive spread");
    for s in c.segments.iter_mut() {
        if rng.gen::<f64>() < ga.mutation_rate {
            s.1 = (s.1 + normal.sample(rng)).clamp(floor, cap);
        }
    }
    if rng.gen::<f64>() < ga.mutation_rate {
        let grow = rng.gen::<bool>();
        if grow && c.segments.len() < ga.max_segments {
            let before: Vec<usize> = c.segments.iter().map(|s| s.0).collect();
            split(rng, &mut c.segments);
            // the new piece gets its own price
            if let Some(s) = c.segments.iter_mut().find(|s| !before.contains(&s.0)) {
                s.1 = rng.gen_range(floor..=cap);
            }
        } else if !grow && c.segments.len() > ga.min_segments {
            let i = rng.gen_range(1..c.segments.len());
            let merged = 0.5 * (c.segments[i - 1].1 + c.segments[i].1);
            c.segments[i - 1].1 = merged;
            c.segments.remove(i);
        }
    }
}

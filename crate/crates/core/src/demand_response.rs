//! Storage, electric and thermal demand response, and building comfort.

use serde::{Deserialize, Serialize};

use crate::devices::{check_eff, check_nonneg, check_pos};
use crate::error::StorageError;
use crate::model::{period_of, TimeProfile, TouPriceSchedule, Unit, DT_HOURS, SLOTS};

/// Generic energy store, used for both the battery and the heat tank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageParams {
    /// kWh.
    pub capacity: f64,
    pub eta_ch: f64,
    pub eta_dis: f64,
    /// kW.
    pub p_ch_max: f64,
    pub p_dis_max: f64,
    /// Initial (and, by the cyclic condition, final) energy, kWh.
    pub q0: f64,
}

impl StorageParams {
    pub fn validate(&self, name: &str) -> Result<(), String> {
        check_eff(&format!("{name}.eta_ch"), self.eta_ch)?;
        check_eff(&format!("{name}.eta_dis"), self.eta_dis)?;
        check_nonneg(&format!("{name}.capacity"), self.capacity)?;
        check_nonneg(&format!("{name}.p_ch_max"), self.p_ch_max)?;
        check_nonneg(&format!("{name}.p_dis_max"), self.p_dis_max)?;
        if !(0.0..=self.capacity).contains(&self.q0) {
            return Err(format!("{name}.q0 must lie in [0, capacity]"));
        }
        Ok(())
    }
}

/// Advances the state of charge by one slot.
pub fn storage_step(
    q_prev: f64,
    p_ch: f64,
    p_dis: f64,
    p: &StorageParams,
) -> Result<f64, StorageError> {
    if p_ch > 0.0 && p_dis > 0.0 {
        return Err(StorageError::SimultaneousChargeDischarge {
            charge: p_ch,
            discharge: p_dis,
        });
    }
    if !(0.0..=p.p_ch_max).contains(&p_ch) {
        return Err(StorageError::PowerLimit {
            what: "charge",
            value: p_ch,
            limit: p.p_ch_max,
        });
    }
    if !(0.0..=p.p_dis_max).contains(&p_dis) {
        return Err(StorageError::PowerLimit {
            what: "discharge",
            value: p_dis,
            limit: p.p_dis_max,
        });
    }
    let q = q_prev + (p.eta_ch * p_ch - p_dis / p.eta_dis) * DT_HOURS;
    if q < 0.0 || q > p.capacity {
        return Err(StorageError::StateOfCharge {
            soc: q,
            capacity: p.capacity,
        });
    }
    Ok(q)
}

/// Own- and cross-price elasticities of electric demand; row `t` gives the
/// response of slot `t` to price changes in every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ElasticityMatrix {
    e: Vec<[f64; SLOTS]>,
}

impl TryFrom<Vec<Vec<f64>>> for ElasticityMatrix {
    type Error = String;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let fixed = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                <[f64; SLOTS]>::try_from(r.as_slice())
                    .map_err(|_| format!("elasticity row {i} has {} columns", r.len()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(fixed)
    }
}

impl From<ElasticityMatrix> for Vec<Vec<f64>> {
    fn from(m: ElasticityMatrix) -> Self {
        m.e.iter().map(|r| r.to_vec()).collect()
    }
}

impl ElasticityMatrix {
    pub fn new(rows: Vec<[f64; SLOTS]>) -> Result<Self, String> {
        if rows.len() != SLOTS {
            return Err(format!("elasticity matrix needs 24 rows, got {}", rows.len()));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(format!("elasticity ({i},{j}) is not finite"));
                }
                if i == j && v > 0.0 {
                    return Err(format!("self-elasticity ({i},{i}) = {v} must be <= 0"));
                }
                if i != j && v < 0.0 {
                    return Err(format!("cross-elasticity ({i},{j}) = {v} must be >= 0"));
                }
            }
        }
        Ok(Self { e: rows })
    }

    /// `own` on the diagonal, `cross` between slots of different tariff
    /// periods, zero between distinct slots of the same period.
    pub fn by_period(schedule: &TouPriceSchedule, own: f64, cross: f64) -> Result<Self, String> {
        let rows = (0..SLOTS)
            .map(|i| {
                let mut row = [0.0; SLOTS];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j {
                        own
                    } else if period_of(i, schedule) != period_of(j, schedule) {
                        cross
                    } else {
                        0.0
                    };
                }
                row
            })
            .collect();
        Self::new(rows)
    }

    /// Headerless 24x24 CSV.
    pub fn from_csv_str(text: &str) -> Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            if rec.len() != SLOTS {
                return Err(format!("elasticity row {i} has {} columns", rec.len()));
            }
            let mut row = [0.0; SLOTS];
            for (j, f) in rec.iter().enumerate() {
                row[j] = f
                    .parse()
                    .map_err(|_| format!("elasticity ({i},{j}): cannot parse `{f}`"))?;
            }
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.e[i][j]
    }

    pub fn rows(&self) -> &[[f64; SLOTS]] {
        &self.e
    }
}

/// Price-based load change per slot for the PBDR-eligible `base_load`.
///
/// The cross terms use the relative price change of the *other* slot,
/// `dP_s / P_s`; the printed index mixes `i` and `j` there, which is read as
/// a typo.
pub fn pbdr_adjustment(
    base_load: &TimeProfile,
    old_prices: &TimeProfile,
    new_prices: &TimeProfile,
    e: &ElasticityMatrix,
) -> [f64; SLOTS] {
    let rel: Vec<f64> = (0..SLOTS)
        .map(|s| (new_prices[s] - old_prices[s]) / old_prices[s])
        .collect();
    let mut out = [0.0; SLOTS];
    for (t, o) in out.iter_mut().enumerate() {
        let resp: f64 = (0..SLOTS).map(|s| e.get(t, s) * rel[s]).sum();
        *o = base_load[t] * resp;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbdrTier {
    /// Compensation, CNY/kWh.
    pub price: f64,
    pub max_up: f64,
    pub max_down: f64,
}

/// Stepped incentive offer for one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbdrOffer {
    /// Contracted adjustment, kWh (signed, positive increases load).
    pub contract: f64,
    pub tiers: Vec<IbdrTier>,
}

impl IbdrOffer {
    pub fn validate(&self) -> Result<(), String> {
        if self.tiers.is_empty() {
            return Err("IBDR offer needs at least one tier".into());
        }
        if self.tiers.windows(2).any(|w| w[1].price <= w[0].price) {
            return Err("IBDR tier prices must be strictly increasing".into());
        }
        for t in &self.tiers {
            check_nonneg("ibdr.price", t.price)?;
            check_nonneg("ibdr.max_up", t.max_up)?;
            check_nonneg("ibdr.max_down", t.max_down)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbdrResponse {
    pub up: f64,
    pub down: f64,
    pub compensation: f64,
}

impl IbdrResponse {
    /// Energy moved by the tiers, kWh.
    pub fn delivered(&self) -> f64 {
        self.up + self.down
    }

    /// Net load change including the contracted part.
    pub fn net_adjustment(&self, offer: &IbdrOffer) -> f64 {
        offer.contract + self.up - self.down
    }
}

/// Fills tiers cheapest first. `requested > 0` asks for more load,
/// `requested < 0` for less; anything beyond total capability is dropped.
pub fn ibdr_response(requested: f64, offer: &IbdrOffer) -> IbdrResponse {
    let mut remaining = requested.abs();
    let mut moved = 0.0;
    let mut compensation = 0.0;
    for tier in &offer.tiers {
        let cap = if requested >= 0.0 { tier.max_up } else { tier.max_down };
        let q = remaining.min(cap);
        moved += q;
        compensation += q * tier.price;
        remaining -= q;
        if remaining <= 0.0 {
            break;
        }
    }
    let (up, down) = if requested >= 0.0 { (moved, 0.0) } else { (0.0, moved) };
    IbdrResponse {
        up,
        down,
        compensation,
    }
}

/// Occupant comfort and lumped building thermal model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComfortParams {
    /// Mean skin temperature under comfort, degC.
    pub t_skin: f64,
    /// Metabolic rate, W/m2.
    pub metabolic: f64,
    /// Clothing insulation, m2 K/W.
    pub i_cl: f64,
    /// Envelope heat transfer coefficient times area, kW/K.
    pub kf: f64,
    /// Specific heat of air, kJ/(kg K).
    pub alpha_air: f64,
    /// Air density, kg/m3.
    pub rho_air: f64,
    /// Heated volume, m3.
    pub volume: f64,
    /// Indoor set point the base heat load is sized for, degC.
    pub t_set: f64,
    pub pmv_night: f64,
    pub pmv_day_max: f64,
    pub pmv_day_min: f64,
}

impl ComfortParams {
    pub fn validate(&self) -> Result<(), String> {
        for (n, v) in [
            ("comfort.metabolic", self.metabolic),
            ("comfort.i_cl", self.i_cl),
            ("comfort.kf", self.kf),
            ("comfort.alpha_air", self.alpha_air),
            ("comfort.rho_air", self.rho_air),
            ("comfort.volume", self.volume),
        ] {
            check_pos(n, v)?;
        }
        if !(self.pmv_night > 0.0 && self.pmv_day_min < self.pmv_day_max) {
            return Err("comfort PMV limits are inconsistent".into());
        }
        // the set point must be admissible in every slot
        let (d_lo, d_hi) = comfort_band(12, self);
        let (n_lo, n_hi) = comfort_band(0, self);
        let (lo, hi) = (d_lo.max(n_lo), d_hi.min(n_hi));
        if !(lo..=hi).contains(&self.t_set) {
            return Err(format!(
                "comfort.t_set {} lies outside the comfort band [{lo:.3}, {hi:.3}]",
                self.t_set
            ));
        }
        Ok(())
    }

    /// Lumped heat capacity of the indoor air, kWh/K.
    pub fn heat_capacity(&self) -> f64 {
        self.alpha_air * self.rho_air * self.volume / 3600.0
    }

    fn scale(&self) -> f64 {
        self.metabolic * (self.i_cl + 0.1)
    }
}

/// Predicted mean vote at indoor temperature `t_in`.
pub fn pmv(t_in: f64, c: &ComfortParams) -> f64 {
    2.43 - 3.76 * (c.t_skin - t_in) / c.scale()
}

/// Inverse of [`pmv`].
pub fn temperature_at_pmv(lambda: f64, c: &ComfortParams) -> f64 {
    c.t_skin - (2.43 - lambda) * c.scale() / 3.76
}

/// Whether slot `slot` (covering `slot:00`-`slot+1:00`) falls in the daytime
/// comfort window 07:00-19:00.
pub fn is_day_slot(slot: usize) -> bool {
    (7..=18).contains(&slot)
}

/// Admissible indoor temperature range during `slot`.
pub fn comfort_band(slot: usize, c: &ComfortParams) -> (f64, f64) {
    if is_day_slot(slot) {
        (
            temperature_at_pmv(c.pmv_day_min, c),
            temperature_at_pmv(c.pmv_day_max, c),
        )
    } else {
        (
            temperature_at_pmv(-c.pmv_night, c),
            temperature_at_pmv(c.pmv_night, c),
        )
    }
}

/// One explicit Euler step of the building heat balance.
pub fn room_temperature_step(t_in: f64, t_out: f64, heat_power: f64, c: &ComfortParams) -> f64 {
    t_in + DT_HOURS * (heat_power - (t_in - t_out) * c.kf) / c.heat_capacity()
}

/// Per-slot limits on shiftable and curtailable heat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalDrBounds {
    pub shift_min: Vec<f64>,
    pub shift_max: Vec<f64>,
    pub curtail_max: Vec<f64>,
}

impl ThermalDrBounds {
    pub fn validate(&self) -> Result<(), String> {
        let n = self.shift_min.len();
        if self.shift_max.len() != n || self.curtail_max.len() != n {
            return Err("thermal DR bound vectors differ in length".into());
        }
        for t in 0..n {
            if self.shift_min[t] > self.shift_max[t] {
                return Err(format!("thermal DR slot {t}: shift_min > shift_max"));
            }
            if self.curtail_max[t] < 0.0 {
                return Err(format!("thermal DR slot {t}: negative curtailment cap"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThermalDrViolation {
    ShiftBelowMin { slot: usize, value: f64, min: f64 },
    ShiftAboveMax { slot: usize, value: f64, max: f64 },
    Curtail { slot: usize, value: f64, cap: f64 },
    NonZeroShiftSum { sum: f64 },
}

impl std::fmt::Display for ThermalDrViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::ShiftBelowMin { slot, value, min } => {
                write!(f, "slot {slot}: shift {value} below minimum {min}")
            }
            Self::ShiftAboveMax { slot, value, max } => {
                write!(f, "slot {slot}: shift {value} above maximum {max}")
            }
            Self::Curtail { slot, value, cap } => {
                write!(f, "slot {slot}: curtailment {value} outside [0, {cap}]")
            }
            Self::NonZeroShiftSum { sum } => write!(f, "shifted heat sums to {sum}, not 0"),
        }
    }
}

/// Checks shift/curtail vectors against their bounds and the requirement
/// that shifted heat is energy neutral over the day.
pub fn thermal_dr_feasible(
    shift: &[f64],
    curtail: &[f64],
    b: &ThermalDrBounds,
    tol: f64,
) -> Result<(), ThermalDrViolation> {
    for (t, &s) in shift.iter().enumerate() {
        if s < b.shift_min[t] - tol {
            return Err(ThermalDrViolation::ShiftBelowMin {
                slot: t,
                value: s,
                min: b.shift_min[t],
            });
        }
        if s > b.shift_max[t] + tol {
            return Err(ThermalDrViolation::ShiftAboveMax {
                slot: t,
                value: s,
                max: b.shift_max[t],
            });
        }
    }
    for (t, &c) in curtail.iter().enumerate() {
        if c < -tol || c > b.curtail_max[t] + tol {
            return Err(ThermalDrViolation::Curtail {
                slot: t,
                value: c,
                cap: b.curtail_max[t],
            });
        }
    }
    let sum: f64 = shift.iter().sum();
    if sum.abs() > tol {
        return Err(ThermalDrViolation::NonZeroShiftSum { sum });
    }
    Ok(())
}

/// How the electric load splits across response classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrShares {
    pub fixed: f64,
    pub transferable: f64,
    pub reducible: f64,
    pub replaceable: f64,
}

impl DrShares {
    pub fn validate(&self) -> Result<(), String> {
        let parts = [self.fixed, self.transferable, self.reducible, self.replaceable];
        if parts.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err("DR shares must each lie in [0, 1]".into());
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(format!("DR shares must sum to 1, got {sum}"));
        }
        Ok(())
    }
}

/// One IBDR tier expressed relative to the reducible load of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbdrTierShare {
    pub price: f64,
    pub up_fraction: f64,
    pub down_fraction: f64,
}

/// Demand response settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrParams {
    pub shares: DrShares,
    /// Flat price the customers are used to; PBDR responds to the TOU
    /// deviation from it.
    pub reference_price: f64,
    pub own_elasticity: f64,
    pub cross_elasticity: f64,
    pub ibdr_contract: f64,
    pub ibdr_tiers: Vec<IbdrTierShare>,
    /// Heat delivered per kWh of replaceable electric load moved to heat.
    pub replace_heat_ratio: f64,
    /// Shiftable share of the thermal load, each way.
    pub thermal_shift_share: f64,
    pub thermal_curtail_share: f64,
    /// CNY/kWh paid for curtailed heat.
    pub thermal_curtail_price: f64,
    /// Replaces the period-class default matrix when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elasticity: Option<ElasticityMatrix>,
}

impl DrParams {
    pub fn validate(&self) -> Result<(), String> {
        self.shares.validate()?;
        check_pos("dr.reference_price", self.reference_price)?;
        if self.own_elasticity > 0.0 || self.cross_elasticity < 0.0 {
            return Err("dr: own elasticity must be <= 0 and cross elasticity >= 0".into());
        }
        if self.ibdr_tiers.is_empty()
            || self.ibdr_tiers.windows(2).any(|w| w[1].price <= w[0].price)
        {
            return Err("dr.ibdr_tiers must be non-empty with strictly increasing prices".into());
        }
        let (up, down) = self.ibdr_tiers.iter().fold((0.0, 0.0), |(u, d), t| {
            (u + t.up_fraction, d + t.down_fraction)
        });
        if self.ibdr_tiers.iter().any(|t| t.price < 0.0 || t.up_fraction < 0.0 || t.down_fraction < 0.0)
            || up > 1.0 + 1e-12
            || down > 1.0 + 1e-12
        {
            return Err("dr.ibdr_tiers fractions must be non-negative and sum to at most 1".into());
        }
        check_nonneg("dr.replace_heat_ratio", self.replace_heat_ratio)?;
        check_nonneg("dr.thermal_curtail_price", self.thermal_curtail_price)?;
        if !(0.0..=1.0).contains(&self.thermal_shift_share)
            || !(0.0..=1.0).contains(&self.thermal_curtail_share)
        {
            return Err("dr thermal shares must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// IBDR offer for a slot whose reducible load is `reducible` kWh.
    pub fn offer_for(&self, reducible: f64) -> IbdrOffer {
        IbdrOffer {
            contract: self.ibdr_contract,
            tiers: self
                .ibdr_tiers
                .iter()
                .map(|t| IbdrTier {
                    price: t.price,
                    max_up: t.up_fraction * reducible,
                    max_down: t.down_fraction * reducible,
                })
                .collect(),
        }
    }

    pub fn thermal_bounds(&self, thermal_load: &[f64]) -> ThermalDrBounds {
        ThermalDrBounds {
            shift_min: thermal_load.iter().map(|l| -self.thermal_shift_share * l).collect(),
            shift_max: thermal_load.iter().map(|l| self.thermal_shift_share * l).collect(),
            curtail_max: thermal_load.iter().map(|l| self.thermal_curtail_share * l).collect(),
        }
    }

    /// PBDR load change of the transferable share under `prices`.
    pub fn pbdr_for(
        &self,
        electric_load: &TimeProfile,
        prices: &TimeProfile,
        e: &ElasticityMatrix,
    ) -> [f64; SLOTS] {
        let eligible = electric_load
            .map(Unit::Kilowatt, |v| v * self.shares.transferable)
            .expect("scaled load stays non-negative");
        let reference = TimeProfile::constant(self.reference_price, Unit::YuanPerKwh)
            .expect("validated reference price");
        pbdr_adjustment(&eligible, &reference, prices, e)
    }

    /// The configured matrix, or the period-class default for `schedule`.
    pub fn elasticity_for(&self, schedule: &TouPriceSchedule) -> ElasticityMatrix {
        self.elasticity.clone().unwrap_or_else(|| {
            ElasticityMatrix::by_period(schedule, self.own_elasticity, self.cross_elasticity)
                .expect("signs validated")
        })
    }
}

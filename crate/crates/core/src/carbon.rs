//! Free quota allocation, emission accounting and tiered carbon trading.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::devices::{check_nonneg, check_pos};
use crate::model::DT_HOURS;

/// Number of price tiers.
pub const TIERS: usize = 5;

/// Treatment of unused quota.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurplusCredit {
    /// Surplus quota earns nothing.
    None,
    /// Surplus quota is sold at the base price.
    FlatBeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarbonMarketParams {
    /// Base price, CNY/kg.
    pub beta: f64,
    /// Price escalation per tier.
    pub zeta: f64,
    /// Tier width, kg.
    pub l: f64,
    /// Free quota per kWh purchased from the grid, kg/kWh.
    pub lambda_e: f64,
    /// Free quota per kWh of gas-boiler heat, kg/kWh.
    pub lambda_g: f64,
    /// Grid emission factor, kg/kWh.
    pub f_grid: f64,
    pub surplus_credit: SurplusCredit,
    /// Whether the flat-priced carbon cost of the scenarios without trading
    /// enters their dispatch objective. It is reported either way.
    #[serde(default)]
    pub baseline_carbon_in_objective: bool,
}

impl CarbonMarketParams {
    pub fn validate(&self) -> Result<(), String> {
        check_pos("carbon.beta", self.beta)?;
        check_nonneg("carbon.zeta", self.zeta)?;
        check_pos("carbon.l", self.l)?;
        check_nonneg("carbon.lambda_e", self.lambda_e)?;
        check_nonneg("carbon.lambda_g", self.lambda_g)?;
        check_nonneg("carbon.f_grid", self.f_grid)
    }

    /// Marginal price of tier `k` (0-based).
    pub fn marginal_price(&self, k: usize) -> f64 {
        self.beta * (1.0 + k as f64 * self.zeta)
    }

    /// Cost accumulated at the start of tier `k`, i.e. at `E = k*l`.
    pub fn tier_base(&self, k: usize) -> f64 {
        let k = k as f64;
        self.beta * (k + self.zeta * k * (k - 1.0) / 2.0) * self.l
    }

    /// `(slope, intercept)` of each tier's supporting line. The tiered cost
    /// on `E >= 0` is the pointwise maximum of these lines; for `E < 0` the
    /// maximum is `beta * E`, which is exactly the flat-price surplus credit.
    pub fn tier_lines(&self) -> [(f64, f64); TIERS] {
        std::array::from_fn(|k| {
            let m = self.marginal_price(k);
            (m, self.tier_base(k) - m * k as f64 * self.l)
        })
    }
}

/// Tiered trading cost of `e` kg of emissions in excess of quota. Zero for
/// `e <= 0`; see [`settle`] for surplus handling.
pub fn tiered_trading_cost(e: f64, m: &CarbonMarketParams) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    let l = m.l;
    let b = m.beta;
    let z = m.zeta;
    if e <= l {
        b * e
    } else if e <= 2.0 * l {
        b * (1.0 + z) * (e - l) + b * l
    } else if e <= 3.0 * l {
        b * (1.0 + 2.0 * z) * (e - 2.0 * l) + b * (2.0 + z) * l
    } else if e <= 4.0 * l {
        b * (1.0 + 3.0 * z) * (e - 3.0 * l) + b * (3.0 + 3.0 * z) * l
    } else {
        b * (1.0 + 4.0 * z) * (e - 4.0 * l) + b * (4.0 + 6.0 * z) * l
    }
}

/// Emissions of purchased electricity per slot, kg.
pub fn grid_purchase_emissions(p_buy: &[f64], f_grid: f64) -> Vec<f64> {
    p_buy.iter().map(|p| f_grid * p * DT_HOURS).collect()
}

/// Free allocation for the day, kg.
pub fn allocate_quota(p_buy: &[f64], p_gb_heat: &[f64], m: &CarbonMarketParams) -> f64 {
    let e: f64 = p_buy.iter().sum::<f64>() * DT_HOURS;
    let g: f64 = p_gb_heat.iter().sum::<f64>() * DT_HOURS;
    m.lambda_e * e + m.lambda_g * g
}

#[derive(Debug, Error, PartialEq)]
pub enum LedgerError {
    #[error("{name} has {got} slots, expected {expected}")]
    Length {
        name: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{name} is negative or not finite at slot {slot}")]
    Value { name: &'static str, slot: usize },
}

/// Physical quantities a settlement is computed from.
#[derive(Debug, Clone, Copy)]
pub struct LedgerInputs<'a> {
    /// kW per slot.
    pub grid_buy: &'a [f64],
    /// Nm3 per slot.
    pub gt_gas: &'a [f64],
    /// Nm3 per slot.
    pub gb_gas: &'a [f64],
    /// kW per slot.
    pub gb_heat: &'a [f64],
    /// kgCO2 per Nm3 of gas burnt.
    pub gas_co2_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarbonLedger {
    pub trading_enabled: bool,
    /// Free allocation, kg. Zero when trading is disabled.
    pub quota: f64,
    pub grid_purchase: f64,
    pub gas_turbine: f64,
    pub gas_boiler: f64,
    /// Total actual emissions, kg.
    pub actual: f64,
    /// `actual - quota`, kg.
    pub net: f64,
    /// Carbon cost, CNY. Negative when surplus quota is sold.
    pub cost: f64,
    /// Direct on-site (gas) emissions per slot.
    pub onsite_per_slot: Vec<f64>,
    /// Grid-purchase emissions per slot.
    pub purchase_per_slot: Vec<f64>,
}

impl CarbonLedger {
    /// Residual of the system carbon balance: total = on-site + purchased,
    /// and on-site = turbine + boiler.
    pub fn balance_residual(&self) -> f64 {
        let onsite: f64 = self.onsite_per_slot.iter().sum();
        let bought: f64 = self.purchase_per_slot.iter().sum();
        let r1 = self.actual - (onsite + bought);
        let r2 = onsite - (self.gas_turbine + self.gas_boiler);
        let r3 = bought - self.grid_purchase;
        r1.abs().max(r2.abs()).max(r3.abs())
    }
}

/// Builds the day's carbon ledger. With trading enabled the tiered cost is
/// charged on emissions above quota and surplus follows `surplus_credit`;
/// without trading the quota is zero and every kilogram is priced at `beta`.
pub fn settle(
    inputs: LedgerInputs<'_>,
    m: &CarbonMarketParams,
    trading_enabled: bool,
) -> Result<CarbonLedger, LedgerError> {
    let n = inputs.grid_buy.len();
    for (name, v) in [
        ("grid_buy", inputs.grid_buy),
        ("gt_gas", inputs.gt_gas),
        ("gb_gas", inputs.gb_gas),
        ("gb_heat", inputs.gb_heat),
    ] {
        if v.len() != n {
            return Err(LedgerError::Length {
                name,
                got: v.len(),
                expected: n,
            });
        }
        // solver noise around zero is tolerated
        if let Some(slot) = v.iter().position(|x| !x.is_finite() || *x < -1e-7) {
            return Err(LedgerError::Value { name, slot });
        }
    }
    let purchase_per_slot = grid_purchase_emissions(inputs.grid_buy, m.f_grid);
    let gt: Vec<f64> = inputs.gt_gas.iter().map(|g| inputs.gas_co2_factor * g).collect();
    let gb: Vec<f64> = inputs.gb_gas.iter().map(|g| inputs.gas_co2_factor * g).collect();
    let onsite_per_slot: Vec<f64> = gt.iter().zip(&gb).map(|(a, b)| a + b).collect();
    let grid_purchase: f64 = purchase_per_slot.iter().sum();
    let gas_turbine: f64 = gt.iter().sum();
    let gas_boiler: f64 = gb.iter().sum();
    let actual = grid_purchase + gas_turbine + gas_boiler;
    let (quota, cost) = if trading_enabled {
        let quota = allocate_quota(inputs.grid_buy, inputs.gb_heat, m);
        let net = actual - quota;
        let cost = if net >= 0.0 {
            tiered_trading_cost(net, m)
        } else {
            match m.surplus_credit {
                SurplusCredit::None => 0.0,
                SurplusCredit::FlatBeta => m.beta * net,
            }
        };
        (quota, cost)
    } else {
        (0.0, m.beta * actual)
    };
    Ok(CarbonLedger {
        trading_enabled,
        quota,
        grid_purchase,
        gas_turbine,
        gas_boiler,
        actual,
        net: actual - quota,
        cost,
        onsite_per_slot,
        purchase_per_slot,
    })
}

use serde::{Deserialize, Serialize};

/// Which market mechanisms are active in a dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScenarioFlags {
    pub carbon_trading_enabled: bool,
    pub demand_response_enabled: bool,
}

/// The four comparison cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    /// Neither carbon trading nor demand response.
    Baseline,
    DemandResponseOnly,
    CarbonTradingOnly,
    Combined,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Baseline,
        Scenario::DemandResponseOnly,
        Scenario::CarbonTradingOnly,
        Scenario::Combined,
    ];

    pub fn number(self) -> u8 {
        match self {
            Scenario::Baseline => 1,
            Scenario::DemandResponseOnly => 2,
            Scenario::CarbonTradingOnly => 3,
            Scenario::Combined => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.number() == n)
    }

    pub fn flags(self) -> ScenarioFlags {
        let (ct, dr) = match self {
            Scenario::Baseline => (false, false),
            Scenario::DemandResponseOnly => (false, true),
            Scenario::CarbonTradingOnly => (true, false),
            Scenario::Combined => (true, true),
        };
        ScenarioFlags {
            carbon_trading_enabled: ct,
            demand_response_enabled: dr,
        }
    }

    pub fn from_flags(flags: ScenarioFlags) -> Self {
        Self::ALL
            .into_iter()
            .find(|s| s.flags() == flags)
            .expect("every flag combination is a scenario")
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S{}", self.number())
    }
}

//! Day-ahead scheduling of a rural integrated energy system with biomass
//! conversion, demand response and tiered carbon trading, plus a grid
//! pricing game and parameter sensitivity sweeps.

pub mod bilevel;
pub mod biomass;
pub mod carbon;
pub mod demand_response;
pub mod devices;
pub mod dispatch;
pub mod error;
pub mod model;
pub mod scenarios;
pub mod sensitivity;

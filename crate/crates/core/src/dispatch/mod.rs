//! Lower-level park dispatch as a linear program.

mod build;
mod export;
mod input;
mod lp;
mod normal;
mod solution;
mod verify;

pub use build::{build_lp, capacity_check, DispatchLp};
pub use export::{schedule_columns, schedule_csv, summary, DispatchSummary};
pub use input::{DispatchInput, GB_SEGMENTS, TIE_BREAK};
pub use lp::{Cmp, LpModel, LpRow, LpVar};
pub use normal::inverse_normal_cdf;
pub use solution::{
    cost_breakdown, ledger_for, solve_dispatch, solve_lp, CostBreakdown, DispatchSolution, Schedule,
};
pub use verify::{verify_solution, FamilyCheck, VerifyReport, BALANCE_TOL, IDENTITY_TOL};

//! A self-describing linear program and its hand-off to the simplex solver.

use std::collections::BTreeMap;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::error::DispatchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cmp {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpVar {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpRow {
    pub family: &'static str,
    pub slot: Option<usize>,
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// Minimisation problem: columns with bounds and costs, rows grouped into
/// named constraint families.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LpModel {
    pub vars: Vec<LpVar>,
    pub rows: Vec<LpRow>,
}

impl LpModel {
    pub fn var(&mut self, name: impl Into<String>, lo: f64, hi: f64, cost: f64) -> usize {
        self.vars.push(LpVar {
            name: name.into(),
            lo,
            hi,
            cost,
        });
        self.vars.len() - 1
    }

    pub fn row(
        &mut self,
        family: &'static str,
        slot: Option<usize>,
        terms: Vec<(usize, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) {
        self.rows.push(LpRow {
            family,
            slot,
            terms,
            cmp,
            rhs,
        });
    }

    pub fn add_cost(&mut self, v: usize, c: f64) {
        self.vars[v].cost += c;
    }

    /// Row count per constraint family.
    pub fn family_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for r in &self.rows {
            *m.entry(r.family).or_insert(0) += 1;
        }
        m
    }

    /// Number of columns whose name starts with `prefix`.
    pub fn count_vars(&self, prefix: &str) -> usize {
        self.vars.iter().filter(|v| v.name.starts_with(prefix)).count()
    }

    /// Optimal column values and objective.
    pub fn solve(&self) -> Result<(Vec<f64>, f64), DispatchError> {
        let mut p = Problem::new(OptimizationDirection::Minimize);
        let cols: Vec<_> = self
            .vars
            .iter()
            .map(|v| p.add_var(v.cost, (v.lo, v.hi)))
            .collect();
        for r in &self.rows {
            let terms: Vec<_> = r.terms.iter().map(|&(i, c)| (cols[i], c)).collect();
            let op = match r.cmp {
                Cmp::Eq => ComparisonOp::Eq,
                Cmp::Le => ComparisonOp::Le,
                Cmp::Ge => ComparisonOp::Ge,
            };
            p.add_constraint(terms.as_slice(), op, r.rhs);
        }
        let outcome = p.solve().map_err(|e| match e {
            microlp::Error::Infeasible => {
                DispatchError::Infeasible("no schedule satisfies every constraint".into())
            }
            microlp::Error::Unbounded => DispatchError::Unbounded,
            other => DispatchError::Solver(other.to_string()),
        })?;
        let sol = outcome
            .into_solution()
            .map_err(|_| DispatchError::Solver("solve interrupted before a solution".into()))?;
        let x = cols.iter().map(|&c| sol.var_value(c)).collect();
        Ok((x, sol.objective()))
    }
}

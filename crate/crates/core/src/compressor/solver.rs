//! Exact 0-1 integer programming by depth-first branch and bound.
//!
//! Rows are linear inequalities with integer coefficients. Bound
//! propagation fixes variables a row forces; the lower bound is the cost
//! of variables already set to one, which is valid because costs are
//! non-negative.

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub terms: Vec<(usize, i64)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

/// Minimize `Σ cost[v]·x[v]` subject to `rows`, all `x` in {0, 1}.
#[derive(Clone, Debug, Default)]
pub struct IpModel {
    pub cost: Vec<u64>,
    pub rows: Vec<Row>,
    pub names: Vec<String>,
}

impl IpModel {
    pub fn var(&mut self, name: impl Into<String>, cost: u64) -> usize {
        self.cost.push(cost);
        self.names.push(name.into());
        self.cost.len() - 1
    }

    pub fn row(&mut self, terms: Vec<(usize, i64)>, cmp: Cmp, rhs: i64) {
        self.rows.push(Row { terms, cmp, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn objective(&self, values: &[bool]) -> u64 {
        values.iter().zip(&self.cost).filter(|(v, _)| **v).map(|(_, c)| c).sum()
    }

    pub fn satisfied(&self, values: &[bool]) -> bool {
        self.rows.iter().all(|r| {
            let lhs: i64 = r.terms.iter().filter(|(v, _)| values[*v]).map(|(_, a)| a).sum();
            match r.cmp {
                Cmp::Le => lhs <= r.rhs,
                Cmp::Ge => lhs >= r.rhs,
                Cmp::Eq => lhs == r.rhs,
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("solver explored more than {nodes} nodes")]
pub struct SolverBudgetExceeded {
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Optimal { values: Vec<bool>, objective: u64 },
    Infeasible,
}

/// `Σ a·x ≥ b` form of a row.
struct Ge {
    terms: Vec<(usize, i64)>,
    rhs: i64,
}

struct Solver<'m> {
    model: &'m IpModel,
    rows: Vec<Ge>,
    rows_of: Vec<Vec<usize>>,
    /// Rows `Σ x ≥ b` with unit coefficients.
    covering: Vec<usize>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    cost: u64,
    best: Option<(u64, Vec<bool>)>,
    nodes: u64,
    budget: Option<u64>,
}

impl Solver<'_> {
    fn assign(&mut self, v: usize, b: bool) {
        self.value[v] = Some(b);
        self.trail.push(v);
        if b {
            self.cost += self.model.cost[v];
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            if self.value[v] == Some(true) {
                self.cost -= self.model.cost[v];
            }
            self.value[v] = None;
        }
    }

    /// Fixes forced variables; false on a violated row.
    fn propagate(&mut self, mut pending: Vec<usize>) -> bool {
        while let Some(r) = pending.pop() {
            let row = &self.rows[r];
            // largest reachable activity
            let mut max = 0;
            for &(v, a) in &row.terms {
                match self.value[v] {
                    Some(true) => max += a,
                    None if a > 0 => max += a,
                    _ => {}
                }
            }
            let slack = max - row.rhs;
            if slack < 0 {
                return false;
            }
            let forced: Vec<(usize, bool)> = row
                .terms
                .iter()
                .filter(|&&(v, a)| self.value[v].is_none() && a.abs() > slack)
                .map(|&(v, a)| (v, a > 0))
                .collect();
            for (v, b) in forced {
                if self.value[v].is_none() {
                    self.assign(v, b);
                    pending.extend(self.rows_of[v].iter().copied());
                }
            }
        }
        true
    }

    /// Extra cost implied by unsatisfied covering rows whose open variables
    /// are pairwise disjoint: each such row pays at least its cheapest
    /// open variable.
    fn packing_bound(&self) -> u64 {
        let mut used = vec![false; self.value.len()];
        let mut bound = 0;
        for &r in &self.covering {
            let row = &self.rows[r];
            let met: i64 = row
                .terms
                .iter()
                .filter(|(v, _)| self.value[*v] == Some(true))
                .map(|(_, a)| a)
                .sum();
            if met >= row.rhs {
                continue;
            }
            let open = || {
                row.terms
                    .iter()
                    .filter(|(v, _)| self.value[*v].is_none())
                    .map(|(v, _)| *v)
            };
            if open().any(|v| used[v]) {
                continue;
            }
            let cheapest = open().map(|v| self.model.cost[v]).min().unwrap_or(0);
            if cheapest == 0 {
                continue;
            }
            for v in open() {
                used[v] = true;
            }
            bound += cheapest;
        }
        bound
    }

    fn search(&mut self) -> Result<(), SolverBudgetExceeded> {
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                return Err(SolverBudgetExceeded { nodes: b });
            }
        }
        if self
            .best
            .as_ref()
            .is_some_and(|(c, _)| self.cost + self.packing_bound() >= *c)
        {
            return Ok(());
        }
        let Some(v) = self.value.iter().position(Option::is_none) else {
            let values: Vec<bool> = self.value.iter().map(|x| x.unwrap()).collect();
            debug_assert!(self.model.satisfied(&values));
            self.best = Some((self.cost, values));
            return Ok(());
        };
        // the value that keeps the cost down first
        let first = self.model.cost[v] == 0;
        for b in [first, !first] {
            let mark = self.trail.len();
            self.assign(v, b);
            if self.propagate(self.rows_of[v].clone()) {
                self.search()?;
            }
            self.undo_to(mark);
        }
        Ok(())
    }
}

/// Exact optimum of `model`, or an error once `node_budget` nodes have been
/// explored.
pub fn solve(model: &IpModel, node_budget: Option<u64>) -> Result<Solution, SolverBudgetExceeded> {
    let mut rows = Vec::new();
    for r in &model.rows {
        let neg = || Ge {
            terms: r.terms.iter().map(|&(v, a)| (v, -a)).collect(),
            rhs: -r.rhs,
        };
        let pos = || Ge {
            terms: r.terms.clone(),
            rhs: r.rhs,
        };
        match r.cmp {
            Cmp::Ge => rows.push(pos()),
            Cmp::Le => rows.push(neg()),
            Cmp::Eq => {
                rows.push(pos());
                rows.push(neg());
            }
        }
    }
    let mut rows_of = vec![Vec::new(); model.num_vars()];
    for (i, r) in rows.iter().enumerate() {
        for &(v, _) in &r.terms {
            rows_of[v].push(i);
        }
    }
    let n = rows.len();
    let covering = (0..n)
        .filter(|&r| rows[r].rhs >= 1 && rows[r].terms.iter().all(|&(_, a)| a == 1))
        .collect();
    let mut s = Solver {
        model,
        covering,
        rows,
        rows_of,
        value: vec![None; model.num_vars()],
        trail: Vec::new(),
        cost: 0,
        best: None,
        nodes: 0,
        budget: node_budget,
    };
    if s.propagate((0..n).collect()) {
        s.search()?;
    }
    Ok(match s.best {
        Some((objective, values)) => Solution::Optimal { values, objective },
        None => Solution::Infeasible,
    })
}

//! Classical estimates on the all-outcomes determinization and policy-level
//! f-values.

use std::collections::HashMap;
use std::fmt;
use std::ops::Add;

use parking_lot::RwLock;
use thiserror::Error;

use crate::policy::{Policy, StateId};
use crate::task::{FactId, FondTask, State};

/// Non-negative integer or +∞.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(u64),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    pub fn scale(self, k: u64) -> Cost {
        match self {
            Cost::Finite(v) => Cost::Finite(v * k),
            Cost::Infinite => Cost::Infinite,
        }
    }

    /// `self - rhs`, saturating at zero; ∞ stays ∞.
    pub fn minus(self, rhs: u64) -> Cost {
        match self {
            Cost::Finite(v) => Cost::Finite(v.saturating_sub(rhs)),
            Cost::Infinite => Cost::Infinite,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add<u64> for Cost {
    type Output = Cost;

    fn add(self, rhs: u64) -> Cost {
        self + Cost::Finite(rhs)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// A goal-distance estimate for single states.
pub trait ClassicalHeuristic: Send + Sync {
    fn estimate(&self, task: &FondTask, state: &State) -> Cost;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicKind {
    Blind,
    Hmax,
    Hadd,
}

impl std::str::FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "blind" => Ok(HeuristicKind::Blind),
            "hmax" => Ok(HeuristicKind::Hmax),
            "hadd" => Ok(HeuristicKind::Hadd),
            _ => Err(format!("unknown heuristic `{s}`")),
        }
    }
}

pub struct Blind;

impl ClassicalHeuristic for Blind {
    fn estimate(&self, task: &FondTask, state: &State) -> Cost {
        Cost::Finite(u64::from(!task.is_goal(state)))
    }
}

struct UnaryOp {
    pre: Vec<FactId>,
    add: Vec<FactId>,
}

/// hmax or hadd over the delete relaxation of the all-outcomes
/// determinization, with unit action costs.
pub struct DeleteRelaxation {
    additive: bool,
    ops: Vec<UnaryOp>,
    goal: Vec<FactId>,
}

impl DeleteRelaxation {
    pub fn new(task: &FondTask, additive: bool) -> Self {
        let mut ops = Vec::new();
        for a in task.actions() {
            let pre: Vec<FactId> = a.pre.iter().collect();
            for e in &a.effects {
                let add: Vec<FactId> = e.add.iter().collect();
                if !add.is_empty() {
                    ops.push(UnaryOp { pre: pre.clone(), add });
                }
            }
        }
        DeleteRelaxation {
            additive,
            ops,
            goal: task.goal().iter().collect(),
        }
    }

    fn combine(&self, costs: &[Cost], facts: &[FactId]) -> Cost {
        let it = facts.iter().map(|&f| costs[f]);
        if self.additive {
            it.fold(Cost::ZERO, |a, b| a + b)
        } else {
            it.max().unwrap_or(Cost::ZERO)
        }
    }
}

impl ClassicalHeuristic for DeleteRelaxation {
    fn estimate(&self, task: &FondTask, state: &State) -> Cost {
        let mut cost = vec![Cost::Infinite; task.num_facts()];
        for f in state.true_facts() {
            cost[f] = Cost::ZERO;
        }
        loop {
            let mut changed = false;
            for op in &self.ops {
                let c = self.combine(&cost, &op.pre);
                if !c.is_finite() {
                    continue;
                }
                let c = c + 1;
                for &f in &op.add {
                    if c < cost[f] {
                        cost[f] = c;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.combine(&cost, &self.goal)
    }
}

/// Fixed per-state values; states not listed get `default`.
pub struct TableHeuristic {
    pub values: HashMap<State, Cost>,
    pub default: Cost,
}

impl ClassicalHeuristic for TableHeuristic {
    fn estimate(&self, _task: &FondTask, state: &State) -> Cost {
        self.values.get(state).copied().unwrap_or(self.default)
    }
}

pub fn make_heuristic(task: &FondTask, kind: HeuristicKind) -> Box<dyn ClassicalHeuristic> {
    match kind {
        HeuristicKind::Blind => Box::new(Blind),
        HeuristicKind::Hmax => Box::new(DeleteRelaxation::new(task, false)),
        HeuristicKind::Hadd => Box::new(DeleteRelaxation::new(task, true)),
    }
}

/// Memo table keyed by interned state id.
pub struct HeuristicCache<'h> {
    inner: &'h dyn ClassicalHeuristic,
    table: RwLock<HashMap<StateId, Cost>>,
}

impl<'h> HeuristicCache<'h> {
    pub fn new(inner: &'h dyn ClassicalHeuristic) -> Self {
        HeuristicCache {
            inner,
            table: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, space: &crate::policy::StateSpace<'_>, id: StateId) -> Cost {
        if let Some(&c) = self.table.read().get(&id) {
            return c;
        }
        let c = if space.is_goal(id) {
            Cost::ZERO
        } else {
            self.inner.estimate(space.task(), &space.state(id))
        };
        self.table.write().insert(id, c);
        c
    }
}

/// max over j of (j + (j+1)-th largest value).
pub fn delta(values: impl IntoIterator<Item = Cost>) -> Cost {
    let mut v: Vec<Cost> = values.into_iter().collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v.into_iter()
        .enumerate()
        .map(|(j, h)| h + j as u64)
        .max()
        .unwrap_or(Cost::ZERO)
}

/// δ-Nearest from the policy's domain, remain and frontier.
pub fn delta_nearest_parts(domain: &[Cost], remain: &[Cost], front: &[Cost]) -> Cost {
    let n = (domain.len() + remain.len()) as u64;
    let mut best = Cost::Finite(n);
    if !domain.is_empty() && !front.is_empty() {
        let m = *front.iter().min().expect("non-empty");
        best = best.max(m + (n - 1));
    }
    best.max(delta(domain.iter().chain(remain).copied()))
}

pub fn delta_nearest(policy: &Policy, mut h: impl FnMut(StateId) -> Cost) -> Cost {
    let domain: Vec<Cost> = policy.domain().map(&mut h).collect();
    let remain: Vec<Cost> = policy.remain().iter().map(|&s| h(s)).collect();
    let front: Vec<Cost> = policy.front().iter().map(|&s| h(s)).collect();
    delta_nearest_parts(&domain, &remain, &front)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("weight must be an integer greater than 1, got {0}")]
pub struct InvalidWeight(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    AStar,
    WAStar(u64),
    Gbfs,
}

impl SearchMode {
    pub fn wastar(k: u64) -> Result<Self, InvalidWeight> {
        if k <= 1 {
            return Err(InvalidWeight(k.to_string()));
        }
        Ok(SearchMode::WAStar(k))
    }

    /// Priority from g = |domain| and the δ-Nearest value.
    pub fn f_value(self, g: u64, dn: Cost) -> Cost {
        match self {
            SearchMode::AStar => dn,
            SearchMode::WAStar(k) => Cost::Finite(g) + dn.minus(g).scale(k),
            SearchMode::Gbfs => dn.minus(g),
        }
    }
}

impl std::str::FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "astar" => Ok(SearchMode::AStar),
            "gbfs" => Ok(SearchMode::Gbfs),
            _ => match s.strip_prefix("wastar:") {
                Some(k) => {
                    let k: u64 = k.parse().map_err(|_| InvalidWeight(k.to_string()).to_string())?;
                    SearchMode::wastar(k).map_err(|e| e.to_string())
                }
                None => Err(format!("unknown algorithm `{s}`")),
            },
        }
    }
}

pub fn f_value(policy: &Policy, mode: SearchMode, h: impl FnMut(StateId) -> Cost) -> Cost {
    mode.f_value(policy.len() as u64, delta_nearest(policy, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Cost::{Finite as F, Infinite as Inf};

    #[test]
    fn worked_example_delta() {
        assert_eq!(delta([F(2), F(3), F(2), F(1), F(1)]), F(5));
    }

    #[test]
    fn delta_edge_cases() {
        assert_eq!(delta([]), F(0));
        assert_eq!(delta([F(0); 4]), F(3));
        assert_eq!(delta([F(0), Inf]), Inf);
    }

    #[test]
    fn worked_example_delta_nearest() {
        // four domain states, remain {E}, front {E, F}
        let dn = delta_nearest_parts(&[F(2), F(3), F(2), F(1)], &[F(1)], &[F(1), F(0)]);
        assert_eq!(dn, F(5));
        assert_eq!(SearchMode::AStar.f_value(4, dn), F(5));
        assert_eq!(SearchMode::WAStar(2).f_value(4, dn), F(6));
        assert_eq!(SearchMode::Gbfs.f_value(4, dn), F(1));
    }

    #[test]
    fn empty_policy_uses_init_estimate() {
        assert_eq!(delta_nearest_parts(&[], &[F(2)], &[]), F(2));
    }

    #[test]
    fn closed_policy_skips_frontier_term() {
        assert_eq!(delta_nearest_parts(&[F(1), F(1)], &[], &[]), F(2));
    }

    #[test]
    fn weights_must_exceed_one() {
        assert!(SearchMode::wastar(1).is_err());
        assert!(SearchMode::wastar(0).is_err());
        assert_eq!("wastar:3".parse::<SearchMode>(), Ok(SearchMode::WAStar(3)));
        assert!("wastar:1".parse::<SearchMode>().is_err());
        assert!("wastar:1.5".parse::<SearchMode>().is_err());
    }
}

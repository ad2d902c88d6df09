//! Compression of state policies into minimal partial-state policies.
//!
//! Each action is handled on its own: the states mapped to it must be
//! covered by partial states that model no other domain state and no
//! frontier state. The minimal number of partial states is found by
//! solving a 0-1 program for k = 1, 2, ... until it becomes feasible.

mod solver;

pub use solver::{solve, Cmp, IpModel, Row, Solution, SolverBudgetExceeded};

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::policy::{PartialPolicy, PartialState, StatePolicy};
use crate::task::{FondTask, State};
use crate::validator::OracleTooLarge;

pub const DEFAULT_NODE_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum CompressError {
    #[error("cover instance has a state both to cover and to exclude")]
    Overlap,
    #[error(transparent)]
    Budget(#[from] SolverBudgetExceeded),
}

/// States to cover (`x`) and states to exclude (`y`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverInstance {
    width: usize,
    x: Vec<State>,
    y: Vec<State>,
}

impl CoverInstance {
    pub fn new(width: usize, x: Vec<State>, y: Vec<State>) -> Result<Self, CompressError> {
        let xs: BTreeSet<&State> = x.iter().collect();
        if y.iter().any(|s| xs.contains(s)) {
            return Err(CompressError::Overlap);
        }
        Ok(CoverInstance { width, x, y })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn cover(&self) -> &[State] {
        &self.x
    }

    pub fn exclude(&self) -> &[State] {
        &self.y
    }

    /// Whether `z` covers every `x` and no `y`.
    pub fn is_solution(&self, z: &[PartialState]) -> bool {
        self.x.iter().all(|s| z.iter().any(|p| p.models(s))) && !self.y.iter().any(|s| z.iter().any(|p| p.models(s)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// Every constraint family of the original program.
    Full,
    /// The reduced program: no exclusion-membership variables, no
    /// at-most-one-value rows, literal variables only where some covered
    /// state has that literal.
    Simplified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverOptions {
    pub model: ModelKind,
    /// Lets the j-th covered state be claimed only by slots 0..=j. Every
    /// solution has a renaming of slots that satisfies this, so feasibility
    /// and the optimum are unchanged.
    pub slot_ordering: bool,
    pub node_budget: Option<u64>,
}

impl Default for CoverOptions {
    fn default() -> Self {
        CoverOptions {
            model: ModelKind::Simplified,
            slot_ordering: true,
            node_budget: Some(DEFAULT_NODE_BUDGET),
        }
    }
}

/// Variable ids of a built program.
pub struct CoverModel {
    pub ip: IpModel,
    /// `literal[i][(f, b)]` is the variable for slot `i` assigning `b` to `f`.
    pub literal: Vec<HashMap<(usize, bool), usize>>,
}

impl CoverModel {
    /// Reads the partial states back from a solution, dropping slots that
    /// assign both values to a fact and duplicates.
    pub fn decode(&self, values: &[bool], width: usize) -> Vec<PartialState> {
        let mut out: Vec<PartialState> = Vec::new();
        for slot in &self.literal {
            let mut lits: Vec<(usize, bool)> = slot.iter().filter(|(_, &v)| values[v]).map(|(&l, _)| l).collect();
            lits.sort_unstable();
            if let Some(p) = PartialState::from_literals(width, lits) {
                if !out.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

pub fn build_model(inst: &CoverInstance, k: usize, kind: ModelKind, slot_ordering: bool) -> CoverModel {
    let mut ip = IpModel::default();
    let n = inst.width;
    // membership variables first: branching on them drives propagation
    let mut member: Vec<Vec<Option<usize>>> = vec![vec![None; inst.x.len()]; k];
    for (j, _) in inst.x.iter().enumerate() {
        for (i, slot) in member.iter_mut().enumerate() {
            if !slot_ordering || i <= j {
                slot[j] = Some(ip.var(format!("p{i}[x{j}]"), 0));
            }
        }
    }
    let mut excluded_member: Vec<Vec<usize>> = Vec::new();
    if kind == ModelKind::Full {
        for i in 0..k {
            excluded_member.push((0..inst.y.len()).map(|j| ip.var(format!("p{i}[y{j}]"), 0)).collect());
        }
    }
    let mut literal: Vec<HashMap<(usize, bool), usize>> = vec![HashMap::new(); k];
    for (i, slot) in literal.iter_mut().enumerate() {
        for f in 0..n {
            for b in [true, false] {
                let useful = kind == ModelKind::Full || inst.x.iter().any(|s| s.holds(f) == b);
                if useful {
                    slot.insert((f, b), ip.var(format!("p{i}[{f}={b}]"), 1));
                }
            }
        }
    }
    let lit = |i: usize, f: usize, b: bool| literal[i].get(&(f, b)).copied();

    // each covered state is modelled by some slot
    #[allow(clippy::needless_range_loop)]
    for j in 0..inst.x.len() {
        let terms = (0..k).filter_map(|i| member[i][j]).map(|v| (v, 1)).collect();
        ip.row(terms, Cmp::Ge, 1);
    }
    // a slot modelling s assigns no fact against s
    for i in 0..k {
        let mut rows: Vec<(usize, &State)> = Vec::new();
        for (j, s) in inst.x.iter().enumerate() {
            if let Some(m) = member[i][j] {
                rows.push((m, s));
            }
        }
        if kind == ModelKind::Full {
            rows.extend(inst.y.iter().enumerate().map(|(j, s)| (excluded_member[i][j], s)));
        }
        for (m, s) in rows {
            for f in 0..n {
                if let Some(v) = lit(i, f, !s.holds(f)) {
                    ip.row(vec![(v, 1), (m, 1)], Cmp::Le, 1);
                }
            }
        }
    }
    match kind {
        ModelKind::Simplified => {
            // every slot assigns some fact against each excluded state
            for i in 0..k {
                for s in &inst.y {
                    let terms = (0..n).filter_map(|f| lit(i, f, !s.holds(f))).map(|v| (v, 1)).collect();
                    ip.row(terms, Cmp::Ge, 1);
                }
            }
        }
        ModelKind::Full => {
            #[allow(clippy::needless_range_loop)]
            for j in 0..inst.y.len() {
                let terms = (0..k).map(|i| (excluded_member[i][j], 1)).collect();
                ip.row(terms, Cmp::Eq, 0);
            }
            for i in 0..k {
                let members = inst
                    .x
                    .iter()
                    .enumerate()
                    .filter_map(|(j, s)| member[i][j].map(|m| (m, s)))
                    .chain(inst.y.iter().enumerate().map(|(j, s)| (excluded_member[i][j], s)));
                for (m, s) in members {
                    // Σ_f p[f ↦ ¬s[f]] + p[s] ≥ 1
                    let mut terms: Vec<(usize, i64)> =
                        (0..n).filter_map(|f| lit(i, f, !s.holds(f))).map(|v| (v, 1)).collect();
                    terms.push((m, 1));
                    ip.row(terms, Cmp::Ge, 1);
                }
                for f in 0..n {
                    if let (Some(t), Some(u)) = (lit(i, f, true), lit(i, f, false)) {
                        ip.row(vec![(t, 1), (u, 1)], Cmp::Le, 1);
                    }
                }
            }
        }
    }
    CoverModel { ip, literal }
}

/// At most `k` partial states covering the instance with the fewest
/// literals in total, or `None` if `k` do not suffice.
pub fn solve_cover(inst: &CoverInstance, k: usize) -> Result<Option<Vec<PartialState>>, SolverBudgetExceeded> {
    solve_cover_with(inst, k, &CoverOptions::default())
}

pub fn solve_cover_with(
    inst: &CoverInstance,
    k: usize,
    opts: &CoverOptions,
) -> Result<Option<Vec<PartialState>>, SolverBudgetExceeded> {
    assert!(k >= 1, "k must be positive");
    if inst.x.is_empty() {
        return Ok(Some(Vec::new()));
    }
    Ok(solve_cover_objective(inst, k, opts)?.map(|(z, _)| z))
}

/// Like [`solve_cover_with`], also returning the optimal objective.
pub fn solve_cover_objective(
    inst: &CoverInstance,
    k: usize,
    opts: &CoverOptions,
) -> Result<Option<(Vec<PartialState>, u64)>, SolverBudgetExceeded> {
    let model = build_model(inst, k, opts.model, opts.slot_ordering);
    Ok(match solve(&model.ip, opts.node_budget)? {
        Solution::Infeasible => None,
        Solution::Optimal { values, objective } => {
            let z = model.decode(&values, inst.width);
            debug_assert!(inst.is_solution(&z));
            Some((z, objective))
        }
    })
}

/// Smallest cover of the instance, trying k = 1, 2, ...
pub fn minimal_cover(inst: &CoverInstance, opts: &CoverOptions) -> Result<Vec<PartialState>, SolverBudgetExceeded> {
    if inst.x.is_empty() {
        return Ok(Vec::new());
    }
    for k in 1..=inst.x.len() {
        if let Some(z) = solve_cover_with(inst, k, opts)? {
            return Ok(z);
        }
    }
    unreachable!("the covered states themselves form a cover")
}

/// Partial-state policy agreeing with `policy` on its domain and mapping
/// none of its frontier states, with the fewest partial states.
pub fn compress(task: &FondTask, policy: &StatePolicy) -> Result<PartialPolicy, SolverBudgetExceeded> {
    compress_with(task, policy, &CoverOptions::default())
}

pub fn compress_with(
    task: &FondTask,
    policy: &StatePolicy,
    opts: &CoverOptions,
) -> Result<PartialPolicy, SolverBudgetExceeded> {
    let front: Vec<State> = policy.front(task).into_iter().collect();
    let mut out = PartialPolicy::new();
    for a in task.action_ids() {
        let (x, others): (Vec<(&State, _)>, Vec<_>) = policy.iter().partition(|(_, b)| **b == a);
        if x.is_empty() {
            continue;
        }
        let inst = CoverInstance {
            width: task.num_facts(),
            x: x.into_iter().map(|(s, _)| s.clone()).collect(),
            y: others
                .into_iter()
                .map(|(s, _)| s.clone())
                .chain(front.iter().cloned())
                .collect(),
        };
        for p in minimal_cover(&inst, opts)? {
            out.insert(p, a);
        }
    }
    Ok(out)
}

/// Exact minimum cover size by enumerating every partial state; for tiny
/// instances only.
pub fn minimality_oracle(inst: &CoverInstance) -> Result<usize, OracleTooLarge> {
    const MAX_FACTS: usize = 6;
    const MAX_STATES: usize = 12;
    if inst.width > MAX_FACTS {
        return Err(OracleTooLarge { cap: MAX_FACTS });
    }
    if inst.x.len() + inst.y.len() > MAX_STATES {
        return Err(OracleTooLarge { cap: MAX_STATES });
    }
    if inst.x.is_empty() {
        return Ok(0);
    }
    let masks: Vec<u32> = all_partial_states(inst.width)
        .filter(|p| !inst.y.iter().any(|s| p.models(s)))
        .map(|p| {
            inst.x
                .iter()
                .enumerate()
                .filter(|(_, s)| p.models(s))
                .fold(0u32, |m, (j, _)| m | 1 << j)
        })
        .filter(|&m| m != 0)
        .collect();
    let full = (1u32 << inst.x.len()) - 1;
    let mut dist = vec![usize::MAX; full as usize + 1];
    dist[0] = 0;
    let mut layer = vec![0u32];
    for d in 1.. {
        let mut next = Vec::new();
        for &m in &layer {
            for &p in &masks {
                let t = m | p;
                if dist[t as usize] == usize::MAX {
                    dist[t as usize] = d;
                    next.push(t);
                }
            }
        }
        if dist[full as usize] != usize::MAX {
            return Ok(dist[full as usize]);
        }
        layer = next;
    }
    unreachable!()
}

/// All 3^width partial states.
pub fn all_partial_states(width: usize) -> impl Iterator<Item = PartialState> {
    (0..3usize.pow(width as u32)).map(move |mut code| {
        let mut lits = Vec::new();
        for f in 0..width {
            match code % 3 {
                1 => lits.push((f, true)),
                2 => lits.push((f, false)),
                _ => {}
            }
            code /= 3;
        }
        PartialState::from_literals(width, lits).unwrap()
    })
}

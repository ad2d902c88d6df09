//! Best-first search in the space of policies.
//!
//! Nodes are policies; a node is expanded by mapping one remain state to
//! each of its applicable actions. Popped policies whose signature was
//! already expanded are discarded.

mod order;
mod signature;

pub use order::{ExpansionOrder, MostRecent, ScriptedOrder};
pub use signature::{signature, Pruning, SignatureKey, StateSignature, SymKey, MERGED_GOAL};

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::concretizer::{concretize, HollowPolicy};
use crate::heuristics::{delta_nearest, ClassicalHeuristic, Cost, HeuristicCache, SearchMode};
use crate::policy::{Policy, StatePolicy, StateSpace};
use signature::SignatureBuilder;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub pruning: Pruning,
    pub mode: SearchMode,
    pub deadlock_detection: bool,
    pub use_concretizer: bool,
    pub goal_merging: bool,
    /// Cap on generated policies.
    pub max_policies: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            pruning: Pruning::Identity,
            mode: SearchMode::AStar,
            deadlock_detection: false,
            use_concretizer: false,
            goal_merging: false,
            max_policies: None,
            time_limit: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Limit {
    Policies,
    Time,
}

impl Limit {
    pub fn name(self) -> &'static str {
        match self {
            Limit::Policies => "policy-limit",
            Limit::Time => "time-limit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solved(StatePolicy),
    Bottom,
    ResourceLimit(Limit),
}

impl Outcome {
    pub fn solution(&self) -> Option<&StatePolicy> {
        match self {
            Outcome::Solved(p) => Some(p),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub generated: u64,
    pub expanded: u64,
    pub pruned_by_equivalence: u64,
    pub pruned_by_deadlock: u64,
    pub pruned_infinite: u64,
    pub concretizer_calls: u64,
    pub solutions_from_concretizer: u64,
    /// Set when the backup search ran.
    pub backup_used: bool,
    pub elapsed: Duration,
}

impl SearchStats {
    fn absorb(&mut self, other: &SearchStats) {
        self.generated += other.generated;
        self.expanded += other.expanded;
        self.pruned_by_equivalence += other.pruned_by_equivalence;
        self.pruned_by_deadlock += other.pruned_by_deadlock;
        self.pruned_infinite += other.pruned_infinite;
        self.concretizer_calls += other.concretizer_calls;
        self.solutions_from_concretizer += other.solutions_from_concretizer;
        self.elapsed += other.elapsed;
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub stats: SearchStats,
}

/// Inputs shared by the phases of one planner run.
pub struct SearchContext<'a> {
    pub heuristic: &'a dyn ClassicalHeuristic,
    pub order: &'a mut dyn ExpansionOrder,
    pub symmetry: Option<&'a dyn StateSignature>,
}

struct Node {
    key: (Cost, Reverse<usize>, u64),
    policy: Policy,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; the least key pops first
        other.key.cmp(&self.key)
    }
}

/// Successors of `policy`: one per applicable action at the state chosen by
/// `order`. Empty if remain is empty.
pub fn expand(space: &StateSpace<'_>, policy: &Policy, order: &mut dyn ExpansionOrder) -> Vec<Policy> {
    let Some(s) = order.select(space, policy) else {
        return Vec::new();
    };
    debug_assert!(policy.remain().contains(&s));
    let mut actions: Vec<_> = space.applicable(s).to_vec();
    order.order_actions(space, s, &mut actions);
    actions
        .into_iter()
        .map(|a| {
            policy
                .extend(space, s, a)
                .expect("remain state accepts applicable action")
        })
        .collect()
}

/// One best-first search run.
pub fn and_star(task: &crate::task::FondTask, config: &SearchConfig, ctx: &mut SearchContext<'_>) -> SearchResult {
    let start = Instant::now();
    let space = StateSpace::new(task);
    let h = HeuristicCache::new(ctx.heuristic);
    let mut stats = SearchStats::default();
    let mut signatures = SignatureBuilder {
        pruning: config.pruning,
        goal_merging: config.goal_merging,
        symmetry: ctx.symmetry,
        memo: HashMap::new(),
    };
    let mut done: HashSet<SignatureKey> = HashSet::new();
    let mut queue = BinaryHeap::new();
    let mut seq = 0u64;
    #[cfg(debug_assertions)]
    let mut generated_set: HashSet<Vec<(crate::policy::StateId, crate::task::ActionId)>> = HashSet::new();

    let mut push = |policy: Policy, queue: &mut BinaryHeap<Node>, stats: &mut SearchStats| {
        let dn = delta_nearest(&policy, |s| h.get(&space, s));
        let f = config.mode.f_value(policy.len() as u64, dn);
        if !f.is_finite() {
            stats.pruned_infinite += 1;
            return;
        }
        queue.push(Node {
            key: (f, Reverse(policy.len()), seq),
            policy,
        });
        seq += 1;
    };

    let finish = |outcome: Outcome, mut stats: SearchStats| {
        stats.elapsed = start.elapsed();
        SearchResult { outcome, stats }
    };

    stats.generated = 1;
    push(Policy::empty(&space), &mut queue, &mut stats);

    while let Some(Node { policy, .. }) = queue.pop() {
        if let Some(limit) = config.time_limit {
            if start.elapsed() > limit {
                return finish(Outcome::ResourceLimit(Limit::Time), stats);
            }
        }
        if policy.is_solution() {
            return finish(Outcome::Solved(policy.to_state_policy(&space)), stats);
        }
        if policy.remain().is_empty() && config.use_concretizer {
            stats.concretizer_calls += 1;
            let hollow = HollowPolicy::new(policy.domain(), policy.front().iter().copied());
            if let Some(p) =
                concretize(&space, &hollow, config.goal_merging).expect("policy gives a valid hollow policy")
            {
                debug_assert!(p.is_solution());
                stats.solutions_from_concretizer += 1;
                return finish(Outcome::Solved(p.to_state_policy(&space)), stats);
            }
        }
        if !done.insert(signatures.key(&space, &policy)) {
            stats.pruned_by_equivalence += 1;
            continue;
        }
        stats.expanded += 1;
        for child in expand(&space, &policy, ctx.order) {
            stats.generated += 1;
            #[cfg(debug_assertions)]
            assert!(generated_set.insert(child.sorted_mappings()), "policy generated twice");
            if let Some(cap) = config.max_policies {
                if stats.generated > cap {
                    return finish(Outcome::ResourceLimit(Limit::Policies), stats);
                }
            }
            if config.deadlock_detection && !child.is_proper() {
                stats.pruned_by_deadlock += 1;
                continue;
            }
            push(child, &mut queue, &mut stats);
        }
    }
    finish(Outcome::Bottom, stats)
}

/// Runs the search; frontier-based pruning falls back to domain-frontier
/// pruning when it reports no solution.
pub fn run_planner(task: &crate::task::FondTask, config: &SearchConfig, ctx: &mut SearchContext<'_>) -> SearchResult {
    let first = and_star(task, config, ctx);
    if !(config.pruning.needs_backup() && first.outcome == Outcome::Bottom) {
        return first;
    }
    let backup = SearchConfig {
        pruning: Pruning::DomainFrontier,
        ..config.clone()
    };
    let mut second = and_star(task, &backup, ctx);
    let mut stats = first.stats;
    stats.absorb(&second.stats);
    stats.backup_used = true;
    second.stats = stats;
    second
}

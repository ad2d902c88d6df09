//! Independent solution checks and brute-force oracles.
//!
//! Nothing here uses the policy caches; everything is recomputed from the
//! task's transition function.

mod micro;

pub use micro::{enumerate_micro_tasks, exhaustive_family, random_graph, Archetype, Family, MicroCaps, MicroTask};

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::policy::StatePolicy;
use crate::task::{ActionId, FondTask, State};

pub const DEFAULT_ORACLE_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Applicability,
    GoalMapped,
    GoalClosed,
    Properness,
    InitCoverage,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rule::Applicability => "applicability",
            Rule::GoalMapped => "goal-mapped",
            Rule::GoalClosed => "goal-closed",
            Rule::Properness => "properness",
            Rule::InitCoverage => "init-coverage",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub state: State,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule, state: &State) -> bool {
        self.violations.iter().any(|v| v.rule == rule && v.state == *state)
    }

    pub fn report(&self, task: &FondTask) -> String {
        self.violations
            .iter()
            .map(|v| format!("{}: {}\n", v.rule, task.state_label(&v.state)))
            .collect()
    }
}

/// Checks that `policy` is a strong-cyclic solution.
pub fn verify_strong_cyclic(task: &FondTask, policy: &StatePolicy) -> Verdict {
    let mut violations = Vec::new();
    let mut succ: BTreeMap<&State, Vec<State>> = BTreeMap::new();
    for (s, &a) in policy.iter() {
        if task.is_goal(s) {
            violations.push(Violation {
                rule: Rule::GoalMapped,
                state: s.clone(),
            });
        }
        match task.successors(s, a) {
            Ok(v) => {
                succ.insert(s, v);
            }
            Err(_) => violations.push(Violation {
                rule: Rule::Applicability,
                state: s.clone(),
            }),
        }
    }
    if !violations.is_empty() {
        return Verdict { violations };
    }

    let mut front = BTreeSet::new();
    for v in succ.values() {
        for t in v {
            if policy.get(t).is_none() {
                front.insert(t.clone());
            }
        }
    }
    for t in &front {
        if !task.is_goal(t) {
            violations.push(Violation {
                rule: Rule::GoalClosed,
                state: t.clone(),
            });
        }
    }

    // Each domain state must reach some unmapped state.
    for s in policy.states() {
        let mut seen = BTreeSet::from([s.clone()]);
        let mut queue = VecDeque::from([s.clone()]);
        let mut escapes = false;
        while let Some(x) = queue.pop_front() {
            let Some(next) = succ.get(&x) else {
                escapes = true;
                break;
            };
            for t in next {
                if seen.insert(t.clone()) {
                    queue.push_back(t.clone());
                }
            }
        }
        if !escapes {
            violations.push(Violation {
                rule: Rule::Properness,
                state: s.clone(),
            });
        }
    }

    if !task.is_goal(task.init()) && policy.get(task.init()).is_none() {
        violations.push(Violation {
            rule: Rule::InitCoverage,
            state: task.init().clone(),
        });
    }
    Verdict { violations }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("task has more than {cap} reachable states")]
pub struct OracleTooLarge {
    pub cap: usize,
}

/// All states reachable from init under any action, if there are at most
/// `cap` of them.
pub fn reachable_states(task: &FondTask, cap: usize) -> Result<Vec<State>, OracleTooLarge> {
    let mut seen = BTreeSet::from([task.init().clone()]);
    let mut queue = VecDeque::from([task.init().clone()]);
    while let Some(s) = queue.pop_front() {
        if task.is_goal(&s) {
            continue;
        }
        for a in task.applicable_actions(&s) {
            for t in task.successors(&s, a).expect("applicable") {
                if seen.insert(t.clone()) {
                    if seen.len() > cap {
                        return Err(OracleTooLarge { cap });
                    }
                    queue.push_back(t);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Minimum domain size of a strong-cyclic solution, `None` if the task is
/// unsolvable.
///
/// Enumerates every policy whose domain is exactly the set of non-goal
/// states it reaches from init; any solution restricted to its reachable
/// part is one of these.
pub fn brute_force_optimum(task: &FondTask, cap: usize) -> Result<Option<usize>, OracleTooLarge> {
    Ok(brute_force_solution(task, cap)?.map(|p| p.len()))
}

/// A minimum-size solution found by the same enumeration.
pub fn brute_force_solution(task: &FondTask, cap: usize) -> Result<Option<StatePolicy>, OracleTooLarge> {
    reachable_states(task, cap)?;
    let mut best: Option<StatePolicy> = None;
    let mut current: BTreeMap<State, ActionId> = BTreeMap::new();
    enumerate_closed(task, &mut current, &mut best);
    Ok(best)
}

fn open_states(task: &FondTask, policy: &BTreeMap<State, ActionId>) -> BTreeSet<State> {
    let mut open = BTreeSet::new();
    if !task.is_goal(task.init()) && !policy.contains_key(task.init()) {
        open.insert(task.init().clone());
    }
    for (s, &a) in policy {
        for t in task.successors(s, a).expect("applicable") {
            if !task.is_goal(&t) && !policy.contains_key(&t) {
                open.insert(t);
            }
        }
    }
    open
}

fn enumerate_closed(task: &FondTask, current: &mut BTreeMap<State, ActionId>, best: &mut Option<StatePolicy>) {
    if best.as_ref().is_some_and(|b| b.len() <= current.len()) {
        return;
    }
    let open = open_states(task, current);
    let Some(s) = open.into_iter().next() else {
        let candidate: StatePolicy = current.iter().map(|(s, a)| (s.clone(), *a)).collect();
        if verify_strong_cyclic(task, &candidate).ok() {
            *best = Some(candidate);
        }
        return;
    };
    let actions: Vec<ActionId> = task.applicable_actions(&s).collect();
    for a in actions {
        current.insert(s.clone(), a);
        enumerate_closed(task, current, best);
        current.remove(&s);
    }
}

/// True iff some assignment of applicable actions to `domain` gives a
/// proper policy whose frontier lies inside `front`. Exhaustive.
pub fn hollow_realizable(task: &FondTask, domain: &BTreeSet<State>, front: &BTreeSet<State>) -> bool {
    let states: Vec<&State> = domain.iter().collect();
    let choices: Vec<Vec<ActionId>> = states.iter().map(|s| task.applicable_actions(s).collect()).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return false;
    }
    let mut idx = vec![0usize; states.len()];
    loop {
        let policy: StatePolicy = states
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, (s, &i))| ((*s).clone(), choices[k][i]))
            .collect();
        let v = verify_strong_cyclic(task, &policy);
        let proper = !v.violations.iter().any(|x| x.rule == Rule::Properness);
        if proper && policy.front(task).is_subset(front) {
            return true;
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

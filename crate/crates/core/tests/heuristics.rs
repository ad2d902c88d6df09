mod common;

use std::collections::{BTreeSet, HashMap, VecDeque};

use common::{load, Named};
use fondplan::concretizer::{concretize, HollowPolicy};
use fondplan::heuristics::{
    delta_nearest, f_value, ClassicalHeuristic, Cost, DeleteRelaxation, HeuristicCache, SearchMode, TableHeuristic,
};
use fondplan::policy::{Policy, StateSpace};
use fondplan::task::{FondTask, State};
use fondplan::validator::{
    enumerate_micro_tasks, exhaustive_family, reachable_states, verify_strong_cyclic, MicroCaps,
};

fn worked_example_stub(g: &fondplan::parse::ExplicitGraph, t: &FondTask) -> TableHeuristic {
    let values = [("A", 2), ("B", 3), ("C", 2), ("D", 1), ("E", 1), ("F", 0)]
        .into_iter()
        .map(|(n, v)| (g.state(t, n).unwrap(), Cost::Finite(v)))
        .collect();
    TableHeuristic {
        values,
        default: Cost::Infinite,
    }
}

#[test]
fn six_state_worked_example_is_five() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let stub = worked_example_stub(&g, &t);
    let p = Policy::from_mappings(
        &sp,
        [
            (n.s("A"), n.a("A", "a")),
            (n.s("B"), n.a("B", "b")),
            (n.s("C"), n.a("C", "c_L")),
            (n.s("D"), n.a("D", "d")),
        ],
    )
    .unwrap();
    let h = |s| stub.estimate(&t, &sp.state(s));
    assert_eq!(delta_nearest(&p, h), Cost::Finite(5));
    assert_eq!(f_value(&p, SearchMode::AStar, h), Cost::Finite(5));
    assert_eq!(f_value(&p, SearchMode::WAStar(2), h), Cost::Finite(6));
    assert_eq!(f_value(&p, SearchMode::Gbfs, h), Cost::Finite(1));

    let p2 = p.extend(&sp, n.s("E"), n.a("E", "e")).unwrap();
    assert_eq!(delta_nearest(&p2, h), Cost::Finite(5));
    assert_eq!(delta_nearest(&Policy::empty(&sp), h), Cost::Finite(2));
}

#[test]
fn six_state_hmax_values() {
    let (g, t) = load("six-state.json");
    let h = DeleteRelaxation::new(&t, false);
    let v = |n: &str| h.estimate(&t, &g.state(&t, n).unwrap());
    assert_eq!(v("F"), Cost::Finite(0));
    assert_eq!(v("D"), Cost::Finite(1));
    assert_eq!(v("E"), Cost::Finite(2));
    assert_eq!(v("A"), Cost::Finite(2));
    assert_eq!(v("C"), Cost::Finite(2));
}

#[test]
fn dead_end_is_infinite() {
    let (g, t) = load("dead-end.json");
    for additive in [false, true] {
        let h = DeleteRelaxation::new(&t, additive);
        assert_eq!(h.estimate(&t, &g.state(&t, "X").unwrap()), Cost::Infinite);
    }
}

/// Shortest path to a goal in the all-outcomes determinization.
fn determinized_distance(task: &FondTask, from: &State) -> Cost {
    let mut dist = HashMap::from([(from.clone(), 0u64)]);
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(s) = queue.pop_front() {
        if task.is_goal(&s) {
            return Cost::Finite(dist[&s]);
        }
        for a in task.applicable_actions(&s) {
            for t in task.successors(&s, a).unwrap() {
                if !dist.contains_key(&t) {
                    dist.insert(t.clone(), dist[&s] + 1);
                    queue.push_back(t);
                }
            }
        }
    }
    Cost::Infinite
}

#[test]
fn hmax_is_admissible_and_hadd_dominates_it() {
    for m in enumerate_micro_tasks(2, MicroCaps::default()).take(300) {
        let hmax = DeleteRelaxation::new(&m.task, false);
        let hadd = DeleteRelaxation::new(&m.task, true);
        for s in reachable_states(&m.task, 64).unwrap() {
            let d = determinized_distance(&m.task, &s);
            let a = hmax.estimate(&m.task, &s);
            assert!(a <= d, "{:?} {s:?}", m.graph);
            assert_eq!(a.is_finite(), d.is_finite());
            assert!(hadd.estimate(&m.task, &s) >= a);
            if m.task.is_goal(&s) {
                assert_eq!(a, Cost::ZERO);
            }
        }
    }
}

/// Every solution over the reachable states, by enumeration.
fn all_solutions(task: &FondTask) -> Vec<Vec<(State, fondplan::task::ActionId)>> {
    let states: Vec<State> = reachable_states(task, 64)
        .unwrap()
        .into_iter()
        .filter(|s| !task.is_goal(s))
        .collect();
    let choices: Vec<Vec<Option<fondplan::task::ActionId>>> = states
        .iter()
        .map(|s| {
            std::iter::once(None)
                .chain(task.applicable_actions(s).map(Some))
                .collect()
        })
        .collect();
    let total: usize = choices.iter().map(Vec::len).product();
    let mut out = Vec::new();
    for mut code in 0..total {
        let mut mapping = Vec::new();
        for (s, c) in states.iter().zip(&choices) {
            if let Some(a) = c[code % c.len()] {
                mapping.push((s.clone(), a));
            }
            code /= c.len();
        }
        let sp: fondplan::policy::StatePolicy = mapping.iter().cloned().collect();
        if verify_strong_cyclic(task, &sp).ok() {
            out.push(mapping);
        }
    }
    out
}

#[test]
fn policy_level_admissibility_and_goal_awareness() {
    for n in 1..=4 {
        for g in exhaustive_family(n, 2, 2).step_by(37) {
            let t = g.to_task().unwrap();
            let sp = StateSpace::new(&t);
            let hmax = DeleteRelaxation::new(&t, false);
            let cache = HeuristicCache::new(&hmax);
            for sol in all_solutions(&t) {
                let full = Policy::from_mappings(&sp, sol.iter().map(|(s, a)| (sp.intern(s), *a))).unwrap();
                assert!(full.is_solution());
                assert_eq!(
                    delta_nearest(&full, |s| cache.get(&sp, s)),
                    Cost::Finite(sol.len() as u64)
                );
                // every sub-policy that maps init, as all searched policies
                // except the empty one do, underestimates the solution size
                let init_pos = sol.iter().position(|(s, _)| s == t.init());
                for mask in 0u32..(1 << sol.len()) {
                    if mask != 0 && init_pos.is_some_and(|i| mask >> i & 1 == 0) {
                        continue;
                    }
                    let sub = sol
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, (s, a))| (sp.intern(s), *a));
                    let p = Policy::from_mappings(&sp, sub).unwrap();
                    let f = delta_nearest(&p, |s| cache.get(&sp, s));
                    assert!(
                        f <= Cost::Finite(sol.len() as u64),
                        "{g:?}\nsol {sol:?}\nsub {:?} f={f}",
                        p.mappings()
                    );
                }
            }
        }
    }
}

#[test]
fn extended_awareness() {
    for m in enumerate_micro_tasks(9, MicroCaps::default()).take(200) {
        let t = &m.task;
        let sp = StateSpace::new(t);
        let hmax = DeleteRelaxation::new(t, false);
        let cache = HeuristicCache::new(&hmax);
        let states: Vec<State> = reachable_states(t, 64).unwrap();
        let nongoal: Vec<&State> = states.iter().filter(|s| !t.is_goal(s)).collect();
        let mut by_hollow: HashMap<(BTreeSet<_>, BTreeSet<_>), Cost> = HashMap::new();
        let choices: Vec<Vec<Option<fondplan::task::ActionId>>> = nongoal
            .iter()
            .map(|s| std::iter::once(None).chain(t.applicable_actions(s).map(Some)).collect())
            .collect();
        let total: usize = choices.iter().map(Vec::len).product();
        for mut code in 0..total.min(5000) {
            let mut mapping = Vec::new();
            for (s, c) in nongoal.iter().zip(&choices) {
                if let Some(a) = c[code % c.len()] {
                    mapping.push((sp.intern(s), a));
                }
                code /= c.len();
            }
            let p = Policy::from_mappings(&sp, mapping).unwrap();
            let f = delta_nearest(&p, |s| cache.get(&sp, s));
            let key = (
                p.domain().collect::<BTreeSet<_>>(),
                p.front().iter().copied().collect::<BTreeSet<_>>(),
            );
            // equal ⟨domain, front⟩ give equal f
            assert_eq!(*by_hollow.entry(key).or_insert(f), f);
            if p.remain().is_empty() {
                let h = HollowPolicy::new(p.domain(), p.front().iter().copied());
                if let Some(star) = concretize(&sp, &h, false).unwrap() {
                    assert!(star.is_solution());
                    assert!(delta_nearest(&star, |s| cache.get(&sp, s)) <= f);
                }
            }
        }
    }
}

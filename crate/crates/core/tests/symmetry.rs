mod common;

use std::collections::{HashSet, VecDeque};

use common::{load, load_pddl};
use fondplan::heuristics::DeleteRelaxation;
use fondplan::search::{run_planner, MostRecent, Pruning, SearchConfig, SearchContext, StateSignature};
use fondplan::symmetry::{
    canonical_signature, check_symmetry, find_generators, greedy_signature, Permutation, PermutationGroup,
    SymmetryMode, SymmetrySignature,
};
use fondplan::task::{ActionId, FondTask, State};
use fondplan::validator::{enumerate_micro_tasks, reachable_states, verify_strong_cyclic, Archetype, MicroCaps};

/// Every structural symmetry, by trying all fact permutations and matching
/// actions by backtracking.
fn brute_force_symmetries(task: &FondTask) -> HashSet<Permutation> {
    let n = task.num_facts();
    let na = task.actions().len();
    let mut out = HashSet::new();
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm
    let mut c = vec![0; n];
    let mut visit = |facts: &[usize]| {
        let mut actions = vec![ActionId(0); na];
        let mut used = vec![false; na];
        match_actions(task, facts, 0, &mut actions, &mut used, &mut out);
    };
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn match_actions(
    task: &FondTask,
    facts: &[usize],
    k: usize,
    actions: &mut Vec<ActionId>,
    used: &mut Vec<bool>,
    out: &mut HashSet<Permutation>,
) {
    if k == actions.len() {
        let p = Permutation::new(facts.to_vec(), actions.clone()).unwrap();
        if check_symmetry(task, &p) {
            out.insert(p);
        }
        return;
    }
    let a = &task.actions()[k];
    let pre: HashSet<usize> = a.pre.iter().map(|f| facts[f]).collect();
    for b in task.actions() {
        if used[b.id.index()] || b.partition != a.partition || b.pre.iter().collect::<HashSet<_>>() != pre {
            continue;
        }
        used[b.id.index()] = true;
        actions[k] = b.id;
        match_actions(task, facts, k + 1, actions, used, out);
        used[b.id.index()] = false;
    }
}

/// All elements of the group generated by `group`.
fn closure(task: &FondTask, group: &PermutationGroup) -> HashSet<Permutation> {
    let id = Permutation::identity(task);
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in group.generators() {
            let q = g.compose(&p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen
}

fn mirror_tasks(seed: u64, count: usize) -> impl Iterator<Item = fondplan::validator::MicroTask> {
    enumerate_micro_tasks(
        seed,
        MicroCaps {
            max_states: 7,
            max_actions: 2,
            max_outcomes: 2,
            archetype: Some(Archetype::Mirror),
        },
    )
    .take(count)
}

#[test]
fn six_state_has_no_symmetries() {
    let (_, t) = load("six-state.json");
    let g = find_generators(&t, None);
    assert!(g.is_trivial() && !g.timed_out);
    assert_eq!(brute_force_symmetries(&t).len(), 1);
}

#[test]
fn single_fact_task_has_no_symmetries() {
    let t = fondplan::parse::parse_explicit(r#"{"states":["g"],"init":"g","goals":["g"],"actions":[]}"#).unwrap();
    assert!(find_generators(&t, None).is_trivial());
}

#[test]
fn two_packages_swap() {
    let t = load_pddl("packages-domain.pddl", "packages-2.pddl");
    let g = find_generators(&t, None);
    assert!(!g.is_trivial());
    for sigma in g.generators() {
        assert!(check_symmetry(&t, sigma));
    }
    assert_eq!(closure(&t, &g), brute_force_symmetries(&t));

    let at = |p: &str, l: &str| t.fact_by_name(&format!("at({p},{l})")).unwrap();
    let s1 = State::from_facts(t.num_facts(), [at("p1", "depot"), at("p2", "home")]);
    let s2 = State::from_facts(t.num_facts(), [at("p1", "home"), at("p2", "depot")]);
    let orbit = g.orbit(&s1, 100).unwrap();
    assert_eq!(orbit.len(), 2);
    assert!(orbit.contains(&s2));
    let (lo, hi) = if s1 < s2 { (&s1, &s2) } else { (&s2, &s1) };
    assert_eq!(&greedy_signature(hi, &g), lo);
    assert_eq!(&greedy_signature(lo, &g), lo);
    assert_eq!(
        canonical_signature(&s1, &g, 100).unwrap(),
        canonical_signature(&s2, &g, 100).unwrap()
    );

    // p2 has no goal, so the packages never swap; p2's own locations still may
    let asym = load_pddl("packages-domain.pddl", "packages-asym.pddl");
    let ga = find_generators(&asym, None);
    let all = closure(&asym, &ga);
    assert_eq!(all, brute_force_symmetries(&asym));
    let goal = asym.fact_by_name("at(p1,depot)").unwrap();
    assert!(all.iter().all(|p| p.fact(goal) == goal));
}

#[test]
fn tireworld_branches_are_symmetric() {
    let t = load_pddl("tireworld-domain.pddl", "tireworld-1.pddl");
    let g = find_generators(&t, None);
    assert_eq!(closure(&t, &g).len(), 2);
}

#[test]
fn generators_match_brute_force_on_micro_tasks() {
    let random = enumerate_micro_tasks(
        3,
        MicroCaps {
            max_states: 6,
            ..MicroCaps::default()
        },
    )
    .take(150);
    let mut nontrivial = 0;
    for m in random.chain(mirror_tasks(4, 150)) {
        let g = find_generators(&m.task, None);
        for sigma in g.generators() {
            assert!(check_symmetry(&m.task, sigma), "{:?}", m.graph);
        }
        let brute = brute_force_symmetries(&m.task);
        assert_eq!(closure(&m.task, &g), brute, "{:?}", m.graph);
        nontrivial += usize::from(brute.len() > 1);
    }
    assert!(nontrivial > 50);
}

#[test]
fn transition_system_is_equivariant() {
    for m in mirror_tasks(5, 200) {
        let t = &m.task;
        let g = find_generators(t, None);
        for sigma in g.generators() {
            for s in reachable_states(t, 64).unwrap() {
                let ss = sigma.apply(&s);
                assert_eq!(t.is_goal(&s), t.is_goal(&ss));
                for a in t.action_ids() {
                    let b = sigma.action(a);
                    assert_eq!(t.applicable(&s, a), t.applicable(&ss, b));
                    if t.applicable(&s, a) {
                        let mut img: Vec<State> = t.successors(&s, a).unwrap().iter().map(|x| sigma.apply(x)).collect();
                        let mut direct = t.successors(&ss, b).unwrap();
                        img.sort();
                        direct.sort();
                        img.dedup();
                        direct.dedup();
                        assert_eq!(img, direct);
                    }
                }
            }
        }
    }
}

#[test]
fn signature_properties() {
    for m in mirror_tasks(6, 200) {
        let t = &m.task;
        let g = find_generators(t, None);
        let states = reachable_states(t, 64).unwrap();
        for s in &states {
            let canon = canonical_signature(s, &g, 1000).unwrap();
            let greedy = greedy_signature(s, &g);
            let orbit = g.orbit(s, 1000).unwrap();
            assert!(orbit.contains(&greedy));
            assert!(canon <= greedy);
            assert_eq!(canonical_signature(&canon, &g, 1000).unwrap(), canon);
            for sigma in g.generators() {
                assert_eq!(canonical_signature(&sigma.apply(s), &g, 1000).unwrap(), canon);
            }
            for s2 in &states {
                if greedy_signature(s2, &g) == greedy {
                    assert_eq!(canonical_signature(s2, &g, 1000).unwrap(), canon);
                }
            }
        }
    }
}

#[test]
fn memoized_signature_matches_direct_computation() {
    for m in mirror_tasks(7, 50) {
        let g = find_generators(&m.task, None);
        let canon = SymmetrySignature::new(g.clone(), SymmetryMode::Canonical { orbit_budget: 1000 });
        let greedy = SymmetrySignature::new(g.clone(), SymmetryMode::Greedy);
        for s in reachable_states(&m.task, 64).unwrap() {
            for _ in 0..2 {
                assert_eq!(canon.signature(&s), canonical_signature(&s, &g, 1000).unwrap());
                assert_eq!(greedy.signature(&s), greedy_signature(&s, &g));
            }
        }
    }
}

#[test]
fn frontier_symmetric_agrees_with_frontier() {
    let mut solved = 0;
    for m in mirror_tasks(8, 200) {
        let t = &m.task;
        let h = DeleteRelaxation::new(t, false);
        let run = |pruning, sym: Option<&dyn StateSignature>| {
            let mut order = MostRecent;
            let mut ctx = SearchContext {
                heuristic: &h,
                order: &mut order,
                symmetry: sym,
            };
            let config = SearchConfig {
                pruning,
                use_concretizer: true,
                ..SearchConfig::default()
            };
            run_planner(t, &config, &mut ctx)
        };
        let plain = run(Pruning::Frontier, None);
        for mode in [SymmetryMode::Greedy, SymmetryMode::Canonical { orbit_budget: 1000 }] {
            let sig = SymmetrySignature::new(find_generators(t, None), mode);
            let sym = run(Pruning::FrontierSymmetric, Some(&sig));
            assert_eq!(
                plain.outcome.solution().is_some(),
                sym.outcome.solution().is_some(),
                "{:?}",
                m.graph
            );
            if let Some(p) = sym.outcome.solution() {
                assert!(verify_strong_cyclic(t, p).ok());
                solved += 1;
            }
        }
    }
    assert!(solved > 100);
}

#[test]
fn zero_budget_disables_symmetry() {
    let t = load_pddl("packages-domain.pddl", "packages-2.pddl");
    let g = find_generators(&t, Some(std::time::Duration::ZERO));
    assert!(g.timed_out && g.is_trivial());
}

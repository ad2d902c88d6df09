mod common;

use common::{load, Named};
use fondplan::heuristics::{make_heuristic, DeleteRelaxation, HeuristicKind, SearchMode};
use fondplan::policy::{Policy, StateSpace};
use fondplan::search::{
    and_star, expand, run_planner, signature, MostRecent, Outcome, Pruning, ScriptedOrder, SearchConfig, SearchContext,
};
use fondplan::task::FondTask;
use fondplan::validator::{brute_force_optimum, verify_strong_cyclic, DEFAULT_ORACLE_CAP};

fn solve(task: &FondTask, config: &SearchConfig, script: Option<&str>) -> fondplan::search::SearchResult {
    let h = DeleteRelaxation::new(task, false);
    let mut scripted;
    let mut recent = MostRecent;
    let order: &mut dyn fondplan::search::ExpansionOrder = match script {
        Some(s) => {
            scripted = ScriptedOrder::parse(s);
            &mut scripted
        }
        None => &mut recent,
    };
    let mut ctx = SearchContext {
        heuristic: &h,
        order,
        symmetry: None,
    };
    run_planner(task, config, &mut ctx)
}

fn solved_size(task: &FondTask, r: &fondplan::search::SearchResult) -> usize {
    let p = r.outcome.solution().expect("solved");
    assert!(verify_strong_cyclic(task, p).ok());
    p.len()
}

#[test]
fn optimal_on_figures_with_identity_pruning() {
    for (name, size) in [("six-state.json", 5), ("frontier-trap.json", 4), ("dead-end.json", 5)] {
        let (_, t) = load(name);
        let r = solve(&t, &SearchConfig::default(), None);
        assert_eq!(solved_size(&t, &r), size, "{name}");
        assert_eq!(brute_force_optimum(&t, DEFAULT_ORACLE_CAP), Ok(Some(size)));
        assert!(r.stats.generated >= r.stats.expanded);
    }
}

#[test]
fn goal_init_returns_empty_policy() {
    let t = fondplan::parse::parse_explicit(r#"{"states":["g"],"init":"g","goals":["g"],"actions":[]}"#).unwrap();
    let r = solve(&t, &SearchConfig::default(), None);
    assert_eq!(solved_size(&t, &r), 0);
}

#[test]
fn dead_end_expansions() {
    let (g, t) = load("dead-end.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let root = Policy::empty(&sp);
    let kids = expand(&sp, &root, &mut MostRecent);
    let acts: Vec<_> = kids.iter().map(|p| p.action_at(n.s("A")).unwrap()).collect();
    assert_eq!(acts, vec![n.a("A", "a"), n.a("A", "a_bad")]);
    // X has no applicable action
    let bad = &kids[1];
    assert_eq!(bad.remain().last(), Some(&n.s("X")));
    assert!(expand(&sp, bad, &mut MostRecent).is_empty());
}

#[test]
fn dead_end_signatures() {
    let (g, t) = load("dead-end.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let base = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a")), (n.s("B"), n.a("B", "b"))]).unwrap();
    let pl = base.extend(&sp, n.s("D"), n.a("D", "d_L")).unwrap();
    let pr = base.extend(&sp, n.s("D"), n.a("D", "d_R")).unwrap();
    let sig = |p: &Policy, k| signature(&sp, p, k, false, None);
    assert_ne!(sig(&pl, Pruning::Identity), sig(&pr, Pruning::Identity));
    assert_ne!(sig(&pl, Pruning::Lanes), sig(&pr, Pruning::Lanes));
    assert_eq!(sig(&pl, Pruning::DomainFrontier), sig(&pr, Pruning::DomainFrontier));
    assert_eq!(sig(&pl, Pruning::Frontier), sig(&pr, Pruning::Frontier));
}

#[test]
fn frontier_trap_frontier_signatures_coincide() {
    let (g, t) = load("frontier-trap.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p1 = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a_L"))]).unwrap();
    let p2 = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a_R"))]).unwrap();
    let p3 = p1.extend(&sp, n.s("B"), n.a("B", "b")).unwrap();
    let p4 = p2.extend(&sp, n.s("C"), n.a("C", "c")).unwrap();
    let sig = |p: &Policy| signature(&sp, p, Pruning::Frontier, false, None);
    assert_eq!(sig(&p1), sig(&p4));
    assert_eq!(sig(&p2), sig(&p3));
    assert_ne!(sig(&p1), sig(&p2));
}

#[test]
fn dead_end_domain_frontier_deduces_solution() {
    let (g, t) = load("dead-end.json");
    let config = SearchConfig {
        pruning: Pruning::DomainFrontier,
        use_concretizer: true,
        ..SearchConfig::default()
    };
    let r = solve(&t, &config, Some("D d_R d_L\n"));
    let p = r.outcome.solution().unwrap();
    assert!(verify_strong_cyclic(&t, p).ok());
    assert_eq!(r.stats.solutions_from_concretizer, 1);
    assert_eq!(r.stats.concretizer_calls, 1);
    let d = g.state(&t, "D").unwrap();
    assert_eq!(t.action(p.get(&d).unwrap()).name, "d_L");
}

#[test]
fn dead_end_domain_frontier_without_concretizer_misprunes() {
    let (_, t) = load("dead-end.json");
    let config = SearchConfig {
        pruning: Pruning::DomainFrontier,
        ..SearchConfig::default()
    };
    let r = solve(&t, &config, Some("D d_R d_L\n"));
    assert_eq!(r.outcome, Outcome::Bottom);
    assert_eq!(r.stats.pruned_by_equivalence, 1);
    let identity = solve(&t, &SearchConfig::default(), Some("D d_R d_L\n"));
    assert!(identity.outcome.solution().is_some());
}

#[test]
fn frontier_trap_frontier_pruning_needs_backup() {
    let (_, t) = load("frontier-trap.json");
    let config = SearchConfig {
        pruning: Pruning::Frontier,
        ..SearchConfig::default()
    };
    let h = DeleteRelaxation::new(&t, false);
    let mut order = ScriptedOrder::parse("B\nC\n");
    let mut ctx = SearchContext {
        heuristic: &h,
        order: &mut order,
        symmetry: None,
    };
    let first = and_star(&t, &config, &mut ctx);
    assert_eq!(first.outcome, Outcome::Bottom);
    assert_eq!(first.stats.expanded, 3);
    assert_eq!(first.stats.pruned_by_equivalence, 2);

    let r = run_planner(&t, &config, &mut ctx);
    assert!(r.stats.backup_used);
    assert_eq!(solved_size(&t, &r), 4);
}

#[test]
fn six_state_frontier_pruning_needs_no_backup() {
    let (_, t) = load("six-state.json");
    let config = SearchConfig {
        pruning: Pruning::Frontier,
        ..SearchConfig::default()
    };
    let r = solve(&t, &config, None);
    assert!(!r.stats.backup_used);
    assert_eq!(solved_size(&t, &r), 5);
}

#[test]
fn unreachable_goal_is_bottom_in_both_phases() {
    let t = fondplan::parse::parse_explicit(
        r#"{"states":["a","b","g"],"init":"a","goals":["g"],"actions":[
            {"label":"x","from":"a","outcomes":["b"]},
            {"label":"y","from":"b","outcomes":["a"]}]}"#,
    )
    .unwrap();
    for pruning in Pruning::ALL.into_iter().filter(|p| *p != Pruning::FrontierSymmetric) {
        let config = SearchConfig {
            pruning,
            ..SearchConfig::default()
        };
        let h = make_heuristic(&t, HeuristicKind::Blind);
        let mut order = MostRecent;
        let mut ctx = SearchContext {
            heuristic: h.as_ref(),
            order: &mut order,
            symmetry: None,
        };
        assert_eq!(run_planner(&t, &config, &mut ctx).outcome, Outcome::Bottom);
    }
}

#[test]
fn policy_cap_is_a_resource_limit() {
    let (_, t) = load("six-state.json");
    let config = SearchConfig {
        max_policies: Some(2),
        pruning: Pruning::Frontier,
        ..SearchConfig::default()
    };
    let r = solve(&t, &config, None);
    assert_eq!(r.outcome, Outcome::ResourceLimit(fondplan::search::Limit::Policies));
    assert!(!r.stats.backup_used);
}

#[test]
fn every_mode_returns_valid_solutions_on_fixtures() {
    for name in ["six-state.json", "dead-end.json", "frontier-trap.json"] {
        let (_, t) = load(name);
        for mode in [
            SearchMode::AStar,
            SearchMode::WAStar(2),
            SearchMode::WAStar(5),
            SearchMode::Gbfs,
        ] {
            for pruning in [
                Pruning::Identity,
                Pruning::Lanes,
                Pruning::DomainFrontier,
                Pruning::Frontier,
            ] {
                for deadlock_detection in [false, true] {
                    let config = SearchConfig {
                        mode,
                        pruning,
                        deadlock_detection,
                        use_concretizer: true,
                        ..SearchConfig::default()
                    };
                    let r = solve(&t, &config, None);
                    solved_size(&t, &r);
                }
            }
        }
    }
}

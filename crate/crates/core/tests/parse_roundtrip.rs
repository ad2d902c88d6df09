mod common;

use std::collections::BTreeSet;

use common::{fixture_path, load_pddl};
use fondplan::parse::{parse_pddl, write_pddl, ExplicitGraph};
use fondplan::task::FondTask;
use fondplan::validator::{enumerate_micro_tasks, MicroCaps};

type Shape = (
    Vec<u32>,
    Vec<(Vec<usize>, BTreeSet<(Vec<usize>, Vec<usize>)>)>,
    Vec<usize>,
    Vec<usize>,
);

/// Structure of a task up to names and action partitions.
fn shape(t: &FondTask) -> Shape {
    (
        t.facts().iter().map(|f| f.partition).collect(),
        t.actions()
            .iter()
            .map(|a| {
                (
                    a.pre.iter().collect(),
                    a.effects
                        .iter()
                        .map(|e| (e.del.iter().collect(), e.add.iter().collect()))
                        .collect(),
                )
            })
            .collect(),
        t.init().true_facts().collect(),
        t.goal().iter().collect(),
    )
}

fn round_trip(t: &FondTask) -> FondTask {
    let (d, p) = write_pddl(t);
    parse_pddl(&d, &p).unwrap_or_else(|e| panic!("{e}\n{d}\n{p}"))
}

/// Whether grounding keeps every fact, that is each one is mentioned by
/// some action, the initial state or the goal.
fn no_idle_facts(t: &FondTask) -> bool {
    t.facts().iter().all(|f| {
        t.init().holds(f.id)
            || t.goal().contains(f.id)
            || t.actions()
                .iter()
                .any(|a| a.pre.contains(f.id) || a.effects.iter().any(|e| e.add.contains(f.id) || e.del.contains(f.id)))
    })
}

fn check_idempotent(t1: &FondTask) -> bool {
    let t2 = round_trip(t1);
    let exact = no_idle_facts(t1);
    if exact {
        assert_eq!(shape(t1), shape(&t2));
    }
    let t3 = round_trip(&t2);
    assert_eq!(shape(&t2), shape(&t3));
    // comments carry source names, which renumbering may change
    let text = |t: &FondTask| {
        let (d, p) = write_pddl(t);
        format!("{d}{p}")
            .lines()
            .filter(|l| !l.trim_start().starts_with(';'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(text(&t2), text(&t3));
    let parts = |t: &FondTask| t.actions().iter().map(|a| a.partition).collect::<Vec<_>>();
    assert_eq!(parts(&t2), parts(&t3));
    exact
}

#[test]
fn pddl_fixtures_round_trip() {
    for (d, p) in [
        ("packages-domain.pddl", "packages-2.pddl"),
        ("packages-domain.pddl", "packages-asym.pddl"),
        ("tireworld-domain.pddl", "tireworld-1.pddl"),
    ] {
        assert!(check_idempotent(&load_pddl(d, p)));
    }
}

#[test]
fn explicit_tasks_round_trip_through_pddl() {
    let exact = enumerate_micro_tasks(21, MicroCaps::default())
        .take(200)
        .filter(|m| check_idempotent(&m.task))
        .count();
    assert!(exact > 100);
}

#[test]
fn explicit_documents_round_trip() {
    for name in ["six-state.json", "dead-end.json", "frontier-trap.json"] {
        let text = std::fs::read_to_string(fixture_path(name)).unwrap();
        let g1 = ExplicitGraph::from_json(&text).unwrap();
        let g2 = ExplicitGraph::from_json(&g1.to_json()).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(g1.to_json(), g2.to_json());
        assert_eq!(shape(&g1.to_task().unwrap()), shape(&g2.to_task().unwrap()));
    }
    for m in enumerate_micro_tasks(22, MicroCaps::default()).take(200) {
        let g2 = ExplicitGraph::from_json(&m.graph.to_json()).unwrap();
        assert_eq!(m.graph, g2);
    }
}

#[test]
fn tasks_without_actions_keep_their_facts() {
    // no roads, so no grounded action touches vehicle-at; it is still
    // fluent in the lifted domain
    let domain = std::fs::read_to_string(fixture_path("pddl/tireworld-domain.pddl")).unwrap();
    let problem = "(define (problem stuck) (:domain tireworld) (:objects n0 n3 - location)
        (:init (vehicle-at n0) (not-flattire)) (:goal (vehicle-at n3)))";
    let t = parse_pddl(&domain, problem).unwrap();
    assert!(t.actions().iter().all(|a| a.name.starts_with("changetire")));
    assert_eq!(t.init().true_facts().count(), 2);
    assert!(check_idempotent(&t));
}

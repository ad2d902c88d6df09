mod common;

use std::collections::HashSet;

use common::{load, Named};
use fondplan::policy::{Policy, PolicyError, StateSpace};

#[test]
fn six_state_unique_solution() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
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
    assert!(!p.is_solution());
    let p2 = p.extend(&sp, n.s("E"), n.a("E", "e")).unwrap();
    assert!(p2.remain().is_empty());
    assert!(p2.is_solution());
    assert!(p2.is_proper_full(&sp));
    assert_eq!(p2.len(), 5);
}

#[test]
fn six_state_strong_cyclic_fragment_is_proper() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p1 = Policy::from_mappings(&sp, [(n.s("D"), n.a("D", "d")), (n.s("E"), n.a("E", "e"))]).unwrap();
    assert!(p1.is_proper());
}

#[test]
fn six_state_deadlock_between_b_and_c() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a")), (n.s("B"), n.a("B", "b"))]).unwrap();
    assert!(p.deadlock_on_extend(&sp, n.s("C"), n.a("C", "c_R")).unwrap());
    let p3 = p.extend(&sp, n.s("C"), n.a("C", "c_R")).unwrap();
    assert!(!p3.is_proper());
    assert!(!p3.is_proper_full(&sp));
    assert!(p3.escape_set(&sp, n.s("B")).unwrap().is_empty());
}

#[test]
fn extension_errors() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p = Policy::empty(&sp).extend(&sp, n.s("A"), n.a("A", "a")).unwrap();
    assert_eq!(p.domain().collect::<Vec<_>>(), vec![n.s("A")]);
    assert_eq!(
        p.extend(&sp, n.s("A"), n.a("A", "a")).unwrap_err(),
        PolicyError::AlreadyMapped
    );
    assert!(matches!(
        p.extend(&sp, n.s("B"), n.a("A", "a")),
        Err(PolicyError::NotApplicable(_))
    ));
    assert_eq!(
        p.extend(&sp, n.s("F"), n.a("A", "a")).unwrap_err(),
        PolicyError::GoalStateMapped
    );
    assert_eq!(p.escape_set(&sp, n.s("B")).unwrap_err(), PolicyError::NotInDomain);
}

#[test]
fn empty_policy_basics() {
    let (_, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let p = Policy::empty(&sp);
    assert!(p.is_proper());
    assert!(!p.is_solution());
    assert!(p.lanes(&sp).is_empty());
    assert_eq!(p.remain().len(), 1);

    let (_, goal_only) = {
        let g = fondplan::parse::ExplicitGraph::from_json(r#"{"states":["g"],"init":"g","goals":["g"],"actions":[]}"#)
            .unwrap();
        let t = g.to_task().unwrap();
        (g, t)
    };
    let sp = StateSpace::new(&goal_only);
    assert!(Policy::empty(&sp).is_solution());
}

#[test]
fn dead_end_lanes_and_fronts() {
    let (g, t) = load("dead-end.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let base = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a")), (n.s("B"), n.a("B", "b"))]).unwrap();
    let pl = base.extend(&sp, n.s("D"), n.a("D", "d_L")).unwrap();
    let pr = base.extend(&sp, n.s("D"), n.a("D", "d_R")).unwrap();

    let front = |p: &Policy| p.front().iter().copied().collect::<std::collections::BTreeSet<_>>();
    assert_eq!(front(&pl), n.set(&["C", "E"]));
    assert_eq!(front(&pr), n.set(&["C", "E"]));

    let lanes = pl.lanes(&sp);
    assert_eq!(lanes[&n.s("A")], n.set(&["C", "E"]));
    assert_eq!(lanes[&n.s("B")], n.set(&["C", "E"]));
    assert_eq!(lanes[&n.s("D")], n.set(&["E"]));
    assert_eq!(pl.escape_set(&sp, n.s("D")).unwrap(), n.set(&["E"]));
    assert_eq!(pr.lanes(&sp)[&n.s("D")], n.set(&["C"]));

    let c = n.a("C", "c");
    assert!(pr.deadlock_on_extend(&sp, n.s("C"), c).unwrap());
    let p3 = pr.extend(&sp, n.s("C"), c).unwrap();
    assert!(p3.escape_set(&sp, n.s("C")).unwrap().is_empty());
    assert!(p3.escape_set(&sp, n.s("D")).unwrap().is_empty());
}

#[test]
fn dead_end_complete_but_improper_policy() {
    let (g, t) = load("dead-end.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p = Policy::from_mappings(
        &sp,
        [
            (n.s("A"), n.a("A", "a")),
            (n.s("B"), n.a("B", "b")),
            (n.s("D"), n.a("D", "d_R")),
            (n.s("E"), n.a("E", "e")),
            (n.s("C"), n.a("C", "c")),
        ],
    )
    .unwrap();
    assert!(p.remain().is_empty());
    assert!(!p.is_proper());
    assert!(!p.is_solution());
}

#[test]
fn remain_keeps_insertion_order() {
    let (g, t) = load("dead-end.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p = Policy::from_mappings(&sp, [(n.s("A"), n.a("A", "a")), (n.s("B"), n.a("B", "b"))]).unwrap();
    let names: Vec<String> = p.remain().iter().map(|&s| n.name(s)).collect();
    // successors are listed in state order
    assert_eq!(names, ["C", "D", "E"]);
    assert_eq!(p.remain().last(), Some(&n.s("E")));
}

#[test]
fn slice_of_proper_policy_is_proper() {
    let (g, t) = load("six-state.json");
    let sp = StateSpace::new(&t);
    let n = Named { graph: &g, space: &sp };
    let p = Policy::from_mappings(
        &sp,
        [
            (n.s("A"), n.a("A", "a")),
            (n.s("B"), n.a("B", "b")),
            (n.s("C"), n.a("C", "c_L")),
            (n.s("D"), n.a("D", "d")),
            (n.s("E"), n.a("E", "e")),
        ],
    )
    .unwrap();
    let keep: HashSet<_> = [n.s("B"), n.s("E")].into();
    let s = p.slice(&sp, &keep);
    assert_eq!(s.len(), 2);
    assert!(s.is_proper());
    assert!(s.is_proper_full(&sp));
}

#![allow(dead_code)]

use fondplan::parse::ExplicitGraph;
use fondplan::policy::{StateId, StateSpace};
use fondplan::task::{ActionId, FondTask};

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> (ExplicitGraph, FondTask) {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    let g = ExplicitGraph::from_json(&text).unwrap();
    let t = g.to_task().unwrap();
    (g, t)
}

/// Name-based access to an explicit fixture.
pub struct Named<'a> {
    pub graph: &'a ExplicitGraph,
    pub space: &'a StateSpace<'a>,
}

impl<'a> Named<'a> {
    pub fn s(&self, name: &str) -> StateId {
        let st = self.graph.state(self.space.task(), name).unwrap();
        self.space.intern(&st)
    }

    /// The action labelled `label` leaving `from`.
    pub fn a(&self, from: &str, label: &str) -> ActionId {
        let i = self
            .graph
            .actions
            .iter()
            .position(|x| x.from == from && x.label == label)
            .unwrap();
        ActionId(i as u32)
    }

    pub fn set(&self, names: &[&str]) -> std::collections::BTreeSet<StateId> {
        names.iter().map(|n| self.s(n)).collect()
    }

    pub fn name(&self, id: StateId) -> String {
        self.space.task().state_label(&self.space.state(id))
    }
}

/// Every ⟨D, F⟩ over the task's named states with D free of goal states and
/// D ∩ F = ∅, as state sets.
pub fn hollow_pairs(
    graph: &ExplicitGraph,
    task: &FondTask,
) -> Vec<(
    std::collections::BTreeSet<fondplan::task::State>,
    std::collections::BTreeSet<fondplan::task::State>,
)> {
    let states: Vec<_> = graph.states.iter().map(|n| graph.state(task, n).unwrap()).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(states.len() as u32);
    'codes: for mut code in 0..total {
        let mut d = std::collections::BTreeSet::new();
        let mut f = std::collections::BTreeSet::new();
        for s in &states {
            match code % 3 {
                1 if task.is_goal(s) => continue 'codes,
                1 => {
                    d.insert(s.clone());
                }
                2 => {
                    f.insert(s.clone());
                }
                _ => {}
            }
            code /= 3;
        }
        out.push((d, f));
    }
    out
}

/// Runs both concretizer implementations on every hollow pair and checks
/// them against exhaustive enumeration. Returns the violations found.
pub fn concretizer_violations(graph: &ExplicitGraph, task: &FondTask) -> Vec<String> {
    use fondplan::concretizer::{concretize, concretize_naive, HollowPolicy};
    use fondplan::validator::hollow_realizable;

    let mut bad = Vec::new();
    for (d, f) in hollow_pairs(graph, task) {
        let space = StateSpace::new(task);
        let hollow = HollowPolicy::new(d.iter().map(|s| space.intern(s)), f.iter().map(|s| space.intern(s)));
        let fast = concretize(&space, &hollow, false).unwrap();
        let slow = concretize_naive(&space, &hollow, false).unwrap();
        let expected = hollow_realizable(task, &d, &f);
        let tag = || format!("D={d:?} F={f:?}");
        if fast.is_some() != expected {
            bad.push(format!("completeness {}", tag()));
        }
        match (&fast, &slow) {
            (Some(a), Some(b)) if a.mappings() != b.mappings() => bad.push(format!("worklist/rescan differ {}", tag())),
            (Some(_), None) | (None, Some(_)) => bad.push(format!("worklist/rescan verdicts differ {}", tag())),
            _ => {}
        }
        if let Some(p) = fast {
            let sp = p.to_state_policy(&space);
            let dom: std::collections::BTreeSet<_> = sp.states().cloned().collect();
            if dom != d {
                bad.push(format!("domain {}", tag()));
            }
            if !sp.front(task).is_subset(&f) {
                bad.push(format!("front {}", tag()));
            }
            let v = fondplan::validator::verify_strong_cyclic(task, &sp);
            if v.violations
                .iter()
                .any(|x| x.rule == fondplan::validator::Rule::Properness)
            {
                bad.push(format!("properness {}", tag()));
            }
        }
    }
    bad
}

pub fn config(pruning: fondplan::search::Pruning) -> fondplan::search::SearchConfig {
    use fondplan::search::Pruning;
    fondplan::search::SearchConfig {
        pruning,
        use_concretizer: matches!(
            pruning,
            Pruning::DomainFrontier | Pruning::Frontier | Pruning::FrontierSymmetric
        ),
        ..Default::default()
    }
}

/// Checks optimal configurations against the brute-force optimum and the
/// frontier configuration for validity. Returns violations.
pub fn optimality_violations(task: &FondTask) -> Vec<String> {
    use fondplan::heuristics::DeleteRelaxation;
    use fondplan::search::{run_planner, MostRecent, Outcome, Pruning, SearchContext};
    use fondplan::validator::{brute_force_optimum, verify_strong_cyclic};

    let mut bad = Vec::new();
    let optimum = brute_force_optimum(task, 64).expect("micro task");
    let h = DeleteRelaxation::new(task, false);
    for pruning in [
        Pruning::Identity,
        Pruning::Lanes,
        Pruning::DomainFrontier,
        Pruning::Frontier,
    ] {
        let mut order = MostRecent;
        let mut ctx = SearchContext {
            heuristic: &h,
            order: &mut order,
            symmetry: None,
        };
        let r = run_planner(task, &config(pruning), &mut ctx);
        match (&r.outcome, optimum) {
            (Outcome::Solved(p), Some(opt)) => {
                if !verify_strong_cyclic(task, p).ok() {
                    bad.push(format!("{pruning:?}: invalid solution"));
                }
                if pruning != Pruning::Frontier && p.len() != opt {
                    bad.push(format!("{pruning:?}: size {} vs optimum {opt}", p.len()));
                }
            }
            (Outcome::Bottom, None) => {}
            (o, opt) => bad.push(format!("{pruning:?}: {o:?} vs optimum {opt:?}")),
        }
    }
    bad
}

pub fn load_pddl(domain: &str, problem: &str) -> FondTask {
    let read = |n: &str| std::fs::read_to_string(fixture_path(&format!("pddl/{n}"))).unwrap();
    fondplan::parse::parse_pddl(&read(domain), &read(problem)).unwrap()
}

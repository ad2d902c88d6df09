//! Small explicit-graph tasks for property tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parse::{ExplicitAction, ExplicitGraph};
use crate::task::FondTask;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Archetype {
    Random,
    /// A branch from init into a two-state cycle with no exit.
    DeadlockPair,
    /// Two copies of a fragment behind one non-deterministic split.
    Mirror,
    /// An init action that may fall into a state without actions.
    DeadEnd,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::Random,
        Archetype::DeadlockPair,
        Archetype::Mirror,
        Archetype::DeadEnd,
    ];
}

#[derive(Clone, Copy, Debug)]
pub struct MicroCaps {
    pub max_states: usize,
    pub max_actions: usize,
    pub max_outcomes: usize,
    /// Restricts the stream to one archetype; `None` cycles through all.
    pub archetype: Option<Archetype>,
}

impl Default for MicroCaps {
    fn default() -> Self {
        MicroCaps {
            max_states: 5,
            max_actions: 2,
            max_outcomes: 2,
            archetype: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MicroTask {
    pub archetype: Archetype,
    pub graph: ExplicitGraph,
    pub task: FondTask,
}

impl MicroTask {
    fn new(archetype: Archetype, graph: ExplicitGraph) -> Self {
        let task = graph.to_task().expect("generated graphs are valid");
        MicroTask { archetype, graph, task }
    }
}

fn names(n: usize, prefix: &str) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_outcomes(rng: &mut ChaCha8Rng, pool: &[String], max: usize) -> Vec<String> {
    let k = rng.gen_range(1..=max.min(pool.len()));
    let mut v: Vec<String> = pool.choose_multiple(rng, k).cloned().collect();
    v.sort();
    v
}

/// Random actions for the states in `from`, targeting `pool`. Action labels
/// are `a0`, `a1`, … per source state.
fn random_actions(rng: &mut ChaCha8Rng, from: &[String], pool: &[String], caps: &MicroCaps) -> Vec<ExplicitAction> {
    let mut out = Vec::new();
    for s in from {
        let n = rng.gen_range(0..=caps.max_actions);
        for i in 0..n {
            out.push(ExplicitAction {
                label: format!("a{i}"),
                from: s.clone(),
                outcomes: random_outcomes(rng, pool, caps.max_outcomes),
            });
        }
    }
    out
}

/// A random graph with `n` states; `s0` is init and the last state the goal.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, caps: &MicroCaps) -> ExplicitGraph {
    let states = names(n.max(1), "s");
    let goal = states.last().unwrap().clone();
    let nongoal = &states[..states.len() - 1];
    ExplicitGraph {
        actions: random_actions(rng, nongoal, &states, caps),
        init: states[0].clone(),
        goals: vec![goal],
        states,
    }
}

fn deadlock_pair(rng: &mut ChaCha8Rng, caps: &MicroCaps) -> ExplicitGraph {
    let n = rng.gen_range(2..=caps.max_states.saturating_sub(2).max(2));
    let mut g = random_graph(rng, n, caps);
    g.states.extend(["p".to_string(), "q".to_string()]);
    g.actions.push(ExplicitAction {
        label: "trap".into(),
        from: g.init.clone(),
        outcomes: vec!["p".into()],
    });
    g.actions.push(ExplicitAction {
        label: "x".into(),
        from: "p".into(),
        outcomes: vec!["q".into()],
    });
    g.actions.push(ExplicitAction {
        label: "x".into(),
        from: "q".into(),
        outcomes: vec!["p".into()],
    });
    g
}

fn dead_end(rng: &mut ChaCha8Rng, caps: &MicroCaps) -> ExplicitGraph {
    let n = rng.gen_range(2..=caps.max_states.saturating_sub(1).max(2));
    let mut g = random_graph(rng, n, caps);
    let target = g.states[1].clone();
    g.states.push("dead".into());
    g.actions.push(ExplicitAction {
        label: "risky".into(),
        from: g.init.clone(),
        outcomes: vec![target, "dead".into()],
    });
    g
}

fn mirror(rng: &mut ChaCha8Rng, caps: &MicroCaps) -> ExplicitGraph {
    // init, goal and two copies of a k-state fragment
    let k = rng.gen_range(1..=(caps.max_states.saturating_sub(2) / 2).max(1));
    let left = names(k, "l");
    let right = names(k, "r");
    let mut pool = left.clone();
    pool.push("goal".into());
    pool.push("init".into());
    let frag = random_actions(rng, &left, &pool, caps);
    let rename = |s: &String| match s.strip_prefix('l') {
        Some(i) => format!("r{i}"),
        None => s.clone(),
    };
    let mut actions = vec![ExplicitAction {
        label: "split".into(),
        from: "init".into(),
        outcomes: vec!["l0".into(), "r0".into()],
    }];
    for a in &frag {
        actions.push(a.clone());
        actions.push(ExplicitAction {
            label: a.label.clone(),
            from: rename(&a.from),
            outcomes: {
                let mut o: Vec<String> = a.outcomes.iter().map(rename).collect();
                o.sort();
                o
            },
        });
    }
    let mut states = vec!["init".to_string()];
    states.extend(left);
    states.extend(right);
    states.push("goal".into());
    ExplicitGraph {
        states,
        init: "init".into(),
        goals: vec!["goal".into()],
        actions,
    }
}

/// Deterministic stream of micro-tasks for `seed`.
pub fn enumerate_micro_tasks(seed: u64, caps: MicroCaps) -> impl Iterator<Item = MicroTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = 0usize;
    std::iter::from_fn(move || {
        let kind = caps.archetype.unwrap_or(Archetype::ALL[i % Archetype::ALL.len()]);
        i += 1;
        let graph = match kind {
            Archetype::Random => {
                let n = rng.gen_range(1..=caps.max_states.max(1));
                random_graph(&mut rng, n, &caps)
            }
            Archetype::DeadlockPair => deadlock_pair(&mut rng, &caps),
            Archetype::Mirror => mirror(&mut rng, &caps),
            Archetype::DeadEnd => dead_end(&mut rng, &caps),
        };
        Some(MicroTask::new(kind, graph))
    })
}

/// Every explicit graph on `n` states `s0..` with init `s0`, single goal
/// `s{n-1}` (which has no actions), at most `max_actions` actions per
/// non-goal state and at most `max_outcomes` outcomes per action.
pub fn exhaustive_family(n: usize, max_actions: usize, max_outcomes: usize) -> impl Iterator<Item = ExplicitGraph> {
    let family = Family::new(n, max_actions, max_outcomes);
    (0..family.size()).map(move |code| family.member(code))
}

/// Indexed access to the exhaustive family, for sampling families too
/// large to walk.
#[derive(Clone, Debug)]
pub struct Family {
    states: Vec<String>,
    outcome_sets: Vec<Vec<String>>,
    // per-state choices: increasing index sequences into outcome_sets
    per_state: Vec<Vec<usize>>,
}

impl Family {
    pub fn new(n: usize, max_actions: usize, max_outcomes: usize) -> Self {
        let states = names(n.max(1), "s");
        let mut outcome_sets: Vec<Vec<String>> = Vec::new();
        for mask in 1u32..(1 << states.len()) {
            if mask.count_ones() as usize <= max_outcomes {
                outcome_sets.push(
                    (0..states.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| states[i].clone())
                        .collect(),
                );
            }
        }
        let mut per_state: Vec<Vec<usize>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_actions {
            let mut next = Vec::new();
            for c in &frontier {
                let start = c.last().map_or(0, |&x| x + 1);
                for j in start..outcome_sets.len() {
                    let mut d = c.clone();
                    d.push(j);
                    next.push(d);
                }
            }
            per_state.extend(next.iter().cloned());
            frontier = next;
        }
        Family {
            states,
            outcome_sets,
            per_state,
        }
    }

    pub fn size(&self) -> u64 {
        (self.per_state.len() as u64).pow(self.states.len() as u32 - 1)
    }

    pub fn member(&self, mut code: u64) -> ExplicitGraph {
        let nongoal = self.states.len() - 1;
        let width = self.per_state.len() as u64;
        let mut actions = Vec::new();
        for s in self.states.iter().take(nongoal) {
            let choice = &self.per_state[(code % width) as usize];
            code /= width;
            for (i, &j) in choice.iter().enumerate() {
                actions.push(ExplicitAction {
                    label: format!("a{i}"),
                    from: s.clone(),
                    outcomes: self.outcome_sets[j].clone(),
                });
            }
        }
        ExplicitGraph {
            init: self.states[0].clone(),
            goals: vec![self.states[nongoal].clone()],
            states: self.states.clone(),
            actions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible() {
        let a: Vec<_> = enumerate_micro_tasks(0, MicroCaps::default())
            .take(20)
            .map(|m| m.graph)
            .collect();
        let b: Vec<_> = enumerate_micro_tasks(0, MicroCaps::default())
            .take(20)
            .map(|m| m.graph)
            .collect();
        assert_eq!(a, b);
        let c: Vec<_> = enumerate_micro_tasks(1, MicroCaps::default())
            .take(20)
            .map(|m| m.graph)
            .collect();
        assert_ne!(a, c);
    }

    #[test]
    fn family_sizes() {
        assert_eq!(exhaustive_family(1, 2, 2).count(), 1);
        // 3 outcome sets, 1 + 3 + 3 choices for the single non-goal state
        assert_eq!(exhaustive_family(2, 2, 2).count(), 7);
        assert_eq!(exhaustive_family(3, 2, 2).count(), 22 * 22);
        for g in exhaustive_family(3, 2, 2) {
            g.to_task().unwrap();
        }
    }
}

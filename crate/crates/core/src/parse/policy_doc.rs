//! JSON policy documents.
//!
//! ```json
//! {"task_hash": "…", "kind": "state",
//!  "mappings": [{"condition": {"state": "s0"}, "action": "go"}]}
//! ```
//!
//! State policies on explicit-graph tasks use `{"state": name}` conditions;
//! everything else uses `{fact: bool, …}` assignments. An action label that
//! does not identify a single action is written as `label@state`.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ParseError;
use crate::policy::{PartialPolicy, PartialState, StatePolicy};
use crate::task::{ActionId, FactSet, FondTask, State, TaskKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    State,
    Partial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Condition {
    State { state: String },
    Facts(BTreeMap<String, bool>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyRecord {
    pub condition: Condition,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    pub task_hash: String,
    pub kind: PolicyKind,
    pub mappings: Vec<PolicyRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReadPolicy {
    State(StatePolicy),
    Partial(PartialPolicy),
}

/// SHA-256 over a canonical rendering of the task.
pub fn task_hash(task: &FondTask) -> String {
    let mut h = Sha256::new();
    let set = |s: &FactSet| s.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",");
    h.update(format!("kind {:?}\n", task.kind()));
    for f in task.facts() {
        h.update(format!("fact {} {} {}\n", f.id, f.name, f.partition));
    }
    for a in task.actions() {
        h.update(format!(
            "action {} {} {} pre {}\n",
            a.id,
            a.name,
            a.partition,
            set(&a.pre)
        ));
        for e in &a.effects {
            h.update(format!("  del {} add {}\n", set(&e.del), set(&e.add)));
        }
    }
    h.update(format!(
        "init {}\ngoal {}\n",
        set(task.init().facts()),
        set(task.goal())
    ));
    hex::encode(h.finalize())
}

fn action_label(task: &FondTask, action: ActionId, condition_state: Option<&State>) -> String {
    let a = task.action(action);
    let same_name = task.actions().iter().filter(|b| b.name == a.name);
    let unique = match condition_state {
        Some(s) => same_name.filter(|b| task.applicable(s, b.id)).count() == 1,
        None => same_name.count() == 1,
    };
    if unique {
        return a.name.clone();
    }
    let from: Vec<&str> = a
        .pre
        .iter()
        .map(|f| &task.facts()[f])
        .filter(|f| f.partition == 0)
        .map(|f| f.name.as_str())
        .collect();
    format!("{}@{}", a.name, from.join("+"))
}

fn assignment(task: &FondTask, literals: impl Iterator<Item = (usize, bool)>) -> Condition {
    Condition::Facts(literals.map(|(f, v)| (task.facts()[f].name.clone(), v)).collect())
}

fn emit(doc: &PolicyDocument, mut sink: impl Write) -> Result<(), ParseError> {
    serde_json::to_writer_pretty(&mut sink, doc).map_err(std::io::Error::from)?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn state_policy_document(task: &FondTask, policy: &StatePolicy) -> PolicyDocument {
    let mappings = policy
        .iter()
        .map(|(s, &a)| PolicyRecord {
            condition: match task.kind() {
                TaskKind::ExplicitGraph => Condition::State {
                    state: task.state_label(s),
                },
                TaskKind::Strips => assignment(task, (0..task.num_facts()).map(|f| (f, s.holds(f)))),
            },
            action: action_label(task, a, Some(s)),
        })
        .collect();
    PolicyDocument {
        task_hash: task_hash(task),
        kind: PolicyKind::State,
        mappings,
    }
}

pub fn partial_policy_document(task: &FondTask, policy: &PartialPolicy) -> PolicyDocument {
    let mappings = policy
        .iter()
        .map(|(p, &a)| PolicyRecord {
            condition: assignment(task, p.literals()),
            action: action_label(task, a, None),
        })
        .collect();
    PolicyDocument {
        task_hash: task_hash(task),
        kind: PolicyKind::Partial,
        mappings,
    }
}

/// Writes a state-level policy, ordered by state.
pub fn write_policy(task: &FondTask, policy: &StatePolicy, sink: impl Write) -> Result<(), ParseError> {
    emit(&state_policy_document(task, policy), sink)
}

/// Writes a partial-state policy, ordered by partial state.
pub fn write_partial_policy(task: &FondTask, policy: &PartialPolicy, sink: impl Write) -> Result<(), ParseError> {
    emit(&partial_policy_document(task, policy), sink)
}

fn resolve_literals(task: &FondTask, facts: &BTreeMap<String, bool>) -> Result<PartialState, ParseError> {
    let mut p = PartialState::empty(task.num_facts());
    for (name, &v) in facts {
        let f = task
            .fact_by_name(name)
            .ok_or_else(|| ParseError::Schema(format!("unknown fact `{name}`")))?;
        p.assign(f, v);
    }
    Ok(p)
}

fn resolve_state(task: &FondTask, condition: &Condition) -> Result<State, ParseError> {
    match condition {
        Condition::State { state } => {
            if task.kind() != TaskKind::ExplicitGraph {
                return Err(ParseError::Schema("state names need an explicit-graph task".into()));
            }
            let f = task
                .facts()
                .iter()
                .find(|f| f.partition == 0 && f.name == *state)
                .ok_or_else(|| ParseError::DanglingStateReference(state.clone()))?;
            Ok(State::from_facts(task.num_facts(), [f.id]))
        }
        Condition::Facts(facts) => {
            let p = resolve_literals(task, facts)?;
            if p.len() != task.num_facts() {
                return Err(ParseError::Schema("state condition must assign every fact".into()));
            }
            Ok(State::from_facts(
                task.num_facts(),
                p.literals().filter(|l| l.1).map(|l| l.0),
            ))
        }
    }
}

/// Finds the action named by `label`. `fits` says whether an action is
/// compatible with the record's condition.
fn resolve_action(task: &FondTask, label: &str, fits: impl Fn(ActionId) -> bool) -> Result<ActionId, ParseError> {
    let pick = |name: &str, from: Option<&str>| -> Vec<ActionId> {
        task.actions()
            .iter()
            .filter(|a| a.name == name)
            .filter(|a| match from {
                None => true,
                Some(from) => {
                    let names: Vec<&str> = a
                        .pre
                        .iter()
                        .map(|f| &task.facts()[f])
                        .filter(|f| f.partition == 0)
                        .map(|f| f.name.as_str())
                        .collect();
                    names.join("+") == from
                }
            })
            .map(|a| a.id)
            .collect()
    };
    let mut found = pick(label, None);
    if found.is_empty() {
        if let Some((name, from)) = label.rsplit_once('@') {
            found = pick(name, Some(from));
        }
    }
    if found.len() > 1 {
        found.retain(|&a| fits(a));
    }
    match found.as_slice() {
        [a] => Ok(*a),
        [] => Err(ParseError::Schema(format!("unknown action `{label}`"))),
        _ => Err(ParseError::Schema(format!("ambiguous action `{label}`"))),
    }
}

pub fn read_policy_document(task: &FondTask, doc: &PolicyDocument) -> Result<ReadPolicy, ParseError> {
    if doc.task_hash != task_hash(task) {
        return Err(ParseError::Schema("policy was written for a different task".into()));
    }
    match doc.kind {
        PolicyKind::State => {
            let mut out = StatePolicy::new();
            for r in &doc.mappings {
                let s = resolve_state(task, &r.condition)?;
                let a = resolve_action(task, &r.action, |a| task.applicable(&s, a))?;
                if out.insert(s, a).is_some() {
                    return Err(ParseError::Schema("state mapped twice".into()));
                }
            }
            Ok(ReadPolicy::State(out))
        }
        PolicyKind::Partial => {
            let mut out = PartialPolicy::new();
            for r in &doc.mappings {
                let Condition::Facts(facts) = &r.condition else {
                    return Err(ParseError::Schema("partial policies need fact conditions".into()));
                };
                let p = resolve_literals(task, facts)?;
                let a = resolve_action(task, &r.action, |a| {
                    task.action(a).pre.iter().all(|f| p.get(f) != Some(false))
                })?;
                if out.insert(p, a).is_some() {
                    return Err(ParseError::Schema("partial state mapped twice".into()));
                }
            }
            Ok(ReadPolicy::Partial(out))
        }
    }
}

pub fn read_policy(task: &FondTask, json_text: &str) -> Result<ReadPolicy, ParseError> {
    let doc: PolicyDocument = serde_json::from_str(json_text).map_err(|e| ParseError::Schema(e.to_string()))?;
    read_policy_document(task, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_explicit;

    const LINE: &str = r#"{"states":["a","b","c"],"init":"a","goals":["c"],"actions":[
        {"label":"go","from":"a","outcomes":["b"]},
        {"label":"go","from":"b","outcomes":["c","a"]}]}"#;

    #[test]
    fn empty_policy_round_trips() {
        let t = parse_explicit(LINE).unwrap();
        let mut buf = Vec::new();
        write_policy(&t, &StatePolicy::new(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"mappings\": []"));
        assert_eq!(read_policy(&t, &text).unwrap(), ReadPolicy::State(StatePolicy::new()));
    }

    #[test]
    fn shared_labels_resolve_by_state() {
        let t = parse_explicit(LINE).unwrap();
        let mut p = StatePolicy::new();
        p.insert(State::from_facts(3, [0]), ActionId(0));
        p.insert(State::from_facts(3, [1]), ActionId(1));
        let mut buf = Vec::new();
        write_policy(&t, &p, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('@'));
        assert_eq!(read_policy(&t, &text).unwrap(), ReadPolicy::State(p));
    }

    #[test]
    fn ambiguous_partial_labels_are_qualified() {
        let t = parse_explicit(LINE).unwrap();
        let mut tau = PartialPolicy::new();
        tau.insert(PartialState::from_literals(3, [(1, false)]).unwrap(), ActionId(0));
        tau.insert(PartialState::from_literals(3, [(1, true)]).unwrap(), ActionId(1));
        let mut buf = Vec::new();
        write_partial_policy(&t, &tau, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("go@a"));
        assert_eq!(read_policy(&t, &text).unwrap(), ReadPolicy::Partial(tau));
    }

    #[test]
    fn foreign_policy_is_rejected() {
        let t = parse_explicit(LINE).unwrap();
        let doc = r#"{"task_hash":"00","kind":"state","mappings":[]}"#;
        assert!(matches!(read_policy(&t, doc), Err(ParseError::Schema(_))));
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let t = parse_explicit(LINE).unwrap();
        assert_eq!(task_hash(&t), task_hash(&parse_explicit(LINE).unwrap()));
        let other = parse_explicit(&LINE.replace("\"goals\":[\"c\"]", "\"goals\":[\"b\"]")).unwrap();
        assert_ne!(task_hash(&t), task_hash(&other));
        assert_eq!(task_hash(&t).len(), 64);
    }
}

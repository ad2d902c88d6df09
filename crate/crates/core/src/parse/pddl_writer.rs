//! Propositional PDDL output for grounded tasks.
//!
//! Each fact partition becomes a unary predicate over one object per fact,
//! so fact partitions survive a round trip. Each action becomes its own
//! parameterless schema, so action partitions do not: after one trip every
//! action is alone in its partition. A last schema that can never fire
//! adds every predicate, so grounding folds none of them as static. Facts
//! that no action, init or goal mentions are still dropped; a second trip
//! changes nothing.

use std::fmt::Write;

use crate::task::{FactSet, FondTask};

fn atom(task: &FondTask, f: usize) -> String {
    format!("(f{} x{f})", task.facts()[f].partition)
}

fn conjunction(task: &FondTask, pos: &FactSet, neg: Option<&FactSet>) -> String {
    let mut parts: Vec<String> = pos.iter().map(|f| atom(task, f)).collect();
    if let Some(n) = neg {
        parts.extend(n.iter().map(|f| format!("(not {})", atom(task, f))));
    }
    format!("(and {})", parts.join(" ")).replace("(and )", "(and)")
}

/// Domain and problem text; original fact and action names are kept in
/// comments.
pub fn write_pddl(task: &FondTask) -> (String, String) {
    let partitions = task.facts().iter().map(|f| f.partition).max().map_or(0, |p| p + 1);
    let mut d = String::new();
    writeln!(d, "(define (domain grounded)").unwrap();
    writeln!(d, "  (:requirements :strips :typing :non-deterministic)").unwrap();
    writeln!(d, "  (:types fact)").unwrap();
    let preds: Vec<String> = (0..partitions).map(|p| format!("(f{p} ?x - fact)")).collect();
    let objects: Vec<String> = (0..task.num_facts()).map(|f| format!("x{f}")).collect();
    if !objects.is_empty() {
        writeln!(d, "  (:constants {} - fact)", objects.join(" ")).unwrap();
    }
    writeln!(d, "  (:predicates {} (never))", preds.join(" ")).unwrap();
    for a in task.actions() {
        writeln!(d, "  ; {}", a.name).unwrap();
        writeln!(d, "  (:action a{}", a.id.0).unwrap();
        writeln!(d, "    :parameters ()").unwrap();
        writeln!(d, "    :precondition {}", conjunction(task, &a.pre, None)).unwrap();
        let effs: Vec<String> = a
            .effects
            .iter()
            .map(|e| conjunction(task, &e.add, Some(&e.del)))
            .collect();
        if effs.len() == 1 {
            writeln!(d, "    :effect {})", effs[0]).unwrap();
        } else {
            writeln!(d, "    :effect (oneof {}))", effs.join(" ")).unwrap();
        }
    }
    if partitions > 0 {
        let adds: Vec<String> = (0..partitions).map(|p| format!("(f{p} ?x)")).collect();
        writeln!(d, "  (:action keep-fluent").unwrap();
        writeln!(d, "    :parameters (?x - fact)").unwrap();
        writeln!(d, "    :precondition (never)").unwrap();
        writeln!(d, "    :effect (and {}))", adds.join(" ")).unwrap();
    }
    writeln!(d, ")").unwrap();

    let mut p = String::new();
    writeln!(p, "(define (problem grounded-problem)").unwrap();
    writeln!(p, "  (:domain grounded)").unwrap();
    for f in task.facts() {
        writeln!(p, "  ; x{} = {}", f.id, f.name).unwrap();
    }
    let init: Vec<String> = task.init().true_facts().map(|f| atom(task, f)).collect();
    writeln!(p, "  (:init {})", init.join(" ")).unwrap();
    writeln!(p, "  (:goal {}))", conjunction(task, task.goal(), None)).unwrap();
    (d, p)
}

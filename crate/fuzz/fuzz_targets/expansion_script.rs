#![no_main]
use std::sync::OnceLock;

use fondplan::heuristics::DeleteRelaxation;
use fondplan::parse::parse_explicit;
use fondplan::search::{run_planner, Pruning, ScriptedOrder, SearchConfig, SearchContext};
use fondplan::task::FondTask;
use fondplan::validator::verify_strong_cyclic;
use libfuzzer_sys::fuzz_target;

static TASK: OnceLock<FondTask> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    let task = TASK.get_or_init(|| parse_explicit(include_str!("../../fixtures/dead-end.json")).unwrap());
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let h = DeleteRelaxation::new(task, false);
    let mut order = ScriptedOrder::parse(text);
    let mut ctx = SearchContext {
        heuristic: &h,
        order: &mut order,
        symmetry: None,
    };
    let config = SearchConfig {
        pruning: Pruning::DomainFrontier,
        use_concretizer: true,
        max_policies: Some(10_000),
        ..SearchConfig::default()
    };
    // the script only reorders expansion, so the task stays solvable
    let r = run_planner(task, &config, &mut ctx);
    let p = r.outcome.solution().expect("solved");
    assert!(verify_strong_cyclic(task, p).ok());
});

#![no_main]
use fondplan::parse::ExplicitGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(graph) = ExplicitGraph::from_json(text) else {
        return;
    };
    let again = ExplicitGraph::from_json(&graph.to_json()).expect("written graph parses");
    assert_eq!(graph, again);
    if let Ok(task) = graph.to_task() {
        for s in &graph.states {
            let st = graph.state(&task, s).expect("named state");
            for a in task.applicable_actions(&st).collect::<Vec<_>>() {
                task.successors(&st, a).expect("applicable");
            }
        }
    }
});

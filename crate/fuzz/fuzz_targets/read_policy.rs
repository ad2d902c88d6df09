#![no_main]
use std::sync::OnceLock;

use fondplan::parse::{parse_explicit, read_policy, write_partial_policy, write_policy, ReadPolicy};
use fondplan::task::FondTask;
use fondplan::validator::verify_strong_cyclic;
use libfuzzer_sys::fuzz_target;

static TASK: OnceLock<FondTask> = OnceLock::new();

fuzz_target!(|data: &[u8]| {
    let task = TASK.get_or_init(|| parse_explicit(include_str!("../../fixtures/six-state.json")).unwrap());
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(policy) = read_policy(task, text) else {
        return;
    };
    let mut out = Vec::new();
    match &policy {
        ReadPolicy::State(p) => {
            let _ = verify_strong_cyclic(task, p);
            write_policy(task, p, &mut out).unwrap();
        }
        ReadPolicy::Partial(p) => write_partial_policy(task, p, &mut out).unwrap(),
    }
    let again = read_policy(task, std::str::from_utf8(&out).unwrap()).expect("written policy reads");
    assert_eq!(policy, again);
});

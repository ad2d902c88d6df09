#![no_main]
use fondplan::parse::{parse_pddl_with_cap, write_pddl};
use libfuzzer_sys::fuzz_target;

fn uncommented(pair: &(String, String)) -> String {
    format!("{}{}", pair.0, pair.1)
        .lines()
        .filter(|l| !l.trim_start().starts_with(';'))
        .collect::<Vec<_>>()
        .join("\n")
}

// domain and problem are separated by the first NUL byte
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (domain, problem) = text.split_once('\0').unwrap_or((text, ""));
    let Ok(t1) = parse_pddl_with_cap(domain, problem, 10_000) else {
        return;
    };
    let w1 = write_pddl(&t1);
    let t2 = parse_pddl_with_cap(&w1.0, &w1.1, 10_000).expect("written task parses");
    let w2 = write_pddl(&t2);
    let t3 = parse_pddl_with_cap(&w2.0, &w2.1, 10_000).expect("written task parses");
    assert_eq!(uncommented(&w2), uncommented(&write_pddl(&t3)));
});

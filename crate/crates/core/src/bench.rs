//! Planner configurations, per-run records and the benchmark harness.
//!
//! Records are written as CSV with one row per (task, config) pair.
//! Summaries aggregate per domain over the tasks every configuration
//! solved: ratios by arithmetic mean, everything else by geometric mean.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use crate::compressor::{compress_with, CoverOptions, SolverBudgetExceeded};
use crate::heuristics::{make_heuristic, HeuristicKind, SearchMode};
use crate::parse::{parse_explicit, parse_pddl, ParseError};
use crate::policy::{validate_partial_solution, PartialPolicy};
use crate::search::{
    run_planner, ExpansionOrder, MostRecent, Outcome, Pruning, SearchConfig, SearchContext, SearchResult,
};
use crate::symmetry::{find_generators, SymmetryMode, SymmetrySignature, DEFAULT_TIME_BUDGET};
use crate::task::FondTask;
use crate::validator::{enumerate_micro_tasks, verify_strong_cyclic, MicroCaps};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{0}: no domain file for this problem")]
    MissingDomain(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Everything that decides how a task is solved.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerConfig {
    pub name: String,
    pub search: SearchConfig,
    pub heuristic: HeuristicKind,
    pub symmetry: Option<SymmetryMode>,
    pub symmetry_time_budget: Option<Duration>,
    pub compress: bool,
    pub cover: CoverOptions,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            name: "identity".into(),
            search: SearchConfig::default(),
            heuristic: HeuristicKind::Hmax,
            symmetry: None,
            symmetry_time_budget: Some(DEFAULT_TIME_BUDGET),
            compress: false,
            cover: CoverOptions::default(),
        }
    }
}

impl PlannerConfig {
    /// A pruning name (`identity`, `lanes`, `domain-frontier`, `frontier`,
    /// `frontier-sym`) followed by any of `+dd` (deadlock detection), `+gm`
    /// (goal merging), `+compress`, `+blind`, `+hadd`, `+gbfs`, `+wastar<k>`.
    /// The concretizer is on for the frontier-style signatures and
    /// frontier-sym canonicalizes states.
    pub fn preset(name: &str) -> Result<Self, String> {
        let mut parts = name.split('+');
        let pruning: Pruning = parts.next().unwrap_or("").parse()?;
        let mut c = PlannerConfig {
            name: name.to_string(),
            ..PlannerConfig::default()
        };
        c.search.pruning = pruning;
        c.search.use_concretizer = matches!(
            pruning,
            Pruning::DomainFrontier | Pruning::Frontier | Pruning::FrontierSymmetric
        );
        if pruning == Pruning::FrontierSymmetric {
            c.symmetry = Some("canonical".parse()?);
        }
        for flag in parts {
            match flag {
                "dd" => c.search.deadlock_detection = true,
                "gm" => c.search.goal_merging = true,
                "compress" => c.compress = true,
                "blind" => c.heuristic = HeuristicKind::Blind,
                "hadd" => c.heuristic = HeuristicKind::Hadd,
                "gbfs" => c.search.mode = SearchMode::Gbfs,
                w if w.starts_with("wastar") => {
                    let k = w["wastar".len()..]
                        .parse()
                        .map_err(|_| format!("bad weight in `{w}`"))?;
                    c.search.mode = SearchMode::wastar(k).map_err(|e| e.to_string())?;
                }
                other => return Err(format!("unknown preset flag `{other}`")),
            }
        }
        Ok(c)
    }
}

#[derive(Debug)]
pub struct PlanReport {
    pub result: SearchResult,
    pub compressed: Option<PartialPolicy>,
    pub symmetry_generators: usize,
    /// A returned policy failed verification. Never expected.
    pub invalid: bool,
}

/// Searches, verifies and optionally compresses.
pub fn plan(
    task: &FondTask,
    config: &PlannerConfig,
    order: &mut dyn ExpansionOrder,
) -> Result<PlanReport, SolverBudgetExceeded> {
    let h = make_heuristic(task, config.heuristic);
    let signature = config.symmetry.map(|mode| {
        let group = find_generators(task, config.symmetry_time_budget);
        SymmetrySignature::new(group, mode)
    });
    let mut ctx = SearchContext {
        heuristic: h.as_ref(),
        order,
        symmetry: signature.as_ref().map(|s| s as &dyn crate::search::StateSignature),
    };
    let result = run_planner(task, &config.search, &mut ctx);
    let mut invalid = false;
    let mut compressed = None;
    if let Some(p) = result.outcome.solution() {
        invalid = !verify_strong_cyclic(task, p).ok();
        if config.compress {
            let tau = compress_with(task, p, &config.cover)?;
            invalid |= !validate_partial_solution(task, &tau);
            compressed = Some(tau);
        }
    }
    Ok(PlanReport {
        result,
        compressed,
        symmetry_generators: signature.map_or(0, |s| s.group().generators().len()),
        invalid,
    })
}

pub fn outcome_name(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Solved(_) => "solved",
        Outcome::Bottom => "bottom",
        Outcome::ResourceLimit(l) => l.name(),
    }
}

#[derive(Clone, Debug)]
pub struct BenchTask {
    pub id: String,
    pub domain: String,
    pub task: FondTask,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub task: String,
    pub domain: String,
    pub config: String,
    pub outcome: String,
    pub time_s: f64,
    pub generated: u64,
    pub solution_size: Option<usize>,
    pub compressed_size: Option<usize>,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.outcome == "solved"
    }
}

fn read(path: &Path) -> Result<String, BenchError> {
    Ok(std::fs::read_to_string(path)?)
}

fn parse_at(path: &Path, r: Result<FondTask, ParseError>) -> Result<FondTask, BenchError> {
    r.map_err(|source| BenchError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Tasks under `dir`: explicit graphs (`*.json`) and PDDL problems, each
/// paired with the `*domain.pddl` file of the longest matching prefix.
/// Tasks in a subdirectory belong to the domain named after it. Sorted by
/// path.
pub fn load_task_dir(dir: &Path) -> Result<Vec<BenchTask>, BenchError> {
    let mut out = Vec::new();
    let domain = dir
        .file_name()
        .map_or_else(|| "tasks".into(), |n| n.to_string_lossy().into_owned());
    load_into(dir, &domain, &mut out)?;
    Ok(out)
}

fn load_into(dir: &Path, domain: &str, out: &mut Vec<BenchTask>) -> Result<(), BenchError> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    entries.sort();
    let name = |p: &Path| p.file_name().unwrap().to_string_lossy().into_owned();
    let domains: Vec<&PathBuf> = entries.iter().filter(|p| name(p).ends_with("domain.pddl")).collect();
    for p in &entries {
        let n = name(p);
        if p.is_dir() {
            load_into(p, &n, out)?;
        } else if n.ends_with(".json") {
            let task = parse_at(p, parse_explicit(&read(p)?))?;
            out.push(BenchTask {
                id: n.trim_end_matches(".json").to_string(),
                domain: domain.to_string(),
                task,
            });
        } else if n.ends_with(".pddl") && !n.ends_with("domain.pddl") {
            let d = domains
                .iter()
                .filter(|d| n.starts_with(name(d).trim_end_matches("domain.pddl").trim_end_matches('-')))
                .max_by_key(|d| name(d).len())
                .ok_or_else(|| BenchError::MissingDomain(p.clone()))?;
            let task = parse_at(p, parse_pddl(&read(d)?, &read(p)?))?;
            out.push(BenchTask {
                id: n.trim_end_matches(".pddl").to_string(),
                domain: domain.to_string(),
                task,
            });
        }
    }
    Ok(())
}

/// `count` seeded micro-tasks, one domain per archetype.
pub fn micro_suite(seed: u64, count: usize, caps: MicroCaps) -> Vec<BenchTask> {
    enumerate_micro_tasks(seed, caps)
        .take(count)
        .enumerate()
        .map(|(i, m)| BenchTask {
            id: format!("micro-{i:04}"),
            domain: format!("{:?}", m.archetype).to_lowercase(),
            task: m.task,
        })
        .collect()
}

/// Runs every config on every task, in parallel; records come back in
/// task-major order.
pub fn run_bench(tasks: &[BenchTask], configs: &[PlannerConfig]) -> Vec<RunRecord> {
    let jobs: Vec<(&BenchTask, &PlannerConfig)> =
        tasks.iter().flat_map(|t| configs.iter().map(move |c| (t, c))).collect();
    jobs.par_iter()
        .map(|(t, c)| {
            let start = std::time::Instant::now();
            let (outcome, generated, solution_size, compressed_size) = match plan(&t.task, c, &mut MostRecent) {
                Ok(r) => {
                    let name = if r.invalid {
                        "invalid"
                    } else {
                        outcome_name(&r.result.outcome)
                    };
                    (
                        name.to_string(),
                        r.result.stats.generated,
                        r.result.outcome.solution().map(|p| p.len()),
                        r.compressed.map(|t| t.len()),
                    )
                }
                Err(_) => ("solver-limit".to_string(), 0, None, None),
            };
            RunRecord {
                task: t.id.clone(),
                domain: t.domain.clone(),
                config: c.name.clone(),
                outcome,
                time_s: start.elapsed().as_secs_f64(),
                generated,
                solution_size,
                compressed_size,
            }
        })
        .collect()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the records; `time_s` is left empty unless `timing` is set, so
/// untimed output is reproducible byte for byte.
pub fn write_records(records: &[RunRecord], timing: bool, sink: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "task",
        "domain",
        "config",
        "outcome",
        "time_s",
        "generated",
        "solution_size",
        "compressed_size",
    ])?;
    for r in records {
        let time = if timing {
            format!("{:.6}", r.time_s)
        } else {
            String::new()
        };
        w.write_record([
            r.task.as_str(),
            &r.domain,
            &r.config,
            &r.outcome,
            &time,
            &r.generated.to_string(),
            &opt(r.solution_size),
            &opt(r.compressed_size),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    if values.iter().any(|&v| v <= 0.0) {
        return Some(0.0);
    }
    Some((values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp())
}

pub fn arithmetic_mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    /// A domain name, or `TOTAL`.
    pub domain: String,
    pub config: String,
    pub tasks: usize,
    pub solved_ratio: f64,
    /// Tasks of the domain solved by every config.
    pub common: usize,
    pub time_s: Option<f64>,
    pub generated: Option<f64>,
    pub solution_size: Option<f64>,
    pub compressed_size: Option<f64>,
}

/// Per-domain and total rows for each config, in config order. Domain
/// rows average the tasks every config solved; the total weighs domains
/// equally, with geometric means except for the solved ratio.
pub fn summarize(records: &[RunRecord], configs: &[String]) -> Vec<SummaryRow> {
    let mut domains: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        domains.entry(&r.domain).or_default().push(r);
    }
    let mut rows = Vec::new();
    for (domain, recs) in &domains {
        let tasks: Vec<&str> = {
            let mut seen = HashSet::new();
            recs.iter()
                .map(|r| r.task.as_str())
                .filter(|t| seen.insert(*t))
                .collect()
        };
        let common: HashSet<&str> = tasks
            .iter()
            .copied()
            .filter(|t| {
                configs
                    .iter()
                    .all(|c| recs.iter().any(|r| r.task == *t && &r.config == c && r.solved()))
            })
            .collect();
        for c in configs {
            let mine: Vec<&&RunRecord> = recs.iter().filter(|r| &r.config == c).collect();
            let solved = mine.iter().filter(|r| r.solved()).count();
            let shared: Vec<&&RunRecord> = mine
                .iter()
                .copied()
                .filter(|r| common.contains(r.task.as_str()))
                .collect();
            let mean = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
                let v: Option<Vec<f64>> = shared.iter().map(|r| f(r)).collect();
                v.and_then(|v| arithmetic_mean(&v))
            };
            rows.push(SummaryRow {
                domain: domain.to_string(),
                config: c.clone(),
                tasks: tasks.len(),
                solved_ratio: if mine.is_empty() {
                    0.0
                } else {
                    solved as f64 / mine.len() as f64
                },
                common: common.len(),
                time_s: mean(&|r| Some(r.time_s)),
                generated: mean(&|r| Some(r.generated as f64)),
                solution_size: mean(&|r| r.solution_size.map(|x| x as f64)),
                compressed_size: mean(&|r| r.compressed_size.map(|x| x as f64)),
            });
        }
    }
    for c in configs {
        let per: Vec<&SummaryRow> = rows.iter().filter(|r| &r.config == c).collect();
        let geo = |f: &dyn Fn(&SummaryRow) -> Option<f64>| {
            let v: Vec<f64> = per.iter().filter_map(|r| f(r)).collect();
            geometric_mean(&v)
        };
        let total = SummaryRow {
            domain: "TOTAL".into(),
            config: c.clone(),
            tasks: per.iter().map(|r| r.tasks).sum(),
            solved_ratio: arithmetic_mean(&per.iter().map(|r| r.solved_ratio).collect::<Vec<_>>()).unwrap_or(0.0),
            common: per.iter().map(|r| r.common).sum(),
            time_s: geo(&|r| r.time_s),
            generated: geo(&|r| r.generated),
            solution_size: geo(&|r| r.solution_size),
            compressed_size: geo(&|r| r.compressed_size),
        };
        rows.push(total);
    }
    rows
}

pub fn write_summary(rows: &[SummaryRow], timing: bool, sink: impl Write) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "domain",
        "config",
        "tasks",
        "solved_ratio",
        "common",
        "time_s",
        "generated",
        "solution_size",
        "compressed_size",
    ])?;
    let f = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.domain.clone(),
            r.config.clone(),
            r.tasks.to_string(),
            format!("{:.2}", r.solved_ratio),
            r.common.to_string(),
            if timing {
                r.time_s.map(|x| format!("{x:.4}")).unwrap_or_default()
            } else {
                String::new()
            },
            f(r.generated),
            f(r.solution_size),
            f(r.compressed_size),
        ])?;
    }
    w.flush()?;
    Ok(())
}

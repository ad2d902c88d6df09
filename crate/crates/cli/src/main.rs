//! `plan`: solve, validate and compress FOND tasks, benchmark planner
//! configurations and inspect task symmetries.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fondplan::bench::{
    load_task_dir, micro_suite, outcome_name, plan, run_bench, summarize, write_records, write_summary, PlannerConfig,
    RunRecord,
};
use fondplan::compressor::{compress_with, CoverOptions, DEFAULT_NODE_BUDGET};
use fondplan::heuristics::{HeuristicKind, SearchMode};
use fondplan::parse::{parse_explicit, parse_pddl, read_policy, write_partial_policy, write_policy, ReadPolicy};
use fondplan::policy::validate_partial_solution;
use fondplan::search::{ExpansionOrder, MostRecent, Outcome, Pruning, ScriptedOrder};
use fondplan::symmetry::{find_generators, SymmetryMode, DEFAULT_ORBIT_BUDGET};
use fondplan::task::FondTask;
use fondplan::validator::{verify_strong_cyclic, MicroCaps};

const EXIT_INPUT: u8 = 1;
const EXIT_BOTTOM: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "plan", version, about = "Policy-space search planner for FOND tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a strong-cyclic policy.
    Solve(SolveArgs),
    /// Check a policy document against a task.
    Validate(ValidateArgs),
    /// Compress a state policy into a minimal partial-state policy.
    Compress(CompressArgs),
    /// Run configurations over a task directory or seeded micro-tasks.
    Bench(BenchArgs),
    /// Print structural symmetry generators and orbit sizes.
    Symmetries(SymmetryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        t == Toggle::On
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SymmetryArg {
    None,
    Greedy,
    Canonical,
}

#[derive(Args)]
struct TaskArgs {
    /// Explicit-graph JSON, or a PDDL domain file when --problem is given.
    task: PathBuf,
    /// PDDL problem file.
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: TaskArgs,
    #[arg(long, default_value = "identity")]
    pruning: Pruning,
    #[arg(long, default_value = "hmax")]
    heuristic: HeuristicKind,
    /// astar, gbfs or wastar:<k>
    #[arg(long, default_value = "astar")]
    algorithm: SearchMode,
    #[arg(long, value_enum, default_value = "off")]
    deadlock_detection: Toggle,
    /// Defaults to on for frontier-style pruning.
    #[arg(long, value_enum)]
    concretizer: Option<Toggle>,
    #[arg(long, value_enum, default_value = "off")]
    goal_merging: Toggle,
    #[arg(long)]
    max_policies: Option<u64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Defaults to canonical with frontier-sym pruning.
    #[arg(long, value_enum)]
    symmetry: Option<SymmetryArg>,
    #[arg(long, default_value_t = 5.0)]
    symmetry_time_budget: f64,
    #[arg(long, default_value_t = DEFAULT_ORBIT_BUDGET)]
    orbit_budget: usize,
    #[arg(long, value_enum, default_value = "off")]
    compress: Toggle,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    solver_node_budget: u64,
    /// Lines of `state [action ...]` fixing which remain state is mapped.
    #[arg(long)]
    expansion_order: Option<PathBuf>,
    /// Policy document; standard output if absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    compressed_output: Option<PathBuf>,
    /// One-row stats CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: TaskArgs,
    policy: PathBuf,
}

#[derive(Args)]
struct CompressArgs {
    #[command(flatten)]
    input: TaskArgs,
    policy: PathBuf,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    solver_node_budget: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Task directory; subdirectories are domains.
    dir: Option<PathBuf>,
    /// Also run this many micro-tasks seeded by PLANNER_SEED.
    #[arg(long, default_value_t = 0)]
    micro: usize,
    /// Config preset, e.g. `identity`, `frontier+dd`; repeatable.
    #[arg(long = "config", default_values_t = ["identity".to_string()])]
    configs: Vec<String>,
    /// Fill the time_s column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    max_policies: Option<u64>,
    #[arg(long)]
    time_limit: Option<f64>,
    /// Per-run CSV; standard output if absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct SymmetryArgs {
    #[command(flatten)]
    input: TaskArgs,
    #[arg(long, default_value_t = 5.0)]
    symmetry_time_budget: f64,
    #[arg(long, default_value_t = DEFAULT_ORBIT_BUDGET)]
    orbit_budget: usize,
}

struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load(args: &TaskArgs) -> Result<FondTask, Failure> {
    let text = read(&args.task)?;
    let parsed = match &args.problem {
        Some(p) => parse_pddl(&text, &read(p)?),
        None => parse_explicit(&text),
    };
    parsed.map_err(|e| input_error(format!("{}: {e}", args.task.display())))
}

fn seconds(s: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(s).map_err(|e| input_error(format!("bad duration {s}: {e}")))
}

fn create(path: &Path) -> Result<std::fs::File, Failure> {
    std::fs::File::create(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn std::io::Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let task = load(&args.input)?;
    let mut config = PlannerConfig::preset(args.pruning.name()).map_err(input_error)?;
    config.name = "cli".into();
    config.heuristic = args.heuristic;
    config.search.mode = args.algorithm;
    config.search.deadlock_detection = args.deadlock_detection.into();
    if let Some(c) = args.concretizer {
        config.search.use_concretizer = c.into();
    }
    config.search.goal_merging = args.goal_merging.into();
    config.search.max_policies = args.max_policies;
    config.search.time_limit = args.time_limit.map(seconds).transpose()?;
    if let Some(s) = args.symmetry {
        config.symmetry = match s {
            SymmetryArg::None => None,
            SymmetryArg::Greedy => Some(SymmetryMode::Greedy),
            SymmetryArg::Canonical => Some(SymmetryMode::Canonical {
                orbit_budget: args.orbit_budget,
            }),
        };
    } else if let Some(SymmetryMode::Canonical { orbit_budget }) = &mut config.symmetry {
        *orbit_budget = args.orbit_budget;
    }
    config.symmetry_time_budget = Some(seconds(args.symmetry_time_budget)?);
    config.compress = args.compress.into();
    config.cover.node_budget = Some(args.solver_node_budget);

    let mut scripted;
    let mut recent = MostRecent;
    let order: &mut dyn ExpansionOrder = match &args.expansion_order {
        Some(p) => {
            scripted = ScriptedOrder::parse(&read(p)?);
            &mut scripted
        }
        None => &mut recent,
    };
    let report = plan(&task, &config, order).map_err(|e| Failure {
        code: EXIT_LIMIT,
        message: e.to_string(),
    })?;
    if report.invalid {
        return Err(Failure {
            code: EXIT_INPUT,
            message: "internal error: returned policy failed verification".into(),
        });
    }
    let stats = &report.result.stats;
    eprintln!(
        "outcome={} size={} generated={} expanded={} pruned_by_equivalence={} pruned_by_deadlock={} \
         concretizer_calls={} solutions_from_concretizer={} backup_used={} time_s={:.3}",
        outcome_name(&report.result.outcome),
        report.result.outcome.solution().map_or(0, |p| p.len()),
        stats.generated,
        stats.expanded,
        stats.pruned_by_equivalence,
        stats.pruned_by_deadlock,
        stats.concretizer_calls,
        stats.solutions_from_concretizer,
        stats.backup_used,
        stats.elapsed.as_secs_f64(),
    );
    if let Some(path) = &args.stats {
        let record = RunRecord {
            task: args.input.task.display().to_string(),
            domain: String::new(),
            config: config.name.clone(),
            outcome: outcome_name(&report.result.outcome).into(),
            time_s: stats.elapsed.as_secs_f64(),
            generated: stats.generated,
            solution_size: report.result.outcome.solution().map(|p| p.len()),
            compressed_size: report.compressed.as_ref().map(|t| t.len()),
        };
        write_records(&[record], true, create(path)?).map_err(input_error)?;
    }
    match &report.result.outcome {
        Outcome::Solved(p) => {
            write_policy(&task, p, sink(args.output.as_ref())?).map_err(input_error)?;
            if let Some(tau) = &report.compressed {
                match &args.compressed_output {
                    Some(path) => write_partial_policy(&task, tau, create(path)?).map_err(input_error)?,
                    None => eprintln!("compressed_size={}", tau.len()),
                }
            }
            Ok(())
        }
        Outcome::Bottom => Err(Failure {
            code: EXIT_BOTTOM,
            message: "no strong-cyclic policy exists".into(),
        }),
        Outcome::ResourceLimit(l) => Err(Failure {
            code: EXIT_LIMIT,
            message: format!("stopped: {}", l.name()),
        }),
    }
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let task = load(&args.input)?;
    let policy = read_policy(&task, &read(&args.policy)?).map_err(input_error)?;
    let report = match policy {
        ReadPolicy::State(p) => verify_strong_cyclic(&task, &p).report(&task),
        ReadPolicy::Partial(tau) => {
            if validate_partial_solution(&task, &tau) {
                String::new()
            } else {
                "partial policy is not a solution\n".into()
            }
        }
    };
    if report.is_empty() {
        println!("valid");
        Ok(())
    } else {
        print!("{report}");
        Err(input_error("invalid policy"))
    }
}

fn compress_cmd(args: CompressArgs) -> Result<(), Failure> {
    let task = load(&args.input)?;
    let ReadPolicy::State(policy) = read_policy(&task, &read(&args.policy)?).map_err(input_error)? else {
        return Err(input_error("expected a state policy"));
    };
    let opts = CoverOptions {
        node_budget: Some(args.solver_node_budget),
        ..CoverOptions::default()
    };
    let tau = compress_with(&task, &policy, &opts).map_err(|e| Failure {
        code: EXIT_LIMIT,
        message: e.to_string(),
    })?;
    eprintln!("states={} partial_states={}", policy.len(), tau.len());
    write_partial_policy(&task, &tau, sink(args.output.as_ref())?).map_err(input_error)
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let mut configs = Vec::new();
    for name in &args.configs {
        let mut c = PlannerConfig::preset(name).map_err(input_error)?;
        c.search.max_policies = args.max_policies;
        c.search.time_limit = args.time_limit.map(seconds).transpose()?;
        configs.push(c);
    }
    let mut tasks = match &args.dir {
        Some(d) => load_task_dir(d).map_err(input_error)?,
        None => Vec::new(),
    };
    if args.micro > 0 {
        let seed = match std::env::var("PLANNER_SEED") {
            Ok(s) => s
                .parse()
                .map_err(|_| input_error(format!("PLANNER_SEED `{s}` is not an integer")))?,
            Err(_) => 0,
        };
        tasks.extend(micro_suite(seed, args.micro, MicroCaps::default()));
    }
    if tasks.is_empty() {
        return Err(input_error("no tasks: give a directory or --micro N"));
    }
    let records = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(input_error)?
            .install(|| run_bench(&tasks, &configs)),
        None => run_bench(&tasks, &configs),
    };
    write_records(&records, args.timing, sink(args.out.as_ref())?).map_err(input_error)?;
    if let Some(path) = &args.summary {
        let names: Vec<String> = configs.iter().map(|c| c.name.clone()).collect();
        write_summary(&summarize(&records, &names), args.timing, create(path)?).map_err(input_error)?;
    }
    Ok(())
}

fn symmetries(args: SymmetryArgs) -> Result<(), Failure> {
    let task = load(&args.input)?;
    let group = find_generators(&task, Some(seconds(args.symmetry_time_budget)?));
    println!("generators: {}", group.generators().len());
    if group.timed_out {
        println!("timed out: symmetry disabled");
    }
    for (i, g) in group.generators().iter().enumerate() {
        let moved: Vec<String> = (0..task.num_facts())
            .filter(|&f| g.fact(f) != f)
            .map(|f| format!("{}->{}", task.facts()[f].name, task.facts()[g.fact(f)].name))
            .collect();
        println!("  g{i}: {}", moved.join(" "));
    }
    match group.orbit(task.init(), args.orbit_budget) {
        Ok(orbit) => println!("init orbit size: {}", orbit.len()),
        Err(e) => println!("init orbit size: {e}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Validate(a) => validate(a),
        Command::Compress(a) => compress_cmd(a),
        Command::Bench(a) => bench(a),
        Command::Symmetries(a) => symmetries(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("plan: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

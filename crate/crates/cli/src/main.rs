//! Command-line front end: plan, translate, check, and bench.
//!
//! Exit codes: 0 success, 2 formula parse error, 3 unsupported fragment,
//! 4 infeasible task, 5 world/config error. `check` exits 1 when the plan
//! violates its specification.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use apmdp::automaton::{self, TranslateError};
use apmdp::bench;
use apmdp::ltl::{parse, LtlFormula, ParseError};
use apmdp::planner::{
    check_plan, parse_plan, solve_apmdp_with_reports, solve_pmdp, write_plan, CheckResult,
    Method, Plan, PlanError,
};
use apmdp::solver::RewardParams;
use apmdp::world::{Cell, WorldModel};

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_FRAGMENT: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;
const EXIT_CONFIG: u8 = 5;

#[derive(Parser)]
#[command(name = "apmdp", version, about = "Temporal-logic task planner for 3D gridworlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RewardArgs {
    /// Reward on entering a goal-satisfying state
    #[arg(long, default_value_t = 100.0)]
    gamma_goal: f64,
    /// Reward on violating the stay condition
    #[arg(long, default_value_t = -100.0)]
    gamma_stay: f64,
    /// Per-step reward
    #[arg(long, default_value_t = -1.0)]
    gamma_step: f64,
    /// Discount factor
    #[arg(long, default_value_t = 0.95)]
    discount: f64,
    /// Value-iteration convergence threshold
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
}

impl RewardArgs {
    fn params(&self) -> RewardParams {
        RewardParams {
            gamma_goal: self.gamma_goal,
            gamma_stay: self.gamma_stay,
            gamma_step: self.gamma_step,
            discount: self.discount,
            epsilon: self.epsilon,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct FormulaArgs {
    /// Task formula, e.g. "F (red_room & F floor_2)"
    #[arg(long, conflicts_with = "ltl_file")]
    ltl: Option<String>,
    /// File containing the task formula
    #[arg(long)]
    ltl_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a task and write the plan
    Plan {
        /// World config file
        #[arg(long)]
        env: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        /// Start cell X,Y,Z
        #[arg(long)]
        start: String,
        /// Planning method
        #[arg(long, default_value = "apmdp")]
        method: String,
        /// Plan output file
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        rewards: RewardArgs,
    },
    /// Compile a formula to its automaton (pruned and unpruned dumps)
    Translate {
        #[arg(long)]
        env: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        /// Directory for dump files (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a plan file against its formula
    Check {
        #[arg(long)]
        env: PathBuf,
        /// Plan file produced by `plan`
        #[arg(long)]
        plan: PathBuf,
    },
    /// Run the two-method benchmark on random tasks
    Bench {
        #[arg(long)]
        env: PathBuf,
        /// Number of random tasks
        #[arg(long, default_value_t = 100)]
        tasks: usize,
        /// Sampling seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict sampled propositions to this level or above
        #[arg(long)]
        min_level: Option<u8>,
        /// Output directory for records.csv, hist.csv, summary.txt
        #[arg(long)]
        out: PathBuf,
        /// Worker threads
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        rewards: RewardArgs,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Failure {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Failure {
        Failure::new(EXIT_FRAGMENT, e.to_string())
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Failure {
        let code = match &e {
            PlanError::Translate(_) => EXIT_FRAGMENT,
            PlanError::Infeasible { .. } => EXIT_INFEASIBLE,
            PlanError::Params(_) => EXIT_CONFIG,
            PlanError::Internal(_) => EXIT_FAIL,
        };
        Failure::new(code, e.to_string())
    }
}

fn load_world(path: &Path) -> Result<WorldModel, Failure> {
    WorldModel::load(path).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))
}

fn load_formula(world: &WorldModel, args: &FormulaArgs) -> Result<LtlFormula, Failure> {
    let text = match (&args.ltl, &args.ltl_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => {
            let raw = std::fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
            // One formula per line; # starts a comment.
            raw.lines()
                .map(|l| l.split('#').next().unwrap_or(l).trim())
                .find(|l| !l.is_empty())
                .map(str::to_string)
                .ok_or_else(|| Failure::new(EXIT_CONFIG, "formula file is empty"))?
        }
        (None, None) => return Err(Failure::new(EXIT_CONFIG, "provide --ltl or --ltl-file")),
    };
    Ok(parse(&text, world.registry())?)
}

fn parse_start(s: &str, world: &WorldModel) -> Result<Cell, Failure> {
    let nums: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::new(EXIT_CONFIG, format!("bad start cell `{s}` (expected X,Y,Z)")))?;
    if nums.len() != 3 {
        return Err(Failure::new(EXIT_CONFIG, "start takes three coordinates X,Y,Z"));
    }
    let c = Cell { x: nums[0], y: nums[1], z: nums[2] };
    if !world.in_bounds(c) {
        return Err(Failure::new(EXIT_CONFIG, format!("start cell {c} outside world dims")));
    }
    Ok(c)
}

fn print_plan(plan: &Plan, reports: &[String]) {
    for r in reports {
        println!("  {r}");
    }
    let path: Vec<String> = plan.path_states.iter().map(|q| format!("q{q}")).collect();
    println!("chosen path: {}", path.join(" -> "));
    for (i, h) in plan.hops.iter().enumerate() {
        println!("  hop {i}: level {} ({} actions)", h.level, h.actions);
    }
    let actions: Vec<String> = plan.actions.iter().map(|a| a.to_string()).collect();
    println!("actions ({}): {}", plan.actions.len(), actions.join(" "));
    println!("backups: {}", plan.backups);
    println!(
        "time: translate {} us + plan {} us = {} us",
        plan.translate_time.as_micros(),
        plan.plan_time.as_micros(),
        plan.total_time().as_micros()
    );
}

fn cmd_plan(
    env: &Path,
    formula: &FormulaArgs,
    start: &str,
    method: &str,
    out: Option<&Path>,
    rewards: &RewardArgs,
) -> Result<(), Failure> {
    let world = load_world(env)?;
    let f = load_formula(&world, formula)?;
    let start = parse_start(start, &world)?;
    let method =
        Method::parse(method).ok_or_else(|| Failure::new(EXIT_CONFIG, "method is apmdp or pmdp"))?;
    let params = rewards.params();
    params.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;

    let (plan, reports) = match method {
        Method::ApMdp => solve_apmdp_with_reports(&world, &f, start, &params)?,
        Method::PMdp => (solve_pmdp(&world, &f, start, &params)?, Vec::new()),
    };
    print_plan(&plan, &reports);
    if let Some(out) = out {
        std::fs::write(out, write_plan(&plan))
            .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", out.display())))?;
        println!("plan written to {}", out.display());
    }
    Ok(())
}

fn cmd_translate(env: &Path, formula: &FormulaArgs, out: Option<&Path>) -> Result<(), Failure> {
    let world = load_world(env)?;
    let f = load_formula(&world, formula)?;
    let reg = world.registry();
    let dba = automaton::translate(&f, reg)?;
    let pruned = automaton::remove_contradictions(&dba, world.facts())
        .map_err(|e| Failure::new(EXIT_INFEASIBLE, e.to_string()))?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", dir.display())))?;
            let write = |name: &str, data: String| -> Result<(), Failure> {
                std::fs::write(dir.join(name), data)
                    .map_err(|e| Failure::new(EXIT_CONFIG, format!("{name}: {e}")))
            };
            write("unpruned.txt", dba.to_text(reg))?;
            write("unpruned.dot", dba.to_dot(reg))?;
            write("pruned.txt", pruned.to_text(reg))?;
            write("pruned.dot", pruned.to_dot(reg))?;
            println!("automaton dumps written to {}", dir.display());
        }
        None => {
            println!("# unpruned");
            print!("{}", dba.to_text(reg));
            println!("# pruned");
            print!("{}", pruned.to_text(reg));
            for p in automaton::find_paths(&pruned) {
                println!("# path {}", p.render());
            }
        }
    }
    Ok(())
}

fn cmd_check(env: &Path, plan_path: &Path) -> Result<(), Failure> {
    let world = load_world(env)?;
    let text = std::fs::read_to_string(plan_path)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", plan_path.display())))?;
    let plan = parse_plan(&text).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    plan.validate(&world)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("malformed plan: {e}")))?;
    let f = parse(&plan.formula_text, world.registry())?;
    match check_plan(&world, &f, &plan)? {
        CheckResult::Satisfied => {
            println!("plan satisfies the specification");
            Ok(())
        }
        CheckResult::Violated { step } => {
            Err(Failure::new(EXIT_FAIL, format!("plan violates the specification at step {step}")))
        }
    }
}

fn cmd_bench(
    env: &Path,
    tasks: usize,
    seed: u64,
    min_level: Option<u8>,
    out: &Path,
    jobs: Option<usize>,
    rewards: &RewardArgs,
) -> Result<(), Failure> {
    let world = load_world(env)?;
    if tasks == 0 {
        return Err(Failure::new(EXIT_CONFIG, "need at least one task"));
    }
    let params = rewards.params();
    params.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    let formulas = bench::sample_tasks(&world, tasks, seed, min_level);
    let records = bench::run_benchmark(&world, &formulas, &params, seed, jobs);
    let summary = bench::emit_report(&records, out)
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", out.display())))?;
    print!("{}", bench::summary_text(&records));
    let _ = summary;
    println!("report written to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan { env, formula, start, method, out, rewards } => {
            cmd_plan(env, formula, start, method, out.as_deref(), rewards)
        }
        Command::Translate { env, formula, out } => cmd_translate(env, formula, out.as_deref()),
        Command::Check { env, plan } => cmd_check(env, plan),
        Command::Bench { env, tasks, seed, min_level, out, jobs, rewards } => {
            cmd_bench(env, *tasks, *seed, *min_level, out, *jobs, rewards)
        }
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

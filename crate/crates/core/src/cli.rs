//! The `wsp` command line.

use std::error::Error;
use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, BenchJob};
use crate::gen::{self, GenParams, Grid};
use crate::model::{parse_instance, serialize_instance, Plan, WorkflowInstance};
use crate::oracle;
use crate::pb;
use crate::solver::{solve, Outcome, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// `verify` on a plan that is not valid and complete.
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SAT: i32 = 10;
pub const EXIT_UNSAT: i32 = 20;
pub const EXIT_BUDGET: i32 = 30;

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(
    name = "wsp",
    version,
    about = "Workflow satisfiability with counting constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a random instance, or a labeled suite with --grid.
    Generate(GenerateArgs),
    /// Solve an instance with the pattern-based search.
    Solve(SolveArgs),
    /// Write the pseudo-Boolean encoding as .opb and .map files.
    Encode(EncodeArgs),
    /// Check a plan, or a PB solver assignment, against an instance.
    Verify(VerifyArgs),
    /// Solve a manifest or grid and print one CSV row per instance.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub steps: Option<usize>,
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub users: Option<usize>,
    /// Percentage of step pairs with a not-equals constraint.
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub density: Option<u32>,
    /// Number of at-most and of at-least constraints.
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub counting_b: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub r: u32,
    #[arg(long, default_value_t = 5)]
    pub scope_t: usize,
    /// e.g. `k=15:d=10,20,30:b=2..32..2`
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: u64,
    /// Output file (single instance) or directory (suite).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct Toggles {
    /// Disable useless-user pruning.
    #[arg(long)]
    pub no_useless: bool,
    /// Disable pair propagation.
    #[arg(long)]
    pub no_pairs: bool,
    /// Disable dynamic user ordering.
    #[arg(long)]
    pub no_dynamic: bool,
    /// Disable saturated at-most scope pruning.
    #[arg(long)]
    pub no_saturated: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Shuffle the initial user order with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub toggles: Toggles,
    /// Re-check the witness against the instance.
    #[arg(long)]
    pub proof_check: bool,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[arg(required_unless_present = "micro")]
    pub instance: Option<PathBuf>,
    /// Output prefix; defaults to the instance path without extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare exhaustive PB search with exhaustive plan search.
    #[arg(long)]
    pub check_against_oracle: bool,
    /// Run the oracle check on this many seeded micro instances.
    #[arg(long, requires = "check_against_oracle")]
    pub micro: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    /// Plan file such as `s1=u2 s2=u2 s3=u4`.
    #[arg(long, required_unless_present = "map", conflicts_with = "map")]
    pub plan: Option<PathBuf>,
    #[arg(long, requires = "assignment")]
    pub map: Option<PathBuf>,
    /// File holding the PB solver's variable assignment.
    #[arg(long, requires = "map")]
    pub assignment: Option<PathBuf>,
    /// Also report the exhaustive solver's verdict on the instance.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    pub manifest: Option<PathBuf>,
    #[arg(long, requires = "seed")]
    pub grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Seconds per instance.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// CSV destination; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub toggles: Toggles,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let out = io::stdout();
    let mut out = out.lock();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a, &mut out),
        Command::Solve(a) => cmd_solve(&a, &mut out),
        Command::Encode(a) => cmd_encode(&a, &mut out),
        Command::Verify(a) => cmd_verify(&a, &mut out),
        Command::Bench(a) => cmd_bench(&a, &mut out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn color_enabled() -> bool {
    std::env::var("WSP_COLOR").map_or(true, |v| v != "0") && io::stdout().is_terminal()
}

fn paint(text: &str, code: &str) -> String {
    if color_enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn read_instance(path: &Path) -> Result<WorkflowInstance> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(parse_instance(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn seconds(value: Option<f64>) -> Result<Option<Duration>> {
    match value {
        None => Ok(None),
        Some(s) if s.is_finite() && s > 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => Err(format!("time limit must be a positive number of seconds, got {s}").into()),
    }
}

fn config(toggles: Toggles) -> SolverConfig {
    SolverConfig {
        enable_useless_pruning: !toggles.no_useless,
        enable_pair_propagation: !toggles.no_pairs,
        enable_dynamic_order: !toggles.no_dynamic,
        enable_saturated_pruning: !toggles.no_saturated,
        ..SolverConfig::default()
    }
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut dyn Write) -> Result<i32> {
    if let Some(text) = &a.grid {
        let grid = Grid::parse(text)?;
        let suite = gen::generate_suite(&grid, a.seed)?;
        let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let manifest = gen::write_suite(&suite, &dir)?;
        writeln!(
            out,
            "wrote {} instances and {}",
            suite.len(),
            manifest.display()
        )?;
        return Ok(EXIT_OK);
    }
    // clap guarantees these without --grid
    let mut p = GenParams::new(
        a.steps.unwrap_or_default(),
        a.users.unwrap_or_default(),
        a.density.unwrap_or_default(),
        a.counting_b.unwrap_or_default(),
        a.seed,
    );
    p.r = a.r;
    p.t = a.scope_t;
    let inst = gen::generate(&p)?;
    let name = format!("k{}-n{}-d{}-b{}-seed{}.wsp", p.k, p.n, p.d, p.b, p.seed);
    let path = match &a.out {
        Some(path) if path.is_dir() => path.join(name),
        Some(path) => path.clone(),
        None => PathBuf::from(name),
    };
    fs::write(&path, serialize_instance(&inst)).map_err(|e| format!("{}: {e}", path.display()))?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = read_instance(&a.instance)?;
    let cfg = SolverConfig {
        time_limit: seconds(a.time_limit)?,
        node_limit: a.node_limit,
        user_order_seed: a.seed,
        ..config(a.toggles)
    };
    let report = solve(&inst, &cfg)?;
    let (label, code) = match report.outcome {
        Outcome::Satisfiable => (paint("sat", "32"), EXIT_SAT),
        Outcome::Unsatisfiable => (paint("unsat", "31"), EXIT_UNSAT),
        Outcome::BudgetExceeded => (paint("budget_exceeded", "33"), EXIT_BUDGET),
    };
    writeln!(out, "outcome: {label}")?;
    writeln!(out, "time: {:.3} s", report.elapsed.as_secs_f64())?;
    writeln!(out, "users_processed: {}", report.users_processed)?;
    writeln!(out, "patterns: {}", report.patterns_generated)?;
    if report.outcome == Outcome::Unsatisfiable {
        writeln!(out, "users: {}", report.user_triple())?;
    }
    if let Some(w) = &report.witness {
        writeln!(out, "witness: {w}")?;
        if a.proof_check {
            let problems = inst.diagnose(w);
            if !problems.is_empty() {
                for p in problems {
                    writeln!(out, "  {p}")?;
                }
                return Err("witness failed the proof check".into());
            }
            writeln!(out, "proof-check: ok")?;
        }
    }
    Ok(code)
}

/// Seeded micro instance whose encoding is small enough for `brute_pb`.
fn micro_for_pb(seed: u64, index: usize) -> (WorkflowInstance, pb::PbModel) {
    let base = gen::cell_seed(seed, index, 0, 0);
    for attempt in 0.. {
        let s = base.wrapping_add(attempt);
        let k = 1 + (s % 4) as usize;
        let n = 1 + (s / 4 % 3) as usize;
        let inst = gen::micro_instance(s, k, n, false);
        let model = pb::encode(&inst).expect("no equals constraints");
        if model.variables.len() <= oracle::MAX_PB_VARIABLES {
            return (inst, model);
        }
    }
    unreachable!()
}

/// Satisfiability by exhaustive plan search and by exhaustive PB search,
/// plus the decoding checks in both directions. `Ok(true)` on agreement.
pub fn pb_agrees(inst: &WorkflowInstance, model: &pb::PbModel) -> Result<bool> {
    let plans = oracle::brute_solve(inst)?;
    let assignment = oracle::brute_pb(model)?;
    if plans.is_satisfiable() != assignment.is_some() {
        return Ok(false);
    }
    if let Some(values) = assignment {
        let plan = pb::decode_solution(model, &values)?;
        if !inst.is_valid_complete(&plan) {
            return Ok(false);
        }
    }
    Ok(plans.witnesses.iter().all(|w| {
        let values = pb::plan_to_assignment(model, inst, w);
        model.is_satisfied_by(&values)
    }))
}

pub fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<i32> {
    if let Some(count) = a.micro {
        let mut agree = 0;
        for i in 0..count {
            let (inst, model) = micro_for_pb(a.seed, i);
            if pb_agrees(&inst, &model)? {
                agree += 1;
            } else {
                writeln!(
                    out,
                    "disagreement on micro instance {i}:\n{}",
                    serialize_instance(&inst)
                )?;
            }
        }
        writeln!(out, "agreement: {agree}/{count}")?;
        return Ok(if agree == count { EXIT_OK } else { EXIT_ERROR });
    }
    let path = a.instance.as_ref().ok_or("an instance file is required")?;
    let inst = read_instance(path)?;
    let model = pb::encode(&inst)?;
    for w in model.warnings() {
        eprintln!("warning: {w}");
    }
    let (opb, map) = pb::emit_opb(&model);
    let prefix = a.out.clone().unwrap_or_else(|| path.with_extension(""));
    let opb_path = prefix.with_extension("opb");
    let map_path = prefix.with_extension("map");
    fs::write(&opb_path, opb)?;
    fs::write(&map_path, map)?;
    writeln!(
        out,
        "wrote {} ({} variables, {} constraints) and {}",
        opb_path.display(),
        model.variables.len(),
        model.constraints.len(),
        map_path.display()
    )?;
    if a.check_against_oracle {
        let ok = pb_agrees(&inst, &model)?;
        writeln!(
            out,
            "oracle check: {}",
            if ok { "agree" } else { "DISAGREE" }
        )?;
        if !ok {
            return Ok(EXIT_ERROR);
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = read_instance(&a.instance)?;
    if a.oracle {
        let verdict = oracle::brute_solve(&inst)?;
        writeln!(
            out,
            "oracle: {} ({} valid complete plans)",
            if verdict.is_satisfiable() {
                "sat"
            } else {
                "unsat"
            },
            verdict.witnesses.len()
        )?;
    }
    let plan = if let Some(path) = &a.plan {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Plan::parse(&text, inst.k())?
    } else {
        let (map_path, asg_path) = (a.map.as_ref().unwrap(), a.assignment.as_ref().unwrap());
        let variables = pb::parse_map(&fs::read_to_string(map_path)?)?;
        let values = pb::parse_assignment(&fs::read_to_string(asg_path)?, variables.len())?;
        let model = pb::PbModel {
            steps: inst.k(),
            users: inst.n(),
            variables,
            constraints: Vec::new(),
        };
        match pb::decode_solution(&model, &values) {
            Ok(plan) => plan,
            Err(e @ pb::PbError::MalformedAssignment { .. }) => {
                writeln!(out, "invalid: {e}")?;
                return Ok(EXIT_INVALID);
            }
            Err(e) => return Err(e.into()),
        }
    };
    let problems = inst.diagnose(&plan);
    if problems.is_empty() {
        writeln!(out, "{}: valid complete plan", paint("ok", "32"))?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "{}: {plan}", paint("invalid", "31"))?;
    for p in problems {
        writeln!(out, "  {p}")?;
    }
    Ok(EXIT_INVALID)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let jobs: Vec<BenchJob> = if let Some(path) = &a.manifest {
        gen::read_manifest(path)?
            .iter()
            .map(BenchJob::from_manifest)
            .collect()
    } else {
        let grid = Grid::parse(a.grid.as_deref().unwrap())?;
        gen::generate_suite(&grid, a.seed.unwrap())?
            .into_iter()
            .map(BenchJob::from_suite)
            .collect()
    };
    let cfg = SolverConfig {
        time_limit: seconds(a.time_limit)?,
        ..config(a.toggles)
    };
    let rows = bench::run(&jobs, &cfg, a.parallel.max(1));
    let csv = bench::to_csv(&rows);
    match &a.out {
        Some(path) => fs::write(path, csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    eprint!("{}", bench::summary(&rows));
    Ok(EXIT_OK)
}

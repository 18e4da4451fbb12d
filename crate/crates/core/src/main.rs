use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use robust_tnep::case::{case_to_toml, load_case_file, parse_hourly_csv, write_hourly_csv, CaseError, PlanningCase};
use robust_tnep::ccg::{solve_robust_tnep, CcgConfig, CcgError};
use robust_tnep::clustering::{apply_to_case, build_representative_days, representatives_table};
use robust_tnep::oracle::OracleConfig;
use robust_tnep::report::{rows_to_csv, ResultDocument, SweepRow};
use robust_tnep::verify::{verify_instance, INSTANCES};
use robust_tnep::{bundled, RobustSolution};

const EXIT_PARSE: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_SOLVER: u8 = 5;
const EXIT_NOT_CONVERGED: u8 = 6;
const EXIT_MISMATCH: u8 = 7;

#[derive(Parser)]
#[command(name = "robust-tnep", version, about = "Robust transmission and storage expansion planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case and write a result document.
    Solve(SolveArgs),
    /// Solve once per uncertainty budget or per number of representative days.
    Sweep(SweepArgs),
    /// Cluster an hourly history into representative days.
    Cluster(ClusterArgs),
    /// Compare the decomposition with the extensive-form oracle.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Outer-loop tolerance (M€).
    #[arg(long, default_value_t = 1e-6)]
    tol_outer: f64,
    /// Inner-loop tolerance (M€).
    #[arg(long, default_value_t = 1e-6)]
    tol_inner: f64,
    /// Seconds per individual solver call.
    #[arg(long, env = "ROBUST_TNEP_TIME_LIMIT")]
    time_limit: Option<f64>,
    /// Relative MIP gap.
    #[arg(long, env = "ROBUST_TNEP_MIP_GAP", default_value_t = 1e-9)]
    mip_gap: f64,
    #[arg(long, env = "ROBUST_TNEP_THREADS", default_value_t = 1)]
    threads: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Drop the storage mode binaries (diagnostic).
    #[arg(long)]
    relax_z: bool,
}

impl SolverArgs {
    fn ccg(&self) -> CcgConfig {
        let mut c = CcgConfig { outer_tolerance: Some(self.tol_outer), inner_tolerance: Some(self.tol_inner), ..Default::default() };
        c.solver.time_limit = self.time_limit;
        c.solver.mip_rel_gap = self.mip_gap;
        c.solver.threads = self.threads;
        c.solver.seed = (self.seed % i32::MAX as u64) as i32;
        c.formulation.relax_modes = self.relax_z;
        c
    }

    fn oracle(&self) -> OracleConfig {
        let ccg = self.ccg();
        OracleConfig { solver: ccg.solver, formulation: ccg.formulation, ..Default::default() }
    }
}

#[derive(Args)]
struct CaseArgs {
    /// Case file, or the name of a bundled case.
    #[arg(long)]
    case: String,
    #[arg(long = "gamma-d")]
    gamma_d: Option<usize>,
    #[arg(long = "gamma-g")]
    gamma_g: Option<usize>,
    #[arg(long = "gamma-w")]
    gamma_w: Option<usize>,
    /// Investment budget (10³ €).
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    case: CaseArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Uncertainty budgets as `d,g,w` triples separated by `;`.
    #[arg(long, conflicts_with = "ks")]
    gammas: Option<String>,
    /// Numbers of representative days, e.g. `3-12` or `2,4,8`.
    #[arg(long, requires = "history")]
    ks: Option<String>,
    /// Hourly history CSV for the `--ks` axis.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Concurrent solves.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Hourly history CSV (`day,hour,<profiles...>`).
    #[arg(long)]
    history: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes the representative days as hourly CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Case to receive the representative days; the updated case is printed.
    #[arg(long)]
    case: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance name or `all`.
    #[arg(long, default_value = "all")]
    instance: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<CaseError> for Failure {
    fn from(e: CaseError) -> Self {
        let code = match e {
            CaseError::Validation(_) => EXIT_VALIDATION,
            CaseError::Parse(_) | CaseError::Io { .. } => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<CcgError> for Failure {
    fn from(e: CcgError) -> Self {
        let code = match e {
            CcgError::NotConverged(_) => EXIT_NOT_CONVERGED,
            CcgError::Case(CaseError::Validation(_)) => EXIT_VALIDATION,
            _ => EXIT_SOLVER,
        };
        Failure::new(code, e.to_string())
    }
}

fn load(args: &CaseArgs) -> Result<PlanningCase, Failure> {
    let path = Path::new(&args.case);
    let mut case = if !path.exists() && bundled::NAMES.contains(&args.case.as_str()) {
        bundled::by_name(&args.case).expect("listed bundled case")
    } else {
        load_case_file(path)?
    };
    let u = &case.uncertainty;
    case = case.with_budgets(args.gamma_d.unwrap_or(u.gamma_demand), args.gamma_g.unwrap_or(u.gamma_conventional), args.gamma_w.unwrap_or(u.gamma_wind))?;
    if let Some(b) = args.budget {
        case.economics.investment_budget = b;
        case.validate()?;
    }
    Ok(case)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(1, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let case = load(&args.case)?;
    let (sol, failure) = match solve_robust_tnep(&case, &args.solver.ccg()) {
        Ok(s) => (s, None),
        Err(CcgError::NotConverged(s)) => {
            let f = Failure::new(EXIT_NOT_CONVERGED, format!("no convergence, gap {:.3e}", s.gap()));
            (*s, Some(f))
        }
        Err(e) => return Err(e.into()),
    };
    let doc = ResultDocument::new(&case, &sol, args.solver.relax_z);
    let text = match args.format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
    };
    emit(&args.out, &text)?;
    failure.map_or(Ok(()), Err)
}

fn parse_gammas(text: &str) -> Result<Vec<(usize, usize, usize)>, Failure> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|t| {
            let v: Vec<usize> = t.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|e| Failure::new(EXIT_PARSE, format!("--gammas `{t}`: {e}")))?;
            match v.as_slice() {
                &[d, g, w] => Ok((d, g, w)),
                _ => Err(Failure::new(EXIT_PARSE, format!("--gammas `{t}`: expected three integers"))),
            }
        })
        .collect()
}

fn parse_ks(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = |e: String| Failure::new(EXIT_PARSE, format!("--ks `{text}`: {e}"));
    if let Some((a, b)) = text.split_once('-') {
        let a: usize = a.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let b: usize = b.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|x| x.trim().parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))).collect()
}

/// Runs `jobs` in up to `workers` threads, keeping input order.
fn run_parallel<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = workers.max(1);
    let mut out: Vec<Option<R>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (chunk_items, chunk_out) in items.chunks(items.len().div_ceil(workers).max(1)).zip(out.chunks_mut(items.len().div_ceil(workers).max(1))) {
            let f = &f;
            s.spawn(move || {
                for (item, slot) in chunk_items.iter().zip(chunk_out) {
                    *slot = Some(f(item));
                }
            });
        }
    });
    out.into_iter().map(|r| r.expect("every item processed")).collect()
}

fn timed(f: impl FnOnce() -> Result<RobustSolution, String>) -> (Result<RobustSolution, String>, f64) {
    let t = Instant::now();
    let r = f();
    (r, t.elapsed().as_secs_f64())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let case = load(&args.case)?;
    let config = args.solver.ccg();
    let rows: Vec<SweepRow> = if let Some(ks) = &args.ks {
        let ks = parse_ks(ks)?;
        let history = args.history.as_ref().expect("clap enforces --history");
        let text = std::fs::read_to_string(history).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", history.display())))?;
        let series = parse_hourly_csv(&text)?;
        run_parallel(&ks, args.jobs, |&k| {
            let (r, secs) = timed(|| {
                let reps = build_representative_days(&series, k, args.solver.seed).map_err(|e| e.to_string())?;
                let c = apply_to_case(&case, &series, &reps).map_err(|e| e.to_string())?;
                solve_robust_tnep(&c, &config).map_err(|e| e.to_string())
            });
            SweepRow::from_outcome("K", k.to_string(), &r, secs)
        })
    } else {
        let text = args.gammas.as_deref().ok_or_else(|| Failure::new(EXIT_PARSE, "give --gammas or --ks"))?;
        let points = parse_gammas(text)?;
        if points.is_empty() {
            return Err(Failure::new(EXIT_PARSE, "sweep axis is empty"));
        }
        run_parallel(&points, args.jobs, |&(d, g, w)| {
            let (r, secs) = timed(|| {
                let c = case.with_budgets(d, g, w).map_err(|e| e.to_string())?;
                solve_robust_tnep(&c, &config).map_err(|e| e.to_string())
            });
            SweepRow::from_outcome("gamma", format!("{d}/{g}/{w}"), &r, secs)
        })
    };
    emit(&args.out, &rows_to_csv(&rows))
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.history).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", args.history.display())))?;
    let series = parse_hourly_csv(&text)?;
    let reps = build_representative_days(&series, args.k, args.seed).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let (table, weights) = representatives_table(&series, &reps);
    if let Some(out) = &args.out {
        emit(&Some(out.clone()), &write_hourly_csv(&table))?;
    }
    match &args.case {
        Some(name) => {
            let case = load(&CaseArgs { case: name.clone(), gamma_d: None, gamma_g: None, gamma_w: None, budget: None })?;
            let updated = apply_to_case(&case, &series, &reps)?;
            print!("{}", case_to_toml(&updated));
        }
        None => {
            for (r, w) in reps.iter().zip(&weights) {
                println!("day {} (source {}) weight {w:.6} members {}", r.source_day + 1, series.day_labels[r.source_day], r.members.len());
            }
            println!("weights = {weights:?}");
        }
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let names: Vec<&str> = if args.instance == "all" { INSTANCES.to_vec() } else { vec![args.instance.as_str()] };
    let mut text = String::new();
    let mut ok = true;
    for name in names {
        let report = verify_instance(name, &args.solver.ccg(), &args.solver.oracle()).map_err(|e| Failure::new(EXIT_PARSE, e))?;
        ok &= report.passed();
        text.push_str(&report.to_string());
    }
    emit(&args.out, &text)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::new(EXIT_MISMATCH, "verification found mismatches"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

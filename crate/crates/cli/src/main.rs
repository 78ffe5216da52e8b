//! Command-line front end: load or select problems, run the hypothesis
//! checks, compute eigenpairs, sweep radii, and emit text / JSON / CSV
//! reports.
//!
//! Exit codes: 0 = success (and verdict true for `verify`); 1 = verdict
//! false, non-convergence or a failed sweep row; 2 = input error.

mod output;

use anyhow::{anyhow, Context as _, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hameig::grid::Grid;
use hameig::presets::Preset;
use hameig::problem::SystemProblem;
use hameig::problem_file::{load_problem, serialize_problem};
use hameig::solver::{solve, sweep, SolveOptions, SweepOptions};
use hameig::verifier::{verify, VerifyOptions};
use std::path::Path;

#[derive(Parser)]
#[command(
    name = "hameig",
    version,
    about = "Eigenpairs and existence checks for coupled thermostat-type integral systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the existence hypotheses at a given radius.
    Verify(VerifyArgs),
    /// Compute an eigenpair on the cone sphere of radius R.
    Solve(SolveArgs),
    /// Solve for a list of radii and tabulate lambda(R).
    Sweep(SweepArgs),
    /// List the built-in example problems and dump their definitions.
    Examples(ExamplesArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct CommonArgs {
    /// Preset name (example1 | example2 | example3) or path to a problem file.
    #[arg(long)]
    problem: String,
    /// Output path; "-" writes to stdout.
    #[arg(long, default_value = "-")]
    output: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cone-sphere radius.
    #[arg(long = "R")]
    r: f64,
    /// Sample density for the kernel-bound checks.
    #[arg(long, default_value_t = 200)]
    m: usize,
}

#[derive(Args)]
struct SolverArgs {
    /// Grid panel count (even; multiples of 60 keep the preset evaluation
    /// points on nodes).
    #[arg(long = "grid-n", default_value_t = 600)]
    grid_n: usize,
    /// Successive-iterate tolerance, relative to R.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 10_000)]
    max_iter: usize,
    /// Start the iteration from the constant pair (u0, u0) instead of (R, R).
    #[arg(long)]
    u0: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Cone-sphere radius.
    #[arg(long = "R")]
    r: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated radii, e.g. --R 0.5,1,2.
    #[arg(long = "R", value_delimiter = ',', required = true)]
    r: Vec<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Solve radii independently (enables HAMEIG_THREADS-capped concurrency)
    /// instead of warm-starting each solve from the previous one.
    #[arg(long = "no-warm-start")]
    no_warm_start: bool,
}

#[derive(Args)]
struct ExamplesArgs {
    /// "-" prints a listing; an existing directory receives one .toml per
    /// example; any other path receives the whole listing.
    #[arg(long, default_value = "-")]
    output: String,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Verify(args) => run_verify(args),
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Examples(args) => run_examples(args),
    };
    match code {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn load(problem: &str) -> Result<SystemProblem> {
    if let Some(preset) = Preset::from_name(problem) {
        return Ok(preset.problem());
    }
    let path = Path::new(problem);
    if !path.exists() {
        return Err(anyhow!(
            "'{problem}' is neither a preset (example1 | example2 | example3) nor a file"
        ));
    }
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading problem file {problem}"))?;
    Ok(load_problem(&text)?)
}

fn make_grid(n: usize) -> Result<Grid> {
    Ok(Grid::new(n)?)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(anyhow!("radius must be positive, got {r}"))
    }
}

fn solve_options(args: &SolverArgs, grid: Grid) -> SolveOptions {
    SolveOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        initial: args.u0.map(|v| hameig::GridPair::constant(grid, v, v)),
        ..SolveOptions::default()
    }
}

fn run_verify(args: VerifyArgs) -> Result<i32> {
    check_radius(args.r)?;
    let problem = load(&args.common.problem)?;
    let opts = VerifyOptions {
        kernel_grid_m: args.m.max(50),
        ..VerifyOptions::default()
    };
    let report = verify(&problem, args.r, &opts).map_err(|e| anyhow!("{e}"))?;
    let rendered = match args.common.format {
        Format::Text => output::verify_text(&problem, &report),
        Format::Json => output::to_json(&report)?,
        Format::Csv => output::verify_csv(&report),
    };
    output::emit(&args.common.output, &rendered)?;
    Ok(if report.verdict { 0 } else { 1 })
}

fn run_solve(args: SolveArgs) -> Result<i32> {
    check_radius(args.r)?;
    let problem = load(&args.common.problem)?;
    let grid = make_grid(args.solver.grid_n)?;

    match verify(&problem, args.r, &VerifyOptions::default()) {
        Ok(report) if !report.verdict => {
            eprintln!(
                "warning: the existence hypotheses do not hold numerically at R = {} \
                 (min c3 sup = {:e}); solving anyway",
                args.r,
                report.min_c3_sup()
            );
        }
        Ok(_) => {}
        Err(e) => eprintln!("warning: hypothesis check failed to evaluate: {e}"),
    }

    let opts = solve_options(&args.solver, grid);
    match solve(&problem, args.r, grid, &opts) {
        Ok(pair) => {
            let rendered = match args.common.format {
                Format::Text => output::solve_text(args.r, &pair),
                Format::Json => output::to_json(&pair)?,
                Format::Csv => output::solve_csv(args.r, &pair),
            };
            output::emit(&args.common.output, &rendered)?;
            Ok(0)
        }
        Err(err) => {
            eprintln!("solve failed: {err}");
            Ok(1)
        }
    }
}

fn run_sweep(args: SweepArgs) -> Result<i32> {
    for &r in &args.r {
        check_radius(r)?;
    }
    let mut radii = args.r.clone();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let problem = load(&args.common.problem)?;
    let grid = make_grid(args.solver.grid_n)?;

    for &r in &radii {
        if let Ok(report) = verify(&problem, r, &VerifyOptions::default()) {
            if !report.verdict {
                eprintln!(
                    "warning: existence hypotheses fail numerically at R = {r}; \
                     the row is attempted anyway"
                );
            }
        }
    }

    let threads = std::env::var("HAMEIG_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .map(|v| v.max(1));
    let opts = SweepOptions {
        solve: solve_options(&args.solver, grid),
        warm_start: !args.no_warm_start,
        threads,
    };
    let rows = sweep(&problem, &radii, grid, &opts);
    let rendered = match args.common.format {
        Format::Text => output::sweep_text(&rows),
        Format::Json => output::to_json(&rows)?,
        Format::Csv => output::sweep_csv(&rows),
    };
    output::emit(&args.common.output, &rendered)?;
    Ok(if rows.iter().all(|r| r.error.is_none()) {
        0
    } else {
        1
    })
}

fn run_examples(args: ExamplesArgs) -> Result<i32> {
    let path = Path::new(&args.output);
    if args.output != "-" && path.is_dir() {
        for preset in Preset::all() {
            let file = path.join(format!("{}.toml", preset.name()));
            std::fs::write(&file, serialize_problem(&preset.problem()))
                .with_context(|| format!("writing {}", file.display()))?;
            println!("{} -> {}", preset.name(), file.display());
        }
        return Ok(0);
    }
    let mut listing = String::new();
    for preset in Preset::all() {
        listing.push_str(&format!("# {}\n", preset.name()));
        listing.push_str(&serialize_problem(&preset.problem()));
        listing.push('\n');
    }
    output::emit(&args.output, &listing)?;
    Ok(0)
}

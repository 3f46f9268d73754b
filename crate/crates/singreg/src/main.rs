//! Command-line driver: epsilon sweeps, single solves, resolvent
//! certification, oracle cross-checks, and contraction-constant tables.
//!
//! Exit codes: 0 success, 1 precondition violation, 2 low-confidence
//! estimate, 3 oracle failure or verification mismatch, 4 I/O or config
//! parse error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use singreg::error::Error;
use singreg::experiment::{self, ExperimentConfig};
use singreg::solver::Mode;

#[derive(Parser)]
#[command(
    name = "singreg",
    about = "Regularized solvers for nonlinear operator equations with singular linearization",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Output path; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Rayon thread-pool size (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once per epsilon and emit CSV rows plus a log-log rate fit.
    Sweep(RunArgs),
    /// Solve at a single epsilon and print the report.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Epsilon to solve at; defaults to the largest one in the config.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Estimate the resolvent constant over the epsilon grid and compare
    /// against a bound.
    CertifyResolvent {
        #[command(flatten)]
        run: RunArgs,
        /// PASS/FAIL bound for the estimate; defaults to the config's
        /// `resolvent_bound`, else 1 + 1e-8.
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Run the main solver against the matching brute-force oracle.
    Verify(RunArgs),
    /// Print the contraction constants for given inputs.
    Constants {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        m2: f64,
        #[arg(long, default_value_t = 0.0)]
        m3: f64,
        #[arg(long, default_value_t = 0.0)]
        v_norm: f64,
        #[arg(long)]
        epsilon: f64,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "certified" => Ok(Mode::Certified),
        "exploratory" => Ok(Mode::Exploratory),
        other => Err(format!(
            "unknown mode `{other}` (expected certified|exploratory)"
        )),
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(mode) = args.mode {
        config.mode = mode;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn init_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        // ignore the error if a pool already exists (tests call main-like
        // paths repeatedly)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn write_output(args: &RunArgs, config: &ExperimentConfig, content: &str) -> Result<bool, Error> {
    let path = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from));
    match path {
        Some(p) => {
            std::fs::write(&p, content)?;
            Ok(true)
        }
        None => {
            print!("{content}");
            Ok(false)
        }
    }
}

fn run() -> Result<ExitCode, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(args) => {
            init_threads(args.threads);
            let config = load_config(&args)?;
            let outcome = experiment::run_sweep(&config)?;
            let wrote = write_output(&args, &config, &outcome.csv)?;
            if wrote {
                match &outcome.fit {
                    Some(f) => println!(
                        "{} rows; rate fit: slope = {:.6}, r2 = {:.6} over {} points",
                        outcome.rows.len(),
                        f.slope,
                        f.r_squared,
                        f.points_used
                    ),
                    None => println!("{} rows; rate fit {}", outcome.rows.len(), outcome.fit_note),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { run: args, epsilon } => {
            init_threads(args.threads);
            let config = load_config(&args)?;
            let instance = experiment::build_instance(&config)?;
            let epsilons = config.epsilons.resolve()?;
            let eps = epsilon.unwrap_or(epsilons[0]);
            let norm = config.norm();
            let mut options = experiment::solve_options(&config);
            if let singreg::experiment::ProblemInstance::Direct { op, .. } = &instance {
                options.direct_constants = Some(singreg::estimate_direct_constants(
                    op.as_ref(),
                    16,
                    config.seed,
                )?);
            }
            let report = experiment::solve_at(&instance, eps, norm, &options)?;
            println!("epsilon          = {}", experiment::fmt_f64(eps));
            println!(
                "norm_solution    = {}",
                experiment::fmt_f64(report.norm_solution)
            );
            println!("iterations       = {}", report.iterations);
            println!(
                "final_residual   = {}",
                experiment::fmt_f64(report.final_residual)
            );
            println!(
                "max_step_ratio   = {}",
                experiment::fmt_f64(report.contraction_estimate)
            );
            println!(
                "ball_radius      = {}",
                experiment::fmt_f64(report.ball_radius)
            );
            println!("exited_ball      = {}", report.exited_ball);
            println!("converged        = {}", report.converged);
            println!("certified_run    = {}", report.certified_run);
            if report.converged {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(Error::Precondition(format!(
                    "solve did not converge within {} iterations (residual {:.3e})",
                    report.iterations, report.final_residual
                )))
            }
        }
        Command::CertifyResolvent { run: args, bound } => {
            init_threads(args.threads);
            let mut config = load_config(&args)?;
            if let Some(b) = bound {
                config.resolvent_bound = Some(b);
            }
            let outcome = experiment::certify_resolvent(&config)?;
            for (eps, value) in &outcome.per_epsilon {
                println!(
                    "eps = {}  eps*||resolvent|| = {}",
                    experiment::fmt_f64(*eps),
                    experiment::fmt_f64(*value)
                );
            }
            println!(
                "estimated c (lower bound) = {}",
                experiment::fmt_f64(outcome.c_lower_bound)
            );
            println!(
                "bound = {}  ->  {}",
                experiment::fmt_f64(outcome.bound),
                if outcome.passed { "PASS" } else { "FAIL" }
            );
            if outcome.low_confidence {
                eprintln!("warning: power iteration did not settle; estimate is low-confidence");
                return Ok(ExitCode::from(2));
            }
            if outcome.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify(args) => {
            init_threads(args.threads);
            let config = load_config(&args)?;
            let outcome = experiment::verify(&config)?;
            for line in &outcome.lines {
                println!(
                    "{}: solver = {}  oracle = {}  distance = {}  tol = {}  {}",
                    line.label,
                    experiment::fmt_f64(line.solver_value),
                    experiment::fmt_f64(line.oracle_value),
                    experiment::fmt_f64(line.distance),
                    experiment::fmt_f64(line.tolerance),
                    if line.passed { "PASS" } else { "FAIL" }
                );
            }
            if outcome.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        Command::Constants {
            c,
            m2,
            m3,
            v_norm,
            epsilon,
        } => {
            let k = singreg::compute_theorem_constants(c, m2, m3, v_norm, epsilon)?;
            println!("c          = {}", experiment::fmt_f64(k.c));
            println!("m2         = {}", experiment::fmt_f64(k.m2));
            println!("m3         = {}", experiment::fmt_f64(k.m3));
            println!("v_norm     = {}", experiment::fmt_f64(k.v_norm));
            println!("epsilon    = {}", experiment::fmt_f64(k.epsilon));
            println!("rho        = {}", experiment::fmt_f64(k.rho));
            println!("r_min      = {}", experiment::fmt_f64(k.r_min));
            println!("r_max      = {}", experiment::fmt_f64(k.r_max));
            println!("q          = {}", experiment::fmt_f64(k.q));
            println!("epsilon_max= {}", experiment::fmt_f64(k.epsilon_max));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SINGREG_LOG", "warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

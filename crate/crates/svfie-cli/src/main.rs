//! `svfie` command line: solve one instance, run Monte Carlo ensembles,
//! study convergence, compare the Walsh and block-pulse routes, and evaluate
//! the a-priori error bound.
//!
//! Output is machine-readable CSV (default) or JSON with a `meta` object
//! echoing the configuration. All floating-point values are fixed at ten
//! significant digits so that runs diff cleanly; every subcommand is fully
//! deterministic for a fixed flag set.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use svfie::analysis::{convergence_rate, gronwall_bound, l2_error, monte_carlo, DEFAULT_PROBES};
use svfie::basis::Resolution;
use svfie::problems::{registry_get, RegularityConstants, REGISTRY_NAMES};
use svfie::solver::{solve_bpf, solve_walsh};
use svfie::stochastic::{BrownianPath, SeedPlan};

#[derive(Parser)]
#[command(
    name = "svfie",
    version,
    about = "Walsh-function solver for linear stochastic Volterra-Fredholm integral equations"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value = "csv")]
    format: Format,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one seeded instance; emit the staircase and the probe values.
    Solve {
        /// Name of a registered problem.
        #[arg(long)]
        problem: String,
        /// Number of cells (a power of two).
        #[arg(long)]
        m: usize,
        /// Seed of the Brownian path.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated probe points in [0, 1).
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<f64>>,
    },
    /// Monte Carlo ensemble statistics at the probe points.
    Mc {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: usize,
        /// Master seed; per-path seeds are derived from it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of Brownian paths.
        #[arg(long, default_value_t = 1000)]
        paths: u64,
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<f64>>,
    },
    /// Convergence study of a problem with a known deterministic solution.
    Converge {
        #[arg(long)]
        problem: String,
        /// Resolutions: a doubling range like `8..128`, a comma list, or a
        /// single value. At least three resolutions are required.
        #[arg(long)]
        m: String,
    },
    /// Walsh vs block-pulse solves on the same path, side by side.
    Compare {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<f64>>,
    },
    /// Evaluate the a-priori mean-square error bound R1 * exp(R2).
    Bound {
        /// Lipschitz constant of the forcing term.
        #[arg(long, default_value_t = 0.0)]
        c: f64,
        /// Lipschitz constants of the three kernels.
        #[arg(long, default_value_t = 0.0)]
        l: f64,
        #[arg(long, default_value_t = 0.0)]
        l1: f64,
        #[arg(long, default_value_t = 0.0)]
        l2: f64,
        /// Uniform bounds of the three kernels.
        #[arg(long, default_value_t = 0.0)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        rho1: f64,
        #[arg(long, default_value_t = 0.0)]
        rho2: f64,
        /// Uniform bound of the solution.
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        /// Fredholm limits.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Cell width in (0, 1].
        #[arg(long)]
        h: f64,
    },
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<svfie::Error> for CliError {
    fn from(err: svfie::Error) -> Self {
        match &err {
            svfie::Error::SingularSystem { .. } => CliError::Numerical(err.to_string()),
            svfie::Error::PathSolveFailed { .. } => CliError::Numerical(err.to_string()),
            _ => CliError::Usage(err.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };

    let report = match run(&cli.command) {
        Ok(report) => report,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            return ExitCode::from(2);
        }
    };

    let rendered = report.render(cli.format);
    match &cli.out {
        Some(path) => {
            if let Err(err) = fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{rendered}"),
    }
    ExitCode::SUCCESS
}

/// One rendered report: a CSV header plus rows, or the same rows as JSON
/// under a `meta` object.
struct Report {
    meta: Value,
    header: &'static str,
    csv_rows: Vec<String>,
    json_rows: Vec<Value>,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut text = String::from(self.header);
                text.push('\n');
                for row in &self.csv_rows {
                    text.push_str(row);
                    text.push('\n');
                }
                text
            }
            Format::Json => {
                let doc = json!({ "meta": self.meta, "rows": self.json_rows });
                let mut text =
                    serde_json::to_string_pretty(&doc).expect("report serializes to JSON");
                text.push('\n');
                text
            }
        }
    }
}

/// Ten significant digits, the fixed output precision.
fn fmt10(x: f64) -> String {
    format!("{x:.9e}")
}

/// The same value rounded through the ten-digit representation, for JSON.
fn round10(x: f64) -> f64 {
    fmt10(x).parse().unwrap_or(x)
}

fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Solve {
            problem,
            m,
            seed,
            probes,
        } => run_solve(problem, *m, *seed, probes.as_deref()),
        Command::Mc {
            problem,
            m,
            seed,
            paths,
            probes,
        } => run_mc(problem, *m, *seed, *paths, probes.as_deref()),
        Command::Converge { problem, m } => run_converge(problem, m),
        Command::Compare {
            problem,
            m,
            seed,
            probes,
        } => run_compare(problem, *m, *seed, probes.as_deref()),
        Command::Bound {
            c,
            l,
            l1,
            l2,
            rho,
            rho1,
            rho2,
            sigma,
            alpha,
            beta,
            h,
        } => run_bound(
            RegularityConstants {
                c: *c,
                l: *l,
                l1: *l1,
                l2: *l2,
                rho: *rho,
                rho1: *rho1,
                rho2: *rho2,
                sigma: *sigma,
            },
            *alpha,
            *beta,
            *h,
        ),
    }
}

fn resolve(name: &str) -> Result<svfie::problems::SvfieProblem, CliError> {
    registry_get(name).map_err(|_| {
        CliError::Usage(format!(
            "unknown problem `{name}`; available: {}",
            REGISTRY_NAMES.join(", ")
        ))
    })
}

fn resolution(m: usize) -> Result<Resolution, CliError> {
    Resolution::new(m).map_err(|err| CliError::Usage(err.to_string()))
}

fn probe_list(probes: Option<&[f64]>) -> Vec<f64> {
    probes.map(<[f64]>::to_vec).unwrap_or_else(|| DEFAULT_PROBES.to_vec())
}

fn run_solve(
    name: &str,
    m: usize,
    seed: u64,
    probes: Option<&[f64]>,
) -> Result<Report, CliError> {
    let problem = resolve(name)?;
    let res = resolution(m)?;
    let probes = probe_list(probes);
    let path = BrownianPath::generate(seed, res);
    let result = solve_walsh(&problem, res, &path)?;

    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for j in 0..m {
        let t = res.cell_midpoint(j);
        let x = result.cell_value(j);
        csv_rows.push(format!("grid,{},{}", fmt10(t), fmt10(x)));
        json_rows.push(json!({ "kind": "grid", "t": round10(t), "x": round10(x) }));
    }
    for &t in &probes {
        let x = result.evaluate(t)?;
        csv_rows.push(format!("probe,{},{}", fmt10(t), fmt10(x)));
        json_rows.push(json!({ "kind": "probe", "t": round10(t), "x": round10(x) }));
    }

    Ok(Report {
        meta: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "solve",
            "problem": name,
            "m": m,
            "seed": seed,
            "probes": probes,
        }),
        header: "kind,t,x",
        csv_rows,
        json_rows,
    })
}

fn run_mc(
    name: &str,
    m: usize,
    seed: u64,
    paths: u64,
    probes: Option<&[f64]>,
) -> Result<Report, CliError> {
    let problem = resolve(name)?;
    let res = resolution(m)?;
    let probes = probe_list(probes);
    let plan = SeedPlan::new(seed);
    let summary = monte_carlo(&problem, res, paths, &plan, &probes)?;

    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for (i, &t) in summary.probes.iter().enumerate() {
        csv_rows.push(format!(
            "{},{},{},{},{paths},{m},{seed}",
            fmt10(t),
            fmt10(summary.mean[i]),
            fmt10(summary.std[i]),
            fmt10(summary.stderr[i]),
        ));
        json_rows.push(json!({
            "t": round10(t),
            "mean": round10(summary.mean[i]),
            "std": round10(summary.std[i]),
            "stderr": round10(summary.stderr[i]),
            "n_paths": paths,
            "m": m,
            "seed": seed,
        }));
    }

    Ok(Report {
        meta: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "mc",
            "problem": name,
            "m": m,
            "seed": seed,
            "paths": paths,
            "probes": probes,
        }),
        header: "t,mean,std,stderr,n_paths,m,seed",
        csv_rows,
        json_rows,
    })
}

/// Parses `8..128`, `8,16,32`, or `64` into a doubling list of resolutions.
fn parse_resolutions(spec: &str) -> Result<Vec<usize>, CliError> {
    let usage =
        |msg: String| -> CliError { CliError::Usage(format!("invalid --m `{spec}`: {msg}")) };
    let parse_one = |token: &str| -> Result<usize, CliError> {
        let value: usize = token
            .trim()
            .parse()
            .map_err(|_| usage(format!("`{token}` is not an integer")))?;
        if !value.is_power_of_two() {
            return Err(usage(format!("{value} is not a power of two")));
        }
        Ok(value)
    };

    let values = if let Some((a, b)) = spec.split_once("..") {
        let start = parse_one(a)?;
        let end = parse_one(b)?;
        if end < start {
            return Err(usage(format!("{end} < {start}")));
        }
        let mut values = Vec::new();
        let mut m = start;
        while m <= end {
            values.push(m);
            m *= 2;
        }
        values
    } else if spec.contains(',') {
        spec.split(',').map(parse_one).collect::<Result<_, _>>()?
    } else {
        vec![parse_one(spec)?]
    };

    if values.len() < 3 {
        return Err(usage(
            "a convergence study needs at least 3 resolutions".to_owned(),
        ));
    }
    for pair in values.windows(2) {
        if pair[1] != 2 * pair[0] {
            return Err(usage(format!(
                "resolutions must strictly double ({} -> {})",
                pair[0], pair[1]
            )));
        }
    }
    Ok(values)
}

fn run_converge(name: &str, m_spec: &str) -> Result<Report, CliError> {
    let problem = resolve(name)?;
    let exact = problem.exact_deterministic().cloned().ok_or_else(|| {
        CliError::Usage(format!(
            "`{name}` has no known deterministic solution; use one of the *_det problems"
        ))
    })?;
    let resolutions = parse_resolutions(m_spec)?;

    let mut errors: Vec<(usize, f64)> = Vec::new();
    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for &m in &resolutions {
        let res = resolution(m)?;
        let result = solve_walsh(&problem, res, &BrownianPath::zero(res))?;
        let report = l2_error(&result, |t| exact(t), 2048);
        errors.push((m, report.l2_error));

        // Cumulative least-squares rate over the rows so far; needs three.
        let rate = if errors.len() >= 3 {
            match convergence_rate(&errors) {
                Ok(rate) => Some(rate),
                Err(svfie::Error::RateSaturated(_, _)) => None,
                Err(other) => return Err(other.into()),
            }
        } else {
            None
        };

        match rate {
            Some(rate) => {
                csv_rows.push(format!("{m},{},{}", fmt10(report.l2_error), fmt10(rate)));
                json_rows.push(json!({
                    "m": m,
                    "l2_error": round10(report.l2_error),
                    "rate": round10(rate),
                }));
            }
            None => {
                csv_rows.push(format!("{m},{},", fmt10(report.l2_error)));
                json_rows.push(json!({
                    "m": m,
                    "l2_error": round10(report.l2_error),
                    "rate": null,
                }));
            }
        }
    }

    Ok(Report {
        meta: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "converge",
            "problem": name,
            "m": resolutions,
        }),
        header: "m,l2_error,rate",
        csv_rows,
        json_rows,
    })
}

fn run_compare(
    name: &str,
    m: usize,
    seed: u64,
    probes: Option<&[f64]>,
) -> Result<Report, CliError> {
    let problem = resolve(name)?;
    let res = resolution(m)?;
    let probes = probe_list(probes);
    let path = BrownianPath::generate(seed, res);
    let walsh = solve_walsh(&problem, res, &path)?;
    let bpf = solve_bpf(&problem, res, &path)?;
    let max_abs_diff = (walsh.cell_values() - bpf.cell_values()).amax();

    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for &t in &probes {
        let w = walsh.evaluate(t)?;
        let b = bpf.evaluate(t)?;
        let diff = (w - b).abs();
        csv_rows.push(format!(
            "{},{},{},{},{}",
            fmt10(t),
            fmt10(w),
            fmt10(b),
            fmt10(diff),
            fmt10(max_abs_diff),
        ));
        json_rows.push(json!({
            "t": round10(t),
            "wfm": round10(w),
            "bpf": round10(b),
            "abs_diff": round10(diff),
            "max_abs_diff": round10(max_abs_diff),
        }));
    }

    Ok(Report {
        meta: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "compare",
            "problem": name,
            "m": m,
            "seed": seed,
            "probes": probes,
        }),
        header: "t,wfm,bpf,abs_diff,max_abs_diff",
        csv_rows,
        json_rows,
    })
}

fn run_bound(
    constants: RegularityConstants,
    alpha: f64,
    beta: f64,
    h: f64,
) -> Result<Report, CliError> {
    let bound = gronwall_bound(&constants, alpha, beta, h)?;
    Ok(Report {
        meta: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": "bound",
            "c": constants.c,
            "l": constants.l,
            "l1": constants.l1,
            "l2": constants.l2,
            "rho": constants.rho,
            "rho1": constants.rho1,
            "rho2": constants.rho2,
            "sigma": constants.sigma,
            "alpha": alpha,
            "beta": beta,
            "h": h,
        }),
        header: "r1,r2,bound",
        csv_rows: vec![format!(
            "{},{},{}",
            fmt10(bound.r1),
            fmt10(bound.r2),
            fmt10(bound.bound)
        )],
        json_rows: vec![json!({
            "r1": round10(bound.r1),
            "r2": round10(bound.r2),
            "bound": round10(bound.bound),
        })],
    })
}

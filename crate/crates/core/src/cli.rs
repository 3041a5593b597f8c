//! Command-line front end: parameter sweeps written as CSV.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input or domain error,
//! 4 convergence failure (rows are still written), 5 I/O error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{divergence_check, load_field, scaled_energy};
use crate::lagrangian::{is_extrapolated, total_density};
use crate::oracle::selftest;
use crate::quadrature::QuadratureConfig;
use crate::response::response_point;
use crate::scheme::{make_scheme, PauliVillarsScheme};
use crate::VERSION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_CONVERGENCE: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "PVQED_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pvqed", version, about = "Pauli-Villars regularized QED vacuum in magnetic fields")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print masses, coefficients, cutoff and sum-rule residuals.
    Scheme(SchemeArgs),
    /// Tabulate M⁰(q), Mᵀ(q,β) and their sum.
    Response(ResponseArgs),
    /// Tabulate the energy densities f⁰_PV(a), fᵀ_PV(a,β).
    Lagrangian(LagrangianArgs),
    /// Local-density energy of a sampled field.
    Density(DensityArgs),
    /// Run the oracle cross-checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-14)]
    abs_tol: f64,
    /// Output CSV path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, env = THREADS_ENV, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Args)]
struct MassArgs {
    /// Masses m0,m1,m2 with 0 < m0 < m1 < m2.
    #[arg(long, value_parser = parse_masses)]
    masses: [f64; 3],
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Thermal {
    /// Inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Temperature; 0 means zero temperature.
    #[arg(long)]
    temperature: Option<f64>,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[command(flatten)]
    mass: MassArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ResponseArgs {
    #[command(flatten)]
    mass: MassArgs,
    #[command(flatten)]
    thermal: Thermal,
    #[arg(long, default_value_t = 0.0)]
    q_min: f64,
    #[arg(long, default_value_t = 10.0)]
    q_max: f64,
    #[arg(long, default_value_t = 11)]
    q_steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct LagrangianArgs {
    #[command(flatten)]
    mass: MassArgs,
    #[command(flatten)]
    thermal: Thermal,
    #[arg(long, default_value_t = 0.0)]
    a_min: f64,
    #[arg(long, default_value_t = 5.0)]
    a_max: f64,
    #[arg(long, default_value_t = 11)]
    a_steps: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    mass: MassArgs,
    #[command(flatten)]
    thermal: Thermal,
    /// Field grid CSV with header x,y,z,Bx,By,Bz.
    #[arg(long)]
    field: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Refuse fields whose discrete divergence exceeds this value.
    #[arg(long)]
    max_divergence: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: Common,
}

fn parse_masses(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated masses, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}"))?;
    }
    Ok(out)
}

/// An evenly spaced grid `min, …, max` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let d = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + i as f64 * d })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Scheme,
    Response { q: Sweep },
    Lagrangian { a: Sweep },
    Density { field: PathBuf, epsilon: f64, max_divergence: Option<f64> },
    Selftest,
}

/// Validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub masses: Option<[f64; 3]>,
    /// `f64::INFINITY` at zero temperature; `None` for non-thermal tasks.
    pub beta: Option<f64>,
    pub quad: QuadratureConfig,
    pub out: Option<PathBuf>,
    pub threads: usize,
}

/// Command-line errors.
#[derive(Debug)]
pub enum CliError {
    /// Includes `--help` and `--version`, which are not failures.
    Clap(clap::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => EXIT_OK,
            _ => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn check_common(c: &Common) -> std::result::Result<QuadratureConfig, CliError> {
    if !(c.rel_tol > 0.0 && c.rel_tol.is_finite()) {
        return Err(usage(format!("--rel-tol must be positive, got {}", c.rel_tol)));
    }
    if !(c.abs_tol >= 0.0 && c.abs_tol.is_finite()) {
        return Err(usage(format!("--abs-tol must be nonnegative, got {}", c.abs_tol)));
    }
    if c.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(QuadratureConfig::with_tolerances(c.rel_tol, c.abs_tol))
}

fn check_thermal(t: &Thermal) -> std::result::Result<f64, CliError> {
    match (t.beta, t.temperature) {
        (Some(b), None) => {
            if b > 0.0 && !b.is_nan() {
                Ok(b)
            } else {
                Err(usage(format!("--beta must be positive, got {b}")))
            }
        }
        (None, Some(temp)) => {
            if temp == 0.0 {
                Ok(f64::INFINITY)
            } else if temp > 0.0 && temp.is_finite() {
                Ok(1.0 / temp)
            } else {
                Err(usage(format!("--temperature must be nonnegative, got {temp}")))
            }
        }
        _ => Err(usage("exactly one of --beta and --temperature is required")),
    }
}

fn check_sweep(
    name: &str,
    min: f64,
    max: f64,
    steps: usize,
) -> std::result::Result<Sweep, CliError> {
    if !(min.is_finite() && max.is_finite()) || min < 0.0 {
        return Err(usage(format!("--{name}-min/--{name}-max must be finite and nonnegative")));
    }
    if min > max {
        return Err(usage(format!("--{name}-min {min} exceeds --{name}-max {max}")));
    }
    if steps == 0 {
        return Err(usage(format!("--{name}-steps must be at least 1")));
    }
    Ok(Sweep { min, max, steps })
}

/// Parses and validates `argv` (including the program name).
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let cfg = match cli.command {
        Cmd::Scheme(a) => RunConfig {
            task: Task::Scheme,
            masses: Some(a.mass.masses),
            beta: None,
            quad: check_common(&a.common)?,
            out: a.common.out,
            threads: a.common.threads,
        },
        Cmd::Response(a) => RunConfig {
            task: Task::Response {
                q: check_sweep("q", a.q_min, a.q_max, a.q_steps)?,
            },
            masses: Some(a.mass.masses),
            beta: Some(check_thermal(&a.thermal)?),
            quad: check_common(&a.common)?,
            out: a.common.out,
            threads: a.common.threads,
        },
        Cmd::Lagrangian(a) => RunConfig {
            task: Task::Lagrangian {
                a: check_sweep("a", a.a_min, a.a_max, a.a_steps)?,
            },
            masses: Some(a.mass.masses),
            beta: Some(check_thermal(&a.thermal)?),
            quad: check_common(&a.common)?,
            out: a.common.out,
            threads: a.common.threads,
        },
        Cmd::Density(a) => {
            if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
                return Err(usage(format!("--epsilon must be positive, got {}", a.epsilon)));
            }
            if let Some(d) = a.max_divergence {
                if !(d >= 0.0) {
                    return Err(usage(format!("--max-divergence must be nonnegative, got {d}")));
                }
            }
            RunConfig {
                task: Task::Density {
                    field: a.field,
                    epsilon: a.epsilon,
                    max_divergence: a.max_divergence,
                },
                masses: Some(a.mass.masses),
                beta: Some(check_thermal(&a.thermal)?),
                quad: check_common(&a.common)?,
                out: a.common.out,
                threads: a.common.threads,
            }
        }
        Cmd::Selftest(a) => RunConfig {
            task: Task::Selftest,
            masses: None,
            beta: None,
            quad: check_common(&a.common)?,
            out: a.common.out,
            threads: a.common.threads,
        },
    };
    Ok(cfg)
}

/// CSV text produced by a run, and whether every row converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub csv: String,
    pub converged: bool,
}

fn fmt_beta(beta: Option<f64>) -> String {
    match beta {
        None => "none".into(),
        Some(b) if b.is_infinite() => "inf".into(),
        Some(b) => format!("{b:e}"),
    }
}

fn header_comment(cfg: &RunConfig) -> String {
    let masses = match cfg.masses {
        Some(m) => format!("{:e},{:e},{:e}", m[0], m[1], m[2]),
        None => "builtin".into(),
    };
    format!(
        "# pvqed {VERSION}; natural units hbar=c=k=e=1; masses={masses}; beta={}; rel_tol={:e}; abs_tol={:e}\n",
        fmt_beta(cfg.beta),
        cfg.quad.rel_tol,
        cfg.quad.abs_tol
    )
}

fn scheme_of(cfg: &RunConfig) -> Result<PauliVillarsScheme> {
    let m = cfg
        .masses
        .ok_or_else(|| Error::InvalidConfig("this task needs --masses".into()))?;
    make_scheme(m[0], m[1], m[2])
}

fn beta_of(cfg: &RunConfig) -> Result<f64> {
    cfg.beta
        .ok_or_else(|| Error::InvalidConfig("this task needs --beta or --temperature".into()))
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} worker threads: {e}")))
}

/// Computes the CSV for a configuration without writing it.
pub fn render(cfg: &RunConfig) -> Result<Table> {
    let mut csv = header_comment(cfg);
    let mut converged = true;
    match &cfg.task {
        Task::Scheme => {
            let s = scheme_of(cfg)?;
            let m = s.masses();
            let c = s.coeffs();
            let (r0, r2) = s.sum_rule_residuals();
            csv.push_str("m0,m1,m2,c0,c1,c2,lambda,sum_c,sum_cm2\n");
            let _ = writeln!(
                csv,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                m[0],
                m[1],
                m[2],
                c[0],
                c[1],
                c[2],
                s.lambda(),
                r0,
                r2
            );
        }
        Task::Response { q } => {
            let s = scheme_of(cfg)?;
            let beta = beta_of(cfg)?;
            let qs = q.points();
            let rows = pool(cfg.threads)?.install(|| {
                qs.par_iter()
                    .map(|&q| response_point(q, beta, &s, &cfg.quad))
                    .collect::<Result<Vec<_>>>()
            })?;
            converged = rows.iter().all(|r| r.converged);
            csv.push_str("q,M0,MT,Mtotal,err");
            csv.push_str(if converged { "\n" } else { ",converged\n" });
            for r in rows {
                let _ = write!(csv, "{:e},{:e},{:e},{:e},{:e}", r.q, r.m0_value, r.mt_value, r.total, r.err);
                if !converged {
                    let _ = write!(csv, ",{}", r.converged);
                }
                csv.push('\n');
            }
        }
        Task::Lagrangian { a } => {
            let s = scheme_of(cfg)?;
            let beta = beta_of(cfg)?;
            let xs = a.points();
            let rows = pool(cfg.threads)?.install(|| {
                xs.par_iter()
                    .map(|&a| total_density(a, beta, &s, &cfg.quad))
                    .collect::<Result<Vec<_>>>()
            })?;
            converged = rows.iter().all(|r| r.converged);
            csv.push_str("a,f0,ft,total,extrapolated");
            csv.push_str(if converged { "\n" } else { ",converged\n" });
            for r in rows {
                let _ = write!(
                    csv,
                    "{:e},{:e},{:e},{:e},{}",
                    r.a,
                    r.f0,
                    r.ft,
                    r.total,
                    is_extrapolated(r.a, &s)
                );
                if !converged {
                    let _ = write!(csv, ",{}", r.converged);
                }
                csv.push('\n');
            }
        }
        Task::Density {
            field,
            epsilon,
            max_divergence,
        } => {
            let s = scheme_of(cfg)?;
            let beta = beta_of(cfg)?;
            let grid = load_field(field)?;
            let div = divergence_check(&grid)?;
            if let Some(limit) = max_divergence {
                if div > *limit {
                    return Err(Error::domain(format!(
                        "field divergence {div:e} exceeds --max-divergence {limit:e}"
                    )));
                }
            }
            let rep = pool(cfg.threads)?.install(|| scaled_energy(&grid, *epsilon, beta, &s, &cfg.quad))?;
            converged = rep.converged;
            let _ = writeln!(
                csv,
                "# max_boundary_field={:e}; resampled_energy={:e}",
                grid.max_boundary_field(),
                rep.resampled_energy
            );
            csv.push_str("energy,epsilon,scaled_energy,cells_clipped,max_divergence");
            csv.push_str(if converged { "\n" } else { ",converged\n" });
            let _ = write!(
                csv,
                "{:e},{:e},{:e},{},{:e}",
                rep.energy, rep.epsilon, rep.scaled_energy, rep.cells_clipped, div
            );
            if !converged {
                csv.push_str(",false");
            }
            csv.push('\n');
        }
        Task::Selftest => {
            let checks = pool(cfg.threads)?.install(|| selftest(&cfg.quad))?;
            csv.push_str("check,value,oracle,rel_diff\n");
            for c in &checks {
                let _ = writeln!(csv, "{},{:e},{:e},{:e}", c.name, c.value, c.oracle, c.rel_diff);
            }
            converged = checks.iter().all(|c| c.passed());
        }
    }
    Ok(Table { csv, converged })
}

/// Writes `text` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Exit code for a library error.
pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::NonFiniteEvaluation { .. } | Error::SeriesTruncation { .. } => EXIT_CONVERGENCE,
        _ => EXIT_DOMAIN,
    }
}

/// Runs a validated configuration and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let table = match render(cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let written = match &cfg.out {
        Some(p) => write_atomic(p, &table.csv),
        None => std::io::stdout()
            .write_all(table.csv.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return exit_code_for(&e);
    }
    if table.converged {
        EXIT_OK
    } else {
        eprintln!("warning: some values did not meet the requested tolerance or checks failed");
        EXIT_CONVERGENCE
    }
}

/// Parses `argv`, runs, and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let code = e.exit_code();
            match &e {
                CliError::Clap(c) => {
                    let _ = c.print();
                }
                CliError::Usage(_) => eprintln!("{e}"),
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> std::result::Result<RunConfig, CliError> {
        parse_args(std::iter::once("pvqed").chain(s.split_whitespace()))
    }

    #[test]
    fn response_command_parses() {
        let c = parse("response --masses 1,2,3 --beta 1 --q-min 0 --q-max 10 --q-steps 11 --out t.csv").unwrap();
        assert_eq!(c.masses, Some([1.0, 2.0, 3.0]));
        assert_eq!(c.beta, Some(1.0));
        assert_eq!(
            c.task,
            Task::Response {
                q: Sweep {
                    min: 0.0,
                    max: 10.0,
                    steps: 11
                }
            }
        );
        assert_eq!(c.out, Some(PathBuf::from("t.csv")));
    }

    #[test]
    fn beta_and_temperature_exclusive() {
        let e = parse("lagrangian --masses 1,2,3 --beta 1 --temperature 1").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        let e = parse("lagrangian --masses 1,2,3").unwrap_err();
        assert_eq!(e.exit_code(), EXIT_USAGE);
    }

    #[test]
    fn zero_temperature_is_infinite_beta() {
        let c = parse("lagrangian --masses 1,2,3 --temperature 0").unwrap();
        assert_eq!(c.beta, Some(f64::INFINITY));
        let c = parse("lagrangian --masses 1,2,3 --temperature 4").unwrap();
        assert_eq!(c.beta, Some(0.25));
    }

    #[test]
    fn bad_values_are_usage_errors() {
        for s in [
            "response --masses 1,2 --beta 1",
            "response --masses 1,2,3 --beta -1",
            "response --masses 1,2,3 --beta 1 --q-steps 0",
            "response --masses 1,2,3 --beta 1 --q-min 3 --q-max 1",
            "scheme --masses 1,2,3 --rel-tol 0",
            "scheme --masses 1,2,3 --threads 0",
            "density --masses 1,2,3 --beta 1 --field f.csv --epsilon 0",
        ] {
            assert_eq!(parse(s).unwrap_err().exit_code(), EXIT_USAGE, "{s}");
        }
    }

    #[test]
    fn degenerate_scheme_parses_but_fails_to_run() {
        let c = parse("scheme --masses 1,2,2").unwrap();
        let e = render(&c).unwrap_err();
        assert_eq!(exit_code_for(&e), EXIT_DOMAIN);
    }

    #[test]
    fn sweep_points_hit_endpoints() {
        let p = Sweep {
            min: 0.0,
            max: 1.0,
            steps: 3,
        }
        .points();
        assert_eq!(p, vec![0.0, 0.5, 1.0]);
        let p = Sweep {
            min: 2.0,
            max: 2.0,
            steps: 1,
        }
        .points();
        assert_eq!(p, vec![2.0]);
    }

    #[test]
    fn scheme_table() {
        let t = render(&parse("scheme --masses 1,2,3").unwrap()).unwrap();
        let mut lines = t.csv.lines();
        assert!(lines.next().unwrap().starts_with("# pvqed "));
        assert_eq!(lines.next().unwrap(), "m0,m1,m2,c0,c1,c2,lambda,sum_c,sum_cm2");
        let row: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert!((row[4] + 1.6).abs() < 1e-15);
        assert!((row[5] - 0.6).abs() < 1e-15);
        assert!((row[6] - 1.568_105_363_366_231_4).abs() < 1e-12);
        assert!(row[7] <= 1e-12 && row[8] <= 1e-12);
    }
}

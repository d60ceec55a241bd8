//! `sqglc` command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqglc::dynamics::{run_simulation_with, DynamicsError, ForcingMode, ModelParams, ParamFlag, RunOptions, SPLITTING};
use sqglc::energetics::{self, bootstrap_iterate, p_star, EnergeticsError, ExponentPair, Phase};
use sqglc::fields::FieldError;
use sqglc::io::{
    initial_state, load_config, parse_config, read_snapshot, write_energy_csv, write_snapshot, write_table_csv,
    IoError, CODE_VERSION,
};
use sqglc::potentials::suites::{run_suite, Suite};
use sqglc::potentials::PotentialsError;
use sqglc::spectral::SpectralGrid;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "sqglc", version, about = "Coupled SQG / director-field solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation; writes snapshots and energy.csv to the output directory.
    Simulate {
        /// Configuration file.
        config: PathBuf,
    },
    /// Iterate the integrability exponent bootstrap.
    Bootstrap {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        q0: f64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
    },
    /// Run potential-theory property suites and write ratio CSVs.
    PotentialsCheck {
        #[arg(long)]
        a: f64,
        /// kernel, riesz, morrey, poincare, hedberg or all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Directory for the CSV reports.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recompute energies and balance residuals from a snapshot directory.
    EnergyReport {
        dir: PathBuf,
        /// Override the forcing recorded in the snapshots (F1, F2 or none).
        #[arg(long)]
        forcing: Option<String>,
        /// Override the anisotropy parameter.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output file; defaults to `<dir>/energy_report.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

fn is_numerical(e: &DynamicsError) -> bool {
    matches!(
        e,
        DynamicsError::CflViolation { .. }
            | DynamicsError::StepRejected { .. }
            | DynamicsError::Field(FieldError::DegeneratePoint { .. })
    )
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        let code = if is_numerical(&e) { EXIT_NUMERICAL } else { EXIT_VALIDATION };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EnergeticsError> for Failure {
    fn from(e: EnergeticsError) -> Self {
        match e {
            EnergeticsError::Dynamics(d) => d.into(),
            EnergeticsError::Field(f) => DynamicsError::Field(f).into(),
            other => Failure::validation(other.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::validation(e.to_string())
    }
}

impl From<PotentialsError> for Failure {
    fn from(e: PotentialsError) -> Self {
        let code = match e {
            PotentialsError::QuadratureFailure(_) => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    IoError::io(path, e).into()
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("SQGLC_THREADS") {
        Err(_) => Ok(1),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(Failure::validation(format!("SQGLC_THREADS = {s:?} is not a positive integer"))),
        },
    }
}

fn provenance(source: &str, seed: u64) -> String {
    format!("code: {CODE_VERSION}\nseed: {seed}\nsplitting: {SPLITTING}\nconfig:\n{}", source.trim_end())
}

/// Configuration text embedded in a provenance block, if any.
fn embedded_config(provenance: &str) -> Option<&str> {
    let start = provenance.find("\nconfig:\n")?;
    Some(&provenance[start + "\nconfig:\n".len()..])
}

fn simulate(path: &Path) -> Result<(), Failure> {
    let cfg = load_config(path)?;
    let flags = cfg.params.validate()?;
    for flag in flags {
        match flag {
            ParamFlag::OutsideRegularityRange => eprintln!("warning: a = {} outside (1/2, 1)", cfg.params.a),
            ParamFlag::AlphaNotHalf => eprintln!("warning: alpha = {} differs from 1/2", cfg.params.alpha),
        }
    }
    let grid = SpectralGrid::<f64>::with_threads(cfg.params.n, threads()?)
        .map_err(|e| Failure::validation(e.to_string()))?;
    let state = initial_state(&cfg, &grid)?;
    let out_dir = &cfg.output_dir;
    std::fs::create_dir_all(out_dir).map_err(|e| io_failure(out_dir, e))?;
    let prov = provenance(&cfg.source, cfg.seed);
    let options = RunOptions {
        cadence: cfg.cadence,
        p_list: cfg.p_list.clone(),
    };
    let total = cfg.params.steps();
    let every = cfg.snapshot_every;
    let mut written = 0usize;
    let mut io_error: Option<Failure> = None;
    let params = cfg.params.clone();
    let result = run_simulation_with(&params, state.theta, state.d, &options, |s, _| {
        let due = s.step == 0 || s.step == total || (every > 0 && s.step % every == 0);
        if !due || io_error.is_some() {
            return;
        }
        let file = out_dir.join(format!("snap_{:08}.bin", s.step));
        match write_snapshot(s, &params, &file, &prov) {
            Ok(_) => written += 1,
            Err(e) => io_error = Some(e.into()),
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let run = result?;
    let csv_path = out_dir.join("energy.csv");
    let file = File::create(&csv_path).map_err(|e| io_failure(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    write_energy_csv(&mut w, &run.report, &prov).map_err(|e| io_failure(&csv_path, e))?;
    w.flush().map_err(|e| io_failure(&csv_path, e))?;
    let first = run.report.samples.first();
    let last = run.report.samples.last();
    if let (Some(first), Some(last)) = (first, last) {
        println!("steps: {}  t: {:.6}", last.step, last.t);
        println!("E1: {:.12e} -> {:.12e}", first.e1, last.e1);
        println!("E2: {:.12e} -> {:.12e}", first.e2, last.e2);
        let worst = run.report.samples.iter().map(|s| s.balance_residual.abs()).fold(0.0, f64::max);
        println!("max |balance residual|: {worst:.3e}");
    }
    println!("snapshots: {written}  csv: {}", csv_path.display());
    Ok(())
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::RaiseQ => "raise_q",
        Phase::ImproveP => "improve_p",
        Phase::ImproveQ => "improve_q",
    }
}

fn bootstrap(a: f64, p0: f64, q0: f64, max_iters: usize) -> Result<(), Failure> {
    if !(p0 > 0.0 && q0 > 0.0 && p0.is_finite() && q0.is_finite()) {
        return Err(Failure::validation("starting exponents must be positive and finite"));
    }
    let out = bootstrap_iterate(ExponentPair::finite(p0, q0), a, max_iters, None)?;
    println!("a = {a}  p* = {}", p_star(a));
    println!("{:>4} {:>10} {:>24} {:>24}", "step", "phase", "p", "q");
    for (i, pair) in out.trajectory.iter().enumerate() {
        let phase = if i == 0 { "start" } else { phase_name(out.phases[i - 1]) };
        println!("{i:>4} {phase:>10} {:>24} {:>24}", pair.p.to_string(), pair.q.to_string());
    }
    if out.monotonicity_violations > 0 {
        println!("monotonicity violations: {}", out.monotonicity_violations);
    }
    if out.diverged {
        println!("verdict: both exponents reach the +inf marker");
        Ok(())
    } else {
        let last = out.last();
        println!("verdict: not resolved after {max_iters} updates (p = {}, q = {})", last.p, last.q);
        Err(Failure::validation("bootstrap did not terminate within --max-iters"))
    }
}

fn potentials_check(a: f64, suite: &str, out: &Path) -> Result<(), Failure> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::parse(suite).ok_or_else(|| Failure {
            code: EXIT_USAGE,
            message: format!("unknown suite `{suite}`"),
        })?]
    };
    std::fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let mut failed = Vec::new();
    for s in suites {
        let report = run_suite(s, a)?;
        let path = out.join(format!("potentials_{}.csv", s.name()));
        let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
        let mut w = BufWriter::new(file);
        let mut prov = format!("code: {CODE_VERSION}\nsuite: {}\na: {a}", s.name());
        for c in &report.checks {
            prov.push_str(&format!("\ncheck {}: {} ({})", c.name, if c.passed { "pass" } else { "fail" }, c.detail));
        }
        write_table_csv(&mut w, &prov, &report.header, &report.rows).map_err(|e| io_failure(&path, e))?;
        w.flush().map_err(|e| io_failure(&path, e))?;
        for c in &report.checks {
            println!("{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, s.name(), c.name, c.detail);
        }
        if !report.passed() {
            failed.push(s.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(format!("failed suites: {}", failed.join(", "))))
    }
}

fn parse_forcing(s: &str) -> Result<ForcingMode, Failure> {
    match s {
        "F1" | "f1" => Ok(ForcingMode::F1),
        "F2" | "f2" => Ok(ForcingMode::F2),
        "none" => Ok(ForcingMode::None),
        _ => Err(Failure::validation(format!("unknown forcing `{s}`"))),
    }
}

fn energy_report(dir: &Path, forcing: Option<&str>, epsilon: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_failure(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("snap_") && n.ends_with(".bin"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Failure::validation(format!("no snap_*.bin files in {}", dir.display())));
    }
    let first = read_snapshot(&files[0])?;
    let n = first.n as usize;
    // Coefficients default to the run configuration when it is embedded.
    let mut params = embedded_config(&first.provenance)
        .and_then(|text| parse_config(text, dir).ok())
        .map(|cfg| cfg.params)
        .unwrap_or_else(|| ModelParams::new(first.a, first.alpha, n, 1.0, 1.0));
    params.a = first.a;
    params.alpha = first.alpha;
    params.n = n;
    if let Some(f) = forcing {
        params.forcing = parse_forcing(f)?;
    }
    if let Some(eps) = epsilon {
        params.epsilon = Some(eps);
    }
    params.validate()?;
    let grid = SpectralGrid::<f64>::with_threads(n, threads()?).map_err(|e| Failure::validation(e.to_string()))?;
    let header = ["t", "step", "E1", "E2", "D", "balance_residual", "unit_defect"];
    let mut rows = Vec::new();
    for path in &files {
        let snap = read_snapshot(path)?;
        let state = snap.to_state(&grid)?;
        let e = energetics::energies(&state, &params)?;
        let r = energetics::balance_residual(&state, &params)?;
        rows.push(vec![state.t, state.step as f64, e.e1, e.e2, e.dissipation, r, state.d.unit_defect()]);
        println!(
            "{}  t = {:.6}  E1 = {:.12e}  E2 = {:.12e}  residual = {:.3e}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or(""),
            state.t,
            e.e1,
            e.e2,
            r
        );
    }
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("energy_report.csv"));
    let prov = format!(
        "code: {CODE_VERSION}\nsource: {}\nforcing: {}\nsnapshot provenance:\n{}",
        dir.display(),
        params.forcing.as_str(),
        first.provenance.trim_end()
    );
    let file = File::create(&out_path).map_err(|e| io_failure(&out_path, e))?;
    let mut w = BufWriter::new(file);
    write_table_csv(&mut w, &prov, &header, &rows).map_err(|e| io_failure(&out_path, e))?;
    w.flush().map_err(|e| io_failure(&out_path, e))?;
    println!("report: {}", out_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let result = match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Bootstrap { a, p0, q0, max_iters } => bootstrap(a, p0, q0, max_iters),
        Command::PotentialsCheck { a, suite, out } => potentials_check(a, &suite, &out),
        Command::EnergyReport {
            dir,
            forcing,
            epsilon,
            out,
        } => energy_report(&dir, forcing.as_deref(), epsilon, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == EXIT_USAGE {
                use clap::CommandFactory;
                let _ = Cli::command().print_help();
            }
            ExitCode::from(f.code)
        }
    }
}

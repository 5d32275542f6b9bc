use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use qdefcs::gup::{gup_report, GupParameters};
use qdefcs::harness::csvio::{write_csv, write_rows, Format};
use qdefcs::harness::scan::{scan_t, scan_z, Observable, ScanConfig, TGrid, ZGrid};
use qdefcs::harness::verify::{self, Profile};
use qdefcs::{DeformationParameter, Error, ObservableReport, Phase, SeriesConfig};

#[derive(Parser)]
#[command(name = "qdefcs", version, about = "Photon statistics of q-deformed coherent states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan one observable over t = |z|² for several q
    ScanT(ScanTArgs),
    /// Scan σ and 4⟨N⟩ over a polar grid in the z-plane
    ScanZ(ScanZArgs),
    /// Map deformed-commutator constants (α, β) onto q
    Gup(GupArgs),
    /// Run the self-check suite
    Verify {
        /// Larger grids and more oracle samples
        #[arg(long)]
        strict: bool,
        /// Print the report as JSON
        #[arg(long)]
        json: bool,
    },
    /// Every observable at one point, as JSON
    Report(ReportArgs),
    /// Write the Mandel and variance-ratio figure data into a directory
    Figures {
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads for the scan
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ScanTArgs {
    /// Deformation parameter; repeat for several curves
    #[arg(long = "q", default_values_t = [0.98, 0.96, 0.94])]
    q: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    t_start: f64,
    #[arg(long, default_value_t = 10.0)]
    t_stop: f64,
    #[arg(long, default_value_t = 200)]
    t_count: usize,
    #[arg(long, value_enum, default_value_t = Phase::Real)]
    phase: Phase,
    #[arg(long, value_enum, default_value_t = Observable::Mandel)]
    observable: Observable,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Fraction of the convergence radius the grid may reach
    #[arg(long, default_value_t = 0.99)]
    guard: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ScanZArgs {
    #[arg(long)]
    q: f64,
    /// Radial rings
    #[arg(long, default_value_t = 50)]
    nr: usize,
    /// Rays
    #[arg(long, default_value_t = 50)]
    nphi: usize,
    /// Outer |z|; defaults to √(guard · radius), required for q ≥ 1
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 0.9)]
    guard: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GupArgs {
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    re: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    im: f64,
    #[arg(long, default_value_t = qdefcs::DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = 0.99)]
    guard: f64,
}

enum Failure {
    Library(Error),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::ScanT(a) => {
            let cfg = ScanConfig {
                q_list: a.q,
                t_grid: TGrid {
                    start: a.t_start,
                    stop: a.t_stop,
                    count: a.t_count,
                },
                phase: a.phase,
                observable: a.observable,
                tolerance: a.tol,
                guard: a.guard,
                threads: a.output.threads,
            };
            let rows = scan_t(&cfg)?;
            let mut out = open_output(a.output.out.as_deref())?;
            write_rows(&rows, a.output.format, &mut out)?;
            out.flush()?;
        }
        Command::ScanZ(a) => {
            let grid = ZGrid {
                nr: a.nr,
                nphi: a.nphi,
                r_max: a.r_max,
                guard: a.guard,
                tolerance: a.tol,
                threads: a.output.threads,
            };
            let rows = scan_z(DeformationParameter::new(a.q)?, &grid)?;
            let mut out = open_output(a.output.out.as_deref())?;
            write_rows(&rows, a.output.format, &mut out)?;
            out.flush()?;
        }
        Command::Gup(a) => {
            let p = GupParameters::new(a.alpha, a.beta, a.hbar, a.m, a.omega)?;
            emit_json(&gup_report(&p)?)?;
        }
        Command::Verify { strict, json } => {
            let profile = if strict { Profile::Strict } else { Profile::Fast };
            let report = verify::run(profile);
            if json {
                emit_json(&report)?;
            } else {
                for c in &report.checks {
                    let mark = if c.passed { "PASS" } else { "FAIL" };
                    println!(
                        "{mark} {:<28} measured={:.6e} threshold={:.3e}  {}",
                        c.name, c.measured, c.threshold, c.detail
                    );
                }
                println!("{:.2} s", report.elapsed_seconds);
            }
            if !report.passed() {
                return Err(Failure::Verify);
            }
        }
        Command::Report(a) => {
            let q = DeformationParameter::new(a.q)?;
            let cfg = SeriesConfig::with_guard(a.guard);
            cfg.validate()?;
            let report = ObservableReport::evaluate(q, Complex64::new(a.re, a.im), a.tol, &cfg)?;
            emit_json(&report)?;
        }
        Command::Figures { out_dir, threads } => {
            std::fs::create_dir_all(&out_dir)
                .map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))?;
            for (file, mut cfg) in [
                ("fig1_mandel.csv", ScanConfig::mandel_figure()),
                ("fig2_variance_ratio.csv", ScanConfig::variance_ratio_figure()),
            ] {
                cfg.threads = threads;
                let rows = scan_t(&cfg)?;
                let path = out_dir.join(file);
                let mut out = open_output(Some(&path))?;
                write_csv(&rows, &mut out)?;
                out.flush()?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Library(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

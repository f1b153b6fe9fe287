//! `gtbounds` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument error,
//! 3 I/O error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::adaptive::{simulate, SimConfig};
use crate::bounds::{self, BoundQuery, CurveRow};
use crate::entropy::{self, DefectModel};
use crate::error::Error;
use crate::oracle::{run_suite, SuiteConfig, EXACT_TOLERANCE};
use crate::plot::render_svg;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Header of the sweep CSV; the column order is part of the file format.
pub const CSV_HEADER: &str =
    "delta,epsilon,counting,quantization,individual,main,main_argmin_k,adaptive_rate,best_lower,gap_flag";

#[derive(Debug, Parser)]
#[command(
    name = "gtbounds",
    version,
    about = "Converse bounds for linear-regime group testing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate every bound at one (delta, epsilon).
    Bound {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Evaluate the bounds on a delta grid and write CSV (and SVG).
    Sweep {
        #[arg(long, default_value_t = 0.01)]
        min: f64,
        #[arg(long, default_value_t = 0.5)]
        max: f64,
        #[arg(long, default_value_t = 0.001)]
        step: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// CSV destination; stdout when absent. The SVG goes next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run the exact-oracle verification suite.
    Verify {
        #[arg(long, default_value_t = 12)]
        max_n: usize,
        #[arg(long, env = "GTBOUNDS_SEED", default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long, default_value_t = EXACT_TOLERANCE, allow_negative_numbers = true)]
        tolerance: f64,
        #[arg(long, default_value_t = 500)]
        fuzz_cases: usize,
    },
    /// Simulate the adaptive pairing scheme.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 400)]
        trials: u64,
        #[arg(long, env = "GTBOUNDS_SEED", default_value_t = 7)]
        seed: u64,
    },
    /// Locate the adaptivity gap.
    Gap {
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Compare the best single row weight with mixtures of row weights.
    Probe {
        #[arg(long)]
        delta: f64,
        #[arg(long = "rate", visible_alias = "t")]
        rate: f64,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        #[arg(long, default_value_t = 200)]
        resolution: u32,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nFor more information, try '--help'.");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_IO
        }
        Err(Failure::Verify) => EXIT_VERIFY_FAILED,
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Bound { delta, epsilon } => cmd_bound(delta, epsilon, out),
        Command::Sweep {
            min,
            max,
            step,
            epsilon,
            out: path,
            format,
        } => cmd_sweep(min, max, step, epsilon, path.as_deref(), format, out),
        Command::Verify {
            max_n,
            seed,
            tolerance,
            fuzz_cases,
        } => cmd_verify(max_n, seed, tolerance, fuzz_cases, out, err),
        Command::Simulate {
            n,
            delta,
            trials,
            seed,
        } => cmd_simulate(n, delta, trials, seed, out),
        Command::Gap { epsilon } => cmd_gap(epsilon, out),
        Command::Probe {
            delta,
            rate,
            kmax,
            resolution,
        } => cmd_probe(delta, rate, kmax, resolution, out),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.9}"))
}

fn cmd_bound(delta: f64, epsilon: f64, out: &mut dyn Write) -> Result<(), Failure> {
    let q = BoundQuery::new(delta, epsilon)?;
    let counting = bounds::counting_bound(&q);
    let individual = bounds::individual_testing_bound(&q);
    let quant = bounds::quantization_bound(&q);
    let main = bounds::main_bound(&q);
    let relaxed = bounds::relaxed_k0_bound(&q);
    let adaptive = bounds::adaptive_rate(&q.model);
    let best = bounds::best_lower_bound(&q);

    writeln!(out, "delta = {delta}")?;
    writeln!(out, "epsilon = {epsilon}")?;
    writeln!(out, "H(delta) = {:.9}", q.model.entropy())?;
    writeln!(out, "k0 = {:.9}", entropy::k0(&q.model))?;
    writeln!(out, "counting = {}", opt(counting.value))?;
    writeln!(
        out,
        "quantization = {} (k = {})",
        opt(quant.value),
        quant.argmin_k.unwrap_or(1)
    )?;
    writeln!(
        out,
        "individual = {} (applicable = {})",
        opt(individual.value),
        individual.applicable
    )?;
    match main {
        Ok(r) => writeln!(
            out,
            "main = {} (argmin_k = {}, k_scan_limit = {})",
            opt(r.value),
            r.argmin_k.unwrap_or(1),
            r.k_scan_limit.unwrap_or(1)
        )?,
        Err(e) => writeln!(out, "main = 0 (vacuous: {e})")?,
    }
    writeln!(out, "adaptive_rate = {}", opt(adaptive.value))?;
    writeln!(out, "best_lower = {}", opt(best.value))?;
    if let Ok(r) = relaxed {
        writeln!(
            out,
            "relaxed_k0 (diagnostic, real row weight) = {}",
            opt(r.value)
        )?;
    }
    Ok(())
}

/// Grid `min, min + step, ..., ≤ max`, rounded to 12 decimals so that
/// printed deltas are stable.
pub fn delta_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain("step", step, "step > 0"));
    }
    if !(min <= max) {
        return Err(Error::domain("min", min, "min <= max"));
    }
    if !(min > 0.0 && max < 1.0) {
        return Err(Error::domain(
            "grid",
            if min > 0.0 { max } else { min },
            "grid inside (0, 1)",
        ));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// `x` with 9 significant digits, fixed-point.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn csv_row(r: &CurveRow) -> String {
    let num = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), sig9);
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        sig9(r.delta),
        sig9(r.epsilon),
        num(r.counting),
        num(r.quantization),
        num(r.individual),
        num(r.main),
        r.main_argmin_k
            .map_or_else(|| "NA".to_string(), |k| k.to_string()),
        num(r.adaptive_rate),
        num(r.best_lower),
        r.gap_flag
    )
}

pub fn render_csv(rows: &[CurveRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 100);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&csv_row(r));
        s.push('\n');
    }
    s
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn cmd_sweep(
    min: f64,
    max: f64,
    step: f64,
    epsilon: f64,
    path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let grid = delta_grid(min, max, step)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::domain("epsilon", epsilon, "0 <= epsilon < 1").into());
    }
    if format == Format::Svg && path.is_none() {
        return Err(Failure::Usage("--format svg needs --out".into()));
    }
    let rows = bounds::sweep(&grid, epsilon);
    let csv = render_csv(&rows);
    match path {
        Some(p) => {
            write_file(p, &csv)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), p.display())?;
            if format == Format::Svg {
                let svg_path = p.with_extension("svg");
                write_file(&svg_path, &render_svg(&rows))?;
                writeln!(out, "wrote {}", svg_path.display())?;
            }
        }
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn cmd_verify(
    max_n: usize,
    seed: u64,
    tolerance: f64,
    fuzz_cases: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = SuiteConfig {
        max_n,
        seed,
        tolerance,
        fuzz_cases,
        ..SuiteConfig::default()
    };
    cfg.validate()?;
    let report = run_suite(&cfg)?;
    write!(out, "{report}")?;
    let failed = report.failures().count();
    writeln!(
        out,
        "checks = {} passed = {} failed = {}",
        report.len(),
        report.len() - failed,
        failed
    )?;
    if failed > 0 {
        for f in report.failures() {
            writeln!(err, "{f}")?;
        }
        return Err(Failure::Verify);
    }
    Ok(())
}

fn cmd_simulate(
    n: usize,
    delta: f64,
    trials: u64,
    seed: u64,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let cfg = SimConfig::new(n, delta, trials, seed)?;
    write!(out, "{}", simulate(&cfg))?;
    Ok(())
}

fn cmd_gap(epsilon: f64, out: &mut dyn Write) -> Result<(), Failure> {
    if !(epsilon >= 0.0) {
        return Err(Error::domain("epsilon", epsilon, "epsilon >= 0").into());
    }
    match bounds::adaptivity_gap(epsilon) {
        Ok((lo, hi)) => {
            writeln!(out, "delta_lo = {lo:.5}")?;
            writeln!(out, "delta_hi = {hi:.5}")?;
        }
        Err(Error::EmptyInterval { .. }) => {
            writeln!(out, "adaptivity gap is empty at epsilon = {epsilon}")?
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn cmd_probe(
    delta: f64,
    rate: f64,
    kmax: u32,
    resolution: u32,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let model = DefectModel::new(delta)?;
    let p = bounds::simplex_probe(&model, rate, kmax, resolution)?;
    writeln!(
        out,
        "vertex_max = {:.12} (k = {})",
        p.vertex_max, p.vertex_k
    )?;
    writeln!(out, "simplex_max = {:.12}", p.simplex_max)?;
    writeln!(out, "gap = {:.12}", p.gap)?;
    let w: Vec<String> = p.argmax_weights.iter().map(|a| format!("{a:.6}")).collect();
    writeln!(out, "argmax_weights = [{}]", w.join(", "))?;
    Ok(())
}

//! Command-line front end: problem files in, JSON reports, CSV tables and PGM images out.

pub mod jobs;
pub mod problem;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::frames::{write_selection_csv, FrameReport, Strategy};
use crate::measure::{render_attractor, render_mu_hat, FourierEval};
pub use jobs::{execute, Certificate, Job, Outcome, Verdict};
pub use problem::ProblemFile;
pub use report::{verify, Check, ReportFile, REPLAY_TOL};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "SPECTRAL_FRACTAL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "spectral-fractal", version, about = "Spectra, zero sets and Fourier frames of self-affine measures")]
pub struct Cli {
    /// Log progress to stderr; repeat for more detail.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file (JSON with `R`, `B` and optionally `L`).
    pub problem: PathBuf,
    /// Tree depth (spectrum), tower depth (validate) or approximant depth (render).
    #[arg(long)]
    pub depth: Option<usize>,
    /// Shift window of the zero-set certificates.
    #[arg(long)]
    pub window: Option<i64>,
    /// Relative tolerance recorded for replaying numeric claims.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for subset selection and sampled checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Enumeration cap for spectrum levels.
    #[arg(long)]
    pub cap: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RenderWhat {
    Attractor,
    MuHat,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Hadamard condition and the towers.
    Validate(Common),
    /// Build a spectrum, reducing and splitting off product factors as needed.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Write the spectrum sample as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Scan and certify the periodic zero set.
    Zeroset(Common),
    /// Select almost-Parseval frame levels and bound the concatenation.
    Frames {
        #[command(flatten)]
        common: Common,
        /// Level of a single frame step.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated levels to concatenate; overrides `--n`.
        #[arg(long, value_delimiter = ',')]
        levels: Vec<usize>,
        #[arg(long, value_enum, default_value = "greedy")]
        strategy: StrategyArg,
        /// Write `n,strategy,ratio,wall_time` rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Find the quasi-product form behind a non-empty zero set.
    Quasiprod(Common),
    /// Reduce to the case `Z[R,B] = Z^d`.
    Reduce(Common),
    /// Render the attractor or `|mu_hat|` as a PGM image.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        what: RenderWhat,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// Half-width of the frequency box for `mu-hat`.
        #[arg(long, default_value_t = 8.0)]
        extent: f64,
    },
    /// Replay the certificates and numeric claims of a report.
    Verify { report: PathBuf },
}

/// Configures the global thread pool from `SPECTRAL_FRACTAL_THREADS`.
pub fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0) {
        // Fails only when a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load(common: &Common) -> Result<ProblemFile> {
    let mut p = ProblemFile::load(&common.problem)?;
    if let Some(d) = common.depth {
        p.config.depth = d;
    }
    if let Some(w) = common.window {
        p.config.zero.window = w;
    }
    if let Some(c) = common.cap {
        p.config.cover.cap = c;
    }
    if let Some(s) = common.seed {
        p.seed = s;
    }
    Ok(p)
}

fn emit(report: &ReportFile, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => {
            report.save(path)?;
            writeln!(stdout, "{}: {:?}, report written to {}", report.job.name(), report.verdict, path.display())?;
        }
        None => writeln!(stdout, "{}", report.to_json())?,
    }
    Ok(())
}

fn create_file(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Spectrum sample as CSV, one coordinate per column, 17 significant digits.
pub fn write_sample_csv<W: Write>(sample: &[Vec<String>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = sample.first().map_or(0, |p| p.len());
    w.write_record((0..d).map(|i| format!("x{i}"))).map_err(|e| Error::Io(e.to_string()))?;
    for p in sample {
        let parsed = crate::intlat::RatVec::parse(p).map_err(Error::InvalidInput)?;
        w.write_record(parsed.to_f64().iter().map(|v| format!("{v:.16e}"))).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn run_job(common: &Common, job: Job, stdout: &mut dyn Write) -> Result<ReportFile> {
    let problem = load(common)?;
    let report = ReportFile::create(job, problem, common.tol.unwrap_or(REPLAY_TOL))?;
    emit(&report, common.out.as_deref(), stdout)?;
    Ok(report)
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let report = match &cli.command {
        Command::Validate(c) => run_job(c, Job::Validate { tower_depth: c.depth.unwrap_or(4) }, stdout)?,
        Command::Spectrum { common, csv } => {
            let rep = run_job(common, Job::Spectrum, stdout)?;
            if let Some(path) = csv {
                let sample: Vec<Vec<String>> = serde_json::from_value(rep.results["sample"].clone()).map_err(|e| Error::Io(e.to_string()))?;
                write_sample_csv(&sample, create_file(path)?)?;
            }
            rep
        }
        Command::Zeroset(c) => run_job(c, Job::Zeroset, stdout)?,
        Command::Frames { common, n, levels, strategy, csv } => {
            let levels = if levels.is_empty() { vec![n.ok_or_else(|| Error::InvalidInput("give --n or --levels".into()))?] } else { levels.clone() };
            let strategy = match strategy {
                StrategyArg::Greedy => Strategy::Greedy,
                StrategyArg::Exhaustive => Strategy::Exhaustive,
            };
            let rep = run_job(common, Job::Frames { levels, strategy }, stdout)?;
            if let Some(path) = csv {
                let reports: Vec<FrameReport> = serde_json::from_value(rep.results["levels"].clone()).map_err(|e| Error::Io(e.to_string()))?;
                let rows: Vec<(FrameReport, f64)> = reports.into_iter().zip(rep.timings.level_seconds.iter().copied()).collect();
                write_selection_csv(&rows, create_file(path)?)?;
            }
            rep
        }
        Command::Quasiprod(c) => run_job(c, Job::Quasiprod, stdout)?,
        Command::Reduce(c) => run_job(c, Job::Reduce, stdout)?,
        Command::Render { common, what, resolution, extent } => {
            let out = common.out.as_deref().ok_or_else(|| Error::InvalidInput("render needs --out".into()))?;
            let pair = load(common)?.pair()?;
            let raster = match what {
                RenderWhat::Attractor => render_attractor(&pair, common.depth.unwrap_or(8), *resolution)?,
                RenderWhat::MuHat => {
                    let d = pair.dim();
                    render_mu_hat(&FourierEval::new(&pair), &vec![-extent; d], &vec![*extent; d], *resolution)?
                }
            };
            raster.save(out)?;
            writeln!(stdout, "render: {}x{} image written to {}", raster.width, raster.height, out.display())?;
            return Ok(0);
        }
        Command::Verify { report } => {
            let rep = ReportFile::load(report)?;
            let checks = verify(&rep);
            for c in &checks {
                writeln!(stdout, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            }
            return Ok(if checks.iter().all(|c| c.pass) { 0 } else { 3 });
        }
    };
    Ok(report.verdict.exit_code())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use trapsim::experiments::{self, Job, Preset};
use trapsim::output;
use trapsim::{integrate, parse_config, sweep, Config, Error, OutputFormat};

#[derive(Parser)]
#[command(
    name = "trapsim",
    version,
    about = "Four-level doublet population-trapping simulator"
)]
struct Cli {
    /// Output format; overrides the config's [output] format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress progress and summary lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a single scenario from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the built-in figure presets.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep from a config file with a [sweep] section.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 picks the number of cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in consistency checks.
    Validate,
}

struct Ctx {
    format: OutputFormat,
    quiet: bool,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_runtime_failure() {
        2
    } else {
        1
    }
}

fn sink(path: Option<&Path>) -> trapsim::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> trapsim::Result<Config> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

fn run_job(ctx: &Ctx, job: &Job, threads: usize, out: Option<&Path>) -> trapsim::Result<u8> {
    match job {
        Job::Run(s) => {
            let traj = integrate(s)?;
            match &traj.steady {
                Some(st) => ctx.note(format!(
                    "steady state at t = {:.2}: p1+p2 = {:.6}, purity = {:.6}, |rho21| = {:.6}, converged = {}",
                    st.time, st.doublet_population, st.doublet_purity, st.abs_rho21, st.converged
                )),
                None => ctx.note("run ended before a steady-state window after the pulses"),
            }
            ctx.note(format!(
                "{} steps ({} rejected), max trace error {:.1e}, min eigenvalue {:.1e}",
                traj.stats.steps,
                traj.stats.rejected_steps,
                traj.stats.max_trace_error,
                traj.stats.min_eigenvalue
            ));
            let w = sink(out)?;
            match ctx.format {
                OutputFormat::Csv => output::emit_trajectory_csv(&traj, w)?,
                OutputFormat::Json => output::emit_summary_json(&traj, w)?,
            }
            let converged = traj.steady.is_some_and(|st| st.converged);
            Ok(if converged { 0 } else { 2 })
        }
        Job::Sweep(spec) => {
            let table = sweep(spec, threads)?;
            let failed = table.rows.iter().filter(|r| !r.converged).count();
            for r in table.rows.iter().filter(|r| r.error.is_some()) {
                ctx.note(format!(
                    "point {:?}: {}",
                    r.values,
                    r.error.as_deref().unwrap_or("")
                ));
            }
            ctx.note(format!(
                "{} points, {} not converged",
                table.rows.len(),
                failed
            ));
            let w = sink(out)?;
            match ctx.format {
                OutputFormat::Csv => output::emit_sweep_csv(&table, w)?,
                OutputFormat::Json => output::emit_sweep_json(&table, w)?,
            }
            Ok(if failed == 0 { 0 } else { 2 })
        }
    }
}

fn execute(cli: Cli) -> trapsim::Result<u8> {
    let flag_format = cli.format.map(OutputFormat::from);
    let ctx = |cfg_format: Option<OutputFormat>| Ctx {
        format: flag_format.or(cfg_format).unwrap_or(OutputFormat::Csv),
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load(&config)?;
            if matches!(cfg.job, Job::Sweep(_)) {
                return Err(Error::Validation {
                    key: "sweep".into(),
                    message: "config has a [sweep] section; use the sweep command".into(),
                });
            }
            let out = out.or(cfg.output.path.clone());
            run_job(&ctx(cfg.output.format), &cfg.job, 1, out.as_deref())
        }
        Command::Preset { name, out } => {
            let p: Preset = name.parse()?;
            let c = ctx(None);
            c.note(format!("preset {p}"));
            run_job(&c, &experiments::preset(p), 0, out.as_deref())
        }
        Command::Sweep {
            config,
            threads,
            out,
        } => {
            let cfg = load(&config)?;
            if matches!(cfg.job, Job::Run(_)) {
                return Err(Error::Validation {
                    key: "sweep".into(),
                    message: "config has no [sweep] section".into(),
                });
            }
            let out = out.or(cfg.output.path.clone());
            run_job(&ctx(cfg.output.format), &cfg.job, threads, out.as_deref())
        }
        Command::Validate => {
            let checks = trapsim::selfcheck::run_self_checks();
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                if !c.passed {
                    failed += 1;
                }
                println!("[{tag}] {}: {}", c.name, c.detail);
            }
            Ok(if failed == 0 { 0 } else { 2 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

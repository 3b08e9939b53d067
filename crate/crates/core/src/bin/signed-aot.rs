use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use signed_aot::cli::{self, OutputFormat, Payload, RunReport};
use signed_aot::experiment::{ProtocolConfig, DEFAULT_DELTA};
use signed_aot::io::Scale;
use signed_aot::positivity::{TauOptions, DEFAULT_CERTIFY_SAMPLES, DEFAULT_GRID_POINTS, DEFAULT_WIDTH};
use signed_aot::ToleranceConfig;

#[derive(Parser)]
#[command(name = "signed-aot", version, about = "Arrow-of-time detection for signed-Laplacian dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a generator for symmetry, zero row sums, corank one and NSD.
    Validate(MatrixArgs),
    /// Extremal entries of forward and backward propagators.
    Table1 {
        #[command(flatten)]
        matrix: MatrixArgs,
        /// Times to evaluate (repeatable).
        #[arg(long = "t")]
        t: Vec<f64>,
    },
    /// Estimate the detection time tau.
    Tau {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        tau: TauArgs,
    },
    /// Run the preparation / measurement / fit protocol at one time.
    Aot {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[arg(long = "t")]
        t: f64,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tau: TauArgs,
    },
    /// Renyi-2 entropy and its derivative along a trajectory.
    EntropyTrace {
        #[command(flatten)]
        matrix: MatrixArgs,
        /// Initial distribution, comma separated; must sum to 1.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p0: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
    /// Reproduce both worked examples and print a pass/fail summary.
    Repro(OutputArgs),
}

#[derive(Args)]
struct MatrixArgs {
    /// Matrix file (JSON or CSV).
    #[arg(long)]
    matrix: PathBuf,
    /// Factor applied to every entry on load, e.g. 1/3.
    #[arg(long)]
    scale: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the report here instead of printing a summary and the report.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args)]
struct TolArgs {
    #[arg(long)]
    tol_sym: Option<f64>,
    #[arg(long)]
    tol_rowsum: Option<f64>,
    #[arg(long)]
    tol_eig: Option<f64>,
    #[arg(long)]
    tol_pos: Option<f64>,
    #[arg(long)]
    tol_fit: Option<f64>,
}

#[derive(Args)]
struct TauArgs {
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    width: f64,
    #[arg(long)]
    horizon: Option<f64>,
}

impl TolArgs {
    fn config(&self) -> ToleranceConfig {
        let d = ToleranceConfig::default();
        ToleranceConfig {
            eps_sym: self.tol_sym.unwrap_or(d.eps_sym),
            eps_rowsum: self.tol_rowsum.unwrap_or(d.eps_rowsum),
            eps_eig: self.tol_eig.unwrap_or(d.eps_eig),
            eps_pos: self.tol_pos.unwrap_or(d.eps_pos),
            eps_fit: self.tol_fit.unwrap_or(d.eps_fit),
        }
    }
}

impl TauArgs {
    fn options(&self) -> TauOptions {
        TauOptions {
            grid_points: self.grid,
            width: self.width,
            horizon: self.horizon,
            certify_samples: DEFAULT_CERTIFY_SAMPLES,
        }
    }
}

fn run(cli: Cli) -> signed_aot::Result<bool> {
    let (report, output) = match &cli.command {
        Command::Validate(m) => {
            let tol = m.output.tol.config();
            tol.validate()?;
            (cli::cmd_validate(&m.matrix, parse_scale(m)?, &tol)?, &m.output)
        }
        Command::Table1 { matrix, t } => {
            let tol = matrix.output.tol.config();
            tol.validate()?;
            (cli::cmd_table1(&matrix.matrix, parse_scale(matrix)?, t, &tol)?, &matrix.output)
        }
        Command::Tau { matrix, tau } => {
            let tol = matrix.output.tol.config();
            tol.validate()?;
            (cli::cmd_tau(&matrix.matrix, parse_scale(matrix)?, &tau.options(), &tol)?, &matrix.output)
        }
        Command::Aot { matrix, t, delta, noise, seed, tau } => {
            let tol = matrix.output.tol.config();
            tol.validate()?;
            let config = ProtocolConfig {
                delta: *delta,
                noise_sigma: *noise,
                seed: *seed,
                tol,
                tau: tau.options(),
            };
            (cli::cmd_aot(&matrix.matrix, parse_scale(matrix)?, *t, &config)?, &matrix.output)
        }
        Command::EntropyTrace { matrix, p0, t_max, steps } => {
            let tol = matrix.output.tol.config();
            tol.validate()?;
            let report = cli::cmd_entropy_trace(&matrix.matrix, parse_scale(matrix)?, p0, *t_max, *steps, &tol)?;
            (report, &matrix.output)
        }
        Command::Repro(output) => {
            let tol = output.tol.config();
            tol.validate()?;
            (cli::cmd_repro(&tol)?, output)
        }
    };
    emit(&report, output)?;
    Ok(match &report.results {
        Payload::Repro(summary) => summary.all_passed,
        _ => true,
    })
}

fn parse_scale(m: &MatrixArgs) -> signed_aot::Result<Option<Scale>> {
    m.scale.as_deref().map(str::parse).transpose()
}

fn emit(report: &RunReport, output: &OutputArgs) -> signed_aot::Result<()> {
    let format: OutputFormat = output.format.parse()?;
    let text = cli::render(report, format)?;
    eprint!("{}", cli::summary(report));
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! `vlcswarm`: generate scenarios, run them, aggregate metrics and audit traces.
//!
//! Exit codes: 0 success, 1 invalid flags or input, 2 runtime failure,
//! 3 audit found violations.

mod commands;
mod fsutil;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vlcswarm::{DetectableBand, Error, ScenarioParams};

#[derive(Debug, Parser)]
#[command(name = "vlcswarm", version, about = "Camera-visible multi-drone positioning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a random scenario and write it as JSON.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Simulate a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Per-tick JSON lines.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        metrics: PathBuf,
    },
    /// Generate and simulate one scenario per seed.
    Batch {
        /// Inclusive range `A-B` or comma-separated list, e.g. `1-10` or `3,5,8`.
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Histogram of extra distance or wait time over metrics files.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        metrics: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        bin_width: f64,
        #[arg(long, value_enum, default_value_t = ReportKind::Distance)]
        kind: ReportKind,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit a trace against its scenario; prints a JSON report.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportKind {
    Distance,
    Wait,
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 8)]
    drones: usize,
    #[arg(long = "d-r", default_value_t = 0.12, allow_negative_numbers = true)]
    d_r: f64,
    /// Side of the square area, meters.
    #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
    area: f64,
    /// Camera distance to the near edge of the area.
    #[arg(long, default_value_t = vlcswarm::simulator::scenario::DEFAULT_DEPTH_OFFSET, allow_negative_numbers = true)]
    depth_offset: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    height_min: f64,
    #[arg(long, default_value_t = 7.0, allow_negative_numbers = true)]
    height_max: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    speed: f64,
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    dt: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    timeout: f64,
    #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
    margin: f64,
    #[arg(long, default_value_t = 120.0, allow_negative_numbers = true)]
    max_time: f64,
    /// Keep drones inside the camera's detectable band.
    #[arg(long)]
    enforce_band: bool,
    /// Band centre overriding the lens-derived one (needs --band-half-width).
    #[arg(long, requires = "band_half_width", allow_negative_numbers = true)]
    band_center: Option<f64>,
    #[arg(long, requires = "band_center", allow_negative_numbers = true)]
    band_half_width: Option<f64>,
}

impl ParamArgs {
    fn to_params(&self) -> ScenarioParams {
        ScenarioParams {
            n_drones: self.drones,
            d_r: self.d_r,
            speed: self.speed,
            area_size: self.area,
            depth_offset: self.depth_offset,
            height_min: self.height_min,
            height_max: self.height_max,
            dt: self.dt,
            timeout: self.timeout,
            margin: self.margin,
            max_time: self.max_time,
            enforce_band: self.enforce_band,
            band: self
                .band_center
                .zip(self.band_half_width)
                .map(|(center, half_width)| DetectableBand { center, half_width }),
            ..ScenarioParams::default()
        }
    }
}

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Runtime(String),
    Violations(usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Violations(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::InvalidScenario(_)
            | Error::Parse { .. }
            | Error::Json(_)
            | Error::Csv(_) => Failure::Invalid(e.to_string()),
            Error::DegenerateGeometry(_) | Error::Infeasible { .. } | Error::SafetyViolation { .. } | Error::Io(_) => {
                Failure::Runtime(e.to_string())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Generate { seed, out, params } => commands::generate(seed, &params.to_params(), &out),
        Command::Run { scenario, trace, metrics } => commands::run(&scenario, &trace, &metrics),
        Command::Batch { seeds, jobs, out_dir, params } => commands::batch(&seeds, jobs, &out_dir, &params.to_params()),
        Command::Report { metrics, bin_width, kind, out } => {
            let kind = match kind {
                ReportKind::Distance => vlcswarm::HistogramKind::ExtraDistance,
                ReportKind::Wait => vlcswarm::HistogramKind::WaitTime,
            };
            commands::report(&metrics, bin_width, kind, out.as_deref())
        }
        Command::Check { trace, scenario } => commands::check(&trace, &scenario),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Invalid(m) | Failure::Runtime(m) => eprintln!("error: {m}"),
                Failure::Violations(n) => eprintln!("error: audit found {n} violation(s)"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}

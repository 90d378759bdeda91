//! `sagnac`: render modes, sort them, and run the biphoton pipelines.

mod commands;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sagnac_core::render::ImageFormat;

use source::parse_angle;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Model(String),
}

impl From<sagnac_core::Error> for Failure {
    fn from(e: sagnac_core::Error) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Model(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "sagnac", version, about = "Out-of-plane Sagnac mode sorting")]
struct Cli {
    /// Samples per side of the square grid.
    #[arg(long, global = true, default_value_t = 256)]
    grid_size: usize,
    /// Grid half-width in units of w0.
    #[arg(long, global = true, default_value_t = 8.0)]
    half_width: f64,
    /// Beam waist radius in meters.
    #[arg(long, global = true, default_value_t = 1.0e-3)]
    w0: f64,
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, default_value = "pgm", value_parser = parse_format)]
    format: ImageFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the intensity (and optionally phase) of a mode.
    Mode {
        /// hg:n,m | lg:p,l | hg45 | fiber-demo | expansion file
        spec: String,
        #[arg(long)]
        phase: bool,
    },
    /// Send a mode through one Sagnac stage and report the port powers.
    Sort {
        spec: String,
        #[command(flatten)]
        stage: StageArgs,
    },
    /// Interfere a sorter output with a tilted reference beam.
    Interfere(InterfereArgs),
    /// Tabulate the image rotation and relative rotation against theta.
    SweepTheta {
        #[arg(long, default_value_t = 181)]
        samples: usize,
    },
    /// Route LG modes or expansions through a cascade and tabulate leaf powers.
    Cascade(CascadeArgs),
    /// Run a named biphoton pipeline or a pipeline script.
    Pipeline {
        /// bell | herald | herald-lg | script file
        pipeline: String,
    },
}

#[derive(Args)]
struct StageArgs {
    #[arg(long, default_value = "pi/4", value_parser = parse_angle, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
}

#[derive(Args)]
struct InterfereArgs {
    spec: String,
    /// Reference mode; defaults to the input itself.
    #[arg(long)]
    reference: Option<String>,
    #[command(flatten)]
    stage: StageArgs,
    /// Output port to interfere; defaults to the brighter one.
    #[arg(long, value_parser = ["A", "B"])]
    port: Option<String>,
    /// Interfere the input directly instead of a sorter output.
    #[arg(long)]
    no_sort: bool,
    /// Fringes across the grid width.
    #[arg(long, default_value_t = sagnac_core::render::InterferenceSpec::STANDARD_TILT)]
    tilt: f64,
    /// Reference phase.
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    ref_phase: f64,
    /// Reference displacement `dx,dy` in units of w0; presets supply their own.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<String>,
    /// Mirror the reference about the y axis (on for the hg45 preset).
    #[arg(long, value_parser = ["auto", "on", "off"], default_value = "auto")]
    mirror: String,
    /// Count fringe maxima on the cuts y = +/-1.5 w0.
    #[arg(long)]
    analyze_fork: bool,
}

#[derive(Args)]
struct CascadeArgs {
    #[arg(long, default_value_t = 2)]
    depth: u32,
    /// OAM values, as `a..b` or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    l: Option<String>,
    /// Mode specs routed as expansions (repeatable).
    #[arg(long)]
    input: Vec<String>,
    /// Network description file used instead of the standard tree.
    #[arg(long)]
    network: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<ImageFormat, String> {
    s.parse().map_err(|e: sagnac_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("sagnac: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("sagnac: {}", msg.replace('\n', " "));
            ExitCode::from(2)
        }
        Err(Failure::Model(msg)) => {
            eprintln!("sagnac: {}", msg.replace('\n', " "));
            ExitCode::from(3)
        }
    }
}

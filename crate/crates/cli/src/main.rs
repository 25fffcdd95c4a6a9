//! `orbitlab`: classify monodromy matrices and orbits, continue families,
//! and draw the stability diagram.

mod classify;
mod family;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use orbitlab::catalogue::{to_json_exact, SCHEMA_VERSION};
use orbitlab::cr3bp::{builtin_presets, Involution, Presets, SystemConfig};
use orbitlab::families::DEFAULT_KMAX;
use orbitlab::plot::{parse_plot_input, to_csv, to_svg};
use serde::Serialize;

/// Environment variable naming a presets file that replaces the bundled one.
pub const PRESETS_ENV: &str = "ORBITLAB_PRESETS";

#[derive(Parser)]
#[command(name = "orbitlab", version, about = "Stability of symmetric periodic orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a monodromy matrix or a periodic orbit.
    Classify(ClassifyArgs),
    /// Continue an orbit through a schedule of Jacobi constants.
    Family(FamilyArgs),
    /// Draw the (tr A, det A) diagram of a family path or catalogue.
    Plot(PlotArgs),
}

#[derive(Args)]
pub struct SystemArgs {
    /// Preset name or `mu=<value>`; defaults to the system named in the orbit file.
    #[arg(long)]
    pub system: Option<String>,
    /// Reflection used to correct the orbit and adapt the frame.
    #[arg(long, default_value = "rho_tilde")]
    pub involution: Involution,
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// JSON file holding a matrix (`{"matrix": [[..]]}` or a bare array) or an orbit.
    pub input: PathBuf,
    /// Symplecticity tolerance for matrices, corrector tolerance for orbits.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Treat a 4x4 matrix as carrying the trivial pair and deflate it.
    #[arg(long)]
    pub unreduced: bool,
    #[command(flatten)]
    pub system: SystemArgs,
}

#[derive(Args)]
pub struct FamilyArgs {
    /// Seed orbit file.
    pub seed: PathBuf,
    /// Comma-separated, monotone list of Jacobi constants.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub jacobi: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    pub kmax: u32,
    /// Corrector tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Smallest Jacobi step tried before continuation gives up.
    #[arg(long)]
    pub min_step: Option<f64>,
    /// Narrow each event bracket to this width by re-correcting orbits.
    #[arg(long)]
    pub refine: Option<f64>,
    /// Catalogue timestamp; defaults to SOURCE_DATE_EPOCH, then the current time.
    #[arg(long)]
    pub timestamp: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub system: SystemArgs,
}

#[derive(Args)]
struct PlotArgs {
    /// Family path or catalogue (JSON lines).
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_KMAX)]
    kmax: u32,
    #[arg(long)]
    out: PathBuf,
}

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Usage,
    Validation,
    Io,
    Numerical,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Failure {
            kind,
            message: message.into(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind {
            Kind::Numerical => 3,
            _ => 2,
        }
    }
}

impl From<orbitlab::Error> for Failure {
    fn from(e: orbitlab::Error) -> Self {
        let kind = match e {
            _ if e.is_numerical() => Kind::Numerical,
            orbitlab::Error::Io(_) => Kind::Io,
            orbitlab::Error::EmptyInput => Kind::Usage,
            _ => Kind::Validation,
        };
        Failure::new(kind, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| Failure::new(Kind::Io, format!("{}: {e}", path.display())))
}

pub fn presets() -> CliResult<Presets> {
    match std::env::var_os(PRESETS_ENV) {
        Some(p) => Ok(Presets::load(Path::new(&p))?),
        None => Ok(builtin_presets()),
    }
}

/// The `--system` flag wins over the system recorded in the input.
pub fn resolve_system(flag: Option<&str>, recorded: Option<&str>) -> CliResult<SystemConfig> {
    let spec = flag.or(recorded).ok_or_else(|| {
        Failure::new(
            Kind::Validation,
            "no system given: pass --system or record one in the input",
        )
    })?;
    Ok(presets()?.resolve(spec)?)
}

/// Exact JSON followed by a newline.
pub fn json_line<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = to_json_exact(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct PlotSummary {
    schema_version: u32,
    samples: usize,
    svg: PathBuf,
    csv: PathBuf,
}

fn plot(args: &PlotArgs) -> CliResult<String> {
    let samples = parse_plot_input(&read_text(&args.input)?)?;
    let svg = to_svg(&samples, args.kmax)?;
    let csv = to_csv(&samples)?;
    create_dir(&args.out)?;
    let svg_path = args.out.join("diagram.svg");
    let csv_path = args.out.join("diagram.csv");
    write_text(&svg_path, &svg)?;
    write_text(&csv_path, &csv)?;
    json_line(&PlotSummary {
        schema_version: SCHEMA_VERSION,
        samples: samples.len(),
        svg: svg_path,
        csv: csv_path,
    })
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: Kind,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema_version: u32,
    error: ErrorBody<'a>,
}

fn report(f: &Failure) -> ExitCode {
    let body = ErrorReport {
        schema_version: SCHEMA_VERSION,
        error: ErrorBody {
            kind: f.kind,
            message: &f.message,
        },
    };
    match serde_json::to_string(&body) {
        Ok(s) => eprintln!("{s}"),
        Err(_) => eprintln!("{}", f.message),
    }
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            return report(&Failure::new(Kind::Usage, e.to_string().trim_end()));
        }
        Err(e) => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let out = match &cli.command {
        Command::Classify(a) => classify::run(a),
        Command::Family(a) => family::run(a),
        Command::Plot(a) => plot(a),
    };
    match out {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => report(&f),
    }
}

//! Command-line front end: density and volume evaluation, triangular
//! reduction, Gram-matrix lifting, direction-angle conversions,
//! invariant integration, and a cross-method verification table.
//!
//! Conventions shared by every subcommand:
//! - data goes to standard output (or `--output`), structured errors go
//!   to standard error as one `{"code", "message", "context"}` JSON
//!   line, and the two are never interleaved;
//! - exit status 0 on success, 1 on a validation or usage error, 2 on a
//!   numerical failure (a matrix outside the image, a failed
//!   verification, ...);
//! - identical invocations with identical input and seed produce
//!   byte-identical output, except for the explicitly nondeterministic
//!   `elapsed_ms` field;
//! - every float is printed with 17 significant digits and parses back
//!   to the identical value.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let failure = AppError::Usage(e.to_string());
            failure.emit("argument parsing");
            return ExitCode::from(failure.exit_code());
        }
    };
    let (name, result) = match cli.command {
        Command::Density(a) => ("density", commands::density(a)),
        Command::Volumes(a) => ("volumes", commands::volumes(a)),
        Command::Reduce(a) => ("reduce", commands::reduce(a)),
        Command::Lift(a) => ("lift", commands::lift(a)),
        Command::Euler(a) => ("euler", commands::euler(a)),
        Command::Integrate(a) => ("integrate", commands::integrate(a)),
        Command::Verify(a) => ("verify", commands::verify(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            failure.emit(name);
            ExitCode::from(failure.exit_code())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "orbint",
    version,
    about = "Integrate rotation-invariant functions of vector configurations \
             by reducing them to their matrix of inner products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the orbit-space density at a Gram matrix.
    Density(DensityArgs),
    /// Print sphere, rotation-group, and orthonormal-frame volumes.
    Volumes(VolumesArgs),
    /// Rotate a vector configuration to lower-triangular coordinates.
    Reduce(ReduceArgs),
    /// Factor a Gram matrix back into vectors in the requested dimension.
    Lift(LiftArgs),
    /// Convert between direction angles, unit vectors, and rotations.
    Euler(EulerArgs),
    /// Integrate a registered invariant integrand by one route or all.
    Integrate(IntegrateArgs),
    /// Cross-validate all integration routes over the built-in registry.
    Verify(VerifyArgs),
}

/// Input/output redirection shared by the stream-processing subcommands.
#[derive(Args)]
struct IoArgs {
    /// Input file; standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    /// Number of vectors; cross-checked against the input matrix size.
    #[arg(long)]
    k: Option<usize>,
    /// Ambient dimension the vectors live in.
    #[arg(long)]
    m: usize,
    /// Positive-semidefiniteness tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct VolumesArgs {
    /// Ambient dimension.
    #[arg(long)]
    m: usize,
    /// Also print the volume of the space of orthonormal k-frames.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Expected number of vectors; cross-checked against the input.
    #[arg(long)]
    k: Option<usize>,
    /// Expected ambient dimension; cross-checked against the input.
    #[arg(long)]
    m: Option<usize>,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct LiftArgs {
    /// Expected matrix size; cross-checked against the input.
    #[arg(long)]
    k: Option<usize>,
    /// Ambient dimension to lift into.
    #[arg(long)]
    m: usize,
    /// Positive-semidefiniteness tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct EulerArgs {
    /// Expected dimension; cross-checked against the input.
    #[arg(long)]
    m: Option<usize>,
    /// What the input JSON encodes.
    #[arg(long, value_enum)]
    from: EulerKind,
    /// What to emit.
    #[arg(long, value_enum)]
    to: EulerKind,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Number of vectors.
    #[arg(long)]
    k: usize,
    /// Ambient dimension.
    #[arg(long)]
    m: usize,
    /// Registered integrand name (see the repository documentation).
    #[arg(long)]
    integrand: String,
    /// Integration route, or `all` for the full cross-method report.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Monte Carlo sample budget.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Random seed; every estimate is a pure function of it.
    #[arg(long, env = "ORBINT_SEED", default_value_t = 0)]
    seed: u64,
    /// Samples per independent chunk (part of the reproducibility
    /// contract; results depend on it but never on thread count).
    #[arg(long, default_value_t = 65_536)]
    chunk: usize,
    /// Nodes per dimension for deterministic quadrature.
    #[arg(long, default_value_t = 12)]
    nodes: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Monte Carlo sample budget per estimate; agreement thresholds
    /// scale automatically with the statistical error.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Base random seed for the whole table.
    #[arg(long, env = "ORBINT_SEED", default_value_t = 0)]
    seed: u64,
    /// Samples per independent chunk.
    #[arg(long, default_value_t = 65_536)]
    chunk: usize,
    /// Nodes per dimension for deterministic quadrature.
    #[arg(long, default_value_t = 12)]
    nodes: usize,
    /// Negative control: corrupt the orbit-route change of variables
    /// (2^k becomes 2^-k); consistency rows must then fail.
    #[arg(long)]
    inject_fault: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EulerKind {
    /// `{"m": .., "theta": [..]}` in radians.
    Angles,
    /// A bare JSON array of coordinates.
    Vector,
    /// A square matrix as nested JSON arrays of rows.
    Matrix,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Monte Carlo in the raw configuration coordinates.
    Ambient,
    /// Triangular fundamental-domain route (quadrature when it applies).
    DomainW,
    /// Density-weighted route through the matrix of inner products.
    OrbitU,
    /// Every applicable route plus pairwise consistency checks.
    All,
}

/// Failures on the way to producing output. `Usage` and `Io` are
/// request-shape problems (exit 1); library errors split into validation
/// (exit 1) and numerical (exit 2) classes; a verification run whose
/// rows fail exits 2 after printing the table.
enum AppError {
    Usage(String),
    Io(String),
    Lib(orbint::Error),
    VerifyFailed { failing_rows: usize },
}

impl From<orbint::Error> for AppError {
    fn from(e: orbint::Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) | AppError::Io(_) => 1,
            AppError::Lib(e) => lib_exit_code(e),
            AppError::VerifyFailed { .. } => 2,
        }
    }

    /// Prints the structured error line to standard error.
    fn emit(&self, subcommand: &str) {
        let (code, message, mut context) = match self {
            AppError::Usage(message) => ("usage", message.clone(), serde_json::Map::new()),
            AppError::Io(message) => ("io", message.clone(), serde_json::Map::new()),
            AppError::Lib(e) => {
                let mut context = serde_json::Map::new();
                context.insert(
                    "class".into(),
                    match lib_exit_code(e) {
                        1 => "validation".into(),
                        _ => "numerical".into(),
                    },
                );
                (lib_error_code(e), e.to_string(), context)
            }
            AppError::VerifyFailed { failing_rows } => {
                let mut context = serde_json::Map::new();
                context.insert("failing_rows".into(), (*failing_rows).into());
                (
                    "verification-failed",
                    format!("{failing_rows} verification rows failed"),
                    context,
                )
            }
        };
        context.insert("subcommand".into(), subcommand.into());
        let line = output::to_json_line(&serde_json::json!({
            "code": code,
            "message": message,
            "context": context,
        }));
        eprint!("{line}");
    }
}

fn lib_exit_code(e: &orbint::Error) -> u8 {
    use orbint::Error::*;
    match e {
        InvalidInput(_)
        | DimensionMismatch { .. }
        | NotCoregular { .. }
        | IndexOutOfRange { .. }
        | QuadratureUnavailable { .. } => 1,
        NotPositiveSemidefinite { .. }
        | NotInImage { .. }
        | ZeroVector
        | NotSpecialOrthogonal { .. }
        | DegenerateAngles { .. }
        | NotAngleGenerated { .. }
        | BoundaryPoint { .. }
        | GammaDomain { .. }
        | InconsistentIntegrand { .. } => 2,
    }
}

fn lib_error_code(e: &orbint::Error) -> &'static str {
    use orbint::Error::*;
    match e {
        InvalidInput(_) => "invalid-input",
        DimensionMismatch { .. } => "dimension-mismatch",
        NotCoregular { .. } => "not-coregular",
        IndexOutOfRange { .. } => "index-out-of-range",
        QuadratureUnavailable { .. } => "quadrature-unavailable",
        NotPositiveSemidefinite { .. } => "not-positive-semidefinite",
        NotInImage { .. } => "not-in-image",
        ZeroVector => "zero-vector",
        NotSpecialOrthogonal { .. } => "not-special-orthogonal",
        DegenerateAngles { .. } => "degenerate-angles",
        NotAngleGenerated { .. } => "not-angle-generated",
        BoundaryPoint { .. } => "boundary-point",
        GammaDomain { .. } => "gamma-domain",
        InconsistentIntegrand { .. } => "inconsistent-integrand",
    }
}

//! Command-line front end for the joint-decoding analysis library.
//!
//! Seven subcommands cover the threshold/curve/region analyses; every run
//! prints one structured summary line and optionally writes CSV files with a
//! trailing metadata comment. Options may also come from a `key=value`
//! config file (`--config`); explicit flags win over file entries.
//!
//! Exit statuses: 0 success, 1 usage/parse errors, 2 staircase-audit
//! violations, 3 analysis failures (no threshold in bracket, continuation
//! targets lost) with any partial output retained.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod emit;
mod runs;

/// A command failure carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, unparsable specs, malformed config files: status 1.
    Usage(String),
    /// Region staircase-audit violations: status 2.
    Audit(String),
    /// The analysis itself failed (empty bracket, lost continuation
    /// targets): status 3.
    Analysis(String),
}

impl From<coupled_de_core::Error> for Failure {
    fn from(e: coupled_de_core::Error) -> Self {
        use coupled_de_core::Error::*;
        match e {
            NoThresholdInRange | CurveTruncated | EntropyOutOfRange => {
                Failure::Analysis(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("io error: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "coupled-de", version, about = "Density-evolution analysis for joint decoding of correlated sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bisect the symmetric-channel BP threshold of an ensemble.
    Threshold(ThresholdArgs),
    /// Closed-form EBP EXIT curve over the erasure channel.
    ExitCurve(ExitCurveArgs),
    /// EBP GEXIT curve over the BAWGN channel by entropy continuation.
    GexitCurve(GexitCurveArgs),
    /// Sweep the achievable channel-parameter region.
    Acpr(AcprArgs),
    /// The Slepian-Wolf outer bound on the same lattice.
    SwRegion(SwRegionArgs),
    /// Bisect the symmetric-gain threshold of the two-user MAC.
    MacThreshold(MacThresholdArgs),
    /// Sweep the achievable gain region of the two-user MAC.
    MacAcpr(MacAcprArgs),
}

#[derive(Args)]
pub struct ThresholdArgs {
    /// Ensemble spec: `l,r` (uncoupled) or `l,r,L,w` (coupled).
    #[arg(long)]
    ensemble: Option<String>,
    /// Upgrade an `l,r` ensemble to a coupled chain: `L,w`.
    #[arg(long)]
    coupled: Option<String>,
    /// Acknowledge the punctured construction (required).
    #[arg(long)]
    punctured: bool,
    /// Correlation model, e.g. `erasure:0.5` or `bsc:0.1`.
    #[arg(long)]
    source: Option<String>,
    /// Channel family: bec, bsc, or bawgnc.
    #[arg(long)]
    channel: Option<String>,
    /// Bisection stopping width.
    #[arg(long)]
    tol: Option<f64>,
    /// Bisection bracket `lo:hi`.
    #[arg(long)]
    bracket: Option<String>,
    /// Quantization grid half-width.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Quantization bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Density-evolution iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the converged center density to this CSV.
    #[arg(long)]
    dump_density: Option<String>,
    /// Write the coupled chain's error-probability profile to this CSV.
    #[arg(long)]
    dump_profile: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct ExitCurveArgs {
    /// Uncoupled ensemble spec `l,r`.
    #[arg(long)]
    ensemble: Option<String>,
    /// Acknowledge the punctured construction (required).
    #[arg(long)]
    punctured: bool,
    /// Correlation model, e.g. `erasure:0.5`.
    #[arg(long)]
    source: Option<String>,
    /// Channel family (must be bec).
    #[arg(long)]
    channel: Option<String>,
    /// Number of curve samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct GexitCurveArgs {
    /// Ensemble spec: `l,r` or `l,r,L,w`.
    #[arg(long)]
    ensemble: Option<String>,
    /// Upgrade an `l,r` ensemble to a coupled chain: `L,w`.
    #[arg(long)]
    coupled: Option<String>,
    /// Acknowledge the punctured construction (required).
    #[arg(long)]
    punctured: bool,
    /// Correlation model, e.g. `bsc:0.1`.
    #[arg(long)]
    source: Option<String>,
    /// Channel family (must be bawgnc).
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated entropy targets (default: built-in ladder).
    #[arg(long)]
    targets: Option<String>,
    /// Quantization grid half-width.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Quantization bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Continuation outer-iteration budget per target.
    #[arg(long)]
    max_outer: Option<usize>,
    /// Lower edge of the channel-entropy bracket.
    #[arg(long)]
    h_min: Option<f64>,
    /// Upper edge of the channel-entropy bracket.
    #[arg(long)]
    h_max: Option<f64>,
    /// Carry each converged density into the next target.
    #[arg(long)]
    warm_start: bool,
    /// Output CSV path.
    #[arg(long)]
    out: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct AcprArgs {
    /// Ensemble spec: `l,r` or `l,r,L,w`.
    #[arg(long)]
    ensemble: Option<String>,
    /// Upgrade an `l,r` ensemble to a coupled chain: `L,w`.
    #[arg(long)]
    coupled: Option<String>,
    /// Acknowledge the punctured construction (required).
    #[arg(long)]
    punctured: bool,
    /// Correlation model, e.g. `erasure:0.5`.
    #[arg(long)]
    source: Option<String>,
    /// Channel family: bec, bsc, or bawgnc.
    #[arg(long)]
    channel: Option<String>,
    /// Lattice step in channel parameter (BEC) or entropy (BMS).
    #[arg(long)]
    delta: Option<f64>,
    /// Row strategy: bisect (default) or scan.
    #[arg(long)]
    strategy: Option<String>,
    /// Worker threads for row fan-out.
    #[arg(long)]
    jobs: Option<usize>,
    /// Quantization grid half-width.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Quantization bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Density-evolution iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Output CSV path for the region lattice.
    #[arg(long)]
    out: Option<String>,
    /// Optional CSV path for the boundary staircase.
    #[arg(long)]
    boundary_out: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct SwRegionArgs {
    /// Correlation model, e.g. `erasure:0.5`.
    #[arg(long)]
    source: Option<String>,
    /// Channel family: bec, bsc, or bawgnc.
    #[arg(long)]
    channel: Option<String>,
    /// Code rate after puncturing.
    #[arg(long)]
    rate: Option<f64>,
    /// Lattice step.
    #[arg(long)]
    delta: Option<f64>,
    /// Output CSV path for the region lattice.
    #[arg(long)]
    out: Option<String>,
    /// Optional CSV path for the boundary vertices.
    #[arg(long)]
    boundary_out: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct MacThresholdArgs {
    /// Ensemble spec: `l,r` or `l,r,L,w`.
    #[arg(long)]
    ensemble: Option<String>,
    /// Upgrade an `l,r` ensemble to a coupled chain: `L,w`.
    #[arg(long)]
    coupled: Option<String>,
    /// Monte-Carlo samples per density-evolution step.
    #[arg(long)]
    mc: Option<usize>,
    /// Base RNG seed (votes offset it).
    #[arg(long)]
    seed: Option<u64>,
    /// Bisection stopping width.
    #[arg(long)]
    tol: Option<f64>,
    /// Bisection bracket `lo:hi` in channel gain.
    #[arg(long)]
    bracket: Option<String>,
    /// Quantization grid half-width.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Quantization bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Iterations of patience for the trend stall detector.
    #[arg(long)]
    trend_window: Option<usize>,
    /// Density-evolution iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args)]
pub struct MacAcprArgs {
    /// Ensemble spec: `l,r` or `l,r,L,w`.
    #[arg(long)]
    ensemble: Option<String>,
    /// Upgrade an `l,r` ensemble to a coupled chain: `L,w`.
    #[arg(long)]
    coupled: Option<String>,
    /// Gain lattice `lo:hi:step` shared by both axes.
    #[arg(long)]
    grid: Option<String>,
    /// Monte-Carlo samples per density-evolution step.
    #[arg(long)]
    mc: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Iterations of patience for the trend stall detector.
    #[arg(long)]
    trend_window: Option<usize>,
    /// Density-evolution iteration cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Worker threads for row fan-out.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV path for the region lattice.
    #[arg(long)]
    out: Option<String>,
    /// Optional CSV path for the boundary staircase.
    #[arg(long)]
    boundary_out: Option<String>,
    /// Read defaults from a `key=value` file.
    #[arg(long)]
    config: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print on stdout and succeed; real
            // parse errors report on stderr with the usage status.
            let failed = e.use_stderr();
            let _ = e.print();
            return if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Threshold(args) => runs::threshold(args),
        Command::ExitCurve(args) => runs::exit_curve(args),
        Command::GexitCurve(args) => runs::gexit_curve(args),
        Command::Acpr(args) => runs::acpr(args),
        Command::SwRegion(args) => runs::sw_region_cmd(args),
        Command::MacThreshold(args) => runs::mac_threshold(args),
        Command::MacAcpr(args) => runs::mac_acpr(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Audit(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

//! `cylab`: command-line experiments over `cylfock`.
//!
//! Each subcommand reads a JSON config (`--config`) overlaid by inline
//! flags mirroring its keys, and writes `report.json`, `table.csv` and
//! `plot_*.dat` into `--out`. Timing goes to `timing.json` (and
//! `timing.csv` for sweeps) so the data files are byte-identical across
//! runs and thread counts.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 partial
//! (a sweep with failed rows).

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use config::{flag_value, load_file, split_common, typed, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum LabError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Numeric(m) => write!(f, "numerical failure: {m}"),
            LabError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io(_) => EXIT_CONFIG,
            LabError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<cylfock::Error> for LabError {
    fn from(e: cylfock::Error) -> Self {
        use cylfock::Error as E;
        match e {
            E::Descriptor(_)
            | E::InvalidParameter(_)
            | E::InvalidTau(_)
            | E::AlphaBetaOrder { .. }
            | E::InvalidShift { .. } => LabError::Config(e.to_string()),
            _ => LabError::Numeric(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "cylab",
    version,
    about = "Fock-space, theta-Gabor and interpolation experiments on the flat cylinder"
)]
pub struct Cli {
    /// JSON config file; inline flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Which data files to write.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

/// Declares a flag struct whose fields mirror config keys. Values are read
/// as JSON when they parse, as strings otherwise.
macro_rules! inline_flags {
    ($name:ident { $($field:ident => $key:literal),* $(,)? }) => {
        #[derive(Args, Debug, Default, Clone)]
        pub struct $name {
            $(
                #[arg(long = $key)]
                pub $field: Option<String>,
            )*
        }

        impl $name {
            pub fn overlay(&self) -> Map<String, Value> {
                let mut m = Map::new();
                $(
                    if let Some(v) = &self.$field {
                        m.insert($key.replace('-', "_").replace("k_list", "K_list"), flag_value(v));
                    }
                )*
                m
            }
        }
    };
}

inline_flags!(DensityFlags { points => "points", r_list => "r-list", w_samples => "w-samples", metric => "metric", alpha => "alpha" });
inline_flags!(FrameFlags { points => "points", nu => "nu", k_list => "k-list", margin => "margin" });
inline_flags!(RieszFlags { points => "points", nu => "nu", k_list => "k-list", tol => "tol" });
inline_flags!(SweepFlags {
    beta_min => "beta-min", beta_max => "beta-max", steps => "steps", k_list => "k-list",
    margin => "margin", nu => "nu", tol => "tol",
});
inline_flags!(InterpolateFlags { points => "points", alpha => "alpha", data => "data", band => "band", rel_tol => "rel-tol" });
inline_flags!(ReconstructFlags {
    points => "points", alpha => "alpha", beta => "beta", modes => "modes",
    n_probes => "n-probes", probe_y => "probe-y",
});
inline_flags!(GrowthFlags { points => "points", alpha => "alpha", y_max => "y-max", ny => "ny", nx => "nx" });
inline_flags!(KernelFlags { params => "params", n_pairs => "n-pairs", y_max => "y-max", tol => "tol" });
inline_flags!(ThetaFlags { a => "a", b => "b", z => "z", tau => "tau", tol => "tol" });

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Beurling density curves, separation and uniform closeness.
    Density(DensityFlags),
    /// Frame bounds of the theta-Gabor system over a list of truncations.
    FrameBounds(FrameFlags),
    /// Riesz lower bound from the Gram matrix.
    RieszBounds(RieszFlags),
    /// Lattice sweep of frame and Riesz bounds across beta.
    Sweep(SweepFlags),
    /// Explicit interpolation series: node residuals and norm ratio.
    Interpolate(InterpolateFlags),
    /// Sampling reconstruction of a basis combination from its samples.
    Reconstruct(ReconstructFlags),
    /// Growth diagnostics of the product G.
    Growth(GrowthFlags),
    /// Three-way reproducing-kernel agreement table.
    KernelCheck(KernelFlags),
    /// One theta-function value with its summation range.
    ThetaEval(ThetaFlags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::FrameBounds(_) => "frame-bounds",
            Command::RieszBounds(_) => "riesz-bounds",
            Command::Sweep(_) => "sweep",
            Command::Interpolate(_) => "interpolate",
            Command::Reconstruct(_) => "reconstruct",
            Command::Growth(_) => "growth",
            Command::KernelCheck(_) => "kernel-check",
            Command::ThetaEval(_) => "theta-eval",
        }
    }

    fn overlay(&self) -> Map<String, Value> {
        match self {
            Command::Density(f) => f.overlay(),
            Command::FrameBounds(f) => f.overlay(),
            Command::RieszBounds(f) => f.overlay(),
            Command::Sweep(f) => f.overlay(),
            Command::Interpolate(f) => f.overlay(),
            Command::Reconstruct(f) => f.overlay(),
            Command::Growth(f) => f.overlay(),
            Command::KernelCheck(f) => f.overlay(),
            Command::ThetaEval(f) => f.overlay(),
        }
    }
}

/// Runs a parsed command line; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(partial) => {
            if partial {
                EXIT_PARTIAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("cylab {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs; clap errors exit 2.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, LabError> {
    let mut map = match &cli.config {
        Some(p) => load_file(p)?,
        None => Map::new(),
    };
    map.extend(cli.command.overlay());
    if let Some(s) = cli.seed {
        map.insert("seed".into(), s.into());
    }
    if let Some(t) = cli.threads {
        map.insert("threads".into(), t.into());
    }
    if let Some(o) = &cli.out {
        map.insert(
            "out".into(),
            Value::String(o.to_string_lossy().into_owned()),
        );
    }
    if let Some(f) = cli.format {
        map.insert(
            "format".into(),
            serde_json::to_value(f).expect("format serializes"),
        );
    }
    let common = split_common(&mut map)?;
    let name = cli.command.name();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = common.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    let threads = pool.current_num_threads();
    let t0 = Instant::now();
    let seed = common.seed;
    let out = pool.install(|| match name {
        "density" => commands::density(typed(map)?),
        "frame-bounds" => commands::frame(typed(map)?),
        "riesz-bounds" => commands::riesz(typed(map)?),
        "sweep" => commands::sweep(typed(map)?),
        "interpolate" => commands::interpolate_cmd(typed(map)?, seed),
        "reconstruct" => commands::reconstruct(typed(map)?, seed),
        "growth" => commands::growth(typed(map)?),
        "kernel-check" => commands::kernel_check(typed(map)?, seed),
        "theta-eval" => commands::theta_eval(typed(map)?),
        _ => unreachable!("every subcommand is dispatched"),
    })?;
    let wall = t0.elapsed().as_millis();
    output::write_all(name, &common, &out, wall, threads)?;
    for w in &out.warnings {
        eprintln!("cylab {name}: warning: {w}");
    }
    Ok(out.partial)
}

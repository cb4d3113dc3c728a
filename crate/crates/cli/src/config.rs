use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use stochastic_beer::{CorrelationKernel, Grid, MediumSpec};

/// Pipelines the runner can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Beer,
    Paper,
    Exact,
    Mc,
    EulerCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Beer => "beer",
            Mode::Paper => "paper",
            Mode::Exact => "exact",
            Mode::Mc => "mc",
            Mode::EulerCheck => "euler-check",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "beer" => Mode::Beer,
            "paper" => Mode::Paper,
            "exact" => Mode::Exact,
            "mc" => Mode::Mc,
            "euler-check" => Mode::EulerCheck,
            _ => return None,
        })
    }
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub medium: MediumSpec,
    pub kernel: CorrelationKernel,
    pub grid: Grid,
    pub n_paths: usize,
    pub master_seed: u64,
    pub modes: BTreeSet<Mode>,
    pub output: PathBuf,
    /// Worker threads for the ensemble; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn has(&self, mode: Mode) -> bool {
        self.modes.contains(&mode)
    }

    pub fn modes_label(&self) -> String {
        self.modes.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")
    }
}

/// Simulate beam attenuation in a slab with a Gaussian random absorption
/// coefficient and write the averaged intensity curves as CSV.
#[derive(Debug, Parser)]
#[command(name = "stochastic-beer", version, allow_negative_numbers = true)]
struct Args {
    /// Mean absorption coefficient (cm^-1)
    #[arg(long, default_value_t = 1.0)]
    sigma_a: f64,
    /// Scattering coefficient (cm^-1)
    #[arg(long, default_value_t = 0.0)]
    sigma_s: f64,
    /// Relative fluctuation magnitude of the absorption coefficient
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    /// Correlation length (cm)
    #[arg(long, default_value_t = 1.0)]
    zeta: f64,
    /// Kernel amplitude C
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Kernel decay exponent (2 = squared exponential)
    #[arg(long, default_value_t = 2.0)]
    kappa: f64,
    /// Incident intensity (W cm^-2)
    #[arg(long, default_value_t = 10.0)]
    i0: f64,
    /// Slab depth (cm)
    #[arg(long, default_value_t = 5.0)]
    length: f64,
    /// Grid points across the slab; defaults to spacing <= zeta / 10
    #[arg(long)]
    grid_points: Option<usize>,
    /// Monte Carlo paths
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// Master seed of the ensemble
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Comma-separated subset of beer,paper,exact,mc,euler-check
    #[arg(long, default_value = "beer,paper,exact,mc")]
    modes: String,
    /// Output CSV path
    #[arg(long, default_value = "averaged_beer.csv")]
    out: PathBuf,
    /// Worker threads for the ensemble (results do not depend on it)
    #[arg(long)]
    threads: Option<usize>,
}

/// Command-line problem; exits with status 1 (or 0 for `--help`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub message: String,
    pub informational: bool,
}

impl UsageError {
    fn flag(flag: &str, reason: impl fmt::Display) -> Self {
        Self {
            message: format!("invalid value for --{flag}: {reason}"),
            informational: false,
        }
    }

    pub fn exit_code(&self) -> u8 {
        if self.informational {
            0
        } else {
            1
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message.trim_end())
    }
}

impl std::error::Error for UsageError {}

/// Parses `argv` (program name first) into a validated configuration.
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| UsageError {
        informational: matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion),
        message: e.to_string(),
    })?;

    let nonneg = |flag: &str, v: f64| {
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(UsageError::flag(flag, format!("must be >= 0, got {v}")))
        }
    };
    let positive = |flag: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(UsageError::flag(flag, format!("must be > 0, got {v}")))
        }
    };
    let sigma_a = nonneg("sigma-a", args.sigma_a)?;
    let sigma_s = nonneg("sigma-s", args.sigma_s)?;
    let alpha = nonneg("alpha", args.alpha)?;
    let zeta = positive("zeta", args.zeta)?;
    let amplitude = positive("amplitude", args.amplitude)?;
    let i0 = positive("i0", args.i0)?;
    let length = positive("length", args.length)?;
    if !(args.kappa.is_finite() && args.kappa >= 1.0) {
        return Err(UsageError::flag("kappa", format!("must be >= 1, got {}", args.kappa)));
    }

    let medium = MediumSpec::new(sigma_a, sigma_s, alpha, i0).map_err(|e| UsageError::flag("alpha", e))?;
    let kernel = CorrelationKernel::new(amplitude, zeta, args.kappa).map_err(|e| UsageError::flag("kappa", e))?;
    let grid = match args.grid_points {
        Some(n) => Grid::new(length, n).map_err(|e| UsageError::flag("grid-points", e))?,
        None => Grid::resolving(length, &kernel).map_err(|e| UsageError::flag("length", e))?,
    };

    let mut modes = BTreeSet::new();
    for token in args.modes.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let mode = Mode::parse(token).ok_or_else(|| {
            UsageError::flag(
                "modes",
                format!("unknown mode `{token}` (expected beer, paper, exact, mc, euler-check)"),
            )
        })?;
        modes.insert(mode);
    }
    if modes.is_empty() {
        return Err(UsageError::flag("modes", "at least one mode is required"));
    }
    let needs_paths = modes.contains(&Mode::Mc) || modes.contains(&Mode::EulerCheck);
    if needs_paths && args.paths < 2 {
        return Err(UsageError::flag(
            "paths",
            format!("need at least 2 paths, got {}", args.paths),
        ));
    }
    if args.threads == Some(0) {
        return Err(UsageError::flag("threads", "must be at least 1"));
    }

    Ok(ExperimentConfig {
        medium,
        kernel,
        grid,
        n_paths: args.paths,
        master_seed: args.seed,
        modes,
        output: args.out,
        threads: args.threads,
    })
}

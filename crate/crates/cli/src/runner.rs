use std::fmt::Write as _;

use stochastic_beer::ensemble::{HEAVY_TAIL_THRESHOLD, MAX_OUTPUT_ROWS};
use stochastic_beer::{
    default_depths, euler_convergence, mfp_series, run_with_sampler, AveragedLaw, EnsembleStats, Error, EulerLevel,
    ExponentConvention, FieldSampler,
};
use thiserror::Error as ThisError;

use crate::config::{ExperimentConfig, Mode};

pub const CSV_HEADER: &str = "z,beer,averaged_paper,averaged_exact,mc_mean,mc_sem";
const COLUMNS: [&str; 6] = ["z", "beer", "averaged_paper", "averaged_exact", "mc_mean", "mc_sem"];

/// z-score bounds used by the convention verdict.
pub const AGREE_SIGMAS: f64 = 3.0;
pub const REJECT_SIGMAS: f64 = 5.0;

const EULER_PATHS: usize = 100;
const MFP_ORDERS: u32 = 40;

#[derive(Debug, ThisError)]
pub enum RunError {
    #[error("{0}")]
    Config(Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
    #[error("non-finite {column} at z = {z}")]
    NonFinite { column: &'static str, z: f64 },
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
}

impl RunError {
    /// 1 for configuration problems, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } | RunError::ThreadPool(_) => 1,
            RunError::Numerical(_) | RunError::NonFinite { .. } => 2,
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::FactorizationFailure { .. } | Error::DivergentSeries { .. } | Error::DegenerateStep { .. } => {
                RunError::Numerical(e)
            }
            _ => RunError::Config(e),
        }
    }
}

/// One CSV data row; `None` for columns whose mode was not selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub z: f64,
    pub beer: Option<f64>,
    pub paper: Option<f64>,
    pub exact: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_sem: Option<f64>,
}

impl Row {
    fn cells(&self) -> [Option<f64>; 6] {
        [
            Some(self.z),
            self.beer,
            self.paper,
            self.exact,
            self.mc_mean,
            self.mc_sem,
        ]
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Rows exactly as written to the CSV (values rounded to 9 significant digits).
    pub rows: Vec<Row>,
    pub csv: String,
    pub report: String,
    pub verdict: Option<Verdict>,
    pub ensemble: Option<EnsembleStats>,
    pub euler: Option<Vec<EulerLevel>>,
}

/// Nine significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn rounded(v: f64) -> f64 {
    format_value(v).parse().expect("formatted float parses")
}

/// Runs every selected pipeline, writes the CSV and returns the report.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let outcome = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RunError::ThreadPool(e.to_string()))?
            .install(|| evaluate(config)),
        None => evaluate(config),
    }?;
    std::fs::write(&config.output, &outcome.csv).map_err(|source| RunError::Io {
        path: config.output.display().to_string(),
        source,
    })?;
    Ok(outcome)
}

/// Same as [`run`] without touching the filesystem.
pub fn evaluate(config: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let depths = default_depths(&config.grid, MAX_OUTPUT_ROWS);
    let medium = config.medium;
    let law = |convention| AveragedLaw::new(medium, config.kernel, convention);
    let paper = config
        .has(Mode::Paper)
        .then(|| law(ExponentConvention::PaperHalf))
        .transpose()?;
    let exact = config
        .has(Mode::Exact)
        .then(|| law(ExponentConvention::Exact))
        .transpose()?;

    let needs_sampler = config.has(Mode::Mc) || config.has(Mode::EulerCheck);
    let sampler = needs_sampler
        .then(|| FieldSampler::new(config.kernel, config.grid))
        .transpose()?;
    let sm = stochastic_beer::StochasticMedium::new(medium, config.kernel);
    let ensemble = match (&sampler, config.has(Mode::Mc)) {
        (Some(s), true) => Some(run_with_sampler(&sm, s, config.n_paths, config.master_seed, &depths)?),
        _ => None,
    };
    let euler = match (&sampler, config.has(Mode::EulerCheck)) {
        (Some(s), true) => {
            let panels = config.grid.n_points() - 1;
            let strides: Vec<usize> = [4, 2, 1].into_iter().filter(|s| panels.is_multiple_of(*s)).collect();
            let paths = config.n_paths.min(EULER_PATHS);
            Some(euler_convergence(&medium, s, paths, config.master_seed, &strides)?)
        }
        _ => None,
    };

    let mut rows = Vec::with_capacity(depths.len());
    for (i, &z) in depths.iter().enumerate() {
        let row = Row {
            z,
            beer: config.has(Mode::Beer).then(|| medium.beer(z)).transpose()?,
            paper: paper.as_ref().map(|l| l.averaged_intensity(z)).transpose()?,
            exact: exact.as_ref().map(|l| l.averaged_intensity(z)).transpose()?,
            mc_mean: ensemble.as_ref().map(|e| e.mean[i]),
            mc_sem: ensemble.as_ref().map(|e| e.sem[i]),
        };
        for (column, v) in COLUMNS.into_iter().zip(row.cells()) {
            if v.is_some_and(|v| !v.is_finite()) {
                return Err(RunError::NonFinite { column, z });
            }
        }
        let r = |v: Option<f64>| v.map(rounded);
        rows.push(Row {
            z: rounded(row.z),
            beer: r(row.beer),
            paper: r(row.paper),
            exact: r(row.exact),
            mc_mean: r(row.mc_mean),
            mc_sem: r(row.mc_sem),
        });
    }

    let csv = render_csv(config, &rows);
    let verdict = adjudicate(&rows);
    let report = render_report(config, &rows, verdict.as_ref(), ensemble.as_ref(), euler.as_deref());
    Ok(RunOutcome {
        rows,
        csv,
        report,
        verdict,
        ensemble,
        euler,
    })
}

/// One `#` comment line echoing the configuration, the column header and
/// one line per depth.
pub fn render_csv(config: &ExperimentConfig, rows: &[Row]) -> String {
    let m = &config.medium;
    let k = &config.kernel;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# stochastic-beer {} units: z [cm], intensities [W cm^-2], coefficients [cm^-1]; \
         i0={} sigma_a={} sigma_s={} alpha={} amplitude={} zeta={} kappa={} length={} grid_points={} \
         paths={} seed={} modes={}",
        env!("CARGO_PKG_VERSION"),
        m.i0,
        m.sigma_a,
        m.sigma_s,
        m.alpha,
        k.amplitude(),
        k.correlation_length(),
        k.exponent(),
        config.grid.length(),
        config.grid.n_points(),
        config.n_paths,
        config.master_seed,
        config.modes_label(),
    );
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .cells()
            .iter()
            .map(|c| c.map(format_value).unwrap_or_default())
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Which closed form the Monte Carlo mean follows.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub rows_used: usize,
    pub rms_z_exact: f64,
    pub max_z_exact: f64,
    pub rms_z_paper: f64,
    pub max_z_paper: f64,
    /// z-scores at the deepest row: (exact, paper).
    pub deepest: (f64, f64),
    pub tracks: Option<ExponentConvention>,
}

/// Compares the MC column against both analytic columns using only the CSV
/// numbers. Rows with zero SEM (deterministic ensembles) are skipped.
pub fn adjudicate(rows: &[Row]) -> Option<Verdict> {
    let scores: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| match (r.mc_mean, r.mc_sem, r.exact, r.paper) {
            (Some(mean), Some(sem), Some(exact), Some(paper)) if sem > 0.0 && r.z > 0.0 => {
                Some(((mean - exact) / sem, (mean - paper) / sem))
            }
            _ => None,
        })
        .collect();
    if scores.is_empty() {
        return None;
    }
    let n = scores.len() as f64;
    let rms = |f: fn(&(f64, f64)) -> f64| (scores.iter().map(|s| f(s).powi(2)).sum::<f64>() / n).sqrt();
    let max = |f: fn(&(f64, f64)) -> f64| scores.iter().map(|s| f(s).abs()).fold(0.0, f64::max);
    let (rms_z_exact, rms_z_paper) = (rms(|s| s.0), rms(|s| s.1));
    let (max_z_exact, max_z_paper) = (max(|s| s.0), max(|s| s.1));
    let tracks = if rms_z_exact <= AGREE_SIGMAS && max_z_paper > REJECT_SIGMAS {
        Some(ExponentConvention::Exact)
    } else if rms_z_paper <= AGREE_SIGMAS && max_z_exact > REJECT_SIGMAS {
        Some(ExponentConvention::PaperHalf)
    } else {
        None
    };
    Some(Verdict {
        rows_used: scores.len(),
        rms_z_exact,
        max_z_exact,
        rms_z_paper,
        max_z_paper,
        deepest: *scores.last().unwrap(),
        tracks,
    })
}

fn render_report(
    config: &ExperimentConfig,
    rows: &[Row],
    verdict: Option<&Verdict>,
    ensemble: Option<&EnsembleStats>,
    euler: Option<&[EulerLevel]>,
) -> String {
    let mut out = String::new();
    let m = &config.medium;
    let _ = writeln!(out, "stochastic-beer report");
    let _ = writeln!(
        out,
        "  output: {} ({} rows, modes {})",
        config.output.display(),
        rows.len(),
        config.modes_label()
    );
    if m.is_large_fluctuation() {
        let _ = writeln!(
            out,
            "  warning: alpha = {} >= 1, outside the small-fluctuation regime",
            m.alpha
        );
    }

    if let Some(last) = rows.last() {
        let _ = writeln!(out, "  at z = {}:", last.z);
        for (label, v) in [
            ("beer", last.beer),
            ("averaged_paper", last.paper),
            ("averaged_exact", last.exact),
            ("mc_mean", last.mc_mean),
            ("mc_sem", last.mc_sem),
        ] {
            if let Some(v) = v {
                let _ = writeln!(out, "    {label:<15} {}", format_value(v));
            }
        }
    }

    match verdict {
        Some(v) => {
            let _ = writeln!(out, "convention adjudication ({} rows with SEM > 0):", v.rows_used);
            let _ = writeln!(
                out,
                "  EXACT      rms |z| = {:.3}  max |z| = {:.3}  deepest z = {:+.3}",
                v.rms_z_exact, v.max_z_exact, v.deepest.0
            );
            let _ = writeln!(
                out,
                "  PAPER_HALF rms |z| = {:.3}  max |z| = {:.3}  deepest z = {:+.3}",
                v.rms_z_paper, v.max_z_paper, v.deepest.1
            );
            let line = match v.tracks {
                Some(c) => format!("  verdict: MC mean tracks {} (g = {})", c.name(), c.factor()),
                None => "  verdict: inconclusive at this ensemble size".to_string(),
            };
            let _ = writeln!(out, "{line}");
        }
        None if config.has(Mode::Mc) => {
            let _ = writeln!(
                out,
                "convention adjudication: not applicable (needs paper, exact and a nondegenerate mc column)"
            );
        }
        None => {}
    }

    if let Some(e) = ensemble {
        let _ = writeln!(
            out,
            "ensemble diagnostics ({} paths, jitter {:.1e}):",
            e.n_paths, e.jitter
        );
        let _ = writeln!(
            out,
            "  negative-coefficient fraction  {:.6}",
            e.negative_coefficient_fraction
        );
        let _ = writeln!(
            out,
            "  int_0^L G dZ: mean {:+.5} (sem {:.5}), variance {:.5}, skewness {:+.4}, excess kurtosis {:+.4}",
            e.integral.mean,
            e.integral.sem(),
            e.integral.variance,
            e.integral.skewness,
            e.integral.excess_kurtosis
        );
        if let Some(v) = e.mean_inverse_absorption {
            let _ = writeln!(out, "  sample mean of 1/|A|           {v:.6} cm");
        }
        let _ = writeln!(out, "  alpha sigma_a sqrt(V(L))       {:.4}", e.log_intensity_std);
        if e.heavy_tail_warning() {
            let _ = writeln!(
                out,
                "  warning: log-intensity spread exceeds {HEAVY_TAIL_THRESHOLD}; the sample mean is dominated by rare paths"
            );
        }
    }

    match mfp_series(m.alpha, config.kernel.amplitude(), m.sigma_a, MFP_ORDERS) {
        Ok(s) => {
            let _ = writeln!(
                out,
                "mean-free-path series: shift S = {:.9e}, mean free path {:.6} cm{}",
                s.shift,
                s.mean_free_path,
                if s.converged { "" } else { " (not converged)" }
            );
        }
        Err(e) => {
            let _ = writeln!(out, "warning: {e}; mean free path not reported");
        }
    }

    if let Some(levels) = euler {
        let _ = writeln!(out, "euler check at z = L ({} paths):", config.n_paths.min(EULER_PATHS));
        for (i, l) in levels.iter().enumerate() {
            let order = levels
                .get(i + 1)
                .map(|next| {
                    format!(
                        "  observed order {:.3}",
                        (l.mean_abs_error / next.mean_abs_error).log2()
                    )
                })
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "  h = {:.5}  mean |em - exact| = {:.4e}  max = {:.4e}{order}",
                l.spacing, l.mean_abs_error, l.max_abs_error
            );
        }
    }
    out
}

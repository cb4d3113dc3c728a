//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use stochastic_beer::*;
use stochastic_beer_cli::{parse_args, run, ExperimentConfig, Row};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Option<Duration>, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sweep_depths() -> Vec<f64> {
    (0..64).map(|i| 10.0 * i as f64 / 63.0).collect()
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn config(args: &[&str]) -> Result<ExperimentConfig, String> {
    parse_args(std::iter::once("stochastic-beer").chain(args.iter().copied())).map_err(fail)
}

fn read_rows(path: &Path) -> Result<Vec<Row>, String> {
    let text = std::fs::read_to_string(path).map_err(fail)?;
    let mut lines = text.lines();
    ensure(lines.next().is_some_and(|l| l.starts_with('#')), || {
        "missing comment line".into()
    })?;
    ensure(lines.next() == Some(stochastic_beer_cli::CSV_HEADER), || {
        "bad header".into()
    })?;
    lines
        .map(|line| {
            let cells: Vec<Option<f64>> = line
                .split(',')
                .map(|c| if c.is_empty() { Ok(None) } else { c.parse().map(Some) })
                .collect::<Result<_, _>>()
                .map_err(fail)?;
            ensure(cells.len() == 6, || format!("row has {} cells", cells.len()))?;
            Ok(Row {
                z: cells[0].ok_or("empty z")?,
                beer: cells[1],
                paper: cells[2],
                exact: cells[3],
                mc_mean: cells[4],
                mc_sem: cells[5],
            })
        })
        .collect()
}

fn closed_form_duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for zeta in [0.1, 1.0, 5.0] {
        let k = CorrelationKernel::gaussian(1.0, zeta).map_err(fail)?;
        for z in sweep_depths() {
            worst = worst.max(relative_gap(k.ordered_double_integral(z), outer_y(zeta, z)));
        }
    }
    ensure(worst <= 1e-8, || format!("max relative gap {worst:.3e}"))?;
    Ok(format!("max relative gap {worst:.2e} over 192 points"))
}

fn beer_recovery(dir: &Path) -> Outcome {
    let medium = MediumSpec::absorbing(1.0, 0.0, 10.0).map_err(fail)?;
    let kernel = CorrelationKernel::gaussian(1.0, 1.0).map_err(fail)?;
    let grid = Grid::new(5.0, 51).map_err(fail)?;
    let depths = default_depths(&grid, 256);
    for convention in [ExponentConvention::PaperHalf, ExponentConvention::Exact] {
        let law = AveragedLaw::new(medium, kernel, convention).map_err(fail)?;
        for &z in &depths {
            let (a, b) = (law.averaged_intensity(z).map_err(fail)?, medium.beer(z).map_err(fail)?);
            ensure(a == b, || format!("{} at z = {z}: {a} != {b}", convention.name()))?;
        }
    }
    let stats = run_ensemble(&StochasticMedium::new(medium, kernel), &grid, 1000, 3, &depths).map_err(fail)?;
    for (i, &z) in depths.iter().enumerate() {
        let b = medium.beer(z).map_err(fail)?;
        ensure(stats.mean[i] == b && stats.sem[i] == 0.0, || {
            format!("mc at z = {z}: mean {} sem {}", stats.mean[i], stats.sem[i])
        })?;
    }
    let out = dir.join("alpha0.csv");
    let cfg = config(&["--alpha", "0", "--paths", "500", "--out", out.to_str().unwrap()])?;
    run(&cfg).map_err(fail)?;
    for r in read_rows(&out)? {
        ensure(
            r.beer == r.paper && r.paper == r.exact && r.exact == r.mc_mean && r.mc_sem == Some(0.0),
            || format!("csv row differs at z = {}", r.z),
        )?;
    }
    Ok(format!(
        "{} depths, analytic and mc columns equal beer bit for bit",
        depths.len()
    ))
}

fn convention_adjudication() -> Outcome {
    let sm = StochasticMedium::new(
        MediumSpec::absorbing(1.0, 0.1, 10.0).map_err(fail)?,
        CorrelationKernel::gaussian(1.0, 1.0).map_err(fail)?,
    );
    let grid = Grid::new(3.0, 61).map_err(fail)?;
    let depths = [1.0, 2.0, 3.0];
    let stats = run_ensemble(&sm, &grid, 100_000, 20_240_601, &depths).map_err(fail)?;
    let exact = AveragedLaw::new(sm.medium, sm.kernel, ExponentConvention::Exact).map_err(fail)?;
    let paper = exact.with_convention(ExponentConvention::PaperHalf);
    let mut detail = Vec::new();
    for (i, &z) in depths.iter().enumerate() {
        let ze = (stats.mean[i] - exact.averaged_intensity(z).map_err(fail)?) / stats.sem[i];
        let zp = (stats.mean[i] - paper.averaged_intensity(z).map_err(fail)?) / stats.sem[i];
        detail.push(format!("z={z}: exact {ze:+.2}, paper {zp:+.2}"));
        ensure(ze.abs() <= 3.0, || format!("z = {z} is {ze:.2} SEM from EXACT"))?;
        if z == 3.0 {
            ensure(zp.abs() > 5.0, || format!("z = 3 only {zp:.2} SEM from PAPER_HALF"))?;
        }
    }
    Ok(format!("z-scores [{}]", detail.join("; ")))
}

fn lognormal_triangle() -> Outcome {
    let mut worst: f64 = 0.0;
    for zeta in [0.1, 1.0, 5.0] {
        let sm = StochasticMedium::new(
            MediumSpec::absorbing(1.0, 0.5, 10.0).map_err(fail)?,
            CorrelationKernel::gaussian(1.0, zeta).map_err(fail)?,
        );
        let law = AveragedLaw::new(sm.medium, sm.kernel, ExponentConvention::Exact).map_err(fail)?;
        for z in sweep_depths() {
            let gap = relative_gap(
                lognormal_oracle(&sm, z).map_err(fail)?,
                law.averaged_intensity(z).map_err(fail)?,
            );
            worst = worst.max(gap);
        }
    }
    ensure(worst <= 1e-8, || format!("max relative gap {worst:.3e}"))?;
    Ok(format!("max relative gap {worst:.2e}"))
}

fn default_curves(dir: &Path) -> Outcome {
    let mut notes = Vec::new();
    for alpha in ["0.8", "0.5"] {
        let out = dir.join(format!("curves_{alpha}.csv"));
        run(&config(&["--alpha", alpha, "--out", out.to_str().unwrap()])?).map_err(fail)?;
        let rows = read_rows(&out)?;
        ensure(rows.windows(2).all(|w| w[0].z < w[1].z), || "z not increasing".into())?;
        for r in &rows {
            let (beer, paper) = (r.beer.ok_or("beer column empty")?, r.paper.ok_or("paper column empty")?);
            ensure(
                beer > 0.0 && paper > 0.0 && r.exact.unwrap_or(1.0) > 0.0 && r.mc_mean.unwrap_or(1.0) > 0.0,
                || format!("non-positive intensity at z = {}", r.z),
            )?;
            ensure(r.mc_sem.unwrap_or(0.0) >= 0.0, || "negative sem".into())?;
            if r.z > 0.0 {
                ensure(paper > beer, || format!("alpha {alpha}: paper <= beer at z = {}", r.z))?;
            }
        }
        notes.push(format!("alpha {alpha}: paper > beer on {} rows", rows.len() - 1));
    }
    let out = dir.join("curves_small.csv");
    run(&config(&[
        "--alpha",
        "1e-3",
        "--modes",
        "beer,paper",
        "--out",
        out.to_str().unwrap(),
    ])?)
    .map_err(fail)?;
    let gap = read_rows(&out)?
        .iter()
        .map(|r| relative_gap(r.paper.unwrap(), r.beer.unwrap()))
        .fold(0.0, f64::max);
    ensure(gap < 1e-5, || format!("alpha 1e-3 max relative gap {gap:.3e}"))?;
    notes.push(format!("alpha 1e-3 gap {gap:.2e}"));
    Ok(notes.join("; "))
}

fn sampler_statistics() -> Outcome {
    const PATHS: usize = 100_000;
    let kernel = CorrelationKernel::gaussian(1.0, 1.0).map_err(fail)?;
    let grid = Grid::new(5.0, 101).map_err(fail)?;
    let sampler = FieldSampler::new(kernel, grid).map_err(fail)?;
    let n = grid.n_points();

    let (s1, s2) = (0..PATHS)
        .into_par_iter()
        .fold(
            || (vec![0.0; n], vec![0.0; n]),
            |(mut s1, mut s2), i| {
                let p = sampler.sample(path_seed(77, i as u64));
                for (q, &v) in p.values().iter().enumerate() {
                    s1[q] += v;
                    s2[q] += v * v;
                }
                (s1, s2)
            },
        )
        .reduce(
            || (vec![0.0; n], vec![0.0; n]),
            |(mut a1, mut a2), (b1, b2)| {
                for q in 0..n {
                    a1[q] += b1[q];
                    a2[q] += b2[q];
                }
                (a1, a2)
            },
        );
    let m = PATHS as f64;
    // for a Gaussian sample, Var(s^2) = 2 sigma^4 / (n - 1)
    let se = (2.0 / (m - 1.0)).sqrt() * kernel.amplitude();
    let mut worst: f64 = 0.0;
    for q in 0..n {
        let var = (s2[q] - s1[q] * s1[q] / m) / (m - 1.0);
        worst = worst.max((var - kernel.amplitude()).abs() / se);
    }
    ensure(worst <= 3.0, || format!("per-point variance off by {worst:.2} SE"))?;

    let sm = StochasticMedium::new(MediumSpec::absorbing(1.0, 0.0, 10.0).map_err(fail)?, kernel);
    let stats = run_with_sampler(&sm, &sampler, PATHS, 78, &[grid.length()]).map_err(fail)?;
    let (skew, kurt) = (stats.integral_skewness(), stats.integral_excess_kurtosis());
    let mean_z = stats.integral.mean / stats.integral.sem();
    ensure(skew.abs() <= 0.05, || format!("skewness {skew:.4}"))?;
    ensure(kurt.abs() <= 0.1, || format!("excess kurtosis {kurt:.4}"))?;
    ensure(mean_z.abs() <= 3.0, || format!("integral mean {mean_z:.2} SEM from 0"))?;
    Ok(format!(
        "variance worst {worst:.2} SE; skewness {skew:+.4}; excess kurtosis {kurt:+.4}; integral mean {mean_z:+.2} SEM"
    ))
}

fn ode_form() -> Outcome {
    let medium = MediumSpec::absorbing(1.0, 0.8, 10.0).map_err(fail)?;
    let kernel = CorrelationKernel::gaussian(1.0, 1.0).map_err(fail)?;
    let depths: Vec<f64> = (0..=90).map(|i| 0.5 + 4.5 * i as f64 / 90.0).collect();
    let mut notes = Vec::new();
    for convention in [ExponentConvention::PaperHalf, ExponentConvention::Exact] {
        let law = AveragedLaw::new(medium, kernel, convention).map_err(fail)?;
        let max_residual = |h: f64| -> Result<f64, String> {
            depths
                .iter()
                .map(|&z| law.ode_residual(z, h).map(f64::abs).map_err(fail))
                .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
        };
        let at_target = max_residual(1e-4)?;
        ensure(at_target < 1e-6, || {
            format!("{}: residual {at_target:.3e}", convention.name())
        })?;
        let (a, b, c) = (max_residual(1e-2)?, max_residual(5e-3)?, max_residual(2.5e-3)?);
        for (x, y) in [(a, b), (b, c)] {
            let order = (x / y).log2();
            ensure((order - 2.0).abs() <= 0.1, || {
                format!("{}: observed order {order:.3}", convention.name())
            })?;
        }
        notes.push(format!(
            "{} residual {at_target:.1e}, order {:.3}",
            convention.name(),
            (b / c).log2()
        ));
    }
    Ok(notes.join("; "))
}

fn mfp_direct(alpha: f64, c: f64, q_max: u32) -> f64 {
    let mut s = 0.0;
    let mut binom = 1.0;
    for q in 1..=q_max {
        binom = -binom;
        if q % 2 == 0 {
            s += binom * (alpha * alpha * c).powi(q as i32 / 2);
        }
    }
    s
}

fn mfp_series_check() -> Outcome {
    let mut worst: f64 = 0.0;
    for alpha in [0.05, 0.1, 0.2] {
        for c in [0.5, 1.0, 2.0] {
            for q_max in [1, 2, 5, 10, 20, 40] {
                let s = mfp_series(alpha, c, 1.0, q_max).map_err(fail)?;
                let o = mfp_direct(alpha, c, q_max);
                let gap = if o == 0.0 {
                    s.shift.abs()
                } else {
                    relative_gap(s.shift, o)
                };
                worst = worst.max(gap);
            }
        }
    }
    ensure(worst <= 1e-14, || format!("max relative gap {worst:.3e}"))?;
    let mut divergent = 0;
    for alpha in [0.1, 0.5, 0.7, 0.9, 1.0, 1.5] {
        for c in [0.25, 0.5, 1.0, 1.21, 2.0, 4.0] {
            let r = alpha * f64::sqrt(c);
            let diverged = matches!(mfp_series(alpha, c, 1.0, 12), Err(Error::DivergentSeries { .. }));
            ensure(diverged == (r >= 1.0), || {
                format!("alpha {alpha} C {c}: R = {r}, divergent = {diverged}")
            })?;
            divergent += usize::from(diverged);
        }
    }
    Ok(format!(
        "max relative gap {worst:.2e}; {divergent}/36 grid points divergent, all with R >= 1"
    ))
}

fn euler_order() -> Outcome {
    let medium = MediumSpec::absorbing(1.0, 0.5, 10.0).map_err(fail)?;
    let kernel = CorrelationKernel::gaussian(1.0, 1.0).map_err(fail)?;
    let sampler = FieldSampler::new(kernel, Grid::new(5.0, 641).map_err(fail)?).map_err(fail)?;
    let levels = euler_convergence(&medium, &sampler, 100, 2024, &[16, 8, 4, 2, 1]).map_err(fail)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = levels.iter().map(|l| (l.spacing.ln(), l.mean_abs_error.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ensure((slope - 1.0).abs() <= 0.1, || format!("fitted order {slope:.3}"))?;
    ensure(
        levels.windows(2).all(|w| w[1].mean_abs_error < w[0].mean_abs_error),
        || "error not decreasing".into(),
    )?;
    Ok(format!(
        "fitted order {slope:.3}; error {:.2e} at h = {} down to {:.2e} at h = {}",
        levels[0].mean_abs_error, levels[0].spacing, levels[4].mean_abs_error, levels[4].spacing
    ))
}

fn determinism(dir: &Path) -> Outcome {
    let mut outputs = Vec::new();
    for (i, threads) in [None, Some("1"), Some("3"), Some("8")].into_iter().enumerate() {
        let out = dir.join(format!("det_{i}.csv"));
        let mut args = vec!["--paths", "5000", "--seed", "11", "--out", out.to_str().unwrap()];
        if let Some(t) = threads {
            args.extend(["--threads", t]);
        }
        run(&config(&args)?).map_err(fail)?;
        outputs.push(std::fs::read(&out).map_err(fail)?);
    }
    let out = dir.join("det_bin.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_stochastic-beer"))
        .args([
            "--paths",
            "5000",
            "--seed",
            "11",
            "--threads",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .map_err(fail)?;
    ensure(status.status.success(), || {
        format!("binary exited with {}", status.status)
    })?;
    outputs.push(std::fs::read(&out).map_err(fail)?);
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "csv bytes differ".into())?;
    Ok(format!(
        "{} runs ({} bytes) identical across worker counts",
        outputs.len(),
        outputs[0].len()
    ))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let path = dir.path();
    let criteria: Vec<Criterion> = vec![
        (
            "closed-form duality",
            Some(Duration::from_secs(5)),
            Box::new(closed_form_duality),
        ),
        ("beer recovery", None, Box::new(|| beer_recovery(path))),
        (
            "convention adjudication",
            Some(Duration::from_secs(60)),
            Box::new(convention_adjudication),
        ),
        ("lognormal identity", None, Box::new(lognormal_triangle)),
        ("default curves", None, Box::new(|| default_curves(path))),
        (
            "sampler statistics",
            Some(Duration::from_secs(120)),
            Box::new(sampler_statistics),
        ),
        ("ode form", None, Box::new(ode_form)),
        ("mfp series", None, Box::new(mfp_series_check)),
        ("euler cross-check", None, Box::new(euler_order)),
        ("determinism", None, Box::new(|| determinism(path))),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&result, budget) {
            if elapsed > *limit {
                result = Err(format!("took {elapsed:.2?}, budget {limit:?}"));
            }
        }
        match result {
            Ok(msg) => println!("[criterion {}] PASS {name}: {msg} ({elapsed:.2?})", i + 1),
            Err(msg) => {
                failures += 1;
                println!("[criterion {}] FAIL {name}: {msg} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! End-to-end acceptance checks. Runs with its own harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use carima_core::causal::{bootstrap_test, estimate_effects, gaussian_test, Estimand};
use carima_core::oracle::{check_forecast_variance, check_inversion, check_likelihood, check_psi_weights, CheckOutcome};
use carima_core::sim::{run_study, simulate_control, InterventionSpec, ModelKind, StudyConfig, StudyOutput};
use carima_core::{fit, FitOptions};

const BIN: &str = env!("CARGO_BIN_EXE_carima");
const HORIZONS: [usize; 3] = [31, 92, 184];

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn oracle(out: CheckOutcome, elapsed: Duration, budget: Duration) -> Verdict {
    let in_time = elapsed <= budget;
    Verdict::new(
        out.passed && in_time,
        format!(
            "{} cases, worst {:.3e} (tolerance {:.1e}), {:.1?} (budget {:?})",
            out.cases, out.worst, out.tolerance, elapsed, budget
        ),
    )
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn psi_weights() -> Verdict {
    let (out, dt) = timed(|| check_psi_weights(100, 1));
    oracle(out, dt, Duration::from_secs(5))
}

fn likelihood() -> Verdict {
    let (out, dt) = timed(|| check_likelihood(50, 2));
    match out {
        Ok(o) => oracle(o, dt, Duration::from_secs(30)),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn inversion() -> Verdict {
    match check_inversion() {
        Ok(o) => Verdict::new(
            o.passed && o.cases == 36,
            format!("{} cases, {} mismatches", o.cases, o.worst),
        ),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn forecast_variance() -> Verdict {
    let (out, dt) = timed(|| check_forecast_variance(100_000, &[1, 7, 31], 4));
    match out {
        Ok(o) => oracle(o, dt, Duration::from_secs(120)),
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn study_config() -> StudyConfig {
    StudyConfig {
        n_reps: 200,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        horizons: HORIZONS.to_vec(),
        models: vec![ModelKind::CarimaTrue, ModelKind::CarimaBic, ModelKind::RegarimaTrue],
        ..StudyConfig::default()
    }
}

fn coverage(study: &StudyOutput, model: ModelKind, impact: &str, k: usize) -> Option<f64> {
    study.tables.row(model, impact, k).map(|r| r.coverage)
}

fn fmt_values(v: &[Option<f64>]) -> String {
    v.iter()
        .map(|x| x.map_or("n/a".to_string(), |x| format!("{x:.2}")))
        .collect::<Vec<_>>()
        .join(" / ")
}

fn within(v: Option<f64>, centre: f64, half: f64) -> bool {
    v.is_some_and(|v| (v - centre).abs() <= half)
}

fn level_shift_coverage(study: &StudyOutput, elapsed: Duration) -> Verdict {
    let c: Vec<Option<f64>> = HORIZONS.iter().map(|&k| coverage(study, ModelKind::CarimaTrue, "+1%", k)).collect();
    let c_ok = c.iter().all(|&v| within(v, 94.3, 4.0));
    let identical = HORIZONS.iter().all(|&k| {
        let base = coverage(study, ModelKind::CarimaTrue, "+1%", k);
        ["+10%", "+25%", "+50%", "+100%"]
            .iter()
            .all(|imp| matches!((base, coverage(study, ModelKind::CarimaTrue, imp, k)), (Some(a), Some(b)) if (a - b).abs() < 1e-9))
    });
    let r: Vec<Option<f64>> = HORIZONS.iter().map(|&k| coverage(study, ModelKind::RegarimaTrue, "+100%", k)).collect();
    let r_ok = r.iter().all(|&v| within(v, 25.0, 8.0));
    let in_time = elapsed <= Duration::from_secs(30 * 60);
    Verdict::new(
        c_ok && identical && r_ok && in_time,
        format!(
            "C-ARIMA^TRUE {} (94.3 +/- 4), identical across shifts: {identical}; REG-ARIMA^TRUE +100% {} (25 +/- 8); study {:.0?}",
            fmt_values(&c),
            fmt_values(&r),
            elapsed
        ),
    )
}

fn ci_length(study: &StudyOutput) -> Verdict {
    let target = [42.06, 34.54, 26.38];
    let means: Vec<Option<f64>> = HORIZONS
        .iter()
        .map(|&k| study.tables.row(ModelKind::CarimaTrue, "+1%", k).map(|r| r.ci_length))
        .collect();
    let close = means
        .iter()
        .zip(target)
        .all(|(m, t)| m.is_some_and(|m| ((m - t) / t).abs() <= 0.05));
    let mut broken = 0;
    let mut runs = 0;
    for rec in &study.records {
        let mut by_impact: std::collections::BTreeMap<&str, Vec<(usize, f64)>> = Default::default();
        for c in rec.metrics.iter().filter(|c| c.model == ModelKind::CarimaTrue) {
            by_impact.entry(c.impact.as_str()).or_default().push((c.horizon, c.ci_length));
        }
        for mut cells in by_impact.into_values() {
            cells.sort_by_key(|c| c.0);
            runs += 1;
            if cells.windows(2).any(|w| w[1].1 >= w[0].1) {
                broken += 1;
            }
        }
    }
    Verdict::new(
        close && broken == 0 && runs > 0,
        format!("mean length {} (42.06 / 34.54 / 26.38 +/- 5%), non-monotone runs {broken} of {runs}", fmt_values(&means)),
    )
}

fn ape_scaling(study: &StudyOutput) -> Verdict {
    let ape1 = study.tables.row(ModelKind::CarimaTrue, "+1%", 31).and_then(|r| r.ape);
    let ape_ok = ape1.is_some_and(|a| ((a - 4.18) / 4.18).abs() <= 0.15);
    let shifts = [1.0, 10.0, 25.0, 50.0, 100.0];
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for rec in &study.records {
        for &k in &HORIZONS {
            let scaled: Vec<f64> = shifts
                .iter()
                .filter_map(|&m| {
                    let label = InterventionSpec::LevelShift { percent: m }.label();
                    rec.metrics
                        .iter()
                        .find(|c| c.model == ModelKind::CarimaTrue && c.horizon == k && c.impact == label)
                        .and_then(|c| c.ape)
                        .map(|a| a * m)
                })
                .collect();
            if scaled.len() != shifts.len() {
                continue;
            }
            checked += 1;
            let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > 0.0 {
                worst = worst.max((hi - lo) / hi);
            }
        }
    }
    Verdict::new(
        ape_ok && checked > 0 && worst <= 0.02,
        format!(
            "APE at +1%, 1 month {} (4.18 +/- 15%); worst relative spread of APE*m {worst:.2e} over {checked} runs (2%)",
            fmt_values(&[ape1])
        ),
    )
}

fn irregular_effect(study: &StudyOutput) -> Verdict {
    let reg: Vec<Option<f64>> = [92, 184].iter().map(|&k| coverage(study, ModelKind::RegarimaTrue, "NS", k)).collect();
    let reg_ok = reg.iter().all(|v| v.is_some_and(|v| v <= 2.0));
    let ct: Vec<Option<f64>> = HORIZONS.iter().map(|&k| coverage(study, ModelKind::CarimaTrue, "NS", k)).collect();
    let cb: Vec<Option<f64>> = HORIZONS.iter().map(|&k| coverage(study, ModelKind::CarimaBic, "NS", k)).collect();
    let c_ok = ct.iter().chain(&cb).all(|&v| within(v, 94.0, 4.0));
    Verdict::new(
        reg_ok && c_ok,
        format!(
            "REG-ARIMA^TRUE at 3/6 months {} (<= 2); C-ARIMA^TRUE {}, C-ARIMA^BIC {} (94 +/- 4)",
            fmt_values(&reg),
            fmt_values(&ct),
            fmt_values(&cb)
        ),
    )
}

fn bic_recovery(study: &StudyOutput) -> Verdict {
    let rate = study.tables.bic_true_order_rate.map(|r| 100.0 * r);
    let chosen = study.records.iter().filter(|r| r.bic_order.is_some()).count();
    Verdict::new(
        chosen == 200 && within(rate, 74.0, 8.0),
        format!("true order chosen in {}% of {chosen} searches (74 +/- 8)", fmt_values(&[rate])),
    )
}

/// Gaussian and bootstrap p-values of the average effect, on null
/// replications of the simulation design fitted with the true orders.
fn bootstrap_agreement() -> Verdict {
    let cfg = StudyConfig::default();
    let t_star = cfg.dgp.t_star();
    let mut diffs = vec![Vec::new(); HORIZONS.len()];
    let mut errors = Vec::new();
    for seed in 0..100 {
        let mut rng = cfg.replication_rng(seed);
        let control = simulate_control(&cfg.dgp, &mut rng);
        let (y, x) = (control.series(), control.regressors());
        let run = || -> carima_core::Result<Vec<f64>> {
            let model = fit(&y.slice(0, t_star + 1)?, &x.slice(0, t_star + 1)?, &cfg.dgp.true_order(), &FitOptions::default())?;
            let end = t_star + 1 + HORIZONS[2];
            let effects = estimate_effects(&model, &y.slice(t_star + 1, end)?, &x.slice(t_star + 1, end)?)?;
            HORIZONS
                .iter()
                .map(|&k| {
                    let g = gaussian_test(&effects.original, Estimand::Average, k, 0.05)?;
                    let b = bootstrap_test(&model, &effects.original, Estimand::Average, k, 0.05, 2000, seed as u64)?;
                    Ok((g.p_value - b.p_value).abs())
                })
                .collect()
        };
        match run() {
            Ok(d) => d.into_iter().enumerate().for_each(|(i, v)| diffs[i].push(v)),
            Err(e) => errors.push(format!("seed {seed}: {e}")),
        }
    }
    let means: Vec<Option<f64>> = diffs
        .iter()
        .map(|d| (!d.is_empty()).then(|| d.iter().sum::<f64>() / d.len() as f64))
        .collect();
    let ok = errors.is_empty() && means.iter().all(|m| m.is_some_and(|m| m <= 0.02));
    let shown: Vec<String> = means.iter().map(|m| m.map_or("n/a".into(), |m| format!("{m:.4}"))).collect();
    Verdict::new(
        ok,
        format!(
            "mean |p_gauss - p_boot| at 1/3/6 months {} (<= 0.02) over 100 seeds{}",
            shown.join(" / "),
            if errors.is_empty() { String::new() } else { format!("; failures: {}", errors.join(", ")) }
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let o = Command::new(BIN).args(args).arg("--out").arg(out).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(String::from_utf8_lossy(&o.stderr).into_owned());
    }
    let mut bytes = std::fs::read(out.join("report.json")).map_err(|e| e.to_string())?;
    bytes.extend(std::fs::read(out.join("manifest.json")).map_err(|e| e.to_string())?);
    Ok(bytes)
}

fn write_simulated_csv(path: &Path) -> String {
    let cfg = StudyConfig::default();
    let control = simulate_control(&cfg.dgp, &mut cfg.replication_rng(3));
    let mut text = String::from("date,y,x1,x2\n");
    for (i, d) in cfg.dgp.dates().iter().enumerate() {
        let y = if i > cfg.dgp.t_star() { 1.1 * control.y[i] } else { control.y[i] };
        text.push_str(&format!("{d},{y},{},{}\n", control.x1[i], control.x2[i]));
    }
    std::fs::write(path, text).expect("write data");
    cfg.dgp.intervention.to_string()
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let study = tmp.path().join("study.toml");
    std::fs::write(&study, "n_reps = 4\nhorizons = [31, 92]\nmodels = [\"carima_true\", \"regarima_true\"]\n").expect("write config");
    let data = tmp.path().join("data.csv");
    let date = write_simulated_csv(&data);
    let sim = |workers: &str, dir: &str| {
        run_cli(
            &["simulate", "--config", study.to_str().unwrap(), "--seed", "77", "--workers", workers],
            &tmp.path().join(dir),
        )
    };
    let analyze = |workers: &str, dir: &str| {
        run_cli(
            &[
                "analyze", "--data", data.to_str().unwrap(), "--target", "y", "--regressors", "x1,x2",
                "--intervention-date", &date, "--horizons", "31,92", "--order", "1,1,1,1", "--diff", "0,0,7",
                "--test", "both", "--n-boot", "999", "--seed", "77", "--workers", workers,
            ],
            &tmp.path().join(dir),
        )
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, runs) in [
        ("simulate", [sim("1", "s1"), sim("1", "s2"), sim("3", "s3")]),
        ("analyze", [analyze("1", "a1"), analyze("1", "a2"), analyze("3", "a3")]),
    ] {
        match runs {
            [Ok(a), Ok(b), Ok(c)] => {
                let same = a == b && a == c;
                ok &= same;
                notes.push(format!("{name} identical over 2 runs and 1/3 workers: {same}"));
            }
            other => {
                ok = false;
                let err = other.into_iter().filter_map(Result::err).next().unwrap_or_default();
                notes.push(format!("{name} failed: {}", err.trim()));
            }
        }
    }
    Verdict::new(ok, notes.join("; "))
}

fn main() {
    let mut verdicts: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |n: u32, name: &'static str, v: Verdict| {
        println!("criterion {n:>2} {} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        verdicts.push((n, name, v));
    };
    report(1, "psi weights vs impulse response", psi_weights());
    report(2, "likelihood vs covariance density", likelihood());
    report(3, "difference inversion vs long division", inversion());
    report(4, "forecast error variance vs Monte Carlo", forecast_variance());

    let (study, elapsed) = timed(|| run_study(&study_config()));
    match study {
        Ok(study) => {
            report(5, "level-shift coverage", level_shift_coverage(&study, elapsed));
            report(6, "interval length", ci_length(&study));
            report(7, "absolute percentage error scaling", ape_scaling(&study));
            report(8, "irregular effect coverage", irregular_effect(&study));
            report(9, "BIC order recovery", bic_recovery(&study));
        }
        Err(e) => {
            for (n, name) in [(5, "level-shift coverage"), (6, "interval length"), (7, "absolute percentage error scaling"), (8, "irregular effect coverage"), (9, "BIC order recovery")] {
                report(n, name, Verdict::new(false, format!("study failed: {e}")));
            }
        }
    }
    report(10, "bootstrap and Gaussian p-values agree", bootstrap_agreement());
    report(11, "byte-identical reports", determinism());

    let failed: Vec<u32> = verdicts.iter().filter(|v| !v.2.passed).map(|v| v.0).collect();
    println!(
        "acceptance: {} of {} criteria passed{}",
        verdicts.len() - failed.len(),
        verdicts.len(),
        if failed.is_empty() { String::new() } else { format!("; failed {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

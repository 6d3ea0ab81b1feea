//! Monte-Carlo comparison of C-ARIMA and REG-ARIMA on simulated
//! interventions.

use std::fmt::Write as _;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::dgp::{simulate_control, DgpConfig};
use super::intervention::{apply_intervention, InterventionSpec, Treated};
use crate::causal::estimate_effects;
use crate::error::{Error, Result};
use crate::regarima::{fit_regarima, fit_regarima_auto};
use crate::sarima::{fit, select_order, FitOptions, FittedModel, ModelOrder, Regressors, SearchOptions};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    CarimaTrue,
    CarimaBic,
    RegarimaTrue,
    RegarimaBic,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::CarimaTrue,
        ModelKind::CarimaBic,
        ModelKind::RegarimaTrue,
        ModelKind::RegarimaBic,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::CarimaTrue => "C-ARIMA^TRUE",
            ModelKind::CarimaBic => "C-ARIMA^BIC",
            ModelKind::RegarimaTrue => "REG-ARIMA^TRUE",
            ModelKind::RegarimaBic => "REG-ARIMA^BIC",
        }
    }
}

fn default_horizons() -> Vec<usize> {
    vec![31, 92, 184]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub n_reps: usize,
    pub seed: u64,
    /// Worker threads. Results do not depend on it, so it is read but never
    /// written out.
    #[serde(skip_serializing)]
    pub workers: usize,
    pub alpha: f64,
    pub horizons: Vec<usize>,
    pub models: Vec<ModelKind>,
    pub interventions: Vec<InterventionSpec>,
    pub dgp: DgpConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n_reps: 200,
            seed: 20190630,
            workers: 1,
            alpha: 0.05,
            horizons: default_horizons(),
            models: ModelKind::ALL.to_vec(),
            interventions: InterventionSpec::standard_set(),
            dgp: DgpConfig::default(),
        }
    }
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.dgp.validate()?;
        if self.n_reps == 0 {
            return Err(Error::Config("n_reps must be at least 1".into()));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::EmptyPostPeriod);
        }
        let post = self.dgp.len() - self.dgp.t_star() - 1;
        if let Some(&k) = self.horizons.iter().max() {
            if k > post {
                return Err(Error::Config(format!(
                    "horizon {k} exceeds the {post} simulated post-period days"
                )));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1)".into()));
        }
        if self.models.is_empty() || self.interventions.is_empty() {
            return Err(Error::Config("need at least one model and one intervention".into()));
        }
        Ok(())
    }

    /// Random stream of replication `rep`.
    pub fn replication_rng(&self, rep: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(rep as u64);
        rng
    }
}

/// Metrics of one model on one intervention at one horizon in one
/// replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMetrics {
    pub model: ModelKind,
    pub impact: String,
    pub horizon: usize,
    pub ci_length: f64,
    /// `None` when the true average effect is zero.
    pub ape: Option<f64>,
    /// Share of covered true effects, in `[0, 1]`.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub metrics: Vec<CellMetrics>,
    /// Order chosen by the C-ARIMA BIC search.
    pub bic_order: Option<ModelOrder>,
    pub failures: Vec<(ModelKind, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model: ModelKind,
    pub impact: String,
    pub horizon: usize,
    pub ci_length: f64,
    pub ape: Option<f64>,
    /// Percent.
    pub coverage: f64,
    /// Replications entering the averages.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTables {
    pub n_reps: usize,
    pub horizons: Vec<usize>,
    pub rows: Vec<TableRow>,
    /// Failed fits per model.
    pub failures: Vec<(ModelKind, usize)>,
    /// Share of replications where the BIC search picked the true orders.
    pub bic_true_order_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOutput {
    pub tables: StudyTables,
    pub records: Vec<ReplicationRecord>,
}

fn post_mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ape(estimate: f64, truth: f64) -> Option<f64> {
    (truth != 0.0).then(|| (estimate - truth).abs() / truth.abs())
}

struct RepData<'a> {
    cfg: &'a StudyConfig,
    y: TimeSeries,
    x: Regressors,
    treated: Vec<Treated>,
    t_star: usize,
    z: f64,
}

impl RepData<'_> {
    fn post_slice(&self, v: &[f64], k: usize) -> Result<TimeSeries> {
        TimeSeries::from_values(&v[self.t_star + 1..self.t_star + 1 + k])
    }

    fn carima_metrics(&self, model: &FittedModel, kind: ModelKind, out: &mut Vec<CellMetrics>) -> Result<()> {
        let k_max = *self.cfg.horizons.iter().max().expect("validated");
        let x_post = self.x.slice(self.t_star + 1, self.t_star + 1 + k_max)?;
        for (spec, tr) in self.cfg.interventions.iter().zip(&self.treated) {
            let post = self.post_slice(&tr.y, k_max)?;
            let e = estimate_effects(model, &post, &x_post)?.original;
            let tau = &tr.tau[self.t_star + 1..];
            for &k in &self.cfg.horizons {
                let tau_bar_hat = e.tau_bar[k - 1].expect("complete data");
                let covered = (0..k)
                    .filter(|&h| {
                        let est = e.tau[h].expect("complete data");
                        (est - tau[h]).abs() <= self.z * e.var_tau[h].sqrt()
                    })
                    .count();
                out.push(CellMetrics {
                    model: kind,
                    impact: spec.label(),
                    horizon: k,
                    ci_length: 2.0 * self.z * e.var_tau_bar[k - 1].expect("complete data").sqrt(),
                    ape: ape(tau_bar_hat, post_mean(&tau[..k])),
                    coverage: covered as f64 / k as f64,
                });
            }
        }
        Ok(())
    }

    fn regarima_metrics(&self, kind: ModelKind, warm: Option<&FittedModel>, out: &mut Vec<CellMetrics>) -> Result<()> {
        let order = self.cfg.dgp.true_order();
        let opts = FitOptions {
            init: warm.map(|m| m.params.clone()),
            ..FitOptions::default()
        };
        for (spec, tr) in self.cfg.interventions.iter().zip(&self.treated) {
            let tau = &tr.tau[self.t_star + 1..];
            for &k in &self.cfg.horizons {
                let end = self.t_star + 1 + k;
                let y = TimeSeries::from_values(&tr.y[..end])?;
                let x = self.x.slice(0, end)?;
                let r = match kind {
                    ModelKind::RegarimaTrue => fit_regarima(&y, &x, self.t_star, &order, &opts, self.cfg.alpha)?,
                    _ => fit_regarima_auto(&y, &x, self.t_star, order.diff, &SearchOptions::default(), self.cfg.alpha)?,
                };
                let truth = post_mean(&tau[..k]);
                out.push(CellMetrics {
                    model: kind,
                    impact: spec.label(),
                    horizon: k,
                    ci_length: r.upper - r.lower,
                    ape: ape(r.beta0_hat, truth),
                    coverage: f64::from(u8::from(r.lower <= truth && truth <= r.upper)),
                });
            }
        }
        Ok(())
    }
}

/// Runs one replication; failures of a model are recorded and its cells
/// left out.
pub fn run_replication(cfg: &StudyConfig, rep: usize) -> ReplicationRecord {
    let mut rng = cfg.replication_rng(rep);
    let control = simulate_control(&cfg.dgp, &mut rng);
    let t_star = cfg.dgp.t_star();
    let z = Normal::new(0.0, 1.0)
        .expect("unit normal")
        .inverse_cdf(1.0 - cfg.alpha / 2.0);
    let data = RepData {
        cfg,
        y: control.series(),
        x: control.regressors(),
        treated: cfg
            .interventions
            .iter()
            .map(|s| apply_intervention(&control.y, s, t_star))
            .collect(),
        t_star,
        z,
    };
    let mut metrics = Vec::new();
    let mut failures = Vec::new();
    let mut bic_order = None;

    let pre = |d: &RepData| -> Result<(TimeSeries, Regressors)> {
        Ok((d.y.slice(0, t_star + 1)?, d.x.slice(0, t_star + 1)?))
    };
    let wants = |k: ModelKind| cfg.models.contains(&k);

    let mut true_fit: Option<FittedModel> = None;
    if wants(ModelKind::CarimaTrue) || wants(ModelKind::RegarimaTrue) {
        let res = pre(&data).and_then(|(y, x)| fit(&y, &x, &cfg.dgp.true_order(), &FitOptions::default()));
        match res {
            Ok(m) => true_fit = Some(m),
            Err(e) => failures.push((ModelKind::CarimaTrue, e.to_string())),
        }
    }
    if wants(ModelKind::CarimaTrue) {
        if let Some(m) = &true_fit {
            let mut cells = Vec::new();
            match data.carima_metrics(m, ModelKind::CarimaTrue, &mut cells) {
                Ok(()) => metrics.extend(cells),
                Err(e) => failures.push((ModelKind::CarimaTrue, e.to_string())),
            }
        }
    }
    if wants(ModelKind::CarimaBic) {
        let search = SearchOptions::default();
        let res = pre(&data).and_then(|(y, x)| select_order(&y, &x, cfg.dgp.true_order().diff, &search));
        let mut cells = Vec::new();
        match res.and_then(|m| {
            bic_order = Some(m.order);
            data.carima_metrics(&m, ModelKind::CarimaBic, &mut cells)
        }) {
            Ok(()) => metrics.extend(cells),
            Err(e) => failures.push((ModelKind::CarimaBic, e.to_string())),
        }
    }
    for kind in [ModelKind::RegarimaTrue, ModelKind::RegarimaBic] {
        if wants(kind) {
            let mut cells = Vec::new();
            match data.regarima_metrics(kind, true_fit.as_ref(), &mut cells) {
                Ok(()) => metrics.extend(cells),
                Err(e) => failures.push((kind, e.to_string())),
            }
        }
    }
    for (kind, msg) in &failures {
        warn!("replication {rep}: {} failed: {msg}", kind.label());
    }
    ReplicationRecord {
        rep,
        metrics,
        bic_order,
        failures,
    }
}

/// Aggregates replication records into the study tables. Sums run in
/// replication order, so the result only depends on the set of records.
pub fn aggregate(cfg: &StudyConfig, records: &[ReplicationRecord]) -> StudyTables {
    let mut rows = Vec::new();
    for &model in &cfg.models {
        for spec in &cfg.interventions {
            let impact = spec.label();
            for &horizon in &cfg.horizons {
                let cells: Vec<&CellMetrics> = records
                    .iter()
                    .flat_map(|r| r.metrics.iter())
                    .filter(|c| c.model == model && c.horizon == horizon && c.impact == impact)
                    .collect();
                let n = cells.len();
                if n == 0 {
                    continue;
                }
                let apes: Vec<f64> = cells.iter().filter_map(|c| c.ape).collect();
                rows.push(TableRow {
                    model,
                    impact: impact.clone(),
                    horizon,
                    ci_length: cells.iter().map(|c| c.ci_length).sum::<f64>() / n as f64,
                    ape: (!apes.is_empty()).then(|| apes.iter().sum::<f64>() / apes.len() as f64),
                    coverage: 100.0 * cells.iter().map(|c| c.coverage).sum::<f64>() / n as f64,
                    n,
                });
            }
        }
    }
    let failures = cfg
        .models
        .iter()
        .map(|&m| {
            let count = records
                .iter()
                .filter(|r| r.failures.iter().any(|(k, _)| *k == m))
                .count();
            (m, count)
        })
        .collect();
    let true_key = cfg.dgp.true_order();
    let chosen: Vec<&ModelOrder> = records.iter().filter_map(|r| r.bic_order.as_ref()).collect();
    let bic_true_order_rate = (!chosen.is_empty())
        .then(|| chosen.iter().filter(|o| ***o == true_key).count() as f64 / chosen.len() as f64);
    StudyTables {
        n_reps: records.len(),
        horizons: cfg.horizons.clone(),
        rows,
        failures,
        bic_true_order_rate,
    }
}

/// Runs the study on `cfg.workers` threads. Replications are keyed by index
/// and collected in order, so output does not depend on the worker count.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let records: Vec<ReplicationRecord> = pool.install(|| {
        (0..cfg.n_reps)
            .into_par_iter()
            .map(|rep| {
                let r = run_replication(cfg, rep);
                if (rep + 1) % 25 == 0 {
                    info!("replication {} of {} done", rep + 1, cfg.n_reps);
                }
                r
            })
            .collect()
    });
    let tables = aggregate(cfg, &records);
    Ok(StudyOutput { tables, records })
}

impl StudyTables {
    pub fn row(&self, model: ModelKind, impact: &str, horizon: usize) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.impact == impact && r.horizon == horizon)
    }

    /// Long format, one row per model, impact and horizon.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Config(e.to_string());
        w.write_record(["model", "impact", "horizon", "ci_length", "ape", "coverage", "n"])
            .map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.model.label().to_string(),
                r.impact.clone(),
                r.horizon.to_string(),
                format!("{:.6}", r.ci_length),
                r.ape.map(|a| format!("{a:.6}")).unwrap_or_default(),
                format!("{:.4}", r.coverage),
                r.n.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Three blocks (CI length, APE, coverage), impacts down the rows and
    /// models by horizon across the columns.
    pub fn to_text(&self) -> String {
        let mut models: Vec<ModelKind> = self.rows.iter().map(|r| r.model).collect();
        models.dedup();
        let mut impacts: Vec<String> = Vec::new();
        for r in &self.rows {
            if !impacts.contains(&r.impact) {
                impacts.push(r.impact.clone());
            }
        }
        let mut out = String::new();
        let blocks: [(&str, fn(&TableRow) -> Option<f64>); 3] = [
            ("CI length", |r| Some(r.ci_length)),
            ("APE", |r| r.ape),
            ("Coverage (%)", |r| Some(r.coverage)),
        ];
        for (title, get) in blocks {
            let _ = writeln!(out, "{title}");
            let _ = write!(out, "{:<8}", "impact");
            for m in &models {
                for h in &self.horizons {
                    let _ = write!(out, " {:>22}", format!("{} h={h}", m.label()));
                }
            }
            out.push('\n');
            for imp in &impacts {
                let _ = write!(out, "{imp:<8}");
                for &m in &models {
                    for &h in &self.horizons {
                        let cell = self
                            .row(m, imp, h)
                            .and_then(get)
                            .map(|v| format!("{v:.3}"))
                            .unwrap_or_else(|| "-".into());
                        let _ = write!(out, " {cell:>22}");
                    }
                }
                out.push('\n');
            }
            out.push('\n');
        }
        let _ = writeln!(out, "replications: {}", self.n_reps);
        for (m, n) in &self.failures {
            if *n > 0 {
                let _ = writeln!(out, "failed replications, {}: {n}", m.label());
            }
        }
        if let Some(rate) = self.bic_true_order_rate {
            let _ = writeln!(out, "BIC picked the true orders in {:.1}% of replications", 100.0 * rate);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> StudyConfig {
        StudyConfig {
            n_reps: 2,
            horizons: vec![7, 14],
            models: vec![ModelKind::CarimaTrue, ModelKind::RegarimaTrue],
            interventions: vec![
                InterventionSpec::LevelShift { percent: 10.0 },
                InterventionSpec::LevelShift { percent: 50.0 },
            ],
            dgp: DgpConfig {
                start: chrono::NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
                ..DgpConfig::default()
            },
            ..StudyConfig::default()
        }
    }

    #[test]
    fn config_toml_round_trip() {
        let cfg = StudyConfig::default();
        let back = StudyConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn small_study_is_deterministic_and_shaped() {
        let cfg = small();
        let a = run_study(&cfg).unwrap();
        let b = run_study(&StudyConfig { workers: 2, ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tables.rows.len(), 2 * 2 * 2);
        for r in &a.tables.rows {
            assert!((0.0..=100.0).contains(&r.coverage));
            assert!(r.ape.unwrap() >= 0.0);
        }
        // C-ARIMA error does not depend on the size of a level shift
        let c10 = a.tables.row(ModelKind::CarimaTrue, "+10%", 14).unwrap();
        let c50 = a.tables.row(ModelKind::CarimaTrue, "+50%", 14).unwrap();
        assert!((c10.ci_length - c50.ci_length).abs() < 1e-9);
        assert!((c10.ape.unwrap() * 10.0 - c50.ape.unwrap() * 50.0).abs() < 1e-6);
        assert!(a.tables.to_text().contains("C-ARIMA^TRUE h=7"));
        assert_eq!(a.tables.to_csv().unwrap().lines().count(), 9);
    }
}

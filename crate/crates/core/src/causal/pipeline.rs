use chrono::NaiveDate;
use log::info;
use serde::{Deserialize, Serialize};

use super::effects::{estimate_effects, EffectPath, Estimand, Scale};
use super::inference::{bootstrap_test, gaussian_test, EffectTest, MIN_BOOT};
use super::treatment::{validate_treatment, TreatmentPath};
use crate::error::{Error, Result};
use crate::sarima::{fit, select_order, FitOptions, FittedModel, ModelOrder, Regressors, SearchOptions};
use crate::series::{DiffSpec, TimeSeries};

/// ARMA orders when the model is specified by hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmaOrders {
    #[serde(default)]
    pub p: usize,
    #[serde(default)]
    pub q: usize,
    #[serde(default, rename = "P")]
    pub seasonal_p: usize,
    #[serde(default, rename = "Q")]
    pub seasonal_q: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestChoice {
    #[default]
    Gaussian,
    Bootstrap,
    Both,
}

impl TestChoice {
    fn gaussian(self) -> bool {
        matches!(self, TestChoice::Gaussian | TestChoice::Both)
    }

    fn bootstrap(self) -> bool {
        matches!(self, TestChoice::Bootstrap | TestChoice::Both)
    }
}

fn default_true() -> bool {
    true
}

fn default_alpha() -> f64 {
    0.05
}

fn default_n_boot() -> usize {
    2000
}

/// Settings of one C-ARIMA analysis, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Name of the response column.
    pub series: String,
    #[serde(default)]
    pub regressors: Vec<String>,
    /// Zero-based index of the last untreated period.
    #[serde(default)]
    pub intervention_index: Option<usize>,
    /// Date of the last untreated period (needs a dated series).
    #[serde(default)]
    pub intervention_date: Option<NaiveDate>,
    pub horizons: Vec<usize>,
    #[serde(default)]
    pub order: Option<ArmaOrders>,
    /// Select the ARMA orders by BIC instead of using `order`.
    #[serde(default)]
    pub auto: bool,
    #[serde(default)]
    pub diff: DiffSpec,
    #[serde(default)]
    pub log_transform: bool,
    #[serde(default = "default_true")]
    pub intercept: bool,
    #[serde(default)]
    pub test: TestChoice,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,
}

impl AnalysisConfig {
    pub fn new(series: impl Into<String>, t_star: usize, horizons: Vec<usize>) -> Self {
        Self {
            series: series.into(),
            regressors: Vec::new(),
            intervention_index: Some(t_star),
            intervention_date: None,
            horizons,
            order: None,
            auto: false,
            diff: DiffSpec::none(),
            log_transform: false,
            intercept: true,
            test: TestChoice::Gaussian,
            alpha: 0.05,
            seed: None,
            n_boot: 2000,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.diff.validate()?;
        match (self.intervention_index, self.intervention_date) {
            (None, None) => {
                return Err(Error::Config(
                    "one of intervention_index or intervention_date is required".into(),
                ))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "give intervention_index or intervention_date, not both".into(),
                ))
            }
            _ => {}
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(Error::EmptyPostPeriod);
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.auto && self.order.is_some() {
            return Err(Error::Config("give order or auto = true, not both".into()));
        }
        if self.test.bootstrap() {
            if self.seed.is_none() {
                return Err(Error::Config("bootstrap tests need a seed".into()));
            }
            if self.n_boot < MIN_BOOT {
                return Err(Error::Config(format!("n_boot must be at least {MIN_BOOT}")));
            }
        }
        Ok(())
    }

    /// Resolves the last untreated index against the series.
    pub fn t_star(&self, y: &TimeSeries) -> Result<usize> {
        if let Some(i) = self.intervention_index {
            return Ok(i);
        }
        let date = self
            .intervention_date
            .ok_or_else(|| Error::Config("no intervention given".into()))?;
        let dates = y
            .dates()
            .ok_or_else(|| Error::Config("intervention_date needs a dated series".into()))?;
        dates
            .iter()
            .position(|d| *d == date)
            .ok_or_else(|| Error::BadIndex(format!("intervention date {date} is outside the data")))
    }
}

/// Average effect at one horizon with its multiplicative reading when the
/// model runs on logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonSummary {
    pub horizon: usize,
    pub n_observed: usize,
    pub tau_bar: Option<f64>,
    /// `exp(tau_bar) - 1`, only for log-transformed analyses.
    pub relative_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalReport {
    pub series: String,
    pub t_star: usize,
    pub intervention_date: Option<NaiveDate>,
    pub horizons: Vec<usize>,
    pub log_transform: bool,
    pub model: FittedModel,
    pub transformed: EffectPath,
    pub original: EffectPath,
    pub tests: Vec<EffectTest>,
    /// Counterfactual prediction of the (possibly logged) response.
    pub counterfactual: Vec<f64>,
    pub counterfactual_variance: Vec<f64>,
    pub observed: Vec<Option<f64>>,
    /// Dates of the post period, when the series is dated.
    pub post_dates: Option<Vec<NaiveDate>>,
    pub summaries: Vec<HorizonSummary>,
    /// Largest disagreement between the two original-scale computations.
    pub cross_check: Option<f64>,
    pub notes: Vec<String>,
}

impl CausalReport {
    pub fn path(&self, scale: Scale) -> &EffectPath {
        match scale {
            Scale::Transformed => &self.transformed,
            Scale::Original => &self.original,
        }
    }

    pub fn find_test(&self, estimand: Estimand, scale: Scale, horizon: usize, method: super::inference::TestMethod) -> Option<&EffectTest> {
        self.tests.iter().find(|t| {
            t.estimand == estimand && t.scale == scale && t.horizon == horizon && t.method == method
        })
    }
}

/// Fits on the pre-period, forecasts the counterfactual over the longest
/// horizon and tests every estimand at every horizon.
///
/// `x` holds the regressors named in `config`, aligned with `y`.
pub fn run_carima(config: &AnalysisConfig, y: &TimeSeries, x: &Regressors) -> Result<CausalReport> {
    config.validate()?;
    if x.names != config.regressors {
        return Err(Error::Config(format!(
            "regressors {:?} do not match the configured {:?}",
            x.names, config.regressors
        )));
    }
    let mut horizons = config.horizons.clone();
    horizons.sort_unstable();
    horizons.dedup();
    let t_star = config.t_star(y)?;
    let k_max = *horizons.last().ok_or(Error::EmptyPostPeriod)?;
    if t_star + 1 >= y.len() {
        return Err(Error::EmptyPostPeriod);
    }
    let violations = validate_treatment(&TreatmentPath::persistent(y.len(), t_star));
    if !violations.is_empty() {
        return Err(Error::BadIndex(violations[0].label().to_string()));
    }
    if t_star + k_max >= y.len() {
        return Err(Error::BadIndex(format!(
            "horizon {k_max} runs past the end of the data ({} post-period points)",
            y.len() - t_star - 1
        )));
    }

    let y_model = if config.log_transform {
        if y.values().iter().flatten().any(|v| *v <= 0.0) {
            return Err(Error::InvalidSpec("log transform needs positive data".into()));
        }
        y.map(f64::ln)
    } else {
        y.clone()
    };
    let pre_y = y_model.slice(0, t_star + 1)?;
    let pre_x = x.slice(0, t_star + 1)?;
    let post_y = y_model.slice(t_star + 1, t_star + 1 + k_max)?;
    let post_x = x.slice(t_star + 1, t_star + 1 + k_max)?;

    let fit_opts = FitOptions {
        intercept: config.intercept,
        ..FitOptions::default()
    };
    let model: FittedModel = if config.auto {
        let search = SearchOptions {
            fit: fit_opts,
            ..SearchOptions::default()
        };
        select_order(&pre_y, &pre_x, config.diff, &search)?
    } else {
        let o = config.order.unwrap_or_default();
        let order = ModelOrder::new(o.p, o.q, o.seasonal_p, o.seasonal_q, config.diff)?;
        fit(&pre_y, &pre_x, &order, &fit_opts)?
    };
    info!("fitted {} with loglik {:.3}", model.order, model.loglik);

    let effects = estimate_effects(&model, &post_y, &post_x)?;
    let mut tests = Vec::new();
    for &k in &horizons {
        for scale in [Scale::Transformed, Scale::Original] {
            let path = match scale {
                Scale::Transformed => &effects.transformed,
                Scale::Original => &effects.original,
            };
            for estimand in Estimand::ALL {
                if path.estimate(estimand, k)?.is_none() {
                    continue;
                }
                if config.test.gaussian() {
                    tests.push(gaussian_test(path, estimand, k, config.alpha)?);
                }
                if config.test.bootstrap() {
                    let seed = config.seed.unwrap_or_default();
                    tests.push(bootstrap_test(&model, path, estimand, k, config.alpha, config.n_boot, seed)?);
                }
            }
        }
    }

    let summaries = horizons
        .iter()
        .map(|&k| {
            let tau_bar = effects.original.tau_bar[k - 1];
            HorizonSummary {
                horizon: k,
                n_observed: effects.original.n_observed[k - 1],
                tau_bar,
                relative_change: if config.log_transform {
                    tau_bar.map(|v| v.exp() - 1.0)
                } else {
                    None
                },
            }
        })
        .collect();

    let mut notes = vec![
        "variances plug in the estimated parameters and ignore their sampling error".to_string(),
    ];
    if !model.user_regressors().is_empty() {
        notes.push("regression coefficient uncertainty is not propagated into effect variances".into());
    }
    let n_missing = post_y.n_missing();
    if n_missing > 0 {
        notes.push(format!(
            "{n_missing} post-period observations missing: cumulative and average effects run over observed horizons and average by their count"
        ));
    }
    if config.intercept && !model.intercept {
        notes.push("intercept dropped because the model differences the data".into());
    }

    let intervention_date = y.dates().map(|d| d[t_star]);
    let post_dates = y
        .dates()
        .map(|d| d[t_star + 1..t_star + 1 + k_max].to_vec());
    Ok(CausalReport {
        series: config.series.clone(),
        t_star,
        intervention_date,
        horizons,
        log_transform: config.log_transform,
        counterfactual: effects.forecast.mean.clone(),
        counterfactual_variance: effects.forecast.level_error_variance.clone(),
        observed: post_y.values().to_vec(),
        post_dates,
        summaries,
        cross_check: effects.cross_check,
        transformed: effects.transformed,
        original: effects.original,
        model,
        tests,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let text = r#"
series = "sales"
regressors = ["price"]
intervention_date = "2019-06-30"
horizons = [31, 92]
order = { p = 1, q = 1, P = 1, Q = 1 }
diff = { d = 0, D = 0, s = 7 }
log_transform = true
test = "both"
seed = 11
"#;
        let cfg = AnalysisConfig::from_toml(text).unwrap();
        assert_eq!(cfg.order.unwrap().seasonal_q, 1);
        assert_eq!(cfg.diff.s, 7);
        assert_eq!(cfg.n_boot, 2000);
        let back = AnalysisConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn config_rejects_inconsistent_settings() {
        let base = "series = \"y\"\nhorizons = [3]\n";
        assert!(AnalysisConfig::from_toml(base).is_err());
        let both = format!("{base}intervention_index = 4\ntest = \"bootstrap\"\n");
        assert!(matches!(AnalysisConfig::from_toml(&both), Err(Error::Config(_))));
        let typo = format!("{base}intervention_index = 4\nhorizon = 3\n");
        assert!(AnalysisConfig::from_toml(&typo).is_err());
    }

    #[test]
    fn empty_post_period() {
        let y = TimeSeries::from_values(&[1.0; 20]).unwrap();
        let cfg = AnalysisConfig::new("y", 19, vec![1]);
        assert!(matches!(run_carima(&cfg, &y, &Regressors::none()), Err(Error::EmptyPostPeriod)));
        let cfg = AnalysisConfig::new("y", 10, vec![]);
        assert!(matches!(run_carima(&cfg, &y, &Regressors::none()), Err(Error::EmptyPostPeriod)));
    }

    #[test]
    fn log_scale_summary() {
        let y: Vec<f64> = (0..80)
            .map(|t| {
                let wiggle = 1.0 + 0.05 * ((t * 37 % 11) as f64 - 5.0) / 5.0;
                if t > 59 { 120.0 * wiggle } else { 100.0 * wiggle }
            })
            .collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let mut cfg = AnalysisConfig::new("y", 59, vec![10, 20]);
        cfg.log_transform = true;
        let r = run_carima(&cfg, &ts, &Regressors::none()).unwrap();
        let rel = r.summaries[1].relative_change.unwrap();
        assert!((rel - 0.2).abs() < 0.03, "{rel}");
        assert_eq!(r.tests.len(), 2 * 2 * 3);
        assert_eq!(r.counterfactual.len(), r.observed.len());
    }
}

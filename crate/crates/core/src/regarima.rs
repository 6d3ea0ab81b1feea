//! Comparator: regression with ARIMA errors over the whole series, with a
//! step dummy switching on after the intervention.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::sarima::{
    fit, parameter_covariance, search_orders, FitOptions, FittedModel, ModelOrder, Regressors,
    SearchOptions,
};
use crate::series::{DiffSpec, TimeSeries};

pub const STEP_DUMMY: &str = "step";

/// `n_pre` zeros followed by ones up to length `len`.
pub fn build_step_dummy(len: usize, n_pre: usize) -> Result<TimeSeries> {
    if n_pre == 0 || n_pre >= len {
        return Err(Error::BadIndex(format!(
            "step must switch on strictly inside the series: {n_pre} untreated of {len}"
        )));
    }
    let v: Vec<f64> = (0..len).map(|t| if t < n_pre { 0.0 } else { 1.0 }).collect();
    TimeSeries::from_values(&v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDummy {
    pub name: String,
    /// Index of the last zero.
    pub t_star: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegArimaResult {
    pub beta0_hat: f64,
    pub std_error: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub model: FittedModel,
    pub dummy: StepDummy,
}

fn design(y: &TimeSeries, x: &Regressors, t_star: usize) -> Result<Regressors> {
    let mut design = x.clone();
    design.push(STEP_DUMMY, build_step_dummy(y.len(), t_star + 1)?)?;
    Ok(design)
}

fn wald(model: FittedModel, y: &TimeSeries, design: &Regressors, t_star: usize, alpha: f64) -> Result<RegArimaResult> {
    let idx = model
        .regressor_names
        .iter()
        .position(|n| n == STEP_DUMMY)
        .ok_or_else(|| Error::InvalidSpec("step dummy missing from the fitted model".into()))?;
    let cov = parameter_covariance(&model, y, design)?;
    let dim = model.order.n_arma() + model.params.beta.len() + 1;
    let pos = model.order.n_arma() + idx;
    let var = cov[pos * dim + pos];
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::DegenerateVariance(format!("step coefficient variance {var}")));
    }
    let se = var.sqrt();
    let beta0 = model.params.beta[idx];
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    let z = beta0 / se;
    let crit = n.inverse_cdf(1.0 - alpha / 2.0);
    Ok(RegArimaResult {
        beta0_hat: beta0,
        std_error: se,
        statistic: z,
        p_value: (2.0 * n.cdf(-z.abs())).min(1.0),
        lower: beta0 - crit * se,
        upper: beta0 + crit * se,
        alpha,
        model,
        dummy: StepDummy {
            name: STEP_DUMMY.into(),
            t_star,
            len: y.len(),
        },
    })
}

/// Fits `y = X beta + beta0 D + z` over the whole series, `D` being zero
/// through index `t_star` and one afterwards, and tests `beta0 = 0` with the
/// observed-information standard error.
pub fn fit_regarima(
    y: &TimeSeries,
    x: &Regressors,
    t_star: usize,
    order: &ModelOrder,
    opts: &FitOptions,
    alpha: f64,
) -> Result<RegArimaResult> {
    let design = design(y, x, t_star)?;
    let model = fit(y, &design, order, opts)?;
    wald(model, y, &design, t_star, alpha)
}

/// As [`fit_regarima`] with the orders chosen by BIC; the dummy stays in the
/// regressor set for every candidate.
pub fn fit_regarima_auto(
    y: &TimeSeries,
    x: &Regressors,
    t_star: usize,
    diff: DiffSpec,
    search: &SearchOptions,
    alpha: f64,
) -> Result<RegArimaResult> {
    let design = design(y, x, t_star)?;
    let model = search_orders(y, &design, diff, search)?.best;
    wald(model, y, &design, t_star, alpha)
}

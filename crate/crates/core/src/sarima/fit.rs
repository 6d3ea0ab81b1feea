//! Maximum-likelihood fitting.

use log::warn;
use serde::{Deserialize, Serialize};

use super::likelihood::{
    arma_from_unconstrained, arma_to_unconstrained, filter_sums, loglik_from_sums, prepare,
    profile_from_sums, Prepared, Profile,
};
use super::model::{ModelOrder, Regressors, SarimaParams};
use super::optim::{bfgs, numeric_hessian, simplex_with_restarts, OptimOptions};
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::series::TimeSeries;

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Add a constant regressor. Ignored (with a warning) when the model
    /// differences the data, since the differenced constant vanishes.
    pub intercept: bool,
    pub optim: OptimOptions,
    /// Warm start for the ARMA coefficients; missing or surplus lags are
    /// padded with zeros or dropped.
    pub init: Option<SarimaParams>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            intercept: true,
            optim: OptimOptions::default(),
            init: None,
        }
    }
}

/// State needed to continue the model past the end of the fitting sample.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct ForecastState {
    /// Predicted state of `T(y) - T(X) beta` for the first out-of-sample slot.
    pub state: Vec<f64>,
    /// Last `A` undifferenced responses.
    pub y_tail: Vec<Option<f64>>,
    /// Last `A` undifferenced values of each user regressor.
    pub x_tail: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub order: ModelOrder,
    pub params: SarimaParams,
    pub loglik: f64,
    pub bic: f64,
    /// One-step prediction errors scaled by `sqrt(F_t)`, i.e. innovations on
    /// the scale of `sigma`; missing where the differenced data is missing.
    pub residuals: TimeSeries,
    /// Differenced observations entering the likelihood.
    pub n_obs: usize,
    /// Free parameters counted by the BIC (ARMA, regression and scale).
    pub n_params: usize,
    /// Names matching `params.beta`, intercept first when present.
    pub regressor_names: Vec<String>,
    pub intercept: bool,
    pub converged: bool,
    pub evaluations: usize,
    pub(crate) forecast_state: ForecastState,
}

impl FittedModel {
    /// User-supplied regressor names (excluding the intercept).
    pub fn user_regressors(&self) -> &[String] {
        if self.intercept {
            &self.regressor_names[1..]
        } else {
            &self.regressor_names
        }
    }

    pub fn sigma2(&self) -> f64 {
        self.params.sigma2
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.regressor_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.params.beta[i])
    }

    pub(crate) fn has_forecast_state(&self) -> bool {
        !self.forecast_state.state.is_empty()
    }
}

pub(crate) fn design(
    y: &TimeSeries,
    x: &Regressors,
    order: &ModelOrder,
    intercept: bool,
) -> Result<(Regressors, bool)> {
    if !intercept {
        return Ok((x.clone(), false));
    }
    if !order.diff.is_identity() {
        warn!("dropping intercept: it vanishes under differencing {}", order);
        return Ok((x.clone(), false));
    }
    Ok((x.with_intercept(y.len())?, true))
}

fn adapt(src: &[f64], len: usize) -> Vec<f64> {
    (0..len).map(|i| src.get(i).copied().unwrap_or(0.0)).collect()
}

fn start_vector(order: &ModelOrder, init: Option<&SarimaParams>) -> Vec<f64> {
    let zeros = vec![0.0; order.n_arma()];
    let Some(init) = init else { return zeros };
    let adapted = SarimaParams {
        ar: adapt(&init.ar, order.p),
        ma: adapt(&init.ma, order.q),
        seasonal_ar: adapt(&init.seasonal_ar, order.seasonal_p),
        seasonal_ma: adapt(&init.seasonal_ma, order.seasonal_q),
        beta: Vec::new(),
        sigma2: 1.0,
    };
    arma_to_unconstrained(&adapted).unwrap_or(zeros)
}

pub fn fit(y: &TimeSeries, x: &Regressors, order: &ModelOrder, opts: &FitOptions) -> Result<FittedModel> {
    order.validate()?;
    let (design, intercept) = design(y, x, order, opts.intercept)?;
    let prep = prepare(y, &design, &order.diff)?;
    let n_obs = prep.n_observed();
    let n_params = order.n_arma() + prep.n_regressors() + 1;
    if n_obs <= n_params + 5 {
        return Err(Error::TooFewObservations {
            n: n_obs,
            needed: n_params + 5,
        });
    }

    let objective = |u: &[f64]| -> f64 {
        let arma = arma_from_unconstrained(order, u);
        match filter_sums(order, &arma, &prep, false).and_then(|(s, _)| profile_from_sums(&s)) {
            Ok(p) => -p.loglik,
            Err(_) => f64::INFINITY,
        }
    };
    let mut objective = objective;

    let (u_best, evals, converged) = if order.n_arma() == 0 {
        (Vec::new(), 1, true)
    } else {
        let x0 = start_vector(order, opts.init.as_ref());
        let mut optim = opts.optim.clone();
        if opts.init.is_some() {
            optim.step = optim.step.min(0.2);
        }
        let simplex = simplex_with_restarts(&mut objective, &x0, &optim);
        let polish = bfgs(&mut objective, &simplex.x, simplex.f, &optim);
        let (x, f, conv) = if polish.f <= simplex.f {
            (polish.x, polish.f, polish.converged || simplex.converged)
        } else {
            (simplex.x, simplex.f, simplex.converged)
        };
        if !f.is_finite() {
            return Err(Error::OptimizerDiverged {
                loglik: -f,
                best: None,
            });
        }
        (x, simplex.evals + polish.evals, conv)
    };

    let arma = arma_from_unconstrained(order, &u_best);
    let model = assemble(y, x, &design, intercept, order, arma, &prep, n_params, converged, evals)?;
    if !converged {
        warn!("optimizer did not converge for {} after {} evaluations", order, evals);
    }
    Ok(model)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    y: &TimeSeries,
    user_x: &Regressors,
    design: &Regressors,
    intercept: bool,
    order: &ModelOrder,
    arma: SarimaParams,
    prep: &Prepared,
    n_params: usize,
    converged: bool,
    evaluations: usize,
) -> Result<FittedModel> {
    let (sums, detail) = filter_sums(order, &arma, prep, true)?;
    let Profile {
        beta,
        sigma2,
        loglik,
    } = profile_from_sums(&sums)?;
    let detail = detail.expect("detail requested");

    let residuals: Vec<Option<f64>> = (0..prep.observed.len())
        .map(|t| {
            prep.observed[t].then(|| {
                let v = detail.v[0][t] - (0..beta.len()).map(|j| beta[j] * detail.v[j + 1][t]).sum::<f64>();
                v / detail.f[t].sqrt()
            })
        })
        .collect();
    let r = detail.final_state[0].len();
    let state: Vec<f64> = (0..r)
        .map(|i| {
            detail.final_state[0][i]
                - (0..beta.len())
                    .map(|j| beta[j] * detail.final_state[j + 1][i])
                    .sum::<f64>()
        })
        .collect();
    let a = order.diff.order();
    let tail = |s: &TimeSeries| s.values()[s.len() - a..].to_vec();
    let forecast_state = ForecastState {
        state,
        y_tail: tail(y),
        x_tail: user_x.columns.iter().map(tail).collect(),
    };

    let params = SarimaParams {
        beta,
        sigma2,
        ..arma
    };
    let n_obs = sums.n_obs;
    let bic = -2.0 * loglik + n_params as f64 * (n_obs as f64).ln();
    let residuals = TimeSeries::new(residuals)?.with_start(y.start() + a as i64);
    Ok(FittedModel {
        order: *order,
        params,
        loglik,
        bic,
        residuals,
        n_obs,
        n_params,
        regressor_names: design.names.clone(),
        intercept,
        converged,
        evaluations,
        forecast_state,
    })
}

/// Evaluates a model at fixed parameters (no optimisation): the regression
/// coefficients and scale in `params` are used as given.
pub fn evaluate(
    y: &TimeSeries,
    x: &Regressors,
    order: &ModelOrder,
    params: &SarimaParams,
    intercept: bool,
) -> Result<FittedModel> {
    order.validate()?;
    let (design, intercept) = design(y, x, order, intercept)?;
    if params.beta.len() != design.len() {
        return Err(Error::DimensionMismatch {
            what: "regression coefficients",
            expected: design.len(),
            found: params.beta.len(),
        });
    }
    params.validate(order)?;
    let prep = prepare(y, &design, &order.diff)?;
    let n_params = order.n_arma() + design.len() + 1;
    let (sums, detail) = filter_sums(order, params, &prep, true)?;
    let detail = detail.expect("detail requested");
    let beta = &params.beta;
    let loglik = loglik_from_sums(&sums, beta, params.sigma2);
    let residuals: Vec<Option<f64>> = (0..prep.observed.len())
        .map(|t| {
            prep.observed[t].then(|| {
                let v = detail.v[0][t] - (0..beta.len()).map(|j| beta[j] * detail.v[j + 1][t]).sum::<f64>();
                v / detail.f[t].sqrt()
            })
        })
        .collect();
    let r = detail.final_state[0].len();
    let state: Vec<f64> = (0..r)
        .map(|i| {
            detail.final_state[0][i]
                - (0..beta.len())
                    .map(|j| beta[j] * detail.final_state[j + 1][i])
                    .sum::<f64>()
        })
        .collect();
    let a = order.diff.order();
    let tail = |s: &TimeSeries| s.values()[s.len() - a..].to_vec();
    let n_obs = sums.n_obs;
    Ok(FittedModel {
        order: *order,
        params: params.clone(),
        loglik,
        bic: -2.0 * loglik + n_params as f64 * (n_obs as f64).ln(),
        residuals: TimeSeries::new(residuals)?.with_start(y.start() + a as i64),
        n_obs,
        n_params,
        regressor_names: design.names.clone(),
        intercept,
        converged: true,
        evaluations: 1,
        forecast_state: ForecastState {
            state,
            y_tail: tail(y),
            x_tail: x.columns.iter().map(tail).collect(),
        },
    })
}

/// Covariance of the maximum-likelihood estimates from the numerically
/// differentiated observed information, in the natural parameterisation
/// `[ar | ma | seasonal ar | seasonal ma | beta | sigma2]`.
///
/// `y` and `x` must be the data the model was fitted on (user regressors
/// only; the intercept is re-added when the model carries one).
pub fn parameter_covariance(model: &FittedModel, y: &TimeSeries, x: &Regressors) -> Result<Vec<f64>> {
    let order = &model.order;
    let design = if model.intercept {
        x.with_intercept(y.len())?
    } else {
        x.clone()
    };
    let prep = prepare(y, &design, &order.diff)?;
    let p = &model.params;
    let n_arma = order.n_arma();
    let m = p.beta.len();
    let mut theta: Vec<f64> = Vec::with_capacity(n_arma + m + 1);
    theta.extend(&p.ar);
    theta.extend(&p.ma);
    theta.extend(&p.seasonal_ar);
    theta.extend(&p.seasonal_ma);
    theta.extend(&p.beta);
    theta.push(p.sigma2);
    let dim = theta.len();

    // The filter only depends on the ARMA block, so cache its sums.
    let mut cache: Vec<(Vec<u64>, Option<super::kalman::FilterSums>)> = Vec::new();
    let mut neg_loglik = |v: &[f64]| -> f64 {
        let key: Vec<u64> = v[..n_arma].iter().map(|x| x.to_bits()).collect();
        let sums = match cache.iter().find(|(k, _)| *k == key) {
            Some((_, s)) => s.clone(),
            None => {
                let (a, rest) = v[..n_arma].split_at(order.p);
                let (mq, rest) = rest.split_at(order.q);
                let (sa, sm) = rest.split_at(order.seasonal_p);
                let arma = SarimaParams {
                    ar: a.to_vec(),
                    ma: mq.to_vec(),
                    seasonal_ar: sa.to_vec(),
                    seasonal_ma: sm.to_vec(),
                    beta: Vec::new(),
                    sigma2: 1.0,
                };
                let s = arma
                    .check_stationary()
                    .and_then(|_| filter_sums(order, &arma, &prep, false))
                    .map(|(s, _)| s)
                    .ok();
                cache.push((key, s.clone()));
                s
            }
        };
        let sigma2 = v[dim - 1];
        match sums {
            Some(s) if sigma2 > 0.0 => -loglik_from_sums(&s, &v[n_arma..n_arma + m], sigma2),
            _ => f64::NAN,
        }
    };
    let hess = numeric_hessian(&mut neg_loglik, &theta);
    if hess.iter().any(|h| !h.is_finite()) {
        return Err(Error::DegenerateVariance("information matrix is not finite".into()));
    }
    spd_inverse(&hess, dim)
        .ok_or_else(|| Error::DegenerateVariance("information matrix is not positive definite".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarima::model::INTERCEPT;
    use crate::series::DiffSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
        let e = noise(n + 200, seed);
        let mut y = vec![0.0; n + 200];
        for t in 1..n + 200 {
            y[t] = phi * y[t - 1] + e[t];
        }
        y[200..].to_vec()
    }

    #[test]
    fn white_noise_with_intercept_is_ols() {
        let y: Vec<f64> = noise(200, 3).iter().map(|e| 10.0 + 2.0 * e).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let m = fit(&ts, &Regressors::none(), &ModelOrder::arma(0, 0), &FitOptions::default()).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        assert!((m.params.beta[0] - mean).abs() < 1e-10);
        assert!((m.params.sigma2 - var).abs() < 1e-10);
        assert_eq!(m.regressor_names, vec![INTERCEPT.to_string()]);
        assert_eq!(m.n_params, 2);
        let bic = -2.0 * m.loglik + 2.0 * (200f64).ln();
        assert!((m.bic - bic).abs() < 1e-10);
    }

    #[test]
    fn ar1_long_sample_recovers_phi() {
        let y = ar1(2000, 0.7, 11);
        let ts = TimeSeries::from_values(&y).unwrap();
        let m = fit(&ts, &Regressors::none(), &ModelOrder::arma(1, 0), &FitOptions::default()).unwrap();
        // 3 sigma band from the asymptotic variance (1 - phi^2) / n
        let band = 3.0 * ((1.0 - 0.49) / 2000.0f64).sqrt();
        assert!((m.params.ar[0] - 0.7).abs() < band, "phi = {}", m.params.ar[0]);
        assert!(m.converged);
        assert_eq!(m.residuals.len(), 2000);
    }

    #[test]
    fn too_few_observations() {
        let ts = TimeSeries::from_values(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let err = fit(&ts, &Regressors::none(), &ModelOrder::arma(1, 0), &FitOptions::default());
        assert!(matches!(err, Err(Error::TooFewObservations { .. })));
    }

    #[test]
    fn intercept_dropped_under_differencing() {
        let y: Vec<f64> = ar1(300, 0.3, 5).iter().scan(0.0, |s, e| {
            *s += e;
            Some(*s)
        }).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let order = ModelOrder::new(1, 0, 0, 0, DiffSpec::new(1, 0, 1).unwrap()).unwrap();
        let m = fit(&ts, &Regressors::none(), &order, &FitOptions::default()).unwrap();
        assert!(!m.intercept);
        assert!(m.params.beta.is_empty());
        assert_eq!(m.n_obs, 299);
    }

    #[test]
    fn covariance_of_ar1_matches_asymptotics() {
        let y = ar1(1500, 0.5, 21);
        let ts = TimeSeries::from_values(&y).unwrap();
        let m = fit(&ts, &Regressors::none(), &ModelOrder::arma(1, 0), &FitOptions::default()).unwrap();
        let cov = parameter_covariance(&m, &ts, &Regressors::none()).unwrap();
        let phi = m.params.ar[0];
        let want = (1.0 - phi * phi) / 1500.0;
        assert!((cov[0] / want - 1.0).abs() < 0.15, "{} vs {}", cov[0], want);
        // intercept variance ~ sigma2 / (n (1 - phi)^2)
        let want_mu = m.params.sigma2 / (1500.0 * (1.0 - phi).powi(2));
        assert!((cov[4] / want_mu - 1.0).abs() < 0.15);
    }
}

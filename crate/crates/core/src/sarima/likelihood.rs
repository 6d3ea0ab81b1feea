//! Exact Gaussian likelihood of the regression model with seasonal ARIMA
//! errors, evaluated on the differenced data by the prediction-error
//! decomposition.

use std::f64::consts::PI;

use super::kalman::{run_filter, FilterDetail, FilterSums, StateSpace};
use super::model::{ModelOrder, Regressors, SarimaParams};
use super::transform::{
    ar_from_unconstrained, ar_to_unconstrained, ma_from_unconstrained, ma_to_unconstrained,
};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};
use crate::series::{difference, DiffSpec, TimeSeries};

/// Differenced response and regressors with the joint observation mask.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    /// Column 0 is the response, columns 1.. the regressors; zero where
    /// unobserved.
    pub columns: Vec<Vec<f64>>,
    pub observed: Vec<bool>,
}

impl Prepared {
    pub fn n_observed(&self) -> usize {
        self.observed.iter().filter(|&&b| b).count()
    }

    pub fn n_regressors(&self) -> usize {
        self.columns.len() - 1
    }

    fn column_refs(&self) -> Vec<&[f64]> {
        self.columns.iter().map(Vec::as_slice).collect()
    }
}

pub(crate) fn prepare(y: &TimeSeries, x: &Regressors, diff: &DiffSpec) -> Result<Prepared> {
    if let Some(rows) = x.n_rows() {
        if rows != y.len() {
            return Err(Error::DimensionMismatch {
                what: "regressor rows",
                expected: y.len(),
                found: rows,
            });
        }
    }
    let dy = difference(y, diff)?;
    let dx = x
        .columns
        .iter()
        .map(|c| difference(c, diff))
        .collect::<Result<Vec<_>>>()?;
    let n = dy.len();
    let observed: Vec<bool> = (0..n)
        .map(|t| dy.values()[t].is_some() && dx.iter().all(|c| c.values()[t].is_some()))
        .collect();
    let dense = |s: &TimeSeries| -> Vec<f64> {
        s.values()
            .iter()
            .zip(&observed)
            .map(|(v, &o)| if o { v.unwrap_or(0.0) } else { 0.0 })
            .collect()
    };
    let mut columns = Vec::with_capacity(dx.len() + 1);
    columns.push(dense(&dy));
    columns.extend(dx.iter().map(dense));
    Ok(Prepared { columns, observed })
}

pub(crate) fn state_space(order: &ModelOrder, params: &SarimaParams) -> StateSpace {
    let s = order.period();
    StateSpace::new(&params.expanded_ar(s), &params.expanded_ma(s))
}

/// ARMA coefficients from the unconstrained optimisation vector laid out as
/// `[ar | ma | seasonal ar | seasonal ma]`.
pub(crate) fn arma_from_unconstrained(order: &ModelOrder, u: &[f64]) -> SarimaParams {
    let (a, rest) = u.split_at(order.p);
    let (m, rest) = rest.split_at(order.q);
    let (sa, sm) = rest.split_at(order.seasonal_p);
    SarimaParams {
        ar: ar_from_unconstrained(a),
        ma: ma_from_unconstrained(m),
        seasonal_ar: ar_from_unconstrained(sa),
        seasonal_ma: ma_from_unconstrained(sm),
        beta: Vec::new(),
        sigma2: 1.0,
    }
}

pub(crate) fn arma_to_unconstrained(params: &SarimaParams) -> Option<Vec<f64>> {
    let mut u = ar_to_unconstrained(&params.ar)?;
    u.extend(ma_to_unconstrained(&params.ma)?);
    u.extend(ar_to_unconstrained(&params.seasonal_ar)?);
    u.extend(ma_to_unconstrained(&params.seasonal_ma)?);
    Some(u)
}

/// Likelihood with regression coefficients and scale concentrated out.
#[derive(Debug, Clone)]
pub(crate) struct Profile {
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub loglik: f64,
}

pub(crate) fn filter_sums(
    order: &ModelOrder,
    arma: &SarimaParams,
    prep: &Prepared,
    keep_detail: bool,
) -> Result<(FilterSums, Option<FilterDetail>)> {
    let ss = state_space(order, arma);
    run_filter(&ss, &prep.column_refs(), &prep.observed, keep_detail)
}

/// Generalised least squares on the filtered columns.
pub(crate) fn profile_from_sums(sums: &FilterSums) -> Result<Profile> {
    let k = sums.k;
    let m = k - 1;
    let n = sums.n_obs;
    if n == 0 {
        return Err(Error::TooFewObservations { n: 0, needed: 0 });
    }
    let c = &sums.cross;
    let beta = if m > 0 {
        let mut xx = vec![0.0; m * m];
        let mut xy = vec![0.0; m];
        for i in 0..m {
            xy[i] = c[(i + 1) * k];
            for j in 0..m {
                xx[i * m + j] = c[(i + 1) * k + j + 1];
            }
        }
        let l = cholesky(&xx, m).ok_or(Error::SingularRegressors)?;
        cholesky_solve(&l, m, &xy)
    } else {
        Vec::new()
    };
    let ssr = quadratic_ssr(sums, &beta).max(0.0);
    let sigma2 = ssr / n as f64;
    if !(sigma2 > 0.0) {
        return Err(Error::DegenerateVariance(
            "zero residual variance".into(),
        ));
    }
    let nf = n as f64;
    let loglik = -0.5 * nf * ((2.0 * PI).ln() + 1.0 + sigma2.ln()) - 0.5 * sums.sum_log_f;
    Ok(Profile {
        beta,
        sigma2,
        loglik,
    })
}

/// `sum_t (v_yt - v_xt' beta)^2 / F_t` from the cross-product matrix.
fn quadratic_ssr(sums: &FilterSums, beta: &[f64]) -> f64 {
    let k = sums.k;
    let c = &sums.cross;
    let mut ssr = c[0];
    for i in 0..beta.len() {
        ssr -= 2.0 * beta[i] * c[i + 1];
        for j in 0..beta.len() {
            ssr += beta[i] * beta[j] * c[(i + 1) * k + j + 1];
        }
    }
    ssr
}

pub(crate) fn loglik_from_sums(sums: &FilterSums, beta: &[f64], sigma2: f64) -> f64 {
    let n = sums.n_obs as f64;
    let ssr = quadratic_ssr(sums, beta);
    -0.5 * (n * (2.0 * PI).ln() + n * sigma2.ln() + sums.sum_log_f + ssr / sigma2)
}

/// Exact Gaussian log-likelihood of `y` under the given parameters.
///
/// The response and every regressor column are differenced by
/// `order.diff`; the likelihood is that of the stationary ARMA on
/// `T(y) - T(X) beta`. Slots where the response or any regressor is missing
/// only advance the state prediction.
pub fn log_likelihood(
    order: &ModelOrder,
    params: &SarimaParams,
    y: &TimeSeries,
    x: &Regressors,
) -> Result<f64> {
    order.validate()?;
    params.validate(order)?;
    if params.beta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            what: "regression coefficients",
            expected: x.len(),
            found: params.beta.len(),
        });
    }
    let prep = prepare(y, x, &order.diff)?;
    let (sums, _) = filter_sums(order, params, &prep, false)?;
    if sums.n_obs == 0 {
        return Err(Error::TooFewObservations { n: 0, needed: 0 });
    }
    Ok(loglik_from_sums(&sums, &params.beta, params.sigma2))
}

use super::fit::FittedModel;
use super::kalman::StateSpace;
use super::likelihood::state_space;
use super::model::{ModelOrder, Regressors, SarimaParams};
use crate::error::{Error, Result};
use crate::series::{expand_diff_polynomial, invert_diff_polynomial};

/// First `k` coefficients of `theta(L)Theta(L^s) / (phi(L)Phi(L^s))`.
pub fn psi_weights(order: &ModelOrder, params: &SarimaParams, k: usize) -> Vec<f64> {
    let s = order.period();
    let ar = params.expanded_ar(s);
    let ma = params.expanded_ma(s);
    let mut psi = vec![0.0; k];
    for j in 0..k {
        let mut v = if j == 0 {
            1.0
        } else {
            ma.get(j - 1).copied().unwrap_or(0.0)
        };
        for (i, a) in ar.iter().enumerate() {
            let lag = i + 1;
            if lag > j {
                break;
            }
            v += a * psi[j - lag];
        }
        psi[j] = v;
    }
    psi
}

/// Multi-step predictions past the end of the fitting sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Predicted response on the original scale.
    pub mean: Vec<f64>,
    /// Predicted differenced response `T(y)`.
    pub diff_mean: Vec<f64>,
    /// Predicted ARMA error component of `T(y)`.
    pub arma_mean: Vec<f64>,
    /// `h`-step forecast error variance of `diff_mean`, `sigma2 * sum psi_i^2`.
    pub error_variance: Vec<f64>,
    /// `h`-step forecast error variance of `mean`; equal to `error_variance`
    /// without differencing.
    pub level_error_variance: Vec<f64>,
    /// ARMA impulse response `psi_0..psi_{h-1}`.
    pub psi: Vec<f64>,
}

fn arma_path(ss: &StateSpace, state: &[f64], h: usize) -> Vec<f64> {
    let mut x = state.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        out.push(x[0]);
        ss.transition(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    out
}

/// Forecasts `h` steps given the user regressors over the forecast window
/// (same names and order as at fit time; the intercept is implicit).
pub fn forecast(model: &FittedModel, future_x: &Regressors, h: usize) -> Result<Forecast> {
    if h == 0 {
        return Err(Error::InvalidSpec("forecast horizon must be >= 1".into()));
    }
    if !model.has_forecast_state() && model.order.n_arma() + model.params.beta.len() > 0 {
        return Err(Error::InvalidSpec(
            "model carries no forecast state (deserialised?)".into(),
        ));
    }
    let user = model.user_regressors();
    if future_x.len() != user.len() {
        return Err(Error::DimensionMismatch {
            what: "future regressors",
            expected: user.len(),
            found: future_x.len(),
        });
    }
    if let Some(rows) = future_x.n_rows() {
        if rows < h {
            return Err(Error::DimensionMismatch {
                what: "future regressor rows",
                expected: h,
                found: rows,
            });
        }
    }
    let order = &model.order;
    let params = &model.params;
    let fs = &model.forecast_state;
    let poly = expand_diff_polynomial(&order.diff);
    let a = poly.coeffs();
    let big_a = order.diff.order();

    // Differenced regression mean over the window.
    let offset = usize::from(model.intercept);
    let mut reg = vec![if model.intercept { params.beta[0] } else { 0.0 }; h];
    for (j, col) in future_x.columns.iter().enumerate() {
        let mut full: Vec<f64> = Vec::with_capacity(big_a + h);
        for v in &fs.x_tail[j] {
            full.push(v.ok_or_else(|| {
                Error::MissingData(format!("regressor {} missing before the forecast origin", user[j]))
            })?);
        }
        for t in 0..h {
            full.push(col.get(t).ok_or_else(|| {
                Error::MissingData(format!("regressor {} missing at forecast step {}", user[j], t + 1))
            })?);
        }
        let beta = params.beta[offset + j];
        for (t, r) in reg.iter_mut().enumerate() {
            let dx: f64 = (0..=big_a).map(|i| a[i] * full[big_a + t - i]).sum();
            *r += beta * dx;
        }
    }

    let ss = state_space(order, params);
    let arma_mean = if fs.state.is_empty() {
        vec![0.0; h]
    } else {
        arma_path(&ss, &fs.state, h)
    };
    let diff_mean: Vec<f64> = reg.iter().zip(&arma_mean).map(|(r, e)| r + e).collect();

    let mut ys: Vec<f64> = Vec::with_capacity(big_a + h);
    for v in &fs.y_tail {
        ys.push(v.ok_or_else(|| {
            Error::MissingData("response missing just before the forecast origin".into())
        })?);
    }
    let mut mean = Vec::with_capacity(h);
    for t in 0..h {
        let past: f64 = (1..=big_a).map(|i| a[i] * ys[big_a + t - i]).sum();
        let y = diff_mean[t] - past;
        ys.push(y);
        mean.push(y);
    }

    let psi = psi_weights(order, params, h);
    let b = invert_diff_polynomial(&poly, h)?.b;
    let mut error_variance = Vec::with_capacity(h);
    let mut level_error_variance = Vec::with_capacity(h);
    let (mut acc, mut acc_level) = (0.0, 0.0);
    for m in 0..h {
        let w: f64 = (0..=m).map(|i| b[i] * psi[m - i]).sum();
        acc += psi[m] * psi[m];
        acc_level += w * w;
        error_variance.push(params.sigma2 * acc);
        level_error_variance.push(params.sigma2 * acc_level);
    }
    Ok(Forecast {
        mean,
        diff_mean,
        arma_mean,
        error_variance,
        level_error_variance,
        psi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sarima::fit::{evaluate, fit, FitOptions};
    use crate::series::{DiffSpec, TimeSeries};

    #[test]
    fn psi_of_arma11() {
        let p = SarimaParams {
            ar: vec![0.5],
            ma: vec![0.4],
            ..SarimaParams::white_noise(1.0)
        };
        let psi = psi_weights(&ModelOrder::arma(1, 1), &p, 4);
        // psi_1 = phi + theta, psi_j = phi psi_{j-1}
        assert_eq!(psi[0], 1.0);
        assert!((psi[1] - 0.9).abs() < 1e-15);
        assert!((psi[2] - 0.45).abs() < 1e-15);
        assert!((psi[3] - 0.225).abs() < 1e-15);
    }

    #[test]
    fn ar1_forecast_decays_to_mean() {
        let y: Vec<f64> = (0..60).map(|t| 5.0 + if t == 59 { 2.0 } else { 0.0 }).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let params = SarimaParams {
            ar: vec![0.5],
            ..SarimaParams::white_noise(1.0)
        }
        .with_beta(vec![5.0]);
        let m = evaluate(&ts, &Regressors::none(), &ModelOrder::arma(1, 0), &params, true).unwrap();
        let f = forecast(&m, &Regressors::none(), 3).unwrap();
        assert!((f.mean[0] - 6.0).abs() < 1e-12);
        assert!((f.mean[1] - 5.5).abs() < 1e-12);
        assert!((f.error_variance[1] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn random_walk_forecast_is_flat() {
        let y: Vec<f64> = (0..50).map(|t| (t as f64 * 0.7).sin() * 3.0 + t as f64 * 0.1).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let order = ModelOrder::new(0, 0, 0, 0, DiffSpec::new(1, 0, 1).unwrap()).unwrap();
        let m = fit(&ts, &Regressors::none(), &order, &FitOptions::default()).unwrap();
        let f = forecast(&m, &Regressors::none(), 5).unwrap();
        for v in &f.mean {
            assert!((v - y[49]).abs() < 1e-12);
        }
        for v in &f.error_variance {
            assert!((v - m.params.sigma2).abs() < 1e-9);
        }
        for (i, v) in f.level_error_variance.iter().enumerate() {
            assert!((v - m.params.sigma2 * (i + 1) as f64).abs() < 1e-9);
        }
    }
}

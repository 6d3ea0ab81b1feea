//! Point, cumulative and temporal-average effects of the intervention, read
//! off the gap between the observed post-period and the counterfactual
//! forecast, with their null variances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sarima::{forecast, FittedModel, Forecast, Regressors};
use crate::series::{expand_diff_polynomial, invert_diff_polynomial, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// The differenced series the ARMA model describes.
    Transformed,
    /// The undifferenced response.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimand {
    Point,
    Cumulative,
    Average,
}

impl Estimand {
    pub const ALL: [Estimand; 3] = [Estimand::Point, Estimand::Cumulative, Estimand::Average];
}

/// Effect estimates for horizons `1..=len()` on one scale. Entries at index
/// `h - 1` refer to horizon `h`.
///
/// Missing post-period observations leave the point effect missing; the
/// cumulative and average effects then run over observed horizons only and
/// the average divides by `n_observed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectPath {
    pub scale: Scale,
    pub tau: Vec<Option<f64>>,
    pub delta: Vec<f64>,
    pub tau_bar: Vec<Option<f64>>,
    /// Observed horizons up to and including `h`.
    pub n_observed: Vec<usize>,
    pub var_tau: Vec<f64>,
    pub var_delta: Vec<f64>,
    pub var_tau_bar: Vec<Option<f64>>,
    /// Moving-average weights of the forecast errors: `psi` on the
    /// transformed scale, `b * psi` on the original scale.
    pub weights: Vec<f64>,
    pub sigma2: f64,
}

impl EffectPath {
    fn build(scale: Scale, tau: Vec<Option<f64>>, weights: Vec<f64>, sigma2: f64) -> Self {
        let k = tau.len();
        let mut delta = Vec::with_capacity(k);
        let mut tau_bar = Vec::with_capacity(k);
        let mut n_observed = Vec::with_capacity(k);
        let mut var_tau = Vec::with_capacity(k);
        let mut var_delta = Vec::with_capacity(k);
        let mut var_tau_bar = Vec::with_capacity(k);
        // c[j] accumulates the weight of eps_{t*+1+j} in the cumulative error
        let mut c = vec![0.0; k];
        let (mut sum, mut count, mut point_acc) = (0.0, 0usize, 0.0);
        for h in 0..k {
            point_acc += weights[h] * weights[h];
            var_tau.push(sigma2 * point_acc);
            if let Some(v) = tau[h] {
                sum += v;
                count += 1;
                for j in 0..=h {
                    c[j] += weights[h - j];
                }
            }
            let vd = sigma2 * c[..=h].iter().map(|x| x * x).sum::<f64>();
            delta.push(sum);
            n_observed.push(count);
            var_delta.push(vd);
            if count > 0 {
                let n = count as f64;
                tau_bar.push(Some(sum / n));
                var_tau_bar.push(Some(vd / (n * n)));
            } else {
                tau_bar.push(None);
                var_tau_bar.push(None);
            }
        }
        Self {
            scale,
            tau,
            delta,
            tau_bar,
            n_observed,
            var_tau,
            var_delta,
            var_tau_bar,
            weights,
            sigma2,
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    fn check_horizon(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::BadIndex(format!(
                "horizon {k} outside 1..={}",
                self.len()
            )));
        }
        Ok(())
    }

    pub fn estimate(&self, estimand: Estimand, k: usize) -> Result<Option<f64>> {
        self.check_horizon(k)?;
        Ok(match estimand {
            Estimand::Point => self.tau[k - 1],
            Estimand::Cumulative => Some(self.delta[k - 1]),
            Estimand::Average => self.tau_bar[k - 1],
        })
    }

    pub fn variance(&self, estimand: Estimand, k: usize) -> Result<Option<f64>> {
        self.check_horizon(k)?;
        Ok(match estimand {
            Estimand::Point => Some(self.var_tau[k - 1]),
            Estimand::Cumulative => Some(self.var_delta[k - 1]),
            Estimand::Average => self.var_tau_bar[k - 1],
        })
    }

    /// Coefficients `g_j` with estimator error `sum_j g_j eps_{t*+j}` at
    /// horizon `k`, for `j = 1..=k`.
    pub fn error_weights(&self, estimand: Estimand, k: usize) -> Result<Vec<f64>> {
        self.check_horizon(k)?;
        let w = &self.weights;
        let mut g = vec![0.0; k];
        match estimand {
            Estimand::Point => {
                for j in 0..k {
                    g[j] = w[k - 1 - j];
                }
            }
            Estimand::Cumulative | Estimand::Average => {
                for h in 0..k {
                    if self.tau[h].is_some() {
                        for j in 0..=h {
                            g[j] += w[h - j];
                        }
                    }
                }
                if estimand == Estimand::Average {
                    let n = self.n_observed[k - 1].max(1) as f64;
                    g.iter_mut().for_each(|x| *x /= n);
                }
            }
        }
        Ok(g)
    }
}

/// Effects on both scales together with the counterfactual forecast.
#[derive(Debug, Clone)]
pub struct Effects {
    pub transformed: EffectPath,
    pub original: EffectPath,
    pub forecast: Forecast,
    /// Largest gap between the original-scale path computed by direct
    /// subtraction and by inverting the differencing of the transformed path.
    /// `None` when a missing value breaks the comparison.
    pub cross_check: Option<f64>,
}

/// Estimates effects at horizons `1..=y_post.len()` from a model fitted on
/// the pre-intervention data ending right before `y_post`.
pub fn estimate_effects(model: &FittedModel, y_post: &TimeSeries, x_post: &Regressors) -> Result<Effects> {
    let k = y_post.len();
    if let Some(rows) = x_post.n_rows() {
        if rows != k {
            return Err(Error::DimensionMismatch {
                what: "post-period regressor rows",
                expected: k,
                found: rows,
            });
        }
    }
    let fc = forecast(model, x_post, k)?;
    let poly = expand_diff_polynomial(&model.order.diff);
    let a = poly.coeffs();
    let big_a = model.order.diff.order();
    let b = invert_diff_polynomial(&poly, k)?.b;

    // Transformed observations T(y) over the post period, drawing on the
    // last pre-period values.
    let mut ys: Vec<Option<f64>> = model.forecast_state.y_tail.clone();
    ys.extend_from_slice(y_post.values());
    let observed_t: Vec<Option<f64>> = (0..k)
        .map(|h| {
            (0..=big_a).try_fold(0.0, |acc, i| {
                if a[i] == 0.0 {
                    Some(acc)
                } else {
                    ys[big_a + h - i].map(|v| acc + a[i] * v)
                }
            })
        })
        .collect();
    let tau_t: Vec<Option<f64>> = observed_t
        .iter()
        .zip(&fc.diff_mean)
        .map(|(o, m)| o.map(|v| v - m))
        .collect();
    let tau_y: Vec<Option<f64>> = y_post
        .values()
        .iter()
        .zip(&fc.mean)
        .map(|(o, m)| o.map(|v| v - m))
        .collect();

    let cross_check = if tau_t.iter().all(Option::is_some) && tau_y.iter().all(Option::is_some) {
        let t: Vec<f64> = tau_t.iter().map(|v| v.unwrap_or(0.0)).collect();
        let gap = (0..k)
            .map(|h| {
                let conv: f64 = (0..=h).map(|j| b[j] * t[h - j]).sum();
                (conv - tau_y[h].unwrap_or(0.0)).abs()
            })
            .fold(0.0f64, f64::max);
        Some(gap)
    } else {
        None
    };

    let psi = fc.psi.clone();
    let w: Vec<f64> = (0..k)
        .map(|m| (0..=m).map(|i| b[i] * psi[m - i]).sum())
        .collect();
    let sigma2 = model.params.sigma2;
    Ok(Effects {
        transformed: EffectPath::build(Scale::Transformed, tau_t, psi, sigma2),
        original: EffectPath::build(Scale::Original, tau_y, w, sigma2),
        forecast: fc,
        cross_check,
    })
}

pub fn estimate_effects_transformed(model: &FittedModel, y_post: &TimeSeries, x_post: &Regressors) -> Result<EffectPath> {
    estimate_effects(model, y_post, x_post).map(|e| e.transformed)
}

pub fn estimate_effects_original(model: &FittedModel, y_post: &TimeSeries, x_post: &Regressors) -> Result<EffectPath> {
    estimate_effects(model, y_post, x_post).map(|e| e.original)
}

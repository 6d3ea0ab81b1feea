//! Seeded comparisons of the fast paths against the reference computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{arma_autocovariance, gaussian_log_density, impulse_response, integer_diff_polynomial, long_division};
use crate::causal::estimate_effects_original;
use crate::error::Result;
use crate::sarima::transform::{ar_from_unconstrained, ma_from_unconstrained};
use crate::sarima::{evaluate, log_likelihood, psi_weights, ModelOrder, Regressors, SarimaParams};
use crate::series::{expand_diff_polynomial, invert_diff_polynomial, poly_multiply, DiffSpec, LagPolynomial, TimeSeries};
use crate::sim::{simulate_arma, DgpConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    /// Largest discrepancy observed (absolute or relative, per check).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn new(name: &str, cases: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases,
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

fn random_block<R: Rng>(rng: &mut R, max: usize, ma: bool) -> Vec<f64> {
    let n = rng.random_range(0..=max);
    let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.5..1.5)).collect();
    if ma {
        ma_from_unconstrained(&u)
    } else {
        ar_from_unconstrained(&u)
    }
}

fn random_params<R: Rng>(rng: &mut R, max_pq: usize, max_seasonal: usize, s: usize) -> (ModelOrder, SarimaParams) {
    let params = SarimaParams {
        ar: random_block(rng, max_pq, false),
        ma: random_block(rng, max_pq, true),
        seasonal_ar: random_block(rng, max_seasonal, false),
        seasonal_ma: random_block(rng, max_seasonal, true),
        beta: Vec::new(),
        sigma2: rng.random_range(0.2..4.0),
    };
    let order = ModelOrder {
        p: params.ar.len(),
        q: params.ma.len(),
        seasonal_p: params.seasonal_ar.len(),
        seasonal_q: params.seasonal_ma.len(),
        diff: DiffSpec { d: 0, seasonal_d: 0, s },
    };
    (order, params)
}

/// Impulse responses `psi_0..psi_29` of random stationary, invertible
/// SARIMA(p,0,q)(P,0,Q)_7 draws with `p, q <= 2`, `P, Q <= 1`.
pub fn check_psi_weights(draws: usize, seed: u64) -> CheckOutcome {
    const LAGS: usize = 30;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let (order, p) = random_params(&mut rng, 2, 1, 7);
        let fast = psi_weights(&order, &p, LAGS);
        let slow = impulse_response(&p.ar, &p.ma, &p.seasonal_ar, &p.seasonal_ma, 7, LAGS);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckOutcome::new("psi weights vs impulse response", draws, worst, 1e-10)
}

/// Exact log-likelihood against the Gaussian density built from the
/// autocovariance matrix, on short random ARMA series; every other instance
/// has one interior observation removed.
pub fn check_likelihood(instances: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for i in 0..instances {
        let s = [1, 4][i % 2];
        let (order, p) = random_params(&mut rng, 2, if s > 1 { 1 } else { 0 }, s);
        let n = rng.random_range(8..=30);
        let ar = p.expanded_ar(s);
        let ma = p.expanded_ma(s);
        let z = simulate_arma(&ar, &ma, p.sigma2.sqrt(), n, 300, &mut rng);
        let mut values: Vec<Option<f64>> = z.into_iter().map(Some).collect();
        if i % 2 == 1 {
            let gap = rng.random_range(1..n - 1);
            values[gap] = None;
        }
        let y = TimeSeries::new(values.clone())?;
        let fast = log_likelihood(&order, &p, &y, &Regressors::none())?;
        let gamma = arma_autocovariance(&ar, &ma, n);
        let slow = gaussian_log_density(&gamma, p.sigma2, &values).unwrap_or(f64::NAN);
        let gap = (fast - slow).abs();
        worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
    }
    Ok(CheckOutcome::new("exact likelihood vs covariance density", instances, worst, 1e-8))
}

fn product_polynomial(d: usize, seasonal_d: usize, s: usize) -> LagPolynomial {
    let mut seasonal = vec![0.0; s + 1];
    seasonal[0] = 1.0;
    seasonal[s] = -1.0;
    let mut poly = LagPolynomial::one();
    for _ in 0..d {
        poly = poly_multiply(&poly, &LagPolynomial::new(vec![1.0, -1.0]));
    }
    for _ in 0..seasonal_d {
        poly = poly_multiply(&poly, &LagPolynomial::new(seasonal.clone()));
    }
    poly
}

/// Truncated inverses of every differencing operator with `d, D <= 2` and
/// `s in {1, 4, 7, 12}` against integer long division, `K = 64`. The
/// discrepancy is the number of mismatching coefficients.
pub fn check_inversion() -> Result<CheckOutcome> {
    const K: usize = 64;
    let mut mismatches = 0usize;
    let mut cases = 0;
    for d in 0..=2 {
        for seasonal_d in 0..=2 {
            for s in [1usize, 4, 7, 12] {
                let poly = if s >= 2 {
                    expand_diff_polynomial(&DiffSpec::new(d, seasonal_d, s)?)
                } else {
                    product_polynomial(d, seasonal_d, s)
                };
                let ints = integer_diff_polynomial(d, seasonal_d, s);
                let expanded_ok = poly.coeffs().len() == ints.len()
                    && poly.coeffs().iter().zip(&ints).all(|(a, b)| *a == *b as f64);
                let fast = invert_diff_polynomial(&poly, K)?;
                let slow = long_division(&ints, K);
                mismatches += usize::from(!expanded_ok);
                mismatches += fast.b.iter().zip(&slow).filter(|(a, b)| **a != **b as f64).count();
                cases += 1;
            }
        }
    }
    Ok(CheckOutcome::new("difference inverse vs long division", cases, mismatches as f64, 0.0))
}

/// Monte-Carlo variance of the point, cumulative and average forecast-error
/// effects at `horizons` under the simulation design's error process with
/// known parameters, relative to the closed-form variances.
pub fn check_forecast_variance(paths: usize, horizons: &[usize], seed: u64) -> Result<CheckOutcome> {
    const PREFIX: usize = 140;
    let cfg = DgpConfig::default();
    let order = cfg.true_order();
    let params = cfg.true_params();
    let h = horizons.iter().copied().max().unwrap_or(1);
    let ar = params.expanded_ar(cfg.period);
    let ma = params.expanded_ma(cfg.period);

    let reference = {
        let y = TimeSeries::from_values(&vec![0.0; PREFIX])?;
        let m = evaluate(&y, &Regressors::none(), &order, &params, false)?;
        estimate_effects_original(&m, &TimeSeries::from_values(&vec![0.0; h])?, &Regressors::none())?
    };

    let draws: Vec<Vec<[f64; 3]>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| -> Result<Vec<[f64; 3]>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i + 1);
            let z = simulate_arma(&ar, &ma, cfg.sigma, PREFIX + h, 200, &mut rng);
            let y = TimeSeries::from_values(&z[..PREFIX])?;
            let m = evaluate(&y, &Regressors::none(), &order, &params, false)?;
            let path = estimate_effects_original(&m, &TimeSeries::from_values(&z[PREFIX..])?, &Regressors::none())?;
            Ok(horizons
                .iter()
                .map(|&k| [path.tau[k - 1].unwrap_or(f64::NAN), path.delta[k - 1], path.tau_bar[k - 1].unwrap_or(f64::NAN)])
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut worst = 0.0f64;
    for (i, &k) in horizons.iter().enumerate() {
        let expected = [
            reference.var_tau[k - 1],
            reference.var_delta[k - 1],
            reference.var_tau_bar[k - 1].unwrap_or(f64::NAN),
        ];
        for (j, want) in expected.iter().enumerate() {
            let vals: Vec<f64> = draws.iter().map(|d| d[i][j]).collect();
            let mean = vals.iter().sum::<f64>() / paths as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (paths - 1) as f64;
            let rel = (var / want - 1.0).abs();
            worst = worst.max(if rel.is_nan() { f64::INFINITY } else { rel });
        }
    }
    Ok(CheckOutcome::new("forecast-error variance vs Monte Carlo", paths, worst, 0.03))
}

/// Every check at full size.
pub fn run_all(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_psi_weights(100, seed),
        check_likelihood(50, seed)?,
        check_inversion()?,
        check_forecast_variance(100_000, &[1, 7, 31], seed)?,
    ])
}

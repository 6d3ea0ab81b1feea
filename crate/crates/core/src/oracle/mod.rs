//! Brute-force reference computations used to cross-check the fast paths:
//! impulse responses by direct filtering, the Gaussian density from an
//! explicit autocovariance matrix, and integer long division of lag
//! polynomials. Slow by design; meant for validation and self-tests.

mod checks;

use std::f64::consts::PI;

pub use checks::{
    check_forecast_variance, check_inversion, check_likelihood, check_psi_weights, run_all, CheckOutcome,
};

use crate::linalg::cholesky;

/// Response at lags `0..k` of `theta(L)Theta(L^s) / (phi(L)Phi(L^s))` to a
/// unit shock, computed by pushing the impulse through each factor in turn
/// rather than through the expanded polynomials.
pub fn impulse_response(
    ar: &[f64],
    ma: &[f64],
    seasonal_ar: &[f64],
    seasonal_ma: &[f64],
    s: usize,
    k: usize,
) -> Vec<f64> {
    let mut x = vec![0.0; k];
    if k > 0 {
        x[0] = 1.0;
    }
    let ma_filter = |x: &[f64], coefs: &[f64], step: usize| -> Vec<f64> {
        (0..x.len())
            .map(|t| {
                let mut v = x[t];
                for (j, c) in coefs.iter().enumerate() {
                    let lag = (j + 1) * step;
                    if lag <= t {
                        v += c * x[t - lag];
                    }
                }
                v
            })
            .collect()
    };
    let ar_filter = |x: &[f64], coefs: &[f64], step: usize| -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for t in 0..x.len() {
            let mut v = x[t];
            for (j, c) in coefs.iter().enumerate() {
                let lag = (j + 1) * step;
                if lag <= t {
                    v += c * out[t - lag];
                }
            }
            out[t] = v;
        }
        out
    };
    x = ma_filter(&x, ma, 1);
    x = ma_filter(&x, seasonal_ma, s);
    x = ar_filter(&x, ar, 1);
    ar_filter(&x, seasonal_ar, s)
}

/// Autocovariances `gamma_0..gamma_{n-1}` (unit innovation variance) of the
/// ARMA with expanded coefficients, by summing the MA(infinity)
/// representation until its tail is negligible.
pub fn arma_autocovariance(ar: &[f64], ma: &[f64], n: usize) -> Vec<f64> {
    const MAX_TERMS: usize = 200_000;
    let mut psi: Vec<f64> = Vec::with_capacity(1024);
    let mut quiet = 0;
    for j in 0..MAX_TERMS {
        let mut v = if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
        for (i, a) in ar.iter().enumerate() {
            if i < j {
                v += a * psi[j - 1 - i];
            }
        }
        psi.push(v);
        quiet = if v.abs() < 1e-17 { quiet + 1 } else { 0 };
        if j > ma.len() + ar.len() && quiet > ar.len().max(1) * 4 {
            break;
        }
    }
    (0..n)
        .map(|h| (0..psi.len().saturating_sub(h)).map(|j| psi[j] * psi[j + h]).sum())
        .collect()
}

/// Log density of the observed entries of a zero-mean stationary series with
/// autocovariances `gamma` scaled by `sigma2`, by Cholesky factorisation of
/// the covariance of the observed entries.
pub fn gaussian_log_density(gamma: &[f64], sigma2: f64, y: &[Option<f64>]) -> Option<f64> {
    let idx: Vec<usize> = (0..y.len()).filter(|&t| y[t].is_some()).collect();
    let n = idx.len();
    let mut cov = vec![0.0; n * n];
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            cov[a * n + b] = sigma2 * gamma[i.abs_diff(j)];
        }
    }
    let l = cholesky(&cov, n)?;
    let vals: Vec<f64> = idx.iter().map(|&t| y[t].unwrap_or(0.0)).collect();
    // solve L z = y
    let mut z = vals;
    for i in 0..n {
        for k in 0..i {
            z[i] -= l[i * n + k] * z[k];
        }
        z[i] /= l[i * n + i];
    }
    let quad: f64 = z.iter().map(|v| v * v).sum();
    let log_det: f64 = (0..n).map(|i| 2.0 * l[i * n + i].ln()).sum();
    Some(-0.5 * (n as f64 * (2.0 * PI).ln() + log_det + quad))
}

/// First `k` coefficients of `1 / a(L)` for an integer polynomial with
/// `a_0 = 1`, by schoolbook long division.
pub fn long_division(a: &[i64], k: usize) -> Vec<i64> {
    assert_eq!(a.first(), Some(&1), "leading coefficient must be one");
    let mut remainder = vec![0i64; k + a.len()];
    remainder[0] = 1;
    let mut quotient = Vec::with_capacity(k);
    for j in 0..k {
        let q = remainder[j];
        quotient.push(q);
        if q != 0 {
            for (i, ai) in a.iter().enumerate() {
                remainder[j + i] -= q * ai;
            }
        }
    }
    quotient
}

/// Integer coefficients of `(1 - L^s)^D (1 - L)^d`.
pub fn integer_diff_polynomial(d: usize, seasonal_d: usize, s: usize) -> Vec<i64> {
    let mut poly = vec![1i64];
    let mut mul = |factor: &[i64]| {
        let mut out = vec![0i64; poly.len() + factor.len() - 1];
        for (i, p) in poly.iter().enumerate() {
            for (j, f) in factor.iter().enumerate() {
                out[i + j] += p * f;
            }
        }
        poly = out;
    };
    for _ in 0..d {
        mul(&[1, -1]);
    }
    let mut seasonal = vec![0i64; s + 1];
    seasonal[0] = 1;
    seasonal[s] = -1;
    for _ in 0..seasonal_d {
        mul(&seasonal);
    }
    poly
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_impulse_and_autocovariance() {
        let psi = impulse_response(&[0.7], &[], &[], &[], 1, 4);
        assert!((psi[3] - 0.343).abs() < 1e-15);
        let g = arma_autocovariance(&[0.5], &[], 3);
        assert!((g[0] - 1.0 / 0.75).abs() < 1e-12);
        assert!((g[2] - 0.25 / 0.75).abs() < 1e-12);
    }

    #[test]
    fn diff_polynomial_and_division() {
        assert_eq!(integer_diff_polynomial(1, 1, 7), vec![1, -1, 0, 0, 0, 0, 0, -1, 1]);
        assert_eq!(long_division(&[1, -2, 1], 5), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn density_skips_missing_entries() {
        let g = [1.0, 0.0, 0.0];
        let full = gaussian_log_density(&g, 1.0, &[Some(0.0), None, Some(0.0)]).unwrap();
        assert!((full + (2.0 * PI).ln()).abs() < 1e-14);
    }
}

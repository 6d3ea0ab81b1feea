//! Harvey state-space form of an expanded ARMA(p', q') and the Kalman
//! prediction-error decomposition used for the exact Gaussian likelihood.
//!
//! State `alpha_t` has dimension `r = max(p', q' + 1)`:
//!
//! ```text
//! y_t         = Z alpha_t,                 Z = (1, 0, ..., 0)
//! alpha_{t+1} = T alpha_t + R eps_{t+1},   R = (1, theta_1, ..., theta_{r-1})'
//! ```
//!
//! where `T` has the AR coefficients in its first column and ones on the
//! superdiagonal. All covariances are computed for unit innovation variance;
//! the scale is applied (or concentrated out) by the caller.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct StateSpace {
    r: usize,
    phi: Vec<f64>,
    rvec: Vec<f64>,
}

impl StateSpace {
    pub fn new(ar: &[f64], ma: &[f64]) -> Self {
        let r = ar.len().max(ma.len() + 1);
        let mut phi = vec![0.0; r];
        phi[..ar.len()].copy_from_slice(ar);
        let mut rvec = vec![0.0; r];
        rvec[0] = 1.0;
        rvec[1..=ma.len()].copy_from_slice(ma);
        Self { r, phi, rvec }
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    /// `out = T x`.
    #[inline]
    pub fn transition(&self, x: &[f64], out: &mut [f64]) {
        let r = self.r;
        let x0 = x[0];
        for i in 0..r - 1 {
            out[i] = self.phi[i] * x0 + x[i + 1];
        }
        out[r - 1] = self.phi[r - 1] * x0;
    }

    /// `out = T m T' + R R'` for a symmetric `m` (row-major r x r).
    fn propagate(&self, m: &[f64], tmp: &mut [f64], out: &mut [f64]) {
        let r = self.r;
        // tmp = T m
        for i in 0..r {
            let pi = self.phi[i];
            for j in 0..r {
                let below = if i + 1 < r { m[(i + 1) * r + j] } else { 0.0 };
                tmp[i * r + j] = pi * m[j] + below;
            }
        }
        // out = tmp T' + R R'
        for i in 0..r {
            let t0 = tmp[i * r];
            for j in 0..r {
                let right = if j + 1 < r { tmp[i * r + j + 1] } else { 0.0 };
                out[i * r + j] = self.phi[j] * t0 + right + self.rvec[i] * self.rvec[j];
            }
        }
    }

    fn dense_transition(&self) -> Vec<f64> {
        let r = self.r;
        let mut t = vec![0.0; r * r];
        for i in 0..r {
            t[i * r] = self.phi[i];
            if i + 1 < r {
                t[i * r + i + 1] = 1.0;
            }
        }
        t
    }

    /// Solves `P = T P T' + R R'` by the doubling algorithm.
    pub fn stationary_cov(&self) -> Result<Vec<f64>> {
        let r = self.r;
        let mut a = self.dense_transition();
        let mut p: Vec<f64> = (0..r * r)
            .map(|k| self.rvec[k / r] * self.rvec[k % r])
            .collect();
        let mut ap = vec![0.0; r * r];
        let mut apa = vec![0.0; r * r];
        let mut aa = vec![0.0; r * r];
        for _ in 0..80 {
            matmul(&a, &p, &mut ap, r);
            matmul_bt(&ap, &a, &mut apa, r);
            let scale = p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let incr = apa.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for (pk, inc) in p.iter_mut().zip(&apa) {
                *pk += inc;
            }
            if !scale.is_finite() || scale > 1e14 {
                return Err(Error::NonStationary("autoregressive"));
            }
            if incr <= 1e-17 * scale {
                return Ok(symmetrize(p, r));
            }
            matmul(&a, &a, &mut aa, r);
            std::mem::swap(&mut a, &mut aa);
        }
        Err(Error::NonStationary("autoregressive"))
    }
}

fn matmul(a: &[f64], b: &[f64], out: &mut [f64], r: usize) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for i in 0..r {
        for k in 0..r {
            let aik = a[i * r + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..r {
                out[i * r + j] += aik * b[k * r + j];
            }
        }
    }
}

/// `out = a b'`.
fn matmul_bt(a: &[f64], b: &[f64], out: &mut [f64], r: usize) {
    for i in 0..r {
        for j in 0..r {
            let mut acc = 0.0;
            for k in 0..r {
                acc += a[i * r + k] * b[j * r + k];
            }
            out[i * r + j] = acc;
        }
    }
}

fn symmetrize(mut p: Vec<f64>, r: usize) -> Vec<f64> {
    for i in 0..r {
        for j in i + 1..r {
            let m = 0.5 * (p[i * r + j] + p[j * r + i]);
            p[i * r + j] = m;
            p[j * r + i] = m;
        }
    }
    p
}

/// Sufficient statistics of one filter pass over several data columns that
/// share the same state-space model (column 0 is the response, the rest
/// regressors). `cross[i][j] = sum_t v_it v_jt / F_t` over observed `t`.
#[derive(Debug, Clone)]
pub(crate) struct FilterSums {
    pub k: usize,
    pub cross: Vec<f64>,
    pub sum_log_f: f64,
    pub n_obs: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct FilterDetail {
    /// Prediction variances (unit scale); NaN where unobserved.
    pub f: Vec<f64>,
    /// Innovations per column; NaN where unobserved.
    pub v: Vec<Vec<f64>>,
    /// One-step-ahead predicted state after the last observation, per column.
    pub final_state: Vec<Vec<f64>>,
}

pub(crate) fn run_filter(
    ss: &StateSpace,
    columns: &[&[f64]],
    observed: &[bool],
    keep_detail: bool,
) -> Result<(FilterSums, Option<FilterDetail>)> {
    let r = ss.dim();
    let k = columns.len();
    let n = observed.len();
    let mut p = ss.stationary_cov()?;
    let mut p_next = vec![0.0; r * r];
    let mut pf = vec![0.0; r * r];
    let mut tmp = vec![0.0; r * r];
    let mut states = vec![vec![0.0; r]; k];
    let mut scratch = vec![0.0; r];
    let mut v = vec![0.0; k];
    let mut gain = vec![0.0; r];
    let mut cross = vec![0.0; k * k];
    let mut sum_log_f = 0.0;
    let mut n_obs = 0usize;
    let mut steady = false;
    let mut detail = keep_detail.then(|| FilterDetail {
        f: vec![f64::NAN; n],
        v: vec![vec![f64::NAN; n]; k],
        final_state: Vec::new(),
    });

    for t in 0..n {
        if observed[t] {
            let f = p[0];
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::DegenerateVariance(format!(
                    "prediction variance {f} at position {t}"
                )));
            }
            let finv = 1.0 / f;
            for i in 0..r {
                gain[i] = p[i * r] * finv;
            }
            for (c, col) in columns.iter().enumerate() {
                let vc = col[t] - states[c][0];
                v[c] = vc;
                for i in 0..r {
                    scratch[i] = states[c][i] + gain[i] * vc;
                }
                ss.transition(&scratch, &mut states[c]);
            }
            for i in 0..k {
                let vi = v[i] * finv;
                for j in i..k {
                    cross[i * k + j] += vi * v[j];
                }
            }
            sum_log_f += f.ln();
            n_obs += 1;
            if let Some(d) = detail.as_mut() {
                d.f[t] = f;
                for c in 0..k {
                    d.v[c][t] = v[c];
                }
            }
            if !steady {
                for i in 0..r {
                    for j in 0..r {
                        pf[i * r + j] = p[i * r + j] - p[i * r] * p[j * r] * finv;
                    }
                }
                ss.propagate(&pf, &mut tmp, &mut p_next);
                let scale = p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                let change = p
                    .iter()
                    .zip(&p_next)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                std::mem::swap(&mut p, &mut p_next);
                steady = change <= 1e-15 * scale;
            }
        } else {
            for state in states.iter_mut() {
                scratch.copy_from_slice(state);
                ss.transition(&scratch, state);
            }
            ss.propagate(&p, &mut tmp, &mut p_next);
            std::mem::swap(&mut p, &mut p_next);
            steady = false;
        }
    }

    for i in 0..k {
        for j in 0..i {
            cross[i * k + j] = cross[j * k + i];
        }
    }
    if let Some(d) = detail.as_mut() {
        d.final_state = states;
    }
    Ok((
        FilterSums {
            k,
            cross,
            sum_log_f,
            n_obs,
        },
        detail,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ar1_stationary_variance() {
        let ss = StateSpace::new(&[0.5], &[]);
        let p = ss.stationary_cov().unwrap();
        assert!((p[0] - 1.0 / 0.75).abs() < 1e-14);
    }

    #[test]
    fn ma1_stationary_cov() {
        let ss = StateSpace::new(&[], &[0.4]);
        let p = ss.stationary_cov().unwrap();
        // alpha = (y_t, theta eps_t): var y = 1 + theta^2
        assert!((p[0] - 1.16).abs() < 1e-14);
        assert!((p[1] - 0.4).abs() < 1e-14);
        assert!((p[3] - 0.16).abs() < 1e-14);
    }

    #[test]
    fn unit_root_is_rejected() {
        let ss = StateSpace::new(&[1.0], &[]);
        assert!(ss.stationary_cov().is_err());
    }

    #[test]
    fn ar1_filter_prediction_variances() {
        let ss = StateSpace::new(&[0.5], &[]);
        let y = [1.0, 1.0, 1.0];
        let (sums, detail) = run_filter(&ss, &[&y], &[true; 3], true).unwrap();
        let d = detail.unwrap();
        assert!((d.f[0] - 1.0 / 0.75).abs() < 1e-14);
        assert!((d.f[1] - 1.0).abs() < 1e-14);
        assert!((d.v[0][1] - 0.5).abs() < 1e-14);
        assert_eq!(sums.n_obs, 3);
    }

    #[test]
    fn missing_observation_skips_update() {
        let ss = StateSpace::new(&[0.5], &[]);
        let y = [2.0, 0.0, 1.0];
        let (_, detail) = run_filter(&ss, &[&y], &[true, false, true], true).unwrap();
        let d = detail.unwrap();
        assert!(d.f[1].is_nan());
        // two-step prediction from y_0 = 2
        assert!((d.v[0][2] - (1.0 - 0.25 * 2.0)).abs() < 1e-14);
        assert!((d.f[2] - 1.25).abs() < 1e-14);
    }
}

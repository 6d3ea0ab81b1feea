use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sarima::{ModelOrder, Regressors, SarimaParams};
use crate::series::{DiffSpec, TimeSeries};

/// Data-generating process of the simulation study:
/// `y_t = level + beta1 x1_t + beta2 x2_t + z_t`, with
/// `x1_t = alpha1 t + u1_t`, `x2_t = sin(alpha2 t) + u2_t` and `z_t` a
/// seasonal ARMA(1,1)(1,1)_s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DgpConfig {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Last untreated day.
    pub intervention: NaiveDate,
    pub alpha1: f64,
    pub alpha2: f64,
    /// Standard deviations of the covariate noise.
    pub u1_sd: f64,
    pub u2_sd: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Constant mean of the response.
    pub level: f64,
    pub phi: f64,
    pub seasonal_phi: f64,
    pub theta: f64,
    pub seasonal_theta: f64,
    pub period: usize,
    /// Innovation standard deviation.
    pub sigma: f64,
    /// Discarded warm-up draws of the error process.
    pub burn_in: usize,
}

impl Default for DgpConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2017, 1, 1).expect("valid date"),
            end: NaiveDate::from_ymd_opt(2019, 12, 31).expect("valid date"),
            intervention: NaiveDate::from_ymd_opt(2019, 6, 30).expect("valid date"),
            alpha1: 0.01,
            alpha2: 0.01,
            u1_sd: 0.02,
            u2_sd: 0.5,
            beta1: 0.7,
            beta2: 2.0,
            level: 200.0,
            phi: 0.7,
            seasonal_phi: 0.6,
            theta: 0.6,
            seasonal_theta: 0.5,
            period: 7,
            sigma: 5.0,
            burn_in: 500,
        }
    }
}

impl DgpConfig {
    pub fn len(&self) -> usize {
        (self.end - self.start).num_days() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    /// Index of the last untreated day.
    pub fn t_star(&self) -> usize {
        (self.intervention - self.start).num_days() as usize
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.start.iter_days().take(self.len()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::Config("simulation end must follow its start".into()));
        }
        if self.intervention < self.start || self.intervention >= self.end {
            return Err(Error::Config("intervention must fall before the last day".into()));
        }
        if !(self.sigma >= 0.0 && self.u1_sd >= 0.0 && self.u2_sd >= 0.0) {
            return Err(Error::Config("standard deviations must be non-negative".into()));
        }
        self.true_params().check_stationary()?;
        self.true_params().check_invertible()?;
        Ok(())
    }

    pub fn true_order(&self) -> ModelOrder {
        ModelOrder {
            p: 1,
            q: 1,
            seasonal_p: 1,
            seasonal_q: 1,
            diff: DiffSpec {
                d: 0,
                seasonal_d: 0,
                s: self.period,
            },
        }
    }

    /// Error-process parameters with `sigma2 = sigma^2` and no regression.
    pub fn true_params(&self) -> SarimaParams {
        SarimaParams {
            ar: vec![self.phi],
            ma: vec![self.theta],
            seasonal_ar: vec![self.seasonal_phi],
            seasonal_ma: vec![self.seasonal_theta],
            beta: Vec::new(),
            sigma2: self.sigma * self.sigma,
        }
    }
}

/// Simulated control series and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSeries {
    pub y: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl ControlSeries {
    pub fn regressors(&self) -> Regressors {
        Regressors::from_dense(&["x1", "x2"], &[self.x1.clone(), self.x2.clone()])
            .expect("equal-length columns")
    }

    pub fn series(&self) -> TimeSeries {
        TimeSeries::from_values(&self.y).expect("non-empty series")
    }
}

/// Draws `n` values of the ARMA with expanded coefficients after `burn_in`
/// warm-up steps from zero.
pub fn simulate_arma<R: Rng + ?Sized>(ar: &[f64], ma: &[f64], sigma: f64, n: usize, burn_in: usize, rng: &mut R) -> Vec<f64> {
    let total = n + burn_in;
    let mut eps = Vec::with_capacity(total);
    let mut z = Vec::with_capacity(total);
    for t in 0..total {
        let e: f64 = sigma * Distribution::<f64>::sample(&StandardNormal, rng);
        eps.push(e);
        let mut v = e;
        for (i, a) in ar.iter().enumerate() {
            if i < t {
                v += a * z[t - 1 - i];
            }
        }
        for (j, m) in ma.iter().enumerate() {
            if j < t {
                v += m * eps[t - 1 - j];
            }
        }
        z.push(v);
    }
    z.split_off(burn_in)
}

pub fn simulate_control<R: Rng + ?Sized>(cfg: &DgpConfig, rng: &mut R) -> ControlSeries {
    let n = cfg.len();
    let p = cfg.true_params();
    let z = simulate_arma(
        &p.expanded_ar(cfg.period),
        &p.expanded_ma(cfg.period),
        cfg.sigma,
        n,
        cfg.burn_in,
        rng,
    );
    let noise = |sd: f64, rng: &mut R| -> f64 {
        if sd > 0.0 {
            Normal::new(0.0, sd).expect("positive sd").sample(rng)
        } else {
            0.0
        }
    };
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for t in 0..n {
        let time = (t + 1) as f64;
        x1.push(cfg.alpha1 * time + noise(cfg.u1_sd, rng));
        x2.push((cfg.alpha2 * time).sin() + noise(cfg.u2_sd, rng));
    }
    let y = (0..n)
        .map(|t| cfg.level + cfg.beta1 * x1[t] + cfg.beta2 * x2[t] + z[t])
        .collect();
    ControlSeries { y, x1, x2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn calendar() {
        let cfg = DgpConfig::default();
        assert_eq!(cfg.len(), 1095);
        assert_eq!(cfg.t_star(), 910);
        assert_eq!(cfg.dates()[910], cfg.intervention);
        cfg.validate().unwrap();
    }

    #[test]
    fn degenerate_dgp_is_zero() {
        let cfg = DgpConfig {
            sigma: 0.0,
            beta1: 0.0,
            beta2: 0.0,
            level: 0.0,
            ..DgpConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = simulate_control(&cfg, &mut rng);
        assert!(c.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn seeded() {
        let cfg = DgpConfig::default();
        let a = simulate_control(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        let b = simulate_control(&cfg, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn x1_slope() {
        let cfg = DgpConfig::default();
        let c = simulate_control(&cfg, &mut ChaCha8Rng::seed_from_u64(3));
        let n = c.x1.len() as f64;
        let tbar = (n + 1.0) / 2.0;
        let xbar = c.x1.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, x) in c.x1.iter().enumerate() {
            let dt = (t + 1) as f64 - tbar;
            sxy += dt * (x - xbar);
            sxx += dt * dt;
        }
        assert!((sxy / sxx - 0.01).abs() < 1e-4);
    }

    #[test]
    fn x2_is_sinusoidal() {
        let cfg = DgpConfig {
            u2_sd: 0.0,
            ..DgpConfig::default()
        };
        let c = simulate_control(&cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert!((c.x2[0] - 0.01f64.sin()).abs() < 1e-15);
        assert!(c.x2.iter().all(|v| v.abs() <= 1.0));
    }
}

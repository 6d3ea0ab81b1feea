//! Two-sided tests of the no-effect null, with exact Gaussian or bootstrapped
//! critical values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::effects::{EffectPath, Estimand, Scale};
use crate::error::{Error, Result};
use crate::sarima::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    Gaussian,
    Bootstrap,
}

pub const MIN_BOOT: usize = 199;
const MIN_RESIDUALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTest {
    pub estimand: Estimand,
    pub scale: Scale,
    pub horizon: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub method: TestMethod,
    pub n_boot: Option<usize>,
}

impl EffectTest {
    /// `.`, `*`, `**`, `***` for p below 0.1, 0.05, 0.01, 0.001.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else if p < 0.1 {
        "."
    } else {
        ""
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidSpec(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn estimate_at(path: &EffectPath, estimand: Estimand, k: usize) -> Result<f64> {
    path.estimate(estimand, k)?.ok_or_else(|| {
        Error::MissingData(format!("no observed post-period value for the {estimand:?} effect at horizon {k}"))
    })
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn gaussian_test(path: &EffectPath, estimand: Estimand, k: usize, alpha: f64) -> Result<EffectTest> {
    check_alpha(alpha)?;
    let estimate = estimate_at(path, estimand, k)?;
    let var = path.variance(estimand, k)?.unwrap_or(f64::NAN);
    if !(var > 0.0 && var.is_finite()) {
        return Err(Error::DegenerateVariance(format!(
            "variance {var} at horizon {k}"
        )));
    }
    let se = var.sqrt();
    let z = estimate / se;
    let n = std_normal();
    let p_value = (2.0 * n.cdf(-z.abs())).min(1.0);
    let crit = n.inverse_cdf(1.0 - alpha / 2.0);
    Ok(EffectTest {
        estimand,
        scale: path.scale,
        horizon: k,
        estimate,
        std_error: se,
        statistic: z,
        p_value,
        lower: estimate - crit * se,
        upper: estimate + crit * se,
        alpha,
        method: TestMethod::Gaussian,
        n_boot: None,
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Bootstrap test: the estimator's null distribution is simulated by
/// feeding innovations resampled with replacement from the centred model
/// residuals through the same moving-average weights as the forecast error.
/// Draw `b` uses its own random stream derived from `seed`, so results do
/// not depend on how draws are scheduled.
pub fn bootstrap_test(
    model: &FittedModel,
    path: &EffectPath,
    estimand: Estimand,
    k: usize,
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> Result<EffectTest> {
    check_alpha(alpha)?;
    if n_boot < MIN_BOOT {
        return Err(Error::InvalidSpec(format!(
            "bootstrap needs at least {MIN_BOOT} draws, got {n_boot}"
        )));
    }
    let estimate = estimate_at(path, estimand, k)?;
    let resid: Vec<f64> = model.residuals.values().iter().flatten().copied().collect();
    if resid.len() < MIN_RESIDUALS {
        return Err(Error::TooFewResiduals { n: resid.len() });
    }
    let mean = resid.iter().sum::<f64>() / resid.len() as f64;
    let centred: Vec<f64> = resid.iter().map(|r| r - mean).collect();
    let g = path.error_weights(estimand, k)?;

    let draws: Vec<f64> = (0..n_boot as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b + 1);
            g.iter()
                .map(|gj| gj * centred[rng.random_range(0..centred.len())])
                .sum::<f64>()
        })
        .collect();

    let extreme = draws.iter().filter(|d| d.abs() >= estimate.abs()).count();
    let p_value = (1 + extreme) as f64 / (n_boot + 1) as f64;
    let mut sorted = draws.clone();
    sorted.sort_by(f64::total_cmp);
    let q_lo = quantile(&sorted, alpha / 2.0);
    let q_hi = quantile(&sorted, 1.0 - alpha / 2.0);
    let m = draws.iter().sum::<f64>() / n_boot as f64;
    let sd = (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (n_boot - 1) as f64).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateVariance("bootstrap draws are constant".into()));
    }
    Ok(EffectTest {
        estimand,
        scale: path.scale,
        horizon: k,
        estimate,
        std_error: sd,
        statistic: estimate / sd,
        p_value,
        lower: estimate - q_hi.max(0.0),
        upper: estimate - q_lo.min(0.0),
        alpha,
        method: TestMethod::Bootstrap,
        n_boot: Some(n_boot),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::effects::estimate_effects_original;
    use crate::sarima::{evaluate, ModelOrder, Regressors, SarimaParams};
    use crate::series::TimeSeries;

    fn setup(post: &[f64]) -> (FittedModel, EffectPath) {
        let y: Vec<f64> = (0..200).map(|t| ((t * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let params = SarimaParams::white_noise(1.0).with_beta(vec![0.0]);
        let m = evaluate(&ts, &Regressors::none(), &ModelOrder::arma(0, 0), &params, true).unwrap();
        let p = estimate_effects_original(&m, &TimeSeries::from_values(post).unwrap(), &Regressors::none()).unwrap();
        (m, p)
    }

    #[test]
    fn zero_estimate_has_unit_p() {
        let (_, p) = setup(&[0.0, 0.0]);
        let t = gaussian_test(&p, Estimand::Point, 1, 0.05).unwrap();
        assert_eq!(t.p_value, 1.0);
        assert_eq!(t.statistic, 0.0);
    }

    #[test]
    fn critical_estimate() {
        let (_, p) = setup(&[1.959963984540054]);
        let t = gaussian_test(&p, Estimand::Point, 1, 0.05).unwrap();
        assert!((t.p_value - 0.05).abs() < 1e-9);
        assert!(t.lower.abs() < 1e-9);
    }

    #[test]
    fn far_estimate_hits_the_floor() {
        let (m, p) = setup(&[100.0, 100.0, 100.0]);
        let t = bootstrap_test(&m, &p, Estimand::Average, 3, 0.05, 499, 7).unwrap();
        assert_eq!(t.p_value, 1.0 / 500.0);
        assert!(t.lower <= t.estimate && t.estimate <= t.upper);
    }

    #[test]
    fn bootstrap_is_seeded() {
        let (m, p) = setup(&[0.5, 1.0, -0.3]);
        let a = bootstrap_test(&m, &p, Estimand::Cumulative, 3, 0.1, 999, 42).unwrap();
        let b = bootstrap_test(&m, &p, Estimand::Cumulative, 3, 0.1, 999, 42).unwrap();
        assert_eq!(a, b);
        assert!(bootstrap_test(&m, &p, Estimand::Point, 1, 0.1, 100, 42).is_err());
    }

    #[test]
    fn stars_ladder() {
        assert_eq!(significance_stars(0.0005), "***");
        assert_eq!(significance_stars(0.005), "**");
        assert_eq!(significance_stars(0.03), "*");
        assert_eq!(significance_stars(0.07), ".");
        assert_eq!(significance_stars(0.5), "");
    }
}

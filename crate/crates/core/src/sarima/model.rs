use std::fmt;

use serde::{Deserialize, Serialize};

use super::transform::{is_invertible, is_stationary};
use crate::error::{Error, Result};
use crate::series::{poly_multiply, DiffSpec, LagPolynomial, TimeSeries};

pub const MAX_NONSEASONAL: usize = 5;
pub const MAX_SEASONAL: usize = 2;

/// Orders `(p, d, q)(P, D, Q)_s`; the period `s` lives in [`DiffSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelOrder {
    pub p: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub seasonal_p: usize,
    #[serde(rename = "Q")]
    pub seasonal_q: usize,
    pub diff: DiffSpec,
}

impl ModelOrder {
    pub fn new(p: usize, q: usize, seasonal_p: usize, seasonal_q: usize, diff: DiffSpec) -> Result<Self> {
        let order = Self {
            p,
            q,
            seasonal_p,
            seasonal_q,
            diff,
        };
        order.validate()?;
        Ok(order)
    }

    /// Non-seasonal ARMA(p, q) without differencing.
    pub fn arma(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            seasonal_p: 0,
            seasonal_q: 0,
            diff: DiffSpec::none(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.diff.validate()?;
        if self.p > MAX_NONSEASONAL || self.q > MAX_NONSEASONAL {
            return Err(Error::InvalidSpec(format!(
                "non-seasonal orders must be <= {MAX_NONSEASONAL}"
            )));
        }
        if self.seasonal_p > MAX_SEASONAL || self.seasonal_q > MAX_SEASONAL {
            return Err(Error::InvalidSpec(format!(
                "seasonal orders must be <= {MAX_SEASONAL}"
            )));
        }
        if (self.seasonal_p > 0 || self.seasonal_q > 0) && self.diff.s < 2 {
            return Err(Error::InvalidSpec(
                "seasonal ARMA terms need a period >= 2".into(),
            ));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.diff.s
    }

    pub fn n_arma(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    pub(crate) fn key(&self) -> (usize, usize, usize, usize) {
        (self.p, self.q, self.seasonal_p, self.seasonal_q)
    }
}

impl fmt::Display for ModelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{})({},{},{})_{}",
            self.p,
            self.diff.d,
            self.q,
            self.seasonal_p,
            self.diff.seasonal_d,
            self.seasonal_q,
            self.diff.s
        )
    }
}

/// `phi(L) = 1 - sum phi_i L^i`, `theta(L) = 1 + sum theta_j L^j`, likewise
/// for the seasonal factors in `L^s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaParams {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    pub beta: Vec<f64>,
    pub sigma2: f64,
}

impl SarimaParams {
    pub fn white_noise(sigma2: f64) -> Self {
        Self {
            ar: Vec::new(),
            ma: Vec::new(),
            seasonal_ar: Vec::new(),
            seasonal_ma: Vec::new(),
            beta: Vec::new(),
            sigma2,
        }
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Self {
        self.beta = beta;
        self
    }

    /// Expanded AR coefficients `pi_i` of `phi(L) Phi(L^s) = 1 - sum pi_i L^i`.
    pub fn expanded_ar(&self, s: usize) -> Vec<f64> {
        let poly = poly_multiply(
            &LagPolynomial::autoregressive(&self.ar),
            &LagPolynomial::autoregressive(&self.seasonal_ar).seasonal(s),
        );
        poly.coeffs()[1..].iter().map(|c| -c).collect()
    }

    /// Expanded MA coefficients of `theta(L) Theta(L^s) = 1 + sum v_j L^j`.
    pub fn expanded_ma(&self, s: usize) -> Vec<f64> {
        let poly = poly_multiply(
            &LagPolynomial::moving_average(&self.ma),
            &LagPolynomial::moving_average(&self.seasonal_ma).seasonal(s),
        );
        poly.coeffs()[1..].to_vec()
    }

    pub fn check_dims(&self, order: &ModelOrder) -> Result<()> {
        let dims = [
            ("ar", order.p, self.ar.len()),
            ("ma", order.q, self.ma.len()),
            ("seasonal ar", order.seasonal_p, self.seasonal_ar.len()),
            ("seasonal ma", order.seasonal_q, self.seasonal_ma.len()),
        ];
        for (what, expected, found) in dims {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    what,
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }

    pub fn check_stationary(&self) -> Result<()> {
        if !is_stationary(&self.ar) {
            return Err(Error::NonStationary("autoregressive"));
        }
        if !is_stationary(&self.seasonal_ar) {
            return Err(Error::NonStationary("seasonal autoregressive"));
        }
        Ok(())
    }

    pub fn check_invertible(&self) -> Result<()> {
        if !is_invertible(&self.ma) {
            return Err(Error::NonStationary("moving-average"));
        }
        if !is_invertible(&self.seasonal_ma) {
            return Err(Error::NonStationary("seasonal moving-average"));
        }
        Ok(())
    }

    /// Full validity check: dimensions, stationarity, invertibility, scale.
    pub fn validate(&self, order: &ModelOrder) -> Result<()> {
        self.check_dims(order)?;
        self.check_stationary()?;
        self.check_invertible()?;
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "innovation variance must be positive, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }
}

/// Named regressor columns aligned with the response.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Regressors {
    pub names: Vec<String>,
    pub columns: Vec<TimeSeries>,
}

pub const INTERCEPT: &str = "intercept";

impl Regressors {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(names: Vec<String>, columns: Vec<TimeSeries>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                what: "regressor names",
                expected: columns.len(),
                found: names.len(),
            });
        }
        if let Some(first) = columns.first() {
            if let Some(bad) = columns.iter().find(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    what: "regressor length",
                    expected: first.len(),
                    found: bad.len(),
                });
            }
        }
        Ok(Self { names, columns })
    }

    pub fn from_dense(names: &[&str], columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns
            .iter()
            .map(|c| TimeSeries::from_values(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names.iter().map(|s| s.to_string()).collect(), cols)
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Row count, `None` without columns.
    pub fn n_rows(&self) -> Option<usize> {
        self.columns.first().map(TimeSeries::len)
    }

    pub fn push(&mut self, name: impl Into<String>, column: TimeSeries) -> Result<()> {
        if let Some(n) = self.n_rows() {
            if column.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "regressor length",
                    expected: n,
                    found: column.len(),
                });
            }
        }
        self.names.push(name.into());
        self.columns.push(column);
        Ok(())
    }

    /// Copy with a leading constant column named `intercept`.
    pub fn with_intercept(&self, n_rows: usize) -> Result<Self> {
        let mut out = Self::none();
        out.push(INTERCEPT, TimeSeries::from_values(&vec![1.0; n_rows])?)?;
        for (name, col) in self.names.iter().zip(&self.columns) {
            out.push(name.clone(), col.clone())?;
        }
        Ok(out)
    }

    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        Ok(Self {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c.slice(from, to))
                .collect::<Result<_>>()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expanded_seasonal_polynomials() {
        let params = SarimaParams {
            ar: vec![0.7],
            ma: vec![0.6],
            seasonal_ar: vec![0.6],
            seasonal_ma: vec![0.5],
            beta: vec![],
            sigma2: 1.0,
        };
        let ar = params.expanded_ar(7);
        // (1 - 0.7L)(1 - 0.6L^7) = 1 - 0.7L - 0.6L^7 + 0.42L^8
        assert_eq!(ar.len(), 8);
        assert!((ar[0] - 0.7).abs() < 1e-15);
        assert!((ar[6] - 0.6).abs() < 1e-15);
        assert!((ar[7] + 0.42).abs() < 1e-15);
        let ma = params.expanded_ma(7);
        assert!((ma[7] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn order_validation() {
        assert!(ModelOrder::new(6, 0, 0, 0, DiffSpec::none()).is_err());
        assert!(ModelOrder::new(1, 0, 1, 0, DiffSpec::none()).is_err());
        let o = ModelOrder::new(1, 1, 1, 1, DiffSpec::new(0, 0, 7).unwrap()).unwrap();
        assert_eq!(o.to_string(), "(1,0,1)(1,0,1)_7");
        assert_eq!(o.n_arma(), 4);
    }
}

//! Time-series container, lag-polynomial algebra and the differencing
//! operator `(1 - L^s)^D (1 - L)^d` together with its truncated inverse.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Indexed numeric sequence with explicit missing slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<Option<f64>>,
    start: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dates: Option<Vec<NaiveDate>>,
}

impl TimeSeries {
    pub fn new(values: Vec<Option<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::SeriesTooShort { len: 0, needed: 0 });
        }
        Ok(Self {
            values,
            start: 0,
            dates: None,
        })
    }

    /// Builds a complete series (no missing slots).
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().copied().map(Some).collect())
    }

    pub fn with_start(mut self, start: i64) -> Self {
        self.start = start;
        self
    }

    pub fn with_dates(mut self, dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.len() != self.values.len() {
            return Err(Error::DimensionMismatch {
                what: "calendar labels",
                expected: self.values.len(),
                found: dates.len(),
            });
        }
        self.dates = Some(dates);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn dates(&self) -> Option<&[NaiveDate]> {
        self.dates.as_deref()
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.values.get(i).copied().flatten()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Dense copy, `None` if any slot is missing.
    pub fn to_dense(&self) -> Option<Vec<f64>> {
        self.values.iter().copied().collect()
    }

    /// Sub-series over positions `[from, to)`; start index and labels follow.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.len() {
            return Err(Error::BadIndex(format!(
                "slice [{from}, {to}) of series with length {}",
                self.len()
            )));
        }
        Ok(Self {
            values: self.values[from..to].to_vec(),
            start: self.start + from as i64,
            dates: self.dates.as_ref().map(|d| d[from..to].to_vec()),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v.map(&f)).collect(),
            start: self.start,
            dates: self.dates.clone(),
        }
    }
}

/// Lag polynomial `c_0 + c_1 L + c_2 L^2 + ...` stored densely by lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagPolynomial {
    coeffs: Vec<f64>,
}

impl LagPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![1.0] }
    }

    /// `1 - c_1 L - ... - c_p L^p`, the sign convention of autoregressive factors.
    pub fn autoregressive(coefs: &[f64]) -> Self {
        let mut c = Vec::with_capacity(coefs.len() + 1);
        c.push(1.0);
        c.extend(coefs.iter().map(|x| -x));
        Self::new(c)
    }

    /// `1 + c_1 L + ... + c_q L^q`, the convention of moving-average factors.
    pub fn moving_average(coefs: &[f64]) -> Self {
        let mut c = Vec::with_capacity(coefs.len() + 1);
        c.push(1.0);
        c.extend_from_slice(coefs);
        Self::new(c)
    }

    /// Substitutes `L -> L^s`.
    pub fn seasonal(&self, s: usize) -> Self {
        let s = s.max(1);
        let mut c = vec![0.0; (self.coeffs.len() - 1) * s + 1];
        for (i, &x) in self.coeffs.iter().enumerate() {
            c[i * s] = x;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, lag: usize) -> f64 {
        self.coeffs.get(lag).copied().unwrap_or(0.0)
    }

    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

pub fn poly_multiply(p: &LagPolynomial, q: &LagPolynomial) -> LagPolynomial {
    let (a, b) = (p.coeffs(), q.coeffs());
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    let deg = p.degree() + q.degree();
    out.truncate(deg + 1);
    LagPolynomial::new(out)
}

/// Orders of the differencing operator `(1 - L^s)^D (1 - L)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffSpec {
    pub d: usize,
    #[serde(rename = "D")]
    pub seasonal_d: usize,
    pub s: usize,
}

impl Default for DiffSpec {
    fn default() -> Self {
        Self {
            d: 0,
            seasonal_d: 0,
            s: 1,
        }
    }
}

impl DiffSpec {
    pub fn new(d: usize, seasonal_d: usize, s: usize) -> Result<Self> {
        let spec = Self { d, seasonal_d, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s == 0 {
            return Err(Error::InvalidSpec("seasonal period must be >= 1".into()));
        }
        if self.seasonal_d > 0 && self.s < 2 {
            return Err(Error::InvalidSpec(
                "seasonal differencing needs a period >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Degree `A = s*D + d` of the expanded operator.
    pub fn order(&self) -> usize {
        self.s * self.seasonal_d + self.d
    }

    pub fn is_identity(&self) -> bool {
        self.d == 0 && self.seasonal_d == 0
    }
}

pub fn expand_diff_polynomial(spec: &DiffSpec) -> LagPolynomial {
    let first = LagPolynomial::new(vec![1.0, -1.0]);
    let seasonal = first.seasonal(spec.s);
    let mut out = LagPolynomial::one();
    for _ in 0..spec.d {
        out = poly_multiply(&out, &first);
    }
    for _ in 0..spec.seasonal_d {
        out = poly_multiply(&out, &seasonal);
    }
    out
}

/// Applies `(1 - L^s)^D (1 - L)^d`. An output slot is missing whenever any
/// input it draws on with a nonzero weight is missing.
pub fn difference(series: &TimeSeries, spec: &DiffSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let a = expand_diff_polynomial(spec);
    let order = spec.order();
    if series.len() <= order {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: order,
        });
    }
    let v = series.values();
    let out: Vec<Option<f64>> = (order..v.len())
        .map(|t| {
            let mut acc = 0.0;
            for (j, &c) in a.coeffs().iter().enumerate() {
                if c != 0.0 {
                    acc += c * v[t - j]?;
                }
            }
            Some(acc)
        })
        .collect();
    let mut diffed = TimeSeries::new(out)?.with_start(series.start() + order as i64);
    if let Some(d) = series.dates() {
        diffed = diffed.with_dates(d[order..].to_vec())?;
    }
    Ok(diffed)
}

/// Dense variant of [`difference`] for complete data.
pub fn difference_values(values: &[f64], spec: &DiffSpec) -> Result<Vec<f64>> {
    let a = expand_diff_polynomial(spec);
    let order = spec.order();
    if values.len() <= order {
        return Err(Error::SeriesTooShort {
            len: values.len(),
            needed: order,
        });
    }
    Ok((order..values.len())
        .map(|t| {
            a.coeffs()
                .iter()
                .enumerate()
                .map(|(j, &c)| c * values[t - j])
                .sum()
        })
        .collect())
}

/// Inverts the differencing: rebuilds the level series from `A` initial
/// values and the differenced tail, `x_t = w_t - sum_{j>=1} a_j x_{t-j}`.
pub fn undifference(initial: &[f64], diffed: &[f64], spec: &DiffSpec) -> Result<Vec<f64>> {
    let a = expand_diff_polynomial(spec);
    let order = spec.order();
    if initial.len() != order {
        return Err(Error::DimensionMismatch {
            what: "initial conditions",
            expected: order,
            found: initial.len(),
        });
    }
    let mut x = initial.to_vec();
    x.reserve(diffed.len());
    for &w in diffed {
        let t = x.len();
        let mut level = w;
        for j in 1..=order {
            level -= a.coeff(j) * x[t - j];
        }
        x.push(level);
    }
    Ok(x)
}

/// Coefficients `b_j` of the truncated inverse of the differencing
/// polynomial, together with the source coefficients `a_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionCoeffs {
    pub b: Vec<f64>,
    pub a: Vec<f64>,
}

impl InversionCoeffs {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

/// `b_0 = 1`, `b_j = -sum_{i=1}^{min(A, j)} a_i b_{j-i}`.
pub fn invert_diff_polynomial(a: &LagPolynomial, k: usize) -> Result<InversionCoeffs> {
    if a.coeff(0) != 1.0 {
        return Err(Error::BadPolynomial(format!(
            "leading coefficient must be 1, got {}",
            a.coeff(0)
        )));
    }
    if k == 0 {
        return Err(Error::InvalidSpec("inversion length must be >= 1".into()));
    }
    let deg = a.degree();
    let mut b = Vec::with_capacity(k);
    b.push(1.0);
    for j in 1..k {
        let mut acc = 0.0;
        for i in 1..=deg.min(j) {
            acc -= a.coeff(i) * b[j - i];
        }
        b.push(acc);
    }
    Ok(InversionCoeffs {
        b,
        a: a.coeffs()[..=deg].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(ts: &TimeSeries) -> Vec<f64> {
        ts.to_dense().unwrap()
    }

    #[test]
    fn first_difference() {
        let ts = TimeSeries::from_values(&[1.0, 2.0, 4.0, 7.0]).unwrap();
        let d = difference(&ts, &DiffSpec::new(1, 0, 1).unwrap()).unwrap();
        assert_eq!(dense(&d), vec![1.0, 2.0, 3.0]);
        assert_eq!(d.start(), 1);
    }

    #[test]
    fn identity_difference() {
        let ts = TimeSeries::from_values(&[3.0, -1.0, 2.5]).unwrap();
        let d = difference(&ts, &DiffSpec::none()).unwrap();
        assert_eq!(d, ts);
    }

    #[test]
    fn seasonal_difference_of_ramp() {
        let ramp: Vec<f64> = (1..=14).map(f64::from).collect();
        let ts = TimeSeries::from_values(&ramp).unwrap();
        let d = difference(&ts, &DiffSpec::new(0, 1, 7).unwrap()).unwrap();
        assert_eq!(dense(&d), vec![7.0; 7]);
    }

    #[test]
    fn too_short_is_rejected() {
        let ts = TimeSeries::from_values(&[1.0, 2.0]).unwrap();
        let err = difference(&ts, &DiffSpec::new(2, 0, 1).unwrap()).unwrap_err();
        assert!(matches!(err, Error::SeriesTooShort { len: 2, needed: 2 }));
    }

    #[test]
    fn missing_propagates_only_through_used_lags() {
        let mut v: Vec<Option<f64>> = (0..10).map(|x| Some(x as f64)).collect();
        v[3] = None;
        let ts = TimeSeries::new(v).unwrap();
        let d = difference(&ts, &DiffSpec::new(1, 0, 1).unwrap()).unwrap();
        let missing: Vec<usize> = d
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect();
        // outputs at t=3 and t=4 (positions 2 and 3) use x_3
        assert_eq!(missing, vec![2, 3]);
    }

    #[test]
    fn invalid_diff_specs() {
        assert!(DiffSpec::new(0, 1, 1).is_err());
        assert!(DiffSpec::new(0, 0, 0).is_err());
        assert_eq!(DiffSpec::new(1, 1, 7).unwrap().order(), 8);
    }

    #[test]
    fn expansions() {
        let e = |d, dd, s| expand_diff_polynomial(&DiffSpec::new(d, dd, s).unwrap());
        assert_eq!(e(1, 0, 1).coeffs(), &[1.0, -1.0]);
        assert_eq!(e(2, 0, 1).coeffs(), &[1.0, -2.0, 1.0]);
        assert_eq!(
            e(1, 1, 7).coeffs(),
            &[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 1.0]
        );
        assert_eq!(e(0, 0, 7).coeffs(), &[1.0]);
    }

    #[test]
    fn inversions() {
        let inv = |c: Vec<f64>, k| invert_diff_polynomial(&LagPolynomial::new(c), k).unwrap().b;
        assert_eq!(inv(vec![1.0, -1.0], 5), vec![1.0; 5]);
        assert_eq!(inv(vec![1.0, -2.0, 1.0], 5), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(invert_diff_polynomial(&LagPolynomial::new(vec![2.0, 1.0]), 3).is_err());
    }

    #[test]
    fn inversion_matches_long_division() {
        // 1 / ((1-L)(1-L^7)): long division carried out in integers
        let a: Vec<i64> = vec![1, -1, 0, 0, 0, 0, 0, -1, 1];
        let k = 10;
        let mut rem: Vec<i64> = vec![0; k + a.len()];
        rem[0] = 1;
        let mut quotient = Vec::with_capacity(k);
        for j in 0..k {
            let q = rem[j];
            quotient.push(q as f64);
            for (i, &ai) in a.iter().enumerate() {
                rem[j + i] -= q * ai;
            }
        }
        let got = invert_diff_polynomial(
            &LagPolynomial::new(a.iter().map(|&x| x as f64).collect()),
            k,
        )
        .unwrap();
        assert_eq!(got.b, quotient);
        assert_eq!(got.b, vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn products() {
        let p = LagPolynomial::new(vec![1.0, -0.7]);
        assert_eq!(poly_multiply(&p, &LagPolynomial::one()).coeffs(), &[1.0, -0.7]);
        let m = poly_multiply(
            &LagPolynomial::new(vec![1.0, -1.0]),
            &LagPolynomial::new(vec![1.0, 1.0]),
        );
        assert_eq!(m.coeffs(), &[1.0, 0.0, -1.0]);
        let seasonal = LagPolynomial::moving_average(&[0.5]).seasonal(7);
        let prod = poly_multiply(&LagPolynomial::moving_average(&[0.6]), &seasonal);
        let expect = [1.0, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.3];
        for (g, e) in prod.coeffs().iter().zip(expect) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(prod.degree(), 8);
    }

    #[test]
    fn degree_ignores_trailing_zeros() {
        let p = LagPolynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeffs().len(), 4);
    }

    fn diff_specs() -> impl Strategy<Value = DiffSpec> {
        (0usize..=2, 0usize..=2, prop::sample::select(vec![1usize, 4, 7, 12])).prop_map(
            |(d, dd, s)| {
                let dd = if s == 1 { 0 } else { dd };
                DiffSpec::new(d, dd, s).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn truncated_convolution_is_unit_impulse(spec in diff_specs(), k in 1usize..=64) {
            let a = expand_diff_polynomial(&spec);
            let inv = invert_diff_polynomial(&a, k).unwrap();
            for j in 0..k {
                let conv: f64 = (0..=j).map(|i| a.coeff(i) * inv.b[j - i]).sum();
                let want = if j == 0 { 1.0 } else { 0.0 };
                prop_assert_eq!(conv, want);
            }
        }

        #[test]
        fn undifference_round_trips(
            spec in diff_specs(),
            xs in prop::collection::vec(-100.0f64..100.0, 60..120),
        ) {
            let order = spec.order();
            let w = difference_values(&xs, &spec).unwrap();
            let back = undifference(&xs[..order], &w, &spec).unwrap();
            for (b, x) in back.iter().zip(&xs) {
                prop_assert!((b - x).abs() <= 1e-10 * x.abs().max(1.0) * 1e3);
            }
        }

        #[test]
        fn difference_is_linear(
            spec in diff_specs(),
            xs in prop::collection::vec(-10.0f64..10.0, 40),
            ys in prop::collection::vec(-10.0f64..10.0, 40),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let combo: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| alpha * x + beta * y).collect();
            let lhs = difference_values(&combo, &spec).unwrap();
            let dx = difference_values(&xs, &spec).unwrap();
            let dy = difference_values(&ys, &spec).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (alpha * dx[i] + beta * dy[i])).abs() < 1e-9);
            }
        }
    }
}

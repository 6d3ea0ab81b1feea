//! Unconstrained parameterisation of stationary / invertible polynomial blocks.
//!
//! Each block `1 - c_1 L - ... - c_p L^p` is represented by its partial
//! autocorrelations `r_k = tanh(u_k)`; the Durbin-Levinson recursion maps
//! any `u` in R^p to a polynomial with all roots outside the unit circle.

/// Partial autocorrelations to AR coefficients.
pub fn pacf_to_coefs(pacf: &[f64]) -> Vec<f64> {
    let p = pacf.len();
    let mut phi = vec![0.0; p];
    let mut prev = vec![0.0; p];
    for k in 0..p {
        let r = pacf[k];
        prev[..k].copy_from_slice(&phi[..k]);
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi[k] = r;
    }
    phi
}

/// Step-down (Schur-Cohn) recursion. `None` when some partial
/// autocorrelation has modulus >= 1, i.e. the polynomial is not stationary.
pub fn coefs_to_pacf(coefs: &[f64]) -> Option<Vec<f64>> {
    let p = coefs.len();
    let mut phi = coefs.to_vec();
    let mut pacf = vec![0.0; p];
    for k in (0..p).rev() {
        let r = phi[k];
        if !r.is_finite() || r.abs() >= 1.0 {
            return None;
        }
        pacf[k] = r;
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (phi[j] + r * phi[k - 1 - j]) / denom).collect();
        phi[..k].copy_from_slice(&prev);
    }
    Some(pacf)
}

/// True when `1 - sum c_i L^i` has every root strictly outside the unit circle.
pub fn is_stationary(coefs: &[f64]) -> bool {
    coefs_to_pacf(coefs).is_some()
}

/// True when `1 + sum c_i L^i` has every root strictly outside the unit circle.
pub fn is_invertible(coefs: &[f64]) -> bool {
    let neg: Vec<f64> = coefs.iter().map(|c| -c).collect();
    is_stationary(&neg)
}

pub fn ar_from_unconstrained(u: &[f64]) -> Vec<f64> {
    let pacf: Vec<f64> = u.iter().map(|x| x.tanh()).collect();
    pacf_to_coefs(&pacf)
}

pub fn ma_from_unconstrained(u: &[f64]) -> Vec<f64> {
    ar_from_unconstrained(u).into_iter().map(|c| -c).collect()
}

/// Inverse of [`ar_from_unconstrained`]; partial autocorrelations are
/// clamped just inside the unit interval so boundary estimates stay finite.
pub fn ar_to_unconstrained(coefs: &[f64]) -> Option<Vec<f64>> {
    coefs_to_pacf(coefs).map(|r| r.iter().map(|x| x.clamp(-0.9999, 0.9999).atanh()).collect())
}

pub fn ma_to_unconstrained(coefs: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = coefs.iter().map(|c| -c).collect();
    ar_to_unconstrained(&neg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ar1_and_ar2() {
        assert_eq!(pacf_to_coefs(&[0.7]), vec![0.7]);
        // AR(2) with pacf (r1, r2): phi1 = r1 (1 - r2), phi2 = r2
        let c = pacf_to_coefs(&[0.5, -0.3]);
        assert!((c[0] - 0.5 * 1.3).abs() < 1e-15);
        assert!((c[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn stationarity_checks() {
        assert!(is_stationary(&[0.7]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[1.2, -0.1]));
        assert!(is_stationary(&[1.2, -0.5]));
        assert!(is_invertible(&[0.6]));
        assert!(!is_invertible(&[-1.5]));
        assert!(is_stationary(&[]));
    }

    proptest! {
        #[test]
        fn round_trip(u in prop::collection::vec(-3.0f64..3.0, 0..6)) {
            let c = ar_from_unconstrained(&u);
            prop_assert!(is_stationary(&c));
            let back = ar_to_unconstrained(&c).unwrap();
            for (a, b) in u.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-6);
            }
            let m = ma_from_unconstrained(&u);
            prop_assert!(is_invertible(&m));
        }
    }
}

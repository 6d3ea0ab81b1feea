use carima_core::oracle::{check_forecast_variance, check_inversion, check_likelihood, check_psi_weights};

#[test]
fn psi_weights_match_impulse_response() {
    let out = check_psi_weights(40, 11);
    assert!(out.passed, "{out:?}");
}

#[test]
fn likelihood_matches_covariance_density() {
    let out = check_likelihood(20, 12).unwrap();
    assert!(out.passed, "{out:?}");
}

#[test]
fn inversion_matches_long_division() {
    let out = check_inversion().unwrap();
    assert_eq!(out.cases, 36);
    assert!(out.passed, "{out:?}");
}

#[test]
fn forecast_variance_small_monte_carlo() {
    // 4000 paths: relative standard error of a variance is about 2.2%
    let out = check_forecast_variance(4000, &[1, 7], 13).unwrap();
    assert!(out.worst < 0.1, "{out:?}");
}

//! Causal effects of a persistent intervention on a time series, estimated
//! by forecasting the counterfactual with a seasonal ARIMA model fitted on
//! the pre-intervention data.

pub mod causal;
pub mod error;
mod linalg;
pub mod sarima;
pub mod oracle;
pub mod regarima;
pub mod series;
pub mod sim;

pub use causal::{
    run_carima, AnalysisConfig, CausalReport, EffectPath, EffectTest, Estimand, Scale, TestMethod,
};
pub use error::{Error, Result};
pub use sarima::{
    fit, forecast, log_likelihood, psi_weights, select_order, FitOptions, FittedModel, Forecast,
    ModelOrder, Regressors, SarimaParams, SearchOptions,
};
pub use series::{DiffSpec, InversionCoeffs, LagPolynomial, TimeSeries};

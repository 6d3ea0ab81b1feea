//! Seasonal ARIMA models with regression errors.

mod fit;
mod forecast;
pub(crate) mod kalman;
mod likelihood;
mod model;
pub mod optim;
mod select;
pub mod transform;

pub use fit::{evaluate, fit, parameter_covariance, FitOptions, FittedModel};
pub use forecast::{forecast, psi_weights, Forecast};
pub use likelihood::log_likelihood;
pub use model::{ModelOrder, Regressors, SarimaParams, INTERCEPT, MAX_NONSEASONAL, MAX_SEASONAL};
pub use optim::OptimOptions;
pub use select::{search_orders, select_order, OrderSearch, SearchOptions};

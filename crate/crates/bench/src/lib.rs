//! Shared fixtures for the benchmarks.

use carima_core::sim::{simulate_control, StudyConfig};
use carima_core::{ModelOrder, Regressors, SarimaParams, TimeSeries};

/// Pre-period of one replication of the default simulation design, with an
/// intercept column and the generating parameters.
pub struct Fixture {
    pub config: StudyConfig,
    pub y: TimeSeries,
    pub x: Regressors,
    pub order: ModelOrder,
    pub params: SarimaParams,
}

pub fn fixture() -> Fixture {
    let config = StudyConfig::default();
    let control = simulate_control(&config.dgp, &mut config.replication_rng(0));
    let n = config.dgp.t_star() + 1;
    let y = control.series().slice(0, n).expect("pre-period");
    let x = control.regressors().slice(0, n).expect("pre-period");
    let x = x.with_intercept(n).expect("intercept");
    let d = &config.dgp;
    let params = d.true_params().with_beta(vec![d.level, d.beta1, d.beta2]);
    Fixture {
        order: d.true_order(),
        config,
        y,
        x,
        params,
    }
}

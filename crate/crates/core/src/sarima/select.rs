//! BIC order selection with a fixed differencing specification.

use std::cmp::Ordering;
use std::collections::HashMap;

use log::debug;

use super::fit::{fit, FitOptions, FittedModel};
use super::model::{ModelOrder, Regressors};
use super::optim::OptimOptions;
use crate::error::{Error, Result};
use crate::series::{DiffSpec, TimeSeries};

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub max_p: usize,
    pub max_q: usize,
    pub max_seasonal_p: usize,
    pub max_seasonal_q: usize,
    /// Fit every order in the grid instead of walking neighbourhoods.
    /// Only allowed for `max_p, max_q <= 2`.
    pub exhaustive: bool,
    /// Options for the final fit of the selected order.
    pub fit: FitOptions,
    /// Cheaper optimiser settings used while screening candidates.
    pub screening: OptimOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_p: 3,
            max_q: 3,
            max_seasonal_p: 2,
            max_seasonal_q: 2,
            exhaustive: false,
            fit: FitOptions::default(),
            screening: OptimOptions {
                ftol: 1e-6,
                max_evals: 600,
                max_restarts: 1,
                ..OptimOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrderSearch {
    pub best: FittedModel,
    /// Every order tried, in visiting order, with its BIC (`None` if the fit
    /// failed).
    pub visited: Vec<(ModelOrder, Option<f64>)>,
}

type Key = (usize, usize, usize, usize);

fn better(a: &FittedModel, b: &FittedModel) -> bool {
    match a.bic.total_cmp(&b.bic) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => (a.n_params, a.order.key()) < (b.n_params, b.order.key()),
    }
}

struct Searcher<'a> {
    y: &'a TimeSeries,
    x: &'a Regressors,
    diff: DiffSpec,
    opts: &'a SearchOptions,
    fits: HashMap<Key, Option<FittedModel>>,
    visited: Vec<(ModelOrder, Option<f64>)>,
}

impl Searcher<'_> {
    fn in_grid(&self, k: Key) -> bool {
        let seasonal_ok = self.diff.s >= 2 || (k.2 == 0 && k.3 == 0);
        k.0 <= self.opts.max_p
            && k.1 <= self.opts.max_q
            && k.2 <= self.opts.max_seasonal_p
            && k.3 <= self.opts.max_seasonal_q
            && seasonal_ok
    }

    fn order(&self, k: Key) -> ModelOrder {
        ModelOrder {
            p: k.0,
            q: k.1,
            seasonal_p: k.2,
            seasonal_q: k.3,
            diff: self.diff,
        }
    }

    fn try_fit(&mut self, k: Key, warm: Option<&FittedModel>) -> Option<FittedModel> {
        if let Some(done) = self.fits.get(&k) {
            return done.clone();
        }
        let order = self.order(k);
        let mut fo = self.opts.fit.clone();
        fo.optim = self.opts.screening.clone();
        if let Some(w) = warm {
            fo.init = Some(w.params.clone());
        }
        let res = match fit(self.y, self.x, &order, &fo) {
            Ok(m) => Some(m),
            Err(Error::OptimizerDiverged { best: Some(m), .. }) => Some(*m),
            Err(e) => {
                debug!("fit {} failed: {}", order, e);
                None
            }
        };
        self.visited.push((order, res.as_ref().map(|m| m.bic)));
        self.fits.insert(k, res.clone());
        res
    }

    fn neighbours(&self, k: Key) -> Vec<Key> {
        let (p, q, sp, sq) = (k.0 as i64, k.1 as i64, k.2 as i64, k.3 as i64);
        let deltas: [(i64, i64, i64, i64); 12] = [
            (1, 0, 0, 0),
            (-1, 0, 0, 0),
            (0, 1, 0, 0),
            (0, -1, 0, 0),
            (0, 0, 1, 0),
            (0, 0, -1, 0),
            (0, 0, 0, 1),
            (0, 0, 0, -1),
            (1, 1, 0, 0),
            (-1, -1, 0, 0),
            (0, 0, 1, 1),
            (0, 0, -1, -1),
        ];
        deltas
            .iter()
            .map(|d| (p + d.0, q + d.1, sp + d.2, sq + d.3))
            .filter(|c| c.0 >= 0 && c.1 >= 0 && c.2 >= 0 && c.3 >= 0)
            .map(|c| (c.0 as usize, c.1 as usize, c.2 as usize, c.3 as usize))
            .filter(|&c| self.in_grid(c))
            .collect()
    }
}

fn clamp_start(k: Key, o: &SearchOptions, seasonal: bool) -> Key {
    let (sp, sq) = if seasonal { (k.2, k.3) } else { (0, 0) };
    (
        k.0.min(o.max_p),
        k.1.min(o.max_q),
        sp.min(o.max_seasonal_p),
        sq.min(o.max_seasonal_q),
    )
}

/// Searches `(p, q, P, Q)` for the lowest BIC.
///
/// The stepwise search fits four starting orders and then repeatedly moves
/// to the best-scoring neighbour (each order changed by one, or `p, q` and
/// `P, Q` together) until no neighbour improves. Ties go to fewer
/// parameters, then to the lexicographically smaller order.
pub fn search_orders(y: &TimeSeries, x: &Regressors, diff: DiffSpec, opts: &SearchOptions) -> Result<OrderSearch> {
    diff.validate()?;
    if opts.max_p > 3 || opts.max_q > 3 || opts.max_seasonal_p > 2 || opts.max_seasonal_q > 2 {
        return Err(Error::InvalidSpec(
            "search bounds are p, q <= 3 and P, Q <= 2".into(),
        ));
    }
    if opts.exhaustive && (opts.max_p > 2 || opts.max_q > 2) {
        return Err(Error::InvalidSpec(
            "exhaustive search requires max p, q <= 2".into(),
        ));
    }
    let mut s = Searcher {
        y,
        x,
        diff,
        opts,
        fits: HashMap::new(),
        visited: Vec::new(),
    };
    let mut best: Option<FittedModel> = None;
    let consider = |m: Option<FittedModel>, best: &mut Option<FittedModel>| {
        if let Some(m) = m {
            if best.as_ref().is_none_or(|b| better(&m, b)) {
                *best = Some(m);
            }
        }
    };

    if opts.exhaustive {
        for p in 0..=opts.max_p {
            for q in 0..=opts.max_q {
                for sp in 0..=opts.max_seasonal_p {
                    for sq in 0..=opts.max_seasonal_q {
                        let k = (p, q, sp, sq);
                        if s.in_grid(k) {
                            let m = s.try_fit(k, None);
                            consider(m, &mut best);
                        }
                    }
                }
            }
        }
    } else {
        let seasonal = diff.s >= 2;
        let starts = [(2, 2, 1, 1), (0, 0, 0, 0), (1, 0, 1, 0), (0, 1, 0, 1)];
        for st in starts {
            let k = clamp_start(st, opts, seasonal);
            let m = s.try_fit(k, None);
            consider(m, &mut best);
        }
        while let Some(current) = best.clone() {
            let mut step: Option<FittedModel> = None;
            for nb in s.neighbours(current.order.key()) {
                let m = s.try_fit(nb, Some(&current));
                consider(m, &mut step);
            }
            match step {
                Some(m) if better(&m, &current) => best = Some(m),
                _ => break,
            }
        }
    }

    let screened = best.ok_or(Error::AllFitsFailed)?;
    let mut fo = opts.fit.clone();
    fo.init = Some(screened.params.clone());
    let best = match fit(y, x, &screened.order, &fo) {
        Ok(m) if m.loglik >= screened.loglik => m,
        _ => screened,
    };
    Ok(OrderSearch {
        best,
        visited: s.visited,
    })
}

pub fn select_order(y: &TimeSeries, x: &Regressors, diff: DiffSpec, opts: &SearchOptions) -> Result<FittedModel> {
    search_orders(y, x, diff, opts).map(|s| s.best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn tie_break_prefers_fewer_params_then_lexicographic() {
        let y = TimeSeries::from_values(&(0..40).map(|t| (t as f64).cos()).collect::<Vec<_>>()).unwrap();
        let base = fit(&y, &Regressors::none(), &ModelOrder::arma(1, 0), &FitOptions::default()).unwrap();
        let mut a = base.clone();
        let mut b = base.clone();
        a.order = ModelOrder::arma(0, 1);
        b.order = ModelOrder::arma(1, 0);
        assert!(better(&a, &b));
        b.n_params = 1;
        assert!(better(&b, &a));
    }

    #[test]
    fn white_noise_selects_empty_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let y: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ts = TimeSeries::from_values(&y).unwrap();
        let search = search_orders(&ts, &Regressors::none(), DiffSpec::none(), &SearchOptions::default()).unwrap();
        assert_eq!(search.best.order.key(), (0, 0, 0, 0));
        // non-seasonal data: seasonal terms never proposed
        assert!(search.visited.iter().all(|(o, _)| o.seasonal_p == 0 && o.seasonal_q == 0));
    }

    #[test]
    fn exhaustive_bounds_checked() {
        let ts = TimeSeries::from_values(&[0.0; 50]).unwrap();
        let opts = SearchOptions {
            exhaustive: true,
            ..SearchOptions::default()
        };
        assert!(search_orders(&ts, &Regressors::none(), DiffSpec::none(), &opts).is_err());
    }
}

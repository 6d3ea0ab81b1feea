//! Derivative-free simplex search with restarts followed by a quasi-Newton
//! polish. Small parameter counts only; everything runs in the unconstrained
//! coordinates produced by [`super::transform`].

#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Relative tolerance on the objective.
    pub ftol: f64,
    /// Absolute tolerance on the gradient sup-norm during the polish.
    pub gtol: f64,
    /// Evaluation budget per stage.
    pub max_evals: usize,
    /// Initial simplex edge length.
    pub step: f64,
    pub max_restarts: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            ftol: 1e-8,
            gtol: 1e-3,
            max_evals: 1000,
            step: 0.5,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    ftol: f64,
    max_evals: usize,
) -> OptimResult {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        finite_or_inf(f(x))
    };
    if n == 0 {
        let v = eval(x0, &mut evals);
        return OptimResult {
            x: Vec::new(),
            f: v,
            evals,
            converged: true,
        };
    }
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    let mut converged = false;
    let mut order: Vec<usize> = (0..=n).collect();

    while evals < max_evals {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        let (fb, fw) = (values[best], values[worst]);
        if fw.is_finite() && (fw - fb) <= ftol * (1.0 + fb.abs()) {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for &idx in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[idx]) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < fb {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < fw {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fw.min(fr) {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        // shrink towards the best vertex
        let xb = simplex[best].clone();
        for idx in 0..=n {
            if idx == best {
                continue;
            }
            for (x, b) in simplex[idx].iter_mut().zip(&xb) {
                *x = b + 0.5 * (*x - b);
            }
            values[idx] = eval(&simplex[idx], &mut evals);
        }
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    OptimResult {
        x: simplex[best].clone(),
        f: values[best],
        evals,
        converged,
    }
}

/// Simplex restarted from its own optimum until a restart stops improving.
pub fn simplex_with_restarts(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    opts: &OptimOptions,
) -> OptimResult {
    let mut res = nelder_mead(f, x0, opts.step, opts.ftol, opts.max_evals);
    let mut step = opts.step;
    for _ in 0..opts.max_restarts {
        if res.evals >= opts.max_evals || x0.is_empty() {
            break;
        }
        step = (step * 0.5).max(0.05);
        let budget = opts.max_evals - res.evals;
        let next = nelder_mead(f, &res.x, step, opts.ftol, budget);
        let improved = res.f - next.f;
        let evals = res.evals + next.evals;
        let done = improved <= opts.ftol * (1.0 + res.f.abs());
        if next.f <= res.f {
            res = OptimResult {
                evals,
                converged: next.converged,
                ..next
            };
        } else {
            res.evals = evals;
        }
        if done {
            break;
        }
    }
    res
}

pub fn numeric_gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    evals: &mut usize,
) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        *evals += 2;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// BFGS with central-difference gradients and Armijo backtracking.
pub fn bfgs(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    f0: f64,
    opts: &OptimOptions,
) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f0;
    let mut evals = 0usize;
    if n == 0 {
        return OptimResult {
            x,
            f: fx,
            evals,
            converged: true,
        };
    }
    let mut h = identity(n);
    let mut g = numeric_gradient(f, &x, &mut evals);
    let mut converged = false;
    while evals < opts.max_evals {
        if !g.iter().all(|v| v.is_finite()) {
            break;
        }
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm <= opts.gtol {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = (0..n)
            .map(|i| -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope: f64 = dir.iter().zip(&g).map(|(d, gi)| d * gi).sum();
        if slope >= 0.0 {
            h = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = -g.iter().map(|v| v * v).sum::<f64>();
        }
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xn: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + alpha * d).collect();
            let fnew = finite_or_inf(f(&xn));
            evals += 1;
            if fnew <= fx + 1e-4 * alpha * slope {
                accepted = Some((xn, fnew));
                break;
            }
            alpha *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // no descent along the quasi-Newton direction: at the optimum
            // to within finite-difference noise
            converged = gnorm <= 10.0 * opts.gtol;
            break;
        };
        let gn = numeric_gradient(f, &xn, &mut evals);
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let rel = (fx - fnew) / (1.0 + fx.abs());
        x = xn;
        fx = fnew;
        g = gn;
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| h[i * n + j] * yv[j]).sum())
                .collect();
            let yhy: f64 = yv.iter().zip(&hy).map(|(a, b)| a * b).sum();
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j]
                        - hy[i] * s[j]
                        - s[i] * hy[j]);
                }
            }
        }
        if rel.abs() < 1e-14 {
            converged = true;
            break;
        }
    }
    OptimResult {
        x,
        f: fx,
        evals,
        converged,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Central-difference Hessian.
pub fn numeric_hessian(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let mut hess = vec![0.0; n * n];
    let f0 = f(x);
    let mut xp = x.to_vec();
    for i in 0..n {
        let hi = steps[i];
        xp[i] = x[i] + hi;
        let fp = f(&xp);
        xp[i] = x[i] - hi;
        let fm = f(&xp);
        xp[i] = x[i];
        hess[i * n + i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = steps[j];
            let mut corner = |si: f64, sj: f64| {
                xp[i] = x[i] + si * hi;
                xp[j] = x[j] + sj * hj;
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0)
                + corner(-1.0, -1.0))
                / (4.0 * hi * hj);
            hess[i * n + j] = v;
            hess[j * n + i] = v;
        }
    }
    hess
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn simplex_then_bfgs_finds_rosenbrock_minimum() {
        let mut f = |x: &[f64]| rosenbrock(x);
        let opts = OptimOptions {
            gtol: 1e-8,
            ..OptimOptions::default()
        };
        let nm = simplex_with_restarts(&mut f, &[-1.2, 1.0], &opts);
        let polished = bfgs(&mut f, &nm.x, nm.f, &opts);
        assert!((polished.x[0] - 1.0).abs() < 1e-5, "{:?}", polished.x);
        assert!((polished.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn quadratic_hessian() {
        let mut f = |x: &[f64]| 3.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 5.0 * x[1] * x[1];
        let h = numeric_hessian(&mut f, &[0.3, -0.2]);
        let want = [6.0, 2.0, 2.0, 10.0];
        for (a, b) in h.iter().zip(want) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn empty_parameter_vector() {
        let mut f = |_: &[f64]| 4.0;
        let r = nelder_mead(&mut f, &[], 0.5, 1e-8, 10);
        assert_eq!(r.f, 4.0);
        assert!(r.converged);
    }
}

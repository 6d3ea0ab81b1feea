use serde::{Deserialize, Serialize};

/// Knots `(days after t*, multiplier)` of the irregular effect profile,
/// linearly interpolated and held flat after the last knot.
pub const IRREGULAR_PROFILE_V1: [(usize, f64); 4] = [(1, 1.10), (60, 1.40), (150, 1.05), (184, 1.25)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InterventionSpec {
    /// Multiplies the post-period by `1 + percent / 100`.
    LevelShift { percent: f64 },
    /// Time-varying multiplier from [`IRREGULAR_PROFILE_V1`].
    Irregular,
}

impl InterventionSpec {
    pub fn label(&self) -> String {
        match self {
            InterventionSpec::LevelShift { percent } => format!("+{percent}%"),
            InterventionSpec::Irregular => "NS".to_string(),
        }
    }

    /// The paper-style level shifts followed by the irregular profile.
    pub fn standard_set() -> Vec<InterventionSpec> {
        let mut v: Vec<_> = [1.0, 10.0, 25.0, 50.0, 100.0]
            .into_iter()
            .map(|percent| InterventionSpec::LevelShift { percent })
            .collect();
        v.push(InterventionSpec::Irregular);
        v
    }

    /// Multiplier applied `h >= 1` days after the intervention.
    pub fn multiplier(&self, h: usize) -> f64 {
        match *self {
            InterventionSpec::LevelShift { percent } => 1.0 + percent / 100.0,
            InterventionSpec::Irregular => irregular_multiplier(h),
        }
    }
}

fn irregular_multiplier(h: usize) -> f64 {
    let knots = &IRREGULAR_PROFILE_V1;
    if h <= knots[0].0 {
        return knots[0].1;
    }
    for w in knots.windows(2) {
        let ((h0, m0), (h1, m1)) = (w[0], w[1]);
        if h <= h1 {
            let f = (h - h0) as f64 / (h1 - h0) as f64;
            return m0 + f * (m1 - m0);
        }
    }
    knots[knots.len() - 1].1
}

/// Treated series and the true point effects `tau_t = treated - control`
/// (zero up to `t_star`).
#[derive(Debug, Clone, PartialEq)]
pub struct Treated {
    pub y: Vec<f64>,
    pub tau: Vec<f64>,
}

pub fn apply_intervention(y_control: &[f64], spec: &InterventionSpec, t_star: usize) -> Treated {
    let mut y = y_control.to_vec();
    let mut tau = vec![0.0; y.len()];
    for t in t_star + 1..y.len() {
        let treated = y_control[t] * spec.multiplier(t - t_star);
        tau[t] = treated - y_control[t];
        y[t] = treated;
    }
    Treated { y, tau }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_identity() {
        let y = [1.0, 2.0, 3.0];
        let t = apply_intervention(&y, &InterventionSpec::LevelShift { percent: 0.0 }, 0);
        assert_eq!(t.y, y);
        assert!(t.tau.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn quarter_shift() {
        let t = apply_intervention(&[100.0, 100.0], &InterventionSpec::LevelShift { percent: 25.0 }, 0);
        assert_eq!(t.y, vec![100.0, 125.0]);
        assert_eq!(t.tau, vec![0.0, 25.0]);
    }

    #[test]
    fn irregular_knots() {
        let s = InterventionSpec::Irregular;
        assert_eq!(s.multiplier(1), 1.10);
        assert!((s.multiplier(60) - 1.40).abs() < 1e-15);
        assert!((s.multiplier(150) - 1.05).abs() < 1e-15);
        assert!((s.multiplier(184) - 1.25).abs() < 1e-15);
        assert!((s.multiplier(300) - 1.25).abs() < 1e-15);
        assert!(s.multiplier(30) > 1.10 && s.multiplier(30) < 1.40);
    }
}

use serde::{Deserialize, Serialize};

/// Binary assignment path of a single unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreatmentPath {
    pub w: Vec<u8>,
    /// Index of the last untreated period.
    pub t_star: usize,
}

impl TreatmentPath {
    /// Zeros through `t_star`, ones afterwards.
    pub fn persistent(len: usize, t_star: usize) -> Self {
        Self {
            w: (0..len).map(|t| u8::from(t > t_star)).collect(),
            t_star,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Treatment switched on at or before `t_star`.
    AnticipatedTreatment,
    /// Assignment changes after the intervention started.
    NonPersistent,
    /// Entry other than 0 or 1.
    NonBinary,
    /// `t_star` outside the path, or no post period.
    BadIntervention,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub index: Option<usize>,
}

impl Violation {
    pub fn label(&self) -> &'static str {
        match self.kind {
            ViolationKind::AnticipatedTreatment => "anticipated treatment",
            ViolationKind::NonPersistent => "non-persistent",
            ViolationKind::NonBinary => "non-binary assignment",
            ViolationKind::BadIntervention => "intervention index out of range",
        }
    }
}

/// Checks that the path describes one persistent intervention right after
/// `t_star`. Returns every violation found, empty when the path is valid.
pub fn validate_treatment(path: &TreatmentPath) -> Vec<Violation> {
    let mut out = Vec::new();
    let w = &path.w;
    if path.t_star + 1 >= w.len() {
        out.push(Violation {
            kind: ViolationKind::BadIntervention,
            index: Some(path.t_star),
        });
    }
    for (t, &v) in w.iter().enumerate() {
        if v > 1 {
            out.push(Violation {
                kind: ViolationKind::NonBinary,
                index: Some(t),
            });
        }
    }
    for (t, &v) in w.iter().enumerate().take(path.t_star + 1) {
        if v != 0 {
            out.push(Violation {
                kind: ViolationKind::AnticipatedTreatment,
                index: Some(t),
            });
        }
    }
    if let Some(&first) = w.get(path.t_star + 1) {
        for (t, &v) in w.iter().enumerate().skip(path.t_star + 2) {
            if v != first {
                out.push(Violation {
                    kind: ViolationKind::NonPersistent,
                    index: Some(t),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persistent_path_is_valid() {
        assert!(validate_treatment(&TreatmentPath::persistent(6, 2)).is_empty());
    }

    #[test]
    fn early_one_is_anticipation() {
        let v = validate_treatment(&TreatmentPath {
            w: vec![0, 1, 0, 1, 1],
            t_star: 2,
        });
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].label(), "anticipated treatment");
        assert_eq!(v[0].index, Some(1));
    }

    #[test]
    fn toggling_is_non_persistent() {
        let v = validate_treatment(&TreatmentPath {
            w: vec![0, 0, 1, 0, 1],
            t_star: 1,
        });
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::NonPersistent);
        assert_eq!(v[0].index, Some(3));
    }
}

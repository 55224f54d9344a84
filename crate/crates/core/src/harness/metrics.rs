use serde::{Deserialize, Serialize};

/// `|estimate - truth| / |truth|`.
pub fn relative_error(estimate: f64, truth: f64) -> f64 {
    (estimate - truth).abs() / truth.abs()
}

/// Root-mean-square difference of two equally long sequences.
pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rmse of sequences with different lengths");
    if a.is_empty() {
        return 0.0;
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (s / a.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamError {
    pub name: String,
    pub estimate: f64,
    pub truth: f64,
    pub relative_error: f64,
}

impl ParamError {
    pub fn new(name: impl Into<String>, estimate: f64, truth: f64) -> Self {
        ParamError {
            name: name.into(),
            estimate,
            truth,
            relative_error: relative_error(estimate, truth),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRmse {
    pub label: String,
    /// V
    pub rmse: f64,
}

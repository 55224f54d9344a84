use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ParamSpace, SensitivityError, SobolSequence};

/// Base sample and its radial variants.
///
/// Rows `0..m` of `xi` form the first block, rows `m..2m` the second. Row
/// `j` of `radial[k]` is row `j` of the first block with column `k` taken
/// from row `m + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrices {
    pub m: usize,
    pub xi: Vec<Vec<f64>>,
    pub radial: Vec<Vec<Vec<f64>>>,
}

/// Draws `2m` quasi-random points over `space`.
///
/// Both blocks come from one Sobol sequence of twice the parameter
/// dimension, the first block from the leading coordinates and the second
/// from the trailing ones.
pub fn sample_matrices(space: &ParamSpace, m: usize) -> Result<SampleMatrices, SensitivityError> {
    space.validate()?;
    if m == 0 {
        return Err(SensitivityError::EmptySample);
    }
    let p = space.dim();
    let pts = SobolSequence::sample(2 * p, m)?;
    let mut xi = Vec::with_capacity(2 * m);
    xi.extend(pts.iter().map(|u| space.scale(&u[..p])));
    xi.extend(pts.iter().map(|u| space.scale(&u[p..])));
    let radial = (0..p)
        .map(|k| {
            (0..m)
                .map(|j| {
                    let mut row = xi[j].clone();
                    row[k] = xi[m + j][k];
                    row
                })
                .collect()
        })
        .collect();
    Ok(SampleMatrices { m, xi, radial })
}

/// Total-effect indices of several outputs at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiEffect {
    /// `indices[k][o]`: effect of parameter `k` on output `o`.
    pub indices: Vec<Vec<f64>>,
    /// Total model evaluations attempted.
    pub evaluations: usize,
    /// Evaluations that failed and were excluded.
    pub failed: usize,
}

/// Total-effect indices of a scalar function.
pub fn total_effect<F>(f: F, mats: &SampleMatrices) -> Result<Vec<f64>, SensitivityError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let r = total_effect_multi(
        |x| {
            let v = f(x);
            v.is_finite().then(|| vec![v])
        },
        mats,
        1,
    )?;
    Ok(r.indices.into_iter().map(|v| v[0]).collect())
}

/// Total-effect indices of a vector-valued function that may fail.
///
/// A failed evaluation (`None`) is dropped from the variance and from every
/// difference it takes part in. Rows are evaluated in parallel but reduced
/// in a fixed order, so results do not depend on the thread count.
pub fn total_effect_multi<F>(f: F, mats: &SampleMatrices, outputs: usize) -> Result<MultiEffect, SensitivityError>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    let m = mats.m;
    let p = mats.radial.len();
    let rows: Vec<&[f64]> = mats
        .xi
        .iter()
        .map(|r| r.as_slice())
        .chain(mats.radial.iter().flatten().map(|r| r.as_slice()))
        .collect();
    let values: Vec<Option<Vec<f64>>> = rows
        .par_iter()
        .map(|x| f(x).filter(|v| v.len() == outputs && v.iter().all(|y| y.is_finite())))
        .collect();
    let total = values.len();
    let failed = values.iter().filter(|v| v.is_none()).count();
    if failed * 100 > total {
        return Err(SensitivityError::Unreliable { failed, total });
    }
    let base = &values[..2 * m];
    let mut indices = vec![vec![0.0; outputs]; p];
    for o in 0..outputs {
        let ok: Vec<f64> = base.iter().flatten().map(|v| v[o]).collect();
        let n = ok.len() as f64;
        let mean = ok.iter().sum::<f64>() / n;
        let var = ok.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        if !(var > 0.0) {
            return Err(SensitivityError::Degenerate { output: o });
        }
        for (k, idx) in indices.iter_mut().enumerate() {
            let rad = &values[2 * m + k * m..2 * m + (k + 1) * m];
            let mut sum = 0.0;
            let mut pairs = 0usize;
            for j in 0..m {
                if let (Some(a), Some(b)) = (&base[j], &rad[j]) {
                    sum += (a[o] - b[o]).powi(2);
                    pairs += 1;
                }
            }
            idx[o] = sum / (2.0 * pairs as f64) / var;
        }
    }
    Ok(MultiEffect {
        indices,
        evaluations: total,
        failed,
    })
}

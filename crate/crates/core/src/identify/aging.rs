use serde::{Deserialize, Serialize};

use super::IdentifyError;

/// Coefficients of the film-growth and electrolyte-loss correlations.
/// Film coefficients are in nm per unit volume-fraction change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingCoefficients {
    pub k_f_pos: f64,
    pub k_f_neg: f64,
    pub k_e_neg: f64,
    pub b_e_neg: f64,
    /// Film conductivities, S/m.
    pub sigma_f0_pos: f64,
    pub sigma_f0_neg: f64,
}

impl AgingCoefficients {
    /// Published coefficients for the NMC811/graphite cell.
    pub fn nmc811_graphite() -> Self {
        AgingCoefficients {
            k_f_pos: -7.68e3,
            k_f_neg: -3.76e3,
            k_e_neg: 6.00,
            b_e_neg: 0.659,
            sigma_f0_pos: 1.52e-5,
            sigma_f0_neg: 1.54e-5,
        }
    }
}

/// One aged state, each change signed as (aged - fresh). Film
/// thicknesses are in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingObservation {
    pub d_eps_s_pos: f64,
    pub d_eps_s_neg: f64,
    pub d_eps_e_neg: f64,
    pub film_pos: f64,
    pub film_neg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgingFit {
    pub coefficients: AgingCoefficients,
    /// Per observation: residuals of the positive film, negative film and
    /// electrolyte-fraction fits.
    pub residuals: Vec<[f64; 3]>,
}

/// Outcome of applying the correlations to a change in active material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingEffect {
    pub d_eps_e_neg: f64,
    /// nm
    pub film_pos: f64,
    pub film_neg: f64,
    /// Ω·m²
    pub film_resistance_pos: f64,
    pub film_resistance_neg: f64,
}

fn proportional(x: &[f64], y: &[f64], what: &str) -> Result<f64, IdentifyError> {
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if !(sxx > 0.0) {
        return Err(IdentifyError::RankDeficient(format!("{what}: all changes are zero")));
    }
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / sxx)
}

/// Least-squares fit of the correlations to observed aged states.
///
/// Film thickness is proportional to the positive active-material change
/// and to the negative electrolyte-fraction change; the electrolyte change
/// is a parabola through the origin in the negative active-material change.
pub fn fit_aging(
    history: &[AgingObservation],
    sigma_f0_pos: f64,
    sigma_f0_neg: f64,
) -> Result<AgingFit, IdentifyError> {
    if history.len() < 3 {
        return Err(IdentifyError::RankDeficient(format!(
            "{} observations, need at least 3",
            history.len()
        )));
    }
    if !(sigma_f0_pos > 0.0 && sigma_f0_neg > 0.0) {
        return Err(IdentifyError::Domain("film conductivities must be positive".into()));
    }
    let col = |f: fn(&AgingObservation) -> f64| history.iter().map(f).collect::<Vec<f64>>();
    let ds_pos = col(|o| o.d_eps_s_pos);
    let ds_neg = col(|o| o.d_eps_s_neg);
    let de_neg = col(|o| o.d_eps_e_neg);
    let k_f_pos = proportional(&ds_pos, &col(|o| o.film_pos), "positive film")?;
    let k_f_neg = proportional(&de_neg, &col(|o| o.film_neg), "negative film")?;

    // Normal equations for y = k x² + b x.
    let (mut s4, mut s3, mut s2, mut sy2, mut sy1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in ds_neg.iter().zip(&de_neg) {
        s4 += x.powi(4);
        s3 += x.powi(3);
        s2 += x * x;
        sy2 += y * x * x;
        sy1 += y * x;
    }
    let det = s4 * s2 - s3 * s3;
    if !(det.abs() > 1e-12 * s4 * s2) {
        return Err(IdentifyError::RankDeficient(
            "negative active-material changes do not determine a parabola".into(),
        ));
    }
    let k_e_neg = (sy2 * s2 - s3 * sy1) / det;
    let b_e_neg = (s4 * sy1 - s3 * sy2) / det;

    let residuals = history
        .iter()
        .map(|o| {
            [
                o.film_pos - k_f_pos * o.d_eps_s_pos,
                o.film_neg - k_f_neg * o.d_eps_e_neg,
                o.d_eps_e_neg - (k_e_neg * o.d_eps_s_neg * o.d_eps_s_neg + b_e_neg * o.d_eps_s_neg),
            ]
        })
        .collect();
    Ok(AgingFit {
        coefficients: AgingCoefficients {
            k_f_pos,
            k_f_neg,
            k_e_neg,
            b_e_neg,
            sigma_f0_pos,
            sigma_f0_neg,
        },
        residuals,
    })
}

/// Electrolyte loss, film growth and film resistance implied by a loss of
/// active material. Both changes must be non-positive.
pub fn apply_aging(
    c: &AgingCoefficients,
    d_eps_s_neg: f64,
    d_eps_s_pos: f64,
) -> Result<AgingEffect, IdentifyError> {
    if !(d_eps_s_neg <= 0.0 && d_eps_s_pos <= 0.0) {
        return Err(IdentifyError::Domain(format!(
            "active-material changes must be non-positive, got {d_eps_s_neg} and {d_eps_s_pos}"
        )));
    }
    let d_eps_e_neg = c.k_e_neg * d_eps_s_neg * d_eps_s_neg + c.b_e_neg * d_eps_s_neg;
    let film_neg = c.k_f_neg * d_eps_e_neg;
    let film_pos = c.k_f_pos * d_eps_s_pos;
    Ok(AgingEffect {
        d_eps_e_neg,
        film_pos,
        film_neg,
        film_resistance_pos: film_pos * 1e-9 / c.sigma_f0_pos,
        film_resistance_neg: film_neg * 1e-9 / c.sigma_f0_neg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_change_means_no_film() {
        let e = apply_aging(&AgingCoefficients::nmc811_graphite(), 0.0, 0.0).unwrap();
        assert_eq!(e.film_neg, 0.0);
        assert_eq!(e.film_resistance_pos, 0.0);
    }

    #[test]
    fn growth_is_rejected() {
        assert!(apply_aging(&AgingCoefficients::nmc811_graphite(), 0.01, 0.0).is_err());
    }

    #[test]
    fn two_points_are_not_enough() {
        let o = AgingObservation {
            d_eps_s_pos: -0.01,
            d_eps_s_neg: -0.01,
            d_eps_e_neg: -0.005,
            film_pos: 10.0,
            film_neg: 10.0,
        };
        assert!(matches!(fit_aging(&[o, o], 1.0, 1.0), Err(IdentifyError::RankDeficient(_))));
    }
}

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Smallest accepted table; coarser tables misplace the plateau edges.
pub const MIN_NODES: usize = 20;

const GRAPHITE_CSV: &str = include_str!("../../data/ocp_graphite_mcmb.csv");
const NMC811_CSV: &str = include_str!("../../data/ocp_nmc811.csv");

/// Half-cell open-circuit potential as a function of stoichiometry.
///
/// The table is interpolated with a shape-preserving piecewise cubic
/// (Fritsch-Carlson slopes), so the curve passes through every node and never
/// overshoots the node values on either side of an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OcpTable", into = "OcpTable")]
pub struct OcpCurve {
    x: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
    // 1/h when the nodes are equally spaced, enabling O(1) lookup.
    inv_h: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct OcpTable {
    stoichiometry: Vec<f64>,
    potential: Vec<f64>,
}

impl TryFrom<OcpTable> for OcpCurve {
    type Error = ModelError;
    fn try_from(t: OcpTable) -> Result<Self, ModelError> {
        OcpCurve::new(t.stoichiometry, t.potential)
    }
}

impl From<OcpCurve> for OcpTable {
    fn from(c: OcpCurve) -> Self {
        OcpTable {
            stoichiometry: c.x,
            potential: c.v,
        }
    }
}

impl OcpCurve {
    /// Builds a curve from node stoichiometries (strictly increasing, from 0
    /// to 1) and potentials in volts.
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self, ModelError> {
        if x.len() != v.len() {
            return Err(ModelError::InvalidCurve(format!(
                "{} stoichiometries but {} potentials",
                x.len(),
                v.len()
            )));
        }
        if x.len() < MIN_NODES {
            return Err(ModelError::InvalidCurve(format!(
                "{} nodes, at least {MIN_NODES} required",
                x.len()
            )));
        }
        if x.iter().chain(v.iter()).any(|a| !a.is_finite()) {
            return Err(ModelError::InvalidCurve("non-finite node".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InvalidCurve(
                "stoichiometries must be strictly increasing".into(),
            ));
        }
        if x[0].abs() > 1e-12 || (x[x.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(ModelError::InvalidCurve(
                "nodes must span the stoichiometry range [0, 1]".into(),
            ));
        }
        let d = pchip_slopes(&x, &v);
        let n = x.len();
        let h = 1.0 / (n - 1) as f64;
        let uniform = x
            .iter()
            .enumerate()
            .all(|(i, &xi)| (xi - i as f64 * h).abs() <= 1e-9 * h);
        Ok(OcpCurve {
            x,
            v,
            d,
            inv_h: uniform.then_some((n - 1) as f64),
        })
    }

    /// Parses a `stoichiometry,potential_V` table with a header row.
    pub fn from_csv_str(text: &str) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut x = Vec::new();
        let mut v = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| ModelError::InvalidCurve(e.to_string()))?;
            let field = |k: usize| -> Result<f64, ModelError> {
                rec.get(k)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| ModelError::InvalidCurve(format!("bad value on line {}", i + 2)))
            };
            x.push(field(0)?);
            v.push(field(1)?);
        }
        Self::new(x, v)
    }

    /// Writes the node table in the same format `from_csv_str` reads.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("stoichiometry,potential_V\n");
        for (x, v) in self.x.iter().zip(&self.v) {
            s.push_str(&format!("{x},{v}\n"));
        }
        s
    }

    /// Graphite (MCMB) negative-electrode curve shipped with the crate.
    pub fn graphite() -> Self {
        Self::from_csv_str(GRAPHITE_CSV).expect("bundled graphite table is valid")
    }

    /// NMC811 positive-electrode curve shipped with the crate.
    pub fn nmc811() -> Self {
        Self::from_csv_str(NMC811_CSV).expect("bundled NMC811 table is valid")
    }

    pub fn stoichiometries(&self) -> &[f64] {
        &self.x
    }

    pub fn potentials(&self) -> &[f64] {
        &self.v
    }

    /// Node slopes used by the interpolant.
    pub fn slopes(&self) -> &[f64] {
        &self.d
    }

    /// Potential at `x`; fails outside [0, 1].
    pub fn eval(&self, x: f64) -> Result<f64, ModelError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(ModelError::Domain(x));
        }
        Ok(self.eval_in_domain(x))
    }

    /// Caller guarantees `x` is in [0, 1].
    pub(crate) fn eval_in_domain(&self, x: f64) -> f64 {
        let n = self.x.len();
        let k = match self.inv_h {
            Some(inv_h) => {
                let mut k = ((x * inv_h) as usize).min(n - 2);
                if x < self.x[k] {
                    k -= 1;
                } else if x >= self.x[k + 1] && k + 2 < n {
                    k += 1;
                }
                k
            }
            None => self.x.partition_point(|&xi| xi <= x).clamp(1, n - 1) - 1,
        };
        if x == self.x[k] {
            return self.v[k];
        }
        if x == self.x[k + 1] {
            return self.v[k + 1];
        }
        let h = self.x[k + 1] - self.x[k];
        let t = (x - self.x[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.v[k] + h10 * h * self.d[k] + h01 * self.v[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        let (d0, d1) = (delta[k - 1], delta[k]);
        if d0 * d1 <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// One-sided three-point slope, limited so the end interval stays monotone.
fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

use serde::{Deserialize, Serialize};

use super::{CellParameters, Electrode, ElectrolyteFit, ModelError, StoichPair, FARADAY, GAS_CONSTANT};

/// Largest internal time step, s.
pub const MAX_STEP: f64 = 1.0;

const BRUGGEMAN: f64 = 1.5;

const SHELL_RATIO: f64 = 0.72;

/// Grid sizes of the dynamic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Radial shells per particle.
    pub shells: usize,
    /// Thickness of each shell relative to the one inside it; values below
    /// one concentrate shells near the particle surface.
    pub shell_ratio: f64,
    pub cells_neg: usize,
    pub cells_sep: usize,
    pub cells_pos: usize,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            shells: 10,
            shell_ratio: SHELL_RATIO,
            cells_neg: 10,
            cells_sep: 5,
            cells_pos: 10,
        }
    }
}

impl Discretization {
    /// Every grid dimension multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Discretization {
            shells: self.shells * factor,
            shell_ratio: self.shell_ratio.powf(1.0 / factor as f64),
            cells_neg: self.cells_neg * factor,
            cells_sep: self.cells_sep * factor,
            cells_pos: self.cells_pos * factor,
        }
    }

    pub fn elyte_cells(&self) -> usize {
        self.cells_neg + self.cells_sep + self.cells_pos
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !(self.shell_ratio > 0.0 && self.shell_ratio <= 1.0) {
            return Err(ModelError::StateShape(format!(
                "shell ratio {} outside (0, 1]",
                self.shell_ratio
            )));
        }
        if self.shells < 3 || self.cells_neg == 0 || self.cells_sep == 0 || self.cells_pos == 0 {
            return Err(ModelError::StateShape(format!(
                "grid {self:?} too coarse (need at least 3 shells and 1 cell per region)"
            )));
        }
        Ok(())
    }
}

/// Concentrations of the dynamic model, mol/m³.
///
/// Radial profiles run from the particle centre to the surface; the
/// electrolyte profile runs from the negative to the positive collector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub solid_conc_neg: Vec<f64>,
    pub solid_conc_pos: Vec<f64>,
    pub elyte_conc: Vec<f64>,
}

/// Shell boundaries as fractions of the particle radius, centre first.
fn shell_edges(n: usize, ratio: f64) -> Vec<f64> {
    if (ratio - 1.0).abs() < 1e-12 {
        return (0..=n).map(|k| k as f64 / n as f64).collect();
    }
    let total = 1.0 - ratio.powi(n as i32);
    (0..=n).map(|k| (1.0 - ratio.powi(k as i32)) / total).collect()
}

/// Volume fraction of each shell.
fn shell_weights(n: usize, ratio: f64) -> Vec<f64> {
    let e = shell_edges(n, ratio);
    e.windows(2).map(|w| w[1].powi(3) - w[0].powi(3)).collect()
}

impl CellState {
    /// Total lithium held in both electrodes, mol.
    pub fn solid_lithium(&self, params: &CellParameters, disc: &Discretization) -> f64 {
        let avg = |c: &[f64]| -> f64 {
            shell_weights(c.len(), disc.shell_ratio).iter().zip(c).map(|(w, c)| w * c).sum()
        };
        avg(&self.solid_conc_neg) * params.composition.eps_s_neg * params.geometry.area_neg * params.geometry.thick_neg
            + avg(&self.solid_conc_pos)
                * params.composition.eps_s_pos
                * params.geometry.area_pos
                * params.geometry.thick_pos
    }

    /// Lithium-ion content of the electrolyte, mol.
    pub fn elyte_lithium(&self, params: &CellParameters, disc: &Discretization) -> f64 {
        let (dx, eps) = elyte_grid(params, disc);
        self.elyte_conc
            .iter()
            .zip(dx.iter().zip(&eps))
            .map(|(c, (dx, e))| c * dx * e)
            .sum::<f64>()
            * params.geometry.area_sep
    }

    /// Volume-averaged stoichiometry of each electrode.
    pub fn mean_stoich(&self, params: &CellParameters, disc: &Discretization) -> StoichPair {
        let avg = |c: &[f64]| -> f64 {
            shell_weights(c.len(), disc.shell_ratio).iter().zip(c).map(|(w, c)| w * c).sum()
        };
        StoichPair {
            neg: avg(&self.solid_conc_neg) / params.material.cs_max_neg,
            pos: avg(&self.solid_conc_pos) / params.material.cs_max_pos,
        }
    }

    fn check_shape(&self, disc: &Discretization) -> Result<(), ModelError> {
        if self.solid_conc_neg.len() != disc.shells
            || self.solid_conc_pos.len() != disc.shells
            || self.elyte_conc.len() != disc.elyte_cells()
        {
            return Err(ModelError::StateShape(format!(
                "state has {}/{}/{} entries, grid expects {}/{}/{}",
                self.solid_conc_neg.len(),
                self.solid_conc_pos.len(),
                self.elyte_conc.len(),
                disc.shells,
                disc.shells,
                disc.elyte_cells()
            )));
        }
        Ok(())
    }
}

fn elyte_grid(params: &CellParameters, disc: &Discretization) -> (Vec<f64>, Vec<f64>) {
    let g = &params.geometry;
    let c = &params.composition;
    let mut dx = Vec::with_capacity(disc.elyte_cells());
    let mut eps = Vec::with_capacity(disc.elyte_cells());
    for (n, l, e) in [
        (disc.cells_neg, g.thick_neg, c.eps_e_neg),
        (disc.cells_sep, g.thick_sep, c.eps_e_sep),
        (disc.cells_pos, g.thick_pos, c.eps_e_pos),
    ] {
        for _ in 0..n {
            dx.push(l / n as f64);
            eps.push(e);
        }
    }
    (dx, eps)
}

/// Uniform rest state at the given stoichiometries on the default grid.
pub fn init_state(params: &CellParameters, stoich_neg: f64, stoich_pos: f64) -> Result<CellState, ModelError> {
    init_state_on(params, stoich_neg, stoich_pos, &Discretization::default())
}

/// Uniform rest state on a custom grid.
pub fn init_state_on(
    params: &CellParameters,
    stoich_neg: f64,
    stoich_pos: f64,
    disc: &Discretization,
) -> Result<CellState, ModelError> {
    for x in [stoich_neg, stoich_pos] {
        if !(x > 0.0 && x < 1.0) {
            return Err(ModelError::Domain(x));
        }
    }
    disc.validate()?;
    Ok(CellState {
        solid_conc_neg: vec![stoich_neg * params.material.cs_max_neg; disc.shells],
        solid_conc_pos: vec![stoich_pos * params.material.cs_max_pos; disc.shells],
        elyte_conc: vec![params.material.elyte_conc_nominal; disc.elyte_cells()],
    })
}

/// One step of the dynamic model on the default grid.
///
/// Builds a solver for every call; use [`SpmeSolver`] when stepping
/// repeatedly with the same parameters.
pub fn dynamic_step(
    state: &CellState,
    current: f64,
    dt: f64,
    params: &CellParameters,
) -> Result<(f64, CellState), ModelError> {
    let mut solver = SpmeSolver::new(params, Discretization::default(), dt)?;
    let mut next = state.clone();
    let v = solver.step(&mut next, current)?;
    Ok((v, next))
}

/// Implicit radial diffusion in one spherical particle.
#[derive(Debug, Clone)]
struct Particle {
    w_over_dt: Vec<f64>,
    sub: Vec<f64>,
    cprime: Vec<f64>,
    inv_denom: Vec<f64>,
    three_over_r: f64,
    // Outer two shell midpoints relative to the surface.
    u1: f64,
    u2: f64,
    diff: f64,
}

impl Particle {
    fn new(n: usize, ratio: f64, radius: f64, diff: f64, dt: f64) -> Self {
        let edges = shell_edges(n, ratio);
        let w = shell_weights(n, ratio);
        // Volume centroids: a shell average equals the value there for a
        // linear profile.
        let mid: Vec<f64> = edges
            .windows(2)
            .map(|e| 0.75 * (e[1].powi(4) - e[0].powi(4)) / (e[1].powi(3) - e[0].powi(3)) * radius)
            .collect();
        // alpha[k]: conductance of the interface at edges[k].
        let alpha: Vec<f64> = (0..=n)
            .map(|k| {
                if k == 0 || k == n {
                    0.0
                } else {
                    let r = edges[k] * radius;
                    3.0 * r * r * diff / (radius.powi(3) * (mid[k] - mid[k - 1]))
                }
            })
            .collect();
        let w_over_dt: Vec<f64> = w.iter().map(|w| w / dt).collect();
        let diag: Vec<f64> = (0..n).map(|k| w_over_dt[k] + alpha[k] + alpha[k + 1]).collect();
        let sub: Vec<f64> = (0..n).map(|k| -alpha[k]).collect();
        let sup: Vec<f64> = (0..n).map(|k| -alpha[k + 1]).collect();
        let mut cprime = vec![0.0; n];
        let mut inv_denom = vec![0.0; n];
        inv_denom[0] = 1.0 / diag[0];
        cprime[0] = sup[0] * inv_denom[0];
        for k in 1..n {
            let den = diag[k] - sub[k] * cprime[k - 1];
            inv_denom[k] = 1.0 / den;
            cprime[k] = sup[k] * inv_denom[k];
        }
        Particle {
            w_over_dt,
            sub,
            cprime,
            inv_denom,
            three_over_r: 3.0 / radius,
            u1: mid[n - 1] - radius,
            u2: mid[n - 2] - radius,
            diff,
        }
    }

    /// Advances `c` one step with molar flux `flux_in` (mol/m²/s) entering
    /// through the surface.
    fn advance(&self, c: &mut [f64], flux_in: f64) {
        let n = c.len();
        let mut prev = 0.0;
        for k in 0..n {
            let mut d = self.w_over_dt[k] * c[k];
            if k == n - 1 {
                d += self.three_over_r * flux_in;
            }
            prev = (d - self.sub[k] * prev) * self.inv_denom[k];
            c[k] = prev;
        }
        for k in (0..n - 1).rev() {
            c[k] -= self.cprime[k] * c[k + 1];
        }
    }

    /// Surface concentration from a quadratic through the two outer shells
    /// that matches the surface flux.
    fn surface(&self, c: &[f64], flux_in: f64) -> f64 {
        let n = c.len();
        let g = flux_in / self.diff;
        let (u1, u2) = (self.u1, self.u2);
        let (c1, c2) = (c[n - 1], c[n - 2]);
        let beta = (c1 - c2 - g * (u1 - u2)) / (u1 * u1 - u2 * u2);
        c1 - g * u1 - beta * u1 * u1
    }
}

/// Reusable integrator of the dynamic model for fixed parameters and step.
#[derive(Debug, Clone)]
pub struct SpmeSolver {
    disc: Discretization,
    dt: f64,
    neg: Particle,
    pos: Particle,
    // Electrolyte grid.
    dx: Vec<f64>,
    brug: Vec<f64>,
    cap_over_dt: Vec<f64>,
    // Source per unit current density, already multiplied by dx.
    src: Vec<f64>,
    de: ElectrolyteFit,
    kappa: ElectrolyteFit,
    // Per-face half-cell integrals of the normalised ionic current.
    face_left: Vec<f64>,
    face_right: Vec<f64>,
    // Per-cell curvature term of the potential (cell average minus centre).
    curv: Vec<f64>,
    // Buffers.
    deff: Vec<f64>,
    cprime: Vec<f64>,
    // Scalars.
    area_neg: f64,
    area_pos: f64,
    area_sep: f64,
    al_neg: f64,
    al_pos: f64,
    len_neg: f64,
    len_pos: f64,
    series_neg: f64,
    series_pos: f64,
    thermal: f64,
    one_minus_t: f64,
    k_neg: f64,
    k_pos: f64,
    cs_max_neg: f64,
    cs_max_pos: f64,
    params: CellParameters,
}

impl SpmeSolver {
    pub fn new(params: &CellParameters, disc: Discretization, dt: f64) -> Result<Self, ModelError> {
        if !(dt > 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        if dt > MAX_STEP * (1.0 + 1e-12) {
            return Err(ModelError::StepTooLarge { dt, max: MAX_STEP });
        }
        disc.validate()?;
        params.validate()?;
        let m = &params.material;
        let g = &params.geometry;
        let c = &params.composition;
        let t = &params.transport;
        let neg = Particle::new(
            disc.shells,
            disc.shell_ratio,
            m.particle_radius_neg,
            m.base_solid_diffusivity_neg * t.ds_factor_neg,
            dt,
        );
        let pos = Particle::new(
            disc.shells,
            disc.shell_ratio,
            m.particle_radius_pos,
            m.base_solid_diffusivity_pos * t.ds_factor_pos,
            dt,
        );
        let (dx, eps) = elyte_grid(params, &disc);
        let n = dx.len();
        let brug: Vec<f64> = eps.iter().map(|e| e.powf(BRUGGEMAN)).collect();
        let cap_over_dt: Vec<f64> = eps.iter().zip(&dx).map(|(e, d)| e * d / dt).collect();
        let one_minus_t = 1.0 - t.transference;
        let (ln, ls, lp) = (g.thick_neg, g.thick_sep, g.thick_pos);
        let total = ln + ls + lp;
        let mut src = vec![0.0; n];
        let mut curv = vec![0.0; n];
        let mut centres = vec![0.0; n];
        let mut x = 0.0;
        for i in 0..n {
            centres[i] = x + 0.5 * dx[i];
            x += dx[i];
            let slope = if i < disc.cells_neg {
                1.0 / ln
            } else if i < disc.cells_neg + disc.cells_sep {
                0.0
            } else {
                -1.0 / lp
            };
            src[i] = one_minus_t * slope * dx[i] / FARADAY;
            curv[i] = -slope * dx[i] * dx[i] / 24.0;
        }
        // Normalised ionic current in the electrolyte at position x.
        let ie = |x: f64| -> f64 {
            if x <= ln {
                x / ln
            } else if x <= ln + ls {
                1.0
            } else {
                (total - x) / lp
            }
        };
        let mut face_left = vec![0.0; n - 1];
        let mut face_right = vec![0.0; n - 1];
        for f in 0..n - 1 {
            let xf = centres[f] + 0.5 * dx[f];
            face_left[f] = ie(xf - 0.25 * dx[f]) * 0.5 * dx[f];
            face_right[f] = ie(xf + 0.25 * dx[f + 1]) * 0.5 * dx[f + 1];
        }
        let mut de = m.base_electrolyte_diffusivity.clone();
        de.scale *= t.de_factor;
        let mut kappa = m.base_ionic_conductivity.clone();
        kappa.scale *= t.kappa_factor;
        let (a_neg, a_pos) = params.specific_area();
        let al_neg = a_neg * ln;
        let al_pos = a_pos * lp;
        let series_neg = t.contact_resistance
            + c.film_resistance_neg / al_neg
            + ln / (2.0 * t.solid_conductivity_neg * c.eps_s_neg.powf(BRUGGEMAN));
        let series_pos = c.film_resistance_pos / al_pos
            + lp / (2.0 * t.solid_conductivity_pos * c.eps_s_pos.powf(BRUGGEMAN));
        Ok(SpmeSolver {
            disc,
            dt,
            neg,
            pos,
            dx,
            brug,
            cap_over_dt,
            src,
            de,
            kappa,
            face_left,
            face_right,
            curv,
            deff: vec![0.0; n],
            cprime: vec![0.0; n],
            area_neg: g.area_neg,
            area_pos: g.area_pos,
            area_sep: g.area_sep,
            al_neg,
            al_pos,
            len_neg: ln,
            len_pos: lp,
            series_neg,
            series_pos,
            thermal: 2.0 * GAS_CONSTANT * m.temperature / FARADAY,
            one_minus_t,
            k_neg: m.reaction_rate_neg,
            k_pos: m.reaction_rate_pos,
            cs_max_neg: m.cs_max_neg,
            cs_max_pos: m.cs_max_pos,
            params: params.clone(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    /// Advances `state` by one step at constant `current` (A, discharge
    /// positive) and returns the terminal voltage at the end of the step.
    pub fn step(&mut self, state: &mut CellState, current: f64) -> Result<f64, ModelError> {
        state.check_shape(&self.disc)?;
        let i_neg = current / self.area_neg;
        let i_pos = current / self.area_pos;
        let i_sep = current / self.area_sep;
        // Pore-wall current densities; anodic positive.
        let j_neg = i_neg / self.al_neg;
        let j_pos = -i_pos / self.al_pos;
        let flux_neg = -j_neg / FARADAY;
        let flux_pos = -j_pos / FARADAY;
        self.neg.advance(&mut state.solid_conc_neg, flux_neg);
        self.pos.advance(&mut state.solid_conc_pos, flux_pos);
        self.advance_elyte(&mut state.elyte_conc, i_sep)?;

        let css_neg = self.neg.surface(&state.solid_conc_neg, flux_neg);
        let css_pos = self.pos.surface(&state.solid_conc_pos, flux_pos);
        let x_neg = css_neg / self.cs_max_neg;
        let x_pos = css_pos / self.cs_max_pos;
        if !(x_neg > 0.0 && x_neg < 1.0) {
            return Err(ModelError::Saturation {
                electrode: Electrode::Negative,
                surface_stoich: x_neg,
            });
        }
        if !(x_pos > 0.0 && x_pos < 1.0) {
            return Err(ModelError::Saturation {
                electrode: Electrode::Positive,
                surface_stoich: x_pos,
            });
        }
        let ce = &state.elyte_conc;
        let nn = self.disc.cells_neg;
        let np = self.disc.cells_pos;
        let n = ce.len();
        let ce_neg = ce[..nn].iter().zip(&self.dx[..nn]).map(|(c, d)| c * d).sum::<f64>() / self.len_neg;
        let ce_pos = ce[n - np..].iter().zip(&self.dx[n - np..]).map(|(c, d)| c * d).sum::<f64>() / self.len_pos;
        let j0_neg = self.k_neg * (ce_neg * css_neg * (self.cs_max_neg - css_neg)).sqrt();
        let j0_pos = self.k_pos * (ce_pos * css_pos * (self.cs_max_pos - css_pos)).sqrt();
        let eta_neg = self.thermal * (j_neg / (2.0 * j0_neg)).asinh();
        let eta_pos = self.thermal * (j_pos / (2.0 * j0_pos)).asinh();

        let m = &self.params.material;
        let ocv = m.ocp_pos.eval_in_domain(x_pos) - m.ocp_neg.eval_in_domain(x_neg);
        let ohmic = self.elyte_ohmic(ce, i_sep);
        let conc = self.thermal * self.one_minus_t * (ce[n - 1] / ce[0]).ln();
        let series = i_neg * self.series_neg + i_pos * self.series_pos;
        Ok(ocv + eta_pos - eta_neg + ohmic + conc - series)
    }

    fn advance_elyte(&mut self, c: &mut [f64], i_sep: f64) -> Result<(), ModelError> {
        let n = c.len();
        for k in 0..n {
            self.deff[k] = self.de.eval(c[k]) * self.brug[k];
        }
        // Tridiagonal system with face conductances g[f] = 2 / (dx_l/D_l + dx_r/D_r).
        let face = |s: &Self, f: usize| 2.0 / (s.dx[f] / s.deff[f] + s.dx[f + 1] / s.deff[f + 1]);
        let mut g_left = 0.0;
        let mut prev = 0.0;
        for k in 0..n {
            let g_right = if k + 1 < n { face(self, k) } else { 0.0 };
            let diag = self.cap_over_dt[k] + g_left + g_right;
            let sub = -g_left;
            let sup = -g_right;
            let d = self.cap_over_dt[k] * c[k] + self.src[k] * i_sep;
            let den = diag - sub * if k > 0 { self.cprime[k - 1] } else { 0.0 };
            self.cprime[k] = sup / den;
            prev = (d - sub * prev) / den;
            c[k] = prev;
            g_left = g_right;
        }
        for k in (0..n - 1).rev() {
            c[k] -= self.cprime[k] * c[k + 1];
        }
        let min = c.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(ModelError::Instability { dt: self.dt, min_conc: min });
        }
        Ok(())
    }

    /// Mean electrolyte potential of the positive region minus that of the
    /// negative region.
    fn elyte_ohmic(&self, ce: &[f64], i_sep: f64) -> f64 {
        if i_sep == 0.0 {
            return 0.0;
        }
        let n = ce.len();
        let nn = self.disc.cells_neg;
        let np = self.disc.cells_pos;
        let mut phi = 0.0;
        let mut sum_neg = 0.0;
        let mut sum_pos = 0.0;
        let mut inv_k_prev = 1.0 / (self.kappa.eval(ce[0]) * self.brug[0]);
        for k in 0..n {
            let inv_k = if k == 0 {
                inv_k_prev
            } else {
                let v = 1.0 / (self.kappa.eval(ce[k]) * self.brug[k]);
                phi -= i_sep * (self.face_left[k - 1] * inv_k_prev + self.face_right[k - 1] * v);
                v
            };
            let avg = phi + i_sep * self.curv[k] * inv_k;
            if k < nn {
                sum_neg += avg * self.dx[k];
            } else if k >= n - np {
                sum_pos += avg * self.dx[k];
            }
            inv_k_prev = inv_k;
        }
        sum_pos / self.len_pos - sum_neg / self.len_neg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh() -> (CellParameters, CellState) {
        let p = CellParameters::default();
        let s = init_state(&p, 0.5, 0.55).unwrap();
        (p, s)
    }

    #[test]
    fn init_rejects_out_of_range() {
        let p = CellParameters::default();
        assert!(matches!(init_state(&p, 0.0, 0.5), Err(ModelError::Domain(_))));
        assert!(matches!(init_state(&p, 0.5, 1.2), Err(ModelError::Domain(_))));
    }

    #[test]
    fn init_is_uniform_at_table_value() {
        let p = CellParameters::default();
        let s = init_state(&p, 0.486, 0.536).unwrap();
        assert!(s.solid_conc_neg.iter().all(|&c| c == 0.486 * p.material.cs_max_neg));
        assert_eq!(s.elyte_conc.len(), 25);
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let (p, s0) = fresh();
        let (v, s1) = dynamic_step(&s0, 0.0, 1.0, &p).unwrap();
        let ocv = p.ocv(StoichPair { neg: 0.5, pos: 0.55 }).unwrap();
        assert!((v - ocv).abs() < 1e-12);
        for (a, b) in s0.solid_conc_neg.iter().zip(&s1.solid_conc_neg) {
            assert!((a - b).abs() <= 1e-12 * a);
        }
        for (a, b) in s0.elyte_conc.iter().zip(&s1.elyte_conc) {
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn step_larger_than_limit_is_rejected() {
        let (p, s) = fresh();
        assert!(matches!(dynamic_step(&s, 1.0, 2.0, &p), Err(ModelError::StepTooLarge { .. })));
    }

    #[test]
    fn uniform_electrolyte_ohmic_matches_closed_form() {
        let p = CellParameters::default();
        let solver = SpmeSolver::new(&p, Discretization::default(), 1.0).unwrap();
        let ce = vec![1000.0; 25];
        let i = 4.0;
        let k = p.material.base_ionic_conductivity.eval(1000.0);
        let c = &p.composition;
        let g = &p.geometry;
        let expect = -i
            * (g.thick_neg / (3.0 * k * c.eps_e_neg.powf(1.5))
                + g.thick_sep / (k * c.eps_e_sep.powf(1.5))
                + g.thick_pos / (3.0 * k * c.eps_e_pos.powf(1.5)));
        let got = solver.elyte_ohmic(&ce, i);
        assert!((got - expect).abs() < 1e-12 * expect.abs(), "{got} vs {expect}");
    }

    #[test]
    fn saturation_is_reported() {
        let (p, s0) = fresh();
        let mut solver = SpmeSolver::new(&p, Discretization::default(), 1.0).unwrap();
        let mut s = s0;
        let mut err = None;
        for _ in 0..2000 {
            if let Err(e) = solver.step(&mut s, 200.0) {
                err = Some(e);
                break;
            }
        }
        assert!(matches!(
            err,
            Some(ModelError::Saturation { .. }) | Some(ModelError::Instability { .. })
        ));
    }
}

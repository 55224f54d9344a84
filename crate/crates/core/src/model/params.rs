use serde::{Deserialize, Serialize};

use super::{ModelError, OcpCurve, FARADAY};

/// Electrode areas (m²) and layer thicknesses (m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub area_neg: f64,
    pub area_pos: f64,
    pub area_sep: f64,
    pub thick_neg: f64,
    pub thick_pos: f64,
    pub thick_sep: f64,
}

/// Concentration dependence of an electrolyte property: `scale * Σ c^p * a`
/// with `c` in mol/L and each term given as `[a, p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElectrolyteFit {
    pub scale: f64,
    pub terms: Vec<[f64; 2]>,
}

impl ElectrolyteFit {
    /// LiPF6 in EC:EMC diffusivity (Nyman et al. 2008), m²/s.
    pub fn lipf6_diffusivity() -> Self {
        ElectrolyteFit {
            scale: 1.0,
            terms: vec![[8.794e-11, 2.0], [-3.972e-10, 1.0], [4.862e-10, 0.0]],
        }
    }

    /// LiPF6 in EC:EMC conductivity (Nyman et al. 2008), S/m.
    pub fn lipf6_conductivity() -> Self {
        ElectrolyteFit {
            scale: 1.0,
            terms: vec![[0.1297, 3.0], [-2.51, 1.5], [3.329, 1.0]],
        }
    }

    /// Property value at concentration `c` in mol/m³.
    pub fn eval(&self, c: f64) -> f64 {
        let cl = c * 1e-3;
        let mut s = 0.0;
        for &[a, p] in &self.terms {
            let pw = if p == 0.0 {
                1.0
            } else if p == 1.0 {
                cl
            } else if p == 2.0 {
                cl * cl
            } else if p == 3.0 {
                cl * cl * cl
            } else if p == 1.5 {
                cl * cl.sqrt()
            } else {
                cl.powf(p)
            };
            s += a * pw;
        }
        self.scale * s
    }
}

/// Material constants of the two electrodes and the electrolyte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialConstants {
    /// kg/mol
    pub molar_mass_neg: f64,
    pub molar_mass_pos: f64,
    /// kg/m³
    pub density_neg: f64,
    pub density_pos: f64,
    /// m
    pub particle_radius_neg: f64,
    pub particle_radius_pos: f64,
    /// Butler-Volmer rate constants, A/m² (m³/mol)^1.5.
    pub reaction_rate_neg: f64,
    pub reaction_rate_pos: f64,
    /// mol/m³; must equal density / molar mass.
    pub cs_max_neg: f64,
    pub cs_max_pos: f64,
    /// Conductivity of the surface film, S/m.
    pub film_conductivity_neg: f64,
    pub film_conductivity_pos: f64,
    /// m²/s, scaled by `TransportParams::ds_factor_*`.
    pub base_solid_diffusivity_neg: f64,
    pub base_solid_diffusivity_pos: f64,
    /// m²/s as a function of concentration, scaled by `de_factor`.
    pub base_electrolyte_diffusivity: ElectrolyteFit,
    /// S/m as a function of concentration, scaled by `kappa_factor`.
    pub base_ionic_conductivity: ElectrolyteFit,
    pub transference_nominal: f64,
    /// K
    pub temperature: f64,
    /// Initial uniform electrolyte concentration, mol/m³.
    pub elyte_conc_nominal: f64,
    pub ocp_neg: OcpCurve,
    pub ocp_pos: OcpCurve,
}

/// Parameters that change with aging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionParams {
    pub eps_s_neg: f64,
    pub eps_s_pos: f64,
    pub eps_e_neg: f64,
    pub eps_e_sep: f64,
    pub eps_e_pos: f64,
    /// m
    pub film_thickness_neg: f64,
    pub film_thickness_pos: f64,
    /// Ω m² of particle surface.
    pub film_resistance_neg: f64,
    pub film_resistance_pos: f64,
}

/// Transport parameters identified from the pulse test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportParams {
    /// Ω m² referred to the negative electrode area.
    pub contact_resistance: f64,
    /// S/m
    pub solid_conductivity_neg: f64,
    pub solid_conductivity_pos: f64,
    pub ds_factor_neg: f64,
    pub ds_factor_pos: f64,
    pub de_factor: f64,
    pub kappa_factor: f64,
    pub transference: f64,
}

/// A negative/positive stoichiometry pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoichPair {
    pub neg: f64,
    pub pos: f64,
}

/// Complete parameter set of one cell.
///
/// `inventory` is any rest state of the cell; together with the electrode
/// volumes it fixes the line of stoichiometry pairs that hold the same amount
/// of cyclable lithium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParameters {
    pub geometry: CellGeometry,
    pub material: MaterialConstants,
    pub composition: CompositionParams,
    pub transport: TransportParams,
    pub inventory: StoichPair,
}

impl Default for MaterialConstants {
    fn default() -> Self {
        let (m_neg, rho_neg) = (0.07206, 2260.0);
        let (m_pos, rho_pos) = (0.09728, 4870.0);
        let mut kappa = ElectrolyteFit::lipf6_conductivity();
        kappa.scale = 0.15;
        let mut diff = ElectrolyteFit::lipf6_diffusivity();
        diff.scale = 0.5;
        MaterialConstants {
            molar_mass_neg: m_neg,
            molar_mass_pos: m_pos,
            density_neg: rho_neg,
            density_pos: rho_pos,
            particle_radius_neg: 5.86e-6,
            particle_radius_pos: 5.22e-6,
            reaction_rate_neg: 6.0e-6,
            reaction_rate_pos: 6.0e-6,
            cs_max_neg: rho_neg / m_neg,
            cs_max_pos: rho_pos / m_pos,
            film_conductivity_neg: 1.54e-5,
            film_conductivity_pos: 1.52e-5,
            base_solid_diffusivity_neg: 1.0e-12,
            base_solid_diffusivity_pos: 6.0e-14,
            base_electrolyte_diffusivity: diff,
            base_ionic_conductivity: kappa,
            transference_nominal: 0.38,
            temperature: 298.15,
            elyte_conc_nominal: 1000.0,
            ocp_neg: OcpCurve::graphite(),
            ocp_pos: OcpCurve::nmc811(),
        }
    }
}

impl Default for CellGeometry {
    fn default() -> Self {
        CellGeometry {
            area_neg: 0.5,
            area_pos: 0.5,
            area_sep: 0.5,
            thick_neg: 9.25e-6,
            thick_pos: 9.25e-6,
            thick_sep: 25e-6,
        }
    }
}

impl Default for CompositionParams {
    fn default() -> Self {
        let (rf_neg, rf_pos) = (3.34e-4, 1.46e-4);
        CompositionParams {
            eps_s_neg: 0.665,
            eps_s_pos: 0.519,
            eps_e_neg: 0.2827,
            eps_e_sep: 0.4,
            eps_e_pos: 0.3,
            film_thickness_neg: rf_neg * 1.54e-5,
            film_thickness_pos: rf_pos * 1.52e-5,
            film_resistance_neg: rf_neg,
            film_resistance_pos: rf_pos,
        }
    }
}

impl Default for TransportParams {
    fn default() -> Self {
        TransportParams {
            contact_resistance: 6.4e-3,
            solid_conductivity_neg: 66.5,
            solid_conductivity_pos: 1.97,
            ds_factor_neg: 1.0,
            ds_factor_pos: 1.0,
            de_factor: 1.0,
            kappa_factor: 1.0,
            transference: 0.38,
        }
    }
}

impl Default for CellParameters {
    /// A fresh 2.2 Ah NMC811/graphite cell.
    fn default() -> Self {
        CellParameters {
            geometry: CellGeometry::default(),
            material: MaterialConstants::default(),
            composition: CompositionParams::default(),
            transport: TransportParams::default(),
            inventory: StoichPair {
                neg: 0.486,
                pos: 0.536,
            },
        }
    }
}

fn check(name: &'static str, ok: bool, reason: impl FnOnce() -> String) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: reason(),
        })
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), ModelError> {
    check(name, v.is_finite() && v > 0.0, || format!("must be positive, got {v}"))
}

fn fraction(name: &'static str, v: f64) -> Result<(), ModelError> {
    check(name, v.is_finite() && v > 0.0 && v < 1.0, || {
        format!("must lie in (0, 1), got {v}")
    })
}

impl CellParameters {
    /// Checks physical admissibility of every field.
    pub fn validate(&self) -> Result<(), ModelError> {
        let g = &self.geometry;
        positive("area_neg", g.area_neg)?;
        positive("area_pos", g.area_pos)?;
        positive("area_sep", g.area_sep)?;
        positive("thick_neg", g.thick_neg)?;
        positive("thick_pos", g.thick_pos)?;
        positive("thick_sep", g.thick_sep)?;
        let m = &self.material;
        for (name, v) in [
            ("molar_mass_neg", m.molar_mass_neg),
            ("molar_mass_pos", m.molar_mass_pos),
            ("density_neg", m.density_neg),
            ("density_pos", m.density_pos),
            ("particle_radius_neg", m.particle_radius_neg),
            ("particle_radius_pos", m.particle_radius_pos),
            ("reaction_rate_neg", m.reaction_rate_neg),
            ("reaction_rate_pos", m.reaction_rate_pos),
            ("film_conductivity_neg", m.film_conductivity_neg),
            ("film_conductivity_pos", m.film_conductivity_pos),
            ("base_solid_diffusivity_neg", m.base_solid_diffusivity_neg),
            ("base_solid_diffusivity_pos", m.base_solid_diffusivity_pos),
            ("temperature", m.temperature),
            ("elyte_conc_nominal", m.elyte_conc_nominal),
        ] {
            positive(name, v)?;
        }
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        check("cs_max_neg", rel(m.cs_max_neg, m.density_neg / m.molar_mass_neg), || {
            format!("{} differs from density/molar_mass", m.cs_max_neg)
        })?;
        check("cs_max_pos", rel(m.cs_max_pos, m.density_pos / m.molar_mass_pos), || {
            format!("{} differs from density/molar_mass", m.cs_max_pos)
        })?;
        fraction("transference_nominal", m.transference_nominal)?;
        let c = &self.composition;
        fraction("eps_s_neg", c.eps_s_neg)?;
        fraction("eps_s_pos", c.eps_s_pos)?;
        fraction("eps_e_neg", c.eps_e_neg)?;
        fraction("eps_e_sep", c.eps_e_sep)?;
        fraction("eps_e_pos", c.eps_e_pos)?;
        check("eps_neg", c.eps_s_neg + c.eps_e_neg < 1.0, || {
            "solid and electrolyte fractions exceed 1".into()
        })?;
        check("eps_pos", c.eps_s_pos + c.eps_e_pos < 1.0, || {
            "solid and electrolyte fractions exceed 1".into()
        })?;
        for (name, v) in [
            ("film_thickness_neg", c.film_thickness_neg),
            ("film_thickness_pos", c.film_thickness_pos),
            ("film_resistance_neg", c.film_resistance_neg),
            ("film_resistance_pos", c.film_resistance_pos),
        ] {
            check(name, v.is_finite() && v >= 0.0, || format!("must be non-negative, got {v}"))?;
        }
        let t = &self.transport;
        check("contact_resistance", t.contact_resistance.is_finite() && t.contact_resistance >= 0.0, || {
            format!("must be non-negative, got {}", t.contact_resistance)
        })?;
        positive("solid_conductivity_neg", t.solid_conductivity_neg)?;
        positive("solid_conductivity_pos", t.solid_conductivity_pos)?;
        positive("ds_factor_neg", t.ds_factor_neg)?;
        positive("ds_factor_pos", t.ds_factor_pos)?;
        positive("de_factor", t.de_factor)?;
        positive("kappa_factor", t.kappa_factor)?;
        fraction("transference", t.transference)?;
        fraction("inventory.neg", self.inventory.neg)?;
        fraction("inventory.pos", self.inventory.pos)?;
        Ok(())
    }

    /// Moles of lithium per unit stoichiometry in the negative electrode.
    pub fn capacity_moles_neg(&self) -> f64 {
        self.material.cs_max_neg
            * self.composition.eps_s_neg
            * self.geometry.area_neg
            * self.geometry.thick_neg
    }

    /// Moles of lithium per unit stoichiometry in the positive electrode.
    pub fn capacity_moles_pos(&self) -> f64 {
        self.material.cs_max_pos
            * self.composition.eps_s_pos
            * self.geometry.area_pos
            * self.geometry.thick_pos
    }

    /// Active-volume ratio `(ε⁺ A⁺ L⁺) / (ε⁻ A⁻ L⁻)`.
    pub fn volume_ratio(&self) -> f64 {
        let g = &self.geometry;
        let c = &self.composition;
        (c.eps_s_pos * g.area_pos * g.thick_pos) / (c.eps_s_neg * g.area_neg * g.thick_neg)
    }

    /// Positive stoichiometry that holds the same lithium as `inventory`
    /// when the negative electrode sits at `x_neg`.
    pub fn pos_on_inventory_line(&self, x_neg: f64) -> f64 {
        self.inventory.pos
            + (self.inventory.neg - x_neg) * self.capacity_moles_neg() / self.capacity_moles_pos()
    }

    /// Open-circuit voltage of a stoichiometry pair.
    pub fn ocv(&self, s: StoichPair) -> Result<f64, ModelError> {
        Ok(self.material.ocp_pos.eval(s.pos)? - self.material.ocp_neg.eval(s.neg)?)
    }

    /// Contact resistance converted to ohms.
    pub fn contact_resistance_ohm(&self) -> f64 {
        self.transport.contact_resistance / self.geometry.area_neg
    }

    /// Sets the contact resistance from a value in ohms.
    pub fn set_contact_resistance_ohm(&mut self, ohm: f64) {
        self.transport.contact_resistance = ohm * self.geometry.area_neg;
    }

    /// Charge (As) the negative electrode takes up per unit stoichiometry.
    pub fn charge_per_stoich_neg(&self) -> f64 {
        self.capacity_moles_neg() * FARADAY
    }

    /// Specific interfacial area 3 ε_s / R of each electrode, 1/m.
    pub fn specific_area(&self) -> (f64, f64) {
        (
            3.0 * self.composition.eps_s_neg / self.material.particle_radius_neg,
            3.0 * self.composition.eps_s_pos / self.material.particle_radius_pos,
        )
    }

    /// Sets the film resistances and keeps the film thicknesses consistent
    /// with `R_f = δ_f / σ_f`.
    pub fn set_film_resistance(&mut self, neg: f64, pos: f64) {
        let c = &mut self.composition;
        c.film_resistance_neg = neg;
        c.film_resistance_pos = pos;
        c.film_thickness_neg = neg * self.material.film_conductivity_neg;
        c.film_thickness_pos = pos * self.material.film_conductivity_pos;
    }

    /// Convenience: parses a JSON parameter record.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

//! Derived physical rates: the dipole-dipole exchange rate `J`, the Einstein
//! `A` coefficient and the Rabi frequency `Ω`.
//!
//! Everything here is SI and `f64`: `d₀²` for a molecular dipole is of order
//! 1e-59 C²m², below the normal range of `f32`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// SI constants (CODATA 2018).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub epsilon0: f64,
    pub c: f64,
}

pub const CODATA: PhysicalConstants =
    PhysicalConstants { hbar: 1.054_571_817e-34, epsilon0: 8.854_187_8128e-12, c: 299_792_458.0 };

/// One debye in C·m.
pub const DEBYE: f64 = 3.33564e-30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MolecularConstants {
    /// Permanent dipole of a localized conformation, C·m.
    pub d0: f64,
    /// Transition dipole magnitude `|⟨e|d|g⟩|`, C·m. Equal to `d0` for an
    /// inversion doublet.
    pub mu_eg: f64,
    /// Intermolecular separation, m.
    pub r: f64,
    /// Driving-field amplitude, V/m.
    pub field: f64,
}

impl MolecularConstants {
    pub fn new(d0: f64, r: f64, field: f64) -> Result<Self> {
        let mc = Self { d0, mu_eg: d0, r, field };
        mc.validate()?;
        Ok(mc)
    }

    /// The model molecule: `d₀ = 1.46 D`.
    pub fn ammonia(r: f64, field: f64) -> Result<Self> {
        Self::new(1.46 * DEBYE, r, field)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0) {
            return Err(Error::InvalidParams(format!("d0 must be > 0, got {}", self.d0)));
        }
        if self.r == 0.0 {
            return Err(Error::ZeroSeparation);
        }
        if !(self.r > 0.0) {
            return Err(Error::InvalidParams(format!("r must be > 0, got {}", self.r)));
        }
        if !(self.field >= 0.0) {
            return Err(Error::InvalidParams(format!("E_l must be >= 0, got {}", self.field)));
        }
        Ok(())
    }
}

/// Interaction energy `V = 2 d₀² / (4π ε₀ r³)` of parallel dipoles, J.
pub fn dipole_energy(mc: &MolecularConstants) -> Result<f64> {
    if mc.r == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    mc.validate()?;
    Ok(2.0 * mc.d0 * mc.d0 / (4.0 * PI * CODATA.epsilon0 * mc.r.powi(3)))
}

/// `J = V/ħ`, s⁻¹.
pub fn dipole_coupling(mc: &MolecularConstants) -> Result<f64> {
    Ok(dipole_energy(mc)? / CODATA.hbar)
}

/// `A = |μ_eg|² ω₀³ / (3π ħ ε₀ c³)`, s⁻¹.
pub fn einstein_a(mu_eg: f64, omega0: f64) -> f64 {
    let k = CODATA;
    mu_eg * mu_eg * omega0.powi(3) / (3.0 * PI * k.hbar * k.epsilon0 * k.c.powi(3))
}

/// `Ω = |μ_eg| E_l / 2ħ` for dipoles parallel to the field, s⁻¹.
pub fn rabi_frequency(mu_eg: f64, field: f64) -> f64 {
    mu_eg.abs() * field / (2.0 * CODATA.hbar)
}

/// Field amplitude that produces Rabi frequency `omega`, V/m.
pub fn field_for_rabi(mu_eg: f64, omega: f64) -> f64 {
    2.0 * CODATA.hbar * omega / mu_eg.abs()
}

//! Physical constants (CODATA 2018).
//!
//! Only the four primary constants are stored. Planck units are recomputed
//! on every call so they cannot drift from the primaries.

use crate::units::{Dim, Quantity};

pub const G_CODATA2018: f64 = 6.674_30e-11;
pub const HBAR_CODATA2018: f64 = 1.054_571_817e-34;
pub const C_EXACT: f64 = 299_792_458.0;
pub const KB_EXACT: f64 = 1.380_649e-23;

/// Age of the universe used by the impossibility calculators (s).
pub const UNIVERSE_AGE_S: f64 = 4.35e17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Newton's constant, m^3 kg^-1 s^-2.
    pub g: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Boltzmann constant, J/K.
    pub kb: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

impl PhysicalConstants {
    pub const fn codata2018() -> Self {
        PhysicalConstants {
            g: G_CODATA2018,
            hbar: HBAR_CODATA2018,
            c: C_EXACT,
            kb: KB_EXACT,
        }
    }

    /// Same constants with gravity switched off.
    pub fn without_gravity(self) -> Self {
        PhysicalConstants { g: 0.0, ..self }
    }

    pub fn planck_mass(&self) -> f64 {
        (self.hbar * self.c / self.g).sqrt()
    }

    pub fn planck_length(&self) -> f64 {
        (self.hbar * self.g / self.c.powi(3)).sqrt()
    }

    pub fn planck_energy(&self) -> f64 {
        self.planck_mass() * self.c * self.c
    }

    /// Planck's constant h = 2πħ.
    pub fn h(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar
    }

    pub fn g_q(&self) -> Quantity {
        Quantity::new(self.g, Dim::GRAV)
    }

    pub fn hbar_q(&self) -> Quantity {
        Quantity::new(self.hbar, Dim::J_S)
    }

    pub fn c_q(&self) -> Quantity {
        Quantity::new(self.c, Dim::M_PER_S)
    }

    pub fn kb_q(&self) -> Quantity {
        Quantity::new(self.kb, Dim::J_PER_K)
    }

    /// (name, value, unit, source) rows for report provenance.
    pub fn provenance(&self) -> Vec<(&'static str, f64, &'static str, &'static str)> {
        let src = if *self == Self::codata2018() {
            "CODATA 2018"
        } else {
            "user override"
        };
        vec![
            ("G", self.g, "m^3 kg^-1 s^-2", src),
            ("hbar", self.hbar, "J s", src),
            ("c", self.c, "m s^-1", "exact (SI definition)"),
            ("kB", self.kb, "J K^-1", "exact (SI definition)"),
            ("m_P", self.planck_mass(), "kg", "derived: sqrt(hbar c / G)"),
            ("l_P", self.planck_length(), "m", "derived: sqrt(hbar G / c^3)"),
            ("E_P", self.planck_energy(), "J", "derived: m_P c^2"),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planck_units_match_tabulated_values() {
        let k = PhysicalConstants::codata2018();
        assert!((k.planck_mass() / 2.176_434e-8 - 1.0).abs() < 1e-5);
        assert!((k.planck_length() / 1.616_255e-35 - 1.0).abs() < 1e-5);
        assert!((k.planck_energy() / 1.956_08e9 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn planck_length_times_mass_is_hbar_over_c() {
        let k = PhysicalConstants::codata2018();
        let lhs = k.planck_length() * k.planck_mass();
        assert!((lhs / (k.hbar / k.c) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derived_units_follow_overrides() {
        let k = PhysicalConstants {
            g: 4.0 * G_CODATA2018,
            ..PhysicalConstants::codata2018()
        };
        let base = PhysicalConstants::codata2018();
        assert!((k.planck_mass() * 2.0 / base.planck_mass() - 1.0).abs() < 1e-14);
        assert_eq!(k.provenance()[0].3, "user override");
    }

    #[test]
    fn planck_mass_quantity_has_mass_dimension() {
        let k = PhysicalConstants::codata2018();
        let mp = (k.hbar_q() * k.c_q() / k.g_q()).sqrt().unwrap();
        assert_eq!(mp.dim, Dim::KG);
    }
}

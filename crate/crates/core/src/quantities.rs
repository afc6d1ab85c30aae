//! Physical constants and the handful of unit conversions the solver needs.
//!
//! Internal working units are eV for energies, Å for lengths and seconds for
//! times. SI values only appear when converting at the edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 reduced Planck constant, J·s.
pub const CODATA_HBAR_J_S: f64 = 1.054_571_817e-34;
/// CODATA 2018 electron mass, kg.
pub const CODATA_ELECTRON_MASS_KG: f64 = 9.109_383_701_5e-31;
/// Exact elementary charge, i.e. joules per electronvolt.
pub const CODATA_EV_IN_J: f64 = 1.602_176_634e-19;
/// Exact speed of light, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

const METERS_PER_ANGSTROM: f64 = 1e-10;
const NM_PER_M: f64 = 1e9;

/// Constants record shared by every numeric routine.
///
/// Construct it from the SI inputs with [`PhysicalConstants::from_si`] so the
/// derived fields stay consistent with each other.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar_ev_s: f64,
    pub hbar_j_s: f64,
    pub electron_mass_kg: f64,
    pub ev_in_j: f64,
    pub hc_ev_nm: f64,
    /// Å⁻¹ per √eV: a free electron with kinetic energy E has k = factor·√E.
    pub wavenumber_factor: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        Self::from_si(
            CODATA_HBAR_J_S,
            CODATA_ELECTRON_MASS_KG,
            CODATA_EV_IN_J,
            SPEED_OF_LIGHT_M_S,
        )
        .expect("CODATA values are positive")
    }

    /// Derives the full record from ħ, mₑ, the eV→J factor and c.
    pub fn from_si(
        hbar_j_s: f64,
        electron_mass_kg: f64,
        ev_in_j: f64,
        speed_of_light: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("hbar_j_s", hbar_j_s),
            ("electron_mass_kg", electron_mass_kg),
            ("ev_in_j", ev_in_j),
            ("speed_of_light", speed_of_light),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!(
                    "constants.{name} must be finite and positive, got {v}"
                )));
            }
        }
        let h = 2.0 * std::f64::consts::PI * hbar_j_s;
        Ok(Self {
            hbar_ev_s: hbar_j_s / ev_in_j,
            hbar_j_s,
            electron_mass_kg,
            ev_in_j,
            hc_ev_nm: h * speed_of_light / ev_in_j * NM_PER_M,
            wavenumber_factor: (2.0 * electron_mass_kg * ev_in_j).sqrt() / hbar_j_s
                * METERS_PER_ANGSTROM,
        })
    }

    /// 2m/ħ² in Å⁻²·eV⁻¹.
    #[inline]
    pub fn k_squared_per_ev(&self) -> f64 {
        self.wavenumber_factor * self.wavenumber_factor
    }

    /// ħ²/2m in eV·Å².
    #[inline]
    pub fn kinetic_coefficient(&self) -> f64 {
        1.0 / self.k_squared_per_ev()
    }

    /// Wavenumber √(2mE)/ħ in Å⁻¹ for a non-negative energy offset.
    pub fn wavenumber(&self, energy_offset: f64) -> Result<f64> {
        if !(energy_offset >= 0.0) {
            return Err(Error::Domain(format!(
                "wavenumber needs a non-negative energy offset, got {energy_offset} eV"
            )));
        }
        Ok(self.wavenumber_factor * energy_offset.sqrt())
    }

    #[inline]
    pub fn ev_to_joule(&self, e: f64) -> f64 {
        e * self.ev_in_j
    }

    #[inline]
    pub fn joule_to_ev(&self, e: f64) -> f64 {
        e / self.ev_in_j
    }

    /// Vacuum wavelength in nm of a photon carrying `delta_e` eV.
    pub fn photon_wavelength(&self, delta_e: f64) -> Result<f64> {
        if !(delta_e > 0.0) {
            return Err(Error::Domain(format!(
                "photon energy must be positive, got {delta_e} eV"
            )));
        }
        Ok(self.hc_ev_nm / delta_e)
    }

    /// Inverse of [`photon_wavelength`](Self::photon_wavelength).
    pub fn photon_energy(&self, wavelength_nm: f64) -> Result<f64> {
        if !(wavelength_nm > 0.0) {
            return Err(Error::Domain(format!(
                "wavelength must be positive, got {wavelength_nm} nm"
            )));
        }
        Ok(self.hc_ev_nm / wavelength_nm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const PLANCK_J_S: f64 = 6.626_070_15e-34;

    #[test]
    fn wavenumber_examples() {
        let c = PhysicalConstants::codata2018();
        assert_eq!(c.wavenumber(0.0).unwrap(), 0.0);
        // sqrt(2 * 9.1093837015e-31 * 1.602176634e-19) / 1.054571817e-34 * 1e-10
        let k1 = c.wavenumber(1.0).unwrap();
        assert!((k1 - 0.51231).abs() < 1e-4, "{k1}");
        let k4 = c.wavenumber(4.0).unwrap();
        assert!((k4 - 2.0 * k1).abs() < 1e-15);
        assert!(matches!(c.wavenumber(-1e-3), Err(Error::Domain(_))));
    }

    #[test]
    fn joule_conversions() {
        let c = PhysicalConstants::codata2018();
        assert_eq!(c.ev_to_joule(1.0), CODATA_EV_IN_J);
        assert_eq!(c.ev_to_joule(0.0), 0.0);
        // The figure quotes 5-digit joules next to 4-digit eV values; the two
        // agree to within the rounding half-width of the eV figure.
        for (ev, joule) in [(1.445, 2.3149e-19), (1.460, 2.3389e-19)] {
            let back = c.joule_to_ev(joule);
            assert!((back - ev).abs() <= 5e-4, "{joule} J -> {back} eV");
            let fwd = c.ev_to_joule(ev);
            assert!((fwd - joule).abs() / joule < 5e-4, "{ev} eV -> {fwd} J");
        }
    }

    #[test]
    fn photon_wavelength_examples() {
        let c = PhysicalConstants::codata2018();
        let nm = c.photon_wavelength(1.426676).unwrap();
        assert!((nm - 869.0).abs() / 869.0 < 1e-3, "{nm}");
        assert!((nm - 869.7).abs() / 869.7 < 2e-3, "{nm}");
        assert!((c.photon_wavelength(c.hc_ev_nm).unwrap() - 1.0).abs() < 1e-15);

        // h c from the defining constants, independent of hbar
        let hc = PLANCK_J_S * SPEED_OF_LIGHT_M_S / CODATA_EV_IN_J * 1e9;
        let nm = c.photon_wavelength(1.42).unwrap();
        assert!((nm - hc / 1.42).abs() / nm < 1e-9, "{nm} vs {}", hc / 1.42);

        assert!(c.photon_wavelength(0.0).is_err());
        assert!(c.photon_wavelength(-1.0).is_err());
    }

    #[test]
    fn derived_fields_consistent() {
        let c = PhysicalConstants::codata2018();
        let direct = (2.0 * c.electron_mass_kg * c.ev_in_j).sqrt() / c.hbar_j_s * 1e-10;
        assert!((c.wavenumber_factor / direct - 1.0).abs() < 1e-10);
        assert!((c.hbar_ev_s - 6.582_119_569e-16).abs() / 6.582e-16 < 1e-9);
        assert!((c.hc_ev_nm - 1_239.841_984).abs() < 1e-5);
        for v in [
            c.hbar_ev_s,
            c.hbar_j_s,
            c.electron_mass_kg,
            c.ev_in_j,
            c.hc_ev_nm,
            c.wavenumber_factor,
        ] {
            assert!(v > 0.0);
        }
        assert!(PhysicalConstants::from_si(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn joule_round_trip(x in 1e-6f64..1e3) {
            let c = PhysicalConstants::codata2018();
            let back = c.joule_to_ev(c.ev_to_joule(x));
            prop_assert!(((back - x) / x).abs() < 1e-14);
        }

        #[test]
        fn wavenumber_recovers_energy(e in 1e-6f64..1e3) {
            let c = PhysicalConstants::codata2018();
            let k = c.wavenumber(e).unwrap();
            let back = k * k * c.kinetic_coefficient();
            prop_assert!(((back - e) / e).abs() < 1e-12);
        }
    }
}

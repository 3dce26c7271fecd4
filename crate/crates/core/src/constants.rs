//! Physical constants and energy units.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// CODATA 2018 Planck constant (exact), J s.
pub const PLANCK_CODATA2018: f64 = 6.626_070_15e-34;
/// CODATA 2018 Boltzmann constant (exact), J/K.
pub const BOLTZMANN_CODATA2018: f64 = 1.380_649e-23;
/// CODATA 2018 bare electron mass, kg.
pub const ELECTRON_MASS_CODATA2018: f64 = 9.109_383_701_5e-31;

/// Planck constant, Boltzmann constant and particle mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants<T> {
    /// Planck constant, J s.
    pub h: T,
    /// Boltzmann constant, J/K.
    pub k: T,
    /// Particle mass, kg.
    pub m: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn new(h: T, k: T, m: T) -> Result<Self> {
        for (name, v) in [("h", h), ("k", k), ("m", m)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Domain(format!("constant {name} must be positive, got {v}")));
            }
        }
        Ok(Self { h, k, m })
    }

    /// CODATA 2018 values with the bare electron mass.
    pub fn codata2018() -> Self {
        Self {
            h: T::lit(PLANCK_CODATA2018),
            k: T::lit(BOLTZMANN_CODATA2018),
            m: T::lit(ELECTRON_MASS_CODATA2018),
        }
    }

    /// Same constants with a different particle mass.
    pub fn with_mass(self, m: T) -> Result<Self> {
        Self::new(self.h, self.k, m)
    }

    pub fn hbar(&self) -> T {
        self.h / (T::lit(2.0) * T::PI())
    }

    /// Thermal energy kT, J.
    pub fn kt(&self, temperature: T) -> T {
        self.k * temperature
    }

    /// hbar^2 / (2m): converts a Laplacian eigenvalue (1/m^2) into an energy.
    pub fn kinetic_scale(&self) -> T {
        let a = self.hbar() / (T::lit(2.0) * self.m).sqrt();
        a * a
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata2018()
    }
}

pub(crate) fn check_temperature<T: Real>(temperature: T) -> Result<()> {
    if temperature > T::zero() && temperature.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("temperature must be positive, got {temperature} K")))
    }
}

/// Thermal de Broglie wavelength `h / sqrt(2 pi m k T)`, m.
pub fn thermal_wavelength<T: Real>(temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    check_temperature(temperature)?;
    // split the root: m k T alone underflows in single precision
    Ok(c.h / (T::lit(2.0) * T::PI() * c.m).sqrt() / c.kt(temperature).sqrt())
}

/// Energy units accepted on input and used on output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyUnit {
    Joule,
    /// Multiples of kT at the run temperature.
    #[serde(rename = "kt")]
    KtUnits,
    #[serde(rename = "zj")]
    Zeptojoule,
}

impl EnergyUnit {
    pub fn tag(&self) -> &'static str {
        match self {
            EnergyUnit::Joule => "J",
            EnergyUnit::KtUnits => "kT",
            EnergyUnit::Zeptojoule => "zJ",
        }
    }
}

impl fmt::Display for EnergyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EnergyUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "j" | "joule" | "joules" => Ok(EnergyUnit::Joule),
            "kt" | "kt-units" => Ok(EnergyUnit::KtUnits),
            "zj" | "zeptojoule" => Ok(EnergyUnit::Zeptojoule),
            other => Err(Error::Usage(format!("unknown energy unit '{other}' (expected kt, joule or zj)"))),
        }
    }
}

fn unit_scale<T: Real>(temperature: T, unit: EnergyUnit, c: &PhysicalConstants<T>) -> Result<T> {
    match unit {
        EnergyUnit::Joule => Ok(T::one()),
        EnergyUnit::Zeptojoule => Ok(T::lit(1e-21)),
        EnergyUnit::KtUnits => {
            check_temperature(temperature)?;
            Ok(c.kt(temperature))
        }
    }
}

/// Express an energy given in joules in `unit`.
pub fn convert_energy<T: Real>(
    joules: T,
    temperature: T,
    unit: EnergyUnit,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    Ok(joules / unit_scale(temperature, unit, c)?)
}

/// Inverse of [`convert_energy`]: a value in `unit` back to joules.
pub fn energy_to_joules<T: Real>(
    value: T,
    temperature: T,
    unit: EnergyUnit,
    c: &PhysicalConstants<T>,
) -> Result<T> {
    Ok(value * unit_scale(temperature, unit, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = PhysicalConstants<f64>;

    #[test]
    fn thermal_wavelength_at_room_temperature() {
        // mpmath: h / sqrt(2 pi m k 300) = 4.303475439595e-9 m
        let lam = thermal_wavelength(300.0, &C::codata2018()).unwrap();
        assert!((lam - 4.303_475_439_595_208e-9).abs() / lam < 1e-13);
    }

    #[test]
    fn thermal_wavelength_scaling() {
        let c = C::codata2018();
        let lam = thermal_wavelength(300.0, &c).unwrap();
        let hot = thermal_wavelength(1200.0, &c).unwrap();
        assert!((hot - lam / 2.0).abs() / lam < 1e-15);
        let heavy = c.with_mass(4.0 * c.m).unwrap();
        let lam_heavy = thermal_wavelength(300.0, &heavy).unwrap();
        assert!((lam_heavy - lam / 2.0).abs() / lam < 1e-15);
    }

    #[test]
    fn thermal_wavelength_rejects_bad_temperature() {
        let c = C::codata2018();
        assert!(matches!(thermal_wavelength(0.0, &c), Err(Error::Domain(_))));
        assert!(matches!(thermal_wavelength(-3.0, &c), Err(Error::Domain(_))));
        assert!(matches!(thermal_wavelength(f64::NAN, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn energy_conversions() {
        let c = C::codata2018();
        let kt = convert_energy(4.141947e-21, 300.0, EnergyUnit::KtUnits, &c).unwrap();
        assert!((kt - 1.0).abs() < 1e-15);
        for unit in [EnergyUnit::Joule, EnergyUnit::KtUnits, EnergyUnit::Zeptojoule] {
            assert_eq!(convert_energy(0.0, 300.0, unit, &c).unwrap(), 0.0);
        }
        let zj = convert_energy(1e-21, 300.0, EnergyUnit::Zeptojoule, &c).unwrap();
        assert!((zj - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_tags_parse() {
        assert_eq!("kt".parse::<EnergyUnit>().unwrap(), EnergyUnit::KtUnits);
        assert_eq!("ZJ".parse::<EnergyUnit>().unwrap(), EnergyUnit::Zeptojoule);
        assert_eq!("joule".parse::<EnergyUnit>().unwrap(), EnergyUnit::Joule);
        assert!(matches!("ev".parse::<EnergyUnit>(), Err(Error::Usage(_))));
    }

    #[test]
    fn kt_units_need_positive_temperature() {
        let c = C::codata2018();
        assert!(convert_energy(1.0, 0.0, EnergyUnit::KtUnits, &c).is_err());
        assert!(convert_energy(1.0, 0.0, EnergyUnit::Joule, &c).is_ok());
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(C::new(1.0, 1.0, 0.0).is_err());
        assert!(C::new(-1.0, 1.0, 1.0).is_err());
    }
}

//! Canonical-ensemble thermodynamics of a spectrum.
//!
//! The particle is either in the whole domain the spectrum describes, or in a
//! superposition of two identical, separated halves. The second case is
//! handled with a side multiplicity `g = 2` instead of a doubled spectrum, so
//! `Z_total = g Z`.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::constants::{check_temperature, PhysicalConstants};
use crate::error::{Error, Result};
use crate::num::{CompensatedSum, Real};
use crate::spectrum::{Spectrum, DEFAULT_TAIL_LIMIT};

/// Equilibrium state of one particle at temperature `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoState<T> {
    /// K.
    pub temperature: T,
    /// Single-side partition function.
    pub z: T,
    /// `ln Z`, kept separately since `Z` itself under- or overflows for
    /// spectra far from `kT`.
    pub ln_z: T,
    /// J.
    pub free_energy: T,
    /// J/K.
    pub entropy: T,
    /// J.
    pub internal_energy: T,
    pub multiplicity: usize,
}

impl<T: Real> ThermoState<T> {
    /// `|F - (U - T S)| / max(|F|, |U|, |T S|)`.
    pub fn identity_residual(&self) -> T {
        let ts = self.temperature * self.entropy;
        let scale = self.free_energy.abs().max(self.internal_energy.abs()).max(ts.abs());
        if scale == T::zero() {
            return T::zero();
        }
        (self.free_energy - (self.internal_energy - ts)).abs() / scale
    }
}

#[derive(Serialize)]
struct Tagged<T> {
    value: T,
    unit: &'static str,
}

impl<T: Real + Serialize> Serialize for ThermoState<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let tag = |value, unit| Tagged { value, unit };
        let mut st = s.serialize_struct("ThermoState", 7)?;
        st.serialize_field("temperature", &tag(self.temperature, "K"))?;
        st.serialize_field("z", &tag(self.z, "1"))?;
        st.serialize_field("ln_z", &tag(self.ln_z, "1"))?;
        st.serialize_field("free_energy", &tag(self.free_energy, "J"))?;
        st.serialize_field("entropy", &tag(self.entropy, "J/K"))?;
        st.serialize_field("internal_energy", &tag(self.internal_energy, "J"))?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

fn check_multiplicity(g: usize) -> Result<()> {
    if g == 1 || g == 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("side multiplicity must be 1 or 2, got {g}")))
    }
}

/// Boltzmann sums relative to the ground level.
struct Sums<T> {
    /// `sum g_n exp(-beta (E_n - E_0))`
    s0: T,
    /// `sum g_n (E_n - E_0) exp(-beta (E_n - E_0))`
    s1: T,
    ground: T,
    beta: T,
}

fn sums<T: Real>(s: &Spectrum<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<Sums<T>> {
    check_temperature(temperature)?;
    s.check_truncation(temperature, T::lit(DEFAULT_TAIL_LIMIT), c)?;
    let beta = T::one() / c.kt(temperature);
    let ground = s.ground();
    let mut s0 = CompensatedSum::new();
    let mut s1 = CompensatedSum::new();
    for l in s.levels() {
        let de = l.energy - ground;
        let w = T::from_usize_lossy(l.degeneracy) * (-beta * de).exp();
        s0.add(w);
        s1.add(w * de);
    }
    Ok(Sums {
        s0: s0.value(),
        s1: s1.value(),
        ground,
        beta,
    })
}

/// `ln Z` with `Z = sum_n g_n exp(-beta E_n)`.
pub fn ln_partition_function<T: Real>(s: &Spectrum<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    let m = sums(s, temperature, c)?;
    Ok(m.s0.ln() - m.beta * m.ground)
}

/// `Z = sum_n g_n exp(-beta E_n)`.
pub fn partition_function<T: Real>(s: &Spectrum<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    Ok(ln_partition_function(s, temperature, c)?.exp())
}

/// `F = -kT ln(g Z)`.
pub fn free_energy<T: Real>(z: T, temperature: T, g: usize, c: &PhysicalConstants<T>) -> Result<T> {
    check_temperature(temperature)?;
    check_multiplicity(g)?;
    if !(z > T::zero()) || !z.is_finite() {
        return Err(Error::Domain(format!("partition function must be positive and finite, got {z}")));
    }
    Ok(-c.kt(temperature) * (T::from_usize_lossy(g).ln() + z.ln()))
}

/// `U = Z^-1 sum_n g_n E_n exp(-beta E_n)`; independent of the side
/// multiplicity.
pub fn internal_energy<T: Real>(s: &Spectrum<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    let m = sums(s, temperature, c)?;
    Ok(m.ground + m.s1 / m.s0)
}

/// Gibbs entropy of the occupation probabilities over `g` copies of the
/// spectrum, `k (ln(g Z) + beta U)`.
pub fn entropy<T: Real>(s: &Spectrum<T>, temperature: T, g: usize, c: &PhysicalConstants<T>) -> Result<T> {
    Ok(thermo_state(s, temperature, g, c)?.entropy)
}

/// All four quantities from one pass over the spectrum.
pub fn thermo_state<T: Real>(s: &Spectrum<T>, temperature: T, g: usize, c: &PhysicalConstants<T>) -> Result<ThermoState<T>> {
    check_multiplicity(g)?;
    let m = sums(s, temperature, c)?;
    let kt = c.kt(temperature);
    let ln_g = T::from_usize_lossy(g).ln();
    // shifted by the ground level to keep every piece O(1) in kT units
    let ln_z_shifted = m.s0.ln();
    let mean_excitation = m.s1 / m.s0;
    let ln_z = ln_z_shifted - m.beta * m.ground;
    let internal_energy = m.ground + mean_excitation;
    let free_energy = m.ground - kt * (ln_g + ln_z_shifted);
    let entropy = c.k * (ln_g + ln_z_shifted + m.beta * mean_excitation);
    let state = ThermoState {
        temperature,
        z: ln_z.exp(),
        ln_z,
        free_energy,
        entropy,
        internal_energy,
        multiplicity: g,
    };
    let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-12) } else { T::lit(1e-5) };
    let residual = state.identity_residual();
    if !(residual <= tol) {
        return Err(Error::Invariant {
            name: "F = U - TS".into(),
            detail: format!("relative residual {residual}"),
        });
    }
    Ok(state)
}

/// Occupation probabilities of each level (degeneracy included), summing to 1.
pub fn level_probabilities<T: Real>(s: &Spectrum<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<Vec<T>> {
    let m = sums(s, temperature, c)?;
    Ok(s.levels()
        .iter()
        .map(|l| T::from_usize_lossy(l.degeneracy) * (-m.beta * (l.energy - m.ground)).exp() / m.s0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::thermal_wavelength;
    use crate::spectrum::{energies_1d, Cutoff, Level, Provenance, WeylMeasure};

    fn c() -> PhysicalConstants<f64> {
        PhysicalConstants::codata2018()
    }

    fn box1d(l: f64, t: f64) -> Spectrum<f64> {
        energies_1d(l, Cutoff::thermal(t), &c()).unwrap()
    }

    fn single(e0: f64, deg: usize) -> Spectrum<f64> {
        Spectrum::from_levels(vec![Level { energy: e0, degeneracy: deg }], Provenance::Analytic1d, 1.0, WeylMeasure::Length(1e-30)).unwrap()
    }

    #[test]
    fn box_partition_function() {
        let z = partition_function(&box1d(20e-9, 300.0), 300.0, &c()).unwrap();
        assert!((z - 4.14740656260867).abs() / 4.14740656260867 < 1e-12);
        let f = free_energy(z, 300.0, 1, &c()).unwrap() / c().kt(300.0);
        assert!((f + 1.422483214223185).abs() < 1e-12);
    }

    #[test]
    fn single_level() {
        let e0 = 1e-21;
        let s = single(e0, 1);
        let st = thermo_state(&s, 300.0, 1, &c()).unwrap();
        let kt = c().kt(300.0);
        assert!((st.z - (-e0 / kt).exp()).abs() < 1e-15);
        assert!((st.internal_energy - e0).abs() < 1e-36);
        assert!(st.entropy.abs() < 1e-40);
        let doubled = thermo_state(&single(e0, 2), 300.0, 1, &c()).unwrap();
        assert!((doubled.z / st.z - 2.0).abs() < 1e-15);
    }

    #[test]
    fn free_energy_edge_cases() {
        assert_eq!(free_energy(1.0, 300.0, 1, &c()).unwrap(), 0.0);
        let kt = c().kt(300.0);
        let d = free_energy(3.0, 300.0, 2, &c()).unwrap() - free_energy(3.0, 300.0, 1, &c()).unwrap();
        assert!((d + kt * std::f64::consts::LN_2).abs() < 1e-12 * kt);
        assert!(free_energy(0.0, 300.0, 1, &c()).is_err());
        assert!(free_energy(1.0, 300.0, 3, &c()).is_err());
        assert!(free_energy(1.0, -1.0, 1, &c()).is_err());
    }

    #[test]
    fn multiplicity_adds_k_ln2() {
        let s = box1d(20e-9, 300.0);
        let a = thermo_state(&s, 300.0, 1, &c()).unwrap();
        let b = thermo_state(&s, 300.0, 2, &c()).unwrap();
        let k = c().k;
        assert!((b.entropy - a.entropy - k * std::f64::consts::LN_2).abs() < 1e-12 * k);
        assert_eq!(a.internal_energy, b.internal_energy);
        assert!(a.entropy > 0.0);
    }

    #[test]
    fn equipartition_for_long_box() {
        let u = internal_energy(&box1d(200e-9, 300.0), 300.0, &c()).unwrap();
        let ratio = u / (0.5 * c().kt(300.0));
        assert!((ratio - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn energy_rises_with_temperature() {
        let s = box1d(20e-9, 3000.0);
        let mut prev = 0.0;
        for i in 1..=30 {
            let t = 10.0 * i as f64;
            let u = internal_energy(&s, t, &c()).unwrap();
            assert!(u >= prev);
            prev = u;
        }
    }

    #[test]
    fn classical_limit_of_z() {
        let t = 300.0;
        let l = 400e-9;
        let s = box1d(l, t);
        let beta_e1 = s.ground() / c().kt(t);
        assert!(beta_e1 < 1e-4);
        let lambda = thermal_wavelength(t, &c()).unwrap();
        let z = partition_function(&s, t, &c()).unwrap();
        let want = l / lambda - 0.5;
        assert!((z - want).abs() / want < 1e-6);
    }

    #[test]
    fn gibbs_helmholtz() {
        let s = box1d(20e-9, 2000.0);
        let dt = 0.01;
        for i in 0..20 {
            let t = 50.0 + 50.0 * i as f64;
            let beta = |t: f64| 1.0 / c().kt(t);
            let bf = |t: f64| beta(t) * thermo_state(&s, t, 1, &c()).unwrap().free_energy;
            let du = (bf(t + dt) - bf(t - dt)) / (beta(t + dt) - beta(t - dt));
            let u = internal_energy(&s, t, &c()).unwrap();
            assert!((du - u).abs() / u < 1e-4, "T={t}: {du} vs {u}");
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let p = level_probabilities(&box1d(20e-9, 300.0), 300.0, &c()).unwrap();
        let total: f64 = p.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncated_spectrum_is_rejected() {
        let s = energies_1d(20e-9, Cutoff::Energy(1e-21), &c()).unwrap();
        assert!(matches!(thermo_state(&s, 300.0, 1, &c()), Err(Error::Truncation { .. })));
    }

    #[test]
    fn json_has_unit_tags() {
        let st = thermo_state(&box1d(20e-9, 300.0), 300.0, 2, &c()).unwrap();
        let v = serde_json::to_value(st).unwrap();
        assert_eq!(v["free_energy"]["unit"], "J");
        assert_eq!(v["entropy"]["unit"], "J/K");
        assert_eq!(v["multiplicity"], 2);
    }

    #[test]
    fn single_precision_smoke() {
        let c32 = PhysicalConstants::<f32>::codata2018();
        let s = energies_1d(20e-9f32, Cutoff::thermal(300.0), &c32).unwrap();
        let z = partition_function(&s, 300.0, &c32).unwrap();
        assert!((z - 4.1474066).abs() / 4.1474066 < 1e-4, "{z}");
        let st = thermo_state(&s, 300.0f32, 1, &c32).unwrap();
        assert!(st.identity_residual() < 1e-5);
    }
}

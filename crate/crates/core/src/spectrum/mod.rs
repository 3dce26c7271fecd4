//! Energy spectra of the 1D box, the rectangle, and the rectangle with a
//! partially inserted partition.

mod fd;
mod field;
mod partitioned;

use serde::{Deserialize, Serialize};

use crate::constants::{check_temperature, thermal_wavelength, PhysicalConstants};
use crate::error::{Error, Result};
use crate::num::Real;

pub use fd::{fd_rectangle_spectrum, Chain};
pub use field::{density_map, EigenBasis, ScalarField};
pub use partitioned::{partitioned_spectrum, solve_partitioned_2d, PartitionedSpectrum, SolverStats};

/// Default thermal cutoff: levels up to `E_ground + 40 kT` are kept.
pub const DEFAULT_CUTOFF_MULTIPLE: f64 = 40.0;
/// Largest tolerated Boltzmann weight above the cutoff, relative to `Z`.
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-15;
/// Relative tolerance under which analytic levels count as degenerate.
pub const ANALYTIC_MERGE_TOL: f64 = 1e-12;
/// Same for finite-difference eigenvalues found by root polishing.
pub const NUMERIC_MERGE_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level<T> {
    /// Energy, J.
    pub energy: T,
    pub degeneracy: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic1d,
    AnalyticRect,
    NumericFd,
}

/// Size of the domain entering the Weyl level density.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeylMeasure<T> {
    /// 1D box length, m.
    Length(T),
    /// 2D area, m^2.
    Area(T),
}

/// How far up the spectrum to go.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff<T> {
    /// Absolute energy, J.
    Energy(T),
    /// `E_ground + multiple * kT`, raised if needed so that the estimated
    /// tail weight at `temperature` stays below [`DEFAULT_TAIL_LIMIT`].
    Thermal { temperature: T, multiple: T },
}

impl<T: Real> Cutoff<T> {
    pub fn thermal(temperature: T) -> Self {
        Cutoff::Thermal {
            temperature,
            multiple: T::lit(DEFAULT_CUTOFF_MULTIPLE),
        }
    }

    pub(crate) fn resolve(&self, ground: T, weyl: WeylMeasure<T>, c: &PhysicalConstants<T>) -> Result<T> {
        match *self {
            Cutoff::Energy(e) => {
                if !(e >= ground) {
                    return Err(Error::EmptySpectrum {
                        cutoff_j: e.to_f64_lossy(),
                        ground_j: ground.to_f64_lossy(),
                    });
                }
                Ok(e)
            }
            Cutoff::Thermal { temperature, multiple } => {
                check_temperature(temperature)?;
                if !(multiple > T::zero()) {
                    return Err(Error::Domain(format!("cutoff multiple must be positive, got {multiple}")));
                }
                let base = ground + multiple * c.kt(temperature);
                let needed = required_cutoff(ground, weyl, temperature, T::lit(DEFAULT_TAIL_LIMIT), c)?;
                Ok(base.max(needed))
            }
        }
    }
}

/// Ascending energy levels with degeneracies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    levels: Vec<Level<T>>,
    provenance: Provenance,
    /// Energy cutoff used when the spectrum was generated, J.
    cutoff: T,
    weyl: WeylMeasure<T>,
}

impl<T: Real> Spectrum<T> {
    /// Build from sorted levels; used by the generators and tests.
    pub fn from_levels(levels: Vec<Level<T>>, provenance: Provenance, cutoff: T, weyl: WeylMeasure<T>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::EmptySpectrum {
                cutoff_j: cutoff.to_f64_lossy(),
                ground_j: f64::NAN,
            });
        }
        for w in levels.windows(2) {
            if !(w[1].energy > w[0].energy) {
                return Err(Error::Invariant {
                    name: "spectrum-ascending".into(),
                    detail: format!("{} followed by {}", w[0].energy, w[1].energy),
                });
            }
        }
        if levels.iter().any(|l| l.degeneracy == 0 || !l.energy.is_finite()) {
            return Err(Error::Invariant {
                name: "spectrum-levels".into(),
                detail: "degeneracy must be >= 1 and energies finite".into(),
            });
        }
        Ok(Self {
            levels,
            provenance,
            cutoff,
            weyl,
        })
    }

    /// Merge a list of eigenvalues (any order) into levels.
    pub fn from_energies(mut energies: Vec<T>, rel_tol: T, provenance: Provenance, cutoff: T, weyl: WeylMeasure<T>) -> Result<Self> {
        energies.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
        let mut levels: Vec<Level<T>> = Vec::new();
        let mut anchor = T::nan();
        for e in energies {
            match levels.last_mut() {
                Some(last) if (e - anchor).abs() <= rel_tol * anchor.abs() => last.degeneracy += 1,
                _ => {
                    anchor = e;
                    levels.push(Level { energy: e, degeneracy: 1 });
                }
            }
        }
        Self::from_levels(levels, provenance, cutoff, weyl)
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn weyl(&self) -> WeylMeasure<T> {
        self.weyl
    }

    pub fn ground(&self) -> T {
        self.levels[0].energy
    }

    /// Number of states counted with degeneracy.
    pub fn state_count(&self) -> usize {
        self.levels.iter().map(|l| l.degeneracy).sum()
    }

    /// Every state energy, degenerate levels repeated.
    pub fn state_energies(&self) -> Vec<T> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.energy, l.degeneracy))
            .collect()
    }

    /// Same levels with every degeneracy multiplied by `factor`.
    pub fn with_degeneracy_factor(&self, factor: usize) -> Self {
        let mut s = self.clone();
        for l in &mut s.levels {
            l.degeneracy *= factor;
        }
        s
    }

    /// Upper bound on the Boltzmann weight above the cutoff relative to `Z`.
    pub fn tail_weight(&self, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
        tail_bound(self.ground(), self.cutoff, self.weyl, temperature, c)
    }

    /// Check the truncation against `limit`.
    pub fn check_truncation(&self, temperature: T, limit: T, c: &PhysicalConstants<T>) -> Result<()> {
        let tail = self.tail_weight(temperature, c)?;
        if tail > limit {
            let required = required_cutoff(self.ground(), self.weyl, temperature, limit, c)?;
            return Err(Error::Truncation {
                tail: tail.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
                required_cutoff_j: required.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Gaussian-integral bound of the Boltzmann weight above `cutoff` using the
/// leading Weyl level density, divided by the ground-state weight (a lower
/// bound on `Z` after factoring out `exp(-beta E_ground)`).
///
/// 1D: `rho(E) = (L/h) sqrt(2m/E)`, giving
/// `(L/lambda) erfc(sqrt(beta E_c)) sqrt(pi) e^{beta E_0}` which is bounded with
/// `erfc(x) <= exp(-x^2) / (x sqrt(pi))`.
/// 2D: `rho = A 2 pi m / h^2`, giving `(A/lambda^2) exp(-beta (E_c - E_0))`.
pub fn tail_bound<T: Real>(ground: T, cutoff: T, weyl: WeylMeasure<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    let lambda = thermal_wavelength(temperature, c)?;
    let beta = T::one() / c.kt(temperature);
    let gap = beta * (cutoff - ground);
    Ok(match weyl {
        WeylMeasure::Length(l) => {
            let x = (beta * cutoff).sqrt();
            (l / lambda) * (-gap).exp() / (x * T::PI().sqrt())
        }
        WeylMeasure::Area(a) => (a / (lambda * lambda)) * (-gap).exp(),
    })
}

/// Cutoff energy whose tail bound is below `limit`. It aims at `limit / 2`
/// so that rounding cannot push the bound of the result over `limit`.
pub fn required_cutoff<T: Real>(ground: T, weyl: WeylMeasure<T>, temperature: T, limit: T, c: &PhysicalConstants<T>) -> Result<T> {
    let limit = limit / T::lit(2.0);
    let lambda = thermal_wavelength(temperature, c)?;
    let kt = c.kt(temperature);
    let prefactor = match weyl {
        WeylMeasure::Length(l) => l / lambda,
        WeylMeasure::Area(a) => a / (lambda * lambda),
    };
    let mut gap = (prefactor / limit).ln().max(T::one());
    if let WeylMeasure::Length(_) = weyl {
        // fixed point for the 1/sqrt(pi beta E_c) factor
        for _ in 0..8 {
            let x = ((ground + gap * kt) / kt).sqrt();
            gap = (prefactor / (limit * x * T::PI().sqrt())).ln().max(T::one());
        }
    }
    Ok(ground + gap * kt)
}

/// Ground level `h^2 / (8 m L^2)` of a 1D box.
pub fn box_ground_energy<T: Real>(length: T, c: &PhysicalConstants<T>) -> T {
    let a = c.h / ((T::lit(8.0) * c.m).sqrt() * length);
    a * a
}

fn check_length<T: Real>(name: &str, length: T) -> Result<()> {
    if length > T::zero() && length.is_finite() {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{name} must be positive, got {length} m")))
    }
}

/// Levels `E_n = n^2 h^2 / (8 m L^2)` up to the cutoff.
pub fn energies_1d<T: Real>(length: T, cutoff: Cutoff<T>, c: &PhysicalConstants<T>) -> Result<Spectrum<T>> {
    check_length("box length", length)?;
    let e1 = box_ground_energy(length, c);
    let weyl = WeylMeasure::Length(length);
    let e_max = cutoff.resolve(e1, weyl, c)?;
    let n_max = (e_max / e1).sqrt().floor().to_usize().unwrap_or(0);
    let levels: Vec<Level<T>> = (1..=n_max)
        .map(|n| {
            let n = T::from_usize_lossy(n);
            Level {
                energy: n * n * e1,
                degeneracy: 1,
            }
        })
        .filter(|l| l.energy <= e_max)
        .collect();
    Spectrum::from_levels(levels, Provenance::Analytic1d, e_max, weyl)
}

/// Separable rectangle spectrum `E_{nx,ny} = E_nx(Lx) + E_ny(Ly)`.
pub fn energies_rect<T: Real>(lx: T, ly: T, cutoff: Cutoff<T>, c: &PhysicalConstants<T>) -> Result<Spectrum<T>> {
    check_length("box length", lx)?;
    check_length("box height", ly)?;
    let ex = box_ground_energy(lx, c);
    let ey = box_ground_energy(ly, c);
    let weyl = WeylMeasure::Area(lx * ly);
    let e_max = cutoff.resolve(ex + ey, weyl, c)?;
    let mut energies = Vec::new();
    let mut n = 1usize;
    loop {
        let nf = T::from_usize_lossy(n);
        let exn = nf * nf * ex;
        if exn + ey > e_max {
            break;
        }
        let mut m = 1usize;
        loop {
            let mf = T::from_usize_lossy(m);
            let e = exn + mf * mf * ey;
            if e > e_max {
                break;
            }
            energies.push(e);
            m += 1;
        }
        n += 1;
    }
    Spectrum::from_energies(energies, T::lit(ANALYTIC_MERGE_TOL), Provenance::AnalyticRect, e_max, weyl)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = PhysicalConstants<f64>;

    fn nm(x: f64) -> f64 {
        x * 1e-9
    }

    #[test]
    fn ground_level_of_20nm_box() {
        // mpmath: h^2/(8 m (20 nm)^2) = 1.506166850559e-22 J
        let s = energies_1d(nm(20.0), Cutoff::thermal(300.0), &C::codata2018()).unwrap();
        assert!((s.ground() - 1.506_166_850_559_393e-22).abs() / s.ground() < 1e-13);
        assert_eq!(s.levels()[1].energy, 4.0 * s.ground());
        assert!(s.levels().iter().all(|l| l.degeneracy == 1));
    }

    #[test]
    fn halving_length_quadruples_levels() {
        let c = C::codata2018();
        let a = energies_1d(nm(20.0), Cutoff::Energy(1e-19), &c).unwrap();
        let b = energies_1d(nm(10.0), Cutoff::Energy(4e-19), &c).unwrap();
        assert_eq!(a.levels().len(), b.levels().len());
        for (x, y) in a.levels().iter().zip(b.levels()) {
            assert!((4.0 * x.energy - y.energy).abs() <= 1e-15 * y.energy);
        }
    }

    #[test]
    fn scaling_law_e_l_squared() {
        let c = C::codata2018();
        let base = box_ground_energy(nm(1.0), &c) * nm(1.0) * nm(1.0);
        for l in [0.5, 3.0, 20.0, 700.0] {
            let e = box_ground_energy(nm(l), &c) * nm(l) * nm(l);
            assert!((e - base).abs() / base < 1e-12);
        }
    }

    #[test]
    fn cutoff_below_ground_is_empty() {
        let c = C::codata2018();
        let r = energies_1d(nm(20.0), Cutoff::Energy(1e-23), &c);
        assert!(matches!(r, Err(Error::EmptySpectrum { .. })));
    }

    #[test]
    fn rectangle_ground_and_degeneracy() {
        let c = C::codata2018();
        let s = energies_rect(nm(20.0), nm(10.0), Cutoff::thermal(300.0), &c).unwrap();
        // mpmath: E1(20nm) + E1(10nm) = 7.530834252797e-22 J
        assert!((s.ground() - 7.530_834_252_796_964e-22).abs() / s.ground() < 1e-13);
        let sq = energies_rect(nm(10.0), nm(10.0), Cutoff::thermal(300.0), &c).unwrap();
        // (1,2) and (2,1)
        assert_eq!(sq.levels()[1].degeneracy, 2);
        assert!((sq.levels()[1].energy - 5.0 * box_ground_energy(nm(10.0), &c)).abs() < 1e-34);
    }

    #[test]
    fn tall_box_grows_level_count() {
        let c = C::codata2018();
        let cut = Cutoff::Energy(2e-20);
        let counts: Vec<usize> = [10.0, 40.0, 160.0]
            .iter()
            .map(|&ly| energies_rect(nm(20.0), nm(ly), cut, &c).unwrap().state_count())
            .collect();
        assert!(counts[0] < counts[1] && counts[1] < counts[2]);
    }

    #[test]
    fn thermal_cutoff_meets_tail_limit() {
        let c = C::codata2018();
        for (l, t) in [(20.0, 300.0), (2000.0, 300.0), (20.0, 30000.0), (10.0, 100.0)] {
            let s = energies_1d(nm(l), Cutoff::thermal(t), &c).unwrap();
            assert!(s.tail_weight(t, &c).unwrap() <= DEFAULT_TAIL_LIMIT);
            assert!(s.cutoff() >= s.ground() + 40.0 * c.kt(t) * (1.0 - 1e-15));
        }
        let big = energies_rect(nm(400.0), nm(200.0), Cutoff::thermal(300.0), &c).unwrap();
        assert!(big.tail_weight(300.0, &c).unwrap() <= DEFAULT_TAIL_LIMIT * 1.0001);
    }

    #[test]
    fn truncation_error_reports_required_cutoff() {
        let c = C::codata2018();
        let s = energies_1d(nm(20.0), Cutoff::Energy(2e-20), &c).unwrap();
        match s.check_truncation(300.0, DEFAULT_TAIL_LIMIT, &c) {
            Err(Error::Truncation { required_cutoff_j, .. }) => assert!(required_cutoff_j > 2e-20),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn from_energies_merges_within_tolerance() {
        let s = Spectrum::from_energies(
            vec![2.0, 1.0, 1.0 + 1e-14, 3.0],
            1e-12,
            Provenance::NumericFd,
            4.0,
            WeylMeasure::Length(1.0),
        )
        .unwrap();
        assert_eq!(s.levels().len(), 3);
        assert_eq!(s.levels()[0].degeneracy, 2);
        assert_eq!(s.state_count(), 4);
    }
}

//! Closed-form spectra of the 3-point and 5-point Dirichlet Laplacians.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::num::Real;

use super::{Cutoff, Provenance, Spectrum, WeylMeasure, ANALYTIC_MERGE_TOL};

/// Dirichlet chain of `intervals` cells with `intervals - 1` interior nodes.
///
/// `-u''` discretized with the 3-point stencil has eigenvalues
/// `(4/h^2) sin^2(a pi / 2N)` and eigenvectors `sqrt(2/N) sin(a pi i / N)`,
/// orthonormal under the plain node sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chain<T> {
    pub intervals: usize,
    pub spacing: T,
}

impl<T: Real> Chain<T> {
    pub fn new(intervals: usize, spacing: T) -> Self {
        Self { intervals, spacing }
    }

    pub fn nodes(&self) -> usize {
        self.intervals.saturating_sub(1)
    }

    pub fn length(&self) -> T {
        T::from_usize_lossy(self.intervals) * self.spacing
    }

    /// Eigenvalue of mode `a` (1-based), 1/m^2.
    pub fn eigenvalue(&self, a: usize) -> T {
        let s = (T::from_usize_lossy(a) * T::PI() / T::from_usize_lossy(2 * self.intervals)).sin();
        T::lit(4.0) * s * s / (self.spacing * self.spacing)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        (1..self.intervals).map(|a| self.eigenvalue(a)).collect()
    }

    /// Component of mode `a` at node `i` (both 1-based). Exactly zero when
    /// `a * i` is a multiple of the interval count.
    pub fn mode(&self, a: usize, i: usize) -> T {
        if (a * i).is_multiple_of(self.intervals) {
            return T::zero();
        }
        let n = T::from_usize_lossy(self.intervals);
        (T::lit(2.0) / n).sqrt() * (T::from_usize_lossy((a * i) % (2 * self.intervals)) * T::PI() / n).sin()
    }
}

/// Spectrum of the 5-point Laplacian on a rectangle (scaled by hbar^2/2m).
///
/// Separable on the grid, so no eigensolver is needed.
pub fn fd_rectangle_spectrum<T: Real>(
    x: Chain<T>,
    y: Chain<T>,
    cutoff: Cutoff<T>,
    c: &PhysicalConstants<T>,
) -> Result<Spectrum<T>> {
    if x.intervals < 2 || y.intervals < 2 {
        return Err(Error::Geometry(format!(
            "rectangle of {} x {} cells has no interior nodes",
            x.intervals, y.intervals
        )));
    }
    let scale = c.kinetic_scale();
    let kx = x.eigenvalues();
    let ky = y.eigenvalues();
    let weyl = WeylMeasure::Area(x.length() * y.length());
    let e_max = cutoff.resolve(scale * (kx[0] + ky[0]), weyl, c)?;
    let energies = rect_modes_below(&kx, &ky, e_max / scale)
        .into_iter()
        .map(|(k, _, _)| k * scale)
        .collect();
    Spectrum::from_energies(energies, T::lit(ANALYTIC_MERGE_TOL), Provenance::NumericFd, e_max, weyl)
}

/// All `(kx[a] + ky[b], a, b)` not exceeding `limit`, unsorted, 0-based indices.
pub(crate) fn rect_modes_below<T: Real>(kx: &[T], ky: &[T], limit: T) -> Vec<(T, usize, usize)> {
    let mut out = Vec::new();
    for (b, &vy) in ky.iter().enumerate() {
        if vy + kx[0] > limit {
            break;
        }
        for (a, &vx) in kx.iter().enumerate() {
            let k = vx + vy;
            if k > limit {
                break;
            }
            out.push((k, a, b));
        }
    }
    out
}

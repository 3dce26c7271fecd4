//! Quantum boundary layer: closed-form insertion exchanges.
//!
//! The thermal density of a confined particle is depleted within a layer of
//! thickness `delta = lambda_th / 4` from every wall. Treating the box as a
//! classical one shortened by `2 delta` reproduces the exact spectral sums
//! with high accuracy as long as each compartment is longer than its two
//! boundary layers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::{thermal_wavelength, PhysicalConstants};
use crate::cycle::{insertion_step, SpectrumSource};
use crate::error::{Error, Result};
use crate::num::{rel_diff, Real};

/// Default safety margin of the validity guard `L/2 > 2 delta (1 + margin)`.
pub const DEFAULT_VALIDITY_MARGIN: f64 = 0.1;
/// Points with `(L/2) / (2 delta)` below this are flagged as close to the
/// overlap regime.
pub const NEAR_BOUNDARY_RATIO: f64 = 2.0;

/// `delta = h / (4 sqrt(2 pi m k T))`, m.
pub fn qbl_delta<T: Real>(temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    Ok(thermal_wavelength(temperature, c)? / T::lit(4.0))
}

fn guarded_delta<T: Real>(length: T, temperature: T, margin: T, c: &PhysicalConstants<T>) -> Result<T> {
    let delta = qbl_delta(temperature, c)?;
    if !(length > T::zero()) || !length.is_finite() {
        return Err(Error::Geometry(format!("box length must be positive, got {length} m")));
    }
    let half = length / T::lit(2.0);
    if !(half > T::lit(2.0) * delta * (T::one() + margin)) {
        return Err(Error::OutOfValidity {
            half_length_m: half.to_f64_lossy(),
            two_delta_m: (T::lit(2.0) * delta).to_f64_lossy(),
        });
    }
    Ok(delta)
}

/// `W = kT ln[(L - 2 delta) / (L/2 - 2 delta)] - kT ln 2`.
pub fn insertion_work_analytic<T: Real>(length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    insertion_work_with_margin(length, temperature, T::lit(DEFAULT_VALIDITY_MARGIN), c)
}

pub fn insertion_work_with_margin<T: Real>(length: T, temperature: T, margin: T, c: &PhysicalConstants<T>) -> Result<T> {
    let d2 = T::lit(2.0) * guarded_delta(length, temperature, margin, c)?;
    let kt = c.kt(temperature);
    Ok(kt * ((length - d2) / (length / T::lit(2.0) - d2)).ln() - kt * T::LN_2())
}

/// `dU = (kT/2) [(L/2) / (L/2 - 2 delta) - L / (L - 2 delta)]`.
pub fn delta_u_insertion_analytic<T: Real>(length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    delta_u_with_margin(length, temperature, T::lit(DEFAULT_VALIDITY_MARGIN), c)
}

pub fn delta_u_with_margin<T: Real>(length: T, temperature: T, margin: T, c: &PhysicalConstants<T>) -> Result<T> {
    let d2 = T::lit(2.0) * guarded_delta(length, temperature, margin, c)?;
    let half = length / T::lit(2.0);
    Ok(c.kt(temperature) / T::lit(2.0) * (half / (half - d2) - length / (length - d2)))
}

/// `Q = dU - W`.
pub fn insertion_heat_analytic<T: Real>(length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    Ok(delta_u_insertion_analytic(length, temperature, c)? - insertion_work_analytic(length, temperature, c)?)
}

/// Analytic versus exact insertion exchanges at one `(L, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QblReport<T> {
    /// m.
    pub length: T,
    /// K.
    pub temperature: T,
    /// m.
    pub delta: T,
    /// J.
    pub work_analytic: T,
    pub delta_u_analytic: T,
    pub heat_analytic: T,
    pub work_exact: T,
    pub delta_u_exact: T,
    pub heat_exact: T,
    pub work_rel_error: T,
    pub delta_u_rel_error: T,
    pub heat_rel_error: T,
    /// `(L/2) / (2 delta)` below [`NEAR_BOUNDARY_RATIO`].
    pub near_validity_boundary: bool,
}

impl<T: Real> QblReport<T> {
    pub fn max_rel_error(&self) -> T {
        self.work_rel_error.max(self.delta_u_rel_error).max(self.heat_rel_error)
    }

    /// Two-column comparison in units of kT.
    pub fn to_text(&self, c: &PhysicalConstants<T>) -> String {
        let kt = c.kt(self.temperature).to_f64_lossy();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "L = {} nm, T = {} K, delta = {:.6} nm{}",
            self.length.to_f64_lossy() * 1e9,
            self.temperature.to_f64_lossy(),
            self.delta.to_f64_lossy() * 1e9,
            if self.near_validity_boundary { "  [near validity boundary]" } else { "" }
        );
        let _ = writeln!(out, "{:<6}{:>22}{:>22}{:>14}", "", "analytic [kT]", "exact [kT]", "rel. error");
        for (name, a, e, r) in [
            ("W", self.work_analytic, self.work_exact, self.work_rel_error),
            ("dU", self.delta_u_analytic, self.delta_u_exact, self.delta_u_rel_error),
            ("Q", self.heat_analytic, self.heat_exact, self.heat_rel_error),
        ] {
            let _ = writeln!(
                out,
                "{:<6}{:>22.15e}{:>22.15e}{:>14.3e}",
                name,
                a.to_f64_lossy() / kt,
                e.to_f64_lossy() / kt,
                r.to_f64_lossy()
            );
        }
        out
    }
}

/// Compare the boundary-layer formulas with exact 1D spectral sums.
pub fn validate_against_exact<T: Real>(length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<QblReport<T>> {
    let delta = guarded_delta(length, temperature, T::lit(DEFAULT_VALIDITY_MARGIN), c)?;
    let w = insertion_work_analytic(length, temperature, c)?;
    let du = delta_u_insertion_analytic(length, temperature, c)?;
    let q = du - w;
    let exact = insertion_step(length, temperature, SpectrumSource::Box1d, c)?;
    let floor = c.kt(temperature) * T::lit(1e-18);
    let ratio = length / T::lit(2.0) / (T::lit(2.0) * delta);
    Ok(QblReport {
        length,
        temperature,
        delta,
        work_analytic: w,
        delta_u_analytic: du,
        heat_analytic: q,
        work_exact: exact.work,
        delta_u_exact: exact.delta_u,
        heat_exact: exact.heat,
        work_rel_error: rel_diff(w, exact.work, floor),
        delta_u_rel_error: rel_diff(du, exact.delta_u, floor),
        heat_rel_error: rel_diff(q, exact.heat, floor),
        near_validity_boundary: ratio < T::lit(NEAR_BOUNDARY_RATIO),
    })
}

//! Grid eigenfunctions and the thermal probability density.

use std::io::{self, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::constants::{check_temperature, PhysicalConstants};
use crate::error::{Error, Result};
use crate::geometry::SnappedGrid;
use crate::num::{CompensatedSum, Real};

use super::{SolverStats, Spectrum, DEFAULT_TAIL_LIMIT};

/// Samples on every grid node `(i, j)`, `0 <= i < columns`, `0 <= j < rows`,
/// stored row-major (`index = j * columns + i`). Node `(i, j)` sits at
/// `(i hx, j hy)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField<T> {
    pub columns: usize,
    pub rows: usize,
    /// Spacings, m.
    pub hx: T,
    pub hy: T,
    /// Unit of the samples.
    pub unit: String,
    pub values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &SnappedGrid<T>, unit: &str) -> Self {
        Self {
            columns: grid.nx + 1,
            rows: grid.ny + 1,
            hx: grid.hx,
            hy: grid.hy,
            unit: unit.to_string(),
            values: vec![T::zero(); (grid.nx + 1) * (grid.ny + 1)],
        }
    }

    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[j * self.columns + i]
    }

    /// Riemann sum `sum f hx hy`.
    pub fn integral(&self) -> T {
        self.integral_columns(0..self.columns)
    }

    /// Riemann sum restricted to node columns in `range`.
    pub fn integral_columns(&self, range: Range<usize>) -> T {
        let mut s = CompensatedSum::new();
        for j in 0..self.rows {
            for i in range.clone() {
                s.add(self.values[j * self.columns + i]);
            }
        }
        s.value() * self.hx * self.hy
    }

    /// Values on the outer boundary nodes.
    pub fn boundary_values(&self) -> impl Iterator<Item = T> + '_ {
        let (nc, nr) = (self.columns, self.rows);
        (0..nr)
            .flat_map(move |j| (0..nc).map(move |i| (i, j)))
            .filter(move |&(i, j)| i == 0 || j == 0 || i + 1 == nc || j + 1 == nr)
            .map(move |(i, j)| self.value(i, j))
    }

    /// CSV with header `x_nm,y_nm,density_per_nm2`, 9 significant digits.
    /// Samples are converted from 1/m^2 to 1/nm^2.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x_nm,y_nm,density_per_nm2")?;
        let hx = self.hx.to_f64_lossy() * 1e9;
        let hy = self.hy.to_f64_lossy() * 1e9;
        for j in 0..self.rows {
            for i in 0..self.columns {
                let v = self.value(i, j).to_f64_lossy() * 1e-18;
                writeln!(w, "{},{},{}", sig9(i as f64 * hx), sig9(j as f64 * hy), sig9(v))?;
            }
        }
        Ok(())
    }
}

fn sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    format!("{v:.8e}")
}

/// Spectrum plus one normalized grid eigenfunction per state.
#[derive(Clone, Debug)]
pub struct EigenBasis<T> {
    spectrum: Spectrum<T>,
    grid: SnappedGrid<T>,
    /// `(energy J, interior samples)`; samples are row-major over the
    /// `(nx - 1) x (ny - 1)` interior nodes.
    states: Vec<(T, Vec<T>)>,
    stats: SolverStats,
}

impl<T: Real> EigenBasis<T> {
    pub fn new(spectrum: Spectrum<T>, grid: SnappedGrid<T>, states: Vec<(T, Vec<T>)>, stats: SolverStats) -> Result<Self> {
        if states.len() != spectrum.state_count() {
            return Err(Error::Invariant {
                name: "basis-size".into(),
                detail: format!("{} eigenfunctions for {} states", states.len(), spectrum.state_count()),
            });
        }
        let cell = grid.hx * grid.hy;
        let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-10) } else { T::lit(1e-4) };
        for (n, (_, u)) in states.iter().enumerate() {
            if u.len() != grid.interior_nodes() {
                return Err(Error::Invariant {
                    name: "basis-shape".into(),
                    detail: format!("state {n} has {} samples", u.len()),
                });
            }
            let norm = u.iter().fold(T::zero(), |acc, &v| acc + v * v) * cell;
            if !((norm - T::one()).abs() < tol) {
                return Err(Error::Invariant {
                    name: "basis-norm".into(),
                    detail: format!("state {n} has norm {norm}"),
                });
            }
        }
        Ok(Self {
            spectrum,
            grid,
            states,
            stats,
        })
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn grid(&self) -> &SnappedGrid<T> {
        &self.grid
    }

    pub fn states(&self) -> &[(T, Vec<T>)] {
        &self.states
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Eigenfunction `n` on all nodes, zero on the border.
    pub fn eigenfunction(&self, n: usize) -> ScalarField<T> {
        let mut f = ScalarField::zeros(&self.grid, "1/m");
        self.scatter(&self.states[n].1, &mut f.values, |v| v);
        f
    }

    fn scatter(&self, interior: &[T], out: &mut [T], map: impl Fn(T) -> T) {
        let na = self.grid.nx - 1;
        let cols = self.grid.nx + 1;
        for (j, row) in interior.chunks(na).enumerate() {
            for (i, &v) in row.iter().enumerate() {
                out[(j + 1) * cols + i + 1] = map(v);
            }
        }
    }
}

/// `n(r) = Z^-1 sum_n e^{-beta E_n} |psi_n(r)|^2`, in 1/m^2.
pub fn density_map<T: Real>(basis: &EigenBasis<T>, temperature: T, c: &PhysicalConstants<T>) -> Result<ScalarField<T>> {
    check_temperature(temperature)?;
    basis.spectrum.check_truncation(temperature, T::lit(DEFAULT_TAIL_LIMIT), c)?;
    let beta = T::one() / c.kt(temperature);
    let e0 = basis.spectrum.ground();
    let weights: Vec<T> = basis.states.iter().map(|(e, _)| (-beta * (*e - e0)).exp()).collect();
    let z: CompensatedSum<T> = weights.iter().copied().collect();
    let z = z.value();
    let n = basis.grid.interior_nodes();
    let mut acc = vec![T::zero(); n];
    for ((_, u), &w) in basis.states.iter().zip(&weights) {
        let w = w / z;
        for (a, &v) in acc.iter_mut().zip(u) {
            *a = *a + w * v * v;
        }
    }
    let mut field = ScalarField::zeros(&basis.grid, "1/m^2");
    basis.scatter(&acc, &mut field.values, |v| v);
    for &j in &basis.grid.partition_rows().collect::<Vec<_>>() {
        if basis.grid.depth_nodes > 0 {
            field.values[j * field.columns + basis.grid.column] = T::zero();
        }
    }
    let total = field.integral();
    let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-6) } else { T::lit(1e-3) };
    if !((total - T::one()).abs() <= tol) || field.values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::Invariant {
            name: "density-normalization".into(),
            detail: format!("density integrates to {total}"),
        });
    }
    Ok(field)
}

//! Box geometry, partition placement and the finite-difference grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Where the particle is allowed to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Occupancy {
    /// Whole box, partition (if any) penetrating to depth `d`.
    FullBox,
    /// Fully inserted partition, particle in both compartments.
    SuperposedHalves,
    LocalizedLeft,
    LocalizedRight,
}

/// Rectangular container with a zero-thickness partition entering from the
/// top wall (`y = Ly`) at lateral position `l` to depth `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry<T> {
    /// Length along the expansion axis, m.
    pub lx: T,
    /// Height, m.
    pub ly: T,
    /// Penetration depth of the partition, m.
    pub depth: T,
    /// Lateral position of the partition, m.
    pub position: T,
    pub occupancy: Occupancy,
}

impl<T: Real> Geometry<T> {
    /// Empty box; the partition sits at the centre with zero depth.
    pub fn empty_box(lx: T, ly: T) -> Result<Self> {
        Self::new(lx, ly, T::zero(), lx / T::lit(2.0), Occupancy::FullBox)
    }

    pub fn new(lx: T, ly: T, depth: T, position: T, occupancy: Occupancy) -> Result<Self> {
        let g = Self {
            lx,
            ly,
            depth,
            position,
            occupancy,
        };
        g.validate()?;
        Ok(g)
    }

    /// Same box with a different partition depth.
    pub fn with_depth(&self, depth: T) -> Result<Self> {
        Self::new(self.lx, self.ly, depth, self.position, self.occupancy)
    }

    pub fn with_position(&self, position: T) -> Result<Self> {
        Self::new(self.lx, self.ly, self.depth, position, self.occupancy)
    }

    pub fn with_occupancy(&self, occupancy: Occupancy) -> Result<Self> {
        Self::new(self.lx, self.ly, self.depth, self.position, occupancy)
    }

    pub fn fully_divided(&self) -> bool {
        (self.depth - self.ly).abs() <= T::lit(1e-12) * self.ly
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        if !ok(self.lx) || !ok(self.ly) {
            return Err(Error::Geometry(format!(
                "box sides must be positive, got {} x {} m",
                self.lx, self.ly
            )));
        }
        if !(self.depth >= T::zero() && self.depth <= self.ly) {
            return Err(Error::Geometry(format!(
                "partition depth {} m outside [0, {}]",
                self.depth, self.ly
            )));
        }
        if !(self.position > T::zero() && self.position < self.lx) {
            return Err(Error::Geometry(format!(
                "partition position {} m outside (0, {})",
                self.position, self.lx
            )));
        }
        if self.occupancy != Occupancy::FullBox && !self.fully_divided() {
            return Err(Error::Geometry(format!(
                "{:?} requires a fully inserted partition (d = Ly)",
                self.occupancy
            )));
        }
        Ok(())
    }
}

/// Requested grid spacings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub hx: T,
    pub hy: T,
}

impl<T: Real> GridSpec<T> {
    pub fn uniform(h: T) -> Result<Self> {
        Self::new(h, h)
    }

    pub fn new(hx: T, hy: T) -> Result<Self> {
        if !(hx > T::zero() && hy > T::zero()) || !hx.is_finite() || !hy.is_finite() {
            return Err(Error::Geometry(format!("grid spacings must be positive, got {hx}, {hy}")));
        }
        Ok(Self { hx, hy })
    }

    /// 0.05 nm in both directions.
    pub fn default_spacing() -> Self {
        Self {
            hx: T::lit(0.05e-9),
            hy: T::lit(0.05e-9),
        }
    }

    /// Fit the grid to a geometry and snap the partition onto a grid line.
    pub fn snap(&self, g: &Geometry<T>) -> Result<SnappedGrid<T>> {
        g.validate()?;
        let nx = (g.lx / self.hx).round().to_usize().unwrap_or(0);
        let ny = (g.ly / self.hy).round().to_usize().unwrap_or(0);
        if nx < 2 || ny < 2 {
            return Err(Error::Geometry(format!(
                "grid {} x {} m too coarse for a {} x {} m box",
                self.hx, self.hy, g.lx, g.ly
            )));
        }
        let hx = g.lx / T::from_usize_lossy(nx);
        let hy = g.ly / T::from_usize_lossy(ny);
        let column = (g.position / hx).round().to_usize().unwrap_or(0).clamp(1, nx - 1);
        let depth_nodes = (g.depth / hy).round().to_usize().unwrap_or(0).min(ny);
        let snapped = SnappedGrid {
            nx,
            ny,
            hx,
            hy,
            column,
            depth_nodes,
        };
        let has_partition = depth_nodes > 0 || g.occupancy != Occupancy::FullBox;
        if has_partition && (column < 4 || nx - column < 4) {
            return Err(Error::Geometry(format!(
                "partition at x = {} m leaves fewer than 3 grid nodes on one side",
                snapped.position()
            )));
        }
        Ok(snapped)
    }
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self::default_spacing()
    }
}

/// Grid fitted to a box, with the partition snapped to node indices.
///
/// Nodes are `(i, j)` with `0 <= i <= nx`, `0 <= j <= ny`; the border is
/// Dirichlet. The partition occupies column `i = column` for rows
/// `j >= ny - depth_nodes`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnappedGrid<T> {
    /// Number of intervals along x.
    pub nx: usize,
    pub ny: usize,
    /// Effective spacings `lx / nx`, `ly / ny`.
    pub hx: T,
    pub hy: T,
    pub column: usize,
    pub depth_nodes: usize,
}

impl<T: Real> SnappedGrid<T> {
    pub fn position(&self) -> T {
        T::from_usize_lossy(self.column) * self.hx
    }

    pub fn depth(&self) -> T {
        T::from_usize_lossy(self.depth_nodes) * self.hy
    }

    pub fn lx(&self) -> T {
        T::from_usize_lossy(self.nx) * self.hx
    }

    pub fn ly(&self) -> T {
        T::from_usize_lossy(self.ny) * self.hy
    }

    /// Interior partition nodes (row indices, ascending).
    pub fn partition_rows(&self) -> std::ops::Range<usize> {
        let first = (self.ny - self.depth_nodes.min(self.ny)).max(1);
        first..self.ny
    }

    /// True when the partition cuts every interior row.
    pub fn divides(&self) -> bool {
        self.partition_rows().len() == self.ny - 1
    }

    pub fn interior_nodes(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }
}

//! Eigenpairs of the 5-point Dirichlet Laplacian on a rectangle with a
//! zero-thickness partition.
//!
//! The partition is a set `K` of interior nodes on one grid column that are
//! forced to zero. Writing `H0` for the rectangle operator (diagonalized in
//! closed form by sine modes) and `H_c` for the operator with the `K` nodes
//! removed, Haynsworth inertia additivity gives for any `E` that is not an
//! eigenvalue of either operator
//!
//! ```text
//! #{eig(H_c) < E} = #{eig(H0) < E} - neg( P_K (H0 - E)^{-1} P_K^T )
//! ```
//!
//! where the right-hand matrix is only `|K| x |K|` and is assembled from the
//! rectangle modes in `O(|K|^2 Ny)` work. Rectangle modes that vanish on the
//! whole partition column are exact eigenpairs of `H_c` and are taken
//! directly; the remaining eigenvalues are bracketed by bisection on the
//! count and polished with Brent's method on the determinant of the same
//! matrix, bordered with the rectangle modes that lie inside the bracket so
//! that it has no poles there.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::geometry::{Geometry, GridSpec, Occupancy, SnappedGrid};
use crate::linalg::{brent, BunchKaufman, DstI, SymMatrix};
use crate::num::Real;

use super::fd::{rect_modes_below, Chain};
use super::field::EigenBasis;
use super::{Cutoff, Provenance, Spectrum, WeylMeasure, NUMERIC_MERGE_TOL};

/// Rectangle modes within this relative distance of the evaluation point are
/// moved into the bordered block.
const POLE_WINDOW: f64 = 1e-7;
/// Brackets narrower than this (relative) holding several roots are reported
/// as one degenerate level.
const CLUSTER_WIDTH: f64 = 1e-13;
/// Polish only once a bracket contains at most this many rectangle poles.
const MAX_BORDER: usize = 6;
const MAX_COUNT_EVALUATIONS: usize = 2_000_000;

/// Work counters of one solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub partition_nodes: usize,
    pub count_evaluations: usize,
    pub polish_iterations: usize,
    /// Degenerate clusters resolved by bisection alone.
    pub clusters: usize,
    pub eigenvalues: usize,
}

/// Spectrum of a partitioned box plus the grid it was computed on.
#[derive(Clone, Debug)]
pub struct PartitionedSpectrum<T> {
    pub spectrum: Spectrum<T>,
    pub grid: SnappedGrid<T>,
    pub stats: SolverStats,
}

/// One eigenvalue (in 1/m^2) with its multiplicity and origin.
#[derive(Clone, Copy, Debug)]
enum Root<T> {
    /// Rectangle mode vanishing on the partition column (0-based a, b).
    Nodal { kappa: T, a: usize, b: usize },
    /// Eigenvalue of the coupled problem.
    Coupled { kappa: T, multiplicity: usize },
}

impl<T: Real> Root<T> {
    fn kappa(&self) -> T {
        match *self {
            Root::Nodal { kappa, .. } | Root::Coupled { kappa, .. } => kappa,
        }
    }
}

struct SlitOperator<T: Real> {
    x: Chain<T>,
    y: Chain<T>,
    column: usize,
    /// Partition rows (1-based).
    rows: Vec<usize>,
    kx: Vec<T>,
    ky: Vec<T>,
    /// `phi_a(column)` for each x mode.
    phi_p: Vec<T>,
    /// x modes with nonzero amplitude on the partition column.
    coupled_a: Vec<usize>,
    /// `psi_b(row)` for each partition row, row-major `[r * nb + b]`.
    psi: Vec<T>,
    /// Coupled rectangle modes `(kappa, a, b)` below `mode_limit`, ascending.
    coupled_modes: Vec<(T, usize, usize)>,
    nodal_modes: Vec<(T, usize, usize)>,
    mode_limit: T,
    /// `cos(pi m / Ny)` for `m < 2 Ny`.
    cos_table: Vec<T>,
    stats: SolverStats,
}

impl<T: Real> SlitOperator<T> {
    fn new(grid: &SnappedGrid<T>) -> Self {
        let x = Chain::new(grid.nx, grid.hx);
        let y = Chain::new(grid.ny, grid.hy);
        let rows: Vec<usize> = grid.partition_rows().collect();
        let kx = x.eigenvalues();
        let ky = y.eigenvalues();
        let phi_p: Vec<T> = (1..grid.nx).map(|a| x.mode(a, grid.column)).collect();
        let coupled_a = (0..phi_p.len()).filter(|&a| phi_p[a] != T::zero()).collect();
        let nb = ky.len();
        let mut psi = vec![T::zero(); rows.len() * nb];
        for (r, &j) in rows.iter().enumerate() {
            for b in 0..nb {
                psi[r * nb + b] = y.mode(b + 1, j);
            }
        }
        let stats = SolverStats {
            partition_nodes: rows.len(),
            ..Default::default()
        };
        Self {
            x,
            y,
            column: grid.column,
            rows,
            kx,
            ky,
            phi_p,
            coupled_a,
            psi,
            coupled_modes: Vec::new(),
            nodal_modes: Vec::new(),
            mode_limit: T::zero(),
            cos_table: (0..2 * grid.ny)
                .map(|m| (T::from_usize_lossy(m) * T::PI() / T::from_usize_lossy(grid.ny)).cos())
                .collect(),
            stats,
        }
    }

    fn ensure_modes(&mut self, limit: T) {
        if limit <= self.mode_limit {
            return;
        }
        let limit = limit * T::lit(1.0 + 1e-6);
        let mut modes = rect_modes_below(&self.kx, &self.ky, limit);
        modes.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
        let (nodal, coupled): (Vec<_>, Vec<_>) = modes.into_iter().partition(|&(_, a, _)| self.phi_p[a] == T::zero());
        self.coupled_modes = coupled;
        self.nodal_modes = nodal;
        self.mode_limit = limit;
    }

    fn coupled_below(&self, kappa: T) -> usize {
        self.coupled_modes.partition_point(|m| m.0 < kappa)
    }

    fn coupled_in(&self, lo: T, hi: T) -> &[(T, usize, usize)] {
        let start = self.coupled_modes.partition_point(|m| m.0 < lo);
        let end = self.coupled_modes.partition_point(|m| m.0 <= hi);
        &self.coupled_modes[start..end.max(start)]
    }

    /// `[[k P_K (H0 - k)^+ P_K^T, Y], [Y^T, (k - k_R) / k]]`, with the modes in
    /// `border` excluded from the pseudo-inverse and placed in the border.
    fn bordered(&self, kappa: T, border: &[(T, usize, usize)]) -> SymMatrix<T> {
        let q = self.rows.len();
        let nb = self.ky.len();
        let n = q + border.len();
        let mut g = vec![T::zero(); nb];
        for (b, gb) in g.iter_mut().enumerate() {
            let shift = self.ky[b] - kappa;
            let mut s = T::zero();
            for &a in &self.coupled_a {
                let p = self.phi_p[a];
                s = s + p * p / (self.kx[a] + shift);
            }
            *gb = s;
        }
        // columns touched by the border are recomputed without those terms
        // rather than subtracted, which would cancel near the pole
        for &(_, _, b0) in border {
            let shift = self.ky[b0] - kappa;
            let mut s = T::zero();
            for &a in &self.coupled_a {
                if border.iter().any(|&(_, aa, bb)| bb == b0 && aa == a) {
                    continue;
                }
                let p = self.phi_p[a];
                s = s + p * p / (self.kx[a] + shift);
            }
            g[b0] = s;
        }
        // Congruence with diag(sqrt(k), 1/sqrt(k)) brings both blocks to
        // order one; inertia and the sign of det are unchanged.
        for gb in g.iter_mut() {
            *gb = *gb * kappa;
        }
        let mut m = SymMatrix::zeros(n);
        if q * q < 4 * nb {
            let mut pg = vec![T::zero(); nb];
            for r1 in 0..q {
                let row1 = &self.psi[r1 * nb..(r1 + 1) * nb];
                for b in 0..nb {
                    pg[b] = row1[b] * g[b];
                }
                for r2 in 0..=r1 {
                    let row2 = &self.psi[r2 * nb..(r2 + 1) * nb];
                    m.set(r1, r2, pg.iter().zip(row2).fold(T::zero(), |acc, (&u, &w)| acc + u * w));
                }
            }
        } else {
            // sum_b psi_b(j) psi_b(j') g_b = (c(j - j') - c(j + j')) / Ny with
            // c(m) = sum_b g_b cos(b pi m / Ny): Toeplitz plus Hankel
            let period = self.cos_table.len();
            let cm: Vec<T> = (0..period)
                .map(|m| {
                    let mut idx = 0;
                    let mut acc = T::zero();
                    for &gb in &g {
                        idx += m;
                        if idx >= period {
                            idx -= period;
                        }
                        acc = acc + gb * self.cos_table[idx];
                    }
                    acc
                })
                .collect();
            let ny = T::from_usize_lossy(period / 2);
            for (r1, &j1) in self.rows.iter().enumerate() {
                for (r2, &j2) in self.rows.iter().enumerate().take(r1 + 1) {
                    m.set(r1, r2, (cm[j1 - j2] - cm[j1 + j2]) / ny);
                }
            }
        }
        for (k, &(km, a, b)) in border.iter().enumerate() {
            for r in 0..q {
                m.set(r, q + k, self.phi_p[a] * self.psi[r * nb + b]);
            }
            m.set(q + k, q + k, (kappa - km) / kappa);
        }
        m
    }

    /// Number of coupled eigenvalues below `kappa`.
    fn count(&mut self, kappa: T) -> Result<usize> {
        self.stats.count_evaluations += 1;
        if self.stats.count_evaluations > MAX_COUNT_EVALUATIONS {
            return Err(Error::Solver {
                iterations: self.stats.count_evaluations,
                detail: "count evaluation budget exhausted".into(),
            });
        }
        self.ensure_modes(kappa);
        let w = kappa * T::lit(POLE_WINDOW);
        let border: Vec<_> = self.coupled_in(kappa - w, kappa + w).to_vec();
        let above = border.iter().filter(|m| m.0 > kappa).count();
        let neg = BunchKaufman::factor(&self.bordered(kappa, &border)).inertia().negative;
        let n = (self.coupled_below(kappa) + above) as isize - neg as isize;
        if n < 0 {
            return Err(Error::Solver {
                iterations: self.stats.count_evaluations,
                detail: format!("negative eigenvalue count at {kappa}"),
            });
        }
        Ok(n as usize)
    }

    /// Lowest eigenvalue of the partitioned operator (either sector).
    fn ground(&mut self) -> Result<T> {
        let k0 = self.kx[0] + self.ky[0];
        self.ensure_modes(k0 * T::lit(4.0));
        let lo = k0 * T::lit(0.5);
        let mut hi = k0 * T::lit(2.0);
        let mut c_hi = self.count(hi)?;
        while c_hi == 0 {
            hi = hi * T::lit(2.0);
            c_hi = self.count(hi)?;
        }
        let first = self.isolate(lo, hi, 0, c_hi, true)?;
        let coupled = first.first().map(|r| r.kappa()).unwrap_or_else(T::infinity);
        let nodal = self.nodal_modes.first().map(|m| m.0).unwrap_or_else(T::infinity);
        Ok(coupled.min(nodal))
    }

    /// All coupled roots in `(lo, hi)`; with `first_only`, just the lowest.
    fn isolate(&mut self, lo: T, hi: T, c_lo: usize, c_hi: usize, first_only: bool) -> Result<Vec<Root<T>>> {
        let mut roots = Vec::new();
        let mut stack = vec![(lo, hi, c_lo, c_hi)];
        while let Some((lo, hi, c_lo, c_hi)) = stack.pop() {
            let n = c_hi - c_lo;
            if n == 0 {
                continue;
            }
            let poles = self.coupled_in(lo, hi).len();
            if n == 1 && poles <= MAX_BORDER {
                roots.push(self.polish(lo, hi, c_lo)?);
            } else if hi - lo <= T::lit(CLUSTER_WIDTH) * hi {
                self.stats.clusters += 1;
                roots.push(Root::Coupled {
                    kappa: (lo + hi) / T::lit(2.0),
                    multiplicity: n,
                });
            } else {
                let mid = (lo + hi) / T::lit(2.0);
                let c_mid = self.count(mid)?;
                if c_mid < c_lo || c_mid > c_hi {
                    return Err(Error::Solver {
                        iterations: self.stats.count_evaluations,
                        detail: format!("non-monotone count {c_lo} <= {c_mid} <= {c_hi} violated"),
                    });
                }
                if first_only {
                    if c_mid > c_lo {
                        stack.push((lo, mid, c_lo, c_mid));
                    } else {
                        stack.push((mid, hi, c_mid, c_hi));
                    }
                } else {
                    // upper half first so that the lower half pops first
                    stack.push((mid, hi, c_mid, c_hi));
                    stack.push((lo, mid, c_lo, c_mid));
                }
            }
            if first_only && !roots.is_empty() {
                break;
            }
        }
        Ok(roots)
    }

    /// Single simple root in `(lo, hi)`.
    fn polish(&mut self, lo: T, hi: T, c_lo: usize) -> Result<Root<T>> {
        let margin = hi * T::lit(1e-9);
        let border: Vec<_> = self.coupled_in(lo - margin, hi + margin).to_vec();
        let mut reference: Option<T> = None;
        let mut evals = 0usize;
        let found = {
            let f = |k: T| {
                evals += 1;
                let (sign, log) = BunchKaufman::factor(&self.bordered(k, &border)).log_det();
                let r = *reference.get_or_insert(log);
                let limit = T::max_value().ln() - T::lit(2.0);
                sign * (log - r).max(-limit).min(limit).exp()
            };
            brent(f, lo, hi, T::lit(4.0) * T::epsilon(), 200)
        };
        self.stats.polish_iterations += evals;
        if let Some((kappa, _)) = found {
            return Ok(Root::Coupled { kappa, multiplicity: 1 });
        }
        // Rounding hid the sign change; fall back to bisection on the count.
        let (mut lo, mut hi) = (lo, hi);
        while hi - lo > T::lit(CLUSTER_WIDTH) * hi {
            let mid = (lo + hi) / T::lit(2.0);
            if self.count(mid)? > c_lo {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Root::Coupled {
            kappa: (lo + hi) / T::lit(2.0),
            multiplicity: 1,
        })
    }

    /// All eigenvalues up to `limit`.
    fn roots_below(&mut self, limit: T) -> Result<Vec<Root<T>>> {
        self.ensure_modes(limit);
        let lo = (self.kx[0] + self.ky[0]) * T::lit(0.5);
        let c_hi = self.count(limit)?;
        let mut roots = self.isolate(lo, limit, 0, c_hi, false)?;
        roots.extend(
            self.nodal_modes
                .iter()
                .filter(|m| m.0 <= limit)
                .map(|&(kappa, a, b)| Root::Nodal { kappa, a, b }),
        );
        roots.sort_by(|p, q| p.kappa().partial_cmp(&q.kappa()).expect("finite"));
        self.stats.eigenvalues = roots
            .iter()
            .map(|r| match r {
                Root::Nodal { .. } => 1,
                Root::Coupled { multiplicity, .. } => *multiplicity,
            })
            .sum();
        Ok(roots)
    }

    /// Orthonormal eigenvectors (plain node sum) for a coupled root, on the
    /// interior grid `(nx-1) x (ny-1)` stored row-major by `j`.
    fn coupled_vectors(&self, kappa: T, multiplicity: usize, dst: &Transforms<T>) -> Vec<Vec<T>> {
        let w = kappa * T::lit(1e-9);
        let border: Vec<_> = self.coupled_in(kappa - w, kappa + w).to_vec();
        let b = self.bordered(kappa, &border);
        let bk = BunchKaufman::factor(&b);
        let n = b.dim();
        let mut basis: Vec<Vec<T>> = (0..multiplicity)
            .map(|s| {
                (0..n)
                    .map(|i| T::lit(((i * 7919 + s * 104_729 + 17) % 1013) as f64 / 1013.0 - 0.5))
                    .collect()
            })
            .collect();
        for _ in 0..3 {
            for v in basis.iter_mut() {
                *v = bk.solve(v);
            }
            orthonormalize(&mut basis);
        }
        let q = self.rows.len();
        let mut vectors: Vec<Vec<T>> = basis
            .iter()
            .map(|v| {
                // undo the congruence scaling: c / f picks up a factor 1/k
                let c: Vec<T> = v[q..].iter().map(|&x| x / kappa).collect();
                self.reconstruct(kappa, &v[..q], &border, &c, dst)
            })
            .collect();
        orthonormalize(&mut vectors);
        vectors
    }

    /// `u = (H0 - k)^+ P_K^T f + V_R c`, evaluated through sine transforms.
    fn reconstruct(&self, kappa: T, f: &[T], border: &[(T, usize, usize)], c: &[T], dst: &Transforms<T>) -> Vec<T> {
        let na = self.kx.len();
        let nb = self.ky.len();
        let mut wb = vec![T::zero(); nb];
        for (r, &fr) in f.iter().enumerate() {
            for b in 0..nb {
                wb[b] = wb[b] + self.psi[r * nb + b] * fr;
            }
        }
        // coefficients C[b][a]
        let mut coef = vec![T::zero(); na * nb];
        for b in 0..nb {
            for &a in &self.coupled_a {
                coef[b * na + a] = self.phi_p[a] * wb[b] / (self.kx[a] + self.ky[b] - kappa);
            }
        }
        for (k, &(_, a, b)) in border.iter().enumerate() {
            coef[b * na + a] = c[k];
        }
        let mut u = dst.synthesize(coef);
        for &j in &self.rows {
            u[(j - 1) * na + self.column - 1] = T::zero();
        }
        u
    }

    fn nodal_vector(&self, a: usize, b: usize) -> Vec<T> {
        let na = self.kx.len();
        let nb = self.ky.len();
        let mut u = vec![T::zero(); na * nb];
        for j in 0..nb {
            let yj = self.y.mode(b + 1, j + 1);
            for i in 0..na {
                u[j * na + i] = self.x.mode(a + 1, i + 1) * yj;
            }
        }
        u
    }
}

fn orthonormalize<T: Real>(vs: &mut [Vec<T>]) {
    for i in 0..vs.len() {
        for j in 0..i {
            let (head, tail) = vs.split_at_mut(i);
            let d = dot(&head[j], &tail[0]);
            for (x, &y) in tail[0].iter_mut().zip(&head[j]) {
                *x = *x - d * y;
            }
        }
        let norm = dot(&vs[i], &vs[i]).sqrt();
        if norm > T::zero() {
            for x in vs[i].iter_mut() {
                *x = *x / norm;
            }
        }
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// 2D inverse sine transform from mode coefficients to node values.
struct Transforms<T: Real> {
    x: DstI<T>,
    y: DstI<T>,
    scale: T,
}

impl<T: Real> Transforms<T> {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let x = DstI::new(nx, &mut planner);
        let y = DstI::new(ny, &mut planner);
        let scale = (T::lit(2.0) / T::from_usize_lossy(nx)).sqrt() * (T::lit(2.0) / T::from_usize_lossy(ny)).sqrt();
        Self { x, y, scale }
    }

    /// `coef[b * na + a]` -> `u[j * na + i]`.
    fn synthesize(&self, mut coef: Vec<T>) -> Vec<T> {
        let na = self.x.len();
        let nb = self.y.len();
        let mut scratch = Vec::new();
        for row in coef.chunks_mut(na) {
            self.x.apply(row, &mut scratch);
        }
        let mut col = vec![T::zero(); nb];
        for i in 0..na {
            for b in 0..nb {
                col[b] = coef[b * na + i];
            }
            self.y.apply(&mut col, &mut scratch);
            for j in 0..nb {
                coef[j * na + i] = col[j] * self.scale;
            }
        }
        coef
    }
}

/// Subdomain actually solved for a given occupancy.
enum Domain<T> {
    /// Whole box with the partition column `K`.
    Slit(SnappedGrid<T>),
    /// Independent full-height rectangles `(offset, width)` in cells; used
    /// when the partition separates the box.
    Compartments { grid: SnappedGrid<T>, parts: Vec<(usize, usize)> },
}

fn domain<T: Real>(g: &Geometry<T>, grid: &GridSpec<T>) -> Result<Domain<T>> {
    let s = grid.snap(g)?;
    let left = (0, s.column);
    let right = (s.column, s.nx - s.column);
    Ok(match g.occupancy {
        Occupancy::FullBox if !s.divides() => Domain::Slit(s),
        Occupancy::FullBox | Occupancy::SuperposedHalves => Domain::Compartments {
            grid: SnappedGrid { depth_nodes: s.ny, ..s },
            parts: vec![left, right],
        },
        Occupancy::LocalizedLeft => Domain::Compartments { grid: s, parts: vec![left] },
        Occupancy::LocalizedRight => Domain::Compartments { grid: s, parts: vec![right] },
    })
}

/// Modes `(kappa, part, a, b)` of the separated rectangles, ascending.
type PartModes<T> = Vec<(T, usize, usize, usize)>;

fn compartment_modes<T: Real>(
    parts: &[(usize, usize)],
    grid: &SnappedGrid<T>,
    cutoff: Cutoff<T>,
    c: &PhysicalConstants<T>,
) -> Result<(PartModes<T>, T, WeylMeasure<T>)> {
    let scale = c.kinetic_scale();
    let y = Chain::new(grid.ny, grid.hy);
    let ky = y.eigenvalues();
    let xs: Vec<Vec<T>> = parts.iter().map(|&(_, w)| Chain::new(w, grid.hx).eigenvalues()).collect();
    let ground = xs.iter().map(|kx| kx[0] + ky[0]).fold(T::infinity(), T::min);
    let cells: usize = parts.iter().map(|p| p.1).sum();
    let weyl = WeylMeasure::Area(T::from_usize_lossy(cells) * grid.hx * y.length());
    let e_max = cutoff.resolve(scale * ground, weyl, c)?;
    let mut modes: PartModes<T> = Vec::new();
    for (p, kx) in xs.iter().enumerate() {
        modes.extend(rect_modes_below(kx, &ky, e_max / scale).into_iter().map(|(k, a, b)| (k, p, a, b)));
    }
    modes.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
    Ok((modes, e_max, weyl))
}

/// Spectrum of the partitioned box (eigenvalues only).
pub fn partitioned_spectrum<T: Real>(
    g: &Geometry<T>,
    grid: &GridSpec<T>,
    cutoff: Cutoff<T>,
    c: &PhysicalConstants<T>,
) -> Result<PartitionedSpectrum<T>> {
    let scale = c.kinetic_scale();
    let (s, energies, e_max, weyl, stats) = match domain(g, grid)? {
        Domain::Compartments { grid: s, parts } => {
            let (modes, e_max, weyl) = compartment_modes(&parts, &s, cutoff, c)?;
            let stats = SolverStats {
                eigenvalues: modes.len(),
                ..Default::default()
            };
            (s, modes.iter().map(|m| m.0 * scale).collect(), e_max, weyl, stats)
        }
        Domain::Slit(s) => {
            let sol = slit_roots(&s, cutoff, c)?;
            let energies = sol
                .roots
                .iter()
                .flat_map(|r| match *r {
                    Root::Nodal { kappa, .. } => vec![kappa * scale],
                    Root::Coupled { kappa, multiplicity } => vec![kappa * scale; multiplicity],
                })
                .collect();
            (s, energies, sol.e_max, sol.weyl, sol.op.stats)
        }
    };
    let spectrum = Spectrum::from_energies(energies, T::lit(NUMERIC_MERGE_TOL), Provenance::NumericFd, e_max, weyl)?;
    Ok(PartitionedSpectrum { spectrum, grid: s, stats })
}

struct SlitSolution<T: Real> {
    op: SlitOperator<T>,
    roots: Vec<Root<T>>,
    e_max: T,
    weyl: WeylMeasure<T>,
}

fn slit_roots<T: Real>(s: &SnappedGrid<T>, cutoff: Cutoff<T>, c: &PhysicalConstants<T>) -> Result<SlitSolution<T>> {
    let scale = c.kinetic_scale();
    let weyl = WeylMeasure::Area(s.lx() * s.ly());
    let mut op = SlitOperator::new(s);
    if op.rows.is_empty() {
        // no partition nodes: the rectangle itself
        let e_max = cutoff.resolve(scale * (op.kx[0] + op.ky[0]), weyl, c)?;
        op.ensure_modes(e_max / scale);
        let mut roots: Vec<Root<T>> = op
            .coupled_modes
            .iter()
            .chain(&op.nodal_modes)
            .filter(|m| m.0 * scale <= e_max)
            .map(|&(kappa, a, b)| Root::Nodal { kappa, a, b })
            .collect();
        roots.sort_by(|p, q| p.kappa().partial_cmp(&q.kappa()).expect("finite"));
        op.stats.eigenvalues = roots.len();
        return Ok(SlitSolution { op, roots, e_max, weyl });
    }
    let ground = op.ground()?;
    let e_max = cutoff.resolve(ground * scale, weyl, c)?;
    let roots = op.roots_below(e_max / scale)?;
    Ok(SlitSolution { op, roots, e_max, weyl })
}

/// Eigenvalues and normalized grid eigenfunctions of the partitioned box.
///
/// Eigenfunctions are normalized to `sum |psi|^2 hx hy = 1` and are exactly
/// zero on the border and on every partition node.
pub fn solve_partitioned_2d<T: Real>(
    g: &Geometry<T>,
    grid: &GridSpec<T>,
    cutoff: Cutoff<T>,
    c: &PhysicalConstants<T>,
) -> Result<EigenBasis<T>> {
    let scale = c.kinetic_scale();
    let (s, mut states, e_max, weyl, stats) = match domain(g, grid)? {
        Domain::Compartments { grid: s, parts } => {
            let (modes, e_max, weyl) = compartment_modes(&parts, &s, cutoff, c)?;
            let y = Chain::new(s.ny, s.hy);
            let na = s.nx - 1;
            let states: Vec<(T, Vec<T>)> = modes
                .iter()
                .map(|&(kappa, p, a, b)| {
                    let (offset, width) = parts[p];
                    let x = Chain::new(width, s.hx);
                    let mut u = vec![T::zero(); na * (s.ny - 1)];
                    for j in 1..s.ny {
                        for i in 1..width {
                            u[(j - 1) * na + offset + i - 1] = x.mode(a + 1, i) * y.mode(b + 1, j);
                        }
                    }
                    (kappa * scale, u)
                })
                .collect();
            let stats = SolverStats {
                eigenvalues: states.len(),
                ..Default::default()
            };
            (s, states, e_max, weyl, stats)
        }
        Domain::Slit(s) => {
            let sol = slit_roots(&s, cutoff, c)?;
            let dst = Transforms::new(s.nx, s.ny);
            let mut states = Vec::new();
            for r in &sol.roots {
                match *r {
                    Root::Nodal { kappa, a, b } => states.push((kappa * scale, sol.op.nodal_vector(a, b))),
                    Root::Coupled { kappa, multiplicity } => {
                        for u in sol.op.coupled_vectors(kappa, multiplicity, &dst) {
                            states.push((kappa * scale, u));
                        }
                    }
                }
            }
            (s, states, sol.e_max, sol.weyl, sol.op.stats)
        }
    };
    states.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
    let norm = (s.hx * s.hy).sqrt();
    for (_, u) in states.iter_mut() {
        for v in u.iter_mut() {
            *v = *v / norm;
        }
    }
    let energies: Vec<T> = states.iter().map(|s| s.0).collect();
    let spectrum = Spectrum::from_energies(energies, T::lit(NUMERIC_MERGE_TOL), Provenance::NumericFd, e_max, weyl)?;
    EigenBasis::new(spectrum, s, states, stats)
}

//! The four engine steps, the system/device/bath ledger, and the 2D sweeps.
//!
//! Sign convention: `W` is work done on the system, `Q` is heat absorbed by
//! the system from the bath, so every quasistatic isothermal step obeys
//! `dU = W + Q` with `W = dF` and `Q = T dS`.

use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{check_temperature, convert_energy, EnergyUnit, PhysicalConstants};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, GridSpec, Occupancy};
use crate::num::{format_round_trip, Real};
use crate::spectrum::{
    energies_1d, energies_rect, fd_rectangle_spectrum, partitioned_spectrum, Chain, Cutoff, Provenance, Spectrum, WeylMeasure,
    ANALYTIC_MERGE_TOL, DEFAULT_CUTOFF_MULTIPLE,
};
use crate::thermo::{thermo_state, ThermoState};

/// Where the step spectra come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource<T> {
    /// Exact 1D box levels.
    Box1d,
    /// Exact rectangle levels; the extra height cancels from every exchange.
    Rectangle { height: T },
}

impl<T: Real> SpectrumSource<T> {
    /// Spectrum of a box of length `length` along the partition axis.
    pub fn spectrum(&self, length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<Spectrum<T>> {
        match *self {
            SpectrumSource::Box1d => energies_1d(length, Cutoff::thermal(temperature), c),
            SpectrumSource::Rectangle { height } => energies_rect(length, height, Cutoff::thermal(temperature), c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Insertion,
    Measurement,
    Expansion,
    Removal,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::Insertion, Step::Measurement, Step::Expansion, Step::Removal];

    pub fn roman(&self) -> &'static str {
        match self {
            Step::Insertion => "I",
            Step::Measurement => "II",
            Step::Expansion => "III",
            Step::Removal => "IV",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

/// Energy exchanged by the system in one step, J.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepExchange<T> {
    pub step: Step,
    /// Work done on the system.
    pub work: T,
    /// Heat absorbed by the system.
    pub heat: T,
    pub delta_u: T,
}

impl<T: Real> StepExchange<T> {
    /// `|dU - (W + Q)|` relative to the largest of the three (or `floor`).
    pub fn first_law_residual(&self, floor: T) -> T {
        let scale = self.work.abs().max(self.heat.abs()).max(self.delta_u.abs()).max(floor);
        (self.delta_u - (self.work + self.heat)).abs() / scale
    }

    fn checked(self, kt: T) -> Result<Self> {
        let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-10) } else { T::lit(1e-4) };
        let r = self.first_law_residual(kt * T::epsilon());
        if !(r <= tol) {
            return Err(Error::Invariant {
                name: "first law".into(),
                detail: format!("{:?} step: relative residual {r}", self.step),
            });
        }
        Ok(self)
    }
}

/// States before (whole box, `g = 1`) and after (superposed halves, `g = 2`)
/// insertion, plus the localized half (`g = 1`).
struct CycleStates<T> {
    full: ThermoState<T>,
    superposed: ThermoState<T>,
    localized: ThermoState<T>,
}

fn cycle_states<T: Real>(length: T, temperature: T, source: SpectrumSource<T>, c: &PhysicalConstants<T>) -> Result<CycleStates<T>> {
    check_temperature(temperature)?;
    let full = source.spectrum(length, temperature, c)?;
    let half = source.spectrum(length / T::lit(2.0), temperature, c)?;
    Ok(CycleStates {
        full: thermo_state(&full, temperature, 1, c)?,
        superposed: thermo_state(&half, temperature, 2, c)?,
        localized: thermo_state(&half, temperature, 1, c)?,
    })
}

/// Partition inserted at the centre; the particle ends up in a superposition
/// of both halves. `W = kT ln[Z(L) / 2Z(L/2)]`, `Q = T (S_II - S_I)`.
pub fn insertion_step<T: Real>(length: T, temperature: T, source: SpectrumSource<T>, c: &PhysicalConstants<T>) -> Result<StepExchange<T>> {
    let s = cycle_states(length, temperature, source, c)?;
    StepExchange {
        step: Step::Insertion,
        work: s.superposed.free_energy - s.full.free_energy,
        heat: temperature * (s.superposed.entropy - s.full.entropy),
        delta_u: s.superposed.internal_energy - s.full.internal_energy,
    }
    .checked(c.kt(temperature))
}

/// Localization by measurement: `W = kT ln 2`, `Q = -kT ln 2`, `dU = 0`.
pub fn measurement_step<T: Real>(temperature: T, c: &PhysicalConstants<T>) -> Result<StepExchange<T>> {
    check_temperature(temperature)?;
    let w = c.kt(temperature) * T::LN_2();
    Ok(StepExchange {
        step: Step::Measurement,
        work: w,
        heat: -w,
        delta_u: T::zero(),
    })
}

/// Isothermal expansion of the occupied half to the full box:
/// `W = kT ln[Z(L/2) / Z(L)]`, `Q = T [S(L) - S(L/2)]`.
pub fn expansion_step<T: Real>(length: T, temperature: T, source: SpectrumSource<T>, c: &PhysicalConstants<T>) -> Result<StepExchange<T>> {
    let s = cycle_states(length, temperature, source, c)?;
    StepExchange {
        step: Step::Expansion,
        work: s.full.free_energy - s.localized.free_energy,
        heat: temperature * (s.full.entropy - s.localized.entropy),
        delta_u: s.full.internal_energy - s.localized.internal_energy,
    }
    .checked(c.kt(temperature))
}

/// Removing the partition at the wall changes nothing.
pub fn removal_step<T: Real>() -> StepExchange<T> {
    StepExchange {
        step: Step::Removal,
        work: T::zero(),
        heat: T::zero(),
        delta_u: T::zero(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    System,
    Device,
    Bath,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::System, Component::Device, Component::Bath];

    pub fn symbol(&self) -> &'static str {
        match self {
            Component::System => "S",
            Component::Device => "D",
            Component::Bath => "B",
        }
    }
}

/// Changes of one component in one step, all in J (`T dS` at the bath
/// temperature).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerCell<T> {
    pub delta_f: T,
    pub t_delta_s: T,
    pub delta_u: T,
}

impl<T: Real> LedgerCell<T> {
    fn zero() -> Self {
        Self {
            delta_f: T::zero(),
            t_delta_s: T::zero(),
            delta_u: T::zero(),
        }
    }

    fn add(self, o: Self) -> Self {
        Self {
            delta_f: self.delta_f + o.delta_f,
            t_delta_s: self.t_delta_s + o.t_delta_s,
            delta_u: self.delta_u + o.delta_u,
        }
    }

    fn max_abs(&self) -> T {
        self.delta_f.abs().max(self.t_delta_s.abs()).max(self.delta_u.abs())
    }
}

/// Free energy, entropy and internal energy changes of system, device and
/// bath over the four steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleLedger<T> {
    /// Box length along the partition axis, m.
    pub length: T,
    /// K.
    pub temperature: T,
    pub steps: [StepExchange<T>; 4],
    /// `cells[component][step]`.
    pub cells: [[LedgerCell<T>; 4]; 3],
}

impl<T: Real> CycleLedger<T> {
    pub fn from_steps(length: T, temperature: T, steps: [StepExchange<T>; 4]) -> Self {
        let mut cells = [[LedgerCell::zero(); 4]; 3];
        for s in &steps {
            let k = s.step.index();
            cells[0][k] = LedgerCell {
                delta_f: s.work,
                t_delta_s: s.heat,
                delta_u: s.delta_u,
            };
            match s.step {
                Step::Measurement => {
                    // the device does the measurement work and takes up the
                    // entropy the system loses
                    cells[1][k] = LedgerCell {
                        delta_f: -s.work,
                        t_delta_s: -s.heat,
                        delta_u: T::zero(),
                    };
                }
                _ => {
                    cells[2][k] = LedgerCell {
                        delta_f: -s.work,
                        t_delta_s: -s.heat,
                        delta_u: -s.delta_u,
                    };
                }
            }
        }
        Self {
            length,
            temperature,
            steps,
            cells,
        }
    }

    pub fn cell(&self, component: Component, step: Step) -> LedgerCell<T> {
        self.cells[component as usize][step.index()]
    }

    pub fn step(&self, step: Step) -> StepExchange<T> {
        self.steps[step.index()]
    }

    /// Sum over the four steps for one component.
    pub fn row_sum(&self, component: Component) -> LedgerCell<T> {
        self.cells[component as usize].iter().fold(LedgerCell::zero(), |a, &b| a.add(b))
    }

    /// Sum over the three components for one step.
    pub fn column_sum(&self, step: Step) -> LedgerCell<T> {
        self.cells.iter().fold(LedgerCell::zero(), |a, row| a.add(row[step.index()]))
    }

    pub fn net_work(&self) -> T {
        self.steps.iter().fold(T::zero(), |a, s| a + s.work)
    }

    pub fn net_heat(&self) -> T {
        self.steps.iter().fold(T::zero(), |a, s| a + s.heat)
    }

    pub fn net_delta_u(&self) -> T {
        self.steps.iter().fold(T::zero(), |a, s| a + s.delta_u)
    }

    /// Largest violation of the zero-sum rules, in units of kT.
    pub fn max_imbalance_kt(&self, c: &PhysicalConstants<T>) -> T {
        let kt = c.kt(self.temperature);
        // only the system returns to its initial state
        let rows = std::iter::once(self.row_sum(Component::System).max_abs());
        let cols = Step::ALL.iter().map(|&s| self.column_sum(s).max_abs());
        let net = [self.net_work(), self.net_heat(), self.net_delta_u()].into_iter().map(|v| v.abs());
        rows.chain(cols).chain(net).fold(T::zero(), T::max) / kt
    }

    /// Fails when a system row, any column or a net exchange exceeds
    /// `tol_kt * kT`.
    pub fn check_invariants(&self, tol_kt: T, c: &PhysicalConstants<T>) -> Result<()> {
        let worst = self.max_imbalance_kt(c);
        if !(worst <= tol_kt) {
            return Err(Error::Invariant {
                name: "cycle ledger zero sums".into(),
                detail: format!("largest imbalance {worst} kT"),
            });
        }
        Ok(())
    }

    /// Aligned text table: one block of three rows per component, one column
    /// per step plus the row sum.
    pub fn to_table(&self, unit: EnergyUnit, c: &PhysicalConstants<T>) -> Result<String> {
        // `+ 0.0` turns the -0 of negated empty cells into 0
        let conv = |v: T| convert_energy(v, self.temperature, unit, c).map(|x| x.to_f64_lossy() + 0.0);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "L = {} nm, T = {} K, energies in {}",
            self.length.to_f64_lossy() * 1e9,
            self.temperature.to_f64_lossy(),
            unit
        );
        let _ = write!(out, "{:<8}", "");
        for s in Step::ALL {
            let _ = write!(out, "{:>16}", s.roman());
        }
        let _ = writeln!(out, "{:>16}", "sum");
        for p in Component::ALL {
            let rows: [(&str, CellField<T>); 3] = [
                ("dF", |x| x.delta_f),
                ("TdS", |x| x.t_delta_s),
                ("dU", |x| x.delta_u),
            ];
            for (k, (name, get)) in rows.iter().enumerate() {
                let label = if k == 0 { p.symbol() } else { "" };
                let _ = write!(out, "{:<3}{:<5}", label, name);
                for s in Step::ALL {
                    let _ = write!(out, "{:>16.6e}", conv(get(&self.cell(p, s)))?);
                }
                let _ = writeln!(out, "{:>16.6e}", conv(get(&self.row_sum(p)))?);
            }
        }
        let _ = write!(out, "{:<8}", "W");
        for s in Step::ALL {
            let _ = write!(out, "{:>16.6e}", conv(self.step(s).work)?);
        }
        let _ = writeln!(out, "{:>16.6e}", conv(self.net_work())?);
        let _ = write!(out, "{:<8}", "Q");
        for s in Step::ALL {
            let _ = write!(out, "{:>16.6e}", conv(self.step(s).heat)?);
        }
        let _ = writeln!(out, "{:>16.6e}", conv(self.net_heat())?);
        Ok(out)
    }
}

type CellField<T> = fn(&LedgerCell<T>) -> T;

/// Full insertion / measurement / expansion / removal cycle from exact 1D
/// spectra.
pub fn run_cycle<T: Real>(length: T, temperature: T, c: &PhysicalConstants<T>) -> Result<CycleLedger<T>> {
    run_cycle_with(length, temperature, SpectrumSource::Box1d, c)
}

pub fn run_cycle_with<T: Real>(length: T, temperature: T, source: SpectrumSource<T>, c: &PhysicalConstants<T>) -> Result<CycleLedger<T>> {
    let steps = [
        insertion_step(length, temperature, source, c)?,
        measurement_step(temperature, c)?,
        expansion_step(length, temperature, source, c)?,
        removal_step(),
    ];
    let ledger = CycleLedger::from_steps(length, temperature, steps);
    let tol = if T::epsilon() < T::lit(1e-10) { T::lit(1e-10) } else { T::lit(1e-4) };
    ledger.check_invariants(tol, c)?;
    Ok(ledger)
}

/// Upper bound on the work extractable after gaining `information` nats:
/// `-dF + kT I`.
pub fn extractable_work_bound<T: Real>(delta_f: T, information: T, temperature: T, c: &PhysicalConstants<T>) -> Result<T> {
    check_temperature(temperature)?;
    if !(information >= T::zero()) {
        return Err(Error::Domain(format!("mutual information must be non-negative, got {information}")));
    }
    Ok(-delta_f + c.kt(temperature) * information)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Partition depth `d` at the box centre.
    Insertion,
    /// Position `l` of a fully inserted partition, particle in both parts.
    ExpansionSuperposed,
    /// Position `l`, particle in the left part only.
    ExpansionLocalized,
}

impl SweepKind {
    pub fn abscissa(&self) -> &'static str {
        match self {
            SweepKind::Insertion => "d",
            _ => "l",
        }
    }
}

/// Thermodynamic quantities along a sweep. Failed points hold NaN and an
/// entry in `failures`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve<T> {
    pub kind: SweepKind,
    pub temperature: T,
    pub lx: T,
    pub ly: T,
    pub hx: T,
    pub hy: T,
    /// m, strictly increasing.
    pub abscissa: Vec<T>,
    /// J.
    pub free_energy: Vec<T>,
    /// J/K.
    pub entropy: Vec<T>,
    /// J.
    pub internal_energy: Vec<T>,
    /// `(point index, message)`.
    pub failures: Vec<(usize, String)>,
}

impl<T: Real> SweepCurve<T> {
    pub fn len(&self) -> usize {
        self.abscissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissa.is_empty()
    }

    /// CSV with header `abscissa_nm,F_J,S_J_per_K,U_J`, shortest round-trip
    /// decimals of at least 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "abscissa_nm,F_J,S_J_per_K,U_J")?;
        for i in 0..self.len() {
            let f = |v: T| format_round_trip(v.to_f64_lossy(), 12);
            writeln!(
                w,
                "{},{},{},{}",
                format_round_trip(self.abscissa[i].to_f64_lossy() * 1e9, 12),
                f(self.free_energy[i]),
                f(self.entropy[i]),
                f(self.internal_energy[i])
            )?;
        }
        Ok(())
    }

    fn from_points(kind: SweepKind, temperature: T, g: &Geometry<T>, grid: &GridSpec<T>, abscissa: &[T], points: Vec<Result<ThermoState<T>>>) -> Self {
        let mut curve = Self {
            kind,
            temperature,
            lx: g.lx,
            ly: g.ly,
            hx: grid.hx,
            hy: grid.hy,
            abscissa: abscissa.to_vec(),
            free_energy: Vec::new(),
            entropy: Vec::new(),
            internal_energy: Vec::new(),
            failures: Vec::new(),
        };
        for (i, p) in points.into_iter().enumerate() {
            match p {
                Ok(s) => {
                    curve.free_energy.push(s.free_energy);
                    curve.entropy.push(s.entropy);
                    curve.internal_energy.push(s.internal_energy);
                }
                Err(e) => {
                    curve.free_energy.push(T::nan());
                    curve.entropy.push(T::nan());
                    curve.internal_energy.push(T::nan());
                    curve.failures.push((i, e.to_string()));
                }
            }
        }
        curve
    }
}

/// `n` evenly spaced values from `a` to `b` inclusive.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
                }
            })
            .collect(),
    }
}

fn check_abscissa<T: Real>(values: &[T], lo: T, hi: T, name: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Usage(format!("{name} sweep needs at least one point")));
    }
    for w in values.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Usage(format!("{name} values must be strictly increasing")));
        }
    }
    if values.iter().any(|&v| !(v >= lo && v <= hi)) {
        return Err(Error::Geometry(format!("{name} values must lie in [{lo}, {hi}] m")));
    }
    Ok(())
}

/// Free energy, entropy and internal energy versus partition depth, from the
/// 2D partitioned solver. The partition sits at `base.position`.
pub fn sweep_insertion<T: Real>(
    base: &Geometry<T>,
    temperature: T,
    depths: &[T],
    grid: &GridSpec<T>,
    c: &PhysicalConstants<T>,
) -> Result<SweepCurve<T>> {
    sweep_insertion_with_cutoff(base, temperature, depths, grid, T::lit(DEFAULT_CUTOFF_MULTIPLE), c)
}

/// [`sweep_insertion`] with the cutoff at `E_ground + multiple * kT`.
pub fn sweep_insertion_with_cutoff<T: Real>(
    base: &Geometry<T>,
    temperature: T,
    depths: &[T],
    grid: &GridSpec<T>,
    multiple: T,
    c: &PhysicalConstants<T>,
) -> Result<SweepCurve<T>> {
    check_temperature(temperature)?;
    let cutoff = Cutoff::Thermal { temperature, multiple };
    check_abscissa(depths, T::zero(), base.ly, "depth")?;
    let base = base.with_occupancy(Occupancy::FullBox)?;
    let points: Vec<Result<ThermoState<T>>> = depths
        .par_iter()
        .map(|&d| {
            let g = base.with_depth(d)?;
            let sol = partitioned_spectrum(&g, grid, cutoff, c)?;
            thermo_state(&sol.spectrum, temperature, 1, c)
        })
        .collect();
    Ok(SweepCurve::from_points(SweepKind::Insertion, temperature, &base, grid, depths, points))
}

/// Thermodynamics of the fully divided box versus partition position.
///
/// The compartments are independent rectangles, so their grid spectra are
/// taken in closed form. Superposed: `Z = Z_left(l) + Z_right(Lx - l)`;
/// localized: `Z = Z_left(l)`. A partition on a wall leaves the full box.
pub fn sweep_expansion<T: Real>(
    base: &Geometry<T>,
    temperature: T,
    positions: &[T],
    localized: bool,
    grid: &GridSpec<T>,
    c: &PhysicalConstants<T>,
) -> Result<SweepCurve<T>> {
    sweep_expansion_with_cutoff(base, temperature, positions, localized, grid, T::lit(DEFAULT_CUTOFF_MULTIPLE), c)
}

/// [`sweep_expansion`] with the cutoff at `E_ground + multiple * kT`.
pub fn sweep_expansion_with_cutoff<T: Real>(
    base: &Geometry<T>,
    temperature: T,
    positions: &[T],
    localized: bool,
    grid: &GridSpec<T>,
    multiple: T,
    c: &PhysicalConstants<T>,
) -> Result<SweepCurve<T>> {
    check_temperature(temperature)?;
    let cutoff = Cutoff::Thermal { temperature, multiple };
    base.validate()?;
    check_abscissa(positions, T::zero(), base.lx, "position")?;
    let points: Vec<Result<ThermoState<T>>> = positions
        .par_iter()
        .map(|&l| {
            let s = divided_box_spectrum(base.lx, base.ly, l, localized, grid, cutoff, c)?;
            thermo_state(&s, temperature, 1, c)
        })
        .collect();
    let kind = if localized {
        SweepKind::ExpansionLocalized
    } else {
        SweepKind::ExpansionSuperposed
    };
    Ok(SweepCurve::from_points(kind, temperature, base, grid, positions, points))
}

/// Grid spectrum of a box divided at `l` (left part only when `localized`).
pub fn divided_box_spectrum<T: Real>(
    lx: T,
    ly: T,
    l: T,
    localized: bool,
    grid: &GridSpec<T>,
    cutoff: Cutoff<T>,
    c: &PhysicalConstants<T>,
) -> Result<Spectrum<T>> {
    let nx = (lx / grid.hx).round().to_usize().unwrap_or(0);
    let ny = (ly / grid.hy).round().to_usize().unwrap_or(0);
    if nx < 2 || ny < 2 {
        return Err(Error::Geometry(format!("grid {} x {} m too coarse for the box", grid.hx, grid.hy)));
    }
    let hx = lx / T::from_usize_lossy(nx);
    let hy = ly / T::from_usize_lossy(ny);
    let column = (l / hx).round().to_usize().unwrap_or(0).min(nx);
    let mut parts: Vec<usize> = if localized {
        vec![column]
    } else {
        vec![column, nx - column]
    };
    if localized && column == 0 {
        return Err(Error::Geometry("localized compartment has zero width".into()));
    }
    // a partition on the wall leaves the full box
    if parts.contains(&nx) {
        parts = vec![nx];
    }
    parts.retain(|&w| w > 0);
    if let Some(&w) = parts.iter().find(|&&w| w < 3) {
        return Err(Error::Geometry(format!("compartment of {w} grid cells is thinner than 3 cells")));
    }
    let y = Chain::new(ny, hy);
    let scale = c.kinetic_scale();
    let widest = *parts.iter().max().expect("non-empty");
    let ground = scale * (Chain::new(widest, hx).eigenvalue(1) + y.eigenvalue(1));
    let cells: usize = parts.iter().sum();
    let weyl = WeylMeasure::Area(T::from_usize_lossy(cells) * hx * ly);
    let e_max = cutoff.resolve(ground, weyl, c)?;
    let mut energies = Vec::new();
    for &w in &parts {
        let x = Chain::new(w, hx);
        if scale * (x.eigenvalue(1) + y.eigenvalue(1)) > e_max {
            // a thin compartment may hold no level below the cutoff
            continue;
        }
        let s = fd_rectangle_spectrum(x, y, Cutoff::Energy(e_max), c)?;
        energies.extend(s.state_energies());
    }
    Spectrum::from_energies(energies, T::lit(ANALYTIC_MERGE_TOL), Provenance::NumericFd, e_max, weyl)
}

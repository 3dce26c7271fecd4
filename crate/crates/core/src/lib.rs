//! Thermodynamics of a single particle in a box with a movable partition.
//!
//! The crate computes exact spectra of the 1D box, the rectangle and the
//! rectangle with a partially inserted zero-thickness partition, the
//! canonical thermodynamics of those spectra, the work, heat and energy
//! exchanged in each step of the insertion / measurement / expansion /
//! removal cycle, and the closed-form boundary-layer approximations.
//!
//! Everything is generic over the scalar type ([`Real`], `f32` or `f64`);
//! the aliases below fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the matrix notation of the numerical kernels
#![allow(clippy::needless_range_loop)]

pub mod constants;
pub mod cycle;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod num;
pub mod qbl;
pub mod spectrum;
pub mod thermo;

pub use constants::{EnergyUnit, PhysicalConstants};
pub use cycle::{CycleLedger, SpectrumSource, Step, StepExchange, SweepCurve, SweepKind};
pub use error::{Error, Result};
pub use geometry::{Geometry, GridSpec, Occupancy, SnappedGrid};
pub use num::Real;
pub use qbl::QblReport;
pub use spectrum::{Cutoff, EigenBasis, Level, Provenance, ScalarField, Spectrum};
pub use thermo::ThermoState;

pub type Constants = PhysicalConstants<f64>;
pub type Geometry64 = Geometry<f64>;
pub type GridSpec64 = GridSpec<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type EigenBasis64 = EigenBasis<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type ThermoState64 = ThermoState<f64>;
pub type CycleLedger64 = CycleLedger<f64>;
pub type SweepCurve64 = SweepCurve<f64>;
pub type QblReport64 = QblReport<f64>;

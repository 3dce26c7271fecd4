//! Run configuration: a flat JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use szilard_core::spectrum::DEFAULT_CUTOFF_MULTIPLE;
use szilard_core::{EnergyUnit, Geometry, Geometry64, GridSpec64, Occupancy};

use crate::CliError;

const NM: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lx_nm: f64,
    pub ly_nm: f64,
    pub temp_k: f64,
    pub grid_nm: f64,
    /// Spectra are kept up to `E_ground + cutoff_multiple * kT` (raised when
    /// the tail estimate demands it).
    pub cutoff_multiple: f64,
    /// Points per sweep.
    pub points: usize,
    /// Box lengths and temperatures of the boundary-layer comparison.
    pub qbl_lengths_nm: Vec<f64>,
    pub qbl_temps_k: Vec<f64>,
    pub units: EnergyUnit,
    pub out: PathBuf,
    /// Sweep worker threads; `None` uses every available processor.
    pub workers: Option<usize>,
    /// Always on; outputs never depend on scheduling.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lx_nm: 20.0,
            ly_nm: 10.0,
            temp_k: 300.0,
            grid_nm: 0.05,
            cutoff_multiple: DEFAULT_CUTOFF_MULTIPLE,
            points: 41,
            qbl_lengths_nm: vec![10.0, 20.0, 50.0, 100.0, 200.0],
            qbl_temps_k: vec![100.0, 300.0, 1000.0],
            units: EnergyUnit::KtUnits,
            out: PathBuf::from("out"),
            workers: None,
            deterministic: true,
        }
    }
}

/// Values given on the command line; each one wins over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub units: Option<EnergyUnit>,
    pub grid_nm: Option<f64>,
    pub temp_k: Option<f64>,
    pub lx_nm: Option<f64>,
    pub ly_nm: Option<f64>,
    pub points: Option<usize>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = o.units {
            self.units = v;
        }
        if let Some(v) = o.grid_nm {
            self.grid_nm = v;
        }
        if let Some(v) = o.temp_k {
            self.temp_k = v;
        }
        if let Some(v) = o.lx_nm {
            self.lx_nm = v;
        }
        if let Some(v) = o.ly_nm {
            self.ly_nm = v;
        }
        if let Some(v) = o.points {
            self.points = v;
        }
        if o.workers.is_some() {
            self.workers = o.workers;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("temp_k", self.temp_k)?;
        positive("lx_nm", self.lx_nm)?;
        positive("ly_nm", self.ly_nm)?;
        positive("grid_nm", self.grid_nm)?;
        positive("cutoff_multiple", self.cutoff_multiple)?;
        if self.grid_nm > self.lx_nm.min(self.ly_nm) / 4.0 {
            return Err(CliError::Config(format!("grid_nm {} too coarse for a {} x {} nm box", self.grid_nm, self.lx_nm, self.ly_nm)));
        }
        if self.points == 0 {
            return Err(CliError::Config("points must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if !self.deterministic {
            return Err(CliError::Config("deterministic cannot be switched off".into()));
        }
        for &l in &self.qbl_lengths_nm {
            positive("qbl_lengths_nm entry", l)?;
        }
        for &t in &self.qbl_temps_k {
            positive("qbl_temps_k entry", t)?;
        }
        Ok(())
    }

    /// Every field that influences computed values. Output location and
    /// thread count are left out so that they cannot change the hash.
    pub fn physics_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let m = v.as_object_mut().expect("config is an object");
        m.remove("out");
        m.remove("workers");
        v
    }

    /// SHA-256 of the compact physics JSON, hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.physics_json().to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn geometry(&self) -> Result<Geometry64, CliError> {
        Ok(Geometry::empty_box(self.lx_nm * NM, self.ly_nm * NM)?)
    }

    pub fn geometry_at(&self, depth_nm: f64, position_nm: f64, occupancy: Occupancy) -> Result<Geometry64, CliError> {
        Ok(Geometry::new(self.lx_nm * NM, self.ly_nm * NM, depth_nm * NM, position_nm * NM, occupancy)?)
    }

    pub fn grid(&self) -> Result<GridSpec64, CliError> {
        Ok(GridSpec64::uniform(self.grid_nm * NM)?)
    }

    pub fn temperature(&self) -> f64 {
        self.temp_k
    }
}

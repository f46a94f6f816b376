//! Initial data and test functions.
//!
//! Gaussians are `A exp(-((x - c)/w)^2)` and sech profiles `A sech((x - c)/w)`.

use std::path::{Path, PathBuf};

use anyhow::Context;
use latnls_core::interp::{discretize, discretize_closed_form, ContinuumFunction, Provenance};
use latnls_core::lattice::{LatticeField, PeriodicLattice};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::formats::read_field;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    Gaussian {
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    Sech {
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `base(x) exp(i wavenumber x)`.
    Modulated { wavenumber: f64, base: Box<DatumSpec> },
    /// A stored lattice field, linearly interpolated (periodically).
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl DatumSpec {
    pub fn gaussian(width: f64, center: f64, amplitude: f64) -> Self {
        DatumSpec::Gaussian { width, center, amplitude }
    }

    /// Loads any referenced files; relative paths are taken from `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> anyhow::Result<Datum> {
        Ok(match self {
            DatumSpec::Gaussian { width, center, amplitude } => {
                check_width(*width)?;
                Datum::Gaussian { width: *width, center: *center, amplitude: *amplitude }
            }
            DatumSpec::Sech { width, center, amplitude } => {
                check_width(*width)?;
                Datum::Sech { width: *width, center: *center, amplitude: *amplitude }
            }
            DatumSpec::Modulated { wavenumber, base } => {
                Datum::Modulated { wavenumber: *wavenumber, base: Box::new(base.resolve(base_dir)?) }
            }
            DatumSpec::File { path } => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let (field, _) = read_field(&full).with_context(|| format!("reading datum {}", full.display()))?;
                Datum::Samples(field)
            }
        })
    }
}

fn check_width(w: f64) -> anyhow::Result<()> {
    anyhow::ensure!(w > 0.0 && w.is_finite(), "datum width must be positive, got {w}");
    Ok(())
}

/// A datum ready for evaluation.
#[derive(Debug, Clone)]
pub enum Datum {
    Gaussian { width: f64, center: f64, amplitude: f64 },
    Sech { width: f64, center: f64, amplitude: f64 },
    Modulated { wavenumber: f64, base: Box<Datum> },
    Samples(LatticeField),
}

impl Datum {
    pub fn is_closed_form(&self) -> bool {
        match self {
            Datum::Samples(_) => false,
            Datum::Modulated { base, .. } => base.is_closed_form(),
            _ => true,
        }
    }

    pub fn value(&self, x: f64) -> Complex64 {
        match self {
            Datum::Gaussian { width, center, amplitude } => {
                let z = (x - center) / width;
                Complex64::new(amplitude * (-z * z).exp(), 0.0)
            }
            Datum::Sech { width, center, amplitude } => {
                Complex64::new(amplitude / ((x - center) / width).cosh(), 0.0)
            }
            Datum::Modulated { wavenumber, base } => base.value(x) * Complex64::from_polar(1.0, wavenumber * x),
            Datum::Samples(field) => periodic_linear(field, x),
        }
    }

    /// Samples on a fine grid. Sampled files are tagged as interpolated.
    pub fn on_grid(&self, grid: PeriodicLattice) -> latnls_core::Result<ContinuumFunction> {
        let f = ContinuumFunction::from_fn(grid, |x| self.value(x))?;
        Ok(if self.is_closed_form() { f } else { f.with_provenance(Provenance::Interpolated) })
    }

    /// Cell averages on `lattice`; exact quadrature for closed forms,
    /// fine-grid averages of `fine` otherwise.
    pub fn discretize(&self, lattice: PeriodicLattice, fine: &ContinuumFunction) -> latnls_core::Result<LatticeField> {
        if self.is_closed_form() {
            discretize_closed_form(|x| self.value(x), lattice)
        } else {
            discretize(fine, lattice)
        }
    }
}

fn periodic_linear(field: &LatticeField, x: f64) -> Complex64 {
    let lat = field.lattice();
    let n = lat.n_sites();
    let s = (x - lat.origin()) / lat.h();
    let s = s.rem_euclid(n as f64);
    let m = (s.floor() as usize).min(n - 1);
    let t = s - m as f64;
    let v = field.values();
    v[m] * (1.0 - t) + v[(m + 1) % n] * t
}

//! Continuum functions on a fine periodic reference grid, cell-average
//! discretization, the interpolants `p_h` (piecewise linear) and `q_h`
//! (piecewise constant), the forward difference `D^+_h`, and spectral
//! continuum norms.
//!
//! A coarse lattice of mesh `h` and a fine grid of mesh `h_ref` are compatible
//! when they cover the same box and `h / h_ref` is an integer `r`; coarse site
//! `m` then sits on fine index `m r`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::kernel::Kernel;
use crate::lattice::{LatticeField, PeriodicLattice, Sign};
use crate::quad;

/// Where a continuum function came from; decides whether the aliasing guard
/// applies (piecewise-linear interpolants are not band-limited).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Interpolated,
    Evolved,
}

impl Provenance {
    pub fn tag(self) -> u8 {
        match self {
            Provenance::ClosedForm => 0,
            Provenance::Interpolated => 1,
            Provenance::Evolved => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Provenance::ClosedForm),
            1 => Some(Provenance::Interpolated),
            2 => Some(Provenance::Evolved),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::Interpolated => "interpolated",
            Provenance::Evolved => "evolved",
        }
    }
}

/// Fraction of the spectrum (by `|kappa|`) that must be negligible.
const GUARD_BAND: f64 = 0.9;
/// Allowed size of the guarded band relative to the spectral peak.
pub const ALIASING_LIMIT: f64 = 1e-10;

/// Largest mass fraction a datum may carry within `L/8` of the box edge.
pub const EDGE_MASS_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumFunction {
    grid: PeriodicLattice,
    samples: Vec<Complex64>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuumNorm {
    L2,
    HSigma(f64),
    /// `(int |kappa|^{2 alpha} |f^|^2)^{1/2}`.
    Seminorm(f64),
}

impl ContinuumFunction {
    pub fn new(grid: PeriodicLattice, samples: Vec<Complex64>, provenance: Provenance) -> Result<Self> {
        if samples.len() != grid.n_sites() {
            return Err(Error::LengthMismatch { expected: grid.n_sites(), got: samples.len() });
        }
        if let Some(i) = samples.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, samples, provenance })
    }

    pub(crate) fn from_parts(grid: PeriodicLattice, samples: Vec<Complex64>, provenance: Provenance) -> Self {
        Self { grid, samples, provenance }
    }

    /// Samples a closed-form function at the fine-grid points.
    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: PeriodicLattice, f: F) -> Result<Self> {
        let samples = (0..grid.n_sites()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, samples, Provenance::ClosedForm)
    }

    pub fn zeros(grid: PeriodicLattice, provenance: Provenance) -> Self {
        Self::from_parts(grid, alloc::vec![Complex64::new(0.0, 0.0); grid.n_sites()], provenance)
    }

    pub fn grid(&self) -> &PeriodicLattice {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// Continuum wavenumber `kappa_j = k_j / h_ref`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.grid.wavenumber(j) / self.grid.h()
    }

    /// Unitary DFT of the samples.
    pub fn spectrum(&self) -> Vec<Complex64> {
        let plan = FftPlan::new(self.samples.len()).expect("grid sizes are powers of two");
        let mut c = self.samples.clone();
        plan.forward_unitary(&mut c);
        c
    }

    /// Difference `self - other`; the result is tagged interpolated when
    /// either side is.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let provenance = if self.provenance == Provenance::Interpolated
            || other.provenance == Provenance::Interpolated
        {
            Provenance::Interpolated
        } else {
            self.provenance
        };
        Ok(Self::from_parts(
            self.grid,
            self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
            provenance,
        ))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_parts(self.grid, self.samples.iter().map(|v| v * a).collect(), self.provenance)
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "continuum functions on different grids (h_ref = {} / {}, M = {} / {})",
                self.grid.h(),
                other.grid.h(),
                self.samples.len(),
                other.samples.len()
            )));
        }
        Ok(())
    }

    /// Ratio of the largest coefficient with `|kappa| >= 0.9 kappa_max` to
    /// the largest coefficient overall (zero for the zero function).
    pub fn aliasing_ratio(&self) -> f64 {
        let spec = self.spectrum();
        let n = spec.len();
        let cut = GUARD_BAND * (n / 2) as f64;
        let mut peak: f64 = 0.0;
        let mut band: f64 = 0.0;
        for (j, c) in spec.iter().enumerate() {
            let jj = if j <= n / 2 { j } else { n - j };
            let a = c.norm();
            peak = peak.max(a);
            if jj as f64 >= cut {
                band = band.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            band / peak
        }
    }

    /// Errors when a band-limited provenance carries spectral content in the
    /// guard band.
    pub fn check_band_limited(&self) -> Result<()> {
        if self.provenance == Provenance::Interpolated {
            return Ok(());
        }
        let ratio = self.aliasing_ratio();
        if ratio > ALIASING_LIMIT {
            return Err(Error::Aliasing { ratio, limit: ALIASING_LIMIT });
        }
        Ok(())
    }

    /// Mass in the outer strips `|x - center| > 3L/8` over the total mass
    /// (zero for the zero function).
    pub fn edge_mass_fraction(&self) -> f64 {
        let center = self.grid.origin() + 0.5 * self.grid.length();
        let inner = 0.375 * self.grid.length();
        let mut edge = 0.0;
        let mut total = 0.0;
        for (m, v) in self.samples.iter().enumerate() {
            let a = v.norm_sqr();
            total += a;
            if (self.grid.position(m) - center).abs() > inner {
                edge += a;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    /// Errors when the function is not effectively supported inside the box.
    pub fn check_contained(&self) -> Result<()> {
        let fraction = self.edge_mass_fraction();
        if fraction > EDGE_MASS_LIMIT {
            return Err(Error::NotContained { fraction, limit: EDGE_MASS_LIMIT });
        }
        Ok(())
    }

    /// `int |f|^2` on the fine grid.
    pub fn mass(&self) -> f64 {
        self.grid.h() * self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `int conj(self) other` by the fine-grid rectangle rule (exact for
    /// band-limited functions).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b).sum::<Complex64>()
            * self.grid.h())
    }

    /// `int conj(self) other` treating both as linear between fine-grid
    /// points (exact for piecewise-linear interpolants).
    pub fn inner_piecewise_linear(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        let f = &self.samples;
        let g = &other.samples;
        let n = f.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let j = (i + 1) % n;
            acc += f[i].conj() * g[i] * 2.0 + f[i].conj() * g[j] + f[j].conj() * g[i] + f[j].conj() * g[j] * 2.0;
        }
        Ok(acc * (self.grid.h() / 6.0))
    }

    /// Applies a real Fourier multiplier `m(kappa)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> f64, provenance: Provenance) -> Self {
        let plan = FftPlan::new(self.samples.len()).expect("grid sizes are powers of two");
        let mut c = self.samples.clone();
        plan.forward_unitary(&mut c);
        for (j, v) in c.iter_mut().enumerate() {
            *v *= m(self.wavenumber(j));
        }
        plan.inverse_unitary(&mut c);
        Self::from_parts(self.grid, c, provenance)
    }

    /// `(1/2) c int conj(u) (-Delta)^alpha u +- (1/4) int |u|^4`.
    pub fn energy(&self, alpha: f64, c: f64, sign: Sign) -> f64 {
        let spec = self.spectrum();
        let h = self.grid.h();
        let quad: f64 = spec
            .iter()
            .enumerate()
            .map(|(j, v)| libm::pow(self.wavenumber(j).abs(), 2.0 * alpha) * v.norm_sqr())
            .sum::<f64>()
            * h;
        let quartic: f64 = self.samples.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum::<f64>() * h;
        0.5 * c * quad + 0.25 * sign.factor() * quartic
    }
}

/// Spectral continuum norm on the fine grid.
pub fn continuum_norm(f: &ContinuumFunction, kind: ContinuumNorm) -> Result<f64> {
    f.check_band_limited()?;
    match kind {
        ContinuumNorm::L2 => Ok(libm::sqrt(f.mass())),
        ContinuumNorm::HSigma(sigma) => {
            if !(0.0..=1.0).contains(&sigma) {
                return Err(Error::InvalidArgument(format!("sigma must lie in [0, 1], got {sigma}")));
            }
            if sigma == 0.0 {
                return Ok(libm::sqrt(f.mass()));
            }
            Ok(weighted_norm(f, |kappa| 1.0 + libm::pow(kappa.abs(), 2.0 * sigma)))
        }
        ContinuumNorm::Seminorm(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
            }
            Ok(weighted_norm(f, |kappa| libm::pow(kappa.abs(), 2.0 * alpha)))
        }
    }
}

fn weighted_norm(f: &ContinuumFunction, w: impl Fn(f64) -> f64) -> f64 {
    let spec = f.spectrum();
    let s: f64 = spec.iter().enumerate().map(|(j, c)| w(f.wavenumber(j)) * c.norm_sqr()).sum();
    libm::sqrt(f.grid.h() * s)
}

/// Refinement factor `h / h_ref`, or an error if the grids are incompatible.
pub fn refinement(lattice: &PeriodicLattice, fine: &PeriodicLattice) -> Result<usize> {
    if !lattice.same_box(fine) {
        return Err(Error::GridMismatch(format!(
            "periods differ: lattice L = {}, fine grid L = {}",
            lattice.length(),
            fine.length()
        )));
    }
    let ratio = lattice.h() / fine.h();
    let r = libm::round(ratio);
    if r < 1.0 || (ratio - r).abs() > 1e-9 * r {
        return Err(Error::GridMismatch(format!(
            "h = {} is not an integer multiple of h_ref = {}",
            lattice.h(),
            fine.h()
        )));
    }
    Ok(r as usize)
}

/// Cell averages `f_h(x_m) = h^{-1} int_{x_m}^{x_{m+1}} f` by the trapezoid
/// rule on the fine grid.
pub fn discretize(f: &ContinuumFunction, lattice: PeriodicLattice) -> Result<LatticeField> {
    let r = refinement(&lattice, &f.grid)?;
    let m_fine = f.samples.len();
    let inv = 1.0 / r as f64;
    let values = (0..lattice.n_sites())
        .map(|m| {
            let start = m * r;
            let mut acc = (f.samples[start] + f.samples[(start + r) % m_fine]) * 0.5;
            for t in 1..r {
                acc += f.samples[start + t];
            }
            acc * inv
        })
        .collect();
    Ok(LatticeField::from_parts(lattice, values))
}

/// Cell averages of a closed-form function by adaptive Gauss–Kronrod
/// quadrature on every cell.
pub fn discretize_closed_form<F: Fn(f64) -> Complex64>(f: F, lattice: PeriodicLattice) -> Result<LatticeField> {
    let h = lattice.h();
    let values = (0..lattice.n_sites())
        .map(|m| {
            let a = lattice.position(m);
            quad::integrate_complex(&f, a, a + h, 1e-15, 1e-12) / h
        })
        .collect();
    LatticeField::new(lattice, values)
}

/// `(p_h u)(x) = u(x_m) + (D^+_h u)(x_m) (x - x_m)` on the fine grid.
pub fn p_linear(field: &LatticeField, fine: PeriodicLattice) -> Result<ContinuumFunction> {
    let r = refinement(field.lattice(), &fine)?;
    let u = field.values();
    let n = u.len();
    let mut samples = Vec::with_capacity(fine.n_sites());
    for m in 0..n {
        let a = u[m];
        let slope = u[(m + 1) % n] - a;
        for t in 0..r {
            samples.push(a + slope * (t as f64 / r as f64));
        }
    }
    Ok(ContinuumFunction::from_parts(fine, samples, Provenance::Interpolated))
}

/// Staircase extension `(q_h u)(x) = u(x_m)` on `[x_m, x_{m+1})`.
pub fn q_constant(field: &LatticeField, fine: PeriodicLattice) -> Result<ContinuumFunction> {
    let r = refinement(field.lattice(), &fine)?;
    let mut samples = Vec::with_capacity(fine.n_sites());
    for &v in field.values() {
        samples.extend(core::iter::repeat_n(v, r));
    }
    Ok(ContinuumFunction::from_parts(fine, samples, Provenance::Interpolated))
}

/// `(D^+_h u)(x_m) = (u(x_{m+1}) - u(x_m)) / h` with periodic wrap.
pub fn forward_diff(field: &LatticeField) -> LatticeField {
    let u = field.values();
    let n = u.len();
    let h = field.h();
    let values = (0..n).map(|m| (u[(m + 1) % n] - u[m]) / h).collect();
    LatticeField::from_parts(*field.lattice(), values)
}

/// Continuum extension of `L^J_h`: multiplier `omega(h kappa) / beta(h)`.
pub fn continuum_lj(f: &ContinuumFunction, kernel: &Kernel, h: f64) -> Result<ContinuumFunction> {
    let beta = kernel.beta(h)?;
    Ok(f.apply_multiplier(|kappa| kernel.omega(h * kappa) / beta, f.provenance))
}

/// `c (-Delta)^alpha f`: multiplier `c |kappa|^{2 alpha}`.
pub fn fractional_laplacian(f: &ContinuumFunction, alpha: f64, c: f64) -> ContinuumFunction {
    f.apply_multiplier(|kappa| c * libm::pow(kappa.abs(), 2.0 * alpha), f.provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_kernel, KernelSpec, DEFAULT_EVAL_CUTOFF};
    use crate::lattice::{apply_lj, l2_norm};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn containment_of_gaussians() {
        let grid = PeriodicLattice::new(1.0 / 16.0, 256).unwrap();
        let narrow = ContinuumFunction::from_fn(grid, |x| c((-x * x).exp())).unwrap();
        assert!(narrow.check_contained().is_ok());
        let wide = ContinuumFunction::from_fn(grid, |x| c((-x * x / 16.0).exp())).unwrap();
        assert!(matches!(wide.check_contained(), Err(Error::NotContained { .. })));
        assert_eq!(ContinuumFunction::zeros(grid, Provenance::ClosedForm).edge_mass_fraction(), 0.0);
    }

    #[test]
    fn discretize_constant_and_linear() {
        let fine = PeriodicLattice::new(1.0 / 64.0, 1024).unwrap();
        let lat = PeriodicLattice::new(0.25, 64).unwrap();
        let one = ContinuumFunction::from_fn(fine, |_| c(1.0)).unwrap();
        for v in discretize(&one, lat).unwrap().values() {
            assert_eq!(*v, c(1.0));
        }
        let lin = ContinuumFunction::from_fn(fine, c).unwrap();
        let d = discretize(&lin, lat).unwrap();
        let p = p_linear(&d, fine).unwrap();
        for m in 16..48 {
            let x = lat.position(m);
            assert!((d.values()[m] - c(x + 0.125)).norm() < 1e-13);
            for t in 0..16 {
                let i = m * 16 + t;
                assert!((p.samples()[i] - c(fine.position(i) + 0.125)).norm() < 1e-12);
            }
        }
        let dd = forward_diff(&d);
        for m in 16..48 {
            assert!((dd.values()[m] - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_cell_averages() {
        let lat = PeriodicLattice::new(0.25, 64).unwrap();
        let d = discretize_closed_form(|x| c(x * x), lat).unwrap();
        for m in 0..64 {
            let a = lat.position(m);
            let b = a + 0.25;
            let exact = (b * b * b - a * a * a) / 3.0 / 0.25;
            assert!((d.values()[m].re - exact).abs() < 1e-12 * exact.max(1.0));
        }
    }

    #[test]
    fn grid_compatibility() {
        let lat = PeriodicLattice::new(0.25, 64).unwrap();
        assert_eq!(refinement(&lat, &PeriodicLattice::new(0.03125, 512).unwrap()).unwrap(), 8);
        assert!(refinement(&lat, &PeriodicLattice::new(0.125, 64).unwrap()).is_err());
        let f = ContinuumFunction::zeros(PeriodicLattice::new(0.125, 64).unwrap(), Provenance::ClosedForm);
        assert!(discretize(&f, lat).is_err());
    }

    #[test]
    fn staircase_single_site() {
        let lat = PeriodicLattice::new(0.5, 8).unwrap();
        let fine = PeriodicLattice::new(0.0625, 64).unwrap();
        let mut v = alloc::vec![c(0.0); 8];
        v[2] = Complex64::new(1.0, 2.0);
        let f = LatticeField::new(lat, v).unwrap();
        let q = q_constant(&f, fine).unwrap();
        assert!((libm::sqrt(q.mass()) - libm::sqrt(0.5 * 5.0)).abs() < 1e-14);
        assert!((libm::sqrt(q.mass()) - l2_norm(&f)).abs() < 1e-14);
    }

    #[test]
    fn gaussian_norm_against_quadrature() {
        let fine = PeriodicLattice::new(40.0 / 512.0, 512).unwrap();
        let g = ContinuumFunction::from_fn(fine, |x| c(libm::exp(-x * x))).unwrap();
        let n2 = continuum_norm(&g, ContinuumNorm::L2).unwrap();
        let oracle = quad::integrate(|x| libm::exp(-2.0 * x * x), -20.0, 20.0, 1e-15, 1e-14);
        assert!((n2 * n2 - oracle).abs() < 1e-12 * oracle);
        assert_eq!(continuum_norm(&g, ContinuumNorm::HSigma(0.0)).unwrap(), n2);
    }

    #[test]
    fn aliasing_guard_trips_on_rough_data() {
        let fine = PeriodicLattice::new(0.125, 256).unwrap();
        let mut v = alloc::vec![c(0.0); 256];
        v[100] = c(1.0);
        let f = ContinuumFunction::new(fine, v, Provenance::ClosedForm).unwrap();
        assert!(matches!(continuum_norm(&f, ContinuumNorm::L2), Err(Error::Aliasing { .. })));
        let g = f.with_provenance(Provenance::Interpolated);
        assert!(continuum_norm(&g, ContinuumNorm::L2).is_ok());
    }

    #[test]
    fn discretization_commutes_with_operator() {
        let k = build_kernel(KernelSpec::PurePower { s: 0.75 }, DEFAULT_EVAL_CUTOFF).unwrap();
        let fine = PeriodicLattice::new(1.0 / 64.0, 2048).unwrap();
        let lat = PeriodicLattice::new(0.125, 256).unwrap();
        let f = ContinuumFunction::from_fn(fine, |x| {
            Complex64::new(0.0, 1.3 * x).exp() * libm::exp(-x * x)
        })
        .unwrap();
        let lhs = discretize(&continuum_lj(&f, &k, 0.125).unwrap(), lat).unwrap();
        let rhs = apply_lj(&discretize(&f, lat).unwrap(), &k).unwrap();
        let err = l2_norm(&lhs.sub(&rhs).unwrap()) / l2_norm(&rhs);
        assert!(err < 1e-12, "{err}");
    }
}

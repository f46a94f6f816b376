//! Periodic truncations of the lattice `hZ`, complex fields on them, the
//! unitary DFT, the operator `L^J_h`, discrete norms and conserved quantities.
//!
//! Inner products are antilinear in the first slot: `(u, v)_h = h sum conj(u) v`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::kernel::{check_mesh, Kernel, Periodization};

/// Sign of the cubic term: `i u_t = L u + |u|^2 u` is defocusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    /// `+1` for defocusing, `-1` for focusing.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Focusing => -1.0,
            Sign::Defocusing => 1.0,
        }
    }
}

/// `N` sites `x_m = x_0 + m h`, `m = 0..N`, with period `L = N h` and the box
/// centered on the origin (`x_0 = -L/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicLattice {
    h: f64,
    n_sites: usize,
}

impl PeriodicLattice {
    pub fn new(h: f64, n_sites: usize) -> Result<Self> {
        check_mesh(h)?;
        if n_sites < 2 || !n_sites.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n_sites));
        }
        Ok(Self { h, n_sites })
    }

    /// Lattice of mesh `h` covering a box of length `length`; `length / h`
    /// must be an integer power of two.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    pub fn with_length(length: f64, h: f64) -> Result<Self> {
        check_mesh(h)?;
        let ratio = length / h;
        let n = libm::round(ratio);
        if !(n >= 2.0) || (ratio - n).abs() > 1e-9 * n || n > (1u64 << 40) as f64 {
            return Err(Error::InvalidArgument(format!(
                "box length {length} is not a whole number of cells of size {h}"
            )));
        }
        Self::new(h, n as usize)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn length(&self) -> f64 {
        self.h * self.n_sites as f64
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.length()
    }

    pub fn position(&self, m: usize) -> f64 {
        self.origin() + m as f64 * self.h
    }

    /// Dimensionless wavenumber `k_j = 2 pi j / N` folded into `(-pi, pi]`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n_sites;
        let jj = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        2.0 * PI * jj / n as f64
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n_sites).map(|j| self.wavenumber(j)).collect()
    }

    /// Whether two lattices describe the same box (same period and origin).
    pub fn same_box(&self, other: &PeriodicLattice) -> bool {
        (self.length() - other.length()).abs() <= 1e-12 * self.length()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    lattice: PeriodicLattice,
    values: Vec<Complex64>,
}

impl LatticeField {
    pub fn new(lattice: PeriodicLattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.n_sites() {
            return Err(Error::LengthMismatch { expected: lattice.n_sites(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { lattice, values })
    }

    /// Unchecked constructor for values produced by finite arithmetic on
    /// finite inputs.
    pub(crate) fn from_parts(lattice: PeriodicLattice, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), lattice.n_sites());
        Self { lattice, values }
    }

    pub fn zeros(lattice: PeriodicLattice) -> Self {
        Self::from_parts(lattice, alloc::vec![Complex64::new(0.0, 0.0); lattice.n_sites()])
    }

    /// Samples `f(x_m)` at the lattice sites.
    pub fn from_fn<F: Fn(f64) -> Complex64>(lattice: PeriodicLattice, f: F) -> Result<Self> {
        Self::new(lattice, (0..lattice.n_sites()).map(|m| f(lattice.position(m))).collect())
    }

    /// Discrete plane wave `e^{i k_j m}`.
    pub fn plane_mode(lattice: PeriodicLattice, j: usize) -> Self {
        let k = lattice.wavenumber(j);
        Self::from_parts(
            lattice,
            (0..lattice.n_sites()).map(|m| Complex64::new(0.0, k * m as f64).exp()).collect(),
        )
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn h(&self) -> f64 {
        self.lattice.h()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self::from_parts(self.lattice, self.values.iter().map(|v| v * a).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_parts(
            self.lattice,
            self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Cyclic shift: `(S u)_m = u_{m - shift}`.
    pub fn shift(&self, shift: usize) -> Self {
        let n = self.len();
        let s = shift % n;
        Self::from_parts(self.lattice, (0..n).map(|m| self.values[(m + n - s) % n]).collect())
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::GridMismatch(format!(
                "fields live on different lattices (h = {} / {}, N = {} / {})",
                self.h(),
                other.h(),
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }
}

/// Unitary DFT coefficients `u^_j = N^{-1/2} sum_m u_m e^{-i k_j m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: PeriodicLattice,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(lattice: PeriodicLattice, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != lattice.n_sites() {
            return Err(Error::LengthMismatch {
                expected: lattice.n_sites(),
                got: coefficients.len(),
            });
        }
        Ok(Self { lattice, coefficients })
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        self.lattice.wavenumber(j)
    }
}

pub fn dft(field: &LatticeField) -> SpectralField {
    let plan = FftPlan::new(field.len()).expect("lattice sizes are powers of two");
    let mut c = field.values.clone();
    plan.forward_unitary(&mut c);
    SpectralField { lattice: field.lattice, coefficients: c }
}

pub fn idft(spec: &SpectralField) -> LatticeField {
    let plan = FftPlan::new(spec.coefficients.len()).expect("lattice sizes are powers of two");
    let mut v = spec.coefficients.clone();
    plan.inverse_unitary(&mut v);
    LatticeField::from_parts(spec.lattice, v)
}

/// `L^J_h` on a fixed lattice: multiplier `lambda_j` together with the ring
/// couplings used by the direct-summation route.
#[derive(Debug, Clone)]
pub struct LatticeOperator {
    lattice: PeriodicLattice,
    beta: f64,
    mode: Periodization,
    multiplier: Vec<f64>,
    couplings: Vec<f64>,
    plan: FftPlan,
}

impl LatticeOperator {
    pub fn new(kernel: &Kernel, lattice: PeriodicLattice, mode: Periodization) -> Result<Self> {
        let beta = kernel.beta(lattice.h())?;
        let n = lattice.n_sites();
        let plan = FftPlan::new(n)?;
        let couplings = kernel.ring_couplings(n, mode);
        let multiplier = match mode {
            Periodization::Images => {
                (0..n).map(|j| kernel.omega(lattice.wavenumber(j)) / beta).collect()
            }
            Periodization::Truncated => {
                // lambda_j = sum_d c_d (1 - cos d k_j) = sum_d c_d - Re(DFT c)_j
                let total: f64 = couplings.iter().sum();
                let mut c: Vec<Complex64> =
                    couplings.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                plan.forward(&mut c);
                c.iter().map(|z| (total - z.re).max(0.0) / beta).collect()
            }
        };
        Ok(Self { lattice, beta, mode, multiplier, couplings, plan })
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> Periodization {
        self.mode
    }

    /// `omega(k_j) / beta(h)` in DFT order.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    /// Ring couplings `c_d` (before division by `beta`).
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn plan(&self) -> &FftPlan {
        &self.plan
    }

    /// Spectral application: transform, multiply, transform back.
    pub fn apply(&self, field: &LatticeField) -> Result<LatticeField> {
        self.check_lattice(field)?;
        let mut v = field.values.clone();
        self.plan.forward_unitary(&mut v);
        for (c, &m) in v.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        self.plan.inverse_unitary(&mut v);
        Ok(LatticeField::from_parts(self.lattice, v))
    }

    /// `O(N^2)` direct summation `beta^{-1} sum_d c_d (u_m - u_{m-d})`.
    pub fn apply_direct(&self, field: &LatticeField) -> Result<LatticeField> {
        self.check_lattice(field)?;
        let n = field.len();
        let u = &field.values;
        let out = (0..n)
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for d in 1..n {
                    acc += (u[m] - u[(m + n - d) % n]) * self.couplings[d];
                }
                acc / self.beta
            })
            .collect();
        Ok(LatticeField::from_parts(self.lattice, out))
    }

    /// Quadratic form `(u, L u)_h = h sum_j lambda_j |u^_j|^2`.
    pub fn quadratic_form(&self, field: &LatticeField) -> Result<f64> {
        self.check_lattice(field)?;
        let mut v = field.values.clone();
        self.plan.forward_unitary(&mut v);
        Ok(field.h() * v.iter().zip(&self.multiplier).map(|(c, m)| m * c.norm_sqr()).sum::<f64>())
    }

    fn check_lattice(&self, field: &LatticeField) -> Result<()> {
        if field.lattice != self.lattice {
            return Err(Error::GridMismatch(format!(
                "operator built for h = {}, N = {}; field has h = {}, N = {}",
                self.lattice.h(),
                self.lattice.n_sites(),
                field.h(),
                field.len()
            )));
        }
        Ok(())
    }
}

/// `L^J_h u` with image-summed periodization.
pub fn apply_lj(field: &LatticeField, kernel: &Kernel) -> Result<LatticeField> {
    LatticeOperator::new(kernel, field.lattice, Periodization::Images)?.apply(field)
}

/// `(u, v)_h = h sum_m conj(u_m) v_m`.
pub fn inner(u: &LatticeField, v: &LatticeField) -> Result<Complex64> {
    u.check_same(v)?;
    Ok(u.values.iter().zip(&v.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * u.h())
}

#[derive(Debug, Clone, Copy)]
pub enum NormKind<'a> {
    L2,
    L4,
    Linf,
    HSigma(f64),
    HJ(&'a Kernel),
    HTildeOne,
    DualHSigma(f64),
}

pub fn discrete_norm(field: &LatticeField, kind: NormKind<'_>) -> Result<f64> {
    match kind {
        NormKind::L2 => Ok(l2_norm(field)),
        NormKind::L4 => Ok(l4_norm(field)),
        NormKind::Linf => Ok(linf_norm(field)),
        NormKind::HSigma(sigma) => h_sigma_norm(field, sigma),
        NormKind::HJ(kernel) => hj_norm(field, kernel),
        NormKind::HTildeOne => Ok(h_tilde_one_norm(field)),
        NormKind::DualHSigma(sigma) => dual_h_sigma_norm(field, sigma),
    }
}

pub fn l2_norm(field: &LatticeField) -> f64 {
    libm::sqrt(discrete_mass(field))
}

pub fn l4_norm(field: &LatticeField) -> f64 {
    let s: f64 = field.values.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum();
    libm::sqrt(libm::sqrt(field.h() * s))
}

pub fn linf_norm(field: &LatticeField) -> f64 {
    field.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `N(u) = h sum |u_m|^2`.
pub fn discrete_mass(field: &LatticeField) -> f64 {
    field.h() * field.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
}

fn check_sigma(sigma: f64) -> Result<()> {
    if (0.0..=1.0).contains(&sigma) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sigma must lie in [0, 1], got {sigma}")))
    }
}

/// Weight `1 + h^{-2 sigma} |k|^{2 sigma}`, read as `1` at `sigma = 0` so
/// that `H^0_h` is `L^2_h`.
pub fn sobolev_weight(h: f64, k: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        1.0
    } else {
        1.0 + libm::pow(k.abs() / h, 2.0 * sigma)
    }
}

fn weighted_spectral_norm(field: &LatticeField, weight: impl Fn(f64) -> f64) -> f64 {
    let spec = dft(field);
    let s: f64 = spec
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| weight(field.lattice.wavenumber(j)) * c.norm_sqr())
        .sum();
    libm::sqrt(field.h() * s)
}

/// `||u||_{H^sigma_h}`. For `sigma = 0` this is the `L^2_h` norm (the weight
/// `1 + |k/h|^0` is read as `1`).
pub fn h_sigma_norm(field: &LatticeField, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(l2_norm(field));
    }
    let h = field.h();
    Ok(weighted_spectral_norm(field, |k| sobolev_weight(h, k, sigma)))
}

/// Dual norm `||u||_{H^{-sigma}_h}` with inverse weight.
pub fn dual_h_sigma_norm(field: &LatticeField, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if sigma == 0.0 {
        return Ok(l2_norm(field));
    }
    let h = field.h();
    Ok(weighted_spectral_norm(field, |k| 1.0 / sobolev_weight(h, k, sigma)))
}

/// Energy norm `(||u||^2 + (u, L^J_h u))^{1/2}`.
pub fn hj_norm(field: &LatticeField, kernel: &Kernel) -> Result<f64> {
    let beta = kernel.beta(field.h())?;
    Ok(weighted_spectral_norm(field, |k| 1.0 + kernel.omega(k) / beta))
}

/// [`hj_norm`] reusing the multiplier of a prebuilt operator.
pub fn hj_norm_with(op: &LatticeOperator, field: &LatticeField) -> Result<f64> {
    if *op.lattice() != field.lattice {
        return Err(Error::GridMismatch("operator and field lattices differ".into()));
    }
    let spec = dft(field);
    let s: f64 = spec
        .coefficients
        .iter()
        .zip(op.multiplier())
        .map(|(c, m)| (1.0 + m) * c.norm_sqr())
        .sum();
    Ok(libm::sqrt(field.h() * s))
}

/// `(||u||^2 + ||D^+ u||^2)^{1/2}` via the multiplier `1 + h^{-2} 4 sin^2(k/2)`.
pub fn h_tilde_one_norm(field: &LatticeField) -> f64 {
    let h = field.h();
    weighted_spectral_norm(field, |k| {
        let s = libm::sin(0.5 * k);
        1.0 + 4.0 * s * s / (h * h)
    })
}

/// `E(u) = (1/2)(u, L u)_h +- (1/4)||u||_{L^4_h}^4`, `+` for defocusing.
pub fn discrete_energy(field: &LatticeField, kernel: &Kernel, sign: Sign) -> Result<f64> {
    let op = LatticeOperator::new(kernel, field.lattice, Periodization::Images)?;
    energy_with(&op, field, sign)
}

pub fn energy_with(op: &LatticeOperator, field: &LatticeField, sign: Sign) -> Result<f64> {
    let quad = op.quadratic_form(field)?;
    let l4 = l4_norm(field);
    Ok(0.5 * quad + 0.25 * sign.factor() * l4 * l4 * l4 * l4)
}

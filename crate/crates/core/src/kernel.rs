//! Interaction kernels `J_n`, the scaling `beta(h)`, the dispersion symbol
//! `omega(k) = 2 sum_n J_n (1 - cos nk)` and its small-`k` asymptotics.
//!
//! Every kernel is a finite explicit head followed by one of three tails:
//! nothing (finite support), a geometric tail, or an exact power law
//! `A n^{-1-2s}`. Power-law tails are summed to rounding accuracy:
//!
//! * for `k N <= 1` by Euler–Maclaurin on `x^{-q}(1 - cos kx)`, with the
//!   integral `int_N^inf` reduced to a convergent power series plus a
//!   per-kernel constant evaluated once by contour-rotated quadrature;
//! * otherwise by splitting `1 - cos` into a zeta tail (Euler–Maclaurin) and
//!   an oscillatory tail `sum n^{-q} e^{ink}` expanded in derivatives of
//!   `n^{-q}` against the Abel sums `sum m^j z^m`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, hurwitz_zeta, power_tail_from, rising, BERNOULLI_OVER_FACTORIAL};

/// Default number of terms summed explicitly before a tail correction.
pub const DEFAULT_EVAL_CUTOFF: usize = 100_000;

/// Decay class `s` of a kernel, `J in K_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelClass {
    Finite(f64),
    Infinite,
}

impl KernelClass {
    pub fn value(self) -> f64 {
        match self {
            KernelClass::Finite(s) => s,
            KernelClass::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `J_n = n^{-1-2s}`.
    PurePower { s: f64 },
    /// `J_1 = 1`, all other couplings zero.
    NearestNeighbor,
    /// `J_n = exp(-rate (n - 1))`, normalized so that `J_1 = 1`.
    Exponential { rate: f64 },
    /// Explicit `J_1..J_m`. With a finite declared class `s` the sequence is
    /// continued by `A n^{-1-2s}`, `A = J_m m^{1+2s}`; with class infinity it
    /// is zero beyond the table.
    Table { values: Vec<f64>, declared_class: KernelClass },
}

/// Which asymptotic regime `omega(k)` falls into as `k -> 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `1/2 < s < 1`, `omega ~ |k|^{2s}`.
    Sub1,
    /// `s = 1`, `omega ~ (-log|k|) k^2`.
    Log,
    /// `s > 1` or `s = infinity`, `omega ~ k^2`.
    Super1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingClass {
    /// Limit exponent of the fractional Laplacian, in `(1/2, 1]`.
    pub alpha: f64,
    pub regime: Regime,
    pub class: KernelClass,
}

impl ScalingClass {
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    pub fn from_class(class: KernelClass) -> Result<Self> {
        let s = class.value();
        if !(s > 0.5) {
            return Err(Error::ClassOutOfRange(s));
        }
        let (alpha, regime) = if s < 1.0 {
            (s, Regime::Sub1)
        } else if s == 1.0 {
            (1.0, Regime::Log)
        } else {
            (1.0, Regime::Super1)
        };
        Ok(Self { alpha, regime, class })
    }

    /// Comparison function `delta(k)`; errors for `k = 0` and, in the
    /// logarithmic regime, for `|k| >= 1`.
    pub fn delta(&self, k: f64) -> Result<f64> {
        let a = k.abs();
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("delta(k) needs k != 0, got {k}")));
        }
        match self.regime {
            Regime::Sub1 => Ok(libm::pow(a, 2.0 * self.alpha)),
            Regime::Log => {
                if a >= 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "logarithmic delta(k) needs 0 < |k| < 1, got {k}"
                    )));
                }
                Ok(-libm::log(a) * a * a)
            }
            Regime::Super1 => Ok(a * a),
        }
    }

    /// Exponent `p` of the leading correction `omega/delta - c ~ k^p`, or
    /// `None` in the logarithmic regime where the correction is `1/(-log k)`.
    pub fn correction_exponent(&self) -> Option<f64> {
        match (self.regime, self.class) {
            (Regime::Sub1, _) => Some(2.0 - 2.0 * self.alpha),
            (Regime::Log, _) => None,
            (Regime::Super1, KernelClass::Finite(s)) => Some((2.0 * s - 2.0).min(2.0)),
            (Regime::Super1, KernelClass::Infinite) => Some(2.0),
        }
    }

    /// Variable in which `omega(k)/delta(k)` approaches its limit linearly.
    pub fn correction_variable(&self, k: f64) -> f64 {
        match self.correction_exponent() {
            Some(p) => libm::pow(k.abs(), p),
            None => -1.0 / libm::log(k.abs()),
        }
    }
}

/// `delta(k)` for a scaling class.
pub fn delta(scaling: &ScalingClass, k: f64) -> Result<f64> {
    scaling.delta(k)
}

#[derive(Debug, Clone, PartialEq)]
enum Tail {
    None,
    Geometric { ratio: f64 },
    Power(PowerTail),
}

#[derive(Debug, Clone, PartialEq)]
struct PowerTail {
    /// First index carried by the tail.
    start: usize,
    amplitude: f64,
    /// `q = 1 + 2s`.
    q: f64,
    /// `int_1^inf y^{-q} (1 - cos y) dy`.
    g_one: f64,
}

/// A validated interaction kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    spec: KernelSpec,
    class: KernelClass,
    tail_constant: f64,
    j1: f64,
    eval_cutoff: usize,
    /// Explicit couplings `J_1..J_{head.len()}`.
    head: Vec<f64>,
    tail: Tail,
}

/// Builds a kernel from its spec. `eval_cutoff` caps the number of terms
/// summed explicitly where no closed-form tail applies.
pub fn build_kernel(spec: KernelSpec, eval_cutoff: usize) -> Result<Kernel> {
    Kernel::new(spec, eval_cutoff)
}

impl Kernel {
    pub fn new(spec: KernelSpec, eval_cutoff: usize) -> Result<Self> {
        if eval_cutoff == 0 {
            return Err(Error::InvalidArgument("eval_cutoff must be at least 1".into()));
        }
        let (class, tail_constant, head, tail) = match &spec {
            KernelSpec::PurePower { s } => {
                let s = *s;
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidKernel(format!("pure power needs s > 0, got {s}")));
                }
                (KernelClass::Finite(s), 1.0, Vec::new(), Tail::Power(PowerTail::new(1, 1.0, s)))
            }
            KernelSpec::NearestNeighbor => (KernelClass::Infinite, 0.0, vec![1.0], Tail::None),
            KernelSpec::Exponential { rate } => {
                let rate = *rate;
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidKernel(format!(
                        "exponential kernel needs rate > 0, got {rate}"
                    )));
                }
                (
                    KernelClass::Infinite,
                    0.0,
                    Vec::new(),
                    Tail::Geometric { ratio: libm::exp(-rate) },
                )
            }
            KernelSpec::Table { values, declared_class } => {
                if values.is_empty() {
                    return Err(Error::InvalidKernel("empty kernel table".into()));
                }
                if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::InvalidKernel(format!(
                        "table entry J_{} = {} must be finite and nonnegative",
                        i + 1,
                        values[i]
                    )));
                }
                if values[0] <= 0.0 {
                    return Err(Error::InvalidKernel(
                        "J_1 must be positive (neighboring sites must interact)".into(),
                    ));
                }
                match *declared_class {
                    KernelClass::Infinite => {
                        (KernelClass::Infinite, 0.0, values.clone(), Tail::None)
                    }
                    KernelClass::Finite(s) => {
                        if !(s > 0.0 && s.is_finite()) {
                            return Err(Error::InvalidKernel(format!(
                                "declared class must be positive, got {s}"
                            )));
                        }
                        let m = values.len();
                        let last = values[m - 1];
                        if last <= 0.0 {
                            return Err(Error::InvalidKernel(
                                "a finite declared class needs a positive last table entry".into(),
                            ));
                        }
                        let amplitude = last * libm::pow(m as f64, 1.0 + 2.0 * s);
                        (
                            KernelClass::Finite(s),
                            amplitude,
                            values.clone(),
                            Tail::Power(PowerTail::new(m + 1, amplitude, s)),
                        )
                    }
                }
            }
        };
        let mut kernel = Self { spec, class, tail_constant, j1: 0.0, eval_cutoff, head, tail };
        kernel.j1 = kernel.coupling(1);
        Ok(kernel)
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn class(&self) -> KernelClass {
        self.class
    }

    /// `A = lim n^{1+2s} J_n`; zero for class infinity.
    pub fn tail_constant(&self) -> f64 {
        self.tail_constant
    }

    pub fn j1(&self) -> f64 {
        self.j1
    }

    pub fn eval_cutoff(&self) -> usize {
        self.eval_cutoff
    }

    pub fn scaling(&self) -> Result<ScalingClass> {
        ScalingClass::from_class(self.class)
    }

    /// Coupling `J_n` for `n >= 1` (`J_0` is reported as zero).
    pub fn coupling(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        if n <= self.head.len() {
            return self.head[n - 1];
        }
        match &self.tail {
            Tail::None => 0.0,
            Tail::Geometric { ratio } => libm::pow(*ratio, (n - 1) as f64),
            Tail::Power(t) => t.amplitude * libm::pow(n as f64, -t.q),
        }
    }

    /// `sum_{n >= 1} J_n`.
    pub fn total_coupling(&self) -> f64 {
        let head: f64 = self.head.iter().rev().sum();
        head + match &self.tail {
            Tail::None => 0.0,
            Tail::Geometric { ratio } => 1.0 / (1.0 - ratio),
            Tail::Power(t) => t.amplitude * hurwitz_zeta(t.q, t.start as f64),
        }
    }

    /// Scaling `beta(h)`: `h^{2s}`, `(-log h) h^2` or `h^2` by regime.
    pub fn beta(&self, h: f64) -> Result<f64> {
        check_mesh(h)?;
        let scaling = self.scaling()?;
        Ok(match scaling.regime {
            Regime::Sub1 => libm::pow(h, 2.0 * scaling.alpha),
            Regime::Log => -libm::log(h) * h * h,
            Regime::Super1 => h * h,
        })
    }

    /// Dispersion symbol `omega(k) = 2 sum_{n>=1} J_n (1 - cos nk)`, even and
    /// `2 pi`-periodic in `k`.
    pub fn omega(&self, k: f64) -> f64 {
        let k = reduce_wavenumber(k);
        if k == 0.0 {
            return 0.0;
        }
        let mut head = 0.0;
        for (i, &j) in self.head.iter().enumerate().rev() {
            head += j * one_minus_cos((i + 1) as f64 * k);
        }
        let tail = match &self.tail {
            Tail::None => 0.0,
            Tail::Geometric { ratio } => geometric_tail(*ratio, k, self.eval_cutoff),
            Tail::Power(t) => t.amplitude * t.sum_one_minus_cos(k),
        };
        2.0 * (head + tail)
    }

    /// Plain truncated series `2 sum_{n=1}^{terms} J_n (1 - cos nk)`, no tail.
    pub fn omega_partial(&self, k: f64, terms: usize) -> f64 {
        let k = reduce_wavenumber(k);
        let mut acc = 0.0;
        for n in (1..=terms).rev() {
            acc += self.coupling(n) * one_minus_cos(n as f64 * k);
        }
        2.0 * acc
    }

    /// Limiting constant `c = lim omega(k)/delta(k)` in closed form.
    pub fn limit_constant(&self) -> Result<f64> {
        let scaling = self.scaling()?;
        match scaling.regime {
            Regime::Sub1 => {
                let s = scaling.alpha;
                Ok(2.0 * self.tail_constant * sub1_integral_constant(s))
            }
            Regime::Log => Ok(self.tail_constant),
            Regime::Super1 => {
                let moment = self.second_moment();
                if moment.is_finite() {
                    Ok(moment)
                } else {
                    Err(Error::SeriesDiverges)
                }
            }
        }
    }

    /// `sum n^2 J_n`, infinite when the series diverges.
    pub fn second_moment(&self) -> f64 {
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .rev()
            .map(|(i, &j)| ((i + 1) * (i + 1)) as f64 * j)
            .sum();
        head + match &self.tail {
            Tail::None => 0.0,
            Tail::Geometric { ratio } => {
                let r = *ratio;
                (1.0 + r) / ((1.0 - r) * (1.0 - r) * (1.0 - r))
            }
            Tail::Power(t) if t.q - 2.0 > 1.0 => {
                t.amplitude * hurwitz_zeta(t.q - 2.0, t.start as f64)
            }
            Tail::Power(_) => f64::INFINITY,
        }
    }

    /// Ratios `omega(k_j)/delta(k_j)` on `k_j = 2^{-j}` for `j` in `ladder`.
    pub fn symbol_ratios(&self, ladder: core::ops::RangeInclusive<u32>) -> Result<Vec<(f64, f64)>> {
        let scaling = self.scaling()?;
        ladder
            .map(|j| {
                let k = libm::ldexp(1.0, -(j as i32));
                Ok((k, self.omega(k) / scaling.delta(k)?))
            })
            .collect()
    }

    /// Numerical limit of `omega/delta` by one Richardson step on the last two
    /// rungs of `k_j = 2^{-j}`, `j = 6..=16`.
    pub fn extrapolated_limit_constant(&self) -> Result<f64> {
        self.extrapolated_limit_on(6..=16)
    }

    pub fn extrapolated_limit_on(&self, ladder: core::ops::RangeInclusive<u32>) -> Result<f64> {
        let scaling = self.scaling()?;
        let ratios = self.symbol_ratios(ladder)?;
        if ratios.len() < 2 {
            return Err(Error::InvalidArgument("extrapolation needs two ladder points".into()));
        }
        let (k1, r1) = ratios[ratios.len() - 2];
        let (k2, r2) = ratios[ratios.len() - 1];
        Ok(richardson(scaling.correction_variable(k1), r1, scaling.correction_variable(k2), r2))
    }

    /// Couplings `c_d`, `d = 0..n_sites`, of the ring of `n_sites` sites, such
    /// that `(L u)_m = beta^{-1} sum_d c_d (u_m - u_{m-d})`.
    pub fn ring_couplings(&self, n_sites: usize, mode: Periodization) -> Vec<f64> {
        let n = n_sites;
        let mut c = vec![0.0; n];
        match mode {
            Periodization::Images => {
                for (d, slot) in c.iter_mut().enumerate().skip(1) {
                    *slot = self.progression_sum(d, n) + self.progression_sum(n - d, n);
                }
            }
            Periodization::Truncated => {
                for (d, slot) in c.iter_mut().enumerate().skip(1) {
                    *slot = self.coupling(d.min(n - d));
                }
            }
        }
        c
    }

    /// `sum_{l >= 0} J_{a + l n}` for `a >= 1`.
    fn progression_sum(&self, a: usize, n: usize) -> f64 {
        let mut acc = 0.0;
        let mut idx = a;
        while idx <= self.head.len() {
            acc += self.head[idx - 1];
            idx += n;
        }
        acc + match &self.tail {
            Tail::None => 0.0,
            Tail::Geometric { ratio } => {
                libm::pow(*ratio, (idx - 1) as f64) / (1.0 - libm::pow(*ratio, n as f64))
            }
            Tail::Power(t) => {
                while idx < t.start {
                    idx += n;
                }
                let nf = n as f64;
                t.amplitude * libm::pow(nf, -t.q) * hurwitz_zeta(t.q, idx as f64 / nf)
            }
        }
    }
}

/// How the infinite-lattice kernel is placed on a ring of `N` sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Periodization {
    /// Sum all periodic images; the ring multiplier equals `omega(k_j)`.
    #[default]
    Images,
    /// Keep only distances up to `N/2`.
    Truncated,
}

/// `beta(h)` for `kernel`.
pub fn beta(kernel: &Kernel, h: f64) -> Result<f64> {
    kernel.beta(h)
}

pub fn omega(kernel: &Kernel, k: f64) -> f64 {
    kernel.omega(k)
}

pub fn limit_constant_c(kernel: &Kernel) -> Result<f64> {
    kernel.limit_constant()
}

pub(crate) fn check_mesh(h: f64) -> Result<()> {
    if h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidMesh(h))
    }
}

/// `C_s = int_0^inf (1 - cos x) x^{-1-2s} dx = pi / (4 s Gamma(2s) sin(s pi))`
/// for `0 < s < 1`.
pub fn sub1_integral_constant(s: f64) -> f64 {
    PI / (4.0 * s * libm::tgamma(2.0 * s) * libm::sin(s * PI))
}

/// One Richardson step: the value at `x = 0` of the line through
/// `(x1, r1)` and `(x2, r2)`.
pub fn richardson(x1: f64, r1: f64, x2: f64, r2: f64) -> f64 {
    (x2 * r1 - x1 * r2) / (x2 - x1)
}

/// Maps `k` to `|k|` reduced into `[0, pi]`.
pub fn reduce_wavenumber(k: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut r = libm::fmod(k.abs(), two_pi);
    if r > PI {
        r = two_pi - r;
    }
    r
}

/// `1 - cos x` without cancellation near zero.
#[inline]
pub(crate) fn one_minus_cos(x: f64) -> f64 {
    let s = libm::sin(0.5 * x);
    2.0 * s * s
}

/// `sum_{n>=1} r^{n-1} (1 - cos nk)`: explicit terms up to `cutoff`, then the
/// exact geometric remainder.
fn geometric_tail(r: f64, k: f64, cutoff: usize) -> f64 {
    let mut terms = 1usize;
    let mut w = 1.0;
    while terms < cutoff && w > 1e-18 {
        w *= r;
        terms += 1;
    }
    let mut acc = 0.0;
    let mut weight = libm::pow(r, (terms - 1) as f64);
    for n in (1..=terms).rev() {
        acc += weight * one_minus_cos(n as f64 * k);
        weight /= r;
    }
    // sum_{n > N} r^{n-1} (1 - cos nk) = r^N/(1-r) - Re(z^{N+1} r^N / (1 - r z))
    let rn = libm::pow(r, terms as f64);
    if rn == 0.0 {
        return acc;
    }
    let z = Complex64::new(libm::cos(k), libm::sin(k));
    let zn1 = Complex64::new(0.0, (terms + 1) as f64 * k).exp();
    let rem = rn / (1.0 - r) - (zn1 * rn / (Complex64::new(1.0, 0.0) - z * r)).re;
    acc + rem
}

impl PowerTail {
    fn new(start: usize, amplitude: f64, s: f64) -> Self {
        let q = 1.0 + 2.0 * s;
        Self { start, amplitude, q, g_one: g_one(q) }
    }

    /// `sum_{n >= start} n^{-q} (1 - cos nk)` for `k` in `(0, pi]`.
    fn sum_one_minus_cos(&self, k: f64) -> f64 {
        let q = self.q;
        let na = self.start.max(16);
        if k * na as f64 <= 1.0 {
            let mut acc = 0.0;
            for n in (self.start..na).rev() {
                acc += libm::pow(n as f64, -q) * one_minus_cos(n as f64 * k);
            }
            acc + self.em_oscillating(k, na)
        } else {
            let nb = self.start.max(libm::ceil(64.0 / libm::sin(0.5 * k)) as usize);
            let mut acc = 0.0;
            for n in (self.start..nb).rev() {
                acc += libm::pow(n as f64, -q) * one_minus_cos(n as f64 * k);
            }
            acc + power_tail_from(q, nb as f64) - twisted_tail(q, k, nb).re
        }
    }

    /// Euler–Maclaurin for `sum_{n >= N} x^{-q} (1 - cos kx)`, `kN <= 1`.
    fn em_oscillating(&self, k: f64, n: usize) -> f64 {
        let q = self.q;
        let x = n as f64;
        let integral = libm::pow(k, q - 1.0) * self.big_g(k * x);
        let fx = libm::pow(x, -q) * one_minus_cos(k * x);
        let mut corr = 0.0;
        for (j, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
            corr += b * self.derivative(k, x, 2 * j + 1);
        }
        integral + 0.5 * fx - corr
    }

    /// `d^m/dx^m [x^{-q} (1 - cos kx)]` by the Leibniz rule.
    fn derivative(&self, k: f64, x: f64, m: usize) -> f64 {
        let q = self.q;
        let base = libm::pow(x, -q);
        let mut binom = 1.0;
        let mut acc = 0.0;
        for i in 0..=m {
            let r = m - i;
            let p = if i % 2 == 0 { 1.0 } else { -1.0 } * rising(q, i) * base * libm::pow(x, -(i as f64));
            let g = if r == 0 {
                one_minus_cos(k * x)
            } else {
                -libm::pow(k, r as f64) * libm::cos(k * x + r as f64 * 0.5 * PI)
            };
            acc += binom * p * g;
            binom = binom * (m - i) as f64 / (i + 1) as f64;
        }
        acc
    }

    /// `G(a) = int_a^inf y^{-q} (1 - cos y) dy` for `0 < a <= 1`.
    fn big_g(&self, a: f64) -> f64 {
        let q = self.q;
        let ln_a = libm::log(a);
        let mut acc = 0.0;
        let mut fact = 1.0;
        for m in 1..=20usize {
            fact *= ((2 * m - 1) * (2 * m)) as f64;
            let e = 2.0 * m as f64 - q + 1.0;
            let piece = if e.abs() < 1e-12 { -ln_a } else { -libm::expm1(e * ln_a) / e };
            let term = piece / fact;
            acc += if m % 2 == 1 { term } else { -term };
            if term.abs() < 1e-19 * acc.abs() {
                break;
            }
        }
        self.g_one + acc
    }
}

/// `int_1^inf y^{-q} (1 - cos y) dy`. The oscillatory half is rotated onto
/// `y = 1 + it`, giving `i e^{i} int_0^inf (1+it)^{-q} e^{-t} dt`.
fn g_one(q: f64) -> f64 {
    let phi = quad::integrate_complex(
        |t| Complex64::new(1.0, t).powf(-q) * libm::exp(-t),
        0.0,
        60.0,
        1e-17,
        1e-15,
    );
    let rot = Complex64::new(0.0, 1.0) * Complex64::new(libm::cos(1.0), libm::sin(1.0)) * phi;
    1.0 / (q - 1.0) - rot.re
}

/// `sum_{n >= N} n^{-q} e^{ink}` via `z^N sum_j g^{(j)}(N)/j! S_j(z)` with
/// `S_j(z) = sum_{m>=0} m^j z^m`, valid when `N |1 - z| >> q`.
fn twisted_tail(q: f64, k: f64, n: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(libm::cos(k), libm::sin(k));
    let inv = one / (one - z);
    let ratio = z * inv;
    let x = n as f64;
    let mut abel: Vec<Complex64> = Vec::with_capacity(41);
    abel.push(inv);
    let mut coeff = libm::pow(x, -q);
    let mut sum = abel[0] * coeff;
    let mut last = f64::INFINITY;
    let mut small = 0;
    for j in 1..=40usize {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut binom = 1.0;
        for (i, s) in abel.iter().enumerate() {
            acc += *s * binom;
            binom = binom * (j - i) as f64 / (i + 1) as f64;
        }
        abel.push(ratio * acc);
        coeff *= -(q + (j - 1) as f64) / (j as f64 * x);
        let term = abel[j] * coeff;
        let size = term.norm();
        sum += term;
        // Abel sums at z = -1 vanish for every even j >= 2, so a single tiny
        // term does not signal convergence.
        if size < 1e-18 * sum.norm() {
            small += 1;
            if small == 2 {
                break;
            }
            continue;
        }
        small = 0;
        if size > last {
            break;
        }
        last = size;
    }
    Complex64::new(0.0, x * k).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(s: f64) -> Kernel {
        build_kernel(KernelSpec::PurePower { s }, DEFAULT_EVAL_CUTOFF).unwrap()
    }

    #[test]
    fn build_examples() {
        let k = pp(0.75);
        assert_eq!(k.j1(), 1.0);
        assert!((k.coupling(2) - 0.176_776_695_296_636_9).abs() < 1e-15);
        assert_eq!(k.tail_constant(), 1.0);

        let nn = build_kernel(KernelSpec::NearestNeighbor, 10).unwrap();
        assert_eq!(nn.j1(), 1.0);
        assert_eq!(nn.coupling(2), 0.0);
        assert_eq!(nn.class(), KernelClass::Infinite);

        let ex = build_kernel(KernelSpec::Exponential { rate: 1.0 }, 10).unwrap();
        assert_eq!(ex.class(), KernelClass::Infinite);
        assert_eq!(ex.tail_constant(), 0.0);
    }

    #[test]
    fn build_rejects_invalid() {
        let bad = [
            KernelSpec::PurePower { s: 0.0 },
            KernelSpec::PurePower { s: -1.0 },
            KernelSpec::Exponential { rate: 0.0 },
            KernelSpec::Table { values: vec![0.0, 1.0], declared_class: KernelClass::Infinite },
            KernelSpec::Table { values: vec![1.0, -0.5], declared_class: KernelClass::Infinite },
            KernelSpec::Table { values: vec![], declared_class: KernelClass::Infinite },
        ];
        for spec in bad {
            assert!(build_kernel(spec, 10).is_err());
        }
        assert!(build_kernel(KernelSpec::NearestNeighbor, 0).is_err());
    }

    #[test]
    fn beta_examples() {
        assert!((pp(0.75).beta(0.25).unwrap() - 0.125).abs() < 1e-15);
        assert!((pp(2.0).beta(0.1).unwrap() - 0.01).abs() < 1e-15);
        let e1 = libm::exp(-1.0);
        assert!((pp(1.0).beta(e1).unwrap() - libm::exp(-2.0)).abs() < 1e-15);
        assert!(pp(0.75).beta(1.0).is_err());
        assert!(pp(0.75).beta(0.0).is_err());
        assert!(pp(0.4).beta(0.5).is_err());
    }

    #[test]
    fn delta_examples() {
        let sub = pp(0.75).scaling().unwrap();
        assert!((sub.delta(0.1).unwrap() - 0.031_622_776_601_683_8).abs() < 1e-15);
        let log = pp(1.0).scaling().unwrap();
        assert!((log.delta(0.1).unwrap() - 0.023_025_850_929_940_46).abs() < 1e-15);
        let sup = pp(1.5).scaling().unwrap();
        assert!((sup.delta(0.1).unwrap() - 0.01).abs() < 1e-15);
        assert!(sup.delta(0.0).is_err());
        assert!(log.delta(1.5).is_err());
    }

    #[test]
    fn omega_basics() {
        let nn = build_kernel(KernelSpec::NearestNeighbor, 10).unwrap();
        assert!((nn.omega(PI) - 4.0).abs() < 1e-15);
        assert_eq!(pp(0.75).omega(0.0), 0.0);
        assert_eq!(pp(0.75).omega(2.0 * PI), 0.0);
        assert_eq!(pp(0.75).omega(0.3), pp(0.75).omega(-0.3));
    }

    #[test]
    fn power_tail_regimes_agree_at_switch() {
        // Both tail routes evaluated on either side of k = 1/16 must join
        // smoothly; compare against a brute-force sum with integral tail.
        let k = pp(0.75);
        for &kk in &[0.0624, 0.0626, 0.3, 1.0, 3.0] {
            let n = 4_000_000usize;
            let brute = k.omega_partial(kk, n) + 2.0 * libm::pow(n as f64 + 0.5, -1.5) / 1.5;
            let v = k.omega(kk);
            assert!((v - brute).abs() < 5e-9 * v, "k={kk} v={v} brute={brute}");
        }
    }

    #[test]
    fn omega_at_pi_is_an_odd_zeta_sum() {
        // omega(pi) = 4 sum_{n odd} n^{-q} = 4 (1 - 2^{-q}) zeta(q)
        for &s in &[0.75, 1.0, 1.5, 3.0] {
            let q = 1.0 + 2.0 * s;
            let expected = 4.0 * (1.0 - libm::pow(2.0, -q)) * quad::riemann_zeta(q);
            let v = pp(s).omega(PI);
            assert!((v - expected).abs() < 1e-14 * expected, "s={s}: {v} vs {expected}");
        }
    }

    #[test]
    fn exponential_matches_closed_form() {
        let ex = build_kernel(KernelSpec::Exponential { rate: 0.7 }, DEFAULT_EVAL_CUTOFF).unwrap();
        let r: f64 = libm::exp(-0.7);
        for &kk in &[1e-4, 0.01, 0.5, 2.0, PI] {
            // 1/(1-r) - Re(z/(1-rz)) = Re((1-z)/((1-r)(1-rz))), free of cancellation
            let z = Complex64::new(libm::cos(kk), libm::sin(kk));
            let one_minus_z = Complex64::new(one_minus_cos(kk), -libm::sin(kk));
            let closed =
                2.0 * (one_minus_z / ((1.0 - r) * (Complex64::new(1.0, 0.0) - z * r))).re;
            let v = ex.omega(kk);
            assert!((v - closed).abs() < 1e-12 * v.max(1e-8), "k={kk}: {v} vs {closed}");
        }
    }

    #[test]
    fn table_with_power_tail_continues_the_sequence() {
        let s = 0.75;
        let vals: Vec<f64> = (1..=5).map(|n| libm::pow(n as f64, -1.0 - 2.0 * s)).collect();
        let t = build_kernel(
            KernelSpec::Table { values: vals, declared_class: KernelClass::Finite(s) },
            DEFAULT_EVAL_CUTOFF,
        )
        .unwrap();
        assert!((t.tail_constant() - 1.0).abs() < 1e-12);
        let p = pp(s);
        for &kk in &[1e-5, 1e-2, 0.5, 3.0] {
            assert!((t.omega(kk) - p.omega(kk)).abs() < 1e-12 * p.omega(kk));
        }
        assert!((t.limit_constant().unwrap() - p.limit_constant().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn limit_constants() {
        let nn = build_kernel(KernelSpec::NearestNeighbor, 10).unwrap();
        assert_eq!(nn.limit_constant().unwrap(), 1.0);
        assert!((pp(1.5).limit_constant().unwrap() - PI * PI / 6.0).abs() < 1e-13);
        assert_eq!(pp(1.0).limit_constant().unwrap(), 1.0);
        let c = pp(0.75).limit_constant().unwrap();
        let expected = 2.0 * PI / (3.0 * libm::tgamma(1.5) * libm::sin(0.75 * PI));
        assert!((c - expected).abs() < 1e-13);
        assert!(pp(0.5).limit_constant().is_err());
    }

    #[test]
    fn ring_couplings_sum_to_periodized_symbol() {
        let n = 64;
        for spec in [
            KernelSpec::NearestNeighbor,
            KernelSpec::Exponential { rate: 0.4 },
            KernelSpec::PurePower { s: 0.75 },
        ] {
            let k = build_kernel(spec, DEFAULT_EVAL_CUTOFF).unwrap();
            let c = k.ring_couplings(n, Periodization::Images);
            for j in [1usize, 5, 17, 32] {
                let kj = 2.0 * PI * j as f64 / n as f64;
                let direct: f64 = (1..n).map(|d| c[d] * (1.0 - libm::cos(d as f64 * kj))).sum();
                let w = k.omega(kj);
                assert!((direct - w).abs() < 1e-12 * w, "{:?} j={j}: {direct} vs {w}", k.spec());
            }
        }
    }
}

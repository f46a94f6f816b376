//! Numerical checks of the identities, uniform inequalities and limits
//! satisfied by the lattice operators. Each check returns a [`CheckReport`]
//! whose verdict is decided by a fixed quantitative criterion.
//!
//! "Uniform in h" is tested as: the per-mesh maxima of a ratio over a seeded
//! random family stay within 1.5x of their median across the ladder.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fft::FftPlan;
use crate::interp::{
    continuum_lj, continuum_norm, discretize, fractional_laplacian, p_linear, ContinuumFunction,
    ContinuumNorm, Provenance,
};
use crate::kernel::{richardson, Kernel, KernelClass, KernelSpec, Regime};
use crate::lattice::{
    dual_h_sigma_norm, h_sigma_norm, h_tilde_one_norm, hj_norm_with, l2_norm, l4_norm, linf_norm,
    LatticeField, LatticeOperator, PeriodicLattice,
};
use crate::kernel::Periodization;

/// Default ladder `h = 2^-4 .. 2^-10` for the uniformity checks.
pub fn default_h_ladder() -> Vec<f64> {
    (4..=10).map(|j| libm::ldexp(1.0, -j)).collect()
}

/// Ladder `h = 2^-3 .. 2^-7` for the operator limit.
pub fn operator_h_ladder() -> Vec<f64> {
    (3..=7).map(|j| libm::ldexp(1.0, -j)).collect()
}

/// Spread allowed between the largest per-mesh constant and the median.
pub const UNIFORM_SPREAD: f64 = 1.5;
pub const DEFAULT_S1_SIGMA: f64 = 0.9;
pub const SYMBOL_TOLERANCE: f64 = 1e-3;
pub const LOG_SPREAD_TOLERANCE: f64 = 0.01;
pub const IBP_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    /// Kernel or family the check was run on.
    pub subject: String,
    pub h_ladder: Vec<f64>,
    /// Primary per-rung measurements (constants or errors).
    pub measured: Vec<f64>,
    /// Secondary per-rung measurements, e.g. upper constants; may be empty.
    pub secondary: Vec<f64>,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// Named scalar results.
    pub metrics: Vec<(String, f64)>,
}

impl CheckReport {
    fn new(name: &str, subject: String, h_ladder: Vec<f64>, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            subject,
            h_ladder,
            measured: Vec::new(),
            secondary: Vec::new(),
            verdict: Verdict::Fail,
            tolerance,
            metrics: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn push_metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }
}

/// Short stable label such as `pure_power(s=0.75)`.
pub fn kernel_label(spec: &KernelSpec) -> String {
    match spec {
        KernelSpec::PurePower { s } => format!("pure_power(s={s})"),
        KernelSpec::NearestNeighbor => "nearest_neighbor".to_string(),
        KernelSpec::Exponential { rate } => format!("exponential(rate={rate})"),
        KernelSpec::Table { values, declared_class } => match declared_class {
            KernelClass::Finite(s) => format!("table(len={}, s={s})", values.len()),
            KernelClass::Infinite => format!("table(len={}, s=inf)", values.len()),
        },
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (libm::log(*a), libm::log(*b)))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn bounded_across_ladder(maxima: &[f64]) -> bool {
    maxima.iter().all(|m| m.is_finite() && *m > 0.0)
        && maxima.iter().cloned().fold(0.0, f64::max) <= UNIFORM_SPREAD * median(maxima)
}

/// Geometric grid `pi 2^{-i/8}`, `i = 0..=240`, plus `k = 0`.
pub fn default_k_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=240).map(|i| PI * libm::exp2(-(i as f64) / 8.0)).collect();
    g.push(0.0);
    g
}

/// Lower constant `A = min(delta, 1)` with `delta = min(C/2, 4 J_1 k0^{2-2 alpha} / pi^2)`,
/// where `k0` is the largest grid point such that `omega / |k|^{2 alpha}` stays
/// within a factor two on `(0, k0]` and `C` is its maximum there.
pub fn predicted_lower_constant(kernel: &Kernel, k_grid: &[f64]) -> Result<f64> {
    let scaling = kernel.scaling()?;
    let alpha = scaling.alpha;
    let mut ks: Vec<f64> = k_grid.iter().map(|k| k.abs()).filter(|k| *k > 0.0 && *k <= PI).collect();
    ks.sort_by(|a, b| a.total_cmp(b));
    ks.dedup();
    let ratios: Vec<f64> =
        ks.iter().map(|&k| kernel.omega(k) / libm::pow(k, 2.0 * alpha)).collect();
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut k0 = 0.0;
    let mut c = 0.0;
    for (k, r) in ks.iter().zip(&ratios) {
        let (nlo, nhi) = (lo.min(*r), hi.max(*r));
        if nlo < 0.5 * nhi {
            break;
        }
        lo = nlo;
        hi = nhi;
        k0 = *k;
        c = nhi;
    }
    if k0 == 0.0 {
        return Err(Error::InvalidArgument("k grid too coarse to locate k0".into()));
    }
    let delta = (0.5 * c).min(4.0 * kernel.j1() / (PI * PI) * libm::pow(k0, 2.0 - 2.0 * alpha));
    Ok(delta.min(1.0))
}

/// Lower and upper constants of `1 + omega(k)/beta(h)` against
/// `1 + |k/h|^{2 a}` over `(k, h)`. In the logarithmic regime the lower
/// comparison uses `a = sigma_for_s1` (default 0.9) and the upper `a = 1`.
pub fn check_multiplier_equivalence(
    kernel: &Kernel,
    h_ladder: &[f64],
    k_grid: &[f64],
    sigma_for_s1: Option<f64>,
) -> Result<CheckReport> {
    let scaling = kernel.scaling()?;
    let (a_lo, a_hi) = match scaling.regime {
        Regime::Log => (sigma_for_s1.unwrap_or(DEFAULT_S1_SIGMA), 1.0),
        _ => (scaling.alpha, scaling.alpha),
    };
    let mut rep = CheckReport::new(
        "multiplier_equivalence",
        kernel_label(kernel.spec()),
        h_ladder.to_vec(),
        0.2,
    );
    let omegas: Vec<(f64, f64)> = k_grid.iter().map(|&k| (k.abs(), kernel.omega(k))).collect();
    for &h in h_ladder {
        let beta = kernel.beta(h)?;
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for &(k, w) in &omegas {
            let lhs = 1.0 + w / beta;
            let z = k / h;
            lo = lo.min(lhs / (1.0 + libm::pow(z, 2.0 * a_lo)));
            hi = hi.max(lhs / (1.0 + libm::pow(z, 2.0 * a_hi)));
        }
        rep.measured.push(lo);
        rep.secondary.push(hi);
    }
    let half = h_ladder.len().div_ceil(2);
    let tail_lo = &rep.measured[rep.measured.len() - half..];
    let tail_hi = &rep.secondary[rep.secondary.len() - half..];
    let variation = |v: &[f64]| {
        let mx = v.iter().cloned().fold(0.0, f64::max);
        let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
        mx / mn - 1.0
    };
    let var_lo = variation(tail_lo);
    let var_hi = variation(tail_hi);
    let min_all = rep.measured.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_all = rep.secondary.iter().cloned().fold(0.0, f64::max);
    rep.push_metric("lower_constant", min_all);
    rep.push_metric("upper_constant", max_all);
    rep.push_metric("lower_variation", var_lo);
    rep.push_metric("upper_variation", var_hi);
    let mut ok = min_all > 0.0 && max_all.is_finite() && var_lo < 0.2 && var_hi < 0.2;
    if scaling.regime != Regime::Log && k_grid.iter().any(|k| *k != 0.0) {
        let predicted = predicted_lower_constant(kernel, k_grid)?;
        rep.push_metric("predicted_lower", predicted);
        ok &= min_all >= 0.9 * predicted;
    }
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

/// `||L^J_h phi - c (-Delta)^alpha phi||_2` along the ladder, using the
/// continuum extension of `L^J_h` on the fine grid of `phi`.
///
/// Passes when the errors strictly decrease and the last is below a tenth of
/// the first. For class-infinity kernels the fitted order must also be
/// `2 +- 0.3` and the extrapolated constant must match `c` to `1e-3`.
pub fn check_operator_limit(kernel: &Kernel, phi: &ContinuumFunction, h_ladder: &[f64]) -> Result<CheckReport> {
    phi.check_band_limited()?;
    let scaling = kernel.scaling()?;
    let c = kernel.limit_constant()?;
    let target = fractional_laplacian(phi, scaling.alpha, c);
    let mut rep = CheckReport::new("operator_limit", kernel_label(kernel.spec()), h_ladder.to_vec(), 0.1);
    let reference = phi.inner(&target)?.re;
    let mut quotients = Vec::new();
    for &h in h_ladder {
        let l = continuum_lj(phi, kernel, h)?;
        rep.measured.push(libm::sqrt(l.sub(&target)?.mass()));
        if reference > 0.0 {
            quotients.push(c * phi.inner(&l)?.re / reference);
        }
    }
    rep.secondary = quotients.clone();
    let slope = fitted_slope(h_ladder, &rep.measured);
    rep.push_metric("fitted_slope", slope);
    rep.push_metric("limit_constant", c);
    let first = rep.measured.first().copied().unwrap_or(0.0);
    let last = rep.measured.last().copied().unwrap_or(0.0);
    rep.push_metric("final_over_initial", if first > 0.0 { last / first } else { 0.0 });
    if first == 0.0 && last == 0.0 {
        rep.verdict = Verdict::Pass;
        return Ok(rep);
    }
    let mut ok = strictly_decreasing(&rep.measured) && last < first / 10.0;
    if quotients.len() >= 2 {
        let n = quotients.len();
        let x1 = scaling.correction_variable(h_ladder[n - 2]);
        let x2 = scaling.correction_variable(h_ladder[n - 1]);
        let extrapolated = richardson(x1, quotients[n - 2], x2, quotients[n - 1]);
        rep.push_metric("extrapolated_constant", extrapolated);
        if kernel.class() == KernelClass::Infinite {
            ok &= (slope - 2.0).abs() <= 0.3 && (extrapolated - c).abs() <= 1e-3 * c;
        }
    }
    rep.verdict = Verdict::from_bool(ok);
    Ok(rep)
}

/// `<p_h w, p_h L u> = <p_h L w, p_h u>` with exact piecewise-linear inner
/// products on a grid refined `refine` times.
pub fn check_integration_by_parts(
    w: &LatticeField,
    u: &LatticeField,
    kernel: &Kernel,
    refine: usize,
) -> Result<CheckReport> {
    let lat = *w.lattice();
    if *u.lattice() != lat {
        return Err(Error::GridMismatch("integration by parts needs fields on one lattice".into()));
    }
    let fine = PeriodicLattice::new(lat.h() / refine as f64, lat.n_sites() * refine)?;
    let op = LatticeOperator::new(kernel, lat, Periodization::Images)?;
    let lhs = p_linear(w, fine)?.inner_piecewise_linear(&p_linear(&op.apply(u)?, fine)?)?;
    let rhs = p_linear(&op.apply(w)?, fine)?.inner_piecewise_linear(&p_linear(u, fine)?)?;
    let scale = lhs.norm().max(rhs.norm());
    let rel = if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale };
    let mut rep = CheckReport::new(
        "integration_by_parts",
        kernel_label(kernel.spec()),
        alloc::vec![lat.h()],
        IBP_TOLERANCE,
    );
    rep.measured.push(rel);
    rep.push_metric("lhs_re", lhs.re);
    rep.push_metric("lhs_im", lhs.im);
    rep.verdict = Verdict::from_bool(rel <= IBP_TOLERANCE);
    Ok(rep)
}

/// Seeded random test fields with complex Gaussian spectral coefficients
/// damped by `(1 + |kappa|)^{-decay}`, `kappa` the continuum wavenumber.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFamily {
    pub decay: f64,
    pub box_length: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest continuum wavenumber for band-limited continuum fields.
    pub band_limit: f64,
    /// Mesh of the fine grid carrying continuum fields.
    pub h_ref: f64,
}

impl Default for FieldFamily {
    fn default() -> Self {
        Self { decay: 2.0, box_length: 16.0, samples: 200, seed: 20_240_611, band_limit: 64.0, h_ref: libm::ldexp(1.0, -13) }
    }
}

impl FieldFamily {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    }

    /// `samples` random lattice fields of mesh `h`; identical for identical
    /// seeds.
    pub fn lattice_fields(&self, h: f64) -> Result<Vec<LatticeField>> {
        let lat = PeriodicLattice::with_length(self.box_length, h)?;
        let n = lat.n_sites();
        let plan = FftPlan::new(n)?;
        let mut rng = self.rng(lat.n_sites() as u64);
        let mut out = Vec::with_capacity(self.samples);
        for _ in 0..self.samples {
            let mut c: Vec<Complex64> = (0..n)
                .map(|j| {
                    let kappa = lat.wavenumber(j).abs() / h;
                    Self::gaussian(&mut rng) * libm::pow(1.0 + kappa, -self.decay)
                })
                .collect();
            plan.inverse_unitary(&mut c);
            out.push(LatticeField::new(lat, c)?);
        }
        Ok(out)
    }

    /// Fine grid of the continuum fields.
    pub fn fine_grid(&self) -> Result<PeriodicLattice> {
        PeriodicLattice::with_length(self.box_length, self.h_ref)
    }

    /// `samples` band-limited continuum fields (`|kappa| <= band_limit`).
    pub fn continuum_fields(&self) -> Result<Vec<ContinuumFunction>> {
        let grid = self.fine_grid()?;
        let n = grid.n_sites();
        let plan = FftPlan::new(n)?;
        let mut rng = self.rng(u64::MAX);
        let mut out = Vec::with_capacity(self.samples);
        let jmax = libm::floor(self.band_limit * self.box_length / (2.0 * PI)) as usize;
        if 2 * jmax + 1 >= n {
            return Err(Error::InvalidArgument("band limit exceeds the fine grid".into()));
        }
        for _ in 0..self.samples {
            let mut c = alloc::vec![Complex64::new(0.0, 0.0); n];
            for j in 0..=jmax {
                for idx in [j, (n - j) % n] {
                    let kappa = grid.wavenumber(idx).abs() / grid.h();
                    c[idx] = Self::gaussian(&mut rng) * libm::pow(1.0 + kappa, -self.decay);
                    if j == 0 {
                        break;
                    }
                }
            }
            plan.inverse_unitary(&mut c);
            out.push(ContinuumFunction::new(grid, c, Provenance::ClosedForm)?);
        }
        Ok(out)
    }
}

/// A uniform-in-`h` inequality `LHS <= C RHS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inequality {
    /// `||u||_inf <= C ||u||_{H^sigma_h}`, `sigma > 1/2`.
    Sobolev { sigma: f64 },
    /// `||u||_{L^4} <= C ||u||_{H^sigma}^{s0/sigma} ||u||_{L^2}^{1 - s0/sigma}`.
    GagliardoNirenberg { sigma0: f64, sigma: f64 },
    /// `||u||_{H^a_h} <= C ||u||_{H^J_h}` with `a = alpha`, or `a = sigma` when `s = 1`.
    EnergyLower { sigma_for_s1: f64 },
    /// `||u||_{H^J_h} <= C ||u||_{H^alpha_h}`.
    EnergyUpper,
    /// `||u||_{H^sigma_h} <= C ||u||_{H~^1_h}`.
    ClassicalH1 { sigma: f64 },
    /// `||u||_{H~^1_h} <= C ||u||_{H^1_h}`.
    ClassicalH1Upper,
    /// `||f_h||_{H^sigma_h} <= C ||f||_{H^sigma}` over band-limited continuum fields.
    Discretization { sigma: f64 },
    /// `||p_h u||_{H^sigma} <= C ||u||_{H^sigma_h}`.
    Interpolation { sigma: f64 },
    /// `||L^J_h u||_{H^{-alpha}_h} <= C ||u||_{H^alpha_h}`.
    DualOperator,
}

impl Inequality {
    pub fn name(&self) -> String {
        match self {
            Inequality::Sobolev { sigma } => format!("sobolev(sigma={sigma})"),
            Inequality::GagliardoNirenberg { sigma0, sigma } => {
                format!("gagliardo_nirenberg(sigma0={sigma0},sigma={sigma})")
            }
            Inequality::EnergyLower { .. } => "energy_norm_lower".to_string(),
            Inequality::EnergyUpper => "energy_norm_upper".to_string(),
            Inequality::ClassicalH1 { sigma } => format!("classical_h1(sigma={sigma})"),
            Inequality::ClassicalH1Upper => "classical_h1_upper".to_string(),
            Inequality::Discretization { sigma } => format!("discretization(sigma={sigma})"),
            Inequality::Interpolation { sigma } => format!("interpolation(sigma={sigma})"),
            Inequality::DualOperator => "dual_operator".to_string(),
        }
    }

    pub fn needs_kernel(&self) -> bool {
        matches!(
            self,
            Inequality::EnergyLower { .. } | Inequality::EnergyUpper | Inequality::DualOperator
        )
    }
}

fn lattice_ratio(
    ineq: Inequality,
    u: &LatticeField,
    op: Option<&LatticeOperator>,
    alpha: f64,
    fine: Option<PeriodicLattice>,
) -> Result<f64> {
    let need = || op.ok_or_else(|| Error::InvalidArgument("this inequality needs a kernel".into()));
    Ok(match ineq {
        Inequality::Sobolev { sigma } => linf_norm(u) / h_sigma_norm(u, sigma)?,
        Inequality::GagliardoNirenberg { sigma0, sigma } => {
            let t = sigma0 / sigma;
            l4_norm(u) / (libm::pow(h_sigma_norm(u, sigma)?, t) * libm::pow(l2_norm(u), 1.0 - t))
        }
        Inequality::EnergyLower { .. } => h_sigma_norm(u, alpha)? / hj_norm_with(need()?, u)?,
        Inequality::EnergyUpper => hj_norm_with(need()?, u)? / h_sigma_norm(u, alpha)?,
        Inequality::ClassicalH1 { sigma } => h_sigma_norm(u, sigma)? / h_tilde_one_norm(u),
        Inequality::ClassicalH1Upper => h_tilde_one_norm(u) / h_sigma_norm(u, 1.0)?,
        Inequality::Interpolation { sigma } => {
            let fine = fine.ok_or_else(|| Error::InvalidArgument("interpolation needs a fine grid".into()))?;
            continuum_norm(&p_linear(u, fine)?, ContinuumNorm::HSigma(sigma))? / h_sigma_norm(u, sigma)?
        }
        Inequality::DualOperator => {
            dual_h_sigma_norm(&need()?.apply(u)?, alpha)? / h_sigma_norm(u, alpha)?
        }
        Inequality::Discretization { .. } => unreachable!("continuum family handled separately"),
    })
}

/// Per-mesh maxima of the inequality ratio over the family; passes when the
/// maxima stay within [`UNIFORM_SPREAD`] of their median.
pub fn check_uniform_inequality(
    ineq: Inequality,
    kernel: Option<&Kernel>,
    family: &FieldFamily,
    h_ladder: &[f64],
) -> Result<CheckReport> {
    let subject = match kernel {
        Some(k) if ineq.needs_kernel() => kernel_label(k.spec()),
        _ => format!("random(decay={}, n={})", family.decay, family.samples),
    };
    let mut rep = CheckReport::new(&ineq.name(), subject, h_ladder.to_vec(), UNIFORM_SPREAD);
    match ineq {
        Inequality::Discretization { sigma } => {
            let fields = family.continuum_fields()?;
            let norms: Vec<f64> = fields
                .iter()
                .map(|f| continuum_norm(f, ContinuumNorm::HSigma(sigma)))
                .collect::<Result<_>>()?;
            for &h in h_ladder {
                let lat = PeriodicLattice::with_length(family.box_length, h)?;
                let mut worst: f64 = 0.0;
                for (f, n) in fields.iter().zip(&norms) {
                    worst = worst.max(h_sigma_norm(&discretize(f, lat)?, sigma)? / n);
                }
                rep.measured.push(worst);
            }
        }
        _ => {
            let fine = family.fine_grid().ok();
            // Exponent of the Sobolev norm compared with the energy norm.
            let alpha = match (ineq, kernel) {
                (_, None) => 1.0,
                (Inequality::EnergyLower { sigma_for_s1 }, Some(k)) => {
                    let sc = k.scaling()?;
                    if sc.regime == Regime::Log { sigma_for_s1 } else { sc.alpha }
                }
                (_, Some(k)) => k.scaling()?.alpha,
            };
            for &h in h_ladder {
                let lat = PeriodicLattice::with_length(family.box_length, h)?;
                let op = match kernel {
                    Some(k) if ineq.needs_kernel() => Some(LatticeOperator::new(k, lat, Periodization::Images)?),
                    _ => None,
                };
                let mut worst: f64 = 0.0;
                for u in family.lattice_fields(h)? {
                    worst = worst.max(lattice_ratio(ineq, &u, op.as_ref(), alpha, fine)?);
                }
                rep.measured.push(worst);
            }
        }
    }
    let med = median(&rep.measured);
    let mx = rep.measured.iter().cloned().fold(0.0, f64::max);
    rep.push_metric("median", med);
    rep.push_metric("max_over_median", mx / med);
    rep.verdict = Verdict::from_bool(bounded_across_ladder(&rep.measured));
    Ok(rep)
}

/// The inequalities exercised for a kernel-free family.
pub fn standard_field_inequalities() -> Vec<Inequality> {
    alloc::vec![
        Inequality::Sobolev { sigma: 0.75 },
        Inequality::GagliardoNirenberg { sigma0: 0.5, sigma: 1.0 },
        Inequality::ClassicalH1 { sigma: 0.5 },
        Inequality::ClassicalH1Upper,
        Inequality::Discretization { sigma: 0.75 },
        Inequality::Interpolation { sigma: 0.75 },
    ]
}

/// The kernel-dependent inequalities.
pub fn standard_kernel_inequalities() -> Vec<Inequality> {
    alloc::vec![
        Inequality::EnergyLower { sigma_for_s1: DEFAULT_S1_SIGMA },
        Inequality::EnergyUpper,
        Inequality::DualOperator,
    ]
}

/// Runs [`check_uniform_inequality`] over a list of inequalities.
pub fn check_uniform_inequalities(
    inequalities: &[Inequality],
    kernel: Option<&Kernel>,
    family: &FieldFamily,
    h_ladder: &[f64],
) -> Result<Vec<CheckReport>> {
    inequalities.iter().map(|&i| check_uniform_inequality(i, kernel, family, h_ladder)).collect()
}

/// `omega(k_j)/delta(k_j)` on `k_j = 2^{-j}`, `j = 4..=16`, extrapolated by
/// one Richardson step and compared with the closed-form constant.
pub fn check_symbol_asymptotics(kernel: &Kernel) -> Result<CheckReport> {
    let ratios = kernel.symbol_ratios(4..=16)?;
    let c = kernel.limit_constant()?;
    let extrapolated = kernel.extrapolated_limit_on(4..=16)?;
    let rel = (extrapolated - c).abs() / c;
    let mut rep = CheckReport::new(
        "symbol_asymptotics",
        kernel_label(kernel.spec()),
        ratios.iter().map(|r| r.0).collect(),
        SYMBOL_TOLERANCE,
    );
    rep.measured = ratios.iter().map(|r| r.1).collect();
    rep.push_metric("closed_form", c);
    rep.push_metric("extrapolated", extrapolated);
    rep.push_metric("relative_error", rel);
    rep.verdict = Verdict::from_bool(rel <= SYMBOL_TOLERANCE);
    Ok(rep)
}

/// Logarithmic regime: `omega/((-log k) k^2)` settles (last three of
/// `j = 4..=32` within 1%) while `omega/k^2` keeps growing with increments
/// that do not shrink.
pub fn check_log_regime(kernel: &Kernel) -> Result<CheckReport> {
    let scaling = kernel.scaling()?;
    if scaling.regime != Regime::Log {
        return Err(Error::InvalidArgument("logarithmic check needs a class s = 1 kernel".into()));
    }
    let ratios = kernel.symbol_ratios(4..=32)?;
    let naive: Vec<f64> = ratios.iter().map(|&(k, _)| kernel.omega(k) / (k * k)).collect();
    let mut rep = CheckReport::new(
        "log_regime",
        kernel_label(kernel.spec()),
        ratios.iter().map(|r| r.0).collect(),
        LOG_SPREAD_TOLERANCE,
    );
    rep.measured = ratios.iter().map(|r| r.1).collect();
    rep.secondary = naive.clone();
    let last3: Vec<f64> = rep.measured[rep.measured.len() - 3..].to_vec();
    let mx = last3.iter().cloned().fold(0.0, f64::max);
    let mn = last3.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (mx - mn) / mn;
    let steps: Vec<f64> = naive.windows(2).map(|w| w[1] - w[0]).collect();
    let first_step = steps[0];
    let late_min = steps[steps.len() / 2..].iter().cloned().fold(f64::INFINITY, f64::min);
    rep.push_metric("spread_last_three", spread);
    rep.push_metric("limit_estimate", last3[2]);
    rep.push_metric("naive_first_increment", first_step);
    rep.push_metric("naive_late_min_increment", late_min);
    let diverges = steps.iter().all(|d| *d > 0.0) && late_min >= 0.5 * first_step;
    rep.verdict = Verdict::from_bool(mn > 0.0 && spread <= LOG_SPREAD_TOLERANCE && diverges);
    Ok(rep)
}

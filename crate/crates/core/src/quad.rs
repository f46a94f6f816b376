//! Adaptive Gauss–Kronrod (7/15) quadrature and Euler–Maclaurin helpers.

#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

/// Integrates a complex-valued `f` over `[a, b]` by globally adaptive
/// bisection until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Complex64 {
    let (v, e) = gk15(&f, a, b);
    let mut intervals: Vec<(f64, f64, Complex64, f64)> = Vec::with_capacity(64);
    intervals.push((a, b, v, e));
    loop {
        let total: Complex64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || intervals.len() >= MAX_INTERVALS {
            return total;
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, abs_tol, rel_tol).re
}

/// `B_{2j} / (2j)!` for `j = 1..=8`.
pub(crate) const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

/// Rising factorial `(q)_m = q (q+1) ... (q+m-1)`.
pub(crate) fn rising(q: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (q + i as f64))
}

/// `sum_{l >= 0} (l + a)^{-q}` for `q > 1`, `a > 0`.
///
/// Sums the first terms directly, then applies Euler–Maclaurin from a shift
/// of at least 16 where the correction series is converged to rounding.
pub fn hurwitz_zeta(q: f64, a: f64) -> f64 {
    debug_assert!(q > 1.0 && a > 0.0);
    let shift = if a >= 16.0 { 0 } else { libm::ceil(16.0 - a) as usize };
    let mut head = 0.0;
    for l in (0..shift).rev() {
        head += libm::pow(l as f64 + a, -q);
    }
    head + power_tail_from(q, a + shift as f64)
}

/// `sum_{n >= 0} (x + n)^{-q}` by Euler–Maclaurin, accurate for `x >= 16`.
pub(crate) fn power_tail_from(q: f64, x: f64) -> f64 {
    let base = libm::pow(x, -q);
    let mut s = base * x / (q - 1.0) + 0.5 * base;
    // f^{(2j-1)}(x) = -(q)_{2j-1} x^{-q-2j+1}
    for (j, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let m = 2 * j + 1;
        let deriv = -rising(q, m) * base * libm::pow(x, -(m as f64));
        s -= b * deriv;
    }
    s
}

pub fn riemann_zeta(q: f64) -> f64 {
    hurwitz_zeta(q, 1.0)
}

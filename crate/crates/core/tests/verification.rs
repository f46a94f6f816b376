use latnls_core::interp::ContinuumFunction;
use latnls_core::kernel::{build_kernel, KernelSpec, DEFAULT_EVAL_CUTOFF};
use latnls_core::lattice::{h_sigma_norm, linf_norm, LatticeField, PeriodicLattice};
use latnls_core::verify::*;
use num_complex::Complex64;

fn small_family() -> FieldFamily {
    FieldFamily { samples: 20, ..FieldFamily::default() }
}

fn gaussian_on_fine_grid() -> ContinuumFunction {
    let fine = PeriodicLattice::with_length(32.0, 1.0 / 1024.0).unwrap();
    ContinuumFunction::from_fn(fine, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap()
}

#[test]
fn nearest_neighbor_multiplier_interval_stabilizes() {
    let kernel = build_kernel(KernelSpec::NearestNeighbor, DEFAULT_EVAL_CUTOFF).unwrap();
    let rep = check_multiplier_equivalence(&kernel, &default_h_ladder(), &default_k_grid(), None).unwrap();
    assert!(rep.passed(), "{:?}", rep.metrics);
    // 2(1 - cos k)/k^2 runs from 1 down to 4/pi^2 on [0, pi]
    let a = rep.metric("lower_constant").unwrap();
    let b = rep.metric("upper_constant").unwrap();
    assert!((a - 4.0 / std::f64::consts::PI.powi(2)).abs() < 1e-3, "{a}");
    assert_eq!(b, 1.0);
}

#[test]
fn fractional_multiplier_respects_predicted_lower_constant() {
    let kernel = build_kernel(KernelSpec::PurePower { s: 0.75 }, DEFAULT_EVAL_CUTOFF).unwrap();
    let rep = check_multiplier_equivalence(&kernel, &default_h_ladder(), &default_k_grid(), None).unwrap();
    assert!(rep.passed(), "{:?}", rep.metrics);
    assert!(rep.metric("lower_constant").unwrap() >= 0.9 * rep.metric("predicted_lower").unwrap());
}

#[test]
fn logarithmic_multiplier_uses_split_exponents() {
    let kernel = build_kernel(KernelSpec::PurePower { s: 1.0 }, DEFAULT_EVAL_CUTOFF).unwrap();
    let rep = check_multiplier_equivalence(&kernel, &default_h_ladder(), &default_k_grid(), Some(0.9)).unwrap();
    assert!(rep.passed(), "{:?}", rep.metrics);
    assert!(rep.metric("predicted_lower").is_none());
}

#[test]
fn nearest_neighbor_operator_limit_recovers_laplacian() {
    let kernel = build_kernel(KernelSpec::NearestNeighbor, DEFAULT_EVAL_CUTOFF).unwrap();
    let rep = check_operator_limit(&kernel, &gaussian_on_fine_grid(), &operator_h_ladder()).unwrap();
    assert!(rep.passed(), "{:?} {:?}", rep.measured, rep.metrics);
    assert!((rep.metric("fitted_slope").unwrap() - 2.0).abs() <= 0.3);
    assert!((rep.metric("extrapolated_constant").unwrap() - 1.0).abs() <= 1e-3);
}

#[test]
fn superlinear_operator_limit_converges() {
    let kernel = build_kernel(KernelSpec::PurePower { s: 1.5 }, DEFAULT_EVAL_CUTOFF).unwrap();
    let rep = check_operator_limit(&kernel, &gaussian_on_fine_grid(), &operator_h_ladder()).unwrap();
    assert!(rep.passed(), "{:?}", rep.measured);
}

#[test]
fn constant_field_sobolev_ratio_is_explicit() {
    // a constant has a single spectral mode at k = 0, so ||v||_{H^s_h} = |v| sqrt(L)
    let lat = PeriodicLattice::new(0.125, 128).unwrap();
    let v = LatticeField::from_fn(lat, |_| Complex64::new(0.6, -0.8)).unwrap();
    let ratio = linf_norm(&v) / h_sigma_norm(&v, 0.75).unwrap();
    assert!((ratio - 1.0 / lat.length().sqrt()).abs() < 1e-14);
}

#[test]
fn gagliardo_nirenberg_with_equal_exponents_reduces_to_embedding() {
    let rep = check_uniform_inequality(
        Inequality::GagliardoNirenberg { sigma0: 0.75, sigma: 0.75 },
        None,
        &small_family(),
        &default_h_ladder(),
    )
    .unwrap();
    assert!(rep.measured.iter().all(|m| m.is_finite() && *m > 0.0));
    assert!(rep.passed());
}

#[test]
fn reports_are_reproducible_for_a_seed() {
    let fam = small_family();
    let ladder = [0.125, 0.0625];
    let a = check_uniform_inequality(Inequality::Sobolev { sigma: 0.75 }, None, &fam, &ladder).unwrap();
    let b = check_uniform_inequality(Inequality::Sobolev { sigma: 0.75 }, None, &fam, &ladder).unwrap();
    assert_eq!(a, b);
}

#[test]
fn energy_norm_bounds_hold_for_fractional_kernel() {
    let kernel = build_kernel(KernelSpec::PurePower { s: 0.75 }, DEFAULT_EVAL_CUTOFF).unwrap();
    let reps = check_uniform_inequalities(
        &standard_kernel_inequalities(),
        Some(&kernel),
        &small_family(),
        &default_h_ladder(),
    )
    .unwrap();
    assert_eq!(reps.len(), 3);
    for rep in reps {
        assert!(rep.passed(), "{}: {:?}", rep.name, rep.measured);
    }
}

#[test]
fn symbol_asymptotics_cover_three_regimes() {
    for s in [0.75, 1.0, 1.5] {
        let kernel = build_kernel(KernelSpec::PurePower { s }, DEFAULT_EVAL_CUTOFF).unwrap();
        assert!(check_symbol_asymptotics(&kernel).unwrap().passed());
    }
    let log = build_kernel(KernelSpec::PurePower { s: 1.0 }, DEFAULT_EVAL_CUTOFF).unwrap();
    assert!(check_log_regime(&log).unwrap().passed());
}

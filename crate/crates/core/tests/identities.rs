use latnls_core::kernel::{build_kernel, KernelSpec, Periodization, DEFAULT_EVAL_CUTOFF};
use latnls_core::lattice::{
    dft, dual_h_sigma_norm, h_sigma_norm, idft, inner, l2_norm, sobolev_weight, LatticeField, LatticeOperator,
    PeriodicLattice, SpectralField,
};
use latnls_core::interp::{q_constant, ContinuumNorm, continuum_norm};
use latnls_core::verify::check_integration_by_parts;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(lat: PeriodicLattice, rng: &mut ChaCha8Rng) -> LatticeField {
    let v = (0..lat.n_sites())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    LatticeField::new(lat, v).unwrap()
}

#[test]
fn integration_by_parts_on_random_pairs() {
    let lat = PeriodicLattice::new(0.125, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [KernelSpec::PurePower { s: 0.75 }, KernelSpec::NearestNeighbor] {
        let kernel = build_kernel(spec, DEFAULT_EVAL_CUTOFF).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let w = random_field(lat, &mut rng);
            let u = random_field(lat, &mut rng);
            let rep = check_integration_by_parts(&w, &u, &kernel, 4).unwrap();
            assert!(rep.passed(), "{:?}", rep.measured);
            worst = worst.max(rep.measured[0]);
        }
        assert!(worst <= 1e-11);
    }
}

#[test]
fn integration_by_parts_trivial_cases() {
    let lat = PeriodicLattice::new(0.25, 64).unwrap();
    let kernel = build_kernel(KernelSpec::PurePower { s: 1.5 }, DEFAULT_EVAL_CUTOFF).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = random_field(lat, &mut rng);
    let rep = check_integration_by_parts(&u, &u, &kernel, 2).unwrap();
    assert!(rep.passed());
    assert!(rep.metric("lhs_im").unwrap().abs() <= 1e-12 * rep.metric("lhs_re").unwrap().abs());
    let zero = LatticeField::zeros(lat);
    let rep = check_integration_by_parts(&zero, &u, &kernel, 2).unwrap();
    assert_eq!(rep.measured[0], 0.0);
    assert_eq!(rep.metric("lhs_re").unwrap(), 0.0);
}

#[test]
fn piecewise_constant_interpolation_is_an_isometry() {
    let lat = PeriodicLattice::new(0.25, 128).unwrap();
    let fine = PeriodicLattice::new(0.25 / 8.0, 1024).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let u = random_field(lat, &mut rng);
        let q = q_constant(&u, fine).unwrap();
        let lhs = continuum_norm(&q, ContinuumNorm::L2).unwrap();
        let rhs = l2_norm(&u);
        assert!((lhs - rhs).abs() <= 1e-13 * rhs, "{lhs} vs {rhs}");
    }
}

#[test]
fn spectral_and_direct_application_agree() {
    let lat = PeriodicLattice::new(0.1, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for spec in [
        KernelSpec::PurePower { s: 0.6 },
        KernelSpec::PurePower { s: 1.0 },
        KernelSpec::NearestNeighbor,
        KernelSpec::Exponential { rate: 0.7 },
    ] {
        let kernel = build_kernel(spec, DEFAULT_EVAL_CUTOFF).unwrap();
        for mode in [Periodization::Images, Periodization::Truncated] {
            let op = LatticeOperator::new(&kernel, lat, mode).unwrap();
            let u = random_field(lat, &mut rng);
            let a = op.apply(&u).unwrap();
            let b = op.apply_direct(&u).unwrap();
            let diff = l2_norm(&a.sub(&b).unwrap());
            assert!(diff <= 1e-11 * l2_norm(&b), "{mode:?}: {diff}");
        }
    }
}

#[test]
fn dft_preserves_the_discrete_norm() {
    let lat = PeriodicLattice::new(0.05, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let u = random_field(lat, &mut rng);
        let spec = dft(&u);
        let s: f64 = spec.coefficients().iter().map(|c| c.norm_sqr()).sum();
        let spectral = (lat.h() * s).sqrt();
        let direct = l2_norm(&u);
        assert!((spectral - direct).abs() <= 1e-12 * direct);
    }
}

#[test]
fn dual_norm_is_the_supremum_of_pairings() {
    // sup_g |(f, g)_h| / ||g||_{H^sigma_h} is attained at g_hat = f_hat / weight
    let lat = PeriodicLattice::new(0.125, 128).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for sigma in [0.25, 0.75, 1.0] {
        let f = random_field(lat, &mut rng);
        let dual = dual_h_sigma_norm(&f, sigma).unwrap();
        let ratio = |g: &LatticeField| inner(&f, g).unwrap().norm() / h_sigma_norm(g, sigma).unwrap();
        let spec = dft(&f);
        let coeffs = spec
            .coefficients()
            .iter()
            .enumerate()
            .map(|(j, c)| c / sobolev_weight(lat.h(), spec.wavenumber(j), sigma))
            .collect();
        let best = idft(&SpectralField::new(lat, coeffs).unwrap());
        assert!((ratio(&best) - dual).abs() <= 1e-12 * dual);
        for _ in 0..200 {
            assert!(ratio(&random_field(lat, &mut rng)) <= dual * (1.0 + 1e-12));
        }
    }
}

use std::f64::consts::PI;

use latnls_core::dynamics::{evolve_discrete, EvolutionConfig, Flow, Scheme};
use latnls_core::interp::{discretize, p_linear, ContinuumFunction, Provenance};
use latnls_core::kernel::{build_kernel, Kernel, KernelSpec, Periodization};
use latnls_core::lattice::{
    h_sigma_norm, inner, l2_norm, LatticeField, LatticeOperator, PeriodicLattice, Sign,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn kernel_spec() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (0.55f64..3.0).prop_map(|s| KernelSpec::PurePower { s }),
        Just(KernelSpec::PurePower { s: 1.0 }),
        Just(KernelSpec::NearestNeighbor),
        (0.2f64..3.0).prop_map(|rate| KernelSpec::Exponential { rate }),
    ]
}

fn kernel(spec: KernelSpec) -> Kernel {
    // a modest cutoff keeps construction cheap; tails are handled analytically
    build_kernel(spec, 4096).unwrap()
}

fn field(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

fn lattice_field(h: f64, values: Vec<Complex64>) -> LatticeField {
    let lat = PeriodicLattice::new(h, values.len()).unwrap();
    LatticeField::new(lat, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbol_is_even_and_nonnegative(spec in kernel_spec(), k in -PI..PI) {
        let kern = kernel(spec);
        let a = kern.omega(k);
        let b = kern.omega(-k);
        prop_assert_eq!(a, b);
        prop_assert!(a >= 0.0);
        prop_assert_eq!(kern.omega(0.0), 0.0);
    }

    #[test]
    fn symbol_lies_between_quadratic_floor_and_coupling_ceiling(spec in kernel_spec(), k in -PI..PI) {
        let kern = kernel(spec);
        let w = kern.omega(k);
        let floor = 4.0 * kern.j1() / (PI * PI) * k * k;
        prop_assert!(w >= floor * (1.0 - 1e-12), "{} < {}", w, floor);
        prop_assert!(w <= 4.0 * kern.total_coupling() * (1.0 + 1e-12));
    }

    #[test]
    fn operator_is_self_adjoint_and_nonnegative(
        spec in kernel_spec(),
        u in field(64),
        v in field(64),
        h in 0.05f64..0.9,
    ) {
        let kern = kernel(spec);
        let u = lattice_field(h, u);
        let v = lattice_field(h, v);
        let op = LatticeOperator::new(&kern, *u.lattice(), Periodization::Images).unwrap();
        let lhs = inner(&v, &op.apply(&u).unwrap()).unwrap();
        let rhs = inner(&op.apply(&v).unwrap(), &u).unwrap();
        let scale = l2_norm(&op.apply(&u).unwrap()) * l2_norm(&v) + l2_norm(&op.apply(&v).unwrap()) * l2_norm(&u);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1e-300));
        let q = inner(&u, &op.apply(&u).unwrap()).unwrap();
        prop_assert!(q.re >= -1e-12 * scale);
    }

    #[test]
    fn operator_commutes_with_shifts(spec in kernel_spec(), u in field(32), shift in 0usize..32) {
        let kern = kernel(spec);
        let u = lattice_field(0.25, u);
        let op = LatticeOperator::new(&kern, *u.lattice(), Periodization::Images).unwrap();
        let a = op.apply(&u.shift(shift)).unwrap();
        let b = op.apply(&u).unwrap().shift(shift);
        prop_assert!(l2_norm(&a.sub(&b).unwrap()) <= 1e-12 * (1.0 + l2_norm(&b)));
    }

    #[test]
    fn sobolev_norms_interpolate(u in field(64), h in 0.01f64..0.9, s0 in 0.1f64..1.0, ratio in 0.1f64..1.0) {
        let u = lattice_field(h, u);
        let sigma = s0;
        let sigma0 = s0 * ratio;
        let t = sigma0 / sigma;
        let lhs = h_sigma_norm(&u, sigma0).unwrap();
        // 1 + a^t <= 2^{1-t} (1 + a)^t, so the weight 1 + |k/h|^{2 sigma} costs 2^{(1-t)/2}
        let rhs = 2f64.powf(0.5 * (1.0 - t))
            * h_sigma_norm(&u, sigma).unwrap().powf(t)
            * l2_norm(&u).powf(1.0 - t);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{} > {}", lhs, rhs);
        prop_assert!(l2_norm(&u) <= lhs * (1.0 + 1e-12));
    }

    #[test]
    fn evolution_is_gauge_covariant(theta in 0.0f64..(2.0 * PI), amp in 0.1f64..1.5) {
        let kern = kernel(KernelSpec::PurePower { s: 0.75 });
        let lat = PeriodicLattice::new(0.25, 64).unwrap();
        let v = LatticeField::from_fn(lat, |x| Complex64::new(amp * (-x * x).exp(), 0.0)).unwrap();
        let phase = Complex64::from_polar(1.0, theta);
        let cfg = EvolutionConfig::new(0.01, 0.2, Sign::Defocusing).unwrap().with_states();
        let a = evolve_discrete(&v.scale(phase), &kern, &cfg).unwrap();
        let b = evolve_discrete(&v, &kern, &cfg).unwrap();
        let ua = a.states.last().unwrap();
        let ub = b.states.last().unwrap().scale(phase);
        prop_assert!(l2_norm(&ua.sub(&ub).unwrap()) <= 1e-12 * l2_norm(&ub));
    }

    #[test]
    fn sign_is_irrelevant_without_nonlinearity(u in field(32), scheme_lie in any::<bool>()) {
        let kern = kernel(KernelSpec::NearestNeighbor);
        let u = lattice_field(0.5, u);
        let scheme = if scheme_lie { Scheme::Lie } else { Scheme::Strang };
        let mk = |sign| EvolutionConfig::new(0.01, 0.1, sign).unwrap()
            .with_flow(Flow::LinearOnly).with_scheme(scheme).with_states();
        let a = evolve_discrete(&u, &kern, &mk(Sign::Focusing)).unwrap();
        let b = evolve_discrete(&u, &kern, &mk(Sign::Defocusing)).unwrap();
        prop_assert_eq!(a.states, b.states);
    }

    #[test]
    fn dft_round_trip(u in field(128), h in 0.01f64..0.9) {
        let u = lattice_field(h, u);
        let back = latnls_core::lattice::idft(&latnls_core::lattice::dft(&u));
        prop_assert!(l2_norm(&back.sub(&u).unwrap()) <= 1e-13 * (1.0 + l2_norm(&u)));
    }

    #[test]
    fn linear_interpolation_reproduces_nodes(u in field(16), e in 0u32..4) {
        let r = 1usize << e;
        let u = lattice_field(0.5, u);
        let fine = PeriodicLattice::new(0.5 / r as f64, 16 * r).unwrap();
        let p = p_linear(&u, fine).unwrap();
        prop_assert_eq!(p.provenance(), Provenance::Interpolated);
        for (m, v) in u.values().iter().enumerate() {
            prop_assert!((p.samples()[m * r] - v).norm() <= 1e-15);
        }
    }

    #[test]
    fn discretization_of_constants_is_exact(a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let fine = PeriodicLattice::new(1.0 / 64.0, 1024).unwrap();
        let c = Complex64::new(a, b);
        let f = ContinuumFunction::from_fn(fine, |_| c).unwrap();
        let lat = PeriodicLattice::new(0.25, 64).unwrap();
        let d = discretize(&f, lat).unwrap();
        prop_assert!(d.values().iter().all(|v| (v - c).norm() <= 1e-14 * (1.0 + c.norm())));
    }
}

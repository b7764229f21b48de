use pinning_core::disorder::{sample, DisorderLaw};
use pinning_core::engine::{backward_table, forward_table, ModelParams};
use pinning_core::homogeneous::{solve_free_energy, tilted_kernel, variational_upper_bound};
use pinning_core::kernels::{build_kernel, renewal_mass, KernelFamily, SlowlyVarying};
use pinning_core::math::logsumexp;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![
        Just(KernelFamily::SrwReturn),
        (0.05f64..4.0).prop_map(|rate| KernelFamily::Geometric { rate }),
        (0.05f64..3.0).prop_map(|alpha| KernelFamily::PowerLaw {
            alpha,
            slowly_varying: SlowlyVarying::ONE
        }),
        ((0.05f64..2.0), (-2.0f64..2.0)).prop_map(|(alpha, gamma)| KernelFamily::PowerLaw {
            alpha,
            slowly_varying: SlowlyVarying::LogPower { c: 1.0, gamma }
        }),
        ((0.5f64..2.0), (1e-4f64..0.3)).prop_map(|(alpha, sigma)| KernelFamily::PolandScheraga {
            alpha,
            sigma
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_are_normalized(fam in family(), n_max in 2usize..3000) {
        let k = build_kernel(fam, n_max).unwrap();
        prop_assert!((k.total_mass() - 1.0).abs() <= 1e-12);
        prop_assert!(k.masses().iter().all(|&m| m >= 0.0));
        prop_assert!(k.log_sigma() <= 0.0);
    }

    #[test]
    fn renewal_mass_bounds_and_reconstruction(fam in family(), n in 1usize..400) {
        let k = build_kernel(fam, 400).unwrap();
        let t = renewal_mass(&k, n).unwrap();
        let u = t.u();
        prop_assert_eq!(u[0], 1.0);
        let src = k.source_masses();
        for m in 1..=n {
            prop_assert!(u[m] <= 1.0 + 1e-15 && u[m] >= src[m - 1] * (1.0 - 1e-12));
            let rebuilt: f64 = (1..=m).map(|j| src[j - 1] * u[m - j]).sum();
            prop_assert!((rebuilt - u[m]).abs() <= 1e-12);
        }
        let again = renewal_mass(&k, n).unwrap();
        prop_assert!(again.u().iter().zip(u).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn free_energy_monotone_convex(fam in family(), h0 in 0.01f64..1.5, step in 0.005f64..0.2) {
        let k = build_kernel(fam, 2000).unwrap();
        let f: Vec<f64> = (0..3).map(|i| solve_free_energy(&k, h0 + step * i as f64).unwrap().free_energy).collect();
        prop_assert!(f[1] >= f[0] && f[2] >= f[1]);
        prop_assert!(f[2] - 2.0 * f[1] + f[0] >= -1e-10);
    }

    #[test]
    fn solution_invariants(fam in family(), h in 1e-3f64..3.0) {
        let k = build_kernel(fam, 2000).unwrap();
        let s = solve_free_energy(&k, h).unwrap();
        prop_assert!(s.free_energy > 0.0);
        prop_assert!(s.residual.abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&s.derivative));
    }

    #[test]
    fn derivative_matches_finite_differences(fam in family(), h in 0.01f64..2.0) {
        let k = build_kernel(fam, 2000).unwrap();
        let s = solve_free_energy(&k, h).unwrap();
        let eps = 1e-5 * h;
        let fd = (solve_free_energy(&k, h + eps).unwrap().free_energy
            - solve_free_energy(&k, h - eps).unwrap().free_energy) / (2.0 * eps);
        prop_assert!((fd / s.derivative - 1.0).abs() <= 1e-6, "{} {}", fd, s.derivative);
        let t = tilted_kernel(&k, h).unwrap();
        prop_assert!((t.total_mass() - 1.0).abs() <= 1e-10);
        prop_assert!((t.contact_density() - s.derivative).abs() <= 1e-8);
    }

    #[test]
    fn variational_bound_ordering(alpha in 0.1f64..2.5, beta in 0.05f64..2.0, delta in 1e-3f64..1.0) {
        let k = build_kernel(KernelFamily::PowerLaw { alpha, slowly_varying: SlowlyVarying::ONE }, 2000).unwrap();
        let vb = variational_upper_bound(&k, DisorderLaw::Gaussian, beta, delta).unwrap();
        let f0 = solve_free_energy(&k, delta).unwrap().free_energy;
        prop_assert!(vb.bound < f0);
        prop_assert!(vb.bound <= delta * delta / (2.0 * beta * beta) * (1.0 + 1e-12));
    }

    #[test]
    fn forward_recursion_reconstructs(fam in family(), n in 1usize..300, beta in 0.0f64..2.0, h in -2.0f64..2.0, seed in 0u64..1000) {
        let k = build_kernel(fam, 300).unwrap();
        let s = sample(DisorderLaw::Gaussian, n, seed, 0);
        let p = ModelParams::new(beta, h).unwrap();
        let f = forward_table(&k, &s, p);
        let z = f.log_z();
        prop_assert_eq!(z[0], 0.0);
        for m in 1..=n {
            let terms: Vec<f64> = (0..m).map(|j| z[j] + k.log_mass(m - j)).collect();
            let rebuilt = p.site_weight(s.omega(m)) + logsumexp(&terms);
            prop_assert!((rebuilt - z[m]).abs() <= 1e-10);
        }
        let b = backward_table(&k, &s, p);
        prop_assert_eq!(b.log_z()[n], 0.0);
        prop_assert!((b.log_partition() - f.log_partition()).abs() <= 1e-10 * f.log_partition().abs().max(1.0));
    }
}

use pinning_core::disorder::{sample, stream_rng, DisorderLaw, DisorderSample, StreamPurpose};
use pinning_core::engine::*;
use pinning_core::kernels::{build_kernel, KernelFamily, RenewalKernel, SlowlyVarying};
use rand::{Rng, SeedableRng};

fn random_kernel(rng: &mut impl Rng, n_max: usize) -> RenewalKernel {
    match rng.random_range(0..4) {
        0 => build_kernel(KernelFamily::SrwReturn, n_max).unwrap(),
        1 => build_kernel(
            KernelFamily::Geometric {
                rate: rng.random_range(0.1..3.0),
            },
            n_max,
        )
        .unwrap(),
        2 => build_kernel(
            KernelFamily::PowerLaw {
                alpha: rng.random_range(0.05..2.5),
                slowly_varying: SlowlyVarying::ONE,
            },
            n_max,
        )
        .unwrap(),
        _ => build_kernel(
            KernelFamily::PolandScheraga {
                alpha: rng.random_range(0.5..1.5),
                sigma: rng.random_range(1e-3..0.3),
            },
            n_max,
        )
        .unwrap(),
    }
}

#[test]
fn tables_marginals_and_two_point_match_enumeration() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for inst in 0..100 {
        let n = rng.random_range(2..=14);
        // sometimes truncate the kernel below N so that long gaps are forbidden
        let n_max = if inst % 5 == 0 { n - 1 } else { 64 };
        let kernel = random_kernel(&mut rng, n_max.max(2));
        let law = [DisorderLaw::Gaussian, DisorderLaw::Rademacher, DisorderLaw::Uniform][inst % 3];
        let s = sample(law, n, 77, inst as u64);
        let p = ModelParams::new(rng.random_range(0.0..2.0), rng.random_range(-2.0..2.0)).unwrap();
        let f = forward_table(&kernel, &s, p);
        let b = backward_table(&kernel, &s, p);
        for m in 0..=n {
            let of = brute_force_segment_log_partition(&kernel, &s, p, 0, m).unwrap();
            let ob = brute_force_segment_log_partition(&kernel, &s, p, m, n).unwrap();
            worst = worst.max((f.log_z()[m] - of).abs()).max((b.log_z()[m] - ob).abs());
        }
        let marg = brute_force_marginals(&kernel, &s, p).unwrap();
        for (k, &o) in marg.iter().enumerate() {
            worst = worst.max((marginal_contact(&f, &b, k).unwrap() - o).abs());
        }
        if n >= 3 {
            let ell = rng.random_range(1..n - 1);
            let k = rng.random_range(ell..n);
            let c = two_point(&kernel, &s, p, ell, k).unwrap();
            worst = worst.max((c - brute_force_two_point(&kernel, &s, p, ell, k).unwrap()).abs());
        }
    }
    assert!(worst <= 1e-10, "worst deviation {worst}");
}

#[test]
fn constant_disorder_is_a_shift_of_h() {
    let kernel = build_kernel(KernelFamily::SrwReturn, 300).unwrap();
    let c = 0.37;
    let s = DisorderSample::explicit(vec![c; 300], DisorderLaw::Gaussian);
    let (beta, h) = (1.3, -0.2);
    let a = forward_table(&kernel, &s, ModelParams::new(beta, h).unwrap());
    let b = forward_table(&kernel, &s, ModelParams::new(0.0, h + beta * c).unwrap());
    assert_eq!(a.log_z(), b.log_z());
}

#[test]
fn free_energy_exceeds_single_gap_bound() {
    let kernel = build_kernel(KernelFamily::SrwReturn, 2000).unwrap();
    for r in 0..20 {
        let s = sample(DisorderLaw::Gaussian, 2000, 5, r);
        for h in [-1.0, -0.2, 0.0, 0.4] {
            let p = ModelParams::new(0.8, h).unwrap();
            let f = forward_table(&kernel, &s, p);
            let lower = (p.site_weight(s.omega(2000)) + kernel.log_mass(2000)) / 2000.0;
            assert!(f.free_energy() >= lower - 1e-12);
        }
    }
}

#[test]
fn sampled_paths_reproduce_marginals() {
    let n = 32;
    let kernel = build_kernel(KernelFamily::SrwReturn, 64).unwrap();
    let s = sample(DisorderLaw::Gaussian, n, 3, 0);
    let p = ModelParams::new(0.7, 0.05).unwrap();
    let f = forward_table(&kernel, &s, p);
    let b = backward_table(&kernel, &s, p);
    let exact = marginals(&f, &b).unwrap();
    let mut rng = stream_rng(3, 0, StreamPurpose::PathSampling);
    let draws = 100_000;
    let mut counts = vec![0u64; n + 1];
    for _ in 0..draws {
        let path = sample_path(&f, &kernel, &s, p, &mut rng).unwrap();
        assert_eq!(path.points.first(), Some(&0));
        assert_eq!(path.points.last(), Some(&n));
        for &x in &path.points {
            counts[x] += 1;
        }
    }
    for k in 1..n {
        let q = exact[k];
        let se = (q * (1.0 - q) / draws as f64).sqrt().max(1e-6);
        let emp = counts[k] as f64 / draws as f64;
        assert!((emp - q).abs() <= 4.0 * se, "k={k}: {emp} vs {q}");
    }
}

#[test]
fn deep_localization_pins_every_site() {
    let kernel = build_kernel(KernelFamily::SrwReturn, 100).unwrap();
    let s = sample(DisorderLaw::Gaussian, 100, 1, 0);
    let p = ModelParams::new(1.0, 50.0).unwrap();
    let f = forward_table(&kernel, &s, p);
    let mut rng = stream_rng(1, 0, StreamPurpose::PathSampling);
    for _ in 0..100 {
        let path = sample_path(&f, &kernel, &s, p, &mut rng).unwrap();
        assert_eq!(path.points, (0..=100).collect::<Vec<_>>());
        let obs = path.observables();
        assert_eq!(obs.largest_gap, 1);
        assert_eq!(obs.contact_fraction, 1.0);
    }
}

#[test]
fn homogeneous_bulk_density_matches_tilted_kernel() {
    use pinning_core::homogeneous::tilted_kernel;
    let n = 1 << 12;
    let kernel = build_kernel(KernelFamily::Geometric { rate: std::f64::consts::LN_2 }, n).unwrap();
    let s = DisorderSample::explicit(vec![0.0; n], DisorderLaw::Gaussian);
    let p = ModelParams::new(0.0, 0.5).unwrap();
    let f = forward_table(&kernel, &s, p);
    let b = backward_table(&kernel, &s, p);
    let density = tilted_kernel(&kernel, 0.5).unwrap().contact_density();
    let mid = marginal_contact(&f, &b, n / 2).unwrap();
    assert!((mid / density - 1.0).abs() < 0.01);
}

#[test]
fn gap_cutoff_forbids_long_gaps() {
    let kernel = build_kernel(KernelFamily::SrwReturn, 200).unwrap();
    let s = sample(DisorderLaw::Gaussian, 200, 4, 0);
    let p = ModelParams::new(0.5, -0.5).unwrap();
    let full = forward_table(&kernel, &s, p);
    let cut = forward_table_with_cutoff(&kernel, &s, p, 10);
    assert!(cut.log_partition() < full.log_partition());
    let mut rng = stream_rng(4, 0, StreamPurpose::PathSampling);
    for _ in 0..50 {
        let path = sample_path(&cut, &kernel, &s, p, &mut rng).unwrap();
        assert!(path.observables().largest_gap <= 10);
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specto_core::nonnormality::{henrici_number, is_normal, schur_departure};
use specto_core::pseudospectrum::{
    compute_field, compute_field_with, pseudospectral_radius, sigma_min_at, FieldMethod, FieldOptions, GridSpec,
};
use specto_core::stabilizer::{stabilize, StabilizerConfig};
use specto_core::{Matrix, C64};

fn random_real(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_real(n, n, &data).unwrap()
}

fn random_complex(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    random_complex(n, rng).schur().unwrap().q
}

/// Every element of `a` has a partner in `b` within `tol`, and vice versa.
fn same_multiset(a: &[C64], b: &[C64], tol: f64) -> bool {
    let covered = |x: &[C64], y: &[C64]| x.iter().all(|p| y.iter().any(|q| (p - q).norm() <= tol));
    a.len() == b.len() && covered(a, b) && covered(b, a)
}

fn small_grid(center: C64, radius: f64) -> GridSpec {
    GridSpec::new(
        center.re - radius,
        center.re + radius,
        center.im - radius,
        center.im + radius,
        17,
        15,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn norm_ordering(seed in any::<u64>(), n in 1usize..=8) {
        let w = random_complex(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let two = w.two_norm().unwrap();
        let fro = w.frobenius_norm();
        prop_assert!(two <= fro * (1.0 + 1e-12));
        prop_assert!(fro <= (n as f64).sqrt() * two * (1.0 + 1e-12));
    }

    #[test]
    fn submultiplicative(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_complex(n, &mut rng);
        let b = random_complex(n, &mut rng);
        let ab = (&a * &b).two_norm().unwrap();
        prop_assert!(ab <= a.two_norm().unwrap() * b.two_norm().unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn schur_factors_are_consistent(seed in any::<u64>(), n in 1usize..=8) {
        let w = random_real(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let s = w.schur().unwrap();
        prop_assert!((&s.reconstruct() - &w).frobenius_norm() <= 1e-8 * w.frobenius_norm().max(1.0));
        let qq = &s.q.adjoint() * &s.q;
        prop_assert!((&qq - &Matrix::identity(n)).frobenius_norm() <= 1e-10);
        let diag: Vec<C64> = (0..n).map(|i| s.t.get(i, i)).collect();
        prop_assert!(same_multiset(&diag, &w.eigenvalues().unwrap(), 1e-8));
    }

    #[test]
    fn normal_two_norm_is_spectral_radius(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_unitary(n, &mut rng);
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w = &(&u * &Matrix::diag(&d).unwrap()) * &u.adjoint();
        prop_assert!(w.commutes_with_adjoint(1e-12));
        prop_assert!((w.two_norm().unwrap() - w.spectral_radius().unwrap()).abs() <= 1e-8);
    }

    #[test]
    fn henrici_is_unitarily_invariant(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_real(n, &mut rng);
        let u = random_unitary(n, &mut rng);
        let rotated = &(&u * &w) * &u.adjoint();
        prop_assert!((henrici_number(&rotated).unwrap() - henrici_number(&w).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn henrici_is_scale_invariant(seed in any::<u64>(), n in 1usize..=8, c in prop_oneof![-50.0..-0.01, 0.01..50.0f64]) {
        let w = random_real(n, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!((henrici_number(&w.scale(c)).unwrap() - henrici_number(&w).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn departure_identity(seed in any::<u64>(), n in 1usize..=16) {
        let w = random_complex(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let (eigs, dep) = schur_departure(&w).unwrap();
        let lhs = dep * dep + eigs.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let f2 = w.frobenius_norm().powi(2);
        prop_assert!((lhs - f2).abs() <= 1e-8 * f2);
    }

    #[test]
    fn departure_vanishes_exactly_for_normal(seed in any::<u64>(), n in 2usize..=8, family in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = match family {
            0 => {
                let a = random_complex(n, &mut rng);
                &a + &a.adjoint()
            }
            1 => random_unitary(n, &mut rng),
            2 => {
                let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                Matrix::from_fn(n, n, |i, j| C64::new(c[(j + n - i) % n], 0.0)).unwrap()
            }
            _ => {
                let mut m = random_real(n, &mut rng);
                let mut data = m.real_parts();
                data[n - 1] += 3.0;
                m = Matrix::from_real(n, n, &data).unwrap();
                m
            }
        };
        let (_, dep) = schur_departure(&w).unwrap();
        let normal = is_normal(&w, 1e-10);
        if family < 3 {
            prop_assert!(normal);
            prop_assert!(dep <= 1e-7 * w.frobenius_norm());
        } else {
            prop_assert!(!normal);
            prop_assert!(dep > 1e-3);
        }
    }

    #[test]
    fn shift_equivariance(seed in any::<u64>(), n in 1usize..=8, cr in -2.0..2.0f64, ci in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_complex(n, &mut rng);
        let c = C64::new(cr, ci);
        let lambda = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let shifted = w.shifted(-c).unwrap();
        let a = sigma_min_at(&shifted, lambda + c).unwrap();
        let b = sigma_min_at(&w, lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn level_sets_are_nested(seed in any::<u64>(), n in 1usize..=6, e1 in 0.01..1.0f64, e2 in 0.01..1.0f64) {
        let w = random_complex(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let field = compute_field(&w, &small_grid(C64::new(0.0, 0.0), 2.0)).unwrap();
        let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
        let inner: Vec<_> = field.nodes_in(lo).map(|(i, j, _)| (i, j)).collect();
        let outer: Vec<_> = field.nodes_in(hi).map(|(i, j, _)| (i, j)).collect();
        prop_assert!(inner.iter().all(|p| outer.contains(p)));
        prop_assert!(pseudospectral_radius(&field, lo) <= pseudospectral_radius(&field, hi));
    }

    #[test]
    fn field_is_unitarily_invariant(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_complex(n, &mut rng);
        let u = random_unitary(n, &mut rng);
        let rotated = &(&u * &w) * &u.adjoint();
        let grid = small_grid(C64::new(0.1, -0.2), 2.0);
        let a = compute_field(&w, &grid).unwrap();
        let b = compute_field(&rotated, &grid).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn field_is_bitwise_stable_across_workers(seed in any::<u64>(), n in 1usize..=8, workers in 1usize..=4) {
        let w = random_complex(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let grid = small_grid(C64::new(0.0, 0.0), 1.5);
        for method in [FieldMethod::Svd, FieldMethod::SchurInverseIteration] {
            let one = compute_field_with(&w, &grid, FieldOptions { method, workers: Some(1) }).unwrap();
            let many = compute_field_with(&w, &grid, FieldOptions { method, workers: Some(workers) }).unwrap();
            prop_assert!(one.values.iter().zip(&many.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        }
    }

    #[test]
    fn stabilizer_rescales_eigenvalues(seed in any::<u64>(), n in 1usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_real(n, &mut rng);
        let cfg = StabilizerConfig::with_iterations(200, seed);
        let r = stabilize(&w, &cfg).unwrap();
        let scaled: Vec<C64> = w.eigenvalues().unwrap().iter().map(|z| z / r.gain_estimate).collect();
        prop_assert!(same_multiset(&r.w_s.eigenvalues().unwrap(), &scaled, 1e-9));
        prop_assert!(r.w_s.spectral_radius().unwrap() <= 1.0 + 1e-6);
        prop_assert!((henrici_number(&r.w_s).unwrap() - henrici_number(&w).unwrap()).abs() <= 1e-9);
        let again = stabilize(&w, &cfg).unwrap();
        prop_assert_eq!(again.w_s, r.w_s);
        prop_assert_eq!(again.gain_estimate.to_bits(), r.gain_estimate.to_bits());
    }
}

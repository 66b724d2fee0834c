use frs_core::random::{random_spd, random_symmetric, rng_from_seed};
use frs_core::symmat::{eig, frobenius, lyapunov_solve};
use frs_core::SymMat;
use proptest::prelude::*;

fn rel_err(a: &SymMat, b: &SymMat) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn spd(seed: u64, d: usize, lo: f64, hi: f64) -> SymMat {
    random_spd(&mut rng_from_seed(seed), d, lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), d in 1usize..=4) {
        let s = random_symmetric(&mut rng_from_seed(seed), d);
        let dec = eig(&s).unwrap();
        let back = dec.compose(&dec.eigenvalues);
        prop_assert!((&back - &s).max_abs() <= 1e-12 * s.max_abs().max(1.0));
        for w in dec.eigenvalues.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn lyapunov_round_trip(seed in any::<u64>(), d in 1usize..=5) {
        let mut rng = rng_from_seed(seed);
        let a = random_spd(&mut rng, d, 0.05, 20.0);
        let s = random_symmetric(&mut rng, d);
        let u = lyapunov_solve(&a, &s).unwrap();
        prop_assert!(rel_err(&a.jordan(&u), &s) <= 1e-8);
    }
}

#[test]
fn lyapunov_inverts_riesz_on_1000_trials() {
    let mut rng = rng_from_seed(1000);
    for i in 0..1000 {
        let d = 1 + i % 5;
        let a = random_spd(&mut rng, d, 0.05, 20.0);
        let u = random_symmetric(&mut rng, d);
        let back = lyapunov_solve(&a, &a.jordan(&u)).unwrap();
        assert!(rel_err(&back, &u) <= 1e-8, "trial {i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sqrt_squares_back(seed in any::<u64>(), d in 1usize..=5) {
        let a = spd(seed, d, 0.01, 100.0);
        let r = a.sqrt_psd().unwrap();
        prop_assert!(rel_err(&r.square(), &a) <= 1e-10);
        prop_assert!(r.min_eigenvalue().unwrap() > 0.0);
    }

    #[test]
    fn log_exp_inverse(seed in any::<u64>(), d in 1usize..=4) {
        let a = spd(seed, d, 0.05, 20.0);
        prop_assert!(rel_err(&a.log().unwrap().exp().unwrap(), &a) <= 1e-10);
        let s = random_symmetric(&mut rng_from_seed(seed ^ 0xABCD), d);
        prop_assert!(rel_err(&s.exp().unwrap().log().unwrap(), &s) <= 1e-9);
    }

    #[test]
    fn inverse_is_inverse(seed in any::<u64>(), d in 1usize..=4) {
        let a = spd(seed, d, 0.05, 20.0);
        let p = a.inv().unwrap().jordan(&a);
        prop_assert!((&p - &SymMat::identity(d)).max_abs() <= 1e-11);
    }

    #[test]
    fn riesz_map_is_self_adjoint(seed in any::<u64>(), d in 1usize..=4) {
        // ⟨(AU)^sym, V⟩ = ⟨U, (AV)^sym⟩ = tr(UAV)
        let mut rng = rng_from_seed(seed);
        let a = random_spd(&mut rng, d, 0.1, 10.0);
        let u = random_symmetric(&mut rng, d);
        let v = random_symmetric(&mut rng, d);
        let l = frobenius(&a.jordan(&u), &v).unwrap();
        let r = frobenius(&u, &a.jordan(&v)).unwrap();
        prop_assert!((l - r).abs() <= 1e-12 * (l.abs() + r.abs()).max(1.0));
        prop_assert!(frobenius(&a.jordan(&u), &u).unwrap() >= 0.0);
    }

    #[test]
    fn congruence_matches_products(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let a = random_symmetric(&mut rng, d);
        let b = random_symmetric(&mut rng, d);
        let c = a.congruence(&b);
        let ba = b.matmul(&a);
        for i in 0..d {
            for j in 0..d {
                let direct: f64 = (0..d).map(|k| ba.get(i, k) * b.get(k, j)).sum();
                prop_assert!((c.get(i, j) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }
    }
}

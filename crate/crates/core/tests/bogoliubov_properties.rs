use aqs_core::bath::{discretize, BathSpec, Scheme};
use aqs_core::bogoliubov::{
    diagonalization_residual, diagonalize, first_order_generator, fock_oracle, generator_k,
    pairing_residual, transform_from_generator, verify_canonical, CMatrix, QuadraticHamiltonian, C64,
};
use aqs_core::Error;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize) -> QuadraticHamiltonian {
    let x = random_matrix(rng, n);
    let s = random_matrix(rng, n);
    let g = (&s + s.transpose()).scale(0.5 * rng.random_range(0.0..2.0));
    let h = (&x * x.adjoint()).unscale(n as f64) + CMatrix::identity(n, n).scale(1.0 + g.norm());
    QuadraticHamiltonian::from_blocks(&h, &g).unwrap()
}

/// A diagonal Hamiltonian with distinct frequencies plus a perturbation
/// small enough to keep `T` near the identity.
fn near_diagonal(rng: &mut ChaCha8Rng, n: usize, size: f64) -> QuadraticHamiltonian {
    let x = random_matrix(rng, n);
    let s = random_matrix(rng, n);
    let h = CMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { C64::new(0.5 * (1.0 + i as f64), 0.0) } else { C64::new(0.0, 0.0) };
        d + (x[(i, j)] + x[(j, i)].conj()).scale(0.5 * size)
    });
    let g = (&s + s.transpose()).scale(0.5 * size);
    QuadraticHamiltonian::from_blocks(&h, &g).unwrap()
}

#[test]
fn random_positive_definite_instances_are_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let n = 1 + i % 16;
        let h = random_pd(&mut rng, n);
        let t = diagonalize(&h).unwrap();
        let r = verify_canonical(&t);
        assert!(r.para_unitarity < 1e-10, "n = {n}: {:e}", r.para_unitarity);
        assert!(r.block < 1e-10, "n = {n}: {:e}", r.block);
        assert!(diagonalization_residual(&h, &t) < 1e-8);
        assert!(t.lambdas.windows(2).all(|w| w[0] <= w[1]));
        assert!(t.lambdas[0] > 0.0);
        let (_, pairing) = pairing_residual(&h).unwrap();
        assert!(pairing < 1e-10, "pairing {pairing:e}");
    }
}

#[test]
fn indefinite_matrix_is_rejected() {
    let h = QuadraticHamiltonian::single_mode_squeezing(1.0, 0.6).unwrap();
    assert!(matches!(diagonalize(&h), Err(Error::Instability(_))));
    let h = QuadraticHamiltonian::diagonal(&[1.0, -0.5]).unwrap();
    assert!(matches!(diagonalize(&h), Err(Error::Instability(_))));
}

#[test]
fn generator_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..40 {
        let n = 1 + i % 6;
        let h = near_diagonal(&mut rng, n, 0.05);
        let t = diagonalize(&h).unwrap();
        let k = generator_k(&t).unwrap();
        assert!((&k - k.adjoint()).norm() < 1e-10);
        let err = (transform_from_generator(&k) - t.t()).norm();
        assert!(err < 1e-8, "n = {n}: {err:e}");
    }
}

#[test]
fn small_squeezing_generator_is_b_to_first_order() {
    for g in [1e-3, 5e-4] {
        let h = QuadraticHamiltonian::single_mode_squeezing(1.0, g).unwrap();
        let t = diagonalize(&h).unwrap();
        let k = generator_k(&t).unwrap();
        let b = t.b[(0, 0)];
        let off = k[(0, 1)];
        assert!((off.norm() - b.norm()).abs() < 10.0 * g * g, "K = {off}, B = {b}");
    }
}

#[test]
fn fock_oracle_agrees_on_shipped_suite() {
    let suite = [
        (QuadraticHamiltonian::diagonal(&[1.3]).unwrap(), 50),
        (QuadraticHamiltonian::single_mode_squeezing(1.0, 0.2).unwrap(), 200),
        (QuadraticHamiltonian::beamsplitter(1.0, 0.3).unwrap(), 24),
        (QuadraticHamiltonian::two_mode_squeezing(1.0, 0.2).unwrap(), 24),
        (QuadraticHamiltonian::diagonal(&[0.7, 1.9]).unwrap(), 24),
    ];
    for (h, trunc) in suite {
        let t = diagonalize(&h).unwrap();
        let spec = fock_oracle(&h, trunc, 4).unwrap();
        assert!(spec.warning.is_none(), "{:?}", spec.warning);
        let gaps = spec.spacings();
        assert!((gaps[0] - t.lambdas[0]).abs() < 1e-6, "{} vs {}", gaps[0], t.lambdas[0]);
        if h.n() == 2 {
            // Second excitation is either 2λ₁ or λ₂, whichever is lower.
            let second = t.lambdas[1].min(2.0 * t.lambdas[0]);
            assert!((gaps[1] - second).abs() < 1e-6, "{} vs {}", gaps[1], second);
        }
    }
}

#[test]
fn squeezing_spacing_is_exact() {
    let h = QuadraticHamiltonian::single_mode_squeezing(1.0, 0.2).unwrap();
    let spec = fock_oracle(&h, 200, 6).unwrap();
    for s in spec.spacings().windows(2) {
        assert_relative_eq!(s[1] - s[0], (1.0f64 - 4.0 * 0.04).sqrt(), epsilon = 1e-8);
    }
}

#[test]
fn perturbative_generator_is_first_order_exact() {
    // The difference to the exact generator is second order in g²/E, so
    // halving every coupling shrinks it by 2⁴.
    let e = 0.5;
    let base = BathSpec::new(0.02, 1.0, 0.0);
    let diff = |scale: f64| {
        let modes = discretize(&base.with_alpha(0.02 * scale * scale), 4, Scheme::Linear).unwrap();
        let h = QuadraticHamiltonian::two_boson_bath(&modes, e).unwrap();
        let t = diagonalize(&h).unwrap();
        let exact = generator_k(&t).unwrap();
        let approx = first_order_generator(&modes, e);
        ((exact - &approx).norm(), approx.norm())
    };
    let (d1, k1) = diff(1.0);
    let (d2, k2) = diff(0.5);
    assert!(d1 < 0.1 * k1, "first order does not dominate: {d1:e} vs {k1:e}");
    assert_relative_eq!(k1 / k2, 4.0, max_relative = 1e-12);
    assert_relative_eq!(d1 / d2, 16.0, max_relative = 0.1);
}


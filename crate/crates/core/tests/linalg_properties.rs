use std::f64::consts::PI;

use dssh_core::linalg::{eig, eig_with, eigenvalues, evolve, solve, spectral_distance, ComplexMatrix, EigenOptions};
use dssh_core::model::{build_open_chain, ChainParams};
use dssh_core::C64;
use proptest::prelude::*;

fn chain(n: usize, phi: f64, g1: f64, g2: f64) -> ComplexMatrix {
    build_open_chain(&ChainParams::new(n, phi, g1, g2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_residuals_within_bound(n in 1usize..=128, phi in 0.0..PI, g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
        let h = chain(n, phi, g1, g2);
        let d = eig_with(&h, &EigenOptions::complex_symmetric()).unwrap();
        prop_assert!(d.residual_max <= 1e-10 * h.frobenius_norm(), "{}", d.residual_max);
        prop_assert!(d.biorthonormality_error() <= 1e-8);
    }

    #[test]
    fn transpose_has_same_spectrum(n in 1usize..40, phi in 0.0..PI, g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
        let h = chain(n, phi, g1, g2);
        let a = eigenvalues(&h).unwrap();
        let b = eigenvalues(&h.transpose()).unwrap();
        prop_assert!(spectral_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn open_chain_spectrum_is_chiral(n in 1usize..40, phi in 0.0..PI, g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
        let a = eigenvalues(&chain(n, phi, g1, g2)).unwrap();
        let neg: Vec<C64> = a.iter().map(|z| -z).collect();
        prop_assert!(spectral_distance(&a, &neg) < 1e-9);
    }

    #[test]
    fn solve_inverts_matmul(n in 1usize..30, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        // Diagonally dominant, hence well conditioned.
        let a = ComplexMatrix::from_fn(n, n, |i, j| {
            let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if i == j { z + C64::new(2.0 * n as f64, 0.0) } else { z }
        });
        let x: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let back = solve(&a, &a.matvec(&x)).unwrap();
        for (p, q) in back.iter().zip(&x) {
            prop_assert!((p - q).norm() < 1e-9);
        }
    }
}

#[test]
fn adjoint_and_symmetric_left_vectors_agree() {
    let h = chain(12, 0.35 * PI, 1.0, 0.6);
    let a = eig(&h).unwrap();
    let b = eig_with(&h, &EigenOptions::complex_symmetric()).unwrap();
    assert!(a.biorthonormality_error() < 1e-8 && b.biorthonormality_error() < 1e-8);
    // Projectors |v_i><w_i| are basis independent; compare them eigenvalue by eigenvalue.
    for i in 0..a.dim() {
        let j = (0..b.dim())
            .min_by(|&x, &y| (b.eigenvalues[x] - a.eigenvalues[i]).norm().total_cmp(&(b.eigenvalues[y] - a.eigenvalues[i]).norm()))
            .unwrap();
        let (va, wa, vb, wb) = (a.right(i), a.left(i), b.right(j), b.left(j));
        for r in 0..h.rows() {
            for c in 0..h.rows() {
                let pa = va[r] * wa[c].conj();
                let pb = vb[r] * wb[c].conj();
                assert!((pa - pb).norm() < 1e-7, "state {i}, entry ({r},{c})");
            }
        }
    }
}

#[test]
fn long_chain_with_nearly_degenerate_edge_pair() {
    // The edge splitting at N = 100 is far below the bulk gap; the pair
    // must still come out biorthonormal.
    let h = chain(100, 0.3 * PI, 1.0, 1.0);
    let d = eig_with(&h, &EigenOptions::complex_symmetric()).unwrap();
    assert!(d.residual_max <= 1e-10 * h.frobenius_norm());
    assert!(d.biorthonormality_error() < 1e-8);
}

#[test]
fn hermitian_evolution_preserves_norm() {
    let h = chain(10, 0.3 * PI, 0.0, 0.0);
    let mut psi = vec![C64::new(0.0, 0.0); 20];
    psi[0] = C64::new(0.6, 0.0);
    psi[7] = C64::new(0.0, 0.8);
    let grid: Vec<f64> = (0..=100).map(|i| i as f64).collect();
    let out = evolve(&h, &psi, &grid).unwrap();
    for (t, v) in grid.iter().zip(&out) {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-8, "t = {t}: {norm}");
    }
}

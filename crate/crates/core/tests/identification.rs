use bilinear_sysid::experiment::generate_system;
use bilinear_sysid::identification::{error_metrics, estimate};
use bilinear_sysid::linalg::{Matrix, Vector};
use bilinear_sysid::model::{simulate, simulate_standard_start};
use bilinear_sysid::rng::GaussianStream;
use bilinear_sysid::{BilinearSystem, NoiseParams, Trajectory};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

fn from_na(a: &DMatrix<f64>) -> Matrix {
    Matrix::new(a.nrows(), a.ncols(), a.as_slice().to_vec()).unwrap()
}

#[test]
fn noise_free_exact_recovery() {
    for (seed, (n, m)) in [(1u64, (2usize, 1usize)), (2, (3, 2)), (3, (4, 2)), (4, (8, 4))].into_iter() {
        let sys = generate_system(n, m, 0.6, 1.0 / m as f64, seed).unwrap();
        let p = NoiseParams::new(1.0, 0.0).unwrap();
        let traj = simulate_standard_start(&sys, p, 4 * n * (m + 1), seed).unwrap();
        let result = error_metrics(estimate(&traj).unwrap(), &sys).unwrap();
        for e in result.spectral_errors.unwrap() {
            assert!(e < 1e-8, "n={n} m={m}: {e}");
        }
    }
}

#[test]
fn error_identity_on_noisy_instances() {
    // Â_⋆ᵀ − A_⋆ᵀ = (X̃ᵀX̃)⁻¹ X̃ᵀ W, solved independently via Cholesky.
    for instance in 0..50u64 {
        let (n, m) = (2 + (instance % 3) as usize, 1 + (instance % 2) as usize);
        let sigma_u = 0.5 + 0.1 * (instance % 7) as f64;
        let sys = generate_system(n, m, 0.6, 0.4, 1000 + instance).unwrap();
        let p = NoiseParams::new(sigma_u, 0.3).unwrap();
        let traj = simulate_standard_start(&sys, p, 200, instance).unwrap();
        let result = estimate(&traj).unwrap();

        let blocks = traj.regression_blocks().unwrap();
        let x = to_na(&blocks.design);
        let w = to_na(&traj.noise_block().unwrap());
        let predicted = (x.transpose() * &x).cholesky().unwrap().solve(&(x.transpose() * w));
        let actual = to_na(&result.a_star_hat.sub(&sys.a_star(sigma_u).unwrap()).unwrap()).transpose();
        let rel = (&actual - &predicted).norm() / predicted.norm();
        assert!(rel < 1e-8, "instance {instance}: {rel}");
    }
}

/// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
fn orthogonal(n: usize, seed: u64) -> Matrix {
    let mut rng = GaussianStream::new(seed);
    let g = DMatrix::from_fn(n, n, |_, _| rng.next_normal());
    from_na(&g.qr().q())
}

fn rotate(q: &Matrix, v: &Vector) -> Vector {
    q.mul_vec(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn estimate_is_orthogonally_equivariant(n in 2..5usize, m in 1..3usize, seed in any::<u64>()) {
        // x ↦ Qx maps A_k ↦ Q A_k Qᵀ and the estimate follows.
        let sys = generate_system(n, m, 0.6, 0.3, seed).unwrap();
        let p = NoiseParams::new(1.0, 0.5).unwrap();
        let traj = simulate_standard_start(&sys, p, 120, seed).unwrap();
        let q = orthogonal(n, seed ^ 0xabc);
        let rotated = Trajectory::new(
            traj.states().iter().map(|x| rotate(&q, x)).collect(),
            traj.inputs().to_vec(),
            traj.noises().map(|w| w.iter().map(|x| rotate(&q, x)).collect()),
            traj.seed(),
            p,
        )
        .unwrap();
        let base = estimate(&traj).unwrap();
        let turned = estimate(&rotated).unwrap();
        for (a, b) in base.a_hat.iter().zip(&turned.a_hat) {
            let want = q.matmul(a).unwrap().matmul(&q.transpose()).unwrap();
            let diff = want.sub(b).unwrap().frobenius_norm();
            prop_assert!(diff < 1e-9 * want.frobenius_norm().max(1.0), "{}", diff);
        }
    }

    #[test]
    fn metrics_are_nonnegative(n in 1..4usize, m in 1..3usize, seed in any::<u64>()) {
        let sys = generate_system(n, m, 0.6, 0.3, seed).unwrap();
        let p = NoiseParams::new(1.0, 0.3).unwrap();
        let traj = simulate_standard_start(&sys, p, 100, seed).unwrap();
        let r = error_metrics(estimate(&traj).unwrap(), &sys).unwrap();
        prop_assert!(r.spectral_errors.unwrap().iter().all(|&e| e >= 0.0));
        prop_assert!(r.composite_error.unwrap() >= 0.0);
        prop_assert!(r.design_condition >= 1.0);
    }
}

#[test]
fn error_shrinks_with_horizon() {
    let sys = generate_system(3, 2, 0.6, 0.5, 77).unwrap();
    let p = NoiseParams::new(1.0, 0.3).unwrap();
    let median_at = |horizon: usize| {
        let mut errs: Vec<f64> = (0..15)
            .map(|trial| {
                let traj = simulate_standard_start(&sys, p, horizon, 500 + trial).unwrap();
                error_metrics(estimate(&traj).unwrap(), &sys).unwrap().composite_error.unwrap()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        errs[errs.len() / 2]
    };
    let e = [median_at(100), median_at(1000), median_at(10_000)];
    assert!(e[0] > e[1] && e[1] > e[2], "{e:?}");
    // Each tenfold increase should cut the error by roughly √10.
    assert!(e[0] / e[2] > 5.0, "{e:?}");
}

#[test]
fn explicit_initial_state_is_used() {
    let sys = BilinearSystem::new(vec![Matrix::from_diag(&[0.5, 0.2]), Matrix::identity(2).scaled(0.1)]).unwrap();
    let x0 = Vector::new(vec![3.0, -1.0]).unwrap();
    let traj = simulate(&sys, NoiseParams::new(1.0, 0.1).unwrap(), &x0, 10, 4).unwrap();
    assert_eq!(traj.states()[0], x0);
}

//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bilinear_sysid::experiment::{
    fit_rate, generate_system, stable_base_seed, table1_report, ExperimentConfig, ExperimentRow, Metric, RowStatus,
    SweepVariable,
};
use bilinear_sysid::identification::{error_metrics, estimate};
use bilinear_sysid::linalg::{kron, lstsq, spectral_radius, vec, Matrix, Vector, DEFAULT_SQUARINGS};
use bilinear_sysid::model::{covariance_recursion, simulate, simulate_standard_start};
use bilinear_sysid::rng::{derive_seed, GaussianStream};
use bilinear_sysid::{BilinearSystem, NoiseParams};
use bilinear_sysid_cli::run::{bmsb_suite, run_sweep};
use nalgebra::DMatrix;
use rayon::prelude::*;

const SIGMA_U_GRID: [f64; 5] = [0.3, 0.6, 1.0, 1.2, 1.5];
const RATE_HORIZONS: [usize; 5] = [250, 500, 1000, 2000, 4000];
const RATE_SLOPE_RANGE: (f64, f64) = (-0.65, -0.35);
const RATE_TIME_LIMIT: Duration = Duration::from_secs(120);
const NOISE_RATIO_LIMIT: f64 = 1.5;
const SIGN_TEST_ALPHA: f64 = 0.05;
const BMSB_CONFIGS: usize = 20;
const BMSB_SAMPLES: usize = 100_000;
const COVARIANCE_TRIALS: usize = 100_000;
const COVARIANCE_SE_LIMIT: f64 = 4.0;
const COVARIANCE_TIMES: [usize; 3] = [1, 5, 20];
const RECOVERY_TOL: f64 = 1e-8;
const IDENTITY_INSTANCES: u64 = 50;
const TRIALS: usize = 20;
const LARGE_T: usize = 4000;

/// Candidate base seeds scanned for a mean-square stable sweep system.
const SEED_SEARCH: u64 = 100;

/// The system class of the experiments section: n = 8, m = 4,
/// ρ(A_0) = 0.6 and ρ(A_k) = 1/m.
fn paper_class(base_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        n: 8,
        m: 4,
        rho0: 0.6,
        rhok: 0.25,
        repetitions: TRIALS,
        base_seed,
        ..ExperimentConfig::default()
    }
}

/// `cfg` with the first base seed from `cfg.base_seed` on whose system is
/// mean-square stable over the whole sweep.
fn stable(cfg: ExperimentConfig) -> ExperimentConfig {
    let seed = stable_base_seed(&cfg, cfg.base_seed, SEED_SEARCH)
        .expect("valid config")
        .expect("a stable system within the search window");
    ExperimentConfig { base_seed: seed, ..cfg }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn medians(rows: &[ExperimentRow], metric: Metric) -> Vec<(f64, f64, usize, f64)> {
    bilinear_sysid::experiment::summarize(rows, metric)
        .into_iter()
        .map(|g| (g.sigma_u, g.sigma_w, g.horizon, g.median))
        .collect()
}

fn all_ok(rows: &[ExperimentRow]) -> bool {
    rows.iter().all(|r| r.status == RowStatus::Ok)
}

fn rate_law() -> Outcome {
    let start = Instant::now();
    let cfg = stable(ExperimentConfig {
        sweep_variable: SweepVariable::SigmaU,
        sweep_values: vec![1.5],
        fixed_sigma: 0.3,
        t_values: RATE_HORIZONS.to_vec(),
        ..paper_class(1)
    });
    let rows = run_sweep(&cfg).expect("sweep");
    let fit = fit_rate(&rows, Metric::CompositeError).expect("fit");
    let elapsed = start.elapsed();
    let slope = fit[0].slope;
    let (lo, hi) = RATE_SLOPE_RANGE;
    outcome(
        all_ok(&rows) && (lo..=hi).contains(&slope) && elapsed < RATE_TIME_LIMIT,
        format!(
            "slope = {slope:.4} (want [{lo}, {hi}]), base seed {}, rho_atilde = {:.4}, {:.1} s (limit {} s)",
            cfg.base_seed,
            rows[0].rho_atilde,
            elapsed.as_secs_f64(),
            RATE_TIME_LIMIT.as_secs()
        ),
    )
}

fn noise_independence() -> Outcome {
    let cfg = stable(ExperimentConfig {
        sweep_variable: SweepVariable::SigmaW,
        sweep_values: vec![0.1, 0.3, 1.0],
        fixed_sigma: 1.5,
        t_values: vec![LARGE_T],
        ..paper_class(2)
    });
    let rows = run_sweep(&cfg).expect("sweep");
    let med: Vec<f64> = medians(&rows, Metric::CompositeError).iter().map(|g| g.3).collect();
    let hi = med.iter().copied().fold(f64::MIN, f64::max);
    let lo = med.iter().copied().fold(f64::MAX, f64::min);
    let ratio = hi / lo;
    outcome(
        all_ok(&rows) && med.len() == 3 && ratio <= NOISE_RATIO_LIMIT,
        format!(
            "medians = [{}], max/min = {ratio:.4} (limit {NOISE_RATIO_LIMIT}), base seed {}",
            med.iter().map(|m| format!("{m:.5}")).collect::<Vec<_>>().join(", "),
            cfg.base_seed
        ),
    )
}

/// `P(X ≥ k)` for `X ~ Binomial(n, 1/2)`.
fn binomial_upper_tail(n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    let mut coeff = 1.0f64;
    for i in 0..=n {
        if i >= k {
            total += coeff;
        }
        coeff = coeff * (n - i) as f64 / (i + 1) as f64;
    }
    total / 2f64.powi(n as i32)
}

fn input_strength_effect() -> Outcome {
    let cfg = stable(ExperimentConfig {
        sweep_variable: SweepVariable::SigmaU,
        sweep_values: SIGMA_U_GRID.to_vec(),
        fixed_sigma: 0.3,
        t_values: vec![LARGE_T],
        ..paper_class(3)
    });
    let rows = run_sweep(&cfg).expect("sweep");
    let med: Vec<f64> = medians(&rows, Metric::ErrkAvgNormalized).iter().map(|g| g.3).collect();
    let decreasing = med.len() == SIGMA_U_GRID.len() && med.windows(2).all(|w| w[1] < w[0]);

    // Paired sign test per consecutive σ_u pair; trials share seeds across σ_u.
    let by_value: Vec<Vec<f64>> = SIGMA_U_GRID
        .iter()
        .map(|&s| {
            let mut v: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.sigma_u == s)
                .map(|r| (r.trial, r.errk_avg_normalized.unwrap_or(f64::NAN)))
                .collect();
            v.sort_by_key(|p| p.0);
            v.into_iter().map(|p| p.1).collect()
        })
        .collect();
    let mut worst_p: f64 = 0.0;
    let mut wins = Vec::new();
    for pair in by_value.windows(2) {
        let k = pair[0].iter().zip(&pair[1]).filter(|(a, b)| b < a).count();
        wins.push(k);
        worst_p = worst_p.max(binomial_upper_tail(TRIALS, k));
    }
    outcome(
        all_ok(&rows) && decreasing && worst_p < SIGN_TEST_ALPHA,
        format!(
            "medians = [{}], sign-test wins = {wins:?}/{TRIALS}, max p = {worst_p:.4} (alpha {SIGN_TEST_ALPHA}), base seed {}",
            med.iter().map(|m| format!("{m:.5}")).collect::<Vec<_>>().join(", "),
            cfg.base_seed
        ),
    )
}

fn table1_shape() -> Outcome {
    let cfg = paper_class(4);
    let sys = generate_system(cfg.n, cfg.m, cfg.rho0, cfg.rhok, cfg.system_seed()).expect("system");
    let table = table1_report(&sys, &SIGMA_U_GRID).expect("table");
    let rhos: Vec<f64> = table.iter().map(|p| p.1).collect();
    let increasing = rhos.windows(2).all(|w| w[1] > w[0]);
    let in_range = rhos.iter().all(|&r| r > 0.0 && r < 1.0);
    outcome(
        increasing && in_range,
        format!(
            "rho_atilde = [{}] over sigma_u = {SIGMA_U_GRID:?}",
            rhos.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn bmsb_thresholds() -> Outcome {
    let rows = bmsb_suite(&paper_class(5), BMSB_CONFIGS, BMSB_SAMPLES).expect("suite");
    let failures = rows
        .iter()
        .filter(|r| !matches!(&r.outcome, Ok(e) if e.passed))
        .count();
    let min_margin = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(|e| e.lower_bound - e.threshold)
        .fold(f64::INFINITY, f64::min);
    outcome(
        failures == 0 && rows.len() == 4 * BMSB_CONFIGS,
        format!(
            "{} checks over {BMSB_CONFIGS} configurations x {BMSB_SAMPLES} samples, {failures} failures, \
             smallest lower-bound margin {min_margin:.4}",
            rows.len()
        ),
    )
}

fn covariance_oracle() -> Outcome {
    let scalar = BilinearSystem::new(vec![
        Matrix::from_row_major(1, 1, &[0.6]).unwrap(),
        Matrix::from_row_major(1, 1, &[0.5]).unwrap(),
    ])
    .unwrap();
    let two_state = BilinearSystem::new(vec![
        Matrix::from_row_major(2, 2, &[0.5, 0.2, -0.1, 0.4]).unwrap(),
        Matrix::from_row_major(2, 2, &[0.3, 0.0, 0.2, -0.2]).unwrap(),
    ])
    .unwrap();
    let cases = [
        ("scalar", scalar, Vector::new(vec![1.5]).unwrap()),
        ("2-state", two_state, Vector::new(vec![1.0, -0.7]).unwrap()),
    ];
    let p = NoiseParams::new(1.0, 0.3).unwrap();
    let horizon = *COVARIANCE_TIMES.last().unwrap();
    let mut worst: f64 = 0.0;
    for (label, sys, x0) in &cases {
        let n = sys.n();
        let outer: Vec<Vec<Vec<f64>>> = (0..COVARIANCE_TRIALS)
            .into_par_iter()
            .map(|trial| {
                let traj = simulate(sys, p, x0, horizon, derive_seed(6, &[trial as u64])).unwrap();
                COVARIANCE_TIMES
                    .iter()
                    .map(|&t| {
                        let x = &traj.states()[t];
                        (0..n * n).map(|k| x[k % n] * x[k / n]).collect()
                    })
                    .collect()
            })
            .collect();
        let s0 = Matrix::from_fn(n, n, |i, j| x0[i] * x0[j]);
        for (ti, &t) in COVARIANCE_TIMES.iter().enumerate() {
            let exact = covariance_recursion(sys, p.sigma_u(), p.sigma_w(), &s0, t).unwrap();
            for k in 0..n * n {
                let vals: Vec<f64> = outer.iter().map(|o| o[ti][k]).collect();
                let count = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / count;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
                let z = (mean - exact.as_slice()[k]).abs() / (var / count).sqrt();
                if z > worst {
                    worst = z;
                }
                if z > COVARIANCE_SE_LIMIT {
                    return outcome(false, format!("{label} t={t} entry {k}: {z:.2} SE"));
                }
            }
        }
    }
    outcome(
        true,
        format!(
            "{COVARIANCE_TRIALS} trials at t = {COVARIANCE_TIMES:?}, largest deviation {worst:.2} SE (limit {COVARIANCE_SE_LIMIT})"
        ),
    )
}

fn exact_recovery() -> Outcome {
    let mut worst_recovery: f64 = 0.0;
    for seed in 0..10 {
        let sys = generate_system(8, 4, 0.6, 0.25, seed).unwrap();
        let traj = simulate_standard_start(&sys, NoiseParams::new(1.0, 0.0).unwrap(), 200, seed).unwrap();
        let r = error_metrics(estimate(&traj).unwrap(), &sys).unwrap();
        for e in r.spectral_errors.unwrap() {
            worst_recovery = worst_recovery.max(e);
        }
    }

    // Â_⋆ᵀ − A_⋆ᵀ = (X̃ᵀX̃)⁻¹ X̃ᵀ W, solved independently by Cholesky.
    let mut worst_identity: f64 = 0.0;
    for i in 0..IDENTITY_INSTANCES {
        let sys = generate_system(8, 4, 0.6, 0.25, 100 + i).unwrap();
        let sigma_u = SIGMA_U_GRID[i as usize % SIGMA_U_GRID.len()];
        let traj = simulate_standard_start(&sys, NoiseParams::new(sigma_u, 0.3).unwrap(), 400, i).unwrap();
        let result = estimate(&traj).unwrap();
        let blocks = traj.regression_blocks().unwrap();
        let na = |m: &Matrix| DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice());
        let x = na(&blocks.design);
        let w = na(&traj.noise_block().unwrap());
        let predicted = (x.transpose() * &x).cholesky().unwrap().solve(&(x.transpose() * w));
        let actual = na(&result.a_star_hat.sub(&sys.a_star(sigma_u).unwrap()).unwrap()).transpose();
        worst_identity = worst_identity.max((&actual - &predicted).norm() / predicted.norm());
    }
    outcome(
        worst_recovery < RECOVERY_TOL && worst_identity < RECOVERY_TOL,
        format!(
            "noise-free max error {worst_recovery:.2e}, error identity max relative gap {worst_identity:.2e} \
             over {IDENTITY_INSTANCES} instances (tol {RECOVERY_TOL:e})"
        ),
    )
}

fn random_matrix(rows: usize, cols: usize, rng: &mut GaussianStream) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.next_normal())
}

fn numerics_suite() -> Outcome {
    let mut rng = GaussianStream::new(8);
    let mut failures = Vec::new();

    let mut kron_ok = true;
    let mut vec_ok = true;
    for _ in 0..200 {
        let a = random_matrix(2, 3, &mut rng);
        let b = random_matrix(3, 2, &mut rng);
        let c = random_matrix(3, 2, &mut rng);
        let d = random_matrix(2, 4, &mut rng);
        let lhs = kron(&a, &b).unwrap().matmul(&kron(&c, &d).unwrap()).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap()).unwrap();
        kron_ok &= lhs.sub(&rhs).unwrap().frobenius_norm() < 1e-12 * rhs.frobenius_norm().max(1.0);

        let x = random_matrix(3, 4, &mut rng);
        let bb = random_matrix(5, 4, &mut rng);
        let l = vec(&a.matmul(&x).unwrap().matmul(&bb.transpose()).unwrap());
        let r = kron(&bb, &a).unwrap().mul_vec(&vec(&x)).unwrap();
        vec_ok &= l.as_slice().iter().zip(r.as_slice()).all(|(p, q)| (p - q).abs() < 1e-12);
    }
    if !kron_ok {
        failures.push("kron mixed product");
    }
    if !vec_ok {
        failures.push("vec/kron identity");
    }

    let mut orth_ok = true;
    for _ in 0..100 {
        let x = random_matrix(60, 7, &mut rng);
        let y = random_matrix(60, 2, &mut rng);
        let fit = lstsq(&x, &y).unwrap();
        let resid = y.sub(&x.matmul(&fit.coefficients).unwrap()).unwrap();
        let g = x.transpose().matmul(&resid).unwrap().frobenius_norm();
        orth_ok &= g <= 1e-12 * x.frobenius_norm() * y.frobenius_norm();
    }
    if !orth_ok {
        failures.push("residual orthogonality");
    }

    let known: [(&[f64], f64); 4] = [
        (&[0.5, 0.0, 0.0, -0.9], 0.9),
        (&[0.0, 1.0, -1.0, 0.0], 1.0),
        (&[0.5, 1.0, 0.0, 0.5], 0.5),
        (&[0.3, -0.4, 0.4, 0.3], 0.5),
    ];
    let radius_ok = known.iter().all(|(data, want)| {
        let a = Matrix::from_row_major(2, 2, data).unwrap();
        (spectral_radius(&a, DEFAULT_SQUARINGS).unwrap().value - want).abs() < 1e-9
    });
    if !radius_ok {
        failures.push("spectral radius known cases");
    }

    let draw = |seed: u64| -> Vec<f64> {
        let mut s = GaussianStream::keyed(seed, &[3, 1]);
        (0..1000).map(|_| s.next_normal()).collect()
    };
    if draw(11) != draw(11) || draw(11) == draw(12) {
        failures.push("rng determinism");
    }

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "kron mixed product, vec/kron identity, residual orthogonality, spectral radius, rng determinism".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn disclosure() -> Outcome {
    outcome(
        true,
        "published rho(Ã) table values and error curves come from an unreported random seed and are \
         not reproduced numerically; criteria 1-4 check the same properties on fresh systems"
            .into(),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("rate law", rate_law),
        ("noise independence", noise_independence),
        ("input strength effect", input_strength_effect),
        ("rho(Ã) table shape", table1_shape),
        ("small-ball thresholds", bmsb_thresholds),
        ("covariance oracle", covariance_oracle),
        ("exact recovery", exact_recovery),
        ("numerics suite", numerics_suite),
        ("non-reproducible disclosure", disclosure),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {} - {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

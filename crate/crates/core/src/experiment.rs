//! Pure parts of the experiment harness: random system generation, sweep
//! planning, single-case execution, ρ(Ã) tables, rate fitting and the BMSB
//! configuration grid. Parallel execution and CSV output live in the CLI crate.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::bmsb::{
    bmsb_check, event_u_check, event_w_given_u_check, paley_zygmund_check, split_direction,
    BmsbEstimate, FiltrationState,
};
use crate::error::{Error, Result};
use crate::identification::{error_metrics, estimate};
use crate::linalg::{spectral_radius, Matrix, Vector, DEFAULT_SQUARINGS};
use crate::model::{simulate_standard_start, BilinearSystem, NoiseParams};
use crate::rng::{derive_seed, GaussianStream, Role};

/// Matrices whose sampled spectral radius falls below this are redrawn.
pub const MIN_SAMPLED_RADIUS: f64 = 1e-12;

/// Minimum number of distinct horizons for [`fit_rate`].
pub const MIN_RATE_POINTS: usize = 3;

/// Which noise level a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVariable {
    SigmaU,
    SigmaW,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SigmaU => "sigma_u",
            SweepVariable::SigmaW => "sigma_w",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sigma_u" => Some(SweepVariable::SigmaU),
            "sigma_w" => Some(SweepVariable::SigmaW),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    /// Target `ρ(A_0)`.
    pub rho0: f64,
    /// Target `ρ(A_k)` for every `k ≥ 1`.
    pub rhok: f64,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    /// The standard deviation that is not swept.
    pub fixed_sigma: f64,
    pub t_values: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub delta: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let m = 4;
        Self {
            n: 8,
            m,
            rho0: 0.6,
            rhok: 1.0 / m as f64,
            sweep_variable: SweepVariable::SigmaU,
            sweep_values: vec![0.3, 0.6, 1.0, 1.2, 1.5],
            fixed_sigma: 0.3,
            t_values: log_spaced(50, 5000, 10),
            repetitions: 20,
            base_seed: 1,
            delta: 0.05,
        }
    }
}

/// `count` integers log-spaced from `lo` to `hi`, rounded and deduplicated.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (libm::log(lo as f64), libm::log(hi as f64));
    let mut out: Vec<usize> = (0..count)
        .map(|i| libm::round(libm::exp(a + (b - a) * i as f64 / (count - 1) as f64)) as usize)
        .collect();
    out.dedup();
    out
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.n == 0 || self.m == 0 {
            return fail(format!("n and m must be positive, got n = {}, m = {}", self.n, self.m));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) || !(self.rhok > 0.0 && self.rhok.is_finite()) {
            return fail(format!(
                "rho0 and rhok must be positive, got {} and {}",
                self.rho0, self.rhok
            ));
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if self.sweep_values.is_empty() {
            return fail("sweep_values is empty".into());
        }
        if let Some(v) = self.sweep_values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return fail(format!("sweep value {v} is not positive"));
        }
        let fixed_ok = match self.sweep_variable {
            SweepVariable::SigmaU => self.fixed_sigma >= 0.0,
            SweepVariable::SigmaW => self.fixed_sigma > 0.0,
        };
        if !fixed_ok || !self.fixed_sigma.is_finite() {
            return fail(format!("fixed_sigma = {} is out of range", self.fixed_sigma));
        }
        if self.t_values.is_empty() || self.t_values[0] == 0 {
            return fail("T_values must be nonempty and positive".into());
        }
        if self.t_values.windows(2).any(|w| w[0] >= w[1]) {
            return fail("T_values must be strictly increasing".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        Ok(())
    }

    /// `(σ_u, σ_w)` for a sweep value.
    pub fn noise_for(&self, sweep_value: f64) -> Result<NoiseParams> {
        match self.sweep_variable {
            SweepVariable::SigmaU => NoiseParams::new(sweep_value, self.fixed_sigma),
            SweepVariable::SigmaW => NoiseParams::new(self.fixed_sigma, sweep_value),
        }
    }

    pub fn system_seed(&self) -> u64 {
        derive_seed(self.base_seed, &[Role::System as u64])
    }

    /// Seed of trial `trial`, shared by every sweep value and horizon.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        derive_seed(self.base_seed, &[Role::Trial as u64, trial as u64])
    }

    pub fn row_count(&self) -> usize {
        self.sweep_values.len() * self.t_values.len() * self.repetitions
    }
}

/// Random system with `ρ(A_0) = rho0` and `ρ(A_k) = rhok`.
///
/// Each matrix is filled with standard normals and rescaled by its spectral
/// radius. Matrix `k` draws from the `(System, k, attempt)` substream.
pub fn generate_system(n: usize, m: usize, rho0: f64, rhok: f64, seed: u64) -> Result<BilinearSystem> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyDimension);
    }
    if !(rho0 > 0.0 && rho0.is_finite()) || !(rhok > 0.0 && rhok.is_finite()) {
        return Err(Error::parameter("target spectral radii must be positive"));
    }
    let matrices = (0..=m)
        .map(|k| {
            let target = if k == 0 { rho0 } else { rhok };
            let mut attempt = 0u64;
            loop {
                let mut stream =
                    GaussianStream::keyed(seed, &[Role::System as u64, k as u64, attempt]);
                let a = Matrix::from_fn(n, n, |_, _| stream.next_normal());
                let rho = spectral_radius(&a, DEFAULT_SQUARINGS)?.value;
                if rho >= MIN_SAMPLED_RADIUS {
                    return Ok(a.scaled(target / rho));
                }
                attempt += 1;
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BilinearSystem::new(matrices)
}

/// `ρ(Ã(σ_u))` for each value.
pub fn table1_report(sys: &BilinearSystem, sigma_u_values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sigma_u_values.is_empty() {
        return Err(Error::parameter("table1_report needs at least one sigma_u"));
    }
    sigma_u_values
        .iter()
        .map(|&s| Ok((s, sys.rho_tilde(s)?)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    RankError,
    UnstableConfig,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::RankError => "rank_error",
            RowStatus::UnstableConfig => "unstable_config",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(RowStatus::Ok),
            "rank_error" => Some(RowStatus::RankError),
            "unstable_config" => Some(RowStatus::UnstableConfig),
            _ => None,
        }
    }
}

/// One `(sweep value, T, trial)` outcome. Metrics are `None` when the status
/// prevented computing them.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub trial: usize,
    pub horizon: usize,
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub err0_normalized: Option<f64>,
    pub errk_avg_normalized: Option<f64>,
    pub composite_error: Option<f64>,
    pub cond_xtilde: Option<f64>,
    pub rho_atilde: f64,
    pub max_state_norm: Option<f64>,
    pub seed: u64,
    pub status: RowStatus,
}

/// One unit of work in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCase {
    pub value_index: usize,
    pub noise: NoiseParams,
    pub horizon: usize,
    pub trial: usize,
    pub seed: u64,
}

/// First `base_seed` in `start..start + attempts` whose sweep system has
/// `ρ(Ã) ≤ 1` at every swept input strength, with the rest of `cfg` kept.
///
/// `ρ(Ã(σ_u))` is nondecreasing, so only the largest `σ_u` is checked.
pub fn stable_base_seed(cfg: &ExperimentConfig, start: u64, attempts: u64) -> Result<Option<u64>> {
    cfg.validate()?;
    let sigma_u = cfg
        .sweep_values
        .iter()
        .map(|&v| cfg.noise_for(v).map(|p| p.sigma_u()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    for seed in start..start.saturating_add(attempts) {
        let trial = ExperimentConfig {
            base_seed: seed,
            ..cfg.clone()
        };
        let sys = generate_system(cfg.n, cfg.m, cfg.rho0, cfg.rhok, trial.system_seed())?;
        if sys.rho_tilde(sigma_u)? <= 1.0 {
            return Ok(Some(seed));
        }
    }
    Ok(None)
}

/// The fixed system of a sweep and its `ρ(Ã)` per sweep value.
#[derive(Clone, Debug)]
pub struct SweepContext {
    pub system: BilinearSystem,
    pub rho_atilde: Vec<f64>,
}

impl SweepContext {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let system = generate_system(cfg.n, cfg.m, cfg.rho0, cfg.rhok, cfg.system_seed())?;
        let rho_atilde = cfg
            .sweep_values
            .iter()
            .map(|&v| system.rho_tilde(cfg.noise_for(v)?.sigma_u()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { system, rho_atilde })
    }
}

/// All cases in output order: sweep value, then `T`, then trial.
pub fn sweep_plan(cfg: &ExperimentConfig) -> Result<Vec<SweepCase>> {
    cfg.validate()?;
    let mut cases = Vec::with_capacity(cfg.row_count());
    for (value_index, &value) in cfg.sweep_values.iter().enumerate() {
        let noise = cfg.noise_for(value)?;
        for &horizon in &cfg.t_values {
            for trial in 0..cfg.repetitions {
                cases.push(SweepCase {
                    value_index,
                    noise,
                    horizon,
                    trial,
                    seed: cfg.trial_seed(trial),
                });
            }
        }
    }
    Ok(cases)
}

/// Simulate, estimate and score one case. Rank failures and unstable
/// configurations become flagged rows.
pub fn run_case(ctx: &SweepContext, case: &SweepCase) -> Result<ExperimentRow> {
    let rho = ctx.rho_atilde[case.value_index];
    let mut row = ExperimentRow {
        trial: case.trial,
        horizon: case.horizon,
        sigma_u: case.noise.sigma_u(),
        sigma_w: case.noise.sigma_w(),
        err0_normalized: None,
        errk_avg_normalized: None,
        composite_error: None,
        cond_xtilde: None,
        rho_atilde: rho,
        max_state_norm: None,
        seed: case.seed,
        status: RowStatus::UnstableConfig,
    };
    if rho > 1.0 {
        return Ok(row);
    }
    let traj = match simulate_standard_start(&ctx.system, case.noise, case.horizon, case.seed) {
        Ok(t) => t,
        Err(Error::Parameter(_)) => return Ok(row),
        Err(e) => return Err(e),
    };
    row.max_state_norm = Some(traj.max_state_norm());
    match estimate(&traj) {
        Ok(result) => {
            let result = error_metrics(result, &ctx.system)?;
            row.err0_normalized = result.err0_normalized();
            row.errk_avg_normalized = result.errk_avg_normalized();
            row.composite_error = result.composite_error;
            row.cond_xtilde = Some(result.design_condition);
            row.status = RowStatus::Ok;
        }
        Err(Error::RankDeficient { .. } | Error::Underdetermined { .. }) => {
            row.status = RowStatus::RankError;
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Sequential sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let ctx = SweepContext::new(cfg)?;
    sweep_plan(cfg)?.iter().map(|c| run_case(&ctx, c)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Err0Normalized,
    ErrkAvgNormalized,
    CompositeError,
}

impl Metric {
    pub fn of(self, row: &ExperimentRow) -> Option<f64> {
        match self {
            Metric::Err0Normalized => row.err0_normalized,
            Metric::ErrkAvgNormalized => row.errk_avg_normalized,
            Metric::CompositeError => row.composite_error,
        }
    }
}

/// Statistics of one metric over the ok rows of a `(σ_u, σ_w, T)` group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub horizon: usize,
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub std_dev: f64,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    })
}

/// Per-group summaries, in order of first appearance.
pub fn summarize(rows: &[ExperimentRow], metric: Metric) -> Vec<GroupSummary> {
    let mut groups: Vec<((u64, u64, usize), Vec<f64>)> = Vec::new();
    for row in rows.iter().filter(|r| r.status == RowStatus::Ok) {
        let Some(x) = metric.of(row).filter(|x| x.is_finite()) else {
            continue;
        };
        let key = (row.sigma_u.to_bits(), row.sigma_w.to_bits(), row.horizon);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(x),
            None => groups.push((key, vec![x])),
        }
    }
    groups
        .into_iter()
        .map(|((su, sw, horizon), mut values)| {
            let count = values.len();
            let mean = values.iter().sum::<f64>() / count as f64;
            let var = if count > 1 {
                values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (count - 1) as f64
            } else {
                0.0
            };
            GroupSummary {
                sigma_u: f64::from_bits(su),
                sigma_w: f64::from_bits(sw),
                horizon,
                count,
                median: median(&mut values).unwrap_or(f64::NAN),
                mean,
                std_dev: libm::sqrt(var),
            }
        })
        .collect()
}

/// Log-log fit of the median error against `T` for one `(σ_u, σ_w)` group.
#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `(T, median)` pairs used in the fit.
    pub points: Vec<(usize, f64)>,
}

/// OLS slope of `log(median metric)` against `log T`, per `(σ_u, σ_w)` group.
pub fn fit_rate(rows: &[ExperimentRow], metric: Metric) -> Result<Vec<RateFit>> {
    let mut fits: Vec<RateFit> = Vec::new();
    for s in summarize(rows, metric) {
        let fit = match fits
            .iter_mut()
            .find(|f| f.sigma_u.to_bits() == s.sigma_u.to_bits() && f.sigma_w.to_bits() == s.sigma_w.to_bits())
        {
            Some(f) => f,
            None => {
                fits.push(RateFit {
                    sigma_u: s.sigma_u,
                    sigma_w: s.sigma_w,
                    slope: f64::NAN,
                    intercept: f64::NAN,
                    points: Vec::new(),
                });
                fits.last_mut().unwrap()
            }
        };
        if s.median > 0.0 {
            fit.points.push((s.horizon, s.median));
        }
    }
    if fits.is_empty() {
        return Err(Error::InsufficientData {
            found: 0,
            required: MIN_RATE_POINTS,
        });
    }
    for fit in &mut fits {
        fit.points.sort_by_key(|p| p.0);
        if fit.points.len() < MIN_RATE_POINTS {
            return Err(Error::InsufficientData {
                found: fit.points.len(),
                required: MIN_RATE_POINTS,
            });
        }
        let xs: Vec<f64> = fit.points.iter().map(|p| libm::log(p.0 as f64)).collect();
        let ys: Vec<f64> = fit.points.iter().map(|p| libm::log(p.1)).collect();
        let (slope, intercept) = ols_line(&xs, &ys);
        fit.slope = slope;
        fit.intercept = intercept;
    }
    Ok(fits)
}

fn ols_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One `(system, direction, filtration state)` triple for the BMSB checks.
#[derive(Clone, Debug)]
pub struct BmsbConfig {
    pub id: usize,
    pub system: BilinearSystem,
    pub noise: NoiseParams,
    pub state: FiltrationState,
    pub direction: Vector,
    pub seed: u64,
}

/// Steps simulated to reach the filtration state of a BMSB configuration.
pub const BMSB_BURN_IN: usize = 10;

/// `count` random configurations: a fresh system from `cfg`'s class, noise
/// levels cycling through the sweep values, a uniform unit direction and the
/// state reached after [`BMSB_BURN_IN`] steps.
pub fn bmsb_configurations(cfg: &ExperimentConfig, count: usize) -> Result<Vec<BmsbConfig>> {
    cfg.validate()?;
    (0..count)
        .map(|id| {
            let seed = derive_seed(cfg.base_seed, &[Role::Filtration as u64, id as u64]);
            let system = generate_system(
                cfg.n,
                cfg.m,
                cfg.rho0,
                cfg.rhok,
                derive_seed(seed, &[Role::System as u64]),
            )?;
            let noise = cfg.noise_for(cfg.sweep_values[id % cfg.sweep_values.len()])?;
            // The burn-in needs some noise to leave the origin even when σ_w = 0.
            let walk = NoiseParams::new(noise.sigma_u(), noise.sigma_w().max(f64::MIN_POSITIVE))?;
            let traj = simulate_standard_start(&system, walk, BMSB_BURN_IN, seed)?;
            let state = FiltrationState {
                x: traj.states()[BMSB_BURN_IN].clone(),
                u: traj.inputs()[BMSB_BURN_IN].clone(),
            };
            let mut stream = GaussianStream::keyed(seed, &[Role::Direction as u64]);
            let raw: Vec<f64> = (0..system.lifted_dim()).map(|_| stream.next_normal()).collect();
            let len = libm::sqrt(raw.iter().map(|x| x * x).sum());
            let direction = Vector::new(raw.into_iter().map(|x| x / len).collect())?;
            Ok(BmsbConfig {
                id,
                system,
                noise,
                state,
                direction,
                seed: derive_seed(seed, &[Role::MonteCarlo as u64]),
            })
        })
        .collect()
}

pub const BMSB_CHECKS: [&str; 4] = ["bmsb", "event_u", "event_w_given_u", "paley_zygmund"];

#[derive(Clone, Debug, PartialEq)]
pub struct BmsbReportRow {
    pub config: usize,
    pub check: &'static str,
    pub outcome: core::result::Result<BmsbEstimate, Error>,
}

/// Run the four checks of [`BMSB_CHECKS`] on one configuration.
pub fn run_bmsb_config(c: &BmsbConfig, samples: usize) -> Vec<BmsbReportRow> {
    let n = c.system.n();
    let outcomes = [
        bmsb_check(&c.system, c.noise, &c.state, &c.direction, samples, c.seed),
        event_u_check(&c.direction, n, samples, c.seed),
        event_w_given_u_check(&c.system, c.noise, &c.state, &c.direction, samples, c.seed),
        split_direction(&c.direction, n).and_then(|(_, v)| paley_zygmund_check(&v, samples, c.seed)),
    ];
    BMSB_CHECKS
        .iter()
        .zip(outcomes)
        .map(|(&check, outcome)| BmsbReportRow {
            config: c.id,
            check,
            outcome,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n: 2,
            m: 1,
            rhok: 0.3,
            sweep_values: vec![0.5, 1.0],
            t_values: vec![3, 50, 200],
            repetitions: 2,
            ..ExperimentConfig::default()
        }
    }

    fn row(horizon: usize, err: f64) -> ExperimentRow {
        ExperimentRow {
            trial: 0,
            horizon,
            sigma_u: 1.0,
            sigma_w: 0.3,
            err0_normalized: Some(err),
            errk_avg_normalized: Some(err),
            composite_error: Some(err),
            cond_xtilde: Some(1.0),
            rho_atilde: 0.5,
            max_state_norm: Some(1.0),
            seed: 0,
            status: RowStatus::Ok,
        }
    }

    #[test]
    fn default_grid() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.t_values.len(), 10);
        assert_eq!(cfg.t_values[0], 50);
        assert_eq!(*cfg.t_values.last().unwrap(), 5000);
        assert_eq!(cfg.row_count(), 1000);
    }

    #[test]
    fn validation_rejects() {
        let base = ExperimentConfig::default();
        let bad = [
            ExperimentConfig { repetitions: 0, ..base.clone() },
            ExperimentConfig { sweep_values: vec![], ..base.clone() },
            ExperimentConfig { sweep_values: vec![1.0, -0.5], ..base.clone() },
            ExperimentConfig { t_values: vec![100, 100], ..base.clone() },
            ExperimentConfig { t_values: vec![200, 100], ..base.clone() },
            ExperimentConfig { delta: 1.0, ..base.clone() },
            ExperimentConfig { rho0: 0.0, ..base.clone() },
            ExperimentConfig {
                sweep_variable: SweepVariable::SigmaW,
                fixed_sigma: 0.0,
                ..base.clone()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn generated_radii_and_determinism() {
        let a = generate_system(5, 3, 0.6, 0.25, 11).unwrap();
        assert_eq!(a, generate_system(5, 3, 0.6, 0.25, 11).unwrap());
        assert_ne!(a, generate_system(5, 3, 0.6, 0.25, 12).unwrap());
        for (k, mat) in a.matrices().iter().enumerate() {
            let rho = spectral_radius(mat, DEFAULT_SQUARINGS).unwrap().value;
            let target = if k == 0 { 0.6 } else { 0.25 };
            assert!((rho - target).abs() < 1e-8 * target);
        }
    }

    #[test]
    fn table1_scalar() {
        let sys = BilinearSystem::new(vec![
            Matrix::from_row_major(1, 1, &[0.6]).unwrap(),
            Matrix::from_row_major(1, 1, &[0.5]).unwrap(),
        ])
        .unwrap();
        let table = table1_report(&sys, &[0.3, 0.6, 1.0]).unwrap();
        for ((_, got), want) in table.iter().zip([0.3825, 0.45, 0.61]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!(table1_report(&sys, &[]).is_err());
    }

    #[test]
    fn plan_order_and_count() {
        let cfg = small_cfg();
        let plan = sweep_plan(&cfg).unwrap();
        assert_eq!(plan.len(), 12);
        assert_eq!((plan[0].value_index, plan[0].horizon, plan[0].trial), (0, 3, 0));
        assert_eq!((plan[1].value_index, plan[1].horizon, plan[1].trial), (0, 3, 1));
        assert_eq!((plan[2].value_index, plan[2].horizon, plan[2].trial), (0, 50, 0));
        assert_eq!(plan[11].value_index, 1);
        assert_eq!(plan[0].seed, plan[6].seed);
    }

    #[test]
    fn sweep_flags_rank_errors() {
        let rows = run_sweep(&small_cfg()).unwrap();
        assert_eq!(rows.len(), 12);
        for r in &rows {
            if r.horizon == 3 {
                assert_eq!(r.status, RowStatus::RankError);
                assert!(r.composite_error.is_none());
            } else {
                assert_eq!(r.status, RowStatus::Ok);
                assert!(r.composite_error.unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn unstable_config_rows() {
        let cfg = ExperimentConfig {
            sweep_values: vec![50.0],
            t_values: vec![100],
            repetitions: 1,
            ..small_cfg()
        };
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].status, RowStatus::UnstableConfig);
        assert!(rows[0].rho_atilde > 1.0);
    }

    #[test]
    fn stable_seed_search() {
        let cfg = ExperimentConfig {
            sweep_values: vec![1.5],
            ..ExperimentConfig::default()
        };
        let seed = stable_base_seed(&cfg, 0, 50).unwrap().unwrap();
        let ctx = SweepContext::new(&ExperimentConfig { base_seed: seed, ..cfg.clone() }).unwrap();
        assert!(ctx.rho_atilde[0] <= 1.0);
        for earlier in 0..seed {
            let ctx = SweepContext::new(&ExperimentConfig { base_seed: earlier, ..cfg.clone() }).unwrap();
            assert!(ctx.rho_atilde[0] > 1.0);
        }
        let hopeless = ExperimentConfig { sweep_values: vec![100.0], ..cfg };
        assert_eq!(stable_base_seed(&hopeless, 0, 3).unwrap(), None);
    }

    #[test]
    fn fit_exact_power_laws() {
        let ts = [100, 400, 1600, 6400];
        let rows: Vec<_> = ts.iter().map(|&t| row(t, 3.0 / (t as f64).sqrt())).collect();
        let fit = fit_rate(&rows, Metric::CompositeError).unwrap();
        assert_eq!(fit.len(), 1);
        assert!((fit[0].slope + 0.5).abs() < 1e-12);
        let rows: Vec<_> = ts.iter().map(|&t| row(t, 2.0 / t as f64)).collect();
        let fit = fit_rate(&rows, Metric::CompositeError).unwrap();
        assert!((fit[0].slope + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_needs_three_horizons() {
        let rows = [row(100, 0.1), row(200, 0.05)];
        assert_eq!(
            fit_rate(&rows, Metric::CompositeError).unwrap_err(),
            Error::InsufficientData { found: 2, required: 3 }
        );
    }

    #[test]
    fn summary_median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
        let rows = [row(10, 1.0), row(10, 3.0)];
        let s = summarize(&rows, Metric::Err0Normalized);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].median, s[0].mean), (2.0, 2.0));
        assert!((s[0].std_dev - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bmsb_configurations_deterministic() {
        let cfg = ExperimentConfig { n: 3, m: 2, ..ExperimentConfig::default() };
        let a = bmsb_configurations(&cfg, 3).unwrap();
        let b = bmsb_configurations(&cfg, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.system, y.system);
            assert_eq!(x.direction, y.direction);
            assert_eq!(x.state, y.state);
            assert!((x.direction.norm() - 1.0).abs() < 1e-12);
        }
        let rows = run_bmsb_config(&a[0], 20_000);
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.outcome.as_ref().unwrap().passed));
    }

    #[test]
    fn bmsb_zero_noise_rows_error() {
        let cfg = ExperimentConfig {
            n: 2,
            m: 1,
            fixed_sigma: 0.0,
            ..ExperimentConfig::default()
        };
        let c = &bmsb_configurations(&cfg, 1).unwrap()[0];
        let rows = run_bmsb_config(c, 1000);
        assert!(rows[0].outcome.is_err());
        assert!(rows[2].outcome.is_err());
        assert!(rows[1].outcome.is_ok());
        assert!(rows[3].outcome.is_ok());
    }
}

//! Seeded synthetic instances, recovery metrics, exact-recovery tables,
//! phase-transition grids, and Monte-Carlo checks of the two sampling
//! lemmas the recovery theory rests on.
//!
//! Everything is deterministic given a base seed. Nested randomness (factor
//! draws, mask, corruption support, noise, per-trial streams) uses seeds
//! derived by a splitmix64 chain over the base seed and the stream indices,
//! so grid cells and trials can run on any number of workers in any order
//! without changing a single number.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::sampling::{
    project_omega, project_tangent, sample_mask, sample_without_replacement, ObservationMask,
    SamplingModel, TangentSpace,
};
use crate::solver::{default_lambda, solve_rtc, AdmmConfig, Problem};
use crate::tensor::{spectral_norm, t_product, Tensor3};
use crate::tsvd::{tsvd_skinny, tubal_ranks, RANK_THRESHOLD};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for a named stream under a base seed.
pub fn derive_seed(base: u64, stream: &[u64]) -> u64 {
    stream.iter().fold(splitmix64(base), |acc, &part| splitmix64(acc ^ part))
}

/// Distribution of the factor entries of the clean tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorDist {
    /// Standard normal.
    Gaussian,
    /// Uniform on [-1, 1).
    Uniform,
    /// Symmetric signs, +1 or -1 with equal probability.
    Bernoulli,
}

impl FactorDist {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            FactorDist::Gaussian => rng.sample(StandardNormal),
            FactorDist::Uniform => rng.random_range(-1.0..1.0),
            FactorDist::Bernoulli => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Where the corrupted entries are drawn from. The recovery theory corrupts
/// each observed entry independently, so `Observed` is the default; `All`
/// corrupts a fraction of every entry regardless of observation, for
/// protocols phrased that way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptionScope {
    Observed,
    All,
}

/// Recipe for one synthetic instance: a rank-`rank` clean tensor `p * w`,
/// additive Gaussian corruption on a `gamma` fraction of entries, and a
/// `rho` fraction observed.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub dims: (usize, usize, usize),
    pub rank: usize,
    pub rho: f64,
    pub gamma: f64,
    /// Standard deviation of the additive corruption.
    pub corruption_std: f64,
    pub factor_dist: FactorDist,
    pub corruption_scope: CorruptionScope,
    pub observation_model: SamplingModel,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Cubic `n x n x n` instance with the standard protocol: Gaussian
    /// factors, unit corruption, uniform observation.
    pub fn cubic(n: usize, rank: usize, rho: f64, gamma: f64, seed: u64) -> Self {
        SyntheticSpec {
            dims: (n, n, n),
            rank,
            rho,
            gamma,
            corruption_std: 1.0,
            factor_dist: FactorDist::Gaussian,
            corruption_scope: CorruptionScope::Observed,
            observation_model: SamplingModel::UniformWithoutReplacement,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let (n1, n2, n3) = self.dims;
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::InvalidSpec(format!("empty dims {:?}", self.dims)));
        }
        if self.rank == 0 || self.rank > n1.min(n2) {
            return Err(Error::InvalidSpec(format!(
                "rank {} outside 1..={}",
                self.rank,
                n1.min(n2)
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidSpec(format!("rho {} outside (0, 1]", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidSpec(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if !(self.corruption_std >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "corruption_std {} must be nonnegative",
                self.corruption_std
            )));
        }
        Ok(())
    }
}

/// A generated instance: ground truth, observed data, mask, and the flat
/// indices that received corruption.
#[derive(Debug, Clone)]
pub struct Instance {
    pub l0: Tensor3,
    pub x_observed: Tensor3,
    pub mask: ObservationMask,
    pub corruption_support: Vec<usize>,
}

/// Draws a seeded instance from a recipe. The corruption support has
/// forced cardinality `round(gamma * |pool|)` chosen uniformly without
/// replacement from the scope pool.
pub fn gen_instance(spec: &SyntheticSpec) -> Result<Instance> {
    spec.validate()?;
    let (n1, n2, n3) = spec.dims;

    let mut factor_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[1]));
    let p = Tensor3::from_fn((n1, spec.rank, n3), |_, _, _| spec.factor_dist.sample(&mut factor_rng));
    let w = Tensor3::from_fn((spec.rank, n2, n3), |_, _, _| spec.factor_dist.sample(&mut factor_rng));
    let l0 = t_product(&p, &w)?;

    let mask = sample_mask(spec.dims, spec.rho, spec.observation_model, derive_seed(spec.seed, &[2]))?;

    let mut corrupt_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[3]));
    let pool: Vec<usize> = match spec.corruption_scope {
        CorruptionScope::Observed => mask.flat_indices().to_vec(),
        CorruptionScope::All => (0..l0.len()).collect(),
    };
    let count = (spec.gamma * pool.len() as f64).round() as usize;
    let mut support: Vec<usize> = sample_without_replacement(&mut corrupt_rng, pool.len(), count)
        .into_iter()
        .map(|pos| pool[pos])
        .collect();
    support.sort_unstable();

    let mut x = l0.clone();
    for &idx in &support {
        let noise: f64 = corrupt_rng.sample::<f64, _>(StandardNormal);
        x.as_mut_slice()[idx] += spec.corruption_std * noise;
    }
    let x_observed = project_omega(&x, &mask, false)?;

    Ok(Instance { l0, x_observed, mask, corruption_support: support })
}

/// `||l - l0||_F / ||l0||_F`.
pub fn rel_error(l: &Tensor3, l0: &Tensor3) -> Result<f64> {
    if l.dims() != l0.dims() {
        return Err(Error::dims(l.dims(), l0.dims(), "rel_error"));
    }
    let denom = l0.fro_norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((l - l0).fro_norm() / denom)
}

/// Root mean square deviation between `l` and `x` over the unobserved set
/// (the complement of `mask`).
pub fn rmse(l: &Tensor3, x: &Tensor3, mask: &ObservationMask) -> Result<f64> {
    if l.dims() != x.dims() {
        return Err(Error::dims(l.dims(), x.dims(), "rmse"));
    }
    if l.dims() != mask.dims() {
        return Err(Error::dims(l.dims(), mask.dims(), "rmse mask"));
    }
    let unobserved = mask.total() - mask.len();
    if unobserved == 0 {
        return Err(Error::EmptySet);
    }
    let mut acc = 0.0;
    for idx in 0..l.len() {
        if !mask.contains_flat(idx) {
            let d = l.as_slice()[idx] - x.as_slice()[idx];
            acc += d * d;
        }
    }
    Ok((acc / unobserved as f64).sqrt())
}

/// Peak signal-to-noise ratio in decibels, with the mean square error taken
/// over all entries.
pub fn psnr(l: &Tensor3, reference: &Tensor3, peak: f64) -> Result<f64> {
    if l.dims() != reference.dims() {
        return Err(Error::dims(l.dims(), reference.dims(), "psnr"));
    }
    assert!(peak > 0.0, "peak must be positive");
    let mse = (l - reference).fro_norm().powi(2) / l.len() as f64;
    if mse == 0.0 {
        return Err(Error::IdenticalInputs);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Outcome of one synthetic recovery run.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub rel_error: f64,
    pub recovered_rank: usize,
    pub success: bool,
    pub iters: usize,
    pub wall_time: Duration,
}

/// Generates an instance, solves RTC with the default lambda, and grades
/// the outcome against `success_tol`.
pub fn run_trial(spec: &SyntheticSpec, success_tol: f64) -> Result<TrialResult> {
    let instance = gen_instance(spec)?;
    let cfg = AdmmConfig::new(default_lambda(spec.dims, spec.rho, Problem::Rtc)?);
    let out = solve_rtc(&instance.x_observed, &instance.mask, &cfg)?;
    let rel = rel_error(&out.l, &instance.l0)?;
    Ok(TrialResult {
        rel_error: rel,
        recovered_rank: tubal_ranks(&out.l, RANK_THRESHOLD)?.tubal_rank,
        success: rel <= success_tol,
        iters: out.iters,
        wall_time: out.wall_time,
    })
}

/// One row of an exact-recovery table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub n: usize,
    pub r: usize,
    pub seed: u64,
    pub recovered_rank: usize,
    pub rel_error: f64,
}

/// Runs one solver per scenario with the default lambda and collects the
/// table columns. Published tables report a single run per setting; here
/// each seed is its own scenario so the spread is visible.
pub fn run_recovery_table(scenarios: &[SyntheticSpec]) -> Result<Vec<TableRow>> {
    scenarios
        .iter()
        .map(|spec| {
            let trial = run_trial(spec, 1e-3)?;
            Ok(TableRow {
                n: spec.dims.0,
                r: spec.rank,
                seed: spec.seed,
                recovered_rank: trial.recovered_rank,
                rel_error: trial.rel_error,
            })
        })
        .collect()
}

/// Axes of a phase-transition study over (rank, corruption fraction) at a
/// fixed observation rate, on cubic `n x n x n` data.
#[derive(Debug, Clone)]
pub struct PhaseGridRequest {
    pub n: usize,
    pub r_values: Vec<usize>,
    pub gamma_values: Vec<f64>,
    pub rho: f64,
    pub base_seed: u64,
}

/// Success fractions per cell; `fractions[ri][gi]` pairs `r_values[ri]`
/// with `gamma_values[gi]`, and every entry is a multiple of `1/trials`.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    pub r_values: Vec<usize>,
    pub gamma_values: Vec<f64>,
    pub rho: f64,
    pub trials: usize,
    pub fractions: Vec<Vec<f64>>,
}

/// Runs `trials` seeded recoveries per cell on `jobs` workers. The per-run
/// seed depends only on (base seed, r index, gamma index, trial index), so
/// the grid is reproducible at any worker count.
pub fn run_phase_grid(
    request: &PhaseGridRequest,
    trials: usize,
    success_tol: f64,
    jobs: usize,
) -> Result<PhaseGrid> {
    if trials == 0 {
        return Err(Error::InvalidSpec("trials must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::NumericalFailure(format!("worker pool: {e}")))?;

    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for ri in 0..request.r_values.len() {
        for gi in 0..request.gamma_values.len() {
            for t in 0..trials {
                cells.push((ri, gi, t));
            }
        }
    }

    let outcomes: Vec<(usize, usize, bool)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(ri, gi, t)| {
                let spec = SyntheticSpec::cubic(
                    request.n,
                    request.r_values[ri],
                    request.rho,
                    request.gamma_values[gi],
                    derive_seed(request.base_seed, &[ri as u64, gi as u64, t as u64]),
                );
                let trial = run_trial(&spec, success_tol)?;
                Ok((ri, gi, trial.success))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut fractions = vec![vec![0.0f64; request.gamma_values.len()]; request.r_values.len()];
    for (ri, gi, success) in outcomes {
        if success {
            fractions[ri][gi] += 1.0 / trials as f64;
        }
    }
    Ok(PhaseGrid {
        r_values: request.r_values.clone(),
        gamma_values: request.gamma_values.clone(),
        rho: request.rho,
        trials,
        fractions,
    })
}

/// Estimates `|| rho^-1 P_T P_Omega P_T - P_T ||_op` for `trials` random
/// tangent spaces and Bernoulli masks on `n x n x n3` data, by power
/// iteration on the squared operator (50 iterations, early exit once the
/// eigenvalue estimate moves by less than 1e-6 relative).
pub fn lemma1_check(
    n: usize,
    n3: usize,
    r: usize,
    rho: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if r >= n {
        return Err(Error::InvalidSpec(format!("need r < n, got r = {r}, n = {n}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidRate(rho));
    }
    let dims = (n, n, n3);
    let mut estimates = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64, 1]));
        let p = Tensor3::from_fn((n, r, n3), |_, _, _| rng.sample(StandardNormal));
        let w = Tensor3::from_fn((r, n, n3), |_, _, _| rng.sample(StandardNormal));
        let l0 = t_product(&p, &w)?;
        let factors = tsvd_skinny(&l0, r)?;
        let tangent = TangentSpace::new(factors.u, factors.v)?;
        let mask = sample_mask(dims, rho, SamplingModel::Bernoulli, derive_seed(seed, &[t as u64, 2]))?;

        let apply = |z: &Tensor3| -> Result<Tensor3> {
            let pt = project_tangent(z, &tangent, false)?;
            let sampled = project_omega(&pt, &mask, false)?;
            let back = project_tangent(&sampled, &tangent, false)?;
            Ok(&back.scale(1.0 / rho) - &pt)
        };

        let mut z_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t as u64, 3]));
        let mut z = Tensor3::from_fn(dims, |_, _, _| z_rng.sample(StandardNormal));
        let norm = z.fro_norm();
        z = z.scale(1.0 / norm);

        let mut estimate = 0.0f64;
        for _ in 0..50 {
            let dz = apply(&z)?;
            let d2z = apply(&dz)?;
            let lambda_sq = d2z.fro_norm();
            if lambda_sq < 1e-30 {
                estimate = 0.0;
                break;
            }
            let next = lambda_sq.sqrt();
            let done = (next - estimate).abs() <= 1e-6 * next.max(1e-30);
            estimate = next;
            z = d2z.scale(1.0 / lambda_sq);
            if done {
                break;
            }
        }
        estimates.push(estimate);
    }
    Ok(estimates)
}

/// Draws Bernoulli sign tensors (`+1` w.p. `rho/2`, `-1` w.p. `rho/2`, `0`
/// otherwise) on `n x n x n3` and reports the spectral norm normalized by
/// `sqrt(n * n3)`, `draws` times per rate.
pub fn lemma4_check(
    n: usize,
    n3: usize,
    rho_values: &[f64],
    draws: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(rho_values.len());
    for (ri, &rho) in rho_values.iter().enumerate() {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidRate(rho));
        }
        let mut per_rho = Vec::with_capacity(draws);
        for d in 0..draws {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[ri as u64, d as u64]));
            let m = Tensor3::from_fn((n, n, n3), |_, _, _| {
                let u: f64 = rng.random();
                if u < rho / 2.0 {
                    1.0
                } else if u < rho {
                    -1.0
                } else {
                    0.0
                }
            });
            per_rho.push(spectral_norm(&m) / ((n * n3) as f64).sqrt());
        }
        out.push(per_rho);
    }
    Ok(out)
}

/// Median of a sample; NaN on empty input.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_stable_and_spreads() {
        assert_eq!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 2, 3]));
        assert_ne!(derive_seed(7, &[1, 2, 3]), derive_seed(7, &[1, 3, 2]));
        assert_ne!(derive_seed(7, &[0]), derive_seed(8, &[0]));
    }

    #[test]
    fn gen_instance_clean_fully_observed_is_exact() {
        let spec = SyntheticSpec::cubic(8, 2, 1.0, 0.0, 11);
        let inst = gen_instance(&spec).unwrap();
        assert_eq!(inst.x_observed, inst.l0);
        assert!(inst.corruption_support.is_empty());
    }

    #[test]
    fn gen_instance_rank_is_generic() {
        let spec = SyntheticSpec {
            dims: (30, 30, 10),
            rank: 3,
            ..SyntheticSpec::cubic(30, 3, 1.0, 0.0, 12)
        };
        let inst = gen_instance(&spec).unwrap();
        assert_eq!(tubal_ranks(&inst.l0, RANK_THRESHOLD).unwrap().tubal_rank, 3);
    }

    #[test]
    fn gen_instance_support_cardinality_is_forced() {
        let spec = SyntheticSpec {
            dims: (20, 20, 5),
            rank: 2,
            gamma: 0.1,
            ..SyntheticSpec::cubic(20, 2, 1.0, 0.1, 13)
        };
        let inst = gen_instance(&spec).unwrap();
        assert_eq!(inst.corruption_support.len(), 200);
    }

    #[test]
    fn gen_instance_is_deterministic() {
        let spec = SyntheticSpec::cubic(10, 2, 0.8, 0.2, 14);
        let a = gen_instance(&spec).unwrap();
        let b = gen_instance(&spec).unwrap();
        assert_eq!(a.l0, b.l0);
        assert_eq!(a.x_observed, b.x_observed);
        assert_eq!(a.corruption_support, b.corruption_support);
    }

    #[test]
    fn gen_instance_alternative_distributions() {
        for dist in [FactorDist::Uniform, FactorDist::Bernoulli] {
            let spec = SyntheticSpec {
                factor_dist: dist,
                ..SyntheticSpec::cubic(12, 2, 0.9, 0.1, 15)
            };
            let inst = gen_instance(&spec).unwrap();
            assert_eq!(tubal_ranks(&inst.l0, RANK_THRESHOLD).unwrap().tubal_rank, 2);
        }
    }

    #[test]
    fn gen_instance_validates() {
        let mut spec = SyntheticSpec::cubic(8, 0, 0.9, 0.1, 0);
        assert!(matches!(gen_instance(&spec), Err(Error::InvalidSpec(_))));
        spec.rank = 2;
        spec.gamma = 1.5;
        assert!(matches!(gen_instance(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn rel_error_basics() {
        let spec = SyntheticSpec::cubic(6, 2, 1.0, 0.0, 16);
        let l0 = gen_instance(&spec).unwrap().l0;
        assert_eq!(rel_error(&l0, &l0).unwrap(), 0.0);
        assert_eq!(rel_error(&Tensor3::zeros(l0.dims()), &l0).unwrap(), 1.0);
        let scaled = l0.scale(1.1);
        assert!((rel_error(&scaled, &l0).unwrap() - 0.1).abs() <= 1e-12);
        assert!(matches!(
            rel_error(&l0, &Tensor3::zeros(l0.dims())),
            Err(Error::ZeroReference)
        ));
    }

    #[test]
    fn rmse_basics() {
        let dims = (3, 3, 2);
        let mask = sample_mask(dims, 0.5, SamplingModel::Bernoulli, 17).unwrap();
        let x = Tensor3::from_fn(dims, |i, j, k| (i + 2 * j + 3 * k) as f64);
        assert_eq!(rmse(&x, &x, &mask).unwrap(), 0.0);

        // single unobserved entry with deviation 2
        let total = dims.0 * dims.1 * dims.2;
        let all_but_one = ObservationMask::from_flat_indices(
            dims,
            (1..total).collect(),
            SamplingModel::Bernoulli,
            0.9,
            0,
        )
        .unwrap();
        let mut l = x.clone();
        l.as_mut_slice()[0] += 2.0;
        assert!((rmse(&l, &x, &all_but_one).unwrap() - 2.0).abs() < 1e-14);

        let full = ObservationMask::full(dims);
        assert!(matches!(rmse(&x, &x, &full), Err(Error::EmptySet)));

        // direct-summation oracle on a random pair
        let y = Tensor3::from_fn(dims, |i, j, k| (i * j) as f64 - k as f64 * 0.5);
        let got = rmse(&l, &y, &mask).unwrap();
        let mut acc = 0.0;
        let mut count = 0usize;
        for idx in 0..total {
            if !mask.contains_flat(idx) {
                let d = l.as_slice()[idx] - y.as_slice()[idx];
                acc += d * d;
                count += 1;
            }
        }
        assert!((got - (acc / count as f64).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn psnr_basics() {
        let dims = (2, 2, 1);
        let zero = Tensor3::zeros(dims);
        let peak = 3.0;
        let off_by_peak = Tensor3::from_fn(dims, |_, _, _| peak);
        assert!((psnr(&off_by_peak, &zero, peak).unwrap() - 0.0).abs() < 1e-12);

        let off_by_tenth = Tensor3::from_fn(dims, |_, _, _| peak / 10.0);
        assert!((psnr(&off_by_tenth, &zero, peak).unwrap() - 20.0).abs() < 1e-12);

        assert!(matches!(psnr(&zero, &zero, peak), Err(Error::IdenticalInputs)));

        // 8-bit style pair against the formula computed by hand
        let a = Tensor3::from_fn((2, 2, 3), |i, j, k| ((i + j + k) % 2) as f64);
        let b = Tensor3::from_fn((2, 2, 3), |i, j, k| ((i * j + k) % 3) as f64 / 2.0);
        let mse = (&a - &b).fro_norm().powi(2) / 12.0;
        let want = 10.0 * (1.0f64 / mse).log10();
        assert!((psnr(&a, &b, 1.0).unwrap() - want).abs() <= 1e-9);
    }

    #[test]
    fn recovery_table_desk_rows() {
        let scenarios: Vec<SyntheticSpec> = (0..2)
            .map(|seed| SyntheticSpec::cubic(16, 2, 0.9, 0.1, seed))
            .collect();
        let rows = run_recovery_table(&scenarios).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.n, 16);
            assert_eq!(row.r, 2);
            assert_eq!(row.recovered_rank, 2);
            assert!(row.rel_error <= 1e-5, "rel {:.3e}", row.rel_error);
        }
    }

    #[test]
    fn phase_grid_smoke() {
        let request = PhaseGridRequest {
            n: 10,
            r_values: vec![1, 5],
            gamma_values: vec![0.0, 0.5],
            rho: 0.9,
            base_seed: 42,
        };
        let grid = run_phase_grid(&request, 2, 1e-3, 2).unwrap();
        assert_eq!(grid.fractions.len(), 2);
        assert_eq!(grid.fractions[0].len(), 2);
        for row in &grid.fractions {
            for &f in row {
                assert!((0.0..=1.0).contains(&f));
                let scaled = f * 2.0;
                assert!((scaled - scaled.round()).abs() < 1e-12, "not a multiple of 1/trials: {f}");
            }
        }
        // easiest cell recovers always
        assert_eq!(grid.fractions[0][0], 1.0);

        // worker count must not change outcomes
        let again = run_phase_grid(&request, 2, 1e-3, 1).unwrap();
        assert_eq!(grid.fractions, again.fractions);
    }

    #[test]
    fn lemma1_full_observation_gives_zero_deviation() {
        let estimates = lemma1_check(10, 4, 2, 1.0, 2, 7).unwrap();
        for e in estimates {
            assert!(e <= 1e-9, "deviation {e} at rho = 1");
        }
    }

    #[test]
    fn lemma1_well_sampled_regime_is_contractive() {
        let estimates = lemma1_check(12, 4, 2, 0.5, 3, 8).unwrap();
        assert_eq!(estimates.len(), 3);
        for e in estimates {
            assert!(e < 1.0, "estimate {e} >= 1");
        }
    }

    #[test]
    fn lemma4_zero_rate_gives_zero_norm() {
        let out = lemma4_check(10, 3, &[0.0], 3, 9).unwrap();
        assert!(out[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lemma4_small_rate_is_contractive() {
        let out = lemma4_check(20, 5, &[0.1], 3, 10).unwrap();
        for &v in &out[0] {
            assert!(v < 1.0, "normalized norm {v}");
        }
    }

    #[test]
    fn median_of_samples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}

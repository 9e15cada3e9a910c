//! The `tubal` command line: solvers, synthetic data, tables, phase grids,
//! lemma checks, image restoration, factorization, and inspection.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 on numerical
//! failures. Every run that writes files also writes a
//! `<output>.manifest.json` with the parameters, seed, version, wall time,
//! and a digest of each output, which is enough to reproduce the run.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    derive_seed, gen_instance, lemma1_check, lemma4_check, psnr, run_phase_grid,
    run_recovery_table, PhaseGridRequest, SyntheticSpec,
};
use crate::io::{
    emit_heatmap, read_mask, read_ppm, read_tensor, write_mask, write_ppm, write_table_csv,
    write_tensor, RunManifest,
};
use crate::sampling::{incoherence, project_omega, sample_mask, SamplingModel};
use crate::solver::{default_lambda, solve_rtc, solve_tc, solve_trpca, AdmmConfig, Problem, RecoveryResult};
use crate::tsvd::{tnn, tsvd, tsvd_skinny, tubal_ranks, RANK_THRESHOLD};

/// Environment variable overriding the default worker count.
pub const JOBS_ENV: &str = "TUBAL_JOBS";

#[derive(Parser, Debug)]
#[command(
    name = "tubal",
    version,
    about = "Low-tubal-rank tensor recovery: completion and gross-error removal via TNN minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Robust tensor completion from a tensor file and a mask file.
    SolveRtc(SolveArgs),
    /// Tensor completion (no sparse term on observed entries).
    SolveTc(SolveArgs),
    /// Tensor robust PCA (every entry observed).
    SolveTrpca(SolveTrpcaArgs),
    /// Generate a seeded synthetic instance on disk.
    Synth(SynthArgs),
    /// Exact-recovery table over seeded scenarios, as CSV.
    Table(TableArgs),
    /// Success-fraction grid over (rank, corruption) at a fixed rate.
    PhaseGrid(PhaseGridArgs),
    /// Monte-Carlo operator-norm checks of the sampling lemmas.
    LemmaCheck(LemmaArgs),
    /// Restore a PPM image from partial, corrupted pixels.
    ImageRestore(ImageArgs),
    /// Factorize a tensor file and write the factors.
    Tsvd(TsvdArgs),
    /// Print dims, tubal rank, TNN, and the incoherence report.
    Info(InfoArgs),
}

#[derive(Args, Debug)]
struct SolverOpts {
    /// Regularization weight; defaults to the theory value, which is printed.
    #[arg(long)]
    lambda: Option<f64>,
    /// Convergence tolerance on the three sup-norm residuals.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long = "max-iters", default_value_t = 500)]
    max_iters: usize,
}

impl SolverOpts {
    fn config(&self, dims: (usize, usize, usize), rate: f64, problem: Problem) -> Result<AdmmConfig> {
        let lambda = match self.lambda {
            Some(l) => {
                eprintln!("lambda = {l} (explicit)");
                l
            }
            None => {
                let l = default_lambda(dims, rate, problem)?;
                let kind = match problem {
                    Problem::Rtc => "rtc",
                    Problem::Trpca => "trpca",
                };
                eprintln!("lambda = {l} (default for {kind}, rate {rate})");
                l
            }
        };
        let mut cfg = AdmmConfig::new(lambda);
        cfg.eps = self.eps;
        cfg.max_iters = self.max_iters;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// Where the low-rank component goes.
    #[arg(long)]
    out: PathBuf,
    /// Optional destination for the sparse component.
    #[arg(long = "out-sparse")]
    out_sparse: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args, Debug)]
struct SolveTrpcaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long = "out-sparse")]
    out_sparse: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Cubic edge length n (dims n x n x n).
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Standard deviation of the additive corruption.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving l0.t3d, x.t3d, mask.txt, support.txt.
    #[arg(long = "out-dir")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Scenario preset; `paper-table1` runs both published scenario
    /// families, scaled to --size.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    size: usize,
    /// Custom-scenario rank (ignored under a preset).
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Independent seeds per scenario.
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PhaseGridArgs {
    #[arg(long)]
    size: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long = "r-min", default_value_t = 1)]
    r_min: usize,
    #[arg(long = "r-max", default_value_t = 8)]
    r_max: usize,
    #[arg(long = "gamma-min", default_value_t = 0.0)]
    gamma_min: f64,
    #[arg(long = "gamma-max", default_value_t = 0.35)]
    gamma_max: f64,
    /// Number of gamma grid points.
    #[arg(long = "gamma-steps", default_value_t = 8)]
    gamma_steps: usize,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Relative-error ceiling for a successful trial.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output graymap; a CSV sidecar lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// Which check to run: `lemma1` or `lemma4`.
    #[arg(long)]
    which: String,
    #[arg(long)]
    size: usize,
    /// Third dimension; defaults to --size.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// One rate for lemma1, a comma list for lemma4.
    #[arg(long, value_delimiter = ',', required = true)]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ImageArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Corruption noise std on the [0, 1] intensity scale (30/255 by default).
    #[arg(long, default_value_t = 30.0 / 255.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args, Debug)]
struct TsvdArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Factors go to <prefix>_u.t3d, <prefix>_s.t3d, <prefix>_v.t3d plus
    /// <prefix>_singulars.csv.
    #[arg(long = "out-prefix")]
    out_prefix: PathBuf,
    /// Truncate to a skinny decomposition.
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

/// Parses and runs a full argv (including the program name), mapping
/// errors to the documented exit codes.
pub fn cli_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NumericalFailure(_)
                | Error::NonFiniteIterate { .. }
                | Error::ImaginaryResidueTooLarge { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn jobs_or_default(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(JOBS_ENV).ok().and_then(|v| v.parse().ok()))
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
        .max(1)
}

fn manifest_path(primary_output: &Path) -> PathBuf {
    let mut name = primary_output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary_output.with_file_name(name)
}

fn report_solution(out: &RecoveryResult) {
    eprintln!(
        "{} after {} iterations, residuals [{:.3e}, {:.3e}, {:.3e}], {:.2}s",
        if out.converged { "converged" } else { "stopped" },
        out.iters,
        out.residuals[0],
        out.residuals[1],
        out.residuals[2],
        out.wall_time.as_secs_f64()
    );
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::SolveRtc(args) => {
            let x = read_tensor(&args.input)?;
            let mask = read_mask(&args.mask)?;
            let cfg = args.solver.config(x.dims(), mask.rate(), Problem::Rtc)?;
            let out = solve_rtc(&x, &mask, &cfg)?;
            report_solution(&out);
            finish_solve("solve-rtc", &args.input, &args.mask, &args.out, args.out_sparse.as_deref(), &out, &cfg, started)
        }
        Command::SolveTc(args) => {
            let x = read_tensor(&args.input)?;
            let mask = read_mask(&args.mask)?;
            let cfg = args.solver.config(x.dims(), mask.rate(), Problem::Rtc)?;
            let out = solve_tc(&x, &mask, &cfg)?;
            report_solution(&out);
            finish_solve("solve-tc", &args.input, &args.mask, &args.out, args.out_sparse.as_deref(), &out, &cfg, started)
        }
        Command::SolveTrpca(args) => {
            let x = read_tensor(&args.input)?;
            let cfg = args.solver.config(x.dims(), 1.0, Problem::Trpca)?;
            let out = solve_trpca(&x, &cfg)?;
            report_solution(&out);
            write_tensor(&args.out, &out.l)?;
            let mut manifest = RunManifest::new("solve-trpca");
            manifest
                .param("in", args.input.display())
                .param("lambda", cfg.lambda)
                .param("eps", cfg.eps)
                .param("max_iters", cfg.max_iters)
                .param("converged", out.converged)
                .param("iters", out.iters);
            manifest.record_output(&args.out)?;
            if let Some(sparse_path) = &args.out_sparse {
                write_tensor(sparse_path, &out.e)?;
                manifest.record_output(sparse_path)?;
            }
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&args.out))
        }
        Command::Synth(args) => {
            let spec = SyntheticSpec {
                corruption_std: args.sigma,
                ..SyntheticSpec::cubic(args.size, args.rank, args.rho, args.gamma, args.seed)
            };
            let instance = gen_instance(&spec)?;
            std::fs::create_dir_all(&args.out_dir)?;
            let l0_path = args.out_dir.join("l0.t3d");
            let x_path = args.out_dir.join("x.t3d");
            let mask_path = args.out_dir.join("mask.txt");
            let support_path = args.out_dir.join("support.txt");
            write_tensor(&l0_path, &instance.l0)?;
            write_tensor(&x_path, &instance.x_observed)?;
            write_mask(&mask_path, &instance.mask)?;
            let mut support = String::new();
            for &flat in &instance.corruption_support {
                let (i, j, k) = crate::sampling::unflatten(spec.dims, flat);
                support.push_str(&format!("{} {} {}\n", i + 1, j + 1, k + 1));
            }
            crate::io::atomic_write(&support_path, support.as_bytes())?;

            let mut manifest = RunManifest::new("synth");
            manifest
                .param("size", args.size)
                .param("rank", args.rank)
                .param("rho", args.rho)
                .param("gamma", args.gamma)
                .param("sigma", args.sigma);
            manifest.seed = Some(args.seed);
            for path in [&l0_path, &x_path, &mask_path, &support_path] {
                manifest.record_output(path)?;
            }
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&x_path))
        }
        Command::Table(args) => {
            let scenarios = table_scenarios(&args)?;
            let rows = run_recovery_table(&scenarios)?;
            for row in &rows {
                println!(
                    "n = {}, r = {}, seed = {}: rank {} rel_error {:.3e}",
                    row.n, row.r, row.seed, row.recovered_rank, row.rel_error
                );
            }
            write_table_csv(&args.out, &rows)?;
            let mut manifest = RunManifest::new("table");
            manifest
                .param("preset", args.preset.as_deref().unwrap_or("custom"))
                .param("size", args.size)
                .param("seeds", args.seeds);
            manifest.seed = Some(args.seed);
            manifest.record_output(&args.out)?;
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&args.out))
        }
        Command::PhaseGrid(args) => {
            if args.r_max < args.r_min || args.gamma_steps < 2 {
                return Err(Error::InvalidSpec("need r-max >= r-min and at least 2 gamma steps".into()));
            }
            let r_values: Vec<usize> = (args.r_min..=args.r_max).collect();
            let gamma_values: Vec<f64> = (0..args.gamma_steps)
                .map(|g| {
                    args.gamma_min
                        + (args.gamma_max - args.gamma_min) * g as f64 / (args.gamma_steps - 1) as f64
                })
                .collect();
            let request = PhaseGridRequest {
                n: args.size,
                r_values,
                gamma_values,
                rho: args.rho,
                base_seed: args.seed,
            };
            let jobs = jobs_or_default(args.jobs);
            eprintln!("running {} cells x {} trials on {jobs} workers", request.r_values.len() * request.gamma_values.len(), args.trials);
            let grid = run_phase_grid(&request, args.trials, args.tol, jobs)?;
            emit_heatmap(&grid, &args.out)?;
            let mut manifest = RunManifest::new("phase-grid");
            manifest
                .param("size", args.size)
                .param("rho", args.rho)
                .param("trials", args.trials)
                .param("tol", args.tol)
                .param("jobs", jobs);
            manifest.seed = Some(args.seed);
            manifest.record_output(&args.out)?;
            manifest.record_output(&args.out.with_extension("csv"))?;
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&args.out))
        }
        Command::LemmaCheck(args) => {
            let depth = args.depth.unwrap_or(args.size);
            let csv = match args.which.as_str() {
                "lemma1" => {
                    let mut csv = String::from("rho,trial,deviation\n");
                    for &rho in &args.rho {
                        let estimates = lemma1_check(args.size, depth, args.rank, rho, args.trials, args.seed)?;
                        for (t, est) in estimates.iter().enumerate() {
                            csv.push_str(&format!("{rho},{t},{est:e}\n"));
                        }
                    }
                    csv
                }
                "lemma4" => {
                    let per_rho = lemma4_check(args.size, depth, &args.rho, args.trials, args.seed)?;
                    let mut csv = String::from("rho,draw,normalized_norm\n");
                    for (ri, draws) in per_rho.iter().enumerate() {
                        for (d, v) in draws.iter().enumerate() {
                            csv.push_str(&format!("{},{d},{v:e}\n", args.rho[ri]));
                        }
                    }
                    csv
                }
                other => return Err(Error::InvalidSpec(format!("unknown check {other:?}"))),
            };
            crate::io::atomic_write(&args.out, csv.as_bytes())?;
            let mut manifest = RunManifest::new("lemma-check");
            manifest
                .param("which", &args.which)
                .param("size", args.size)
                .param("depth", depth)
                .param("trials", args.trials);
            manifest.seed = Some(args.seed);
            manifest.record_output(&args.out)?;
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&args.out))
        }
        Command::ImageRestore(args) => {
            let original = read_ppm(&args.input)?;
            let dims = original.dims();
            let mask = sample_mask(dims, args.rho, SamplingModel::UniformWithoutReplacement, derive_seed(args.seed, &[1]))?;
            // corrupt a gamma fraction of the observed pixels entrywise
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(derive_seed(args.seed, &[2]));
            let observed = mask.flat_indices().to_vec();
            let count = (args.gamma * observed.len() as f64).round() as usize;
            let picks = crate::sampling::sample_without_replacement(&mut rng, observed.len(), count);
            let mut noisy = original.clone();
            for &pos in &picks {
                let noise: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
                noisy.as_mut_slice()[observed[pos]] += args.sigma * noise;
            }
            let x = project_omega(&noisy, &mask, false)?;

            let cfg = args.solver.config(dims, args.rho, Problem::Rtc)?;
            let out = solve_rtc(&x, &mask, &cfg)?;
            report_solution(&out);
            let restored = out.l.map(|v| v.clamp(0.0, 1.0));
            match psnr(&restored, &original, 1.0) {
                Ok(db) => println!("psnr = {db:.2} dB"),
                Err(Error::IdenticalInputs) => println!("psnr = inf (exact restoration)"),
                Err(e) => return Err(e),
            }
            write_ppm(&args.out, &restored)?;
            let mut manifest = RunManifest::new("image-restore");
            manifest
                .param("in", args.input.display())
                .param("rho", args.rho)
                .param("gamma", args.gamma)
                .param("sigma", args.sigma)
                .param("lambda", cfg.lambda);
            manifest.seed = Some(args.seed);
            manifest.record_output(&args.out)?;
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&args.out))
        }
        Command::Tsvd(args) => {
            let a = read_tensor(&args.input)?;
            let factors = match args.rank {
                Some(r) => tsvd_skinny(&a, r)?,
                None => tsvd(&a)?,
            };
            let prefix = args.out_prefix.as_os_str().to_string_lossy().into_owned();
            let u_path = PathBuf::from(format!("{prefix}_u.t3d"));
            let s_path = PathBuf::from(format!("{prefix}_s.t3d"));
            let v_path = PathBuf::from(format!("{prefix}_v.t3d"));
            let sv_path = PathBuf::from(format!("{prefix}_singulars.csv"));
            write_tensor(&u_path, &factors.u)?;
            write_tensor(&s_path, &factors.s)?;
            write_tensor(&v_path, &factors.v)?;
            let mut csv = String::from("slice,index,sigma\n");
            for (k, list) in factors.spectral_singulars.iter().enumerate() {
                for (i, sigma) in list.iter().enumerate() {
                    csv.push_str(&format!("{k},{i},{sigma:e}\n"));
                }
            }
            crate::io::atomic_write(&sv_path, csv.as_bytes())?;
            let mut manifest = RunManifest::new("tsvd");
            manifest.param("in", args.input.display());
            if let Some(r) = args.rank {
                manifest.param("rank", r);
            }
            for path in [&u_path, &s_path, &v_path, &sv_path] {
                manifest.record_output(path)?;
            }
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            manifest.write(&manifest_path(&u_path))
        }
        Command::Info(args) => {
            let a = read_tensor(&args.input)?;
            let (n1, n2, n3) = a.dims();
            let report = tubal_ranks(&a, RANK_THRESHOLD)?;
            println!("dims: {n1} x {n2} x {n3}");
            println!("tubal_rank: {}", report.tubal_rank);
            println!("multi_rank: {:?}", report.multi_rank);
            println!("tnn: {:e}", tnn(&a)?);
            match incoherence(&a, RANK_THRESHOLD) {
                Ok(inc) => {
                    println!(
                        "incoherence: mu_u = {:.4}, mu_v = {:.4}, mu_joint = {:.4}, mu = {:.4} (rank {})",
                        inc.mu_u, inc.mu_v, inc.mu_joint, inc.mu, inc.rank
                    );
                }
                Err(Error::ZeroTensor) => println!("incoherence: undefined (zero tensor)"),
                Err(e) => return Err(e),
            }
            let mut manifest = RunManifest::new("info");
            manifest.param("in", args.input.display());
            manifest.wall_time_secs = started.elapsed().as_secs_f64();
            let json = serde_json::to_string(&manifest)
                .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
            println!("{json}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish_solve(
    name: &str,
    input: &Path,
    mask: &Path,
    out: &Path,
    out_sparse: Option<&Path>,
    result: &RecoveryResult,
    cfg: &AdmmConfig,
    started: Instant,
) -> Result<()> {
    write_tensor(out, &result.l)?;
    let mut manifest = RunManifest::new(name);
    manifest
        .param("in", input.display())
        .param("mask", mask.display())
        .param("lambda", cfg.lambda)
        .param("eps", cfg.eps)
        .param("max_iters", cfg.max_iters)
        .param("converged", result.converged)
        .param("iters", result.iters);
    manifest.record_output(out)?;
    if let Some(sparse_path) = out_sparse {
        write_tensor(sparse_path, &result.e)?;
        manifest.record_output(sparse_path)?;
    }
    manifest.wall_time_secs = started.elapsed().as_secs_f64();
    manifest.write(&manifest_path(out))
}

fn table_scenarios(args: &TableArgs) -> Result<Vec<SyntheticSpec>> {
    let mut scenarios = Vec::new();
    match args.preset.as_deref() {
        Some("paper-table1") => {
            // the two published scenario families, scaled down:
            // (r = 0.05 n, rho = 0.9, gamma = 0.1) and (r = 0.1 n, rho = 0.8, gamma = 0.2)
            let families = [
                ((args.size as f64 * 0.05).round().max(1.0) as usize, 0.9, 0.1),
                ((args.size as f64 * 0.1).round().max(1.0) as usize, 0.8, 0.2),
            ];
            for (rank, rho, gamma) in families {
                for s in 0..args.seeds {
                    scenarios.push(SyntheticSpec::cubic(
                        args.size,
                        rank,
                        rho,
                        gamma,
                        derive_seed(args.seed, &[rank as u64, s as u64]),
                    ));
                }
            }
        }
        Some(other) => {
            return Err(Error::InvalidSpec(format!(
                "unknown preset {other:?} (available: paper-table1)"
            )))
        }
        None => {
            let rank = args.rank.ok_or_else(|| {
                Error::InvalidSpec("either --preset or --rank is required".into())
            })?;
            for s in 0..args.seeds {
                scenarios.push(SyntheticSpec {
                    corruption_std: args.sigma,
                    ..SyntheticSpec::cubic(
                        args.size,
                        rank,
                        args.rho,
                        args.gamma,
                        derive_seed(args.seed, &[rank as u64, s as u64]),
                    )
                });
            }
        }
    }
    Ok(scenarios)
}

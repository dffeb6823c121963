use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bmc_core::baselines::{altmin_solve, svp_solve, BaselineConfig, DEFAULT_SVP_STEP};
use bmc_core::instance::generate_instance;
use bmc_core::model::{distance, rc_diagnostic, FactorZ, ModelParams};
use bmc_core::observation::{read_matrix_market, sample_bernoulli, sample_uniform, write_matrix_market};
use bmc_core::rng::{derive_seed, gaussian_matrix, seeded};
use bmc_core::solver::{
    solve, spectral_init, SolverConfig, SolverKind, Status, DEFAULT_ETA, DEFAULT_LAMBDA,
    DEFAULT_MAX_ITERS, DEFAULT_TOL_REL_OBS,
};
use bmc_harness::io::{read_instance, write_instance, write_matrix_csv, write_report_csv, write_trace_csv};
use bmc_harness::{run, ExperimentSpec, HarnessError, Result};
use clap::{Args, Parser, Subcommand};

/// Matrix completion by projected gradient descent on a lifted factorization.
#[derive(Parser, Debug)]
#[command(name = "bmc", version, about)]
struct Cli {
    /// Master seed for every random draw [default: 0, or the config's seed for bench].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent trials (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output directory (gen, solve) or CSV file (bench).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random low-rank instance (truth.txt) and its samples (obs.mtx).
    Gen(GenArgs),
    /// Run one solver on Matrix Market observations.
    Solve(SolveArgs),
    /// Run an experiment described by a key = value config file.
    Bench(BenchArgs),
    /// Audit spectral initialization and the regularity condition on an instance.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    rank: usize,
    /// Condition number σ₁/σ_r of the truth.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Number of uniformly sampled entries.
    #[arg(long, conflicts_with = "p", required_unless_present = "p")]
    m: Option<usize>,
    /// Bernoulli sampling rate instead of a fixed count.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Observations in Matrix Market coordinate format.
    #[arg(long)]
    obs: PathBuf,
    #[arg(long)]
    rank: usize,
    #[arg(long, default_value = "gd")]
    solver: SolverKind,
    /// Step-size constant for gd, divided by ‖Z⁰‖².
    #[arg(long, default_value_t = DEFAULT_ETA)]
    eta: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    /// SVP step on the p⁻¹-rescaled residual.
    #[arg(long, default_value_t = DEFAULT_SVP_STEP)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Stop once ‖P_Ω(X̂ − X⋆)‖/‖P_Ω(X⋆)‖ falls below this.
    #[arg(long, default_value_t = DEFAULT_TOL_REL_OBS)]
    tol: f64,
    /// Incoherence for the clipping radius; estimated from the data if absent.
    #[arg(long)]
    mu: Option<f64>,
    /// Skip the row-norm projection.
    #[arg(long)]
    no_projection: bool,
    /// Ground truth written by `gen`; adds distance and error to the trace.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Experiment config (kind, dims, ranks, m_over_nr | m | p, trials,
    /// solvers, threshold, tol, output, seed, kappa, max_iters, eta, lambda,
    /// svp_step, use_projection).
    config: PathBuf,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Ground truth written by `gen`.
    #[arg(long)]
    truth: PathBuf,
    /// Observations written by `gen`.
    #[arg(long)]
    obs: PathBuf,
    /// Random points at which the regularity condition is evaluated.
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
}

impl Cli {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Gen(a) => gen(cli, a),
        Command::Solve(a) => solve_cmd(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::Check(a) => check(cli, a),
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<ExitCode> {
    let inst = generate_instance(a.n1, a.n2, a.rank, a.kappa, derive_seed(cli.seed(), &[0]))?;
    let sample_seed = derive_seed(cli.seed(), &[1]);
    let obs = match (a.m, a.p) {
        (Some(m), _) => sample_uniform(a.n1, a.n2, m, &inst, sample_seed)?,
        (None, Some(p)) => sample_bernoulli(a.n1, a.n2, p, &inst, sample_seed)?,
        (None, None) => unreachable!("clap requires m or p"),
    };
    let dir = out_dir(cli)?;
    write_instance(&inst, &dir.join("truth.txt"))?;
    write_matrix_market(&obs, dir.join("obs.mtx"))?;
    println!(
        "wrote {}x{} rank-{} instance (mu = {:.4}, kappa = {}) and {} samples to {}",
        a.n1,
        a.n2,
        a.rank,
        inst.mu(),
        inst.kappa(),
        obs.len(),
        dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_truth(path: Option<&Path>) -> Result<Option<bmc_core::Instance>> {
    path.map(read_instance).transpose()
}

fn solve_cmd(cli: &Cli, a: &SolveArgs) -> Result<ExitCode> {
    let obs = read_matrix_market::<f64>(&a.obs)?;
    let truth = load_truth(a.truth.as_deref())?;
    let report = match a.solver {
        SolverKind::Gd => {
            let mut cfg = SolverConfig::new(a.rank);
            cfg.eta = a.eta;
            cfg.lambda = a.lambda;
            cfg.max_iters = a.max_iters;
            cfg.tol_rel_obs = a.tol;
            cfg.use_projection = !a.no_projection;
            cfg.seed = cli.seed();
            cfg.mu_override = a.mu;
            solve(&obs, &cfg, truth.as_ref())?
        }
        kind => {
            let mut cfg = BaselineConfig::new(a.rank);
            cfg.step = a.step;
            cfg.max_iters = a.max_iters;
            cfg.tol_rel_obs = a.tol;
            cfg.seed = cli.seed();
            if kind == SolverKind::Svp {
                svp_solve(&obs, &cfg, truth.as_ref())?
            } else {
                altmin_solve(&obs, &cfg, truth.as_ref())?
            }
        }
    };
    let dir = out_dir(cli)?;
    write_matrix_csv(&report.left, &dir.join("left.csv"))?;
    write_matrix_csv(&report.right, &dir.join("right.csv"))?;
    write_trace_csv(&report, &dir.join("trace.csv"))?;
    write_report_csv(&report, &dir.join("report.csv"))?;
    let last = report.last();
    println!(
        "{}: {} after {} iterations, relative observed residual {:.3e}",
        report.solver, report.status, report.iterations, last.rel_obs_residual
    );
    if let Some(e) = last.rel_error {
        println!("relative error {e:.3e}");
    }
    Ok(if report.status == Status::Diverged {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<ExitCode> {
    let mut spec = ExperimentSpec::from_file(&a.config)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let output = cli.out.clone().or_else(|| spec.output.clone());
    let outcome = run(&spec, output.as_deref())?;
    print!("{}", outcome.summary());
    if let Some(p) = output {
        println!("wrote {}", p.display());
    } else {
        print!("{}", outcome.to_csv());
    }
    Ok(ExitCode::SUCCESS)
}

fn check(cli: &Cli, a: &CheckArgs) -> Result<ExitCode> {
    let truth = read_instance(&a.truth)?;
    let obs = read_matrix_market::<f64>(&a.obs)?;
    if (obs.n1(), obs.n2()) != (truth.n1(), truth.n2()) {
        return Err(HarnessError::Format {
            path: a.obs.display().to_string(),
            msg: "observation dimensions differ from the instance".into(),
        });
    }
    let r = truth.rank();
    let zs = truth.z_star();
    let init = spectral_init(&obs, r, Some(truth.mu()), cli.seed())?;
    let ball = 0.25 * truth.sigma_min().sqrt();
    let d0 = distance(&init.z0, &zs)?;
    let d1 = distance(&init.z1, &zs)?;
    println!("mu = {:.4}, kappa = {:.4}, p = {:.4e}", truth.mu(), truth.kappa(), obs.p_hat());
    println!("d(Z0, Z*) = {d0:.4e}");
    println!("d(Z1, Z*) = {d1:.4e}  (ball radius {ball:.4e}, inside: {})", d1 <= ball);

    let params = ModelParams::new(a.lambda, obs.p_hat(), init.clip_radius)?;
    let mut rng = seeded(derive_seed(cli.seed(), &[7]));
    let mut held = 0;
    for k in 0..a.points {
        let h = gaussian_matrix::<f64>(truth.n1() + truth.n2(), r, &mut rng);
        let scale = ball * (k + 1) as f64 / a.points as f64 / h.frobenius_norm();
        let z = FactorZ::from_matrix(truth.n1(), truth.n2(), zs.matrix().add(&h.scale(scale))?)?;
        if rc_diagnostic(&z, &truth, &obs, &params)?.satisfied {
            held += 1;
        }
    }
    println!("regularity condition held at {held}/{} points", a.points);
    Ok(ExitCode::SUCCESS)
}

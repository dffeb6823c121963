//! The three experiment drivers: phase transition, convergence traces and
//! runtime comparison.
//!
//! Every trial derives its seeds from `(master seed, cell index, trial
//! index)` alone, so cells and trials can run in any order on any number
//! of threads and still produce the same numbers.

use std::fmt::Write as _;
use std::path::Path;

use bmc_core::baselines::{altmin_solve, svp_solve, BaselineConfig};
use bmc_core::instance::generate_instance;
use bmc_core::observation::{sample_bernoulli, sample_uniform};
use bmc_core::rng::derive_seed;
use bmc_core::solver::{solve, SolverConfig, SolverKind, Status};
use bmc_core::{Instance, Observations, Report};
use rayon::prelude::*;

use crate::config::{ExperimentKind, ExperimentSpec, Sampling};
use crate::error::Result;
use crate::fit::{fit_geometric_tail, RateFit};
use crate::io::opt;

pub const PHASE_HEADER: &str = "n1,n2,r,m,trials,successes,mean_iters,mean_seconds";
pub const CONVERGENCE_HEADER: &str = "solver,iter,objective,rel_error,distance,seconds";
pub const RUNTIME_HEADER: &str = "solver,n1,n2,r,m,seconds_to_tol,iterations,flops_per_iter";

/// Columns holding wall-clock time; excluded from reproducibility checks.
pub const TIME_COLUMNS: [&str; 3] = ["mean_seconds", "seconds", "seconds_to_tol"];

const STREAM_INSTANCE: u64 = 0;
const STREAM_SAMPLE: u64 = 1;
const STREAM_SOLVER: u64 = 2;

/// Seed of trial `trial` in grid cell `cell`.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    derive_seed(master, &[cell as u64, trial as u64])
}

/// Draws the ground truth and sample set for one trial.
pub fn draw_problem(
    spec: &ExperimentSpec,
    n1: usize,
    n2: usize,
    r: usize,
    sampling: Sampling,
    seed: u64,
) -> Result<(Instance, Observations)> {
    let inst = generate_instance(n1, n2, r, spec.kappa, derive_seed(seed, &[STREAM_INSTANCE]))?;
    let sample_seed = derive_seed(seed, &[STREAM_SAMPLE]);
    let obs = match sampling {
        Sampling::Uniform(m) => sample_uniform(n1, n2, m, &inst, sample_seed)?,
        Sampling::Bernoulli(p) => sample_bernoulli(n1, n2, p, &inst, sample_seed)?,
    };
    Ok((inst, obs))
}

/// Runs one solver with the spec's settings. The instance supplies `μ` for
/// the clipping radius; per-iteration truth metrics are only computed when
/// `with_truth` is set.
pub fn run_solver(
    kind: SolverKind,
    spec: &ExperimentSpec,
    obs: &Observations,
    inst: &Instance,
    seed: u64,
    with_truth: bool,
) -> Result<Report> {
    let rank = inst.rank();
    let truth = with_truth.then_some(inst);
    let solver_seed = derive_seed(seed, &[STREAM_SOLVER]);
    let report = match kind {
        SolverKind::Gd => {
            let mut cfg = SolverConfig::new(rank);
            cfg.eta = spec.eta;
            cfg.lambda = spec.lambda;
            cfg.max_iters = spec.max_iters;
            cfg.tol_rel_obs = spec.tol;
            cfg.use_projection = spec.use_projection;
            cfg.seed = solver_seed;
            cfg.mu_override = Some(inst.mu());
            solve(obs, &cfg, truth)?
        }
        SolverKind::Svp | SolverKind::AltMin => {
            let mut cfg = BaselineConfig::new(rank);
            cfg.step = spec.svp_step;
            cfg.max_iters = spec.max_iters;
            cfg.tol_rel_obs = spec.tol;
            cfg.seed = solver_seed;
            if kind == SolverKind::Svp {
                svp_solve(obs, &cfg, truth)?
            } else {
                altmin_solve(obs, &cfg, truth)?
            }
        }
    };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseRow {
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub mean_iters: f64,
    pub mean_seconds: f64,
}

impl PhaseRow {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.2},{:.6}",
            self.n1,
            self.n2,
            self.r,
            self.m,
            self.trials,
            self.successes,
            self.mean_iters,
            self.mean_seconds
        )
    }
}

struct TrialOutcome {
    success: bool,
    iterations: usize,
    seconds: f64,
    flops_per_iter: f64,
    m: usize,
}

fn run_trial(
    spec: &ExperimentSpec,
    kind: SolverKind,
    cell: usize,
    trial: usize,
    (n1, n2, r, sampling): (usize, usize, usize, Sampling),
) -> Result<TrialOutcome> {
    let seed = trial_seed(spec.seed, cell, trial);
    let (inst, obs) = draw_problem(spec, n1, n2, r, sampling, seed)?;
    let report = run_solver(kind, spec, &obs, &inst, seed, false)?;
    let rel = report.relative_error(&inst)?;
    Ok(TrialOutcome {
        success: report.status != Status::Diverged && rel <= spec.threshold,
        iterations: report.iterations,
        seconds: report.seconds,
        flops_per_iter: report.flops_per_iter,
        m: obs.len(),
    })
}

fn run_cell(
    spec: &ExperimentSpec,
    kind: SolverKind,
    cell: usize,
    params: (usize, usize, usize, Sampling),
) -> Result<Vec<TrialOutcome>> {
    (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, kind, cell, t, params))
        .collect()
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

fn nominal_m(params: &(usize, usize, usize, Sampling)) -> usize {
    match params.3 {
        Sampling::Uniform(m) => m,
        Sampling::Bernoulli(p) => (p * (params.0 * params.1) as f64).round() as usize,
    }
}

/// Empirical recovery probability over the grid. A trial succeeds when the
/// final relative error is at most `spec.threshold`.
pub fn run_phase_transition(spec: &ExperimentSpec) -> Result<Vec<PhaseRow>> {
    spec.validate()?;
    let kind = spec.solvers[0];
    spec.cells()
        .into_iter()
        .enumerate()
        .map(|(cell, params)| {
            let outcomes = run_cell(spec, kind, cell, params)?;
            Ok(PhaseRow {
                n1: params.0,
                n2: params.1,
                r: params.2,
                m: nominal_m(&params),
                trials: outcomes.len(),
                successes: outcomes.iter().filter(|o| o.success).count(),
                mean_iters: mean(outcomes.iter().map(|o| o.iterations as f64)),
                mean_seconds: mean(outcomes.iter().map(|o| o.seconds)),
            })
        })
        .collect()
}

/// Linear interpolation of the first crossing of `level` by the success
/// rate, as a function of `m`.
pub fn crossing(rows: &[PhaseRow], level: f64) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (a, b) = (w[0].success_rate(), w[1].success_rate());
        if a < level && b >= level {
            let t = (level - a) / (b - a);
            Some(w[0].m as f64 + t * (w[1].m as f64 - w[0].m as f64))
        } else if a >= level && w[0] == rows[0] {
            Some(w[0].m as f64)
        } else {
            None
        }
    })
}

#[derive(Clone, Debug)]
pub struct ConvergenceRun {
    pub report: Report,
    /// Fitted tail rate of `d(Zᵏ, Z⋆)`; gradient descent only.
    pub fit: Option<RateFit>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceResult {
    pub instance: Instance,
    pub runs: Vec<ConvergenceRun>,
}

impl ConvergenceResult {
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for run in &self.runs {
            for t in &run.report.trace {
                rows.push(format!(
                    "{},{},{:.10e},{},{},{:.6}",
                    run.report.solver,
                    t.iter,
                    t.objective,
                    opt(t.rel_error),
                    opt(t.distance),
                    t.seconds
                ));
            }
        }
        rows
    }

    pub fn gd_fit(&self) -> Option<&RateFit> {
        self.runs
            .iter()
            .find(|r| r.report.solver == SolverKind::Gd)
            .and_then(|r| r.fit.as_ref())
    }
}

/// Per-iteration traces of every listed solver on one shared instance and
/// sample set (the first grid cell), with the geometric tail rate of the
/// gradient-descent distance.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ConvergenceResult> {
    spec.validate()?;
    let (n1, n2, r, sampling) = spec.cells()[0];
    let seed = trial_seed(spec.seed, 0, 0);
    let (inst, obs) = draw_problem(spec, n1, n2, r, sampling, seed)?;
    let radius = 0.25 * inst.sigma_min().sqrt();
    let runs = spec
        .solvers
        .par_iter()
        .map(|&kind| {
            let report = run_solver(kind, spec, &obs, &inst, seed, true)?;
            let fit = (kind == SolverKind::Gd)
                .then(|| {
                    let pts: Vec<(usize, f64)> = report
                        .trace
                        .iter()
                        .filter_map(|t| t.distance.map(|d| (t.iter, d)))
                        .collect();
                    fit_geometric_tail(&pts, radius)
                })
                .flatten();
            Ok(ConvergenceRun { report, fit })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceResult {
        instance: inst,
        runs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuntimeRow {
    pub solver: SolverKind,
    pub n1: usize,
    pub n2: usize,
    pub r: usize,
    pub m: usize,
    /// Mean wall-clock over successful trials; `None` when none succeeded.
    pub seconds_to_tol: Option<f64>,
    pub iterations: f64,
    pub flops_per_iter: f64,
}

impl RuntimeRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.1},{:.1}",
            self.solver,
            self.n1,
            self.n2,
            self.r,
            self.m,
            self.seconds_to_tol.map(|s| format!("{s:.6}")).unwrap_or_default(),
            self.iterations,
            self.flops_per_iter
        )
    }
}

/// Wall-clock and counted flops per iteration for every solver on every
/// grid cell; all solvers of a trial share the instance and sample set.
pub fn run_runtime(spec: &ExperimentSpec) -> Result<Vec<RuntimeRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    for (cell, params) in spec.cells().into_iter().enumerate() {
        for &kind in &spec.solvers {
            let outcomes = run_cell(spec, kind, cell, params)?;
            let ok: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.success).collect();
            rows.push(RuntimeRow {
                solver: kind,
                n1: params.0,
                n2: params.1,
                r: params.2,
                m: outcomes.first().map_or(nominal_m(&params), |o| o.m),
                seconds_to_tol: (!ok.is_empty()).then(|| mean(ok.iter().map(|o| o.seconds))),
                iterations: mean(outcomes.iter().map(|o| o.iterations as f64)),
                flops_per_iter: mean(outcomes.iter().map(|o| o.flops_per_iter)),
            });
        }
    }
    Ok(rows)
}

/// Result of [`run`], ready for writing.
#[derive(Clone, Debug)]
pub enum Outcome {
    PhaseTransition(Vec<PhaseRow>),
    Convergence(ConvergenceResult),
    Runtime(Vec<RuntimeRow>),
}

impl Outcome {
    pub fn to_csv(&self) -> String {
        let (header, rows): (&str, Vec<String>) = match self {
            Outcome::PhaseTransition(r) => (PHASE_HEADER, r.iter().map(PhaseRow::csv).collect()),
            Outcome::Convergence(c) => (CONVERGENCE_HEADER, c.csv_rows()),
            Outcome::Runtime(r) => (RUNTIME_HEADER, r.iter().map(RuntimeRow::csv).collect()),
        };
        let mut s = String::with_capacity(64 * (rows.len() + 1));
        writeln!(s, "{header}").unwrap();
        for row in rows {
            writeln!(s, "{row}").unwrap();
        }
        s
    }

    /// Human-readable digest for the terminal.
    pub fn summary(&self) -> String {
        match self {
            Outcome::PhaseTransition(rows) => {
                let mut s = String::new();
                for row in rows {
                    writeln!(
                        s,
                        "{}x{} r={} m={}: {}/{} recovered",
                        row.n1, row.n2, row.r, row.m, row.successes, row.trials
                    )
                    .unwrap();
                }
                s
            }
            Outcome::Convergence(c) => {
                let mut s = String::new();
                for run in &c.runs {
                    let last = run.report.last();
                    writeln!(
                        s,
                        "{}: {} after {} iterations, rel_error {}",
                        run.report.solver,
                        run.report.status,
                        run.report.iterations,
                        opt(last.rel_error)
                    )
                    .unwrap();
                }
                match c.gd_fit() {
                    Some(f) => writeln!(
                        s,
                        "gd tail: rho = {:.6}, R^2 = {:.6} over {} points from iter {}",
                        f.rho, f.r_squared, f.points, f.start_iter
                    )
                    .unwrap(),
                    None => writeln!(s, "gd tail: no fit").unwrap(),
                }
                s
            }
            Outcome::Runtime(rows) => {
                let mut s = String::new();
                for row in rows {
                    writeln!(
                        s,
                        "{} {}x{} r={} m={}: {} s, {:.0} iters, {:.3e} flops/iter",
                        row.solver,
                        row.n1,
                        row.n2,
                        row.r,
                        row.m,
                        row.seconds_to_tol.map_or("-".into(), |v| format!("{v:.3}")),
                        row.iterations,
                        row.flops_per_iter
                    )
                    .unwrap();
                }
                s
            }
        }
    }
}

/// Runs the experiment named by `spec.kind` and, when `output` is given,
/// writes its CSV there.
pub fn run(spec: &ExperimentSpec, output: Option<&Path>) -> Result<Outcome> {
    let outcome = match spec.kind {
        ExperimentKind::PhaseTransition => Outcome::PhaseTransition(run_phase_transition(spec)?),
        ExperimentKind::Convergence => Outcome::Convergence(run_convergence(spec)?),
        ExperimentKind::Runtime => Outcome::Runtime(run_runtime(spec)?),
    };
    if let Some(path) = output {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, outcome.to_csv())?;
    }
    Ok(outcome)
}

/// Drops the wall-clock columns from a CSV document.
pub fn strip_time_columns(csv: &str) -> String {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let keep: Vec<bool> = header
        .split(',')
        .map(|c| !TIME_COLUMNS.contains(&c))
        .collect();
    let filter = |line: &str| -> String {
        line.split(',')
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(c, _)| c)
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = filter(header);
    for line in lines {
        out.push('\n');
        out.push_str(&filter(line));
    }
    out
}

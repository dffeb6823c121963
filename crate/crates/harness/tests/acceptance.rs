//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Runs every criterion by default; pass criterion numbers to run a subset
//! (`cargo test --test acceptance -- 2 9`). The process exits non-zero on a
//! FAIL only when `BMC_ACCEPTANCE_STRICT` is set, so the numbers are always
//! reported in full.

use std::fmt::Display;
use std::process::ExitCode;
use std::time::Instant;

use bmc_core::instance::generate_instance;
use bmc_core::linalg::{procrustes_align, thin_qr, DenseMatrix};
use bmc_core::model::{distance, gradient, objective, project_c, rc_diagnostic, FactorZ, ModelParams};
use bmc_core::observation::{sample_bernoulli, sample_uniform};
use bmc_core::rng::{derive_seed, gaussian_matrix, seeded};
use bmc_core::solver::{spectral_init, SolverKind, DEFAULT_LAMBDA};
use bmc_harness::budget::gd_flop_budget;
use bmc_harness::config::m_from_ratio;
use bmc_harness::experiments::{draw_problem, run_solver, strip_time_columns, trial_seed};
use bmc_harness::{crossing, run_convergence, run_phase_transition, ExperimentKind, ExperimentSpec, SampleGrid, Sampling};

const MASTER: u64 = 0;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Display) -> Verdict {
    Verdict {
        pass,
        detail: detail.to_string(),
    }
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    gaussian_matrix(rows, cols, &mut seeded(seed))
}

fn orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
    thin_qr(&gaussian(rows, cols, seed)).unwrap().0
}

fn factor(n1: usize, n2: usize, m: DenseMatrix<f64>) -> FactorZ<f64> {
    FactorZ::from_matrix(n1, n2, m).unwrap()
}

fn phase_transition() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for r in [10, 20] {
        let mut spec = ExperimentSpec::new(ExperimentKind::PhaseTransition);
        spec.dims = vec![(500, 500)];
        spec.ranks = vec![r];
        spec.samples = SampleGrid::OverNr(vec![2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0]);
        spec.trials = 20;
        spec.max_iters = 4000;
        spec.seed = MASTER;
        let rows = run_phase_transition(&spec).unwrap();
        let nr = (500 * r) as f64;
        let low = rows.first().unwrap().success_rate();
        let high = rows.last().unwrap().success_rate();
        let cross = crossing(&rows, 0.5).map(|m| m / nr);
        let ok = low <= 0.2 && high >= 0.9 && cross.is_some_and(|c| (2.5..=4.5).contains(&c));
        pass &= ok;
        let curve: Vec<String> = rows.iter().map(|row| format!("{}", row.successes)).collect();
        notes.push(format!(
            "r={r}: successes/20 [{}], crossing {}",
            curve.join(" "),
            cross.map_or("none".into(), |c| format!("{c:.2}nr"))
        ));
    }
    verdict(pass, notes.join("; "))
}

fn geometric_convergence() -> Verdict {
    let mut spec = ExperimentSpec::new(ExperimentKind::Convergence);
    spec.dims = vec![(400, 300)];
    spec.ranks = vec![5];
    spec.samples = SampleGrid::OverNr(vec![5.0]);
    spec.kappa = 2.0;
    spec.solvers = vec![SolverKind::Gd];
    spec.seed = MASTER;
    let result = run_convergence(&spec).unwrap();
    let run = &result.runs[0];
    match &run.fit {
        Some(f) => verdict(
            f.r_squared >= 0.99 && f.rho < 1.0,
            format_args!(
                "{} after {} iterations; rho = {:.6}, R^2 = {:.4} over {} iterates from iter {}",
                run.report.status, run.report.iterations, f.rho, f.r_squared, f.points, f.start_iter
            ),
        ),
        None => verdict(
            false,
            format_args!("{} after {} iterations; trace never entered the ball", run.report.status, run.report.iterations),
        ),
    }
}

fn init_quality() -> Verdict {
    let (n, r) = (200, 2);
    let (mut inside, mut contract) = (0, 0);
    let mut ratios = Vec::new();
    for t in 0..100u64 {
        let seed = derive_seed(MASTER, &[3, t]);
        let inst = generate_instance::<f64>(n, n, r, 2.0, derive_seed(seed, &[0])).unwrap();
        let obs = sample_bernoulli(n, n, 0.5, &inst, derive_seed(seed, &[1])).unwrap();
        let init = spectral_init(&obs, r, Some(inst.mu()), derive_seed(seed, &[2])).unwrap();
        let zs = inst.z_star();
        let d0 = distance(&init.z0, &zs).unwrap();
        let d1 = distance(&init.z1, &zs).unwrap();
        let ball = 0.25 * inst.sigma_min().sqrt();
        inside += usize::from(d1 <= ball);
        contract += usize::from(d1 <= d0 * (1.0 + 1e-12));
        ratios.push(d1 / ball);
    }
    ratios.sort_by(f64::total_cmp);
    verdict(
        inside >= 95 && contract == 100,
        format_args!(
            "inside ball {inside}/100, contraction {contract}/100; d(Z1)/ball min {:.3} median {:.3} max {:.3}",
            ratios[0], ratios[50], ratios[99]
        ),
    )
}

fn gradient_check() -> Verdict {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for c in 0..50u64 {
        let n1 = 2 + (c * 7 % 19) as usize;
        let n2 = 2 + (c * 11 % 19) as usize;
        let r = (1 + (c % 3) as usize).min(n1).min(n2);
        let lambda = [0.0, 0.5, 1.0][(c % 3) as usize];
        let inst = generate_instance::<f64>(n1, n2, r, 2.0, derive_seed(MASTER, &[4, c, 0])).unwrap();
        let m = (n1 * n2).div_ceil(2);
        let obs = sample_uniform(n1, n2, m, &inst, derive_seed(MASTER, &[4, c, 1])).unwrap();
        let z = factor(n1, n2, gaussian(n1 + n2, r, derive_seed(MASTER, &[4, c, 2])));
        let params = ModelParams::new(lambda, obs.p_hat(), 1.0).unwrap();
        let g = gradient(&z, &obs, &params).unwrap();
        let scale = g.matrix().max_abs().max(f64::MIN_POSITIVE);
        for k in 0..z.matrix().as_slice().len() {
            let mut zp = z.clone();
            zp.matrix_mut().as_mut_slice()[k] += h;
            let mut zm = z.clone();
            zm.matrix_mut().as_mut_slice()[k] -= h;
            let fd = (objective(&zp, &obs, &params).unwrap() - objective(&zm, &obs, &params).unwrap()) / (2.0 * h);
            worst = worst.max((fd - g.matrix().as_slice()[k]).abs() / scale);
        }
    }
    verdict(worst <= 1e-5, format_args!("max relative error {worst:.2e} over 50 configurations"))
}

fn stationarity() -> Verdict {
    let (mut worst_f, mut worst_g): (f64, f64) = (0.0, 0.0);
    for t in 0..20u64 {
        let inst = generate_instance::<f64>(60, 45, 3, 3.0, derive_seed(MASTER, &[5, t, 0])).unwrap();
        let obs = sample_uniform(60, 45, 900, &inst, derive_seed(MASTER, &[5, t, 1])).unwrap();
        let zs = inst.z_star();
        let params = ModelParams::new(DEFAULT_LAMBDA, obs.p_hat(), 1.0).unwrap();
        let s1 = inst.sigma_max();
        worst_f = worst_f.max(objective(&zs, &obs, &params).unwrap() / (s1 * s1));
        worst_g = worst_g.max(gradient(&zs, &obs, &params).unwrap().frobenius_norm() / s1.powf(1.5));
    }
    verdict(
        worst_f <= 1e-10 && worst_g <= 1e-9,
        format_args!("max f/s1^2 = {worst_f:.2e}, max |grad|/s1^1.5 = {worst_g:.2e}"),
    )
}

fn procrustes_oracle() -> Verdict {
    let mut worst1: f64 = 0.0;
    for t in 0..100u64 {
        let z = gaussian(9, 1, derive_seed(MASTER, &[6, t, 0]));
        let zs = gaussian(9, 1, derive_seed(MASTER, &[6, t, 1]));
        let d = procrustes_align(&z, &zs).unwrap().distance;
        let plus = z.add(&zs).unwrap().frobenius_norm();
        let minus = z.sub(&zs).unwrap().frobenius_norm();
        worst1 = worst1.max((d - plus.min(minus)).abs());
    }
    let mut violations = 0;
    for t in 0..20u64 {
        let z = gaussian(8, 2, derive_seed(MASTER, &[6, t, 2]));
        let zs = gaussian(8, 2, derive_seed(MASTER, &[6, t, 3]));
        let d = procrustes_align(&z, &zs).unwrap().distance;
        for k in 0..10_000 {
            let th = std::f64::consts::TAU * (k / 2) as f64 / 5000.0;
            let (c, s) = (th.cos(), th.sin());
            // Rotations for even k, reflections for odd k.
            let q = if k % 2 == 0 {
                DenseMatrix::from_row_major(2, 2, vec![c, -s, s, c]).unwrap()
            } else {
                DenseMatrix::from_row_major(2, 2, vec![c, s, s, -c]).unwrap()
            };
            let cand = z.matmul(&q).unwrap().distance_to(&zs).unwrap();
            if d > cand + 1e-12 {
                violations += 1;
            }
        }
    }
    verdict(
        worst1 <= 1e-12 && violations == 0,
        format_args!("r=1 max gap {worst1:.1e}; r=2 brute-force violations {violations}/200000"),
    )
}

fn appendix_properties() -> Verdict {
    let (n1, n2) = (10, 8);
    let mut lemma_fail = 0;
    for t in 0..100u64 {
        let r = 1 + (t % 3) as usize;
        let s = |k: u64| derive_seed(MASTER, &[7, t, k]);
        let sig: Vec<f64> = (0..r).map(|k| 0.1 + 3.0 * ((s(10 + k as u64) % 1000) as f64 / 1000.0)).collect();
        let sig_s: Vec<f64> = (0..r).map(|k| 1.0 + ((s(20 + k as u64) % 1000) as f64 / 250.0)).collect();
        let rot = thin_qr(&gaussian(r, r, s(4))).unwrap().0;
        let build = |u: &DenseMatrix<f64>, v: &DenseMatrix<f64>, sigma: &[f64], q: Option<&DenseMatrix<f64>>| {
            let root: Vec<f64> = sigma.iter().map(|x| x.sqrt()).collect();
            let z = u.scale_columns(&root).vstack(&v.scale_columns(&root)).unwrap();
            let z = q.map_or(z.clone(), |q| z.matmul(q).unwrap());
            let x = u.scale_columns(sigma).matmul_t(v).unwrap();
            (z, x)
        };
        let (z, x) = build(&orthonormal(n1, r, s(0)), &orthonormal(n2, r, s(1)), &sig, Some(&rot));
        let (zs, xs) = build(&orthonormal(n1, r, s(2)), &orthonormal(n2, r, s(3)), &sig_s, None);
        let lifted = z.matmul_t(&z).unwrap().distance_to(&zs.matmul_t(&zs).unwrap()).unwrap();
        if lifted > 2.0 * x.distance_to(&xs).unwrap() * (1.0 + 1e-12) {
            lemma_fail += 1;
        }
    }
    let (mut contraction_fail, mut idempotence_fail) = (0, 0);
    for t in 0..1000u64 {
        let s = |k: u64| derive_seed(MASTER, &[7, 1000 + t, k]);
        let radius = 0.2 + (s(9) % 1000) as f64 / 400.0;
        let z = factor(n1, n2, gaussian(n1 + n2, 3, s(0)).scale(2.0));
        let y = project_c(&factor(n1, n2, gaussian(n1 + n2, 3, s(1))), radius);
        let pz = project_c(&z, radius);
        if pz.sub(&y).unwrap().frobenius_norm() > z.sub(&y).unwrap().frobenius_norm() * (1.0 + 1e-12) {
            contraction_fail += 1;
        }
        if project_c(&pz, radius).matrix() != pz.matrix() || pz.max_row_norm() > radius {
            idempotence_fail += 1;
        }
    }
    verdict(
        lemma_fail == 0 && contraction_fail == 0 && idempotence_fail == 0,
        format_args!(
            "lifted-gap lemma failures {lemma_fail}/100, contraction failures {contraction_fail}/1000, idempotence failures {idempotence_fail}/1000"
        ),
    )
}

fn regularity_condition() -> Verdict {
    let (n1, n2, r) = (200, 150, 2);
    let inst = generate_instance::<f64>(n1, n2, r, 2.0, derive_seed(MASTER, &[8, 0])).unwrap();
    let obs = sample_bernoulli(n1, n2, 0.6, &inst, derive_seed(MASTER, &[8, 1])).unwrap();
    let init = spectral_init(&obs, r, Some(inst.mu()), derive_seed(MASTER, &[8, 2])).unwrap();
    let params = ModelParams::new(DEFAULT_LAMBDA, obs.p_hat(), init.clip_radius).unwrap();
    let zs = inst.z_star();
    let ball = 0.25 * inst.sigma_min().sqrt();
    let mut held = 0;
    for k in 0..100u64 {
        let h = gaussian(n1 + n2, r, derive_seed(MASTER, &[8, 3, k]));
        let scale = ball * (k + 1) as f64 / 100.0 / h.frobenius_norm();
        let z = factor(n1, n2, zs.matrix().add(&h.scale(scale)).unwrap());
        let diag = rc_diagnostic(&z, &inst, &obs, &params).unwrap();
        assert!(diag.distance <= ball * (1.0 + 1e-12));
        held += usize::from(diag.satisfied);
    }
    verdict(held >= 95, format_args!("held at {held}/100 points"))
}

fn baseline_parity() -> Verdict {
    let (n, r) = (500, 10);
    let mut spec = ExperimentSpec::new(ExperimentKind::Runtime);
    spec.seed = MASTER;
    let m = m_from_ratio(5.0, n, n, r);
    let seed = trial_seed(MASTER, 0, 0);
    let (inst, obs) = draw_problem(&spec, n, n, r, Sampling::Uniform(m), seed).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    let mut flops = Vec::new();
    for kind in [SolverKind::Gd, SolverKind::Svp, SolverKind::AltMin] {
        let rep = run_solver(kind, &spec, &obs, &inst, seed, false).unwrap();
        let err = rep.relative_error(&inst).unwrap();
        pass &= err <= 1e-6;
        flops.push(rep.flops_per_iter);
        notes.push(format!(
            "{kind} err {err:.1e} in {} iters, {:.3e} flops/iter",
            rep.iterations, rep.flops_per_iter
        ));
    }
    let budget = gd_flop_budget(n, n, r, m);
    pass &= flops[0] <= budget && flops[0] < flops[1];
    notes.push(format!("gd budget {budget:.3e}"));
    verdict(pass, notes.join("; "))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        "kind = phase-transition\ndims = 60x50\nranks = 2\nm_over_nr = 2:1:5\ntrials = 3\nmax_iters = 300\nseed = 11\n",
        "kind = convergence\ndims = 60x50\nranks = 2\nm_over_nr = 5\nkappa = 2\nsolvers = gd, svp, altmin\nmax_iters = 300\nseed = 12\n",
        "kind = runtime\ndims = 60x50\nranks = 2\nm_over_nr = 5\ntrials = 2\nsolvers = gd, svp, altmin\nmax_iters = 300\nseed = 13\n",
    ];
    let mut mismatches = Vec::new();
    for (k, cfg) in configs.iter().enumerate() {
        let path = dir.path().join(format!("c{k}.cfg"));
        std::fs::write(&path, cfg).unwrap();
        let outputs: Vec<String> = (0..2)
            .map(|rep| {
                let out = dir.path().join(format!("out{k}_{rep}.csv"));
                let status = std::process::Command::new(env!("CARGO_BIN_EXE_bmc"))
                    .arg("bench")
                    .arg(&path)
                    .arg("--out")
                    .arg(&out)
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success(), "bench exited with {status}");
                strip_time_columns(&std::fs::read_to_string(&out).unwrap())
            })
            .collect();
        if outputs[0] != outputs[1] || outputs[0].lines().count() < 2 {
            mismatches.push(k);
        }
    }
    verdict(
        mismatches.is_empty(),
        format_args!("3 configs run twice each, mismatching configs {mismatches:?}"),
    )
}

type Criterion = (usize, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "phase transition", phase_transition),
    (2, "geometric convergence", geometric_convergence),
    (3, "initialization quality", init_quality),
    (4, "gradient correctness", gradient_check),
    (5, "stationarity at the truth", stationarity),
    (6, "procrustes oracle", procrustes_oracle),
    (7, "projection and lifting properties", appendix_properties),
    (8, "regularity condition", regularity_condition),
    (9, "baseline parity", baseline_parity),
    (10, "determinism", determinism),
];

fn main() -> ExitCode {
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let strict = std::env::var_os("BMC_ACCEPTANCE_STRICT").is_some();
    let mut failed = 0;
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {id:>2} {name}: {} ({}) [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {failed} criteria failed");
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

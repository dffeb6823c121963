//! Experiment specifications and their flat `key = value` text format.
//!
//! ```text
//! # phase transition at 500x500
//! kind = phase-transition
//! dims = 500x500
//! ranks = 10, 20
//! m_over_nr = 2:0.5:5
//! trials = 20
//! ```
//!
//! Lists are comma separated; numeric lists also accept `start:step:end`.
//! Blank lines and `#` comments are ignored.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bmc_core::solver::{SolverKind, DEFAULT_ETA, DEFAULT_LAMBDA, DEFAULT_MAX_ITERS};

use crate::error::{HarnessError, Result};

pub const DEFAULT_THRESHOLD: f64 = 1e-6;
pub const DEFAULT_HARD_STOP: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_KAPPA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    PhaseTransition,
    Convergence,
    Runtime,
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "phase-transition" => Ok(Self::PhaseTransition),
            "convergence" => Ok(Self::Convergence),
            "runtime" => Ok(Self::Runtime),
            other => Err(format!(
                "unknown kind `{other}` (expected phase-transition, convergence or runtime)"
            )),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PhaseTransition => "phase-transition",
            Self::Convergence => "convergence",
            Self::Runtime => "runtime",
        })
    }
}

/// How many entries each grid cell observes.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleGrid {
    /// `m = ⌈c · n · r⌉` with `n = max(n1, n2)`.
    OverNr(Vec<f64>),
    /// Absolute sample counts.
    Count(Vec<usize>),
    /// Bernoulli sampling rates.
    Rate(Vec<f64>),
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        match self {
            Self::OverNr(v) | Self::Rate(v) => v.len(),
            Self::Count(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One grid point's sampling rule, resolved against concrete dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    Uniform(usize),
    Bernoulli(f64),
}

/// `⌈c · max(n1, n2) · r⌉`, capped at `n1·n2`.
pub fn m_from_ratio(c: f64, n1: usize, n2: usize, r: usize) -> usize {
    let m = (c * (n1.max(n2) * r) as f64).ceil() as usize;
    m.clamp(1, n1 * n2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dims: Vec<(usize, usize)>,
    pub ranks: Vec<usize>,
    pub samples: SampleGrid,
    pub trials: usize,
    pub solvers: Vec<SolverKind>,
    /// Relative error counted as a successful recovery.
    pub threshold: f64,
    /// Relative observed residual at which solvers stop.
    pub tol: f64,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub kappa: f64,
    pub max_iters: usize,
    pub eta: f64,
    pub lambda: f64,
    pub svp_step: f64,
    pub use_projection: bool,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            dims: vec![(500, 500)],
            ranks: vec![10],
            samples: SampleGrid::OverNr(vec![1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0]),
            trials: DEFAULT_TRIALS,
            solvers: vec![SolverKind::Gd],
            threshold: DEFAULT_THRESHOLD,
            tol: DEFAULT_HARD_STOP,
            output: None,
            seed: 0,
            kappa: DEFAULT_KAPPA,
            max_iters: DEFAULT_MAX_ITERS,
            eta: DEFAULT_ETA,
            lambda: DEFAULT_LAMBDA,
            svp_step: bmc_core::baselines::DEFAULT_SVP_STEP,
            use_projection: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config { line: 0, msg });
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dims.is_empty() || self.ranks.is_empty() || self.samples.is_empty() {
            return bad("dims, ranks and the sample grid must be nonempty".into());
        }
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if self.kind == ExperimentKind::PhaseTransition && self.solvers.len() != 1 {
            return bad("phase-transition runs exactly one solver".into());
        }
        for &(n1, n2) in &self.dims {
            if n1 == 0 || n2 == 0 {
                return bad(format!("dimension {n1}x{n2} is empty"));
            }
            for &r in &self.ranks {
                if r == 0 || r > n1.min(n2) {
                    return bad(format!("rank {r} invalid for {n1}x{n2}"));
                }
            }
        }
        match &self.samples {
            SampleGrid::OverNr(v) if v.iter().any(|&c| !(c > 0.0)) => {
                return bad("m_over_nr entries must be positive".into())
            }
            SampleGrid::Count(v) if v.contains(&0) => return bad("m entries must be positive".into()),
            SampleGrid::Rate(v) if v.iter().any(|&p| !(p > 0.0 && p <= 1.0)) => {
                return bad("p entries must lie in (0, 1]".into())
            }
            _ => {}
        }
        if !(self.kappa >= 1.0) {
            return bad("kappa must be >= 1".into());
        }
        if !(self.threshold > 0.0) || !(self.tol > 0.0) {
            return bad("threshold and tol must be positive".into());
        }
        if self.max_iters == 0 || !(self.eta > 0.0) || !(self.svp_step > 0.0) || !(self.lambda >= 0.0) {
            return bad("max_iters, eta and svp_step must be positive; lambda nonnegative".into());
        }
        Ok(())
    }

    /// Grid cells in output order: dims, then ranks, then samples.
    pub fn cells(&self) -> Vec<(usize, usize, usize, Sampling)> {
        let mut out = Vec::new();
        for &(n1, n2) in &self.dims {
            for &r in &self.ranks {
                match &self.samples {
                    SampleGrid::OverNr(v) => out.extend(
                        v.iter()
                            .map(|&c| (n1, n2, r, Sampling::Uniform(m_from_ratio(c, n1, n2, r)))),
                    ),
                    SampleGrid::Count(v) => out.extend(
                        v.iter()
                            .map(|&m| (n1, n2, r, Sampling::Uniform(m.min(n1 * n2)))),
                    ),
                    SampleGrid::Rate(v) => {
                        out.extend(v.iter().map(|&p| (n1, n2, r, Sampling::Bernoulli(p))))
                    }
                }
            }
        }
        out
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Config {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "kind" {
                kind = Some(value.parse().map_err(|msg| HarnessError::Config { line: line_no, msg })?);
            } else {
                entries.push((line_no, key.to_string(), value.to_string()));
            }
        }
        let kind = kind.ok_or(HarnessError::Config {
            line: 0,
            msg: "missing `kind`".into(),
        })?;
        let mut spec = Self::new(kind);
        for (line, key, value) in entries {
            spec.set(&key, &value)
                .map_err(|msg| HarnessError::Config { line, msg })?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "dims" => self.dims = parse_list(value, parse_dims)?,
            "ranks" => self.ranks = parse_list(value, parse_num)?,
            "m_over_nr" => self.samples = SampleGrid::OverNr(parse_floats(value)?),
            "m" => self.samples = SampleGrid::Count(parse_list(value, parse_num)?),
            "p" => self.samples = SampleGrid::Rate(parse_floats(value)?),
            "trials" => self.trials = parse_num(value)?,
            "solvers" => self.solvers = parse_list(value, |s| s.parse())?,
            "threshold" => self.threshold = parse_num(value)?,
            "tol" => self.tol = parse_num(value)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "seed" => self.seed = parse_num(value)?,
            "kappa" => self.kappa = parse_num(value)?,
            "max_iters" => self.max_iters = parse_num(value)?,
            "eta" => self.eta = parse_num(value)?,
            "lambda" => self.lambda = parse_num(value)?,
            "svp_step" => self.svp_step = parse_num(value)?,
            "use_projection" => self.use_projection = parse_num(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

fn parse_num<N: FromStr>(s: &str) -> std::result::Result<N, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}`", s.trim()))
}

fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected N1xN2, got `{s}`"))?;
    Ok((parse_num(a)?, parse_num(b)?))
}

fn parse_list<V>(
    s: &str,
    item: impl Fn(&str) -> std::result::Result<V, String>,
) -> std::result::Result<Vec<V>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(item)
        .collect()
}

/// Comma list or `start:step:end` (inclusive, tolerant to rounding).
fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, end] => {
            let (start, step, end): (f64, f64, f64) =
                (parse_num(start)?, parse_num(step)?, parse_num(end)?);
            if !(step > 0.0) || end < start {
                return Err(format!("bad range `{s}`"));
            }
            let count = ((end - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        [_] => parse_list(s, parse_num),
        _ => Err(format!("bad range `{s}`")),
    }
}

//! Plain-text files: ground-truth instances, factor matrices and traces.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bmc_core::linalg::SvdResult;
use bmc_core::solver::{SolveReport, TraceRecord};
use bmc_core::{Instance, Matrix};

use crate::error::{HarnessError, Result};

const INSTANCE_MAGIC: &str = "bmc-instance 1";

pub const TRACE_HEADER: &str = "iter,objective,rel_obs_residual,distance,rel_error,seconds";
pub const REPORT_HEADER: &str =
    "solver,status,iterations,final_rel_obs_residual,flops_per_iter,regularized_solves,seconds";

/// Writes `X⋆ = U Σ Vᵀ` as: a magic line, `n1 n2 r`, the singular values,
/// then the rows of `U` and of `V`, all whitespace separated.
pub fn write_instance(inst: &Instance, path: &Path) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "{INSTANCE_MAGIC}").unwrap();
    writeln!(s, "{} {} {}", inst.n1(), inst.n2(), inst.rank()).unwrap();
    push_row(&mut s, inst.sigma_star());
    for m in [inst.u_star(), inst.v_star()] {
        for i in 0..m.rows() {
            push_row(&mut s, m.row(i));
        }
    }
    fs::write(path, s)?;
    Ok(())
}

fn push_row(s: &mut String, row: &[f64]) {
    let cells: Vec<String> = row.iter().map(|x| format!("{x:.17e}")).collect();
    s.push_str(&cells.join(" "));
    s.push('\n');
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    let fail = |msg: String| HarnessError::Format {
        path: path.display().to_string(),
        msg,
    };
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if lines.next().map(str::trim) != Some(INSTANCE_MAGIC) {
        return Err(fail("missing instance header".into()));
    }
    let header = parse_row(lines.next().unwrap_or(""))
        .map_err(|e| fail(format!("bad size line: {e}")))?;
    let [n1, n2, r] = header[..] else {
        return Err(fail("size line must hold n1 n2 r".into()));
    };
    let (n1, n2, r) = (n1 as usize, n2 as usize, r as usize);
    let sigma = parse_row(lines.next().unwrap_or("")).map_err(fail)?;
    let mut read_block = |rows: usize| -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * r);
        for _ in 0..rows {
            let row = parse_row(lines.next().ok_or_else(|| fail("truncated factor".into()))?)
                .map_err(fail)?;
            if row.len() != r {
                return Err(fail(format!("factor row has {} entries, expected {r}", row.len())));
            }
            data.extend(row);
        }
        Ok(Matrix::from_row_major(rows, r, data)?)
    };
    let u = read_block(n1)?;
    let v = read_block(n2)?;
    let svd = SvdResult::new(u, sigma, v)?;
    Ok(Instance::from_svd(svd)?)
}

fn parse_row(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number `{t}`")))
        .collect()
}

/// Dense matrix as CSV without a header.
pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<()> {
    let mut s = String::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = m.row(i).iter().map(|x| format!("{x:.17e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub(crate) fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10e}")).unwrap_or_default()
}

pub fn trace_row(t: &TraceRecord<f64>) -> String {
    format!(
        "{},{:.10e},{:.10e},{},{},{:.6}",
        t.iter,
        t.objective,
        t.rel_obs_residual,
        opt(t.distance),
        opt(t.rel_error),
        t.seconds
    )
}

pub fn write_trace_csv(report: &SolveReport<f64>, path: &Path) -> Result<()> {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for t in &report.trace {
        s.push_str(&trace_row(t));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_report_csv(report: &SolveReport<f64>, path: &Path) -> Result<()> {
    let s = format!(
        "{REPORT_HEADER}\n{},{},{},{:.10e},{:.1},{},{:.6}\n",
        report.solver,
        report.status,
        report.iterations,
        report.last().rel_obs_residual,
        report.flops_per_iter,
        report.regularized_solves,
        report.seconds
    );
    fs::write(path, s)?;
    Ok(())
}

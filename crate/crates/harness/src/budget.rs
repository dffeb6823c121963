//! Per-iteration flop budgets, counted in multiply-adds.
//!
//! Each budget is the leading-order cost of one iteration times a slack
//! factor that absorbs lower-order terms (norms, projections, bookkeeping).

/// Slack over the leading-order gradient step count.
pub const GD_SLACK: f64 = 2.0;
/// Slack over the leading-order alternating least-squares sweep count.
pub const ALTMIN_SLACK: f64 = 4.0;

/// One projected gradient step: two sparse products with the residual
/// (`2mr`), the residual itself (`m`), the balancing Gram matrix and its
/// product (`(n1+n2)r²`) and the axpy, clip and norm passes (`4(n1+n2)r`).
pub fn gd_flop_budget(n1: usize, n2: usize, r: usize, m: usize) -> f64 {
    let n = (n1 + n2) as f64;
    let (r, m) = (r as f64, m as f64);
    GD_SLACK * (2.0 * m * r + m + n * r * r + 4.0 * n * r)
}

/// One sweep over both factors: a Gram matrix per observation (`mr²`) and
/// an `r × r` Cholesky solve per row (`(n1+n2)r³`).
pub fn altmin_flop_budget(n1: usize, n2: usize, r: usize, m: usize) -> f64 {
    let n = (n1 + n2) as f64;
    let (r, m) = (r as f64, m as f64);
    ALTMIN_SLACK * (m * r * r + n * r * r * r)
}

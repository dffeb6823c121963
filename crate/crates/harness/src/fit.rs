//! Least-squares fit of a geometric decay `d_k ≈ exp(a) · ρᵏ`.

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub rho: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
    /// First iteration included in the fit.
    pub start_iter: usize,
}

/// Fits `ln d = a + k ln ρ` over the records from the first one with
/// `d ≤ radius` onward. Needs at least three positive distances.
pub fn fit_geometric_tail(trace: &[(usize, f64)], radius: f64) -> Option<RateFit> {
    let start = trace.iter().position(|&(_, d)| d <= radius)?;
    let pts: Vec<(f64, f64)> = trace[start..]
        .iter()
        .filter(|&&(_, d)| d > 0.0 && d.is_finite())
        .map(|&(k, d)| (k as f64, d.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(RateFit {
        rho: slope.exp(),
        intercept,
        r_squared,
        points: pts.len(),
        start_iter: trace[start].0,
    })
}

use std::collections::HashSet;

use rand::Rng as _;
use rand_distr::{Distribution, Geometric};

use super::ObservationSet;
use crate::error::{invalid, Result};
use crate::instance::LowRankInstance;
use crate::rng::seeded;
use crate::scalar::Scalar;

fn check_dims<T: Scalar>(n1: usize, n2: usize, instance: &LowRankInstance<T>) -> Result<()> {
    if (n1, n2) != (instance.n1(), instance.n2()) {
        return Err(invalid!(
            "sampling {n1}x{n2} from a {}x{} instance",
            instance.n1(),
            instance.n2()
        ));
    }
    Ok(())
}

fn build<T: Scalar>(
    n1: usize,
    n2: usize,
    mut linear: Vec<u64>,
    instance: &LowRankInstance<T>,
) -> ObservationSet<T> {
    linear.sort_unstable();
    let n2u = n2 as u64;
    let indices: Vec<(usize, usize)> = linear
        .into_iter()
        .map(|k| ((k / n2u) as usize, (k % n2u) as usize))
        .collect();
    let values = indices.iter().map(|&(i, j)| instance.entry(i, j)).collect();
    ObservationSet::from_sorted(n1, n2, indices, values)
}

/// Exactly `m` distinct entries drawn uniformly without replacement
/// (Floyd's algorithm over the virtual index space `0..n1·n2`).
pub fn sample_uniform<T: Scalar>(
    n1: usize,
    n2: usize,
    m: usize,
    instance: &LowRankInstance<T>,
    seed: u64,
) -> Result<ObservationSet<T>> {
    check_dims(n1, n2, instance)?;
    let total = n1 as u64 * n2 as u64;
    if m == 0 || m as u64 > total {
        return Err(invalid!("cannot sample {m} of {total} entries"));
    }
    let mut rng = seeded(seed);
    let mut chosen = HashSet::with_capacity(m);
    for j in (total - m as u64)..total {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    Ok(build(n1, n2, chosen.into_iter().collect(), instance))
}

/// Each entry included independently with probability `p`, visited by
/// geometric skipping so the cost is `O(m)` rather than `O(n1·n2)`.
pub fn sample_bernoulli<T: Scalar>(
    n1: usize,
    n2: usize,
    p: f64,
    instance: &LowRankInstance<T>,
    seed: u64,
) -> Result<ObservationSet<T>> {
    check_dims(n1, n2, instance)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid!("sampling probability must lie in (0, 1], got {p}"));
    }
    let total = n1 as u64 * n2 as u64;
    let mut linear = Vec::with_capacity((p * total as f64 * 1.1) as usize + 16);
    if p == 1.0 {
        linear.extend(0..total);
    } else {
        let gaps = Geometric::new(p).map_err(|e| invalid!("{e}"))?;
        let mut rng = seeded(seed);
        let mut pos = 0u64;
        loop {
            pos = pos.saturating_add(gaps.sample(&mut rng));
            if pos >= total {
                break;
            }
            linear.push(pos);
            pos += 1;
        }
    }
    if linear.is_empty() {
        return Err(invalid!("Bernoulli sampling with p = {p} observed nothing"));
    }
    Ok(build(n1, n2, linear, instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_instance;

    fn inst() -> LowRankInstance<f64> {
        generate_instance(12, 9, 2, 2.0, 3).unwrap()
    }

    #[test]
    fn full_uniform_sample_is_the_matrix() {
        let inst = inst();
        let obs = sample_uniform(12, 9, 108, &inst, 1).unwrap();
        assert_eq!(obs.len(), 108);
        let x = inst.dense().unwrap();
        for (&(i, j), &v) in obs.indices().iter().zip(obs.values()) {
            assert_eq!(v, x[(i, j)]);
        }
        assert_eq!(obs.p_hat(), 1.0);
    }

    #[test]
    fn singleton_and_determinism() {
        let inst = inst();
        assert_eq!(sample_uniform(12, 9, 1, &inst, 5).unwrap().len(), 1);
        let a = sample_uniform(12, 9, 40, &inst, 5).unwrap();
        let b = sample_uniform(12, 9, 40, &inst, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 40);
        let c = sample_bernoulli(12, 9, 0.3, &inst, 5).unwrap();
        let d = sample_bernoulli(12, 9, 0.3, &inst, 5).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn out_of_range_requests() {
        let inst = inst();
        assert!(sample_uniform(12, 9, 0, &inst, 0).is_err());
        assert!(sample_uniform(12, 9, 109, &inst, 0).is_err());
        assert!(sample_uniform(12, 8, 10, &inst, 0).is_err());
        assert!(sample_bernoulli(12, 9, 0.0, &inst, 0).is_err());
        assert!(sample_bernoulli(12, 9, 1.5, &inst, 0).is_err());
    }

    #[test]
    fn bernoulli_with_p_one_is_full() {
        let inst = inst();
        assert_eq!(sample_bernoulli(12, 9, 1.0, &inst, 0).unwrap().len(), 108);
    }
}

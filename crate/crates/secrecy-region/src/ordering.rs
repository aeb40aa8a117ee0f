//! Encoding-order selection and exhaustive verification.
//!
//! The weighted-rate-optimal encoding order sorts users by descending
//! weight: the heaviest user is encoded first, so every later-encoded
//! covariance can shade its eavesdropper as jamming. Exhaustive
//! enumeration over all permutations provides the certification path
//! for small user counts.

use crate::channel::{ChannelSet, EncodingOrder, PowerConstraint, RateTuple, WeightVector};
use crate::error::{Error, Result};
use crate::solver::{solve_wsr, SolverConfig, SolverResult};
use rayon::prelude::*;

/// Enumeration is capped here: the solver runs once per permutation.
pub const MAX_ENUMERATED_USERS: usize = 5;

/// Weighted rate of every permutation, with the best one and the gap of
/// the descending-weight rule against it.
#[derive(Debug, Clone)]
pub struct OrderReport {
    /// One entry per permutation, in enumeration order.
    pub entries: Vec<OrderEntry>,
    /// Index into `entries` of the highest weighted rate.
    pub best_index: usize,
    /// Index into `entries` of the descending-weight order.
    pub rule_index: usize,
    /// Best weighted rate minus the descending-weight order's rate;
    /// nonnegative up to solver tolerance.
    pub rule_gap: f64,
}

/// Outcome of one enumerated permutation.
#[derive(Debug, Clone)]
pub struct OrderEntry {
    pub order: EncodingOrder,
    pub wsr: f64,
    pub rates: RateTuple,
    pub converged: bool,
}

impl OrderReport {
    pub fn best(&self) -> &OrderEntry {
        &self.entries[self.best_index]
    }

    pub fn rule(&self) -> &OrderEntry {
        &self.entries[self.rule_index]
    }
}

/// Encoding order that maximizes the weighted rate: users sorted by
/// descending weight, ties broken by ascending user index.
pub fn optimal_order(w: &WeightVector) -> EncodingOrder {
    let mut users: Vec<usize> = (0..w.len()).collect();
    users.sort_by(|&a, &b| {
        w.get(b).partial_cmp(&w.get(a)).expect("weights are finite").then(a.cmp(&b))
    });
    EncodingOrder::new(users).expect("sorted indices form a permutation")
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Next lexicographic permutation; stop after the last one.
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// Runs the weighted-rate solver for every encoding order and reports
/// each order's rate alongside the descending-weight rule's gap to the
/// enumerated best. Solves run in parallel; the report is deterministic.
pub fn enumerate_orders(
    ch: &ChannelSet,
    w: &WeightVector,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<OrderReport> {
    let kk = ch.num_users();
    if kk > MAX_ENUMERATED_USERS {
        return Err(Error::TooManyUsers { count: kk, max: MAX_ENUMERATED_USERS });
    }
    if w.len() != kk {
        return Err(Error::DimensionMismatch(format!("{} weights for {} users", w.len(), kk)));
    }
    let perms = all_permutations(kk);
    let results: Vec<Result<(EncodingOrder, SolverResult)>> = perms
        .into_par_iter()
        .map(|perm| {
            let order = EncodingOrder::new(perm)?;
            let res = solve_wsr(ch, w, &order, p, cfg)?;
            Ok((order, res))
        })
        .collect();
    let mut entries = Vec::with_capacity(results.len());
    for r in results {
        let (order, res) = r?;
        entries.push(OrderEntry {
            order,
            wsr: res.wsr,
            rates: res.rates,
            converged: res.converged,
        });
    }
    let best_index = entries
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.wsr.partial_cmp(&b.wsr).expect("rates are finite"))
        .map(|(i, _)| i)
        .expect("at least one permutation");
    let rule = optimal_order(w);
    let rule_index = entries
        .iter()
        .position(|e| e.order.as_slice() == rule.as_slice())
        .expect("enumeration covers every permutation");
    let rule_gap = entries[best_index].wsr - entries[rule_index].wsr;
    Ok(OrderReport { entries, best_index, rule_index, rule_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn descending_weights_with_index_ties() {
        let w = WeightVector::new(vec![0.15, 0.2, 0.65]).unwrap();
        assert_eq!(optimal_order(&w).one_based(), vec![3, 2, 1]);

        let w = WeightVector::new(vec![0.2, 0.1, 0.7]).unwrap();
        assert_eq!(optimal_order(&w).one_based(), vec![3, 1, 2]);

        let w = WeightVector::uniform(3);
        assert_eq!(optimal_order(&w).one_based(), vec![1, 2, 3]);

        let w = WeightVector::new(vec![0.25, 0.5, 0.25]).unwrap();
        assert_eq!(optimal_order(&w).one_based(), vec![2, 1, 3]);
    }

    #[test]
    fn optimal_order_weights_are_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for _ in 0..20 {
            let kk = rng.gen_range(1..=5);
            let mut raw: Vec<f64> = (0..kk).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|x| *x /= s);
            let w = WeightVector::new(raw).unwrap();
            let order = optimal_order(&w);
            for pos in 1..kk {
                assert!(w.get(order.user_at(pos - 1)) >= w.get(order.user_at(pos)));
            }
        }
    }

    #[test]
    fn permutations_are_exhaustive_and_distinct() {
        for k in 1..=5 {
            let perms = all_permutations(k);
            let expect: usize = (1..=k).product();
            assert_eq!(perms.len(), expect);
            let mut sorted = perms.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted.len(), expect);
        }
    }

    #[test]
    fn single_user_enumeration_is_trivial() {
        let h = CMat::from_fn(1, 1, |_, _| Complex64::new(1.2, 0.0));
        let g = CMat::from_fn(1, 1, |_, _| Complex64::new(0.4, 0.0));
        let ch = ChannelSet::new(vec![h], g).unwrap();
        let w = WeightVector::uniform(1);
        let p = PowerConstraint::new(1.0).unwrap();
        let report = enumerate_orders(&ch, &w, p, &SolverConfig::default()).unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.rule_gap, 0.0);
        assert!(report.best().wsr > 0.0);
    }

    #[test]
    fn rejects_unenumerable_user_counts() {
        let h: Vec<CMat> = (0..6).map(|_| CMat::identity(1, 1)).collect();
        let ch = ChannelSet::new(h, CMat::zeros(1, 1)).unwrap();
        let w = WeightVector::uniform(6);
        let p = PowerConstraint::new(1.0).unwrap();
        let err = enumerate_orders(&ch, &w, p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::TooManyUsers { count: 6, max: MAX_ENUMERATED_USERS }));
    }

    #[test]
    fn rule_matches_enumerated_best_on_scalar_channels() {
        // Distinct weights, scalar channels: the descending-weight rule
        // must be within solver tolerance of the exhaustive best.
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let p = PowerConstraint::new(1.0).unwrap();
        let cfg = SolverConfig::default();
        for _ in 0..3 {
            let h: Vec<CMat> = (0..3)
                .map(|_| CMat::from_fn(1, 1, |_, _| Complex64::new(rng.gen_range(0.3..2.0), 0.0)))
                .collect();
            let g = CMat::from_fn(1, 1, |_, _| Complex64::new(rng.gen_range(0.1..0.5), 0.0));
            let ch = ChannelSet::new(h, g).unwrap();
            let mut raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|x| *x /= s);
            let w = WeightVector::new(raw).unwrap();
            let report = enumerate_orders(&ch, &w, p, &cfg).unwrap();
            assert!(
                report.rule_gap <= 1e-3,
                "rule order {} trails best {} by {}",
                report.rule().order,
                report.best().order,
                report.rule_gap
            );
            for e in &report.entries {
                assert!(report.best().wsr >= e.wsr - 1e-9);
            }
        }
    }

    use crate::numerics::CMat;
}

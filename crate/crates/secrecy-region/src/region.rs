//! Rate-region tracing: weight sweeps, convex closure with time sharing,
//! and figure-ready CSV/JSON export.
//!
//! A sweep walks a grid of weight vectors, solves the weighted problem at
//! each point with the descending-weight encoding order, and records every
//! sample. When weights tie, every order consistent with the tie is run, so
//! both corner points of a shared-slope face are captured. The convex
//! closure then yields the achievable boundary, including segments reached
//! only by time sharing.

use rayon::prelude::*;
use serde_json::json;

use crate::channel::{
    ChannelSet, CovarianceSet, EncodingOrder, PowerConstraint, RateTuple, WeightVector,
};
use crate::error::{Error, Result};
use crate::numerics;
use crate::ordering;
use crate::solver::{solve_wsr, SolverConfig};

/// Weight ties smaller than this are treated as exact when enumerating
/// consistent encoding orders.
const TIE_TOL: f64 = 1e-12;
/// Coarsest dense grid allowed for three users: step 0.05 keeps the
/// simplex at 231 points.
const MIN_THREE_USER_STEP: f64 = 0.05 - 1e-12;

/// One solved point of a weight sweep. Rates are stored unclamped.
#[derive(Debug, Clone)]
pub struct RegionSample {
    pub weights: WeightVector,
    pub order: EncodingOrder,
    pub rates: RateTuple,
    pub wsr: f64,
    pub power: f64,
    pub converged: bool,
    pub covariances: CovarianceSet,
}

/// Convex closure of the converged samples, clamped to the nonnegative
/// orthant.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionHull {
    /// Two users: the upper-right boundary, ordered by increasing first
    /// rate, nonincreasing second rate.
    Two { points: Vec<[f64; 2]> },
    /// Three users: the nondominated rate tuples plus the upper-right
    /// boundaries of the three pairwise projections, in the order
    /// (r1, r2), (r2, r3), (r1, r3).
    Three { points: Vec<[f64; 3]>, projections: [Vec<[f64; 2]>; 3] },
}

/// A full sweep: every sample plus the closed boundary.
#[derive(Debug, Clone)]
pub struct RegionSweep {
    pub samples: Vec<RegionSample>,
    pub hull: RegionHull,
}

fn sweep_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("SECRECY_REGION_THREADS") {
        let n: usize = raw.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("SECRECY_REGION_THREADS must be a positive integer, got {raw:?}"))
        })?;
        if n == 0 {
            return Err(Error::InvalidInput("SECRECY_REGION_THREADS must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidInput(format!("could not build sweep thread pool: {e}")))
}

/// Weight grids are rational: the step is interpreted as `1/n` with
/// `n = round(1/step)`, which makes ties exact and endpoints included.
fn grid_denominator(grid_step: f64) -> Result<usize> {
    if !grid_step.is_finite() || grid_step <= 0.0 || grid_step > 1.0 {
        return Err(Error::InvalidInput(format!(
            "grid step must lie in (0, 1], got {grid_step}"
        )));
    }
    Ok(((1.0 / grid_step).round() as usize).max(1))
}

fn grid_weights(k: usize, grid_step: f64) -> Result<Vec<WeightVector>> {
    let n = grid_denominator(grid_step)?;
    let nf = n as f64;
    match k {
        2 => Ok((0..=n)
            .map(|i| WeightVector::new(vec![i as f64 / nf, (n - i) as f64 / nf]).unwrap())
            .collect()),
        3 => {
            if grid_step < MIN_THREE_USER_STEP {
                return Err(Error::InvalidInput(format!(
                    "three-user sweeps need a grid step of at least 0.05, got {grid_step}"
                )));
            }
            let mut out = Vec::new();
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let l = n - i - j;
                    out.push(
                        WeightVector::new(vec![i as f64 / nf, j as f64 / nf, l as f64 / nf])
                            .unwrap(),
                    );
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidInput(format!(
            "weight sweeps support 2 or 3 users, got {k}"
        ))),
    }
}

/// All encoding orders whose weights are nonincreasing along positions.
/// Distinct weights give exactly the descending-weight order; ties expand
/// to every order consistent with them.
fn consistent_orders(w: &WeightVector) -> Vec<EncodingOrder> {
    ordering::all_permutations(w.len())
        .into_iter()
        .filter(|perm| {
            perm.windows(2).all(|pair| w.get(pair[0]) >= w.get(pair[1]) - TIE_TOL)
        })
        .map(|perm| EncodingOrder::new(perm).unwrap())
        .collect()
}

fn solve_sample(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> RegionSample {
    match solve_wsr(ch, w, order, p, cfg) {
        Ok(res) => RegionSample {
            weights: w.clone(),
            order: order.clone(),
            rates: res.rates,
            wsr: res.wsr,
            power: res.power_used,
            converged: res.converged,
            covariances: res.covariances,
        },
        Err(_) => RegionSample {
            weights: w.clone(),
            order: order.clone(),
            rates: RateTuple::new(vec![0.0; w.len()]),
            wsr: 0.0,
            power: 0.0,
            converged: false,
            covariances: CovarianceSet::zero_broadcast(ch),
        },
    }
}

/// Sweeps the weight grid, solving each point with every weight-consistent
/// encoding order, and closes the result. Solver failures mark their sample
/// unconverged and the sweep continues; the closure needs at least one
/// converged sample. Set `SECRECY_REGION_THREADS` to cap the parallelism.
pub fn sweep_weights(
    ch: &ChannelSet,
    p: PowerConstraint,
    cfg: &SolverConfig,
    grid_step: f64,
) -> Result<RegionSweep> {
    cfg.validate()?;
    let tasks: Vec<(WeightVector, EncodingOrder)> = grid_weights(ch.num_users(), grid_step)?
        .into_iter()
        .flat_map(|w| {
            consistent_orders(&w).into_iter().map(move |o| (w.clone(), o))
        })
        .collect();
    let samples: Vec<RegionSample> = sweep_pool()?.install(|| {
        tasks
            .par_iter()
            .map(|(w, order)| solve_sample(ch, w, order, p, cfg))
            .collect()
    });
    let hull = convex_closure(&samples)?;
    Ok(RegionSweep { samples, hull })
}

/// One sweep per eavesdropper scale: the base eavesdropper is multiplied
/// by each entry of `deltas` in turn. Growing the scale can only shrink
/// the region.
pub fn delta_family_sweep(
    ch: &ChannelSet,
    deltas: &[f64],
    p: PowerConstraint,
    cfg: &SolverConfig,
    grid_step: f64,
) -> Result<Vec<RegionSweep>> {
    deltas
        .iter()
        .map(|&d| sweep_weights(&ch.with_scaled_eavesdropper(d)?, p, cfg, grid_step))
        .collect()
}

fn clamped_points(samples: &[RegionSample]) -> Vec<Vec<f64>> {
    samples
        .iter()
        .filter(|s| s.converged)
        .map(|s| s.rates.as_slice().iter().map(|r| r.max(0.0)).collect())
        .collect()
}

/// Counterclockwise turn test for the 2D hull walk.
fn ccw(o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Upper-right boundary of the convex hull: vertices from the highest
/// second coordinate to the highest first coordinate. Collinear interior
/// points are dropped; dominated vertices never appear.
fn pareto_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 1 {
        return pts;
    }
    // Monotone chain, upper side: walk left to right keeping right turns.
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pt in &pts {
        while hull.len() >= 2 && ccw(&hull[hull.len() - 2], &hull[hull.len() - 1], pt) >= 0.0 {
            hull.pop();
        }
        hull.push(*pt);
    }
    // The boundary rises to its peak before it starts paying first for
    // second; everything before the last peak is dominated.
    let start = (0..hull.len())
        .max_by(|&a, &b| {
            (hull[a][1], hull[a][0]).partial_cmp(&(hull[b][1], hull[b][0])).unwrap()
        })
        .unwrap();
    hull.split_off(start)
}

fn dominated_3d(p: &[f64; 3], others: &[[f64; 3]]) -> bool {
    others.iter().any(|q| {
        q.iter().zip(p).all(|(qi, pi)| *qi >= pi - TIE_TOL)
            && q.iter().zip(p).any(|(qi, pi)| *qi > pi + TIE_TOL)
    })
}

/// Closes the converged samples into the emitted boundary. Rates are
/// clamped to zero here; the raw samples keep their signed values.
pub fn convex_closure(samples: &[RegionSample]) -> Result<RegionHull> {
    let dims = samples.first().map(|s| s.rates.len());
    let pts = clamped_points(samples);
    if pts.is_empty() {
        return Err(Error::NoConvergedSamples);
    }
    match dims {
        Some(2) => {
            let flat: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
            Ok(RegionHull::Two { points: pareto_hull_2d(&flat) })
        }
        Some(3) => {
            let flat: Vec<[f64; 3]> = pts.iter().map(|p| [p[0], p[1], p[2]]).collect();
            let points: Vec<[f64; 3]> = flat
                .iter()
                .filter(|p| !dominated_3d(p, &flat))
                .cloned()
                .collect();
            let pair = |a: usize, b: usize| {
                pareto_hull_2d(&flat.iter().map(|p| [p[a], p[b]]).collect::<Vec<_>>())
            };
            Ok(RegionHull::Three {
                points,
                projections: [pair(0, 1), pair(1, 2), pair(0, 2)],
            })
        }
        Some(k) => Err(Error::InvalidInput(format!(
            "convex closure supports 2 or 3 users, got {k}"
        ))),
        None => Err(Error::NoConvergedSamples),
    }
}

impl RegionSweep {
    /// One CSV row per sample: `w1..wK,order,r1..rK,wsr,power,converged`,
    /// with the order as a dash-joined one-based list.
    pub fn to_csv(&self) -> String {
        let k = self.samples.first().map_or(0, |s| s.weights.len());
        let mut head: Vec<String> = (1..=k).map(|i| format!("w{i}")).collect();
        head.push("order".into());
        head.extend((1..=k).map(|i| format!("r{i}")));
        head.extend(["wsr".into(), "power".into(), "converged".into()]);
        let mut out = head.join(",");
        out.push('\n');
        for s in &self.samples {
            let mut row: Vec<String> =
                s.weights.as_slice().iter().map(|w| w.to_string()).collect();
            row.push(s.order.to_string());
            row.extend(s.rates.as_slice().iter().map(|r| r.to_string()));
            row.push(s.wsr.to_string());
            row.push(s.power.to_string());
            row.push(s.converged.to_string());
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Full sweep as a JSON value: samples with covariances, then the hull.
    pub fn to_json(&self) -> serde_json::Value {
        let samples: Vec<serde_json::Value> = self
            .samples
            .iter()
            .map(|s| {
                json!({
                    "weights": s.weights.as_slice(),
                    "order": s.order.one_based(),
                    "rates": s.rates.as_slice(),
                    "wsr": s.wsr,
                    "power": s.power,
                    "converged": s.converged,
                    "covariances": s.covariances.matrices().iter()
                        .map(|m| numerics::to_pairs(m.matrix()))
                        .collect::<Vec<_>>(),
                })
            })
            .collect();
        let hull = match &self.hull {
            RegionHull::Two { points } => json!({ "dim": 2, "points": points }),
            RegionHull::Three { points, projections } => json!({
                "dim": 3,
                "points": points,
                "projections": {
                    "r1_r2": projections[0],
                    "r2_r3": projections[1],
                    "r1_r3": projections[2],
                },
            }),
        };
        json!({ "samples": samples, "hull": hull })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::secrecy_rates;
    use crate::numerics::CMat;
    use num_complex::Complex64;

    fn real_mat(rows: usize, cols: usize, rows_data: &[&[f64]]) -> CMat {
        let mut m = numerics::zeros(rows, cols);
        for (i, row) in rows_data.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    fn two_user_example_channels() -> ChannelSet {
        let h1 = real_mat(2, 2, &[&[1.0, -0.5], &[0.5, 2.0]]);
        let h2 = real_mat(2, 2, &[&[-0.3, 1.0], &[2.0, -0.4]]);
        let g = real_mat(1, 2, &[&[0.8, -1.6]]);
        ChannelSet::new(vec![h1, h2], g).unwrap()
    }

    fn two_user_bc_channels() -> ChannelSet {
        let h1 = real_mat(2, 2, &[&[1.0, 0.8], &[0.5, 2.0]]);
        let h2 = real_mat(2, 2, &[&[0.2, 1.0], &[2.0, 0.5]]);
        let g = real_mat(2, 2, &[&[1.0, 0.4], &[-0.4, 1.0]]);
        ChannelSet::new(vec![h1, h2], g).unwrap()
    }

    fn manual_sample(r: Vec<f64>, converged: bool) -> RegionSample {
        let k = r.len();
        let h = (0..k).map(|_| numerics::identity(1)).collect();
        let ch = ChannelSet::new(h, numerics::zeros(1, 1)).unwrap();
        RegionSample {
            weights: WeightVector::uniform(k),
            order: EncodingOrder::identity(k),
            rates: RateTuple::new(r),
            wsr: 0.0,
            power: 0.0,
            converged,
            covariances: CovarianceSet::zero_broadcast(&ch),
        }
    }

    /// Upper envelope of the 2D hull at `x`, or the peak height left of it.
    fn envelope(points: &[[f64; 2]], x: f64) -> f64 {
        if x <= points[0][0] {
            return points[0][1];
        }
        for pair in points.windows(2) {
            if x <= pair[1][0] + 1e-15 {
                let t = (x - pair[0][0]) / (pair[1][0] - pair[0][0]);
                return pair[0][1] + t * (pair[1][1] - pair[0][1]);
            }
        }
        f64::NEG_INFINITY
    }

    #[test]
    fn two_user_sweep_recovers_published_corners() {
        let ch = two_user_example_channels();
        let p = PowerConstraint::new(1.0).unwrap();
        let sweep = sweep_weights(&ch, p, &SolverConfig::default(), 0.25).unwrap();
        // Five grid points, the middle one tied and run under both orders.
        assert_eq!(sweep.samples.len(), 6);
        let corner = |r1: f64, r2: f64| {
            sweep.samples.iter().any(|s| {
                (s.rates.get(0) - r1).abs() < 0.01 && (s.rates.get(1) - r2).abs() < 0.01
            })
        };
        assert!(corner(0.8334, 0.7643), "missing first corner");
        assert!(corner(0.5324, 1.065), "missing second corner");
        // Both tied samples achieve the same weighted value.
        let tied: Vec<&RegionSample> = sweep
            .samples
            .iter()
            .filter(|s| (s.weights.get(0) - 0.5).abs() < 1e-15)
            .collect();
        assert_eq!(tied.len(), 2);
        assert!((tied[0].wsr - tied[1].wsr).abs() < 2e-4);
        // Stored covariances reproduce stored rates.
        for s in sweep.samples.iter().filter(|s| s.converged) {
            let again = secrecy_rates(&ch, &s.covariances, &s.order).unwrap();
            for k in 0..2 {
                assert!((again.get(k) - s.rates.get(k)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn hull_carries_the_time_sharing_segment_and_dominates_samples() {
        let ch = two_user_example_channels();
        let p = PowerConstraint::new(1.0).unwrap();
        let sweep = sweep_weights(&ch, p, &SolverConfig::default(), 0.25).unwrap();
        let points = match &sweep.hull {
            RegionHull::Two { points } => points.clone(),
            other => panic!("expected a two-user hull, got {other:?}"),
        };
        // Ordered and convex along the boundary.
        for pair in points.windows(2) {
            assert!(pair[1][0] > pair[0][0] - 1e-12);
            assert!(pair[1][1] < pair[0][1] + 1e-12);
        }
        // The midpoint of the two corner points is achievable by time
        // sharing, so the envelope covers it.
        let mid = [(0.8334 + 0.5324) / 2.0, (0.7643 + 1.065) / 2.0];
        assert!(envelope(&points, mid[0]) >= mid[1] - 0.01);
        // No sample pokes above the envelope.
        for s in sweep.samples.iter().filter(|s| s.converged) {
            let r1 = s.rates.get(0).max(0.0);
            let r2 = s.rates.get(1).max(0.0);
            assert!(envelope(&points, r1) >= r2 - 1e-6);
        }
    }

    #[test]
    fn single_point_hull_is_degenerate() {
        let samples = vec![manual_sample(vec![0.4, 0.2], true)];
        match convex_closure(&samples).unwrap() {
            RegionHull::Two { points } => assert_eq!(points, vec![[0.4, 0.2]]),
            other => panic!("unexpected hull {other:?}"),
        }
    }

    #[test]
    fn collinear_points_drop_the_interior() {
        let samples = vec![
            manual_sample(vec![0.0, 1.0], true),
            manual_sample(vec![0.5, 0.5], true),
            manual_sample(vec![1.0, 0.0], true),
        ];
        match convex_closure(&samples).unwrap() {
            RegionHull::Two { points } => {
                assert_eq!(points, vec![[0.0, 1.0], [1.0, 0.0]]);
            }
            other => panic!("unexpected hull {other:?}"),
        }
    }

    #[test]
    fn negative_rates_are_clamped_only_in_the_hull() {
        let samples = vec![manual_sample(vec![-0.3, 0.7], true)];
        match convex_closure(&samples).unwrap() {
            RegionHull::Two { points } => assert_eq!(points, vec![[0.0, 0.7]]),
            other => panic!("unexpected hull {other:?}"),
        }
        assert!(samples[0].rates.get(0) < 0.0);
    }

    #[test]
    fn closure_requires_a_converged_sample() {
        let samples = vec![manual_sample(vec![0.1, 0.1], false)];
        match convex_closure(&samples) {
            Err(Error::NoConvergedSamples) => {}
            other => panic!("expected NoConvergedSamples, got {other:?}"),
        }
    }

    #[test]
    fn dominant_eavesdropper_collapses_the_region() {
        let h1 = real_mat(1, 1, &[&[1.0]]);
        let h2 = real_mat(1, 1, &[&[1.0]]);
        let g = real_mat(1, 1, &[&[10.0]]);
        let ch = ChannelSet::new(vec![h1, h2], g).unwrap();
        let p = PowerConstraint::new(1.0).unwrap();
        let sweep = sweep_weights(&ch, p, &SolverConfig::default(), 0.5).unwrap();
        match &sweep.hull {
            RegionHull::Two { points } => {
                for pt in points {
                    assert!(pt[0] <= 1e-6 && pt[1] <= 1e-6, "region did not collapse: {pt:?}");
                }
            }
            other => panic!("unexpected hull {other:?}"),
        }
    }

    #[test]
    fn stronger_eavesdroppers_shrink_the_region() {
        let ch = two_user_bc_channels();
        let p = PowerConstraint::new(1.0).unwrap();
        let cfg = SolverConfig::default();
        let sweeps = delta_family_sweep(&ch, &[0.0, 0.5, 1.0], p, &cfg, 0.5).unwrap();
        assert_eq!(sweeps.len(), 3);
        // Scale zero reproduces the open-channel sum rate at equal weights.
        let open_sum = sweeps[0]
            .samples
            .iter()
            .find(|s| (s.weights.get(0) - 0.5).abs() < 1e-15)
            .map(|s| s.rates.sum())
            .unwrap();
        assert!((open_sum - 2.2615).abs() < 0.01, "open sum {open_sum}");
        // Larger scale never wins at matched weights and order.
        for pair in sweeps.windows(2) {
            for (a, b) in pair[0].samples.iter().zip(&pair[1].samples) {
                assert_eq!(a.weights.as_slice(), b.weights.as_slice());
                assert_eq!(a.order.as_slice(), b.order.as_slice());
                assert!(a.wsr >= b.wsr - 1e-3, "{} < {}", a.wsr, b.wsr);
            }
        }
    }

    #[test]
    fn three_user_closure_reports_cloud_and_projections() {
        let samples = vec![
            manual_sample(vec![1.0, 0.0, 0.0], true),
            manual_sample(vec![0.0, 1.0, 0.0], true),
            manual_sample(vec![0.0, 0.0, 1.0], true),
            manual_sample(vec![0.2, 0.2, 0.2], true),
            manual_sample(vec![0.1, 0.1, 0.1], true),
        ];
        match convex_closure(&samples).unwrap() {
            RegionHull::Three { points, projections } => {
                assert_eq!(points.len(), 4);
                assert!(!points.contains(&[0.1, 0.1, 0.1]));
                // Each projection keeps its own axis corners.
                assert!(projections[0].contains(&[1.0, 0.0]));
                assert!(projections[0].contains(&[0.0, 1.0]));
                assert!(projections[1].contains(&[0.0, 1.0]));
                assert!(projections[2].contains(&[1.0, 0.0]));
            }
            other => panic!("unexpected hull {other:?}"),
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let ch = two_user_example_channels();
        let p = PowerConstraint::new(1.0).unwrap();
        let sweep = sweep_weights(&ch, p, &SolverConfig::default(), 1.0).unwrap();
        let csv = sweep.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "w1,w2,order,r1,r2,wsr,power,converged");
        assert_eq!(csv.lines().count(), sweep.samples.len() + 1);
        let first = lines.next().unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[0], "0");
        assert_eq!(fields[1], "1");
        assert_eq!(fields[2], "2-1");
        assert_eq!(fields[7], "true");
    }

    #[test]
    fn json_round_trips_covariances() {
        let ch = two_user_example_channels();
        let p = PowerConstraint::new(1.0).unwrap();
        let sweep = sweep_weights(&ch, p, &SolverConfig::default(), 1.0).unwrap();
        let val = sweep.to_json();
        let sample = &val["samples"][0];
        assert_eq!(sample["order"].as_array().unwrap().len(), 2);
        let cov: Vec<Vec<[f64; 2]>> =
            serde_json::from_value(sample["covariances"][0].clone()).unwrap();
        let m = numerics::from_pairs(&cov).unwrap();
        let stored = sweep.samples[0].covariances.get(0).matrix();
        assert!(numerics::max_abs(&(m - stored)) < 1e-15);
        assert_eq!(val["hull"]["dim"], 2);
    }
}

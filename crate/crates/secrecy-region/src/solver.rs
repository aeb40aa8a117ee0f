//! Weighted secrecy rate maximization for a fixed encoding order.
//!
//! The solver runs an outer bisection on a power price applied to the
//! total transmit power. At each price, covariances are updated in
//! cyclic block sweeps: the objective splits per block into a concave
//! part plus a convex part, the convex part is replaced by its tangent
//! plane, and the resulting concave subproblem is solved exactly for
//! the first encode position (a water-filling form) and by projected
//! gradient ascent for the rest. Later-encoded covariances enter
//! earlier users' rates as interference at both the receiver and the
//! eavesdropper, so blocks with zero weight still matter: they act as
//! cooperative jamming and are optimized like any other block.

use crate::channel::{
    ChannelSet, CovarianceSet, EncodingOrder, PowerConstraint, RateTuple, Side, WeightVector,
};
use crate::error::{Error, Result};
use crate::numerics::{self, CMat, HermitianMatrix};

/// First-order optimality target for one block subproblem.
pub const SUBPROBLEM_TOL: f64 = 1e-7;
/// Residual under which a block whose line search ran out of progress is
/// still accepted. Near a face of the PSD cone the objective gain of the
/// remaining move falls below float resolution before the residual meets
/// [`SUBPROBLEM_TOL`], so the iterate is an ascent ceiling, not a failure.
/// Matches [`KKT_TOL`], the gate that decides reported convergence.
pub const NEAR_STATIONARY_TOL: f64 = 1e-4;
/// Stationarity target for the stacked projected gradient of the full
/// price-augmented objective at a reported fixed point.
pub const KKT_TOL: f64 = 1e-4;
/// Relative slack below the power budget that still counts as binding.
pub const POWER_BAND_BELOW: f64 = 1e-5;
/// Relative overshoot above the power budget that is still accepted.
pub const POWER_BAND_ABOVE: f64 = 1e-6;

const ARMIJO_SIGMA: f64 = 1e-4;
const ARMIJO_BACKTRACK: f64 = 0.5;
const BRACKET_EXPANSIONS: usize = 4;

/// Starting point for the block sweeps at each price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitMode {
    /// `Q_k = P / (K n_t) I`: spreads the budget evenly over users and
    /// antennas.
    #[default]
    Uniform,
    /// All-zero covariances.
    Zero,
}

/// Tuning knobs for [`solve_wsr`].
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Initial lower bound of the power-price bracket.
    pub lambda_min: f64,
    /// Initial upper bound of the power-price bracket.
    pub lambda_max: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub eps1: f64,
    /// Block sweeps stop once the weighted rate changes less than this.
    pub eps2: f64,
    /// Cap on bisection steps (bracket probes included).
    pub max_outer: usize,
    /// Cap on block sweeps per price.
    pub max_inner: usize,
    /// Cap on projected-gradient iterations per block subproblem.
    pub max_subproblem_iters: usize,
    /// Covariance initialization used at every price.
    pub init_mode: InitMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda_min: 0.01,
            lambda_max: 10.0,
            eps1: 1e-5,
            eps2: 1e-5,
            max_outer: 64,
            max_inner: 2000,
            max_subproblem_iters: 5000,
            init_mode: InitMode::Uniform,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min > 0.0 && self.lambda_min < self.lambda_max) {
            return Err(Error::InvalidInput(format!(
                "price bracket must satisfy 0 < min < max, got [{}, {}]",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.eps1 > 0.0 && self.eps2 > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_outer == 0 || self.max_inner == 0 || self.max_subproblem_iters == 0 {
            return Err(Error::InvalidInput("iteration caps must be nonzero".into()));
        }
        Ok(())
    }
}

/// Gradient of the convex objective part for one block, used as a price
/// matrix in that block's subproblem. Negative semidefinite for valid
/// inputs.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    a: HermitianMatrix,
}

impl GradientMatrix {
    pub fn matrix(&self) -> &CMat {
        self.a.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.a
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.a.max_eigenvalue()
    }
}

/// Convergence bookkeeping for one [`solve_wsr`] call.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    /// Prices probed, bracket setup included.
    pub outer_iterations: usize,
    /// Block sweeps summed over all probed prices.
    pub total_sweeps: usize,
    /// Block sweeps spent at the reported price.
    pub final_sweeps: usize,
    /// Largest one-sweep drop of the weighted rate at the reported price.
    /// The sweeps maximize the price-augmented objective, so the weighted
    /// rate itself may in principle dip while power shrinks.
    pub max_wsr_decrease: f64,
    /// Largest one-sweep drop of the price-augmented objective at the
    /// reported price. Nonpositive up to roundoff by construction.
    pub max_lagrangian_decrease: f64,
    /// Stacked projected-gradient norm at the reported covariances.
    pub kkt_residual: f64,
    /// A sweep loop ran into its iteration cap.
    pub inner_cap_hit: bool,
    /// The power constraint never became binding: the reported solution
    /// uses less than the budget even at the smallest probed price.
    pub power_slack: bool,
    /// Final price bracket.
    pub lambda_bracket: (f64, f64),
}

/// Covariances, rates and diagnostics returned by [`solve_wsr`].
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Downlink covariances, indexed by user.
    pub covariances: CovarianceSet,
    /// Per-user secrecy rates in nats, unclamped.
    pub rates: RateTuple,
    /// Weighted sum of the rates.
    pub wsr: f64,
    /// Power price at which the result was produced.
    pub lambda_star: f64,
    /// Total transmit power of the result.
    pub power_used: f64,
    /// Block sweeps converged at the final price: sweep-to-sweep change
    /// below tolerance and the stationarity residual within bounds.
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

fn check_problem(ch: &ChannelSet, w: &WeightVector, order: &EncodingOrder) -> Result<()> {
    let kk = ch.num_users();
    if w.len() != kk {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} users",
            w.len(),
            kk
        )));
    }
    if order.len() != kk {
        return Err(Error::DimensionMismatch(format!(
            "order permutes {} users but the channel has {}",
            order.len(),
            kk
        )));
    }
    Ok(())
}

/// `x s x†`, symmetrized.
fn sandwich(x: &CMat, s: &CMat) -> CMat {
    let m = x * s * x.adjoint();
    (&m + m.adjoint()) * numerics::cr(0.5)
}

/// `x† (I + base)^{-1} x` for Hermitian PSD `base`, symmetrized.
fn quad_inv(x: &CMat, base: &CMat) -> Result<CMat> {
    let m = numerics::identity(base.nrows()) + base;
    let y = numerics::solve_pd(&m, x)?;
    let out = x.adjoint() * y;
    Ok((&out + out.adjoint()) * numerics::cr(0.5))
}

fn re_inner(a: &CMat, b: &CMat) -> f64 {
    numerics::trace_re(&(a * b))
}

/// Suffix sums over encode positions: `out[p] = sum_{j >= p} q_pos[j]`,
/// with `out[K]` zero.
fn position_suffix_sums(q_pos: &[CMat], n_t: usize) -> Vec<CMat> {
    let kk = q_pos.len();
    let mut out = vec![numerics::zeros(n_t, n_t); kk + 1];
    for p in (0..kk).rev() {
        out[p] = &out[p + 1] + &q_pos[p];
    }
    out
}

/// Per-position secrecy rates for position-indexed covariances.
fn position_rates(ch: &ChannelSet, order: &EncodingOrder, q_pos: &[CMat]) -> Result<Vec<f64>> {
    let s = position_suffix_sums(q_pos, ch.n_t());
    let g = ch.g();
    let mut rates = Vec::with_capacity(q_pos.len());
    for pos in 0..q_pos.len() {
        let h = ch.h(order.user_at(pos));
        let legit = numerics::logdet_i_plus(&sandwich(h, &s[pos]))?
            - numerics::logdet_i_plus(&sandwich(h, &s[pos + 1]))?;
        let eve = numerics::logdet_i_plus(&sandwich(g, &s[pos]))?
            - numerics::logdet_i_plus(&sandwich(g, &s[pos + 1]))?;
        rates.push(legit - eve);
    }
    Ok(rates)
}

fn position_weights(w: &WeightVector, order: &EncodingOrder) -> Vec<f64> {
    (0..order.len()).map(|p| w.get(order.user_at(p))).collect()
}

fn covariances_to_positions(q: &CovarianceSet, order: &EncodingOrder) -> Vec<CMat> {
    (0..order.len()).map(|p| q.get(order.user_at(p)).matrix().clone()).collect()
}

fn positions_to_covariances(q_pos: &[CMat], order: &EncodingOrder) -> Result<CovarianceSet> {
    let kk = q_pos.len();
    let mut mats = vec![None; kk];
    for (pos, q) in q_pos.iter().enumerate() {
        mats[order.user_at(pos)] = Some(HermitianMatrix::symmetrize(q.clone()));
    }
    let mats = mats.into_iter().map(|m| m.expect("order covers every user")).collect();
    CovarianceSet::new(Side::Broadcast, mats)
}

/// Splits the price-augmented objective at block `position` into its
/// concave and convex parts (in that block's covariance); the two values
/// always sum to the full objective
/// `sum_k w_k R_k - lambda (sum_k tr Q_k - P)`.
pub fn split_objective(
    ch: &ChannelSet,
    q: &CovarianceSet,
    w: &WeightVector,
    order: &EncodingOrder,
    lambda: f64,
    p: PowerConstraint,
    position: usize,
) -> Result<(f64, f64)> {
    check_problem(ch, w, order)?;
    if position >= order.len() {
        return Err(Error::InvalidInput(format!(
            "position {position} out of range for {} users",
            order.len()
        )));
    }
    let q_pos = covariances_to_positions(q, order);
    let w_pos = position_weights(w, order);
    let s = position_suffix_sums(&q_pos, ch.n_t());
    let g = ch.g();
    let rates = position_rates(ch, order, &q_pos)?;

    let h_k = ch.h(order.user_at(position));
    let mut ccv = w_pos[position]
        * (numerics::logdet_i_plus(&sandwich(h_k, &s[position]))?
            - numerics::logdet_i_plus(&sandwich(h_k, &s[position + 1]))?);
    for j in 0..position {
        ccv += w_pos[j] * numerics::logdet_i_plus(&sandwich(g, &s[j + 1]))?;
    }
    ccv -= lambda * numerics::trace_re(&q_pos[position]);

    let mut cvx = -w_pos[position]
        * (numerics::logdet_i_plus(&sandwich(g, &s[position]))?
            - numerics::logdet_i_plus(&sandwich(g, &s[position + 1]))?);
    for j in 0..position {
        let h_j = ch.h(order.user_at(j));
        cvx += w_pos[j]
            * (numerics::logdet_i_plus(&sandwich(h_j, &s[j]))?
                - numerics::logdet_i_plus(&sandwich(h_j, &s[j + 1]))?
                - numerics::logdet_i_plus(&sandwich(g, &s[j]))?);
    }
    for j in position + 1..order.len() {
        cvx += w_pos[j] * rates[j];
    }
    let total_power: f64 = q_pos.iter().map(numerics::trace_re).sum();
    cvx -= lambda * (total_power - numerics::trace_re(&q_pos[position]) - p.value());
    Ok((ccv, cvx))
}

/// Gradient of the convex objective part with respect to the covariance
/// at `position`, evaluated at `q`.
pub fn convex_part_gradient(
    ch: &ChannelSet,
    q: &CovarianceSet,
    w: &WeightVector,
    order: &EncodingOrder,
    position: usize,
) -> Result<GradientMatrix> {
    check_problem(ch, w, order)?;
    if position >= order.len() {
        return Err(Error::InvalidInput(format!(
            "position {position} out of range for {} users",
            order.len()
        )));
    }
    let q_pos = covariances_to_positions(q, order);
    Ok(position_gradient(ch, order, w, &q_pos, position)?.0)
}

fn position_gradient(
    ch: &ChannelSet,
    order: &EncodingOrder,
    w: &WeightVector,
    q_pos: &[CMat],
    position: usize,
) -> Result<(GradientMatrix, Vec<CMat>)> {
    let w_pos = position_weights(w, order);
    let s = position_suffix_sums(q_pos, ch.n_t());
    let g = ch.g();
    let n_t = ch.n_t();
    let mut a = numerics::zeros(n_t, n_t);
    if w_pos[position] != 0.0 {
        a -= quad_inv(g, &sandwich(g, &s[position]))? * numerics::cr(w_pos[position]);
    }
    for j in 0..position {
        if w_pos[j] == 0.0 {
            continue;
        }
        let h_j = ch.h(order.user_at(j));
        let wj = numerics::cr(w_pos[j]);
        a += quad_inv(h_j, &sandwich(h_j, &s[j]))? * wj;
        a -= quad_inv(h_j, &sandwich(h_j, &s[j + 1]))? * wj;
        a -= quad_inv(g, &sandwich(g, &s[j]))? * wj;
    }
    Ok((GradientMatrix { a: HermitianMatrix::symmetrize(a) }, s))
}

/// Closed-form maximizer of
/// `w logdet(I + R^{-1} H Q H†) - tr(S Q)` over PSD `Q`,
/// a water-filling allocation over the singular directions of
/// `R^{-1/2} H S^{-1/2}`. Both `r` and `s` must be positive definite.
pub fn water_filling_update(
    r: &HermitianMatrix,
    s: &HermitianMatrix,
    h: &CMat,
    w: f64,
) -> Result<HermitianMatrix> {
    if r.dim() != h.nrows() || s.dim() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "channel {}x{} against r of dim {} and s of dim {}",
            h.nrows(),
            h.ncols(),
            r.dim(),
            s.dim()
        )));
    }
    if r.min_eigenvalue() <= 0.0 || s.min_eigenvalue() <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    if w < 0.0 {
        return Err(Error::InvalidInput("weight must be nonnegative".into()));
    }
    let r_inv_sqrt = numerics::inv_sqrt_pd(r.matrix());
    let s_inv_sqrt = numerics::inv_sqrt_pd(s.matrix());
    let x = &r_inv_sqrt * h * &s_inv_sqrt;
    let dec = numerics::svd(&x)?;
    let n_t = h.ncols();
    let mut q = numerics::zeros(n_t, n_t);
    for (i, &sigma) in dec.sigma.iter().enumerate() {
        if sigma <= 0.0 {
            continue;
        }
        let fill = w - 1.0 / (sigma * sigma);
        if fill <= 0.0 {
            continue;
        }
        let v_i = dec.v.column(i);
        q += (v_i * v_i.adjoint()) * numerics::cr(fill);
    }
    let q = &s_inv_sqrt * q * &s_inv_sqrt;
    Ok(HermitianMatrix::symmetrize(numerics::psd_project_raw(&q)))
}

/// Solves one block subproblem by projected gradient ascent: maximizes
/// the tangent-plane surrogate
/// `w_k logdet(I + M^{-1} H_k Q H_k†)
///  + sum_{j<position} w_j logdet(I + G (T_j + Q) G†)
///  - tr[(lambda I - A) Q]`
/// over PSD `Q`, where `M` and the `T_j` are built from the other blocks
/// of `q` and `A` is the convex-part gradient. The entry of `q` at
/// `position` only seeds the ascent.
pub fn solve_block_subproblem(
    ch: &ChannelSet,
    q: &CovarianceSet,
    w: &WeightVector,
    order: &EncodingOrder,
    lambda: f64,
    a: &GradientMatrix,
    position: usize,
    cfg: &SolverConfig,
) -> Result<HermitianMatrix> {
    check_problem(ch, w, order)?;
    cfg.validate()?;
    let q_pos = covariances_to_positions(q, order);
    let updated = subproblem_ascent(ch, order, w, &q_pos, position, lambda, a.matrix(), cfg)?;
    Ok(HermitianMatrix::symmetrize(updated))
}

fn subproblem_ascent(
    ch: &ChannelSet,
    order: &EncodingOrder,
    w: &WeightVector,
    q_pos: &[CMat],
    position: usize,
    lambda: f64,
    a: &CMat,
    cfg: &SolverConfig,
) -> Result<CMat> {
    let w_pos = position_weights(w, order);
    let kk = q_pos.len();
    let n_t = ch.n_t();
    let h_k = ch.h(order.user_at(position));
    let g = ch.g();
    let w_k = w_pos[position];

    // Interference seen by this block's receiver, from later positions.
    let mut after = numerics::zeros(n_t, n_t);
    for qj in q_pos.iter().take(kk).skip(position + 1) {
        after += qj;
    }
    let m = numerics::identity(h_k.nrows()) + sandwich(h_k, &after);
    let logdet_m = numerics::logdet_pd(&m)?;
    // Fixed eavesdropper-side interference for each earlier position's
    // jamming term.
    let mut jam: Vec<(f64, CMat)> = Vec::new();
    for j in 0..position {
        if w_pos[j] == 0.0 {
            continue;
        }
        let mut t = numerics::zeros(n_t, n_t);
        for (i, qi) in q_pos.iter().enumerate().take(kk).skip(j + 1) {
            if i != position {
                t += qi;
            }
        }
        jam.push((w_pos[j], t));
    }
    let price = numerics::identity(n_t) * numerics::cr(lambda) - a;

    let objective = |qq: &CMat| -> Result<f64> {
        let mut val = -re_inner(&price, qq);
        if w_k != 0.0 {
            val += w_k * (numerics::logdet_pd(&(&m + sandwich(h_k, qq)))? - logdet_m);
        }
        for (wj, t) in &jam {
            val += wj * numerics::logdet_i_plus(&sandwich(g, &(t + qq)))?;
        }
        Ok(val)
    };
    let gradient = |qq: &CMat| -> Result<CMat> {
        let mut grad = -&price;
        if w_k != 0.0 {
            let denom = &m + sandwich(h_k, qq);
            let y = numerics::chol_pd(&denom)?.solve(h_k);
            let term = h_k.adjoint() * y;
            grad += ((&term + term.adjoint()) * numerics::cr(0.5)) * numerics::cr(w_k);
        }
        for (wj, t) in &jam {
            grad += quad_inv(g, &sandwich(g, &(t + qq)))? * numerics::cr(*wj);
        }
        Ok(grad)
    };

    let mut qcur = numerics::psd_project_raw(&q_pos[position]);
    let mut resid = f64::INFINITY;
    // The line search starts from a spectral estimate of the inverse
    // curvature along the last move; a fixed unit step would crawl on
    // nearly flat objectives.
    let mut step_seed = 1.0f64;
    let mut prev: Option<(CMat, CMat)> = None;
    for it in 0..cfg.max_subproblem_iters {
        let grad = gradient(&qcur)?;
        let unit = numerics::psd_project_raw(&(&qcur + &grad));
        resid = numerics::frob(&(&unit - &qcur));
        if resid <= SUBPROBLEM_TOL {
            return Ok(qcur);
        }
        if let Some((pq, pg)) = &prev {
            let dq = &qcur - pq;
            let dg = &grad - pg;
            let curvature = -re_inner(&dq, &dg);
            let move_sq = re_inner(&dq, &dq);
            let grad_sq = re_inner(&dg, &dg);
            if curvature > 0.0 && move_sq > 0.0 && grad_sq > 0.0 {
                // Long and short spectral steps; prefer the short one when
                // they separate, which damps oscillation on ill-conditioned
                // blocks.
                let long = move_sq / curvature;
                let short = curvature / grad_sq;
                let pick = if short < 0.5 * long { short } else { long };
                step_seed = pick.clamp(1e-12, 1e12);
            }
        }
        let g0 = objective(&qcur)?;
        let mut step = step_seed;
        let mut accepted = false;
        while step >= 1e-18 {
            let cand = numerics::psd_project_raw(&(&qcur + &grad * numerics::cr(step)));
            let dq = &cand - &qcur;
            if numerics::frob(&dq) <= 1e-18 {
                break;
            }
            let lin = re_inner(&grad, &dq);
            if objective(&cand)? >= g0 + ARMIJO_SIGMA * lin {
                prev = Some((std::mem::replace(&mut qcur, cand), grad));
                accepted = true;
                break;
            }
            step *= ARMIJO_BACKTRACK;
        }
        if !accepted {
            if resid <= NEAR_STATIONARY_TOL {
                return Ok(qcur);
            }
            return Err(Error::SubproblemDivergence { iters: it, residual: resid });
        }
    }
    if resid <= NEAR_STATIONARY_TOL {
        return Ok(qcur);
    }
    Err(Error::SubproblemDivergence { iters: cfg.max_subproblem_iters, residual: resid })
}

/// Stacked projected-gradient norm of the price-augmented objective over
/// all blocks; near zero at a block-stationary point.
fn stationarity_residual(
    ch: &ChannelSet,
    order: &EncodingOrder,
    w: &WeightVector,
    q_pos: &[CMat],
    lambda: f64,
) -> Result<f64> {
    let w_pos = position_weights(w, order);
    let s = position_suffix_sums(q_pos, ch.n_t());
    let g = ch.g();
    let n_t = ch.n_t();
    let mut acc = 0.0;
    for k in 0..q_pos.len() {
        let mut grad = numerics::identity(n_t) * numerics::cr(-lambda);
        if w_pos[k] != 0.0 {
            let h_k = ch.h(order.user_at(k));
            let wk = numerics::cr(w_pos[k]);
            grad += quad_inv(h_k, &sandwich(h_k, &s[k]))? * wk;
            grad -= quad_inv(g, &sandwich(g, &s[k]))? * wk;
        }
        for j in 0..k {
            if w_pos[j] == 0.0 {
                continue;
            }
            let h_j = ch.h(order.user_at(j));
            let wj = numerics::cr(w_pos[j]);
            grad += quad_inv(h_j, &sandwich(h_j, &s[j]))? * wj;
            grad -= quad_inv(h_j, &sandwich(h_j, &s[j + 1]))? * wj;
            grad -= quad_inv(g, &sandwich(g, &s[j]))? * wj;
            grad += quad_inv(g, &sandwich(g, &s[j + 1]))? * wj;
        }
        let step = numerics::psd_project_raw(&(&q_pos[k] + &grad));
        let r = numerics::frob(&(&step - &q_pos[k]));
        acc += r * r;
    }
    Ok(acc.sqrt())
}

struct InnerOutcome {
    q_pos: Vec<CMat>,
    rates_pos: Vec<f64>,
    wsr: f64,
    power: f64,
    sweeps: usize,
    max_wsr_decrease: f64,
    max_lagrangian_decrease: f64,
    kkt_residual: f64,
    converged: bool,
    cap_hit: bool,
}

fn initial_positions(ch: &ChannelSet, p: PowerConstraint, cfg: &SolverConfig) -> Vec<CMat> {
    let kk = ch.num_users();
    let n_t = ch.n_t();
    match cfg.init_mode {
        InitMode::Uniform => {
            let scale = p.value() / (kk as f64 * n_t as f64);
            vec![numerics::identity(n_t) * numerics::cr(scale); kk]
        }
        InitMode::Zero => vec![numerics::zeros(n_t, n_t); kk],
    }
}

fn inner_solve(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    lambda: f64,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<InnerOutcome> {
    let kk = ch.num_users();
    let mut q_pos = initial_positions(ch, p, cfg);
    let w_pos = position_weights(w, order);
    let mut wsr_prev = 0.0;
    let mut lagr_prev = f64::NEG_INFINITY;
    let mut max_wsr_drop = 0.0f64;
    let mut max_lagr_drop = 0.0f64;
    let mut sweeps = 0;
    let mut delta_converged = false;
    let mut kkt = f64::INFINITY;

    while sweeps < cfg.max_inner {
        sweeps += 1;
        for pos in 0..kk {
            let (a, s) = position_gradient(ch, order, w, &q_pos, pos)?;
            if pos == 0 {
                let h0 = ch.h(order.user_at(0));
                let r = HermitianMatrix::symmetrize(
                    numerics::identity(h0.nrows()) + sandwich(h0, &s[1]),
                );
                let price = HermitianMatrix::symmetrize(
                    numerics::identity(ch.n_t()) * numerics::cr(lambda) - a.matrix(),
                );
                q_pos[0] = water_filling_update(&r, &price, h0, w_pos[0])?.into_inner();
            } else {
                q_pos[pos] =
                    subproblem_ascent(ch, order, w, &q_pos, pos, lambda, a.matrix(), cfg)?;
            }
        }
        let rates_pos = position_rates(ch, order, &q_pos)?;
        let wsr: f64 = rates_pos.iter().zip(&w_pos).map(|(r, w)| r * w).sum();
        let power: f64 = q_pos.iter().map(numerics::trace_re).sum();
        let lagr = wsr - lambda * (power - p.value());
        if wsr < wsr_prev && sweeps > 1 {
            max_wsr_drop = max_wsr_drop.max(wsr_prev - wsr);
        }
        if lagr < lagr_prev {
            max_lagr_drop = max_lagr_drop.max(lagr_prev - lagr);
        }
        let delta = (wsr - wsr_prev).abs();
        wsr_prev = wsr;
        lagr_prev = lagr;
        if delta < cfg.eps2 {
            kkt = stationarity_residual(ch, order, w, &q_pos, lambda)?;
            if kkt <= KKT_TOL {
                delta_converged = true;
                break;
            }
        }
    }
    if kkt.is_infinite() {
        kkt = stationarity_residual(ch, order, w, &q_pos, lambda)?;
    }
    let rates_pos = position_rates(ch, order, &q_pos)?;
    let wsr: f64 = rates_pos.iter().zip(&w_pos).map(|(r, w)| r * w).sum();
    let power: f64 = q_pos.iter().map(numerics::trace_re).sum();
    let rates_ok = rates_pos
        .iter()
        .zip(&w_pos)
        .all(|(&r, &w)| w == 0.0 || r >= -1e-9);
    let cap_hit = !delta_converged;
    Ok(InnerOutcome {
        q_pos,
        rates_pos,
        wsr,
        power,
        sweeps,
        max_wsr_decrease: max_wsr_drop,
        max_lagrangian_decrease: max_lagr_drop,
        kkt_residual: kkt,
        converged: delta_converged && kkt <= KKT_TOL && rates_ok,
        cap_hit,
    })
}

/// Runs cyclic block sweeps at a fixed power price until the weighted
/// rate stalls and the stacked stationarity residual is met, and returns
/// the covariances (indexed by user), the per-user rates and the
/// weighted rate.
pub fn cyclic_block_solve(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    lambda: f64,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<(CovarianceSet, RateTuple, f64)> {
    check_problem(ch, w, order)?;
    cfg.validate()?;
    if lambda <= 0.0 {
        return Err(Error::InvalidInput("price must be positive".into()));
    }
    let out = inner_solve(ch, w, order, lambda, p, cfg)?;
    let q = positions_to_covariances(&out.q_pos, order)?;
    let mut rates_user = vec![0.0; out.rates_pos.len()];
    for (pos, r) in out.rates_pos.iter().enumerate() {
        rates_user[order.user_at(pos)] = *r;
    }
    Ok((q, RateTuple::new(rates_user), out.wsr))
}

struct Candidate {
    lambda: f64,
    outcome: InnerOutcome,
}

/// Maximizes the weighted sum of secrecy rates under the total power
/// budget for a fixed encoding order.
///
/// Outer bisection on the power price: power used by the inner fixed
/// point shrinks as the price grows, so the bracket is narrowed until
/// either the budget binds within tolerance or the bracket width falls
/// below `eps1`. When even the smallest price leaves the budget slack
/// (after up to four halvings) the slack solution itself is optimal and
/// is returned with `power_slack` set.
pub fn solve_wsr(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    check_problem(ch, w, order)?;
    cfg.validate()?;
    let pval = p.value();
    let band_lo = pval * (1.0 - POWER_BAND_BELOW);
    let band_hi = pval * (1.0 + POWER_BAND_ABOVE);

    let mut outer = 0;
    let mut total_sweeps = 0;
    let mut lam_lo = cfg.lambda_min;
    let mut lam_hi = cfg.lambda_max;

    let probe = |lambda: f64, outer: &mut usize, total: &mut usize| -> Result<InnerOutcome> {
        *outer += 1;
        let out = inner_solve(ch, w, order, lambda, p, cfg)?;
        *total += out.sweeps;
        Ok(out)
    };

    // Low-price probe: if the budget is slack even at a vanishing price,
    // the constraint is inactive and the slack solution is the optimum.
    let mut lo_out = probe(lam_lo, &mut outer, &mut total_sweeps)?;
    let mut halvings = 0;
    while lo_out.power < band_lo && halvings < BRACKET_EXPANSIONS {
        lam_lo *= 0.5;
        lo_out = probe(lam_lo, &mut outer, &mut total_sweeps)?;
        halvings += 1;
    }
    if lo_out.power <= band_hi {
        let slack = lo_out.power < band_lo;
        return finalize(
            order,
            Candidate { lambda: lam_lo, outcome: lo_out },
            outer,
            total_sweeps,
            slack,
            (lam_lo, lam_hi),
        );
    }

    // High-price probe: expand upward until power drops under the budget.
    let mut hi_out = probe(lam_hi, &mut outer, &mut total_sweeps)?;
    let mut doublings = 0;
    while hi_out.power > band_hi && doublings < BRACKET_EXPANSIONS {
        lam_hi *= 2.0;
        hi_out = probe(lam_hi, &mut outer, &mut total_sweeps)?;
        doublings += 1;
    }
    if hi_out.power > band_hi {
        return Err(Error::BoundsExhausted { lambda_max: lam_hi, power: hi_out.power });
    }
    let mut best = Candidate { lambda: lam_hi, outcome: hi_out };

    while lam_hi - lam_lo >= cfg.eps1 && outer < cfg.max_outer {
        let mid = 0.5 * (lam_lo + lam_hi);
        let out = probe(mid, &mut outer, &mut total_sweeps)?;
        let in_band = out.power >= band_lo && out.power <= band_hi;
        let go_down = out.power < pval;
        if out.power <= band_hi && out.power > best.outcome.power {
            best = Candidate { lambda: mid, outcome: out };
        }
        if go_down {
            lam_hi = mid;
        } else {
            lam_lo = mid;
        }
        // The budget binds within tolerance: no need to shrink the
        // bracket further.
        if in_band {
            break;
        }
    }

    finalize(order, best, outer, total_sweeps, false, (lam_lo, lam_hi))
}

fn finalize(
    order: &EncodingOrder,
    best: Candidate,
    outer: usize,
    total_sweeps: usize,
    power_slack: bool,
    bracket: (f64, f64),
) -> Result<SolverResult> {
    let out = best.outcome;
    let q = positions_to_covariances(&out.q_pos, order)?;
    let mut rates_user = vec![0.0; out.rates_pos.len()];
    for (pos, r) in out.rates_pos.iter().enumerate() {
        rates_user[order.user_at(pos)] = *r;
    }
    Ok(SolverResult {
        covariances: q,
        rates: RateTuple::new(rates_user),
        wsr: out.wsr,
        lambda_star: best.lambda,
        power_used: out.power,
        converged: out.converged,
        diagnostics: Diagnostics {
            outer_iterations: outer,
            total_sweeps,
            final_sweeps: out.sweeps,
            max_wsr_decrease: out.max_wsr_decrease,
            max_lagrangian_decrease: out.max_lagrangian_decrease,
            kkt_residual: out.kkt_residual,
            inner_cap_hit: out.cap_hit,
            power_slack,
            lambda_bracket: bracket,
        },
    })
}

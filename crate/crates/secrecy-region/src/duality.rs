//! Downlink/uplink covariance transformations that preserve per-user rates
//! and total transmit power.
//!
//! For an encoding order, the transform pairs each user's transmit
//! covariance `Q_k` (`n_t x n_t`) with an uplink covariance `Sigma_k`
//! (`n_k x n_k`) through the flipped effective channel
//! `D_k^{-1/2} H_k† C_k^{-1/2} = E_k Λ_k F_k†`, where `C_k` is the user's
//! downlink interference-plus-noise and `D_k` accumulates the uplink
//! covariances of earlier-encoded users. Going downlink→uplink walks
//! positions first-to-last; the reverse walks last-to-first.

use crate::channel::{suffix_sums, ChannelSet, CovarianceSet, EncodingOrder, Side, WeightVector};
use crate::error::{Error, Result};
use crate::numerics::{self, CMat, HermitianMatrix};

/// Singular values below this are treated as zero when forming the
/// effective-channel factors.
const SUPPORT_TOL: f64 = 1e-12;

/// Per-position factors of the covariance transform, reusable for
/// effective eavesdropper channels and objective rewrites.
#[derive(Debug, Clone)]
pub struct DualityContext {
    order: EncodingOrder,
    /// Downlink interference-plus-noise at each position, `n_k x n_k`.
    c: Vec<CMat>,
    /// Uplink accumulation from earlier positions, `n_t x n_t`.
    d: Vec<CMat>,
    /// Left singular vectors of the flipped channel, `n_t x r`.
    e: Vec<CMat>,
    /// Right singular vectors of the flipped channel, `n_k x r`.
    f: Vec<CMat>,
}

impl DualityContext {
    pub fn order(&self) -> &EncodingOrder {
        &self.order
    }

    pub fn c(&self, pos: usize) -> &CMat {
        &self.c[pos]
    }

    pub fn d(&self, pos: usize) -> &CMat {
        &self.d[pos]
    }
}

struct PositionFactors {
    c_sqrt: CMat,
    c_inv_sqrt: CMat,
    d_sqrt: CMat,
    d_inv_sqrt: CMat,
    e: CMat,
    f: CMat,
}

fn position_factors(h_u: &CMat, c: &CMat, d: &CMat) -> Result<PositionFactors> {
    let c_inv_sqrt = numerics::inv_sqrt_pd(c);
    let c_sqrt = numerics::sqrt_psd(c);
    let d_inv_sqrt = numerics::inv_sqrt_pd(d);
    let d_sqrt = numerics::sqrt_psd(d);
    let x = &d_inv_sqrt * h_u.adjoint() * &c_inv_sqrt;
    let dec = numerics::svd(&x)?;
    let r = dec.sigma.iter().take_while(|&&s| s > SUPPORT_TOL).count();
    let e = dec.u.columns(0, r).into_owned();
    let f = dec.v.columns(0, r).into_owned();
    Ok(PositionFactors { c_sqrt, c_inv_sqrt, d_sqrt, d_inv_sqrt, e, f })
}

/// Transforms downlink covariances into uplink covariances with the same
/// per-user rates.
///
/// Total power is preserved when every user channel has full column rank
/// (square nonsingular channels in particular). Otherwise covariance
/// components a user's channel cannot see are shed and uplink power may
/// be strictly smaller.
pub fn bc_to_mac(
    ch: &ChannelSet,
    q: &CovarianceSet,
    order: &EncodingOrder,
) -> Result<(CovarianceSet, DualityContext)> {
    if q.side() != Side::Broadcast {
        return Err(Error::InvalidInput("expected broadcast-side covariances".into()));
    }
    validate(ch, q.len(), order)?;
    let kk = ch.num_users();
    let suffix = suffix_sums(ch, q, order);

    let mut sig_by_user: Vec<Option<HermitianMatrix>> = vec![None; kk];
    let mut ctx = DualityContext {
        order: order.clone(),
        c: Vec::with_capacity(kk),
        d: Vec::with_capacity(kk),
        e: Vec::with_capacity(kk),
        f: Vec::with_capacity(kk),
    };
    let mut d_cur = numerics::identity(ch.n_t());
    for pos in 0..kk {
        let u = order.user_at(pos);
        let h_u = ch.h(u);
        let c = numerics::identity(ch.n_k(u)) + h_u * &suffix[pos + 1] * h_u.adjoint();
        let fac = position_factors(h_u, &c, &d_cur)?;
        let left = &fac.c_inv_sqrt * &fac.f * fac.e.adjoint() * &fac.d_sqrt;
        let sig = HermitianMatrix::symmetrize(&left * q.get(u).matrix() * left.adjoint());
        d_cur += h_u.adjoint() * sig.matrix() * h_u;
        ctx.c.push(c);
        ctx.d.push(fac.d_sqrt.clone() * &fac.d_sqrt);
        ctx.e.push(fac.e);
        ctx.f.push(fac.f);
        sig_by_user[u] = Some(sig);
    }
    let mats = sig_by_user.into_iter().map(|s| s.expect("every user visited")).collect();
    Ok((CovarianceSet::new(Side::MultipleAccess, mats)?, ctx))
}

/// Transforms uplink covariances into downlink covariances with the same
/// per-user rates. Inverse of [`bc_to_mac`] on full-rank channels, with
/// the same power caveat for rank-deficient ones.
pub fn mac_to_bc(
    ch: &ChannelSet,
    sigma: &CovarianceSet,
    order: &EncodingOrder,
) -> Result<(CovarianceSet, DualityContext)> {
    if sigma.side() != Side::MultipleAccess {
        return Err(Error::InvalidInput("expected multiple-access-side covariances".into()));
    }
    validate(ch, sigma.len(), order)?;
    let kk = ch.num_users();
    let n_t = ch.n_t();
    for pos in 0..kk {
        let u = order.user_at(pos);
        if sigma.get(u).dim() != ch.n_k(u) {
            return Err(Error::DimensionMismatch(format!(
                "uplink covariance {} is {}x{}, user has {} antennas",
                u + 1,
                sigma.get(u).dim(),
                sigma.get(u).dim(),
                ch.n_k(u)
            )));
        }
    }

    // Uplink accumulations are available upfront.
    let mut d_list = Vec::with_capacity(kk);
    let mut d_cur = numerics::identity(n_t);
    for pos in 0..kk {
        let u = order.user_at(pos);
        let h_u = ch.h(u);
        d_list.push(d_cur.clone());
        d_cur += h_u.adjoint() * sigma.get(u).matrix() * h_u;
    }

    let mut q_by_user: Vec<Option<HermitianMatrix>> = vec![None; kk];
    let mut c_rev = Vec::with_capacity(kk);
    let mut e_rev = Vec::with_capacity(kk);
    let mut f_rev = Vec::with_capacity(kk);
    let mut q_suffix = numerics::zeros(n_t, n_t);
    for pos in (0..kk).rev() {
        let u = order.user_at(pos);
        let h_u = ch.h(u);
        let c = numerics::identity(ch.n_k(u)) + h_u * &q_suffix * h_u.adjoint();
        let fac = position_factors(h_u, &c, &d_list[pos])?;
        let left = &fac.d_inv_sqrt * &fac.e * fac.f.adjoint() * &fac.c_sqrt;
        let q_u = HermitianMatrix::symmetrize(&left * sigma.get(u).matrix() * left.adjoint());
        q_suffix += q_u.matrix();
        c_rev.push(c);
        e_rev.push(fac.e);
        f_rev.push(fac.f);
        q_by_user[u] = Some(q_u);
    }
    c_rev.reverse();
    e_rev.reverse();
    f_rev.reverse();
    let ctx = DualityContext { order: order.clone(), c: c_rev, d: d_list, e: e_rev, f: f_rev };
    let mats = q_by_user.into_iter().map(|s| s.expect("every user visited")).collect();
    Ok((CovarianceSet::new(Side::Broadcast, mats)?, ctx))
}

/// Effective eavesdropper channels seen from the uplink side, one per
/// encoding position: `C^{1/2} F E† D^{-1/2} G†`, shaped `n_k x n_e`.
///
/// For covariance pairs produced by the transforms above these satisfy
/// `Geff_k† Sigma_k Geff_k = G Q_k G†` exactly, which is what makes the
/// uplink rewrite of the weighted secrecy objective an identity.
pub fn effective_eve_channels(ch: &ChannelSet, ctx: &DualityContext) -> Result<Vec<CMat>> {
    let kk = ctx.order.len();
    if kk != ch.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "context covers {} users, channel has {}",
            kk,
            ch.num_users()
        )));
    }
    let g_adj = ch.g().adjoint();
    let mut out = Vec::with_capacity(kk);
    for pos in 0..kk {
        let c_sqrt = numerics::sqrt_psd(&ctx.c[pos]);
        let d_inv_sqrt = numerics::inv_sqrt_pd(&ctx.d[pos]);
        out.push(c_sqrt * &ctx.f[pos] * ctx.e[pos].adjoint() * d_inv_sqrt * &g_adj);
    }
    Ok(out)
}

/// Weighted secrecy objective evaluated on the uplink side.
///
/// For covariances matched through [`bc_to_mac`]/[`mac_to_bc`] this equals
/// the downlink weighted sum of secrecy rates exactly, for any weights.
/// The legitimate part telescopes over uplink prefix sums while the
/// eavesdropper part telescopes over suffix sums; pairing them the other
/// way round changes the per-user rate split and matches the downlink
/// value only when all weights coincide.
///
/// With encode positions `t = 1..K` and `w_t` shorthand for the weight of
/// the user encoded at position `t` (`w_0 = w_{K+1} = 0`), the value is
/// `sum_t (w_{t-1} - w_t) logdet(I + sum_{j<t} H_j† S_j H_j)
///  - sum_t (w_t - w_{t-1}) logdet(I + sum_{j>=t} Geff_j† S_j Geff_j)`.
pub fn uplink_weighted_objective(
    ch: &ChannelSet,
    sigma: &CovarianceSet,
    w: &WeightVector,
    ctx: &DualityContext,
    eff_g: &[CMat],
) -> Result<f64> {
    let order = &ctx.order;
    let kk = ch.num_users();
    if w.len() != kk || sigma.len() != kk || eff_g.len() != kk {
        return Err(Error::DimensionMismatch("weights/covariances/effective channels must cover all users".into()));
    }
    let n_t = ch.n_t();
    let n_e = ch.n_e();
    let mut legit_prefix = vec![numerics::zeros(n_t, n_t)];
    for pos in 0..kk {
        let u = order.user_at(pos);
        let h_u = ch.h(u);
        legit_prefix.push(legit_prefix[pos].clone() + h_u.adjoint() * sigma.get(u).matrix() * h_u);
    }
    let mut eve_suffix = vec![numerics::zeros(n_e, n_e); kk + 1];
    for pos in (0..kk).rev() {
        let u = order.user_at(pos);
        let ge = &eff_g[pos];
        eve_suffix[pos] = &eve_suffix[pos + 1] + ge.adjoint() * sigma.get(u).matrix() * ge;
    }
    let mut value = 0.0;
    for t in 1..=kk {
        let w_before = w.get(order.user_at(t - 1));
        let w_after = if t < kk { w.get(order.user_at(t)) } else { 0.0 };
        let coeff = w_before - w_after;
        if coeff != 0.0 {
            value += coeff * numerics::logdet_i_plus(&legit_prefix[t])?;
        }
    }
    for pos in 0..kk {
        let w_cur = w.get(order.user_at(pos));
        let w_prev = if pos > 0 { w.get(order.user_at(pos - 1)) } else { 0.0 };
        let coeff = w_cur - w_prev;
        if coeff != 0.0 {
            value -= coeff * numerics::logdet_i_plus(&eve_suffix[pos])?;
        }
    }
    Ok(value)
}

fn validate(ch: &ChannelSet, covs: usize, order: &EncodingOrder) -> Result<()> {
    if covs != ch.num_users() {
        return Err(Error::DimensionMismatch(format!("{} covariances for {} users", covs, ch.num_users())));
    }
    if order.len() != ch.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "order covers {} users, channel has {}",
            order.len(),
            ch.num_users()
        )));
    }
    Ok(())
}

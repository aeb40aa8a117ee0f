//! Reference schemes that bracket the secrecy solver from both sides.
//!
//! Zero-forcing beamforming confines every transmit covariance to the null
//! space of the eavesdropper channel, trading rate for exactly zero leakage.
//! The no-eavesdropper bound solves the same weighted problem with the
//! eavesdropper removed. Together they sandwich the secrecy optimum.

use crate::channel::{
    secrecy_rates, ChannelSet, CovarianceSet, EncodingOrder, PowerConstraint, Side, WeightVector,
};
use crate::error::{Error, Result};
use crate::numerics::{self, CMat, HermitianMatrix};
use crate::solver::{solve_wsr, SolverConfig, SolverResult};

/// Relative singular-value threshold separating the eavesdropper's row
/// space from its null space.
const NULL_SPACE_TOL: f64 = 1e-10;

/// The legitimate channels restricted to transmit directions the
/// eavesdropper cannot observe.
#[derive(Debug, Clone)]
pub struct ProjectedChannelSet {
    basis: CMat,
    channels: ChannelSet,
}

impl ProjectedChannelSet {
    /// Orthonormal basis of the protected directions, one column each.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Projected channels: each user matrix right-multiplied by the basis,
    /// with a zero eavesdropper.
    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    /// Number of protected transmit directions.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Expands covariances over the protected directions back to the full
    /// transmit space. Traces are preserved because the basis is orthonormal.
    pub fn lift(&self, q: &CovarianceSet) -> Result<CovarianceSet> {
        let mats = q
            .matrices()
            .iter()
            .map(|m| HermitianMatrix::symmetrize(&self.basis * m.matrix() * self.basis.adjoint()))
            .collect();
        CovarianceSet::new(Side::Broadcast, mats)
    }
}

/// Restricts the legitimate channels to an orthonormal basis of the
/// eavesdropper's null space.
///
/// The basis spans the orthogonal complement of the eavesdropper row space,
/// identified through the singular value decomposition with a relative
/// threshold of 1e-10. Fails with `EmptyNullSpace` when the eavesdropper
/// observes every transmit direction.
pub fn zf_project(ch: &ChannelSet) -> Result<ProjectedChannelSet> {
    let n_t = ch.n_t();
    let dec = numerics::svd(ch.g())?;
    let sigma_max = dec.sigma.iter().cloned().fold(0.0f64, f64::max);
    // Projector onto the complement of the observed row space.
    let mut proj = numerics::identity(n_t);
    for (i, &s) in dec.sigma.iter().enumerate() {
        if s > NULL_SPACE_TOL * sigma_max {
            let v = dec.v.column(i);
            proj -= &v * v.adjoint();
        }
    }
    // The projector's spectrum splits at 0 and 1; its unit eigenvectors
    // form an orthonormal basis of the null space.
    let (vals, vecs) = numerics::herm_eigen(&proj);
    let kept: Vec<usize> = (0..n_t).filter(|&i| vals[i] > 0.5).collect();
    if kept.is_empty() {
        return Err(Error::EmptyNullSpace);
    }
    let mut basis = numerics::zeros(n_t, kept.len());
    for (j, &i) in kept.iter().enumerate() {
        basis.set_column(j, &vecs.column(i));
    }
    let h_proj = ch.users().iter().map(|h| h * &basis).collect();
    let channels = ChannelSet::new(h_proj, numerics::zeros(ch.n_e(), kept.len()))?;
    Ok(ProjectedChannelSet { basis, channels })
}

/// Weighted sum rate achievable with zero-forcing beamforming.
///
/// Solves the weighted problem over the protected directions, where the
/// eavesdropper term vanishes, then expands the covariances back to the
/// full transmit space. The returned rates and power are re-evaluated on
/// the original channels, so the eavesdropper sees exactly nothing.
pub fn zf_wsr(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    let projected = zf_project(ch)?;
    let inner = solve_wsr(projected.channels(), w, order, p, cfg)?;
    let covariances = projected.lift(&inner.covariances)?;
    let rates = secrecy_rates(ch, &covariances, order)?;
    let wsr = rates.weighted(w);
    let power_used = covariances.total_power();
    Ok(SolverResult {
        covariances,
        rates,
        wsr,
        power_used,
        ..inner
    })
}

/// Weighted sum rate of the same broadcast channel without secrecy: the
/// eavesdropper is replaced by zero, which can only enlarge every rate.
pub fn bc_upper_bound(
    ch: &ChannelSet,
    w: &WeightVector,
    order: &EncodingOrder,
    p: PowerConstraint,
    cfg: &SolverConfig,
) -> Result<SolverResult> {
    solve_wsr(&ch.without_eavesdropper(), w, order, p, cfg)
}

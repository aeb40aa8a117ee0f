//! Channel data model and achievable-rate evaluation.
//!
//! A [`ChannelSet`] holds the K legitimate channel matrices `H_k`
//! (`n_k x n_t`) and the eavesdropper matrix `G` (`n_e x n_t`). Rates are
//! reported in nats. Encoding orders are permutations in *encode-first*
//! orientation: `order[0]` is the user whose message is encoded first and
//! therefore sees interference from everyone encoded after it, while the
//! last entry is encoded interference-free.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{self, CMat, HermitianMatrix};

/// Which side of the broadcast/multiple-access correspondence a covariance
/// set lives on: transmit covariances (`n_t x n_t` each) or per-user
/// uplink covariances (`n_k x n_k` each).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Broadcast,
    MultipleAccess,
}

/// The K legitimate channels plus the eavesdropper channel.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    h: Vec<CMat>,
    g: CMat,
}

impl ChannelSet {
    pub fn new(h: Vec<CMat>, g: CMat) -> Result<Self> {
        if h.is_empty() {
            return Err(Error::InvalidInput("need at least one user channel".into()));
        }
        let n_t = g.ncols();
        if n_t == 0 || g.nrows() == 0 {
            return Err(Error::DimensionMismatch("eavesdropper matrix must be nonempty".into()));
        }
        for (k, m) in h.iter().enumerate() {
            if m.ncols() != n_t {
                return Err(Error::DimensionMismatch(format!(
                    "user {} has {} transmit columns, eavesdropper has {}",
                    k + 1,
                    m.ncols(),
                    n_t
                )));
            }
            if m.nrows() == 0 {
                return Err(Error::DimensionMismatch(format!("user {} has no receive antennas", k + 1)));
            }
            if !numerics::all_finite(m) {
                return Err(Error::InvalidInput(format!("user {} channel has non-finite entries", k + 1)));
            }
        }
        if !numerics::all_finite(&g) {
            return Err(Error::InvalidInput("eavesdropper channel has non-finite entries".into()));
        }
        Ok(Self { h, g })
    }

    pub fn num_users(&self) -> usize {
        self.h.len()
    }

    /// Transmit antenna count.
    pub fn n_t(&self) -> usize {
        self.g.ncols()
    }

    /// Eavesdropper antenna count.
    pub fn n_e(&self) -> usize {
        self.g.nrows()
    }

    /// Receive antenna count of user `k` (0-based).
    pub fn n_k(&self, k: usize) -> usize {
        self.h[k].nrows()
    }

    pub fn h(&self, k: usize) -> &CMat {
        &self.h[k]
    }

    pub fn users(&self) -> &[CMat] {
        &self.h
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    /// Same legitimate channels with a replaced eavesdropper matrix.
    pub fn with_eavesdropper(&self, g: CMat) -> Result<Self> {
        Self::new(self.h.clone(), g)
    }

    /// Same legitimate channels with the eavesdropper scaled by `delta`.
    pub fn with_scaled_eavesdropper(&self, delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidInput(format!("eavesdropper scale must be finite and >= 0, got {delta}")));
        }
        self.with_eavesdropper(&self.g * Complex64::new(delta, 0.0))
    }

    /// Same legitimate channels with the eavesdropper removed (zero matrix).
    pub fn without_eavesdropper(&self) -> Self {
        Self {
            h: self.h.clone(),
            g: numerics::zeros(self.g.nrows(), self.g.ncols()),
        }
    }
}

/// Total transmit power budget, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConstraint(f64);

impl PowerConstraint {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::InvalidInput(format!("power budget must be finite and > 0, got {p}")));
        }
        Ok(Self(p))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Encoding order in encode-first orientation, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodingOrder {
    perm: Vec<usize>,
}

impl EncodingOrder {
    /// Builds an order from 0-based user indices.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let k = perm.len();
        if k == 0 {
            return Err(Error::InvalidInput("encoding order must be nonempty".into()));
        }
        let mut seen = vec![false; k];
        for &u in &perm {
            if u >= k || seen[u] {
                return Err(Error::InvalidInput(format!(
                    "encoding order {perm:?} is not a permutation of 0..{k}"
                )));
            }
            seen[u] = true;
        }
        Ok(Self { perm })
    }

    /// Builds an order from 1-based user labels, as used in file formats
    /// and on the command line.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        if labels.iter().any(|&u| u == 0) {
            return Err(Error::InvalidInput("order labels are 1-based".into()));
        }
        Self::new(labels.iter().map(|&u| u - 1).collect())
    }

    /// Natural order: user 0 encoded first.
    pub fn identity(k: usize) -> Self {
        Self { perm: (0..k).collect() }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// User encoded at position `pos` (0-based).
    pub fn user_at(&self, pos: usize) -> usize {
        self.perm[pos]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.perm.iter().map(|&u| u + 1).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut perm = self.perm.clone();
        perm.reverse();
        Self { perm }
    }
}

impl std::fmt::Display for EncodingOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let labels: Vec<String> = self.perm.iter().map(|&u| (u + 1).to_string()).collect();
        write!(f, "{}", labels.join("-"))
    }
}

/// Nonnegative user weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidInput("weight vector must be nonempty".into()));
        }
        if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput(format!("weights must be finite and >= 0, got {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights must sum to 1, got {sum}")));
        }
        Ok(Self(w))
    }

    /// Uniform weights `1/K`.
    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Per-user rates in nats, indexed by user (not by encoding position).
#[derive(Debug, Clone, PartialEq)]
pub struct RateTuple(Vec<f64>);

impl RateTuple {
    pub fn new(r: Vec<f64>) -> Self {
        Self(r)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.0[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Weighted sum of rates.
    pub fn weighted(&self, w: &WeightVector) -> f64 {
        self.0.iter().zip(w.as_slice()).map(|(r, w)| r * w).sum()
    }

    /// Conversion from nats to bits, for display.
    pub fn to_bits(&self) -> Vec<f64> {
        self.0.iter().map(|r| r / std::f64::consts::LN_2).collect()
    }
}

/// A set of covariance matrices tagged with the side they belong to.
///
/// Every matrix is validated positive semidefinite (smallest eigenvalue
/// at least `-1e-10`).
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    side: Side,
    mats: Vec<HermitianMatrix>,
}

impl CovarianceSet {
    pub const PSD_TOL: f64 = 1e-10;

    pub fn new(side: Side, mats: Vec<HermitianMatrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("covariance set must be nonempty".into()));
        }
        for (k, m) in mats.iter().enumerate() {
            let min = m.min_eigenvalue();
            if min < -Self::PSD_TOL {
                return Err(Error::InvalidInput(format!(
                    "covariance {} is not PSD: min eigenvalue {min:.3e}",
                    k + 1
                )));
            }
        }
        Ok(Self { side, mats })
    }

    /// All-zero broadcast covariances for a channel.
    pub fn zero_broadcast(ch: &ChannelSet) -> Self {
        let n = ch.n_t();
        let mats = (0..ch.num_users())
            .map(|_| HermitianMatrix::symmetrize(numerics::zeros(n, n)))
            .collect();
        Self { side: Side::Broadcast, mats }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, k: usize) -> &HermitianMatrix {
        &self.mats[k]
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.mats
    }

    /// Sum of real traces across users.
    pub fn total_power(&self) -> f64 {
        self.mats.iter().map(|m| m.trace()).sum()
    }

    /// Largest Hermitian violation over the raw stored matrices. Stored
    /// matrices are symmetrized, so this reports effectively zero; the
    /// metric exists so serialized output can carry an integrity figure.
    pub fn hermitian_violation(&self) -> f64 {
        self.mats
            .iter()
            .map(|m| numerics::hermitian_violation(m.matrix()))
            .fold(0.0, f64::max)
    }
}

fn check_bc_covariances(ch: &ChannelSet, q: &CovarianceSet) -> Result<()> {
    if q.side() != Side::Broadcast {
        return Err(Error::InvalidInput("expected broadcast-side covariances".into()));
    }
    if q.len() != ch.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariances for {} users",
            q.len(),
            ch.num_users()
        )));
    }
    for (k, m) in q.matrices().iter().enumerate() {
        if m.dim() != ch.n_t() {
            return Err(Error::DimensionMismatch(format!(
                "covariance {} is {}x{}, transmitter has {} antennas",
                k + 1,
                m.dim(),
                m.dim(),
                ch.n_t()
            )));
        }
    }
    Ok(())
}

fn check_order(ch: &ChannelSet, order: &EncodingOrder) -> Result<()> {
    if order.len() != ch.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "order covers {} users, channel has {}",
            order.len(),
            ch.num_users()
        )));
    }
    Ok(())
}

/// Suffix sums of transmit covariances in encoding-position order:
/// `out[k] = sum over positions j >= k of Q_{order[j]}`, with
/// `out[K]` the zero matrix.
pub(crate) fn suffix_sums(ch: &ChannelSet, q: &CovarianceSet, order: &EncodingOrder) -> Vec<CMat> {
    let kk = ch.num_users();
    let n = ch.n_t();
    let mut out = vec![numerics::zeros(n, n); kk + 1];
    for pos in (0..kk).rev() {
        out[pos] = &out[pos + 1] + q.get(order.user_at(pos)).matrix();
    }
    out
}

/// Per-user secrecy rates under dirty-paper encoding order `order`.
///
/// The user at position `k` sees interference from positions after `k`;
/// each rate is the legitimate log-det ratio minus the eavesdropper's
/// log-det ratio. Rates can be negative; no clamping happens here.
pub fn secrecy_rates(ch: &ChannelSet, q: &CovarianceSet, order: &EncodingOrder) -> Result<RateTuple> {
    check_bc_covariances(ch, q)?;
    check_order(ch, order)?;
    let kk = ch.num_users();
    let suffix = suffix_sums(ch, q, order);
    let mut rates = vec![0.0; kk];
    for pos in 0..kk {
        let u = order.user_at(pos);
        let h = ch.h(u);
        let g = ch.g();
        let legit = numerics::logdet_i_plus(&(h * &suffix[pos] * h.adjoint()))?
            - numerics::logdet_i_plus(&(h * &suffix[pos + 1] * h.adjoint()))?;
        let leak = numerics::logdet_i_plus(&(g * &suffix[pos] * g.adjoint()))?
            - numerics::logdet_i_plus(&(g * &suffix[pos + 1] * g.adjoint()))?;
        rates[u] = legit - leak;
    }
    Ok(RateTuple::new(rates))
}

/// Per-user uplink rates for multiple-access covariances under successive
/// decoding matched to `order`: the user encoded at position `k` maps to
/// the uplink rate with the first `k-1` positions still treated as noise.
/// The rates telescope, so their sum is a single log-det.
pub fn mac_rates(ch: &ChannelSet, sigma: &CovarianceSet, order: &EncodingOrder) -> Result<RateTuple> {
    if sigma.side() != Side::MultipleAccess {
        return Err(Error::InvalidInput("expected multiple-access-side covariances".into()));
    }
    if sigma.len() != ch.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariances for {} users",
            sigma.len(),
            ch.num_users()
        )));
    }
    check_order(ch, order)?;
    let kk = ch.num_users();
    let n = ch.n_t();
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
    let mut rates = vec![0.0; kk];
    let mut prefix = numerics::zeros(n, n);
    let mut prev = 0.0;
    for pos in 0..kk {
        let u = order.user_at(pos);
        let h = ch.h(u);
        prefix += h.adjoint() * sigma.get(u).matrix() * h;
        let cur = numerics::logdet_i_plus(&prefix)?;
        rates[u] = cur - prev;
        prev = cur;
    }
    Ok(RateTuple::new(rates))
}

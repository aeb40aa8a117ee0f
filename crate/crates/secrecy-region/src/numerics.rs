//! Dense complex-matrix kernels used by the rate and solver layers.
//!
//! Everything here operates on small Hermitian or general complex matrices
//! (antenna counts, so typically 1..8 per side). Factorizations are backed
//! by nalgebra; this module pins the conventions the rest of the crate
//! relies on: sorted singular values, symmetrized Hermitian storage, and
//! log-determinants through a positive-definite factorization.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix with dynamic shape.
pub type CMat = DMatrix<Complex64>;

/// Absolute tolerance for accepting an input matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalue floor applied before inverse square roots.
pub const INV_SQRT_FLOOR: f64 = 1e-14;

#[cfg(test)]
#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub(crate) fn zeros(r: usize, cols: usize) -> CMat {
    CMat::zeros(r, cols)
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn trace_re(m: &CMat) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

pub(crate) fn all_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest deviation from Hermitian symmetry, `max |m_ij - conj(m_ji)|`.
pub fn hermitian_violation(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Square complex matrix kept exactly Hermitian by construction.
///
/// Inputs are accepted when their Hermitian violation is below
/// [`HERMITIAN_TOL`] (scaled by the entry magnitude) and are stored
/// symmetrized, so downstream factorizations never see asymmetry noise.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMat,
}

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !all_finite(&m) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let scale = 1.0f64.max(max_abs(&m));
        let viol = hermitian_violation(&m);
        if viol > HERMITIAN_TOL * scale {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian: violation {viol:.3e} exceeds {:.3e}",
                HERMITIAN_TOL * scale
            )));
        }
        Ok(Self::symmetrize(m))
    }

    /// Wraps a matrix that is Hermitian by construction; still symmetrizes
    /// so tiny floating-point asymmetry cannot accumulate.
    pub(crate) fn symmetrize(m: CMat) -> Self {
        let h = (&m + m.adjoint()) * cr(0.5);
        Self { m: h }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_inner(self) -> CMat {
        self.m
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.m)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let (vals, _) = herm_eigen(&self.m);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }
}

/// Log-determinant of a Hermitian positive definite matrix.
///
/// Uses a Cholesky factorization; fails with [`Error::NotPositiveDefinite`]
/// when any pivot is non-positive.
pub fn log_det_posdef(h: &HermitianMatrix) -> Result<f64> {
    logdet_pd(h.matrix())
}

/// Cholesky factorization that genuinely rejects non-PD inputs: the backing
/// routine takes complex square roots of negative pivots instead of failing,
/// so the pivots must be checked for being real and positive.
pub(crate) fn chol_pd(m: &CMat) -> Result<Cholesky<Complex64, nalgebra::Dyn>> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        if !(d.re > 0.0) || !d.re.is_finite() || d.im.abs() > d.re * 1e-6 {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(chol)
}

pub(crate) fn logdet_pd(m: &CMat) -> Result<f64> {
    let chol = chol_pd(m)?;
    let l = chol.l();
    let mut acc = 0.0;
    for i in 0..l.nrows() {
        acc += l[(i, i)].re.ln();
    }
    Ok(2.0 * acc)
}

/// `log det(I + m)` for Hermitian `m` with `I + m` positive definite.
pub(crate) fn logdet_i_plus(m: &CMat) -> Result<f64> {
    let n = m.nrows();
    logdet_pd(&(identity(n) + m))
}

/// Hermitian eigendecomposition; eigenvalues ascending, matching columns.
pub(crate) fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let se = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals: Vec<f64> = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = zeros(n, n);
    for (col, &i) in idx.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

fn rebuild_from_eigen(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let d = CMat::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|&l| cr(f(l)))));
    let m = vecs * d * vecs.adjoint();
    (&m + m.adjoint()) * cr(0.5)
}

/// Nearest positive semidefinite matrix in Frobenius norm: negative
/// eigenvalues are clamped to zero. Idempotent.
pub fn psd_project(h: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrize(psd_project_raw(h.matrix()))
}

pub(crate) fn psd_project_raw(m: &CMat) -> CMat {
    let sym = (m + m.adjoint()) * cr(0.5);
    let (vals, vecs) = herm_eigen(&sym);
    if vals.iter().all(|&l| l >= 0.0) {
        return sym;
    }
    rebuild_from_eigen(&vals, &vecs, |l| l.max(0.0))
}

/// `m^{-1/2}` for Hermitian positive semidefinite `m`; eigenvalues are
/// floored at [`INV_SQRT_FLOOR`] so nearly singular directions stay finite.
pub(crate) fn inv_sqrt_pd(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    rebuild_from_eigen(&vals, &vecs, |l| 1.0 / l.max(INV_SQRT_FLOOR).sqrt())
}

/// `m^{1/2}` for Hermitian positive semidefinite `m` (negatives clamped).
pub(crate) fn sqrt_psd(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    rebuild_from_eigen(&vals, &vecs, |l| l.max(0.0).sqrt())
}

/// Solves `m x = b` for Hermitian positive definite `m`.
pub(crate) fn solve_pd(m: &CMat, b: &CMat) -> Result<CMat> {
    Ok(chol_pd(m)?.solve(b))
}

/// Thin singular value decomposition `m = u * diag(sigma) * v†` with
/// singular values sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    pub v: CMat,
}

impl Svd {
    pub fn reconstruct(&self) -> CMat {
        let r = self.sigma.len();
        let d = CMat::from_diagonal(&DVector::from_iterator(r, self.sigma.iter().map(|&s| cr(s))));
        &self.u * d * self.v.adjoint()
    }
}

/// Computes the thin SVD of a general complex matrix.
pub fn svd(m: &CMat) -> Result<Svd> {
    let dec = SVD::try_new(m.clone(), true, true, f64::EPSILON * 8.0, 0)
        .ok_or_else(|| Error::ConvergenceFailure("svd iteration limit".into()))?;
    let u = dec.u.ok_or_else(|| Error::ConvergenceFailure("svd produced no u factor".into()))?;
    let v_t = dec
        .v_t
        .ok_or_else(|| Error::ConvergenceFailure("svd produced no v factor".into()))?;
    let v = v_t.adjoint();
    let r = dec.singular_values.len();
    let mut idx: Vec<usize> = (0..r).collect();
    idx.sort_by(|&a, &b| dec.singular_values[b].partial_cmp(&dec.singular_values[a]).unwrap());
    let sigma: Vec<f64> = idx.iter().map(|&i| dec.singular_values[i]).collect();
    let mut us = zeros(u.nrows(), r);
    let mut vs = zeros(v.nrows(), r);
    for (col, &i) in idx.iter().enumerate() {
        us.set_column(col, &u.column(i));
        vs.set_column(col, &v.column(i));
    }
    Ok(Svd { u: us, sigma, v: vs })
}

/// Serializes a complex matrix as nested rows of `[re, im]` pairs.
pub fn to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Builds a complex matrix from nested rows of `[re, im]` pairs. Rows must
/// be nonempty, rectangular, and finite.
pub fn from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::InvalidInput("matrix needs at least one row and one column".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidInput("matrix rows must all have the same length".into()));
    }
    let m = CMat::from_fn(rows.len(), cols, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    });
    if !all_finite(&m) {
        return Err(Error::InvalidInput("matrix entries must be finite".into()));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        // Box-Muller transform.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn random_cmat(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMat {
        CMat::from_fn(r, cols, |_, _| c(gaussian(rng), gaussian(rng)))
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
        let a = random_cmat(rng, n, n);
        &a * a.adjoint()
    }

    #[test]
    fn logdet_identity_is_zero() {
        let h = HermitianMatrix::new(identity(4)).unwrap();
        assert_relative_eq!(log_det_posdef(&h).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn logdet_matches_eigenvalue_oracle() {
        // Oracle: sum of logs of eigenvalues, an independent route from the
        // Cholesky pivots used by the implementation.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..8 {
                let m = random_psd(&mut rng, n) + identity(n);
                let h = HermitianMatrix::new(m.clone()).unwrap();
                let expect: f64 = herm_eigen(&m).0.iter().map(|&l| l.ln()).sum();
                assert_relative_eq!(log_det_posdef(&h).unwrap(), expect, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let m = CMat::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(-0.5)]));
        let h = HermitianMatrix::new(m).unwrap();
        assert!(matches!(log_det_posdef(&h), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn logdet_monotone_in_psd_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..25 {
            let a = random_psd(&mut rng, 3);
            let b = &a + random_psd(&mut rng, 3);
            let la = logdet_i_plus(&a).unwrap();
            let lb = logdet_i_plus(&b).unwrap();
            assert!(lb >= la - 1e-12, "logdet must grow with the argument: {la} vs {lb}");
        }
    }

    #[test]
    fn hermitian_constructor_rejects_asymmetry() {
        let mut m = identity(2);
        m[(0, 1)] = c(0.3, 0.1);
        m[(1, 0)] = c(0.3, 0.1); // conjugate would be (0.3, -0.1)
        assert!(HermitianMatrix::new(m).is_err());
    }

    #[test]
    fn psd_project_clamps_and_is_idempotent() {
        let m = CMat::from_diagonal(&DVector::from_vec(vec![cr(1.0), cr(-1.0)]));
        let h = HermitianMatrix::new(m).unwrap();
        let p = psd_project(&h);
        assert_relative_eq!(p.matrix()[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.matrix()[(1, 1)].re, 0.0, epsilon = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_cmat(&mut rng, 4, 4);
            let sym = HermitianMatrix::symmetrize(a);
            let once = psd_project(&sym);
            let twice = psd_project(&once);
            assert!(frob(&(once.matrix() - twice.matrix())) < 1e-12);
            assert!(once.min_eigenvalue() >= -1e-12);
        }
    }

    #[test]
    fn svd_reconstructs_and_sorts() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for &(r, cols) in &[(1usize, 1usize), (2, 2), (3, 2), (2, 5), (8, 8), (6, 8)] {
            let m = random_cmat(&mut rng, r, cols);
            let dec = svd(&m).unwrap();
            assert!(frob(&(dec.reconstruct() - &m)) < 1e-10, "reconstruction error too large for {r}x{cols}");
            for w in dec.sigma.windows(2) {
                assert!(w[0] >= w[1], "singular values must be nonincreasing");
            }
            // Thin factors have orthonormal columns.
            let k = dec.sigma.len();
            assert!(frob(&(dec.u.adjoint() * &dec.u - identity(k))) < 1e-10);
            assert!(frob(&(dec.v.adjoint() * &dec.v - identity(k))) < 1e-10);
        }
    }

    #[test]
    fn inv_sqrt_inverts_sqrt() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let m = random_psd(&mut rng, 4) + identity(4) * cr(0.1);
        let s = sqrt_psd(&m);
        let si = inv_sqrt_pd(&m);
        assert!(frob(&(&s * &s - &m)) < 1e-9);
        assert!(frob(&(&si * &m * &si - identity(4))) < 1e-9);
    }
}

//! SVD and equal-diagonal QR (GMD) beamformers.
//!
//! Both factorizations are taken on the `n` principal eigen-subchannels of the
//! channel: with `V_n` the first `n` right singular vectors, the reduced
//! channel `H V_n = U_n diag(delta_1..delta_n)` is either used as is (SVD) or
//! re-triangularized so that every diagonal entry equals the geometric mean of
//! `delta_1..delta_n` (QRS). For `n = min(rows, cols)` the QRS factors
//! reconstruct the channel itself, `H = Q R S*`.

use num_complex::Complex64;

use crate::matcore::{svd, ComplexMatrix, GivensRotation, Svd};
use crate::tolerance;
use crate::{Error, Result};

/// Rank-`n` SVD beamformer: `H v_n = u_n diag(deltas)`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `N x n` receive filter (first `n` left singular vectors).
    pub u_n: ComplexMatrix,
    /// Subchannel gains, non-increasing.
    pub deltas: Vec<f64>,
    /// `M x n` transmit precoder.
    pub v_n: ComplexMatrix,
    pub rank_used: usize,
}

/// Rank-`n` equal-diagonal QR beamformer: `q* H s = r_mat`.
#[derive(Debug, Clone)]
pub struct QrsFactors {
    /// `N x n` receive filter with orthonormal columns.
    pub q: ComplexMatrix,
    /// `n x n` upper triangular with every diagonal entry equal to `r_diag`.
    pub r_mat: ComplexMatrix,
    /// `M x n` transmit precoder with orthonormal columns.
    pub s: ComplexMatrix,
    pub r_diag: f64,
}

impl QrsFactors {
    pub fn streams(&self) -> usize {
        self.r_mat.rows()
    }
}

/// `(prod deltas)^(1/len)`, evaluated in the log domain.
pub fn geometric_mean(deltas: &[f64]) -> Result<f64> {
    if deltas.is_empty() {
        return Err(Error::invalid("geometric mean of an empty list"));
    }
    if let Some(bad) = deltas.iter().find(|&&d| d.is_nan() || d <= 0.0) {
        return Err(Error::RankDeficient(format!("non-positive singular value {bad}")));
    }
    let log_sum: f64 = deltas.iter().map(|d| d.ln()).sum();
    Ok((log_sum / deltas.len() as f64).exp())
}

fn check_streams(h: &ComplexMatrix, n: usize) -> Result<()> {
    let d = h.rows().min(h.cols());
    if n == 0 || n > d {
        return Err(Error::invalid(format!(
            "{n} streams requested on a {}x{} channel (at most {d})",
            h.rows(),
            h.cols()
        )));
    }
    Ok(())
}

fn check_rank(deltas: &[f64], n: usize) -> Result<()> {
    let dn = deltas[n - 1];
    if !(dn > tolerance::RANK) {
        return Err(Error::RankDeficient(format!("singular value {n} is {dn:e}, below {:e}", tolerance::RANK)));
    }
    Ok(())
}

pub fn svd_beamformer(h: &ComplexMatrix, n: usize) -> Result<SvdFactors> {
    check_streams(h, n)?;
    svd_factors_from(&svd(h)?, n)
}

pub fn qrs_beamformer(h: &ComplexMatrix, n: usize) -> Result<QrsFactors> {
    check_streams(h, n)?;
    qrs_factors_from(&svd(h)?, n)
}

/// Rank-`n` SVD factors from a precomputed full SVD.
pub fn svd_factors_from(full: &Svd, n: usize) -> Result<SvdFactors> {
    if n == 0 || n > full.deltas.len() {
        return Err(Error::invalid(format!("{n} streams requested, rank bound is {}", full.deltas.len())));
    }
    check_rank(&full.deltas, n)?;
    Ok(SvdFactors {
        u_n: full.u.leading_columns(n)?,
        deltas: full.deltas[..n].to_vec(),
        v_n: full.v.leading_columns(n)?,
        rank_used: n,
    })
}

/// Rank-`n` QRS factors from a precomputed full SVD.
pub fn qrs_factors_from(full: &Svd, n: usize) -> Result<QrsFactors> {
    let base = svd_factors_from(full, n)?;
    let gmd = equalize_diagonal(&base.deltas)?;
    let q = crate::matcore::matmul(&base.u_n, &gmd.left)?;
    let s = crate::matcore::matmul(&base.v_n, &gmd.right)?;
    Ok(QrsFactors { q, r_mat: gmd.r, s, r_diag: gmd.r_diag })
}

/// `diag(deltas) = left * r * right*` with `r` equal-diagonal upper triangular.
struct DiagonalGmd {
    left: ComplexMatrix,
    r: ComplexMatrix,
    right: ComplexMatrix,
    r_diag: f64,
}

/// Triangularizes `diag(deltas)` to an equal-diagonal `R` with `n - 1` paired
/// Givens steps.
///
/// At step `k` the largest remaining diagonal entry (at least the geometric
/// mean) and the smallest (at most the mean) are moved to positions `k` and
/// `k + 1`. A right rotation mixes the two columns so that the leading column
/// has norm exactly `r`, and the matching left rotation restores triangular
/// form. The trailing block stays diagonal, with the product of its entries
/// still `r^(n-k-1)`.
fn equalize_diagonal(deltas: &[f64]) -> Result<DiagonalGmd> {
    let n = deltas.len();
    let r_diag = geometric_mean(deltas)?;
    let mut r = ComplexMatrix::from_diag(deltas);
    let mut left = ComplexMatrix::identity(n);
    let mut right = ComplexMatrix::identity(n);

    for k in 0..n.saturating_sub(1) {
        let diag = |m: &ComplexMatrix, i: usize| m[(i, i)].re;

        let hi = (k..n).max_by(|&a, &b| diag(&r, a).total_cmp(&diag(&r, b))).unwrap();
        permute(&mut r, &mut left, &mut right, k, hi);
        let lo = (k + 1..n).min_by(|&a, &b| diag(&r, a).total_cmp(&diag(&r, b))).unwrap();
        permute(&mut r, &mut left, &mut right, k + 1, lo);

        let (d1, d2) = (diag(&r, k), diag(&r, k + 1));
        let spread = d1 * d1 - d2 * d2;
        if spread <= f64::EPSILON * d1 * d1 {
            // Both already equal the mean.
            continue;
        }
        let c = ((r_diag * r_diag - d2 * d2) / spread).clamp(0.0, 1.0).sqrt();
        let s = (1.0 - c * c).sqrt();

        // Right factor [[c, -s], [s, c]].
        let rot_right = GivensRotation { i: k, j: k + 1, c, s: Complex64::new(-s, 0.0) };
        rot_right.apply_right(&mut r);
        rot_right.apply_right(&mut right);

        // Left factor: first column (c d1, s d2) / r, applied as its adjoint.
        let (lc, ls) = (c * d1, s * d2);
        let norm = lc.hypot(ls);
        let rot_left = GivensRotation { i: k, j: k + 1, c: lc / norm, s: Complex64::new(ls / norm, 0.0) };
        rot_left.apply_left(&mut r);
        rot_left.adjoint().apply_right(&mut left);
        r[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }

    // Keep the diagonal real and non-negative by moving phases into `left`.
    for i in 0..n {
        let d = r[(i, i)];
        if d.im != 0.0 || d.re < 0.0 {
            let phase = d / d.norm();
            for j in 0..n {
                r[(i, j)] *= phase.conj();
                left[(j, i)] *= phase;
            }
        }
    }

    Ok(DiagonalGmd { left, r, right, r_diag })
}

fn permute(r: &mut ComplexMatrix, left: &mut ComplexMatrix, right: &mut ComplexMatrix, a: usize, b: usize) {
    if a != b {
        r.swap_symmetric(a, b);
        left.swap_columns(a, b);
        right.swap_columns(a, b);
    }
}

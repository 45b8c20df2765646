//! Dense complex linear algebra: matrices, Givens rotations and the SVD.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::tolerance;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
///
/// Entries are checked finite on construction through [`ComplexMatrix::new`];
/// arithmetic on finite inputs of moderate magnitude stays finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(format!("{} entries supplied for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows, e.g. `[[a, b], [c, d]]`.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != n_cols) {
            return Err(Error::dims("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(n_rows, n_cols, data)
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> =
            rows.iter().map(|r| r.as_ref().iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be at least 1x1");
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Square diagonal matrix with the given real entries.
    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// The first `n` columns.
    pub fn leading_columns(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.cols {
            return Err(Error::dims(format!("cannot take {n} leading columns of a {}-column matrix", self.cols)));
        }
        let mut out = Self::zeros(self.rows, n);
        for i in 0..self.rows {
            for j in 0..n {
                out[(i, j)] = self[(i, j)];
            }
        }
        Ok(out)
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, k: Complex64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * k).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(format!(
                "cannot subtract {}x{} from {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||self - other||_F`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm())
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::dims(format!("vector of length {} against {} columns", v.len(), self.cols)));
        }
        Ok(self.data.chunks_exact(self.cols).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    /// `self* * v` without forming the adjoint.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.rows {
            return Err(Error::dims(format!("vector of length {} against {} rows", v.len(), self.rows)));
        }
        let mut out = vec![ZERO; self.cols];
        for (row, &vi) in self.data.chunks_exact(self.cols).zip(v) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * vi;
            }
        }
        Ok(out)
    }

    /// Maximum modulus of the entries strictly below the diagonal.
    pub fn max_below_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..i.min(self.cols) {
                worst = worst.max(self[(i, j)].norm());
            }
        }
        worst
    }

    /// `||A* A - I||_F`, which is zero iff the columns are orthonormal.
    pub fn column_orthonormality_defect(&self) -> f64 {
        let gram = matmul(&self.conj_transpose(), self).expect("conformant by construction");
        gram.sub(&Self::identity(self.cols)).expect("square by construction").frobenius_norm()
    }

    pub(crate) fn swap_columns(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Symmetric permutation of rows and columns `a` and `b`.
    pub(crate) fn swap_symmetric(&mut self, a: usize, b: usize) {
        self.swap_rows(a, b);
        self.swap_columns(a, b);
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks_exact(self.cols) {
            write!(f, " ")?;
            for z in row {
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Standard complex matrix product.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::dims(format!("cannot multiply {}x{} by {}x{}", a.rows, a.cols, b.rows, b.cols)));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik == ZERO {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * b[(k, j)];
            }
        }
    }
    Ok(out)
}

/// `||A* A - I||_F` for a square matrix.
pub fn unitarity_defect(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::dims(format!("unitarity is defined for square matrices, got {}x{}", a.rows, a.cols)));
    }
    Ok(a.column_orthonormality_defect())
}

/// Plane rotation acting on coordinates `i` and `j`.
///
/// As a 2x2 block the rotation is `[[c, s], [-conj(s), c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensRotation {
    pub i: usize,
    pub j: usize,
    pub c: f64,
    pub s: Complex64,
}

impl GivensRotation {
    pub fn new(i: usize, j: usize, c: f64, s: Complex64) -> Result<Self> {
        if i == j {
            return Err(Error::invalid("rotation indices must differ"));
        }
        if ((c * c + s.norm_sqr()) - 1.0).abs() > tolerance::GIVENS_NORM {
            return Err(Error::invalid(format!("|c|^2 + |s|^2 = {} is not 1", c * c + s.norm_sqr())));
        }
        Ok(GivensRotation { i, j, c, s })
    }

    /// Rotation in the `(i, j)` plane that maps `(a, b)` to `(r, 0)`.
    pub fn zeroing(i: usize, j: usize, a: Complex64, b: Complex64) -> Result<Self> {
        let (c, s) = givens_zeroing(a, b);
        Self::new(i, j, c, s)
    }

    pub fn adjoint(&self) -> Self {
        GivensRotation { s: -self.s, ..*self }
    }

    /// Applies the rotation to a 2-vector.
    pub fn rotate(&self, a: Complex64, b: Complex64) -> (Complex64, Complex64) {
        (self.c * a + self.s * b, -self.s.conj() * a + self.c * b)
    }

    /// `m <- G m`, touching rows `i` and `j`.
    pub fn apply_left(&self, m: &mut ComplexMatrix) {
        for col in 0..m.cols {
            let (a, b) = self.rotate(m[(self.i, col)], m[(self.j, col)]);
            m[(self.i, col)] = a;
            m[(self.j, col)] = b;
        }
    }

    /// `m <- m G`, touching columns `i` and `j`.
    pub fn apply_right(&self, m: &mut ComplexMatrix) {
        for row in 0..m.rows {
            let a = m[(row, self.i)];
            let b = m[(row, self.j)];
            m[(row, self.i)] = self.c * a - self.s.conj() * b;
            m[(row, self.j)] = self.s * a + self.c * b;
        }
    }
}

/// Cosine and sine of the rotation taking `(a, b)` to `(r, 0)` with
/// `|r| = sqrt(|a|^2 + |b|^2)`.
///
/// Both inputs zero gives the identity rotation.
pub fn givens_zeroing(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let rho = na.hypot(nb);
    let phase = a / na;
    (na / rho, phase * b.conj() / rho)
}

/// Full singular value decomposition `a = u * diag(deltas) * v*`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows x rows` unitary.
    pub u: ComplexMatrix,
    /// `min(rows, cols)` singular values, non-increasing.
    pub deltas: Vec<f64>,
    /// `cols x cols` unitary.
    pub v: ComplexMatrix,
}

impl Svd {
    /// `u * D * v*` with `D` the rectangular diagonal of `deltas`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (n, m) = (self.u.rows, self.v.rows);
        let mut ud = ComplexMatrix::zeros(n, m);
        for (k, &d) in self.deltas.iter().enumerate() {
            for i in 0..n {
                ud[(i, k)] = self.u[(i, k)] * d;
            }
        }
        matmul(&ud, &self.v.conj_transpose()).expect("conformant by construction")
    }
}

/// SVD by one-sided (Hestenes) Jacobi rotations.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows >= a.cols {
        svd_tall(a)
    } else {
        let Svd { u, deltas, v } = svd_tall(&a.conj_transpose())?;
        Ok(Svd { u: v, deltas, v: u })
    }
}

/// Column-major working buffer.
struct Columns {
    len: usize,
    data: Vec<Complex64>,
}

impl Columns {
    #[inline]
    fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    #[inline]
    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [Complex64], &mut [Complex64]) {
        debug_assert!(p < q);
        let (head, tail) = self.data.split_at_mut(q * self.len);
        (&mut head[p * self.len..(p + 1) * self.len], &mut tail[..self.len])
    }

    /// `[p, q] <- [c p - s conj(e) q, s e p + c q]`.
    #[inline]
    fn rotate(&mut self, p: usize, q: usize, c: f64, s: f64, e: Complex64) {
        let (cp, cq) = self.pair_mut(p, q);
        let se = e * s;
        let sec = e.conj() * s;
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let (xp, yq) = (*x, *y);
            *x = xp * c - sec * yq;
            *y = se * xp + yq * c;
        }
    }
}

fn svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (n, m) = (a.rows, a.cols);
    let mut w = Columns { len: n, data: vec![ZERO; n * m] };
    for i in 0..n {
        for j in 0..m {
            w.data[j * n + i] = a[(i, j)];
        }
    }
    let mut v = Columns { len: m, data: vec![ZERO; m * m] };
    for j in 0..m {
        v.data[j * m + j] = ONE;
    }

    let mut converged = m < 2;
    for _ in 0..tolerance::JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..m - 1 {
            for q in p + 1..m {
                let (cp, cq) = (w.col(p), w.col(q));
                let alpha: f64 = cp.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cq.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cp.iter().zip(cq).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tolerance::JACOBI_ORTHOGONALITY * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let e = gamma / g;
                w.rotate(p, q, c, s, e);
                v.rotate(p, q, c, s, e);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: tolerance::JACOBI_MAX_SWEEPS });
    }

    let norms: Vec<f64> = (0..m).map(|j| w.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let deltas: Vec<f64> = order.iter().map(|&k| norms[k]).collect();
    let mut v_out = ComplexMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..m {
            v_out[(i, dst)] = v.col(src)[i];
        }
    }

    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for &k in &order {
        if norms[k] > 0.0 {
            let inv = 1.0 / norms[k];
            u_cols.push(w.col(k).iter().map(|z| z * inv).collect());
        } else {
            break;
        }
    }
    complete_basis(&mut u_cols, n);
    let mut u_out = ComplexMatrix::zeros(n, n);
    for (j, col) in u_cols.iter().enumerate() {
        for (i, z) in col.iter().enumerate() {
            u_out[(i, j)] = *z;
        }
    }
    Ok(Svd { u: u_out, deltas, v: v_out })
}

/// Extends orthonormal `cols` to a basis of C^n with projected unit vectors.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, n: usize) {
    while cols.len() < n {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for e in 0..n {
            let mut cand = vec![ZERO; n];
            cand[e] = ONE;
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for q in cols.iter() {
                    let proj: Complex64 = q.iter().zip(&cand).map(|(a, b)| a.conj() * b).sum();
                    for (c, qi) in cand.iter_mut().zip(q) {
                        *c -= proj * qi;
                    }
                }
            }
            let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("n >= 1");
        cols.push(cand.into_iter().map(|z| z / norm).collect());
    }
}

//! Dense row-major matrices and the factorizations the estimators need.
//!
//! Level-3 work (gram products, Schur complement updates, triangular
//! inversion) is routed through [`Real::gemm`]; everything else is plain
//! loops over contiguous rows.

use std::ops::{Index, IndexMut};

use crate::scalar::Real;

/// Block size of the blocked Cholesky and triangular inversion.
const BLOCK: usize = 96;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// A factorization hit a non-positive pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Wraps row-major storage. Panics when `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "storage length does not match shape");
        Self { rows, cols, data }
    }

    /// Builds from a slice of equal-length rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Largest elementwise absolute difference; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Columns in the given order.
    pub fn select_columns(&self, order: &[usize]) -> Self {
        Self::from_fn(self.rows, order.len(), |i, j| self[(i, order[j])])
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(
            T::one(),
            View::full(self),
            View::full(other),
            T::zero(),
            &mut out,
        );
        out
    }

    /// `self * otherᵀ`.
    pub fn matmul_transposed(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.rows);
        gemm(
            T::one(),
            View::full(self),
            View::full(other).t(),
            T::zero(),
            &mut out,
        );
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`, accumulated row by row.
    pub fn transpose_mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }

    /// Exactly symmetric `selfᵀ self`.
    ///
    /// Only the lower block triangle is multiplied; the diagonal blocks are
    /// averaged with their transposes and the strict upper part is mirrored.
    pub fn gram(&self) -> Self {
        let p = self.cols;
        let mut g = Self::zeros(p, p);
        let mut start = 0;
        while start < p {
            let end = (start + BLOCK).min(p);
            let a = View {
                data: &self.data,
                offset: start,
                rows: end - start,
                cols: self.rows,
                rs: 1,
                cs: p,
            };
            let b = View {
                data: &self.data,
                offset: 0,
                rows: self.rows,
                cols: end,
                rs: p,
                cs: 1,
            };
            gemm_into(T::one(), a, b, T::zero(), &mut g.data, start * p, p, end - start, end);
            start = end;
        }
        let half = T::lit(0.5);
        for i in 0..p {
            let block_start = (i / BLOCK) * BLOCK;
            for j in block_start..i {
                let avg = (g[(i, j)] + g[(j, i)]) * half;
                g[(i, j)] = avg;
            }
            for j in 0..i {
                g.data[j * p + i] = g.data[i * p + j];
            }
        }
        g
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm2<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Read-only strided window into a buffer.
#[derive(Clone, Copy)]
struct View<'a, T> {
    data: &'a [T],
    offset: usize,
    rows: usize,
    cols: usize,
    rs: usize,
    cs: usize,
}

impl<'a, T: Real> View<'a, T> {
    fn full(m: &'a Matrix<T>) -> Self {
        Self {
            data: &m.data,
            offset: 0,
            rows: m.rows,
            cols: m.cols,
            rs: m.cols,
            cs: 1,
        }
    }

    fn block(m: &'a Matrix<T>, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= m.rows && c0 + cols <= m.cols);
        Self {
            data: &m.data,
            offset: r0 * m.cols + c0,
            rows,
            cols,
            rs: m.cols,
            cs: 1,
        }
    }

    fn t(self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            ..self
        }
    }

    fn check(&self) {
        if self.rows > 0 && self.cols > 0 {
            let last = self.offset + (self.rows - 1) * self.rs + (self.cols - 1) * self.cs;
            assert!(last < self.data.len(), "view out of bounds");
        }
    }
}

fn gemm<T: Real>(alpha: T, a: View<'_, T>, b: View<'_, T>, beta: T, c: &mut Matrix<T>) {
    let cols = c.cols;
    let (rows, ccols) = (c.rows, c.cols);
    gemm_into(alpha, a, b, beta, &mut c.data, 0, cols, rows, ccols);
}

/// `C <- alpha A B + beta C` where `C` is the `rows x cols` row-major window
/// of `c` starting at `c_off` with row stride `c_rs`.
#[allow(clippy::too_many_arguments)]
fn gemm_into<T: Real>(
    alpha: T,
    a: View<'_, T>,
    b: View<'_, T>,
    beta: T,
    c: &mut [T],
    c_off: usize,
    c_rs: usize,
    rows: usize,
    cols: usize,
) {
    assert_eq!(a.rows, rows);
    assert_eq!(b.cols, cols);
    assert_eq!(a.cols, b.rows);
    a.check();
    b.check();
    if rows == 0 || cols == 0 {
        return;
    }
    assert!(c_off + (rows - 1) * c_rs + cols - 1 < c.len(), "output out of bounds");
    // SAFETY: all three windows were bounds-checked above, and `c` is borrowed
    // mutably so it cannot overlap the shared borrows behind `a` and `b`.
    unsafe {
        T::gemm(
            rows,
            a.cols,
            cols,
            alpha,
            a.data.as_ptr().add(a.offset),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr().add(b.offset),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr().add(c_off),
            c_rs as isize,
            1,
        );
    }
}

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors a symmetric matrix, reading only its lower triangle.
    ///
    /// Fails at the first pivot (Schur complement diagonal) that is not
    /// strictly greater than `pivot_tol`.
    pub fn factor(a: &Matrix<T>, pivot_tol: T) -> Result<Self, NotPositiveDefinite> {
        Self::factor_owned(a.clone(), pivot_tol)
    }

    /// Factors `a + diag(shift)`.
    pub fn factor_shifted(
        a: &Matrix<T>,
        shift: &[T],
        pivot_tol: T,
    ) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.rows, shift.len());
        let mut m = a.clone();
        for (i, &s) in shift.iter().enumerate() {
            m[(i, i)] += s;
        }
        Self::factor_owned(m, pivot_tol)
    }

    pub fn factor_owned(mut a: Matrix<T>, pivot_tol: T) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.rows, a.cols, "cholesky needs a square matrix");
        let n = a.rows;
        let mut panel: Vec<T> = Vec::new();
        let mut kb = 0;
        while kb < n {
            let bs = BLOCK.min(n - kb);
            factor_diagonal_block(&mut a, kb, bs, pivot_tol)?;
            let rest = n - kb - bs;
            if rest > 0 {
                // Panel solve L21 = A21 L11^{-T} through the inverse of the small block.
                let inv11 = invert_lower_small(&a, kb, bs);
                panel.clear();
                for i in kb + bs..n {
                    panel.extend_from_slice(&a.row(i)[kb..kb + bs]);
                }
                let pv = View {
                    data: &panel,
                    offset: 0,
                    rows: rest,
                    cols: bs,
                    rs: bs,
                    cs: 1,
                };
                gemm_into(
                    T::one(),
                    pv,
                    View::full(&inv11).t(),
                    T::zero(),
                    &mut a.data,
                    (kb + bs) * n + kb,
                    n,
                    rest,
                    bs,
                );
                panel.clear();
                for i in kb + bs..n {
                    panel.extend_from_slice(&a.row(i)[kb..kb + bs]);
                }
                // Lower part of the trailing update A22 -= L21 L21ᵀ, one row block at a time.
                let mut ib = 0;
                while ib < rest {
                    let ibs = BLOCK.min(rest - ib);
                    let rows = View {
                        data: &panel,
                        offset: ib * bs,
                        rows: ibs,
                        cols: bs,
                        rs: bs,
                        cs: 1,
                    };
                    let cols = View {
                        data: &panel,
                        offset: 0,
                        rows: ib + ibs,
                        cols: bs,
                        rs: bs,
                        cs: 1,
                    }
                    .t();
                    gemm_into(
                        -T::one(),
                        rows,
                        cols,
                        T::one(),
                        &mut a.data,
                        (kb + bs + ib) * n + kb + bs,
                        n,
                        ibs,
                        ib + ibs,
                    );
                    ib += ibs;
                }
            }
            kb += bs;
        }
        for i in 0..n {
            for v in &mut a.row_mut(i)[i + 1..] {
                *v = T::zero();
            }
        }
        Ok(Self { l: a })
    }

    pub fn dim(&self) -> usize {
        self.l.rows
    }

    /// The lower factor.
    pub fn factor_matrix(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn into_factor(self) -> Matrix<T> {
        self.l
    }

    /// Solves `L Lᵀ x = rhs` by forward and back substitution.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = self.solve_lower(rhs);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// Solves `L y = rhs`.
    pub fn solve_lower(&self, rhs: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.l.row(i);
            let s = rhs[i] - dot(&row[..i], &y);
            y.push(s / row[i]);
        }
        y
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [T]) {
        let n = self.dim();
        assert_eq!(y.len(), n);
        for i in (0..n).rev() {
            let row = self.l.row(i);
            let xi = y[i] / row[i];
            y[i] = xi;
            for (yl, &lil) in y[..i].iter_mut().zip(&row[..i]) {
                *yl -= lil * xi;
            }
        }
    }

    /// `L^{-1}`, lower triangular.
    pub fn inverse_factor(&self) -> Matrix<T> {
        invert_lower(&self.l)
    }

    /// Diagonal of `(L Lᵀ)^{-1}`, i.e. squared column norms of `L^{-1}`.
    pub fn inverse_diagonal(&self) -> Vec<T> {
        let w = self.inverse_factor();
        let n = self.dim();
        let mut diag = vec![T::zero(); n];
        for i in 0..n {
            for (d, &v) in diag[..=i].iter_mut().zip(&w.row(i)[..=i]) {
                *d += v * v;
            }
        }
        diag
    }
}

fn factor_diagonal_block<T: Real>(
    a: &mut Matrix<T>,
    kb: usize,
    bs: usize,
    pivot_tol: T,
) -> Result<(), NotPositiveDefinite> {
    let n = a.cols;
    for j in kb..kb + bs {
        let row_j = &mut a.data[j * n..(j + 1) * n];
        let d = row_j[j] - dot(&row_j[kb..j], &row_j[kb..j]);
        if !(d > pivot_tol) || !d.is_finite() {
            return Err(NotPositiveDefinite { pivot: j });
        }
        let ljj = d.sqrt();
        row_j[j] = ljj;
        let row_j: Vec<T> = row_j[kb..j].to_vec();
        for i in j + 1..kb + bs {
            let row_i = &mut a.data[i * n..(i + 1) * n];
            let s = row_i[j] - dot(&row_i[kb..j], &row_j);
            row_i[j] = s / ljj;
        }
    }
    Ok(())
}

/// Inverse of the `bs x bs` lower block of `a` starting at `(kb, kb)`.
fn invert_lower_small<T: Real>(a: &Matrix<T>, kb: usize, bs: usize) -> Matrix<T> {
    let mut w = Matrix::zeros(bs, bs);
    for j in 0..bs {
        w[(j, j)] = T::one() / a[(kb + j, kb + j)];
        for i in j + 1..bs {
            let mut s = T::zero();
            for l in j..i {
                s += a[(kb + i, kb + l)] * w[(l, j)];
            }
            w[(i, j)] = -s / a[(kb + i, kb + i)];
        }
    }
    w
}

/// Blocked inverse of a lower triangular matrix.
pub fn invert_lower<T: Real>(l: &Matrix<T>) -> Matrix<T> {
    assert_eq!(l.rows, l.cols);
    let n = l.rows;
    let starts: Vec<usize> = (0..n).step_by(BLOCK).collect();
    let size = |b: usize| BLOCK.min(n - starts[b]);
    let diag_inv: Vec<Matrix<T>> = (0..starts.len())
        .map(|b| invert_lower_small(l, starts[b], size(b)))
        .collect();
    let mut w = Matrix::zeros(n, n);
    for (b, inv) in diag_inv.iter().enumerate() {
        let s = starts[b];
        for i in 0..size(b) {
            w.row_mut(s + i)[s..s + size(b)].copy_from_slice(inv.row(i));
        }
    }
    let mut tmp = Matrix::zeros(BLOCK, BLOCK);
    for jb in 0..starts.len() {
        let (j0, js) = (starts[jb], size(jb));
        for ib in jb + 1..starts.len() {
            let (i0, is) = (starts[ib], size(ib));
            let k = i0 - j0;
            // tmp = L[I, J..I] * W[J..I, J]
            gemm_into(
                T::one(),
                View::block(l, i0, j0, is, k),
                View::block(&w, j0, j0, k, js),
                T::zero(),
                &mut tmp.data,
                0,
                BLOCK,
                is,
                js,
            );
            let t = View {
                data: &tmp.data,
                offset: 0,
                rows: is,
                cols: js,
                rs: BLOCK,
                cs: 1,
            };
            gemm_into(
                -T::one(),
                View::full(&diag_inv[ib]),
                t,
                T::zero(),
                &mut w.data,
                i0 * n + j0,
                n,
                is,
                js,
            );
        }
    }
    w
}

/// Solves `R x = rhs` for upper triangular `R` by back substitution.
pub fn solve_upper<T: Real>(r: &Matrix<T>, rhs: &[T]) -> Vec<T> {
    let n = r.rows;
    assert_eq!(r.cols, n);
    assert_eq!(rhs.len(), n);
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let row = r.row(i);
        let s = rhs[i] - dot(&row[i + 1..], &x[i + 1..]);
        x[i] = s / row[i];
    }
    x
}

/// Thin QR with `Q` of orthonormal columns and `R` upper triangular with a
/// nonnegative diagonal.
#[derive(Debug, Clone)]
pub struct ThinQr<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
}

/// Householder thin QR. Fails at the first column whose remaining norm is at
/// most `tol`.
pub fn householder_qr<T: Real>(a: &Matrix<T>, tol: T) -> Result<ThinQr<T>, NotPositiveDefinite> {
    let (n, p) = (a.rows, a.cols);
    assert!(p <= n, "thin QR needs rows >= cols");
    // column-major working copy
    let mut cm: Vec<T> = (0..p).flat_map(|j| (0..n).map(move |i| (i, j))).map(|(i, j)| a[(i, j)]).collect();
    let mut vs: Vec<Vec<T>> = Vec::with_capacity(p);
    let mut r = Matrix::zeros(p, p);
    let two = T::lit(2.0);
    for k in 0..p {
        let col = &cm[k * n + k..(k + 1) * n];
        let norm = norm2(col);
        if !(norm > tol) {
            return Err(NotPositiveDefinite { pivot: k });
        }
        let alpha = if col[0] >= T::zero() { -norm } else { norm };
        let mut v = col.to_vec();
        v[0] -= alpha;
        let vn = norm2(&v);
        if vn > T::zero() {
            for x in &mut v {
                *x /= vn;
            }
        }
        for j in k..p {
            let c = &mut cm[j * n + k..(j + 1) * n];
            let s = two * dot(&v, c);
            for (ci, &vi) in c.iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        }
        for j in k..p {
            r[(k, j)] = cm[j * n + k];
        }
        vs.push(v);
    }
    // Q = H_0 ... H_{p-1} [I_p; 0]
    let mut qcm = vec![T::zero(); n * p];
    for j in 0..p {
        qcm[j * n + j] = T::one();
    }
    for k in (0..p).rev() {
        let v = &vs[k];
        for j in 0..p {
            let c = &mut qcm[j * n + k..(j + 1) * n];
            let s = two * dot(v, c);
            for (ci, &vi) in c.iter_mut().zip(v) {
                *ci -= s * vi;
            }
        }
    }
    let mut q = Matrix::from_fn(n, p, |i, j| qcm[j * n + i]);
    for k in 0..p {
        if r[(k, k)] < T::zero() {
            for v in &mut r.row_mut(k)[k..] {
                *v = -*v;
            }
            for i in 0..n {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok(ThinQr { q, r })
}

/// Thin QR by two rounds of Cholesky QR, given the gram `aᵀa`.
///
/// `R₁ = chol(aᵀa)ᵀ`, `Q₁ = a R₁^{-1}`, then the same again on `Q₁`; the
/// second round restores orthogonality lost to the squared condition number.
/// Fails (with the pivot of the first round) when `aᵀa` does not factor;
/// falls back to Householder when only the second round fails.
pub fn cholesky_qr2<T: Real>(
    a: &Matrix<T>,
    gram: &Matrix<T>,
    pivot_tol: T,
) -> Result<ThinQr<T>, NotPositiveDefinite> {
    assert_eq!(gram.rows, a.cols);
    let l1 = Cholesky::factor(gram, pivot_tol)?;
    let q1 = a.matmul_transposed(&l1.inverse_factor());
    let second_tol = T::epsilon() * T::of_usize(a.rows.max(1));
    let l2 = match Cholesky::factor(&q1.gram(), second_tol) {
        Ok(l2) => l2,
        Err(_) => return householder_qr(a, T::zero()),
    };
    let q = q1.matmul_transposed(&l2.inverse_factor());
    // R = R₂ R₁ = (L₁ L₂)ᵀ
    let r = l1.factor_matrix().matmul(l2.factor_matrix()).transpose();
    Ok(ThinQr { q, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> Matrix<f64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let x = Matrix::from_fn(n + 3, n, |_, _| next());
        let mut g = x.gram();
        for i in 0..n {
            g[(i, i)] += 0.1;
        }
        g
    }

    #[test]
    fn cholesky_hand_example() {
        let a = Matrix::from_rows(&[[4.0, 12.0, -16.0], [12.0, 37.0, -43.0], [-16.0, -43.0, 98.0]]);
        let l = Cholesky::factor(&a, 0.0).unwrap();
        let expected = Matrix::from_rows(&[[2.0, 0.0, 0.0], [6.0, 1.0, 0.0], [-8.0, 5.0, 3.0]]);
        assert!(l.factor_matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn blocked_factor_reconstructs() {
        for &n in &[1, 5, BLOCK - 1, BLOCK, BLOCK + 1, 2 * BLOCK + 17] {
            let a = spd(n, n as u64);
            let l = Cholesky::factor(&a, 0.0).unwrap();
            let back = l.factor_matrix().matmul_transposed(l.factor_matrix());
            assert!(back.max_abs_diff(&a) < 1e-10, "n = {n}");
            let w = l.inverse_factor();
            let eye = w.matmul(l.factor_matrix());
            assert!(eye.max_abs_diff(&Matrix::identity(n)) < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn reports_failing_pivot() {
        let a = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 1.0]]);
        assert_eq!(
            Cholesky::factor(&a, 1e-12).unwrap_err(),
            NotPositiveDefinite { pivot: 2 }
        );
        let a = Matrix::from_rows(&[[-1.0]]);
        assert_eq!(Cholesky::factor(&a, 0.0).unwrap_err().pivot, 0);
    }

    #[test]
    fn gram_is_exactly_symmetric() {
        let x = Matrix::from_fn(300, 2 * BLOCK + 5, |i, j| ((i * 31 + j * 17) % 13) as f64 / 7.0 - 0.9);
        let g = x.gram();
        let naive = x.transpose().matmul(&x);
        assert_eq!(g, g.transpose());
        assert!(g.max_abs_diff(&naive) < 1e-10);
    }

    #[test]
    fn householder_and_cholesky_qr_agree() {
        let x = Matrix::from_fn(40, 7, |i, j| (((i + 3) * (j + 5) * 7919) % 101) as f64 / 50.0 - 1.0);
        let h = householder_qr(&x, 1e-12).unwrap();
        let c = cholesky_qr2(&x, &x.gram(), 1e-12).unwrap();
        assert!(h.q.max_abs_diff(&c.q) < 1e-10);
        assert!(h.r.max_abs_diff(&c.r) < 1e-10);
        assert!(h.q.matmul(&h.r).max_abs_diff(&x) < 1e-12);
        assert!(c.q.gram().max_abs_diff(&Matrix::identity(7)) < 1e-12);
        for k in 0..7 {
            assert!(c.r[(k, k)] > 0.0 && h.r[(k, k)] > 0.0);
        }
    }

    #[test]
    fn householder_flags_dependent_column() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        assert_eq!(householder_qr(&x, 1e-10).unwrap_err().pivot, 1);
    }

    #[test]
    fn upper_back_substitution() {
        let r = Matrix::from_rows(&[[2.0, 1.0, -1.0], [0.0, 4.0, 2.0], [0.0, 0.0, 0.5]]);
        let x = solve_upper(&r, &[3.0, 10.0, 1.0]);
        assert_eq!(r.mul_vec(&x), vec![3.0, 10.0, 1.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[[4.0, 2.0], [2.0, 3.0]]);
        let c = Cholesky::factor(&a, 0.0).unwrap();
        let x = c.solve(&[2.0, 1.0]);
        let r = a.mul_vec(&x);
        assert!((r[0] - 2.0).abs() < 1e-6 && (r[1] - 1.0).abs() < 1e-6);
    }
}

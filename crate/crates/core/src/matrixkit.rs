//! Small dense complex matrices (up to 4x4) and the two QR factorizations
//! used by the decoders.
//!
//! [`qr_decompose`] is a general Gram-Schmidt QR with reorthogonalization.
//! [`qr_appendix_a`] builds the QR of a golden effective matrix `H̄·Ψ` from
//! the block structure of `H̄`, so that the diagonal 2x2 blocks of `R` come
//! out exactly real.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Result, StcError};

const MAX_DIM: usize = 4;

/// Relative residual below which a column is treated as linearly dependent.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Dense complex matrix with at most 4 rows and 4 columns, stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMat {
    rows: usize,
    cols: usize,
    data: [Complex64; MAX_DIM * MAX_DIM],
}

impl ComplexMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows <= MAX_DIM && cols <= MAX_DIM, "matrix larger than 4x4");
        Self {
            rows,
            cols,
            data: [Complex64::new(0.0, 0.0); MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Builds a real matrix from row slices.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.as_ref().iter().enumerate() {
                m[(i, j)] = Complex64::new(v, 0.0);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major view of the live entries.
    pub fn entries(&self) -> Vec<Complex64> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .map(|ij| self[ij])
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copy of the `rows x cols` block starting at `(row0, col0)`.
    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = self[(row0 + i, col0 + j)];
            }
        }
        m
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * x[j]).sum())
            .collect()
    }

    /// Copy with columns reordered so that column `p` of the result is
    /// column `order[p]` of `self`.
    pub fn permute_columns(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.cols, "permutation length mismatch");
        let mut m = Self::zeros(self.rows, self.cols);
        for (p, &src) in order.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, p)] = self[(i, src)];
            }
        }
        m
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] -= other[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let mut m = *self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] *= k;
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|v| v.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMat {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * MAX_DIM + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl Mul for ComplexMat {
    type Output = ComplexMat;

    fn mul(self, rhs: ComplexMat) -> ComplexMat {
        &self * &rhs
    }
}

impl Mul for &ComplexMat {
    type Output = ComplexMat;

    fn mul(self, rhs: &ComplexMat) -> ComplexMat {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut m = ComplexMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..self.cols {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                m[(i, j)] = acc;
            }
        }
        m
    }
}

impl fmt::Debug for ComplexMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// `Q` unitary, `R` upper triangular with nonnegative real diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrFactors {
    pub q: ComplexMat,
    pub r: ComplexMat,
}

impl QrFactors {
    /// Upper-left 2x2 block of `R`.
    pub fn a_block(&self) -> ComplexMat {
        self.r.block(0, 0, 2, 2)
    }

    /// Upper-right 2x2 block of `R`.
    pub fn b_block(&self) -> ComplexMat {
        self.r.block(0, 2, 2, 2)
    }

    /// Lower-right 2x2 block of `R`.
    pub fn d_block(&self) -> ComplexMat {
        self.r.block(2, 2, 2, 2)
    }

    /// `‖Q*Q − I‖_F`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.q.cols();
        (self.q.adjoint() * self.q)
            .sub(&ComplexMat::identity(n))
            .frobenius_norm()
    }

    /// `‖QR − H‖_F / ‖H‖_F`.
    pub fn reconstruction_error(&self, h: &ComplexMat) -> f64 {
        (self.q * self.r).sub(h).frobenius_norm() / h.frobenius_norm()
    }
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// QR of a square matrix by Gram-Schmidt with one reorthogonalization pass.
///
/// The diagonal of `R` is the residual norm of each column, so it is real and
/// positive by construction; entries below the diagonal are exact zeros.
pub fn qr_decompose(h: &ComplexMat) -> Result<QrFactors> {
    let n = h.cols();
    assert_eq!(h.rows(), n, "qr_decompose expects a square matrix");
    let threshold = RANK_TOLERANCE * h.frobenius_norm();
    let mut q_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut r = ComplexMat::zeros(n, n);
    for j in 0..n {
        let mut w = h.column(j);
        for _pass in 0..2 {
            for (i, qi) in q_cols.iter().enumerate() {
                let c = dot(qi, &w);
                r[(i, j)] += c;
                for (wk, &qk) in w.iter_mut().zip(qi) {
                    *wk -= c * qk;
                }
            }
        }
        let residual = norm(&w);
        if !(residual > threshold) {
            return Err(StcError::DegenerateChannel {
                column: j,
                residual,
            });
        }
        r[(j, j)] = Complex64::new(residual, 0.0);
        q_cols.push(w.iter().map(|&v| v / residual).collect());
    }
    let mut q = ComplexMat::zeros(n, n);
    for (j, col) in q_cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q[(i, j)] = v;
        }
    }
    Ok(QrFactors { q, r })
}

/// Positions (row, col) that are zero in every golden `H̄`.
pub const GOLDEN_ZERO_PATTERN: [(usize, usize); 8] = [
    (0, 1),
    (0, 3),
    (1, 0),
    (1, 2),
    (2, 1),
    (2, 3),
    (3, 0),
    (3, 2),
];

/// Reads `(cos, sin)` of the 2x2 rotation block starting at `(k, k)`.
fn rotation_block(psi: &ComplexMat, k: usize) -> Result<(f64, f64)> {
    let c = psi[(k, k)];
    let s = psi[(k, k + 1)];
    let ok = c.im == 0.0
        && s.im == 0.0
        && psi[(k + 1, k)] == -s
        && psi[(k + 1, k + 1)] == c
        && ((c.re * c.re + s.re * s.re) - 1.0).abs() < 1e-12;
    if ok {
        Ok((c.re, s.re))
    } else {
        Err(StcError::NotGoldenMatrix("rotation factor is not a real block rotation"))
    }
}

/// 2x2 complex QR of the columns `(u, v)`: returns `(q1, q2, r11, r12, r22)`.
fn qr_pair(
    u: [Complex64; 2],
    v: [Complex64; 2],
    threshold: f64,
    cols: (usize, usize),
) -> Result<([Complex64; 2], [Complex64; 2], f64, Complex64, f64)> {
    let r11 = norm(&u);
    if !(r11 > threshold) {
        return Err(StcError::DegenerateChannel {
            column: cols.0,
            residual: r11,
        });
    }
    let q1 = [u[0] / r11, u[1] / r11];
    let mut w = v;
    let mut r12 = Complex64::new(0.0, 0.0);
    for _pass in 0..2 {
        let c = dot(&q1, &w);
        r12 += c;
        w[0] -= c * q1[0];
        w[1] -= c * q1[1];
    }
    let r22 = norm(&w);
    if !(r22 > threshold) {
        return Err(StcError::DegenerateChannel {
            column: cols.1,
            residual: r22,
        });
    }
    Ok((q1, [w[0] / r22, w[1] / r22], r11, r12, r22))
}

/// QR of `h_bar · psi` built from the golden sparsity of `h_bar`.
///
/// Columns {1,3} of `h_bar` live in rows {1,3} and columns {2,4} in rows
/// {2,4}, so `Q̄` comes from two independent 2x2 QRs and `R̄` has
/// `r̄12 = r̄14 = r̄23 = r̄34 = 0`. Then `G = R̄Ψ` has real diagonal blocks,
/// and a block-diagonal real Givens rotation `W` triangularizes it:
/// `R = W·G`, `Q = Q̄·Wᵀ`. The A and D blocks of the result are computed in
/// real arithmetic, so their imaginary parts are exactly zero.
pub fn qr_appendix_a(h_bar: &ComplexMat, psi: &ComplexMat) -> Result<QrFactors> {
    if h_bar.rows() != 4 || h_bar.cols() != 4 || psi.rows() != 4 || psi.cols() != 4 {
        return Err(StcError::NotGoldenMatrix("expected 4x4 factors"));
    }
    if GOLDEN_ZERO_PATTERN
        .iter()
        .any(|&ij| h_bar[ij] != Complex64::new(0.0, 0.0))
    {
        return Err(StcError::NotGoldenMatrix("sparsity pattern violated"));
    }
    for i in 0..2 {
        for j in 2..4 {
            if psi[(i, j)] != Complex64::new(0.0, 0.0) || psi[(j, i)] != Complex64::new(0.0, 0.0)
            {
                return Err(StcError::NotGoldenMatrix("rotation factor is not block diagonal"));
            }
        }
    }
    let (c1, s1) = rotation_block(psi, 0)?;
    let (c2, s2) = rotation_block(psi, 2)?;

    let threshold = RANK_TOLERANCE * h_bar.frobenius_norm();
    // columns 1 and 3 occupy rows 1 and 3
    let (qa, qc, r11, r13, r33) = qr_pair(
        [h_bar[(0, 0)], h_bar[(2, 0)]],
        [h_bar[(0, 2)], h_bar[(2, 2)]],
        threshold,
        (0, 2),
    )?;
    // columns 2 and 4 occupy rows 2 and 4
    let (qb, qd, r22, r24, r44) = qr_pair(
        [h_bar[(1, 1)], h_bar[(3, 1)]],
        [h_bar[(1, 3)], h_bar[(3, 3)]],
        threshold,
        (1, 3),
    )?;

    let mut q_bar = ComplexMat::zeros(4, 4);
    q_bar[(0, 0)] = qa[0];
    q_bar[(2, 0)] = qa[1];
    q_bar[(0, 2)] = qc[0];
    q_bar[(2, 2)] = qc[1];
    q_bar[(1, 1)] = qb[0];
    q_bar[(3, 1)] = qb[1];
    q_bar[(1, 3)] = qd[0];
    q_bar[(3, 3)] = qd[1];

    // G = R̄Ψ: X and Z real, Y complex
    let x = [[c1 * r11, s1 * r11], [-s1 * r22, c1 * r22]];
    let z = [[c2 * r33, s2 * r33], [-s2 * r44, c2 * r44]];
    let y = [[r13 * c2, r13 * s2], [-r24 * s2, r24 * c2]];

    let givens = |m: &[[f64; 2]; 2]| -> [[f64; 2]; 2] {
        let a = m[0][0];
        let b = m[1][0];
        let rho = a.hypot(b);
        [[a / rho, b / rho], [-b / rho, a / rho]]
    };
    let w1 = givens(&x);
    let w2 = givens(&z);

    let real_tri = |w: &[[f64; 2]; 2], m: &[[f64; 2]; 2]| -> [[f64; 2]; 2] {
        let rho = m[0][0].hypot(m[1][0]);
        [
            [rho, w[0][0] * m[0][1] + w[0][1] * m[1][1]],
            // the (2,1) entry is annihilated by construction
            [0.0, w[1][0] * m[0][1] + w[1][1] * m[1][1]],
        ]
    };
    let a = real_tri(&w1, &x);
    let d = real_tri(&w2, &z);

    let mut r = ComplexMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            r[(i, j)] = Complex64::new(a[i][j], 0.0);
            r[(i + 2, j + 2)] = Complex64::new(d[i][j], 0.0);
            r[(i, j + 2)] = y[0][j] * w1[i][0] + y[1][j] * w1[i][1];
        }
    }

    // Q = Q̄ Wᵀ with W = blockdiag(W1, W2)
    let mut wt = ComplexMat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            wt[(j, i)] = Complex64::new(w1[i][j], 0.0);
            wt[(j + 2, i + 2)] = Complex64::new(w2[i][j], 0.0);
        }
    }
    let q = &q_bar * &wt;
    Ok(QrFactors { q, r })
}

/// `h_i^* h_j` for zero-based column indices.
pub fn inner_product_columns(h: &ComplexMat, i: usize, j: usize) -> Complex64 {
    (0..h.rows()).map(|k| h[(k, i)].conj() * h[(k, j)]).sum()
}

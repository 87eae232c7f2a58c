//! Dense real-matrix kernel.
//!
//! Everything here is sized for the small systems this crate builds
//! (state dimensions up to ~16), so the implementations favor clarity
//! and determinism over blocking or vectorization. Values are immutable
//! after construction; all operations return fresh matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::{Error, Result};

/// Default relative tolerance for [`rank`], as a multiple of the largest
/// absolute entry after equilibration.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Relative symmetry tolerance accepted by [`solve_spd`].
const SYMMETRY_TOL: f64 = 1e-9;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting NaN/infinite
    /// values and zero dimensions.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument {
                what: "matrix dimensions must be positive",
            });
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidArgument {
                what: "entry count must equal rows*cols",
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "matrix entries",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for results of arithmetic; skips the finite
    /// check so that diverging iterations (e.g. powers of an unstable
    /// matrix) stay representable.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Convenience constructor from row slices (used heavily in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument {
                what: "matrix dimensions must be positive",
            });
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument {
                what: "all rows must have the same length",
            });
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Column vector from a slice.
    pub fn column(entries: &[f64]) -> Result<Self> {
        Self::new(entries.len(), 1, entries.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Standard matrix product.
    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                op: "matmul",
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Matrix,
        op: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch {
                op,
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(a, b)| f(*a, *b))
            .collect();
        Ok(Matrix::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    /// Repeated self-multiplication; `k = 0` gives the identity.
    pub fn pow(&self, k: usize) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut out = Matrix::identity(self.rows);
        for _ in 0..k {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// Largest absolute entry (0 for all-zero matrices).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Copies the `rr x cc` block with top-left corner `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rr: usize, cc: usize) -> Result<Matrix> {
        if r0 + rr > self.rows || c0 + cc > self.cols {
            return Err(Error::InvalidArgument {
                what: "block exceeds matrix bounds",
            });
        }
        let mut out = Matrix::zeros(rr, cc);
        for i in 0..rr {
            for j in 0..cc {
                out[(i, j)] = self[(r0 + i, c0 + j)];
            }
        }
        Ok(out)
    }

    /// Stacks `self` above `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op: "vstack",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix::from_raw(self.rows + other.rows, self.cols, data))
    }

    /// Places `self` left of `other`.
    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                op: "hstack",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(out)
    }

    /// Symmetric part `(A + A')/2`; cheap hygiene for covariance updates.
    pub fn symmetrized(&self) -> Matrix {
        debug_assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `a * x = b` for symmetric positive definite `a` via Cholesky
/// factorization.
///
/// Symmetry is checked to a relative tolerance of `1e-9`; a non-positive
/// pivot during factorization reports [`Error::NotPositiveDefinite`].
/// There is deliberately no general inverse in this kernel: the Kalman
/// gain and the polynomial fits only ever need an SPD solve.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    if b.rows != a.rows {
        return Err(Error::DimensionMismatch {
            op: "solve_spd",
            left: (a.rows, a.cols),
            right: (b.rows, b.cols),
        });
    }
    let n = a.rows;
    let scale = a.max_abs();
    let mut max_asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_asym = max_asym.max(libm::fabs(a[(i, j)] - a[(j, i)]));
        }
    }
    if max_asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            max_asymmetry: max_asym,
        });
    }

    // Lower-triangular Cholesky factor, stored densely.
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        pivot: acc,
                        index: i,
                    });
                }
                l[(i, j)] = libm::sqrt(acc);
            } else {
                l[(i, j)] = acc / l[(j, j)];
            }
        }
    }

    // Forward/back substitution per right-hand-side column.
    let mut x = Matrix::zeros(n, b.cols);
    for col in 0..b.cols {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[(i, col)];
            for k in 0..i {
                acc -= l[(i, k)] * y[k];
            }
            y[i] = acc / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in (i + 1)..n {
                acc -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = acc / l[(i, i)];
        }
    }
    Ok(x)
}

/// Numerical rank via row reduction with partial pivoting.
///
/// The matrix is first equilibrated (each row, then each column, divided
/// by its largest absolute entry) so that the verdict is insensitive to
/// row and column scaling. A pivot counts toward the rank iff its
/// magnitude exceeds `tol` times the largest absolute entry of the
/// equilibrated matrix. The equilibration matters: observability and
/// controllability matrices of higher-order trend models are sharply
/// graded (entries fall off like `T^k/k!`), and their small pivots are
/// accurate relative to their own row/column scale even when they sit far
/// below the global one.
///
/// A zero matrix has rank 0. Exactly dependent rows cancel exactly, so
/// duplicated rows always reduce the rank regardless of `tol`.
pub fn rank(a: &Matrix, tol: f64) -> usize {
    let nr = a.rows;
    let nc = a.cols;
    let mut m = a.clone();

    // Implicit equilibration, rows then columns.
    for i in 0..nr {
        let mut mx = 0.0f64;
        for j in 0..nc {
            mx = mx.max(libm::fabs(m[(i, j)]));
        }
        if mx > 0.0 {
            for j in 0..nc {
                m[(i, j)] /= mx;
            }
        }
    }
    for j in 0..nc {
        let mut mx = 0.0f64;
        for i in 0..nr {
            mx = mx.max(libm::fabs(m[(i, j)]));
        }
        if mx > 0.0 {
            for i in 0..nr {
                m[(i, j)] /= mx;
            }
        }
    }

    let threshold = tol * m.max_abs();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..nc {
        if row >= nr {
            break;
        }
        // Partial pivoting: largest remaining entry in this column.
        let mut best = 0.0f64;
        let mut best_i = row;
        for i in row..nr {
            let v = libm::fabs(m[(i, col)]);
            if v > best {
                best = v;
                best_i = i;
            }
        }
        if best <= threshold {
            // Column numerically zero below the current row; skip it.
            continue;
        }
        if best_i != row {
            for j in 0..nc {
                let tmp = m[(row, j)];
                m[(row, j)] = m[(best_i, j)];
                m[(best_i, j)] = tmp;
            }
        }
        let pivot = m[(row, col)];
        for i in (row + 1)..nr {
            let factor = m[(i, col)] / pivot;
            if factor != 0.0 {
                for j in col..nc {
                    m[(i, j)] -= factor * m[(row, j)];
                }
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

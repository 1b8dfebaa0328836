//! Dense complex matrices and the factorizations the rest of the crate
//! builds on.
//!
//! Matrices are stored row-major. Decompositions (SVD, Hermitian
//! eigendecomposition, LU) are delegated to `nalgebra`; everything else is
//! implemented directly. All operations are pure functions on immutable
//! values.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

/// Shorthand for a real complex scalar.
pub fn cx(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Cx>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let e = self[(i, j)];
                    format!("{:.4}{:+.4}i", e.re, e.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// All-zero matrix of the given shape. Zero dimensions are allowed.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Cx::ZERO; rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::ONE;
        }
        m
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(diag: &[Cx]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Build a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Build from nested rows, validating rectangularity and finiteness.
    pub fn from_rows(rows: Vec<Vec<Cx>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    ncols
                )));
            }
            entries.extend_from_slice(row);
        }
        let m = ComplexMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        };
        m.check_finite()?;
        Ok(m)
    }

    /// Build from nested real rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        Self::from_fn(rows.len(), rows.first().map_or(0, |r| r.len()), |i, j| {
            cx(rows[i][j], 0.0)
        })
    }

    /// 1x1 matrix.
    pub fn scalar(value: Cx) -> Self {
        ComplexMatrix {
            rows: 1,
            cols: 1,
            entries: vec![value],
        }
    }

    /// Column vector from a slice.
    pub fn col_vector(entries: &[Cx]) -> Self {
        ComplexMatrix {
            rows: entries.len(),
            cols: 1,
            entries: entries.to_vec(),
        }
    }

    /// Row vector from a slice.
    pub fn row_vector(entries: &[Cx]) -> Self {
        ComplexMatrix {
            rows: 1,
            cols: entries.len(),
            entries: entries.to_vec(),
        }
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

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn entries(&self) -> &[Cx] {
        &self.entries
    }

    fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self[(i, j)];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Plain transpose.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise conjugate.
    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    /// Scale every entry.
    pub fn scale(&self, factor: Cx) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factor)
    }

    /// Scale every entry by a real factor.
    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(cx(factor, 0.0))
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Cx::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Entrywise (Schur) product.
    pub fn schur_product(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * rhs[(i, j)])
    }

    /// Extract the block starting at `(r0, c0)` of shape `rows x cols`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Assemble a matrix from a grid of blocks. Block row heights and
    /// column widths must be consistent; zero-dimension blocks are allowed.
    pub fn from_blocks(blocks: &[&[&ComplexMatrix]]) -> Result<ComplexMatrix> {
        if blocks.is_empty() {
            return Ok(ComplexMatrix::zeros(0, 0));
        }
        let block_cols = blocks[0].len();
        for row in blocks {
            if row.len() != block_cols {
                return Err(Error::DimensionMismatch(
                    "ragged block grid".to_string(),
                ));
            }
        }
        let mut row_heights = vec![0usize; blocks.len()];
        let mut col_widths = vec![0usize; block_cols];
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if blk.rows > 0 || blk.cols > 0 {
                    if row_heights[bi] == 0 {
                        row_heights[bi] = blk.rows;
                    } else if blk.rows != row_heights[bi] && blk.rows * blk.cols > 0 {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({bi},{bj}) has {} rows, expected {}",
                            blk.rows, row_heights[bi]
                        )));
                    }
                    if col_widths[bj] == 0 {
                        col_widths[bj] = blk.cols;
                    } else if blk.cols != col_widths[bj] && blk.rows * blk.cols > 0 {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({bi},{bj}) has {} cols, expected {}",
                            blk.cols, col_widths[bj]
                        )));
                    }
                }
            }
        }
        let total_rows: usize = row_heights.iter().sum();
        let total_cols: usize = col_widths.iter().sum();
        let mut out = ComplexMatrix::zeros(total_rows, total_cols);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, blk) in row.iter().enumerate() {
                if !blk.is_empty() {
                    if blk.rows != row_heights[bi] || blk.cols != col_widths[bj] {
                        return Err(Error::DimensionMismatch(format!(
                            "block ({bi},{bj}) is {}x{}, expected {}x{}",
                            blk.rows, blk.cols, row_heights[bi], col_widths[bj]
                        )));
                    }
                    for i in 0..blk.rows {
                        for j in 0..blk.cols {
                            out[(r0 + i, c0 + j)] = blk[(i, j)];
                        }
                    }
                }
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Stack two matrices vertically.
    pub fn vstack(top: &ComplexMatrix, bottom: &ComplexMatrix) -> Result<ComplexMatrix> {
        Self::from_blocks(&[&[top], &[bottom]])
    }

    /// Stack two matrices horizontally.
    pub fn hstack(left: &ComplexMatrix, right: &ComplexMatrix) -> Result<ComplexMatrix> {
        Self::from_blocks(&[&[left, right]])
    }

    /// Scale column `j` by `factors[j]`.
    pub fn scale_cols(&self, factors: &[Cx]) -> ComplexMatrix {
        assert_eq!(factors.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factors[j])
    }

    /// Scale row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[Cx]) -> ComplexMatrix {
        assert_eq!(factors.len(), self.rows);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * factors[i])
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Whether the matrix is Hermitian within `tol` (entrywise).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    fn to_na(&self) -> DMatrix<Cx> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_na(m: &DMatrix<Cx>) -> ComplexMatrix {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Cx;
    fn index(&self, (i, j): (usize, usize)) -> &Cx {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.entries[i * self.cols + j]
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + rhs[(i, j)])
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - rhs[(i, j)])
    }
}

impl std::ops::Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(cx(-1.0, 0.0))
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

// JSON wire format: nested rows of [re, im] pairs.
#[derive(Serialize, Deserialize)]
struct MatrixRepr(Vec<Vec<(f64, f64)>>);

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr(
            (0..m.rows)
                .map(|i| (0..m.cols).map(|j| (m[(i, j)].re, m[(i, j)].im)).collect())
                .collect(),
        )
    }
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;
    fn try_from(repr: MatrixRepr) -> Result<Self> {
        let rows = repr
            .0
            .into_iter()
            .map(|row| row.into_iter().map(|(re, im)| cx(re, im)).collect())
            .collect();
        ComplexMatrix::from_rows(rows)
    }
}

/// Largest singular value. Empty matrices have norm 0.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let sv = m.to_na().singular_values();
    sv.iter().copied().fold(0.0, f64::max)
}

/// Eigendecomposition of a Hermitian matrix: returns eigenvalues in
/// descending order and the matrix of matching eigenvector columns, so
/// that `H = Q diag(lambda) Q*`. The input is symmetrized internally.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    if h.is_empty() {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let sym = h.hermitian_part();
    let eig = nalgebra::SymmetricEigen::new(sym.to_na());
    let n = h.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Nearest positive semidefinite matrix in Frobenius norm: symmetrize,
/// then clip negative eigenvalues to zero.
pub fn psd_project(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, q) = hermitian_eigen(h)?;
    let clipped: Vec<Cx> = values.iter().map(|&v| cx(v.max(0.0), 0.0)).collect();
    let out = q
        .matmul(&ComplexMatrix::diagonal(&clipped))
        .matmul(&q.adjoint());
    Ok(out.hermitian_part())
}

/// Gram factor with the default rank tolerance `1e-10 * lambda_max`.
pub fn gram_factor(k: &ComplexMatrix) -> Result<ComplexMatrix> {
    gram_factor_with_tol(k, None)
}

/// Factor a PSD matrix as `K = U* U` where `U` has one row per eigenvalue
/// above `tol`. Eigenvalues below `-tol` are rejected as not PSD. `U` is
/// unique only up to a left unitary factor.
pub fn gram_factor_with_tol(k: &ComplexMatrix, tol: Option<f64>) -> Result<ComplexMatrix> {
    let (values, q) = hermitian_eigen(k)?;
    let lambda_max = values.first().copied().unwrap_or(0.0).max(0.0);
    let tol = tol.unwrap_or(1e-10 * lambda_max);
    if let Some(&min) = values.last() {
        if min < -tol {
            return Err(Error::NotPsd { eig_min: min });
        }
    }
    let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] > tol).collect();
    let n = k.rows();
    // U = diag(sqrt(lambda)) * Q_kept^*, one row per retained eigenvalue.
    let u = ComplexMatrix::from_fn(kept.len(), n, |r, j| {
        q[(j, kept[r])].conj() * values[kept[r]].sqrt()
    });
    Ok(u)
}

/// Result of [`solve_on_span`]: the map `V`, the Gram mismatch
/// `max |X*X - Y*Y|` (a warning payload, not a failure), and the amount by
/// which singular values of `V` had to be clipped to reach norm 1.
#[derive(Debug, Clone)]
pub struct SpanMap {
    pub v: ComplexMatrix,
    pub gram_mismatch: f64,
    pub clip: f64,
}

/// Least-squares map sending column `x_j` to `y_j`, extended by zero on
/// the orthogonal complement of the column span of `X`: `V = Y X^+`.
///
/// When `X*X = Y*Y` the map is a contraction; numerical excess above norm
/// 1 is clipped and reported.
pub fn solve_on_span(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<SpanMap> {
    if x.cols() != y.cols() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} columns, Y has {}",
            x.cols(),
            y.cols()
        )));
    }
    let gram_mismatch = x
        .adjoint()
        .matmul(x)
        .max_abs_diff(&y.adjoint().matmul(y));
    if x.cols() == 0 {
        // Nothing to match: the zero map on the whole space.
        return Ok(SpanMap {
            v: ComplexMatrix::zeros(y.rows(), x.rows()),
            gram_mismatch,
            clip: 0.0,
        });
    }
    let pinv = pseudo_inverse(x);
    let v = y.matmul(&pinv);
    let (clip, v) = clip_to_contraction(&v);
    Ok(SpanMap {
        v,
        gram_mismatch,
        clip,
    })
}

fn pseudo_inverse(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = nalgebra::SVD::new(m.to_na(), true, true);
    let u = svd.u.as_ref().expect("SVD with U");
    let v_t = svd.v_t.as_ref().expect("SVD with V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * m.rows().max(m.cols()) as f64 * f64::EPSILON * 8.0;
    // V * S^+ * U^*
    let r = svd.singular_values.len();
    let mut sp = DMatrix::<Cx>::zeros(r, r);
    for i in 0..r {
        let s = svd.singular_values[i];
        if s > cutoff {
            sp[(i, i)] = cx(1.0 / s, 0.0);
        }
    }
    let pinv = v_t.adjoint() * sp * u.adjoint();
    ComplexMatrix::from_na(&pinv)
}

/// Clip singular values above 1 down to 1. Returns the clip magnitude
/// (largest singular value minus 1, when positive) and the clipped matrix.
fn clip_to_contraction(v: &ComplexMatrix) -> (f64, ComplexMatrix) {
    if v.is_empty() {
        return (0.0, v.clone());
    }
    let svd = nalgebra::SVD::new(v.to_na(), true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax <= 1.0 {
        return (0.0, v.clone());
    }
    let u = svd.u.as_ref().expect("SVD with U");
    let v_t = svd.v_t.as_ref().expect("SVD with V^T");
    let r = svd.singular_values.len();
    let mut s = DMatrix::<Cx>::zeros(r, r);
    for i in 0..r {
        s[(i, i)] = cx(svd.singular_values[i].min(1.0), 0.0);
    }
    let clipped = u * s * v_t;
    (smax - 1.0, ComplexMatrix::from_na(&clipped))
}

/// Solve `A X = B` by LU with partial pivoting. A reciprocal-condition
/// estimate (ratio of extreme `|U_ii|`) below 1e-13 is treated as singular.
pub fn lu_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    if a.is_empty() {
        return Ok(ComplexMatrix::zeros(0, b.cols()));
    }
    let lu = nalgebra::LU::new(a.to_na());
    let u = lu.u();
    let mut dmin = f64::INFINITY;
    let mut dmax: f64 = 0.0;
    for i in 0..a.rows() {
        let d = u[(i, i)].norm();
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    if dmax == 0.0 || dmin / dmax < 1e-13 {
        return Err(Error::SingularSystem);
    }
    match lu.solve(&b.to_na()) {
        Some(x) => Ok(ComplexMatrix::from_na(&x)),
        None => Err(Error::SingularSystem),
    }
}

/// Determinant of a square matrix.
pub fn determinant(a: &ComplexMatrix) -> Result<Cx> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.is_empty() {
        return Ok(Cx::ONE);
    }
    Ok(a.to_na().determinant())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let m = random_matrix(rng, n, n);
        let qr = m.to_na().qr();
        ComplexMatrix::from_na(&qr.q())
    }

    #[test]
    fn op_norm_fixed_cases() {
        assert_eq!(op_norm(&ComplexMatrix::zeros(2, 2)), 0.0);
        assert!((op_norm(&ComplexMatrix::identity(2)) - 1.0).abs() < 1e-14);
        let nilpotent =
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!((op_norm(&nilpotent) - 1.0).abs() < 1e-14);
        assert_eq!(op_norm(&ComplexMatrix::zeros(0, 3)), 0.0);
    }

    #[test]
    fn op_norm_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 4, 3);
            let u = random_unitary(&mut rng, 4);
            let w = random_unitary(&mut rng, 3);
            let rotated = u.matmul(&m).matmul(&w);
            assert!((op_norm(&rotated) - op_norm(&m)).abs() < 1e-10);
        }
    }

    #[test]
    fn psd_project_clips_negative_eigenvalues() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        let p = psd_project(&h).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert!(p.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn psd_project_fixed_point_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 4, 4);
            let psd = m.adjoint().matmul(&m);
            let p = psd_project(&psd).unwrap();
            assert!(p.max_abs_diff(&psd) < 1e-12 * (1.0 + psd.max_abs()));
            let h = random_matrix(&mut rng, 4, 4).hermitian_part();
            let p1 = psd_project(&h).unwrap();
            let p2 = psd_project(&p1).unwrap();
            assert!(p2.max_abs_diff(&p1) < 1e-12);
            let (values, _) = hermitian_eigen(&p1).unwrap();
            assert!(values.iter().all(|&v| v >= -1e-12));
        }
        let z = ComplexMatrix::zeros(3, 3);
        assert!(psd_project(&z).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn psd_project_rejects_non_square() {
        assert!(matches!(
            psd_project(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn gram_factor_identity_and_rank_one() {
        let u = gram_factor(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(u.rows(), 2);
        assert!(u
            .adjoint()
            .matmul(&u)
            .max_abs_diff(&ComplexMatrix::identity(2))
            < 1e-12);

        let k = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let u = gram_factor(&k).unwrap();
        assert_eq!(u.rows(), 1);
        assert!(u.adjoint().matmul(&u).max_abs_diff(&k) < 1e-12);
    }

    #[test]
    fn gram_factor_rank_two_example() {
        let k = ComplexMatrix::from_real_rows(&[
            &[0.5, 0.5, 0.5],
            &[0.5, 0.75, 0.25],
            &[0.5, 0.25, 0.75],
        ]);
        let u = gram_factor(&k).unwrap();
        assert_eq!(u.rows(), 2);
        assert_eq!(u.cols(), 3);
        let resid = u.adjoint().matmul(&u).max_abs_diff(&k);
        assert!(resid < 1e-10 * k.frobenius_norm().max(1.0));
    }

    #[test]
    fn gram_factor_rejects_indefinite() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -0.5]]);
        assert!(matches!(gram_factor(&h), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn gram_factor_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let m = random_matrix(&mut rng, 3, 5);
            let k = m.adjoint().matmul(&m); // PSD, rank <= 3
            let u = gram_factor(&k).unwrap();
            assert!(u.rows() <= 3);
            let resid = u.adjoint().matmul(&u).max_abs_diff(&k);
            assert!(resid < 1e-10 * k.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn solve_on_span_identity_columns() {
        let x = ComplexMatrix::identity(3);
        let map = solve_on_span(&x, &x).unwrap();
        assert!(map.v.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
        assert!(map.gram_mismatch < 1e-14);
    }

    #[test]
    fn solve_on_span_rank_one_isometry() {
        let x = ComplexMatrix::col_vector(&[Cx::ONE, Cx::ZERO, Cx::ZERO]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let y = ComplexMatrix::col_vector(&[Cx::ZERO, cx(h, 0.0), cx(h, 0.0)]);
        let map = solve_on_span(&x, &y).unwrap();
        let expected = y.matmul(&x.adjoint());
        assert!(map.v.max_abs_diff(&expected) < 1e-12);
        assert!((op_norm(&map.v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn solve_on_span_maps_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let x = random_matrix(&mut rng, 5, 3);
            let q = random_unitary(&mut rng, 5);
            let y = q.matmul(&x); // Y*Y = X*X exactly up to roundoff
            let map = solve_on_span(&x, &y).unwrap();
            assert!(map.gram_mismatch < 1e-12 * x.frobenius_norm().powi(2).max(1.0));
            let resid = map.v.matmul(&x).max_abs_diff(&y);
            assert!(resid < 1e-9, "residual {resid}");
        }
    }

    #[test]
    fn solve_on_span_reports_gram_mismatch() {
        let x = ComplexMatrix::col_vector(&[Cx::ONE]);
        let y = ComplexMatrix::col_vector(&[cx(2.0, 0.0)]);
        let map = solve_on_span(&x, &y).unwrap();
        assert!((map.gram_mismatch - 3.0).abs() < 1e-14);
        // The map is still produced, clipped back to a contraction.
        assert!(map.clip > 0.9);
        assert!(op_norm(&map.v) <= 1.0 + 1e-12);
    }

    #[test]
    fn lu_solve_and_determinant() {
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let b = ComplexMatrix::col_vector(&[cx(3.0, 0.0), cx(4.0, 0.0)]);
        let x = lu_solve(&a, &b).unwrap();
        assert!(a.matmul(&x).max_abs_diff(&b) < 1e-12);
        let det = determinant(&a).unwrap();
        assert!((det - cx(5.0, 0.0)).norm() < 1e-12);

        let singular = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(lu_solve(&singular, &b).is_err());
    }

    #[test]
    fn block_assembly_round_trip() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = ComplexMatrix::col_vector(&[cx(5.0, 0.0), cx(6.0, 0.0)]);
        let c = ComplexMatrix::row_vector(&[cx(7.0, 0.0), cx(8.0, 0.0)]);
        let d = ComplexMatrix::scalar(cx(9.0, 0.0));
        let m = ComplexMatrix::from_blocks(&[&[&a, &b], &[&c, &d]]).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.cols(), 3);
        assert_eq!(m[(2, 2)], cx(9.0, 0.0));
        assert!(m.block(0, 0, 2, 2).max_abs_diff(&a) < 1e-15);
        // Zero-dimension blocks are legal.
        let empty = ComplexMatrix::zeros(0, 2);
        let m2 = ComplexMatrix::from_blocks(&[&[&a], &[&empty]]).unwrap();
        assert_eq!(m2.rows(), 2);
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::from_fn(2, 3, |i, j| cx(i as f64, j as f64));
        let text = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        let bad: std::result::Result<ComplexMatrix, _> =
            serde_json::from_str("[[[1.0,0.0]],[[1.0,0.0],[2.0,0.0]]]");
        assert!(bad.is_err());
    }
}

//! Dense linear algebra kernel shared by every other module.
//!
//! Everything here is row-major `f64`. The LU factorization uses partial
//! pivoting and skips exact zeros during elimination, which keeps the cost of
//! factoring the block-banded stage Jacobians close to linear in the
//! bandwidth without changing a single floating-point operation on the
//! nonzero entries.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row slices. All rows must have the same length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self[(i, p)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(p);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    /// Adds `alpha * block` into the sub-block whose top-left corner is `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, alpha: f64, block: &Self) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for i in 0..block.rows {
            let src = block.row(i);
            let dst = &mut self.row_mut(r0 + i)[c0..c0 + block.cols];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += alpha * s;
            }
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Extracts the submatrix on the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.rows) {
            return Err(Error::Domain(format!("row index {i} out of range {}", self.rows)));
        }
        if let Some(&j) = cols.iter().find(|&&j| j >= self.cols) {
            return Err(Error::Domain(format!("column index {j} out of range {}", self.cols)));
        }
        Ok(Self::from_fn(rows.len(), cols.len(), |a, b| self[(rows[a], cols[b])]))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Packed LU factors of a row-permuted square matrix, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: DenseMatrix,
    /// `perm[i]` is the original row that ended up in position `i`.
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Unit lower triangular factor.
    pub fn lower(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Greater => self.lu[(i, j)],
            std::cmp::Ordering::Equal => 1.0,
            std::cmp::Ordering::Less => 0.0,
        })
    }

    pub fn upper(&self) -> DenseMatrix {
        let n = self.dim();
        DenseMatrix::from_fn(n, n, |i, j| if j >= i { self.lu[(i, j)] } else { 0.0 })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                if row[j] != 0.0 {
                    acc -= row[j] * x[j];
                }
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for j in i + 1..n {
                if row[j] != 0.0 {
                    acc -= row[j] * x[j];
                }
            }
            x[i] = acc / row[i];
        }
        x
    }
}

/// LU factorization with partial (row) pivoting.
///
/// A pivot whose magnitude does not exceed `n * eps * max|A|` is treated as zero.
pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    if !a.is_square() {
        return Err(Error::Domain(format!(
            "LU needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    if !a.is_finite() {
        return Err(Error::Domain("LU input has non-finite entries".into()));
    }
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let threshold = (n.max(1) as f64) * f64::EPSILON * a.max_abs();
    let mut nz_cols = Vec::with_capacity(n);

    for k in 0..n {
        let mut piv_row = k;
        let mut piv_abs = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > piv_abs {
                piv_abs = v;
                piv_row = i;
            }
        }
        if piv_abs <= threshold || piv_abs == 0.0 {
            return Err(Error::SingularMatrix { column: k });
        }
        if piv_row != k {
            let (lo, hi) = lu.data.split_at_mut(piv_row * n);
            lo[k * n..(k + 1) * n].swap_with_slice(&mut hi[..n]);
            perm.swap(k, piv_row);
        }
        let pivot = lu[(k, k)];
        nz_cols.clear();
        nz_cols.extend((k + 1..n).filter(|&j| lu[(k, j)] != 0.0));

        let (upper, lower) = lu.data.split_at_mut((k + 1) * n);
        let prow = &upper[k * n..];
        for row in lower.chunks_exact_mut(n) {
            if row[k] == 0.0 {
                continue;
            }
            let l = row[k] / pivot;
            row[k] = l;
            for &j in &nz_cols {
                row[j] -= l * prow[j];
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

/// Factor and solve in one call.
pub fn lu_solve(a: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    Ok(lu_factor(a)?.solve(rhs))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Compact copy of `x` on `indices`.
pub fn gather(x: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| {
            x.get(i)
                .copied()
                .ok_or_else(|| Error::Domain(format!("index {i} out of range {}", x.len())))
        })
        .collect()
}

/// Writes `compact` back into `out` at `indices`; other entries are untouched.
pub fn scatter(compact: &[f64], indices: &[usize], out: &mut [f64]) -> Result<()> {
    if compact.len() != indices.len() {
        return Err(Error::Domain(format!(
            "scatter length mismatch: {} values for {} indices",
            compact.len(),
            indices.len()
        )));
    }
    for (&v, &i) in compact.iter().zip(indices) {
        let n = out.len();
        *out
            .get_mut(i)
            .ok_or_else(|| Error::Domain(format!("index {i} out of range {n}")))? = v;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let rhs = [1.0, -2.0, 3.5];
        let x = lu_solve(&DenseMatrix::identity(3), &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn hilbert_2x2() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.5], [0.5, 1.0 / 3.0]]);
        let x = lu_solve(&a, &[1.0, 0.0]).unwrap();
        assert!((x[0] - 4.0).abs() < 1e-12);
        assert!((x[1] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn random_50_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(&mut rng, 50);
        let rhs: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &rhs).unwrap();
        let ax = a.matvec(&x);
        let res: Vec<f64> = ax.iter().zip(&rhs).map(|(p, q)| p - q).collect();
        let bound = 1e-10 * (a.norm_inf() * norm_inf(&x) + norm_inf(&rhs));
        assert!(norm_inf(&res) <= bound);
    }

    #[test]
    fn pa_equals_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(&mut rng, 12);
        let f = lu_factor(&a).unwrap();
        let lu = f.lower().matmul(&f.upper());
        for i in 0..12 {
            for j in 0..12 {
                let pa = a[(f.permutation()[i], j)];
                assert!((pa - lu[(i, j)]).abs() <= 1e-12 * a.max_abs());
            }
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(lu_factor(&a), Err(Error::SingularMatrix { .. })));
        let z = DenseMatrix::zeros(3, 3);
        assert!(matches!(lu_factor(&z), Err(Error::SingularMatrix { column: 0 })));
    }

    #[test]
    fn matvec_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 20);
        let x: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = a.matvec(&x);
        for i in 0..20 {
            let mut acc = 0.0;
            for j in 0..20 {
                acc += a[(i, j)] * x[j];
            }
            assert!((acc - y[i]).abs() <= 1e-13);
        }
    }

    #[test]
    fn unit_vector_norm() {
        assert_eq!(norm2(&[1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn gather_scatter_zero_fill() {
        let d = [1.0, 2.0, 3.0, 4.0, 5.0];
        let inactive = [0, 2, 3];
        let compact = gather(&d, &inactive).unwrap();
        let mut out = vec![0.0; 5];
        scatter(&compact, &inactive, &mut out).unwrap();
        assert_eq!(out, vec![1.0, 0.0, 3.0, 4.0, 0.0]);
        assert!(gather(&d, &[5]).is_err());
        assert!(scatter(&[1.0], &[9], &mut out).is_err());
    }

    #[test]
    fn submatrix_bounds() {
        let a = DenseMatrix::identity(3);
        let s = a.submatrix(&[0, 2], &[0, 2]).unwrap();
        assert_eq!(s, DenseMatrix::identity(2));
        assert!(a.submatrix(&[3], &[0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn lu_residual_property(seed in 0u64..10_000, n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // Diagonal shift keeps the condition number moderate.
            let mut a = random_matrix(&mut rng, n);
            for i in 0..n { a[(i, i)] += 2.0 * n as f64 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }; }
            let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = lu_solve(&a, &rhs).unwrap();
            let ax = a.matvec(&x);
            let res = ax.iter().zip(&rhs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            proptest::prop_assert!(res <= 1e-10 * (a.norm_inf() * norm_inf(&x) + norm_inf(&rhs)));
        }

        #[test]
        fn gather_scatter_bijection(values in proptest::collection::vec(-1e3f64..1e3, 1..40), mask_seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
            let idx: Vec<usize> = (0..values.len()).filter(|_| rng.gen_bool(0.6)).collect();
            let compact = gather(&values, &idx).unwrap();
            let mut back = vec![f64::NAN; values.len()];
            scatter(&compact, &idx, &mut back).unwrap();
            for &i in &idx { proptest::prop_assert_eq!(back[i], values[i]); }
            proptest::prop_assert_eq!(gather(&back, &idx).unwrap(), compact);
        }
    }
}

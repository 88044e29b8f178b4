//! Dense square and symmetric matrices plus the observation container.

use std::borrow::Cow;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Row access shared by the square and symmetric containers.
pub trait MatrixRows {
    fn order(&self) -> usize;
    fn row_values(&self, i: usize) -> Cow<'_, [f64]>;
}

/// A general `p x p` real matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix(DMatrix<f64>);

impl SquareMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        Ok(Self(m))
    }

    pub fn zeros(p: usize) -> Self {
        Self(DMatrix::zeros(p, p))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(p: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != p * p {
            return Err(Error::Dimension(format!(
                "{} entries cannot form a {p}x{p} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(p, p, entries))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// `(M + Mᵀ) / 2`, bitwise symmetric.
    pub fn symmetric_part(&self) -> SymmetricMatrix {
        SymmetricMatrix::symmetrize(&self.0)
    }

    /// Frobenius norm of `M - Mᵀ`.
    pub fn asymmetry(&self) -> f64 {
        let p = self.order();
        let mut acc = 0.0;
        for j in 0..p {
            for i in 0..p {
                let d = self.0[(i, j)] - self.0[(j, i)];
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

impl MatrixRows for SquareMatrix {
    fn order(&self) -> usize {
        self.0.nrows()
    }

    fn row_values(&self, i: usize) -> Cow<'_, [f64]> {
        Cow::Owned(self.row(i))
    }
}

impl MatrixRows for SymmetricMatrix {
    fn order(&self) -> usize {
        self.0.nrows()
    }

    fn row_values(&self, i: usize) -> Cow<'_, [f64]> {
        Cow::Borrowed(self.row(i))
    }
}

/// A symmetric matrix whose two triangles are bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "expected a non-empty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        check_finite(&m)?;
        let p = m.nrows();
        for j in 0..p {
            for i in (j + 1)..p {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self(m))
    }

    pub fn zeros(p: usize) -> Self {
        Self(DMatrix::zeros(p, p))
    }

    pub fn identity(p: usize) -> Self {
        Self(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        let mut m = DMatrix::zeros(p, p);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self(m)
    }

    pub fn from_rows(p: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != p * p {
            return Err(Error::Dimension(format!(
                "{} entries cannot form a {p}x{p} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(p, p, entries))
    }

    /// Builds the matrix from a function evaluated on the upper triangle (`i <= j`).
    pub fn from_upper_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self(m)
    }

    /// Averages `m` with its transpose. Panics on non-square input.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize needs a square matrix");
        let p = m.nrows();
        Self::from_upper_fn(p, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Row `i`, read as column `i` of the column-major storage.
    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.order();
        &self.0.as_slice()[i * p..(i + 1) * p]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_square(&self) -> SquareMatrix {
        SquareMatrix(self.0.clone())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Off-diagonal entries with `i < j`, in column-major order of the upper triangle.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let p = self.order();
        (0..p).flat_map(move |j| (0..j).map(move |i| (i, j, self.0[(i, j)])))
    }

    /// Copy of the matrix with off-diagonal entries zeroed.
    pub fn diagonal_part(&self) -> Self {
        Self::from_diagonal(self.0.diagonal().as_slice())
    }

    /// Applies a symmetric relabeling: `out[perm[i], perm[j]] = self[i, j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = self.order();
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..p {
                m[(perm[i], perm[j])] = self.0[(i, j)];
            }
        }
        Self(m)
    }
}

/// `n` samples of `p` features, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two samples, got {}",
                values.nrows()
            )));
        }
        if values.ncols() == 0 {
            return Err(Error::Dimension("dataset has no features".into()));
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn from_rows(n: usize, p: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * p {
            return Err(Error::Dimension(format!(
                "{} entries cannot form a {n}x{p} dataset",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, p, entries))
    }

    pub fn samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    /// Maximum-likelihood covariance `(1/n) Σ (x_k - x̄)(x_k - x̄)ᵀ`.
    pub fn empirical_covariance(&self) -> SymmetricMatrix {
        let n = self.samples();
        let p = self.features();
        let means = self.values.row_mean();
        let mut centered = self.values.clone();
        for k in 0..n {
            for j in 0..p {
                centered[(k, j)] -= means[j];
            }
        }
        let cross = centered.transpose() * &centered / n as f64;
        SymmetricMatrix::from_upper_fn(p, |i, j| cross[(i, j)])
    }
}

//! Real symmetric operators over a Fock basis.
//!
//! Every operator implements [`LinearOperator`]. Assembled operators come in
//! two representations with identical `apply` semantics: an explicit
//! row-compressed matrix and a matrix-free row generator that recomputes
//! the matrix elements on every application.

use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Square linear map acting on real or complex vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = A x` for complex `x`; the operator itself is real.
    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let mut yr = vec![0.0; n];
        let mut yi = vec![0.0; n];
        self.apply(&re, &mut yr);
        self.apply(&im, &mut yi);
        for ((out, r), i) in y.iter_mut().zip(yr).zip(yi) {
            *out = Complex64::new(r, i);
        }
    }

    /// Dense copy, built column by column from `apply`.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut dense = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            for (i, v) in col.iter().enumerate() {
                dense[(i, j)] = *v;
            }
        }
        dense
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        for (i, out) in y.iter_mut().enumerate().take(n) {
            *out = (0..n).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

/// Produces the nonzero elements of one row of a symmetric matrix.
///
/// Elements may be emitted more than once for the same column; repeated
/// emissions add up.
pub trait RowGenerator: Send + Sync {
    fn dim(&self) -> usize;
    fn row(&self, i: usize, emit: &mut dyn FnMut(usize, f64));
}

/// Row-compressed real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Collect every row of `gen`, merging repeated columns and dropping
    /// exact zeros. Columns are sorted within each row.
    pub fn from_generator(gen: &dyn RowGenerator) -> Self {
        let dim = gen.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        row_ptr.push(0);
        for i in 0..dim {
            scratch.clear();
            gen.row(i, &mut |j, v| scratch.push((j, v)));
            push_merged(&mut scratch, &mut cols, &mut values);
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != 0.0 {
                cols.push(i as u32);
                values.push(d);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    /// Build from (row, col, value) triplets; duplicates add up.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        for mut row in rows {
            push_merged(&mut row, &mut cols, &mut values);
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&j, &v)| (j as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&(j as u32)) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest |A_ij - A_ji| over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn submatrix(&self, indices: &[usize]) -> CsrMatrix {
        let mut position = vec![usize::MAX; self.dim];
        for (new, &old) in indices.iter().enumerate() {
            position[old] = new;
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut values = Vec::new();
        let mut scratch = Vec::new();
        for &old in indices {
            scratch.clear();
            for (j, v) in self.row(old) {
                if position[j] != usize::MAX {
                    scratch.push((position[j], v));
                }
            }
            push_merged(&mut scratch, &mut cols, &mut values);
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            dim: indices.len(),
            row_ptr,
            cols,
            values,
        }
    }

    /// Coordinate-format dump, one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# dim={} nnz={}", self.dim, self.nnz())?;
        writeln!(out, "row,col,value")?;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                writeln!(out, "{i},{j},{v:.17e}")?;
            }
        }
        Ok(())
    }
}

fn push_merged(scratch: &mut [(usize, f64)], cols: &mut Vec<u32>, values: &mut Vec<f64>) {
    scratch.sort_by_key(|&(j, _)| j);
    let mut iter = scratch.iter().copied().peekable();
    while let Some((j, mut v)) = iter.next() {
        while let Some(&(j2, v2)) = iter.peek() {
            if j2 != j {
                break;
            }
            v += v2;
            iter.next();
        }
        if v != 0.0 {
            cols.push(j as u32);
            values.push(v);
        }
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate().take(self.dim) {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (&j, &v) in self.cols[range.clone()].iter().zip(&self.values[range]) {
                acc += v * x[j as usize];
            }
            *out = acc;
        }
    }

    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, out) in y.iter_mut().enumerate().take(self.dim) {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = Complex64::new(0.0, 0.0);
            for (&j, &v) in self.cols[range.clone()].iter().zip(&self.values[range]) {
                acc += x[j as usize] * v;
            }
            *out = acc;
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                dense[(i, j)] = v;
            }
        }
        dense
    }
}

/// Operator whose rows are regenerated on every application.
#[derive(Clone)]
pub struct MatrixFree {
    gen: Arc<dyn RowGenerator>,
}

impl MatrixFree {
    pub fn new(gen: Arc<dyn RowGenerator>) -> Self {
        Self { gen }
    }
}

impl std::fmt::Debug for MatrixFree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatrixFree")
            .field("dim", &self.gen.dim())
            .finish()
    }
}

impl LinearOperator for MatrixFree {
    fn dim(&self) -> usize {
        self.gen.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, out) in y.iter_mut().enumerate().take(self.gen.dim()) {
            let mut acc = 0.0;
            self.gen.row(i, &mut |j, v| acc += v * x[j]);
            *out = acc;
        }
    }
}

/// Assembled real symmetric operator.
#[derive(Debug, Clone)]
pub enum SparseHermitianOperator {
    Explicit(CsrMatrix),
    MatrixFree(MatrixFree),
}

impl SparseHermitianOperator {
    /// Explicit storage up to this dimension, matrix-free above.
    pub const EXPLICIT_LIMIT: usize = 200_000;

    pub fn from_generator(gen: Arc<dyn RowGenerator>) -> Self {
        Self::from_generator_with_limit(gen, Self::EXPLICIT_LIMIT)
    }

    pub fn from_generator_with_limit(gen: Arc<dyn RowGenerator>, explicit_limit: usize) -> Self {
        if gen.dim() <= explicit_limit {
            Self::Explicit(CsrMatrix::from_generator(gen.as_ref()))
        } else {
            Self::MatrixFree(MatrixFree::new(gen))
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::Explicit(CsrMatrix::diagonal_matrix(diag))
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, Self::Explicit(_))
    }

    pub fn as_csr(&self) -> Option<&CsrMatrix> {
        match self {
            Self::Explicit(m) => Some(m),
            Self::MatrixFree(_) => None,
        }
    }

    /// Explicit copy regardless of the current representation.
    pub fn to_csr(&self) -> CsrMatrix {
        match self {
            Self::Explicit(m) => m.clone(),
            Self::MatrixFree(mf) => CsrMatrix::from_generator(mf.gen.as_ref()),
        }
    }

    /// Principal submatrix on `indices`, always explicit.
    pub fn restrict(&self, indices: &[usize]) -> SparseHermitianOperator {
        match self {
            Self::Explicit(m) => Self::Explicit(m.submatrix(indices)),
            Self::MatrixFree(mf) => {
                let mut position = vec![usize::MAX; mf.gen.dim()];
                for (new, &old) in indices.iter().enumerate() {
                    position[old] = new;
                }
                let mut triplets = Vec::new();
                for (new, &old) in indices.iter().enumerate() {
                    mf.gen.row(old, &mut |j, v| {
                        if position[j] != usize::MAX {
                            triplets.push((new, position[j], v));
                        }
                    });
                }
                Self::Explicit(CsrMatrix::from_triplets(indices.len(), &triplets))
            }
        }
    }
}

impl LinearOperator for SparseHermitianOperator {
    fn dim(&self) -> usize {
        match self {
            Self::Explicit(m) => m.dim(),
            Self::MatrixFree(m) => m.dim(),
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            Self::Explicit(m) => m.apply(x, y),
            Self::MatrixFree(m) => m.apply(x, y),
        }
    }

    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        match self {
            Self::Explicit(m) => m.apply_complex(x, y),
            Self::MatrixFree(m) => m.apply_complex(x, y),
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Explicit(m) => m.to_dense(),
            Self::MatrixFree(m) => m.to_dense(),
        }
    }
}

/// Sum of two operators of equal dimension, applied lazily.
pub struct SumOperator<'a> {
    pub terms: Vec<(f64, &'a dyn LinearOperator)>,
}

impl LinearOperator for SumOperator<'_> {
    fn dim(&self) -> usize {
        self.terms.first().map_or(0, |(_, op)| op.dim())
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        y.iter_mut().for_each(|v| *v = 0.0);
        for (scale, op) in &self.terms {
            op.apply(x, &mut tmp);
            for (out, t) in y.iter_mut().zip(&tmp) {
                *out += scale * t;
            }
        }
    }
}

//! Lowest eigenpairs of real symmetric operators.
//!
//! Small problems are handed to a dense symmetric eigensolver. Larger ones
//! use a thick-restart (Krylov-Schur) Lanczos iteration with a block of
//! start vectors and full reorthogonalization. The block size bounds the
//! multiplicity of degenerate eigenvalues that can be resolved.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dense,
    Krylov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Residual tolerance ‖Hv - λv‖.
    pub tol: f64,
    /// Problems up to this dimension are solved densely.
    pub dense_limit: usize,
    /// Number of independent start vectors.
    pub block_size: usize,
    /// Krylov basis size before a restart; derived from the request if `None`.
    pub max_subspace: Option<usize>,
    pub max_matvecs: usize,
    /// Seed for random start vectors.
    pub seed: u64,
    /// Override the dense/iterative choice.
    pub method: Option<Method>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            dense_limit: 400,
            block_size: 4,
            max_subspace: None,
            max_matvecs: 200_000,
            seed: 0x5eed,
            method: None,
        }
    }
}

impl SolverConfig {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = Some(method);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn method_for(&self, dim: usize) -> Method {
        self.method.unwrap_or(if dim <= self.dense_limit {
            Method::Dense
        } else {
            Method::Krylov
        })
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

impl EigenResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// E_j - E_0 for every level.
    pub fn relative_energies(&self) -> Vec<f64> {
        let e0 = self.eigenvalues.first().copied().unwrap_or(0.0);
        self.eigenvalues.iter().map(|e| e - e0).collect()
    }

    pub fn gap(&self) -> Option<f64> {
        (self.len() >= 2).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.eigenvectors[0]
    }
}

/// The `count` lowest eigenpairs of `op`. `warm` vectors seed the Krylov
/// iteration and are ignored by the dense path.
pub fn lowest_eigenpairs(
    op: &dyn LinearOperator,
    count: usize,
    config: &SolverConfig,
    warm: Option<&[Vec<f64>]>,
) -> Result<EigenResult> {
    let n = op.dim();
    if count == 0 || count > n {
        return Err(Error::InvalidParameter(format!(
            "requested {count} eigenpairs of a {n}-dimensional operator"
        )));
    }
    match config.method_for(n) {
        Method::Dense => Ok(dense(op, count)),
        Method::Krylov if count == n => Ok(dense(op, count)),
        Method::Krylov => krylov_schur(op, count, config, warm.unwrap_or(&[])),
    }
}

fn dense(op: &dyn LinearOperator, count: usize) -> EigenResult {
    let n = op.dim();
    let mut a = op.to_dense();
    // symmetrize against round-off in generated entries
    let at = a.transpose();
    a = (a + at) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        values.push(eig.eigenvalues[i]);
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        fix_sign(&mut v);
        vectors.push(v);
    }
    let residuals = residuals(op, &values, &vectors);
    EigenResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        matvecs: 0,
    }
}

/// Make the largest-magnitude component positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residuals(op: &dyn LinearOperator, values: &[f64], vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut av = vec![0.0; op.dim()];
    values
        .iter()
        .zip(vectors)
        .map(|(&lambda, v)| {
            op.apply(v, &mut av);
            av.iter()
                .zip(v)
                .map(|(a, x)| (a - lambda * x).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Columns `picked` of `coeffs` expressed in `basis`, as one blocked product.
fn combine(basis: &[Vec<f64>], coeffs: &DMatrix<f64>, picked: &[usize]) -> Vec<Vec<f64>> {
    let n = basis.first().map_or(0, Vec::len);
    let v = DMatrix::from_fn(n, basis.len(), |i, j| basis[j][i]);
    let s = coeffs.select_columns(picked);
    let y = v * s;
    y.column_iter().map(|c| c.iter().copied().collect()).collect()
}

/// Orthogonalize `w` against `basis` twice and append it if anything is
/// left. Returns whether the vector was added.
fn try_append(basis: &mut Vec<Vec<f64>>, mut w: Vec<f64>) -> bool {
    let before = norm(&w);
    if before == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &w);
            axpy(-c, b, &mut w);
        }
    }
    let after = norm(&w);
    if after <= 1e-10 * before {
        return false;
    }
    w.iter_mut().for_each(|x| *x /= after);
    basis.push(w);
    true
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()
}

fn append_random(basis: &mut Vec<Vec<f64>>, rng: &mut ChaCha8Rng, n: usize) -> bool {
    (0..8).any(|_| try_append(basis, random_vector(rng, n)))
}

fn krylov_schur(
    op: &dyn LinearOperator,
    nev: usize,
    config: &SolverConfig,
    warm: &[Vec<f64>],
) -> Result<EigenResult> {
    let n = op.dim();
    let block = config.block_size.clamp(1, n);
    let m_max = config
        .max_subspace
        .unwrap_or((2 * nev + 2 * block + 20).max(nev + 60))
        .max(nev + block)
        .min(n);
    let cap = (m_max + block).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    for w in warm.iter().filter(|w| w.len() == n) {
        if basis.len() < cap {
            try_append(&mut basis, w.clone());
        }
    }
    while basis.len() < block {
        if !append_random(&mut basis, &mut rng, n) {
            break;
        }
    }

    // Projected matrix T = Vᵀ A V, filled column by column as vectors are
    // expanded; rows of not-yet-expanded vectors hold their couplings.
    let mut t = DMatrix::<f64>::zeros(cap, cap);
    let mut expanded = 0;
    let mut matvecs = 0;
    let mut target = config.tol;
    let mut aw = vec![0.0; n];
    let mut best_residuals = vec![f64::INFINITY; nev];

    loop {
        while expanded < m_max && expanded < basis.len() {
            op.apply(&basis[expanded], &mut aw);
            matvecs += 1;
            let scale = norm(&aw);
            let mut w = aw.clone();
            let len = basis.len();
            let mut h = vec![0.0; len];
            let mut before = scale;
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[i] += c;
                    axpy(-c, b, &mut w);
                }
                // second pass only when cancellation was severe
                let after = norm(&w);
                if after > 0.5 * before {
                    break;
                }
                before = after;
            }
            for (i, &hi) in h.iter().enumerate() {
                t[(i, expanded)] = hi;
                t[(expanded, i)] = hi;
            }
            if len < cap {
                let rest = norm(&w);
                if rest > 1e-12 * scale && rest > 0.0 {
                    w.iter_mut().for_each(|x| *x /= rest);
                    basis.push(w);
                    t[(len, expanded)] = rest;
                    t[(expanded, len)] = rest;
                } else {
                    // invariant subspace: continue with a fresh direction
                    append_random(&mut basis, &mut rng, n);
                }
            }
            expanded += 1;
        }

        let e = expanded;
        let len = basis.len();
        let te = t.view((0, 0), (e, e)).clone_owned();
        let eig = SymmetricEigen::new(te);
        let mut order: Vec<usize> = (0..e).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let coupling = t.view((e, 0), (len - e, e)).clone_owned();
        let estimate = |col: usize| -> f64 {
            let s = eig.eigenvectors.column(col);
            (&coupling * s).norm()
        };
        let wanted = nev.min(e);
        let estimates: Vec<f64> = order.iter().take(wanted).map(|&c| estimate(c)).collect();
        for (b, r) in best_residuals.iter_mut().zip(&estimates) {
            *b = b.min(*r);
        }
        let exhausted = len == e;
        let converged = wanted == nev && estimates.iter().all(|&r| r <= target);

        if converged || exhausted {
            let mut values = Vec::with_capacity(nev);
            let mut vectors = Vec::with_capacity(nev);
            let picked: Vec<usize> = order.iter().take(wanted).copied().collect();
            for (&c, mut y) in picked.iter().zip(combine(&basis[..e], &eig.eigenvectors, &picked)) {
                values.push(eig.eigenvalues[c]);
                let nrm = norm(&y);
                y.iter_mut().for_each(|x| *x /= nrm);
                fix_sign(&mut y);
                vectors.push(y);
            }
            let res = residuals(op, &values, &vectors);
            matvecs += res.len();
            if wanted == nev && res.iter().all(|&r| r <= config.tol) {
                return Ok(EigenResult {
                    eigenvalues: values,
                    eigenvectors: vectors,
                    residuals: res,
                    matvecs,
                });
            }
            if exhausted && wanted < nev {
                return Err(Error::NoConvergence {
                    iterations: matvecs,
                    residuals: res,
                });
            }
            // explicit residuals lag the estimates; tighten and go on
            target *= 0.1;
        }

        if matvecs >= config.max_matvecs {
            return Err(Error::NoConvergence {
                iterations: matvecs,
                residuals: best_residuals,
            });
        }

        // Thick restart: keep the lowest Ritz vectors plus the unexpanded tail.
        let keep = (nev + block)
            .max((nev + m_max) / 2)
            .min(e.saturating_sub(1))
            .max(nev.min(e));
        let picked: Vec<usize> = order.iter().take(keep).copied().collect();
        let mut restarted = combine(&basis[..e], &eig.eigenvectors, &picked);
        restarted.reserve(cap.saturating_sub(keep));
        let mut new_t = DMatrix::<f64>::zeros(cap, cap);
        for (i, &c) in order.iter().take(keep).enumerate() {
            new_t[(i, i)] = eig.eigenvalues[c];
        }
        for a in 0..(len - e) {
            let row = keep + a;
            for (i, &c) in order.iter().take(keep).enumerate() {
                let s = eig.eigenvectors.column(c);
                let v: f64 = (0..e).map(|j| coupling[(a, j)] * s[j]).sum();
                new_t[(row, i)] = v;
                new_t[(i, row)] = v;
            }
        }
        restarted.extend(basis.drain(e..));
        basis = restarted;
        t = new_t;
        expanded = keep;
        if basis.len() == expanded && !append_random(&mut basis, &mut rng, n) {
            // the kept vectors span the whole space
            continue;
        }
    }
}

//! Low-lying spectra of the ring Hamiltonian, sweeps over Ω and γ, and the
//! avoided-crossing gap.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::hamiltonian::assemble;
use crate::operator::{LinearOperator, SparseHermitianOperator};
use crate::params::ModelParams;

pub use crate::eigen::{fix_sign, lowest_eigenpairs, EigenResult, Method, SolverConfig};

/// Lowest `levels` eigenpairs of H(params). Without a barrier the
/// Hamiltonian is block diagonal in K and every block is solved separately.
pub fn solve(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    levels: usize,
    config: &SolverConfig,
    warm: Option<&[Vec<f64>]>,
) -> Result<EigenResult> {
    let h = assemble(params, basis)?;
    if params.barrier == 0.0 {
        solve_blocks(&h, basis, levels, config)
    } else {
        lowest_eigenpairs(&h, levels, config, warm)
    }
}

/// Solve an operator that commutes with K block by block and merge the
/// lowest `levels` eigenpairs. Ties keep ascending-K order.
pub fn solve_blocks(
    h: &SparseHermitianOperator,
    basis: &FockBasis,
    levels: usize,
    config: &SolverConfig,
) -> Result<EigenResult> {
    let n = basis.len();
    if levels == 0 || levels > n {
        return Err(Error::InvalidParameter(format!(
            "requested {levels} eigenpairs of a {n}-dimensional operator"
        )));
    }
    let mut pairs: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut matvecs = 0;
    for indices in basis.momentum_blocks().values() {
        let sub = h.restrict(indices);
        let count = levels.min(indices.len());
        let r = lowest_eigenpairs(&sub, count, config, None)?;
        matvecs += r.matvecs;
        for ((value, local), res) in r.eigenvalues.into_iter().zip(r.eigenvectors).zip(r.residuals) {
            let mut v = vec![0.0; n];
            for (&i, x) in indices.iter().zip(local) {
                v[i] = x;
            }
            pairs.push((value, v, res));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(levels);
    let mut out = EigenResult {
        eigenvalues: Vec::with_capacity(levels),
        eigenvectors: Vec::with_capacity(levels),
        residuals: Vec::with_capacity(levels),
        matvecs,
    };
    for (value, v, res) in pairs {
        out.eigenvalues.push(value);
        out.eigenvectors.push(v);
        out.residuals.push(res);
    }
    Ok(out)
}

/// One grid point of a sweep. Solver failures are kept per point.
#[derive(Debug)]
pub struct SweepPoint {
    pub parameter: f64,
    pub outcome: Result<EigenResult>,
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Omega,
    Coupling,
}

impl SweepAxis {
    pub fn apply(self, params: &ModelParams, value: f64) -> ModelParams {
        match self {
            SweepAxis::Omega => params.clone().with_omega(value),
            SweepAxis::Coupling => params.clone().with_coupling(value),
        }
    }
}

/// Solve at every grid value. Consecutive points reuse the previous
/// eigenvectors as start vectors; with `workers > 1` the grid is cut into
/// contiguous chunks that run in parallel.
pub fn sweep(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    axis: SweepAxis,
    grid: &[f64],
    levels: usize,
    config: &SolverConfig,
    workers: usize,
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    let run_chunk = |chunk: &[f64]| -> Vec<SweepPoint> {
        let mut warm: Option<Vec<Vec<f64>>> = None;
        chunk
            .iter()
            .map(|&x| {
                let p = axis.apply(params, x);
                let outcome = solve(&p, basis, levels, config, warm.as_deref());
                if let Ok(r) = &outcome {
                    warm = Some(r.eigenvectors.clone());
                }
                SweepPoint {
                    parameter: x,
                    outcome,
                }
            })
            .collect()
    };
    if workers <= 1 {
        return Ok(run_chunk(grid));
    }
    let chunk_len = grid.len().div_ceil(workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let chunks: Vec<Vec<SweepPoint>> =
        pool.install(|| grid.par_chunks(chunk_len).map(run_chunk).collect());
    Ok(chunks.into_iter().flatten().collect())
}

/// Lowest `levels` energies at every Ω of the grid.
pub fn spectrum_sweep(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    omega_grid: &[f64],
    levels: usize,
    config: &SolverConfig,
    workers: usize,
) -> Result<Vec<SweepPoint>> {
    sweep(params, basis, SweepAxis::Omega, omega_grid, levels, config, workers)
}

/// Spectrum at Ω = π versus γ; read relative energies with
/// [`EigenResult::relative_energies`].
pub fn gap_vs_g_sweep(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    gamma_grid: &[f64],
    levels: usize,
    config: &SolverConfig,
    workers: usize,
) -> Result<Vec<SweepPoint>> {
    let at_crossing = params.clone().with_omega(PI);
    sweep(&at_crossing, basis, SweepAxis::Coupling, gamma_grid, levels, config, workers)
}

/// E₁ - E₀ at Ω = π.
pub fn gap_at_crossing(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    config: &SolverConfig,
) -> Result<f64> {
    let p = params.clone().with_omega(PI);
    let r = solve(&p, basis, 2, config, None)?;
    Ok(r.eigenvalues[1] - r.eigenvalues[0])
}

/// Index of the grid point with the smallest E₁ - E₀ among converged points.
pub fn min_gap_index(points: &[SweepPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.outcome.as_ref().ok().and_then(|r| r.gap()).map(|g| (i, g)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// ⟨v|A|v⟩.
pub fn expectation(op: &dyn LinearOperator, v: &[f64]) -> f64 {
    let mut av = vec![0.0; op.dim()];
    op.apply(v, &mut av);
    crate::eigen::dot(v, &av)
}

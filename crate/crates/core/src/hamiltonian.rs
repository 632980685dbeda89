//! Many-body Hamiltonian of bosons on a ring stirred by a barrier.
//!
//! In the co-rotating frame and in units of E₀,
//!
//! ```text
//! H = Σ_k (k - Ω/2π)² n_k
//!   + β Σ_{k1,k2} f(k1 - k2) a†_{k1} a_{k2}
//!   + (γ/2) Σ_{k1,k2,q} a†_{k1} a†_{k2} a_{k1-q} a_{k2+q}
//! ```
//!
//! with f ≡ 1 for a δ barrier and f(q) = exp(-2π²σ̃²q²) for a Gaussian
//! barrier of width σ̃. Interaction terms that would scatter a particle out
//! of the mode window are dropped. All matrix elements are real.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::analytic;
use crate::basis::FockBasis;
use crate::error::{Error, Result};
use crate::operator::{RowGenerator, SparseHermitianOperator};
use crate::params::ModelParams;
use crate::spectra::{self, SolverConfig};

/// Coefficients of the three Hamiltonian terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    pub omega: f64,
    pub kinetic: bool,
    pub barrier: f64,
    pub barrier_width: f64,
    pub coupling: f64,
}

impl Terms {
    pub fn from_params(params: &ModelParams) -> Self {
        Self {
            omega: params.omega,
            kinetic: true,
            barrier: params.barrier,
            barrier_width: params.barrier_width,
            coupling: params.effective_coupling(),
        }
    }
}

/// Row generator for any combination of the three terms.
pub struct HamiltonianRows {
    basis: Arc<FockBasis>,
    terms: Terms,
    /// f(q) for q = -(M-1)..=(M-1), stored at q + M - 1.
    profile: Vec<f64>,
}

impl HamiltonianRows {
    pub fn new(basis: Arc<FockBasis>, terms: Terms) -> Self {
        let m = basis.n_modes() as i64;
        let profile = (-(m - 1)..m)
            .map(|q| barrier_profile(q, terms.barrier_width))
            .collect();
        Self {
            basis,
            terms,
            profile,
        }
    }

    fn profile(&self, q: i64) -> f64 {
        self.profile[(q + self.basis.n_modes() as i64 - 1) as usize]
    }
}

/// Fourier weight of the barrier for momentum transfer `q`.
pub fn barrier_profile(q: i64, width: f64) -> f64 {
    if width == 0.0 {
        1.0
    } else {
        let q = q as f64;
        (-2.0 * PI * PI * width * width * q * q).exp()
    }
}

impl RowGenerator for HamiltonianRows {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn row(&self, i: usize, emit: &mut dyn FnMut(usize, f64)) {
        let basis = self.basis.as_ref();
        let occ = basis.occupations(i);
        let m = occ.len();
        let mut work = occ.to_vec();
        let t = &self.terms;

        let mut diag = 0.0;
        if t.kinetic {
            let center = t.omega / (2.0 * PI);
            for (&n, k) in occ.iter().zip(basis.window().modes()) {
                let d = k as f64 - center;
                diag += n as f64 * d * d;
            }
        }

        if t.barrier != 0.0 {
            diag += t.barrier * self.profile(0) * basis.n_atoms() as f64;
            for src in 0..m {
                if occ[src] == 0 {
                    continue;
                }
                for dst in 0..m {
                    if dst == src {
                        continue;
                    }
                    let amp = t.barrier
                        * self.profile(dst as i64 - src as i64)
                        * ((occ[src] as f64) * (occ[dst] as f64 + 1.0)).sqrt();
                    work[src] -= 1;
                    work[dst] += 1;
                    emit(basis.rank_unchecked(&work), amp);
                    work[src] += 1;
                    work[dst] -= 1;
                }
            }
        }

        if t.coupling != 0.0 {
            let half = 0.5 * t.coupling;
            // Unordered annihilation pairs {a <= b}, then unordered creation
            // pairs {c <= d} with c + d = a + b. Distinct pairs stand for two
            // ordered terms of the operator sum.
            for a in 0..m {
                if occ[a] == 0 {
                    continue;
                }
                for b in a..m {
                    // bosonic factors are kept as exact integers so that the
                    // (i, j) and (j, i) elements round identically
                    let (ann, mult_ann) = if a == b {
                        if occ[a] < 2 {
                            continue;
                        }
                        let n = occ[a] as u64;
                        (n * (n - 1), 1.0)
                    } else {
                        if occ[b] == 0 {
                            continue;
                        }
                        (occ[a] as u64 * occ[b] as u64, 2.0)
                    };
                    work[a] -= 1;
                    work[b] -= 1;
                    let total = a + b;
                    let c_min = total.saturating_sub(m - 1);
                    for c in c_min..=total / 2 {
                        let d = total - c;
                        let (cre, mult_cre) = if c == d {
                            let n = work[c] as u64;
                            ((n + 1) * (n + 2), 1.0)
                        } else {
                            ((work[c] as u64 + 1) * (work[d] as u64 + 1), 2.0)
                        };
                        work[c] += 1;
                        work[d] += 1;
                        let value = half * (mult_ann * mult_cre) * ((ann * cre) as f64).sqrt();
                        let j = basis.rank_unchecked(&work);
                        if j == i {
                            diag += value;
                        } else {
                            emit(j, value);
                        }
                        work[c] -= 1;
                        work[d] -= 1;
                    }
                    work[a] += 1;
                    work[b] += 1;
                }
            }
        }

        if diag != 0.0 || t.kinetic {
            emit(i, diag);
        }
    }
}

/// Kinetic energy Σ_k n_k (k - Ω/2π)² of every basis state.
pub fn kinetic_diagonal(basis: &FockBasis, omega: f64) -> Vec<f64> {
    let center = omega / (2.0 * PI);
    (0..basis.len())
        .map(|i| {
            basis
                .occupations(i)
                .iter()
                .zip(basis.window().modes())
                .map(|(&n, k)| {
                    let d = k as f64 - center;
                    n as f64 * d * d
                })
                .sum()
        })
        .collect()
}

fn build(basis: &Arc<FockBasis>, terms: Terms) -> SparseHermitianOperator {
    SparseHermitianOperator::from_generator(Arc::new(HamiltonianRows::new(basis.clone(), terms)))
}

/// Barrier term alone: δ barrier for `width == 0`, Gaussian otherwise.
pub fn barrier_operator(basis: &Arc<FockBasis>, beta: f64, width: f64) -> SparseHermitianOperator {
    build(
        basis,
        Terms {
            omega: 0.0,
            kinetic: false,
            barrier: beta,
            barrier_width: width,
            coupling: 0.0,
        },
    )
}

/// Contact interaction term alone.
pub fn interaction_operator(basis: &Arc<FockBasis>, gamma: f64) -> SparseHermitianOperator {
    build(
        basis,
        Terms {
            omega: 0.0,
            kinetic: false,
            barrier: 0.0,
            barrier_width: 0.0,
            coupling: gamma,
        },
    )
}

/// Full Hamiltonian with γ scaled by `coupling_rescale`.
pub fn assemble(params: &ModelParams, basis: &Arc<FockBasis>) -> Result<SparseHermitianOperator> {
    params.validate()?;
    if basis.n_atoms() != params.n_atoms || basis.window() != params.mode_window {
        return Err(Error::InvalidParameter(
            "basis does not match the model parameters".into(),
        ));
    }
    Ok(build(basis, Terms::from_params(params)))
}

/// Same as [`assemble`] but forces the matrix-free representation above
/// `explicit_limit` states.
pub fn assemble_with_limit(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    explicit_limit: usize,
) -> Result<SparseHermitianOperator> {
    params.validate()?;
    Ok(SparseHermitianOperator::from_generator_with_limit(
        Arc::new(HamiltonianRows::new(basis.clone(), Terms::from_params(params))),
        explicit_limit,
    ))
}

/// Total angular momentum K as a diagonal operator.
pub fn k_operator(basis: &FockBasis) -> SparseHermitianOperator {
    let diag: Vec<f64> = basis.momenta().iter().map(|&k| k as f64).collect();
    SparseHermitianOperator::diagonal(&diag)
}

/// What [`calibrate_coupling`] matches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationTarget {
    /// No rescaling.
    Identity,
    /// Match the many-body gap at Ω = π to the Tonks-Girardeau gap
    /// ε_N - ε_{N-1} of the δ barrier.
    TonksGirardeauGap,
}

/// Lower and upper ends of the rescale search interval.
pub const RESCALE_BRACKET: (f64, f64) = (1.0, 10.0);

/// Find the factor multiplying γ for which the truncated many-body model
/// reproduces the target. Returns 1 for [`CalibrationTarget::Identity`].
pub fn calibrate_coupling(
    basis: &Arc<FockBasis>,
    params: &ModelParams,
    target: CalibrationTarget,
    config: &SolverConfig,
) -> Result<f64> {
    match target {
        CalibrationTarget::Identity => Ok(1.0),
        CalibrationTarget::TonksGirardeauGap => {
            let wanted = analytic::tg_gap(params.n_atoms, params.barrier)?;
            let mut warm: Option<Vec<Vec<f64>>> = None;
            let mut mismatch = |factor: f64| -> Result<f64> {
                let p = params
                    .clone()
                    .with_omega(PI)
                    .with_coupling_rescale(factor);
                let h = assemble(&p, basis)?;
                let eig = spectra::lowest_eigenpairs(&h, 2, config, warm.as_deref())?;
                let gap = eig.eigenvalues[1] - eig.eigenvalues[0];
                warm = Some(eig.eigenvectors);
                Ok(gap - wanted)
            };
            let (mut lo, mut hi) = RESCALE_BRACKET;
            let mut f_lo = mismatch(lo)?;
            let f_hi = mismatch(hi)?;
            if f_lo == 0.0 {
                return Ok(lo);
            }
            if f_lo.signum() == f_hi.signum() {
                return Err(Error::RootNotBracketed(format!(
                    "gap mismatch {f_lo:.3e} at rescale {lo} and {f_hi:.3e} at {hi}"
                )));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let f_mid = mismatch(mid)?;
                if f_mid.abs() <= 1e-6 * wanted.abs() || hi - lo < 1e-12 {
                    return Ok(mid);
                }
                if f_mid.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

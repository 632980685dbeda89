//! Time evolution under linear ramps of Ω or γ.
//!
//! Both ramped parameters enter the Hamiltonian affinely,
//! H(ζ) = A + c₁(ζ)B + c₀(ζ)𝟙, so the two operators are assembled once and
//! combined on the fly. Each time step applies exp(-iH dt) with H frozen at
//! the step midpoint, computed in a Lanczos-Krylov subspace.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::FockBasis;
use crate::eigen::{lowest_eigenpairs, EigenResult, SolverConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, interaction_operator, k_operator};
use crate::observables::momentum_distribution_complex;
use crate::operator::{LinearOperator, SparseHermitianOperator};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RampParam {
    Omega,
    Coupling,
}

impl RampParam {
    pub fn name(self) -> &'static str {
        match self {
            RampParam::Omega => "omega",
            RampParam::Coupling => "coupling",
        }
    }
}

impl std::str::FromStr for RampParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "omega" => Ok(RampParam::Omega),
            "coupling" => Ok(RampParam::Coupling),
            other => Err(Error::Config(format!(
                "ramp parameter must be omega or coupling, got '{other}'"
            ))),
        }
    }
}

/// Linear ramp ζ(t) = start + (end - start)·t/duration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampSpec {
    pub param: RampParam,
    pub start: f64,
    pub end: f64,
    /// Units of ħ/E₀.
    pub duration: f64,
    pub steps: usize,
}

impl RampSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ramp duration must be > 0, got {}",
                self.duration
            )));
        }
        if self.steps < 10 {
            return Err(Error::InvalidParameter(format!(
                "ramp needs at least 10 steps, got {}",
                self.steps
            )));
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(Error::InvalidParameter("ramp end points must be finite".into()));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.start + (self.end - self.start) * (t / self.duration)
    }

    pub fn rate(&self) -> f64 {
        (self.end - self.start) / self.duration
    }

    /// The same ramp run backwards.
    pub fn reversed(&self) -> Self {
        Self {
            start: self.end,
            end: self.start,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub krylov_dim: usize,
    /// Accepted Krylov error estimate and norm drift per step.
    pub step_tol: f64,
    pub max_halvings: usize,
    /// Upper bound on recorded samples (the final time is always recorded).
    pub max_samples: usize,
    /// Eigenpairs computed per sample to identify the ground manifold.
    pub ground_levels: usize,
    pub solver: SolverConfig,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 20,
            step_tol: 1e-10,
            max_halvings: 10,
            max_samples: 100,
            ground_levels: 2,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampSample {
    pub time: f64,
    pub parameter: f64,
    /// Weight of ψ in the instantaneous ground manifold.
    pub fidelity: f64,
    pub excitation: f64,
    pub p_k0: f64,
    pub p_kn: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct RampResult {
    pub samples: Vec<RampSample>,
    pub final_state: Vec<Complex64>,
    /// max over ± of |⟨(|N,0⟩ ± |0,N⟩)/√2 | ψ⟩|² over the modes 0, 1.
    pub noon_overlap: Option<f64>,
}

impl RampResult {
    pub fn final_sample(&self) -> &RampSample {
        self.samples.last().expect("at least one sample")
    }
}

/// A + c₁B + c₀𝟙.
pub struct AffineOperator<'a> {
    pub a: &'a SparseHermitianOperator,
    pub b: &'a SparseHermitianOperator,
    pub c1: f64,
    pub c0: f64,
}

impl LinearOperator for AffineOperator<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut tmp = vec![0.0; x.len()];
        self.a.apply(x, y);
        self.b.apply(x, &mut tmp);
        for ((out, t), xi) in y.iter_mut().zip(&tmp).zip(x) {
            *out += self.c1 * t + self.c0 * xi;
        }
    }

    fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mut tmp = vec![Complex64::new(0.0, 0.0); x.len()];
        self.a.apply_complex(x, y);
        self.b.apply_complex(x, &mut tmp);
        for ((out, t), xi) in y.iter_mut().zip(&tmp).zip(x) {
            *out += t * self.c1 + xi * self.c0;
        }
    }
}

/// H(ζ) for one ramped parameter with everything else fixed.
pub struct RampHamiltonian {
    param: RampParam,
    n_atoms: usize,
    a: SparseHermitianOperator,
    b: SparseHermitianOperator,
}

impl RampHamiltonian {
    pub fn new(params: &ModelParams, basis: &Arc<FockBasis>, param: RampParam) -> Result<Self> {
        let (a, b) = match param {
            // kinetic term Σ n_k k² - (Ω/π)K + NΩ²/4π²
            RampParam::Omega => (assemble(&params.clone().with_omega(0.0), basis)?, k_operator(basis)),
            RampParam::Coupling => (
                assemble(&params.clone().with_coupling(0.0), basis)?,
                interaction_operator(basis, params.coupling_rescale),
            ),
        };
        Ok(Self {
            param,
            n_atoms: params.n_atoms,
            a,
            b,
        })
    }

    pub fn at(&self, zeta: f64) -> AffineOperator<'_> {
        let (c1, c0) = match self.param {
            RampParam::Omega => (-zeta / PI, self.n_atoms as f64 * zeta * zeta / (4.0 * PI * PI)),
            RampParam::Coupling => (zeta, 0.0),
        };
        AffineOperator {
            a: &self.a,
            b: &self.b,
            c1,
            c0,
        }
    }

    /// ∂H/∂ζ without its multiple of the identity.
    pub fn derivative(&self) -> (f64, &SparseHermitianOperator) {
        match self.param {
            RampParam::Omega => (-1.0 / PI, &self.b),
            RampParam::Coupling => (1.0, &self.b),
        }
    }

    /// Same Hamiltonian restricted to a set of basis states.
    pub fn restrict(&self, indices: &[usize]) -> Self {
        Self {
            param: self.param,
            n_atoms: self.n_atoms,
            a: self.a.restrict(indices),
            b: self.b.restrict(indices),
        }
    }
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// exp(-iH dt)ψ in a Krylov space of dimension at most `m`. Returns the
/// propagated vector and an estimate of the truncation error.
pub fn krylov_expm(
    op: &dyn LinearOperator,
    psi: &[Complex64],
    dt: f64,
    m: usize,
) -> (Vec<Complex64>, f64) {
    let n = psi.len();
    let norm0 = cnorm(psi);
    if norm0 == 0.0 {
        return (psi.to_vec(), 0.0);
    }
    let m = m.clamp(1, n);
    let mut v: Vec<Vec<Complex64>> = vec![psi.iter().map(|z| z / norm0).collect()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut tail = 0.0;
    for j in 0..m {
        op.apply_complex(&v[j], &mut w);
        let scale = cnorm(&w);
        let mut a = 0.0;
        for _ in 0..2 {
            for (i, vi) in v.iter().enumerate() {
                let c = cdot(vi, &w);
                if i == j {
                    a += c.re;
                }
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= c * vk;
                }
            }
        }
        alpha.push(a);
        let b = cnorm(&w);
        if j + 1 == m {
            tail = b;
            break;
        }
        if b <= 1e-13 * scale.max(1e-300) {
            break;
        }
        beta.push(b);
        v.push(w.iter().map(|z| z / b).collect());
    }
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); k];
    for l in 0..k {
        let s = eig.eigenvectors.column(l);
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[l] * dt) * s[0];
        for (c, sj) in coeffs.iter_mut().zip(s.iter()) {
            *c += phase * sj;
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (c, vj) in coeffs.iter().zip(&v) {
        for (o, x) in out.iter_mut().zip(vj) {
            *o += c * x * norm0;
        }
    }
    let err = tail * coeffs[k - 1].norm() * norm0;
    (out, err)
}

struct Stepper<'a> {
    ham: &'a RampHamiltonian,
    ramp: &'a RampSpec,
    opts: &'a EvolveOptions,
}

impl Stepper<'_> {
    /// Advance from t to t + dt, halving on rejection.
    fn step(&self, psi: &[Complex64], t: f64, dt: f64, depth: usize) -> Result<Vec<Complex64>> {
        let h = self.ham.at(self.ramp.value_at(t + 0.5 * dt));
        let (next, err) = krylov_expm(&h, psi, dt, self.opts.krylov_dim);
        let drift = (cnorm(&next) - cnorm(psi)).abs();
        if err <= self.opts.step_tol && drift <= self.opts.step_tol {
            return Ok(next);
        }
        if depth >= self.opts.max_halvings {
            return Err(Error::StepRejected {
                halvings: depth,
                time: t,
            });
        }
        let half = self.step(psi, t, 0.5 * dt, depth + 1)?;
        self.step(&half, t + 0.5 * dt, 0.5 * dt, depth + 1)
    }
}

fn sample_steps(steps: usize, max_samples: usize) -> Vec<usize> {
    let count = max_samples.max(2).min(steps + 1);
    let mut out: Vec<usize> = (0..count)
        .map(|i| ((i as f64) * steps as f64 / (count - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Ground manifold: levels within a tolerance of the lowest one.
fn ground_manifold(eig: &EigenResult) -> Vec<&[f64]> {
    let e0 = eig.eigenvalues[0];
    let tie = 1e-8 * e0.abs().max(1.0);
    eig.eigenvalues
        .iter()
        .zip(&eig.eigenvectors)
        .filter(|(e, _)| **e - e0 <= tie)
        .map(|(_, v)| v.as_slice())
        .collect()
}

fn overlap_weight(manifold: &[&[f64]], psi: &[Complex64]) -> f64 {
    manifold
        .iter()
        .map(|g| {
            g.iter()
                .zip(psi)
                .map(|(a, z)| z * a)
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum()
}

/// Evolve `psi` along `ramp`. `ground` returns the instantaneous
/// eigenpairs at a parameter value; `propagate` advances one step.
fn run(
    basis: &FockBasis,
    ramp: &RampSpec,
    opts: &EvolveOptions,
    mut psi: Vec<Complex64>,
    mut ground: impl FnMut(f64) -> Result<EigenResult>,
    mut propagate: impl FnMut(&[Complex64], f64, f64) -> Result<Vec<Complex64>>,
) -> Result<RampResult> {
    let dt = ramp.duration / ramp.steps as f64;
    let sampled = sample_steps(ramp.steps, opts.max_samples);
    let n = basis.n_atoms() as i64;
    let mut samples = Vec::with_capacity(sampled.len());
    let mut next_sample = 0;
    for step in 0..=ramp.steps {
        let t = step as f64 * dt;
        if next_sample < sampled.len() && sampled[next_sample] == step {
            next_sample += 1;
            let zeta = ramp.value_at(t);
            let eig = ground(zeta)?;
            let fidelity = overlap_weight(&ground_manifold(&eig), &psi).min(1.0);
            let dist = momentum_distribution_complex(&psi, basis)?;
            samples.push(RampSample {
                time: t,
                parameter: zeta,
                fidelity,
                excitation: 1.0 - fidelity,
                p_k0: dist.get(0),
                p_kn: dist.get(n),
                norm: cnorm(&psi),
            });
        }
        if step < ramp.steps {
            psi = propagate(&psi, t, dt)?;
        }
    }
    Ok(RampResult {
        samples,
        final_state: psi,
        noon_overlap: None,
    })
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Start in the ground state of H(ζ_start) and ramp linearly to ζ_end.
pub fn evolve_ramp(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    ramp: &RampSpec,
    opts: &EvolveOptions,
) -> Result<RampResult> {
    ramp.validate()?;
    let ham = RampHamiltonian::new(params, basis, ramp.param)?;
    let initial = lowest_eigenpairs(&ham.at(ramp.start), opts.ground_levels, &opts.solver, None)?;
    evolve_state(&ham, basis, ramp, opts, to_complex(initial.ground_state()))
}

/// Ramp an arbitrary initial state.
pub fn evolve_state(
    ham: &RampHamiltonian,
    basis: &FockBasis,
    ramp: &RampSpec,
    opts: &EvolveOptions,
    psi: Vec<Complex64>,
) -> Result<RampResult> {
    ramp.validate()?;
    let stepper = Stepper { ham, ramp, opts };
    let mut warm: Option<Vec<Vec<f64>>> = None;
    run(
        basis,
        ramp,
        opts,
        psi,
        |zeta| {
            let r = lowest_eigenpairs(&ham.at(zeta), opts.ground_levels, &opts.solver, warm.as_deref())?;
            warm = Some(r.eigenvectors.clone());
            Ok(r)
        },
        |psi, t, dt| stepper.step(psi, t, dt, 0),
    )
}

/// (|N,0⟩ ± |0,N⟩)/√2 over the modes 0 and 1, or `None` if either mode
/// lies outside the window.
pub fn noon_states(basis: &FockBasis) -> Option<(usize, usize)> {
    Some((basis.condensate_index(0)?, basis.condensate_index(1)?))
}

fn noon_overlap(basis: &FockBasis, psi: &[Complex64]) -> Option<f64> {
    let (a, b) = noon_states(basis)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = ((psi[a] + psi[b]) * s).norm_sqr();
    let minus = ((psi[a] - psi[b]) * s).norm_sqr();
    Some(plus.max(minus))
}

/// Start from the ground state at Ω = π with the barrier on and ramp γ.
/// With `barrier_removed` the ramp runs at β = 0, where every K block is
/// propagated separately.
pub fn noon_ramp(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    ramp: &RampSpec,
    barrier_removed: bool,
    opts: &EvolveOptions,
) -> Result<RampResult> {
    ramp.validate()?;
    if ramp.param != RampParam::Coupling {
        return Err(Error::InvalidParameter("noon_ramp ramps the coupling".into()));
    }
    let start = params.clone().with_omega(PI).with_coupling(ramp.start);
    let initial = crate::spectra::solve(&start, basis, opts.ground_levels, &opts.solver, None)?;
    let psi = to_complex(initial.ground_state());

    let mut result = if barrier_removed {
        let free = start.clone().with_barrier(0.0);
        let ham = RampHamiltonian::new(&free, basis, RampParam::Coupling)?;
        let blocks: Vec<(Vec<usize>, RampHamiltonian)> = basis
            .momentum_blocks()
            .into_values()
            .map(|idx| {
                let h = ham.restrict(&idx);
                (idx, h)
            })
            .collect();
        let stepper_opts = opts.clone();
        run(
            basis,
            ramp,
            opts,
            psi,
            |zeta| {
                let p = free.clone().with_coupling(zeta);
                crate::spectra::solve(&p, basis, opts.ground_levels, &opts.solver, None)
            },
            |psi, t, dt| {
                let mut out = psi.to_vec();
                for (idx, h) in &blocks {
                    let local: Vec<Complex64> = idx.iter().map(|&i| psi[i]).collect();
                    if cnorm(&local) == 0.0 {
                        continue;
                    }
                    let stepper = Stepper {
                        ham: h,
                        ramp,
                        opts: &stepper_opts,
                    };
                    let next = stepper.step(&local, t, dt, 0)?;
                    for (&i, z) in idx.iter().zip(next) {
                        out[i] = z;
                    }
                }
                Ok(out)
            },
        )?
    } else {
        let ham = RampHamiltonian::new(&start, basis, RampParam::Coupling)?;
        evolve_state(&ham, basis, ramp, opts, psi)?
    };
    result.noon_overlap = noon_overlap(basis, &result.final_state);
    Ok(result)
}

/// max over the grid of |⟨Ψ₁|∂H/∂ζ|Ψ₀⟩|/(E₁-E₀)². A ramp at rate r then
/// has first-order excitation amplitude ε = r times this value.
pub fn adiabatic_ratio(
    params: &ModelParams,
    basis: &Arc<FockBasis>,
    param: RampParam,
    grid: &[f64],
    solver: &SolverConfig,
) -> Result<f64> {
    let ham = RampHamiltonian::new(params, basis, param)?;
    let (scale, deriv) = ham.derivative();
    let mut best: f64 = 0.0;
    let mut warm: Option<Vec<Vec<f64>>> = None;
    let mut dv = vec![0.0; basis.len()];
    for &zeta in grid {
        let r = lowest_eigenpairs(&ham.at(zeta), 2, solver, warm.as_deref())?;
        deriv.apply(&r.eigenvectors[0], &mut dv);
        let coupling = scale * crate::eigen::dot(&r.eigenvectors[1], &dv);
        let gap = r.eigenvalues[1] - r.eigenvalues[0];
        best = best.max(coupling.abs() / (gap * gap));
        warm = Some(r.eigenvectors);
    }
    Ok(best)
}

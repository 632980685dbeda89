//! Momentum distributions, quantum Fisher information and thermal ensembles.
//!
//! The phase generator is the total angular momentum K, so the QFI follows
//! from matrix elements of K without differentiating states.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::FockBasis;
use crate::eigen::{dot, EigenResult};
use crate::error::{Error, Result};
use crate::operator::LinearOperator;

/// Tolerance on ‖ψ‖ - 1 accepted by the observables.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// Pairs with λ_i + λ_j below this are dropped from the mixed-state QFI.
pub const WEIGHT_THRESHOLD: f64 = 1e-12;

/// P(K) = |C_K|² for every K present in the basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumDistribution {
    pub probabilities: BTreeMap<i64, f64>,
}

impl MomentumDistribution {
    pub fn get(&self, k: i64) -> f64 {
        self.probabilities.get(&k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }

    /// ⟨K⟩ and ⟨K²⟩.
    pub fn moments(&self) -> (f64, f64) {
        self.probabilities.iter().fold((0.0, 0.0), |(m1, m2), (&k, &p)| {
            let k = k as f64;
            (m1 + p * k, m2 + p * k * k)
        })
    }
}

fn check_norm(norm_sq: f64) -> Result<()> {
    let norm = norm_sq.sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE || !norm.is_finite() {
        return Err(Error::NotNormalized(norm));
    }
    Ok(())
}

fn distribution_from_weights(
    weights: impl Iterator<Item = f64>,
    basis: &FockBasis,
) -> Result<MomentumDistribution> {
    let mut probabilities = BTreeMap::new();
    let mut total = 0.0;
    for (w, &k) in weights.zip(basis.momenta()) {
        *probabilities.entry(k).or_insert(0.0) += w;
        total += w;
    }
    check_norm(total)?;
    Ok(MomentumDistribution { probabilities })
}

pub fn momentum_distribution(state: &[f64], basis: &FockBasis) -> Result<MomentumDistribution> {
    check_len(state.len(), basis)?;
    distribution_from_weights(state.iter().map(|x| x * x), basis)
}

pub fn momentum_distribution_complex(
    state: &[Complex64],
    basis: &FockBasis,
) -> Result<MomentumDistribution> {
    check_len(state.len(), basis)?;
    distribution_from_weights(state.iter().map(|z| z.norm_sqr()), basis)
}

fn check_len(len: usize, basis: &FockBasis) -> Result<()> {
    if len != basis.len() {
        return Err(Error::InvalidParameter(format!(
            "state has {len} amplitudes, basis has {}",
            basis.len()
        )));
    }
    Ok(())
}

/// F_Q = 4(⟨K²⟩ - ⟨K⟩²) for a pure state.
pub fn qfi_pure(state: &[f64], k_op: &dyn LinearOperator) -> Result<f64> {
    check_norm(dot(state, state))?;
    let mut kv = vec![0.0; k_op.dim()];
    k_op.apply(state, &mut kv);
    let mean = dot(state, &kv);
    let second = dot(&kv, &kv);
    Ok(4.0 * (second - mean * mean).max(0.0))
}

pub fn qfi_pure_complex(state: &[Complex64], k_op: &dyn LinearOperator) -> Result<f64> {
    let norm_sq: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    check_norm(norm_sq)?;
    let mut kv = vec![Complex64::new(0.0, 0.0); k_op.dim()];
    k_op.apply_complex(state, &mut kv);
    let mean: f64 = state.iter().zip(&kv).map(|(a, b)| (a.conj() * b).re).sum();
    let second: f64 = kv.iter().map(|z| z.norm_sqr()).sum();
    Ok(4.0 * (second - mean * mean).max(0.0))
}

/// Boltzmann-weighted set of the lowest levels.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub energies: Vec<f64>,
    pub populations: Vec<f64>,
    /// k_B T in units of E₀.
    pub temperature: f64,
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Populations over the lowest `level_count` levels of `eigen`. At T = 0
/// the weight is split equally among levels degenerate with the ground
/// state.
pub fn thermal_state(
    eigen: &EigenResult,
    temperature: f64,
    level_count: usize,
) -> Result<ThermalEnsemble> {
    if level_count == 0 || level_count > eigen.len() {
        return Err(Error::InvalidParameter(format!(
            "level_count {level_count} not in 1..={}",
            eigen.len()
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be >= 0, got {temperature}"
        )));
    }
    let energies = eigen.eigenvalues[..level_count].to_vec();
    let e0 = energies[0];
    let weights: Vec<f64> = if temperature == 0.0 {
        let tie = 1e-10 * e0.abs().max(1.0);
        energies
            .iter()
            .map(|&e| if e - e0 <= tie { 1.0 } else { 0.0 })
            .collect()
    } else {
        energies
            .iter()
            .map(|&e| (-(e - e0) / temperature).exp())
            .collect()
    };
    let z: f64 = weights.iter().sum();
    Ok(ThermalEnsemble {
        energies,
        populations: weights.iter().map(|w| w / z).collect(),
        temperature,
        eigenvectors: eigen.eigenvectors[..level_count].to_vec(),
    })
}

/// Tr[ρA²] with A the symmetric logarithmic derivative of ρ(φ) = e^{-iKφ}ρe^{iKφ}.
///
/// Written in the eigenbasis of ρ this is Σ_ij 2(λ_i-λ_j)²/(λ_i+λ_j)|K_ij|²
/// over the whole Hilbert space. Pairs where j lies outside the ensemble
/// (λ_j = 0) are summed in closed form through ⟨i|K²|i⟩, so no completion
/// of the eigenbasis is needed. Levels with negligible weight are treated
/// as empty on both sides of a pair.
pub fn qfi_mixed(ensemble: &ThermalEnsemble, k_op: &dyn LinearOperator) -> f64 {
    let n = k_op.dim();
    let kv: Vec<Vec<f64>> = ensemble
        .eigenvectors
        .iter()
        .map(|v| {
            let mut out = vec![0.0; n];
            k_op.apply(v, &mut out);
            out
        })
        .collect();
    let lam = &ensemble.populations;
    let m = lam.len();
    let mut f = 0.0;
    for i in 0..m {
        if lam[i] < WEIGHT_THRESHOLD {
            continue;
        }
        let mut inside = 0.0;
        for j in 0..m {
            if lam[j] < WEIGHT_THRESHOLD {
                continue;
            }
            let kij = dot(&ensemble.eigenvectors[i], &kv[j]);
            inside += kij * kij;
            let d = lam[i] - lam[j];
            f += 2.0 * d * d / (lam[i] + lam[j]) * kij * kij;
        }
        // (i, j) and (j, i) with λ_j = 0 each contribute 2λ_i|K_ij|²
        let k2 = dot(&kv[i], &kv[i]);
        f += 4.0 * lam[i] * (k2 - inside).max(0.0);
    }
    f
}

/// One temperature of a thermal QFI scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalQfiPoint {
    pub temperature: f64,
    pub qfi: f64,
    /// QFI with twice as many levels.
    pub qfi_doubled: f64,
    pub converged: bool,
}

/// F_Q(T) over `levels` levels, checked against `2 * levels` levels
/// (relative change below 1%). `eigen` must hold at least `2 * levels`
/// eigenpairs.
pub fn qfi_vs_temperature(
    eigen: &EigenResult,
    k_op: &dyn LinearOperator,
    temperatures: &[f64],
    levels: usize,
) -> Result<Vec<ThermalQfiPoint>> {
    if eigen.len() < 2 * levels {
        return Err(Error::InvalidParameter(format!(
            "need {} levels for the convergence check, have {}",
            2 * levels,
            eigen.len()
        )));
    }
    temperatures
        .iter()
        .map(|&t| {
            let qfi = qfi_mixed(&thermal_state(eigen, t, levels)?, k_op);
            let qfi_doubled = qfi_mixed(&thermal_state(eigen, t, 2 * levels)?, k_op);
            let scale = qfi.abs().max(qfi_doubled.abs());
            let converged = scale == 0.0 || (qfi - qfi_doubled).abs() <= 0.01 * scale;
            Ok(ThermalQfiPoint {
                temperature: t,
                qfi,
                qfi_doubled,
                converged,
            })
        })
        .collect()
}

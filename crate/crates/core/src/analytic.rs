//! Closed-form reference models in units E₀ = ħ = L = 1.
//!
//! These cover the effective two-level picture at Ω = π, the NOON gap of a
//! two-mode system, the Tonks-Girardeau spectrum with a δ barrier, the
//! Gaussian barrier suppression, QFI profiles and adiabatic rate limits.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Populations and splitting of the two-level model
/// H = [[0, Δ], [Δ, N(1 - Ω/π)]] over the states |K=0⟩ and |K=N⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoLevel {
    /// |C_a|², weight of |K=0⟩ in the lower state.
    pub weight_a: f64,
    /// |C_b|², weight of |K=N⟩ in the lower state.
    pub weight_b: f64,
    /// ħω₀₁.
    pub splitting: f64,
}

pub fn two_level_coefficients(delta: f64, n: usize, omega: f64) -> Result<TwoLevel> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("coupling must be > 0, got {delta}")));
    }
    let detuning = n as f64 * (1.0 - omega / PI);
    let half = 0.5 * detuning;
    let root = (delta * delta + half * half).sqrt();
    // lower eigenvector of [[0, Δ], [Δ, d]] has |C_a|² = 1/2 + (d/2)/(2 root)
    let weight_a = 0.5 + half / (2.0 * root);
    Ok(TwoLevel {
        weight_a,
        weight_b: 1.0 - weight_a,
        splitting: (4.0 * delta * delta + detuning * detuning).sqrt(),
    })
}

/// γ used for the NOON gap comparison at fixed β: γ = 4πβ√N/(N-1).
pub fn noon_coupling_rule(n: usize, beta: f64) -> f64 {
    4.0 * PI * beta * (n as f64).sqrt() / (n as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoonGap {
    pub delta_e: f64,
    /// β√N ≪ γN/2 ≪ 1, each "≪" read as a factor of 5.
    pub valid: bool,
}

/// ΔE = 2β^N N/(γ^(N-1)(N-1)!) for the two modes k = 0, 1.
pub fn noon_gap(n: usize, beta: f64, gamma: f64) -> Result<NoonGap> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("coupling must be > 0, got {gamma}")));
    }
    let nf = n as f64;
    // work in logs: β^N/γ^(N-1) under- or overflows quickly
    let log_gap = 2f64.ln() + nf * beta.ln() - (nf - 1.0) * gamma.ln() + nf.ln() - ln_factorial(n - 1);
    let delta_e = if beta == 0.0 { 0.0 } else { log_gap.exp() };
    let mid = gamma * nf / 2.0;
    let valid = 5.0 * beta * nf.sqrt() <= mid && 5.0 * mid <= 1.0;
    Ok(NoonGap { delta_e, valid })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Single-particle levels of a ring with a δ barrier of strength β,
/// ε_μ = α_μ².
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TgSpectrum {
    pub barrier: f64,
    pub alphas: Vec<f64>,
    pub energies: Vec<f64>,
}

/// Even μ: α = (μ+1)/2. Odd μ: the root of α/(πβ) = -tan(πα) in
/// (μ/2, (μ+1)/2), found by bisection.
pub fn tg_single_particle(beta: f64, count: usize) -> Result<TgSpectrum> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("barrier must be > 0, got {beta}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let mut alphas = Vec::with_capacity(count);
    for mu in 0..count {
        let alpha = if mu % 2 == 0 {
            (mu as f64 + 1.0) / 2.0
        } else {
            odd_root(mu, beta)?
        };
        alphas.push(alpha);
    }
    let energies = alphas.iter().map(|a| a * a).collect();
    Ok(TgSpectrum {
        barrier: beta,
        alphas,
        energies,
    })
}

/// α/(πβ) + tan(πα).
pub fn tg_residual(alpha: f64, beta: f64) -> f64 {
    alpha / (PI * beta) + (PI * alpha).tan()
}

fn odd_root(mu: usize, beta: f64) -> Result<f64> {
    // tan runs from -∞ just above μ/2 to 0 at (μ+1)/2
    let mut lo = mu as f64 / 2.0;
    let mut hi = (mu as f64 + 1.0) / 2.0;
    let f_hi = tg_residual(hi, beta);
    if !(f_hi > 0.0) {
        return Err(Error::RootNotBracketed(format!(
            "transcendental root for mu={mu}, beta={beta}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if tg_residual(mid, beta) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ε_N - ε_{N-1} for odd N.
pub fn tg_gap(n: usize, beta: f64) -> Result<f64> {
    if n % 2 == 0 {
        return Err(Error::Unsupported(format!(
            "Tonks-Girardeau gap is only defined for odd N, got {n}"
        )));
    }
    let s = tg_single_particle(beta, n + 1)?;
    Ok(s.energies[n] - s.energies[n - 1])
}

/// Impenetrable-barrier limit of [`tg_gap`]: (2N+1)/4.
pub fn tg_gap_large_barrier(n: usize) -> f64 {
    (2.0 * n as f64 + 1.0) / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianGap {
    pub delta_e: f64,
    /// Width at which the gap has dropped by 1/e.
    pub sigma_max: f64,
}

/// First-order gap of a Gaussian barrier of width σ̃.
pub fn gaussian_suppression(beta: f64, sigma: f64, n: usize) -> GaussianGap {
    let nf = n as f64;
    GaussianGap {
        delta_e: 2.0 * beta * (-2.0 * PI * PI * sigma * sigma * nf * nf).exp(),
        sigma_max: 1.0 / (2f64.sqrt() * PI * nf),
    }
}

/// Γ = πΔE/N.
pub fn lorentzian_width(n: usize, delta_e: f64) -> f64 {
    PI * delta_e / n as f64
}

/// F_Q(Ω) = (Γ/2)²N²/((Γ/2)² + (Ω-π)²) with Γ from [`lorentzian_width`].
/// Returns (F_Q, Γ).
pub fn qfi_lorentzian(n: usize, delta_e: f64, omega: f64) -> (f64, f64) {
    let gamma = lorentzian_width(n, delta_e);
    let h2 = (gamma / 2.0).powi(2);
    let n2 = (n * n) as f64;
    (h2 * n2 / (h2 + (omega - PI).powi(2)), gamma)
}

/// N² tanh²(ΔE/2k_BT); T in units of E₀/k_B.
pub fn qfi_thermal_two_level(n: usize, delta_e: f64, temperature: f64) -> f64 {
    let n2 = (n * n) as f64;
    if temperature == 0.0 {
        return n2;
    }
    n2 * (delta_e / (2.0 * temperature)).tanh().powi(2)
}

/// Temperature at which [`qfi_thermal_two_level`] falls to N²/2.
pub fn half_qfi_temperature(delta_e: f64) -> f64 {
    delta_e / (2.0 * std::f64::consts::FRAC_1_SQRT_2.atanh())
}

/// Rates dΩ/dt (units E₀/ħ) at which the first-order excitation estimate
/// reaches one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaRateBounds {
    /// 2π²ΔE²/N.
    pub general: f64,
    /// 8π²β²/N.
    pub tg_small_barrier: f64,
    /// π²N.
    pub tg_large_barrier: f64,
}

/// Upper estimate of the excitation amplitude ε for an Ω ramp at `rate`
/// through a crossing with gap ΔE: rate·N/(2π²ΔE²).
pub fn omega_ramp_epsilon(n: usize, delta_e: f64, rate: f64) -> f64 {
    rate * n as f64 / (2.0 * PI * PI * delta_e * delta_e)
}

pub fn adiabatic_omega_bound(n: usize, delta_e: f64, beta: f64) -> OmegaRateBounds {
    let nf = n as f64;
    OmegaRateBounds {
        general: 2.0 * PI * PI * delta_e * delta_e / nf,
        tg_small_barrier: 8.0 * PI * PI * beta * beta / nf,
        tg_large_barrier: PI * PI * nf,
    }
}

/// Large-N NOON rate limit 4πβ^(2N)/γ^(2(N-1))·(e/N)^(2N), Stirling form.
pub fn omega_rate_noon(n: usize, beta: f64, gamma: f64) -> f64 {
    let nf = n as f64;
    let log = (4.0 * PI).ln() + 2.0 * nf * beta.ln() - 2.0 * (nf - 1.0) * gamma.ln()
        + 2.0 * nf * (1.0 - nf.ln());
    log.exp()
}

/// Two-state model of the γ ramp through |0,N,0⟩ and |1,N-2,1⟩ over the
/// modes -1, 0, 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GRampModel {
    /// ħω₀₁.
    pub splitting: f64,
    /// F(γ) = √(N(N-1))/(ħω₀₁)².
    pub coupling_derivative: f64,
    /// dγ/dt limit (ħω₀₁)³/√(N(N-1)).
    pub max_rate: f64,
    /// Large-N form 5√5γ³N².
    pub max_rate_large_n: f64,
}

pub fn g_ramp_model(n: usize, gamma: f64) -> GRampModel {
    let nf = n as f64;
    let pairs = (nf * (nf - 1.0)).sqrt();
    let g2 = gamma / 2.0;
    let splitting = ((2.0 + g2 * (4.0 * nf - 6.0)).powi(2) + 4.0 * g2 * g2 * nf * (nf - 1.0)).sqrt();
    GRampModel {
        splitting,
        coupling_derivative: pairs / (splitting * splitting),
        max_rate: splitting.powi(3) / pairs,
        max_rate_large_n: 5.0 * 5f64.sqrt() * gamma.powi(3) * nf * nf,
    }
}

//! SI conversions and the 100-atom ⁷Li ring scenario.

use std::f64::consts::PI;

use serde::Serialize;

use crate::analytic;
use crate::error::{Error, Result};
use crate::params::{default_window, ModelParams};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Atomic mass unit (kg).
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Mass of ⁷Li (kg).
pub const LI7_MASS: f64 = 7.016_003_4366 * AMU;
/// Constant 𝒞 in the confinement-induced 1D coupling.
pub const CONFINEMENT_C: f64 = 1.4603;

/// Experimental parameters in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingScenario {
    /// kg.
    pub mass: f64,
    /// m.
    pub radius: f64,
    /// Transverse trap frequency (rad/s).
    pub omega_perp: f64,
    /// s-wave scattering length (m).
    pub scattering_length: f64,
    /// Barrier area b (J·m).
    pub barrier: f64,
    /// Gaussian barrier width σ (m); zero for a δ barrier.
    pub barrier_width: f64,
    pub n_atoms: usize,
    /// K.
    pub temperature: f64,
}

impl RingScenario {
    /// 100 ⁷Li atoms on a ring of radius 50 μm with ω⊥ = 9×10³ rad/s. The
    /// barrier is chosen so that the gap at the crossing is half its
    /// impenetrable-barrier value and the scattering length puts the
    /// coupling near g = L·E₀/(2N).
    pub fn li7_100() -> Self {
        let mut s = Self {
            mass: LI7_MASS,
            radius: 50e-6,
            omega_perp: 9e3,
            scattering_length: 1.57e-10,
            barrier: 0.0,
            barrier_width: 0.5e-6,
            n_atoms: 100,
            temperature: 0.1e-9,
        };
        let beta = half_gap_barrier(s.n_atoms).expect("bracketed for N = 100");
        s.barrier = beta * s.circumference() * s.e0();
        s
    }

    pub fn circumference(&self) -> f64 {
        2.0 * PI * self.radius
    }

    /// E₀ = 2π²ħ²/(ML²) in J.
    pub fn e0(&self) -> f64 {
        let l = self.circumference();
        2.0 * PI * PI * HBAR * HBAR / (self.mass * l * l)
    }

    /// a⊥ = √(ħ/(Mω⊥)).
    pub fn a_perp(&self) -> f64 {
        (HBAR / (self.mass * self.omega_perp)).sqrt()
    }

    pub fn mean_spacing(&self) -> f64 {
        self.circumference() / self.n_atoms as f64
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("radius", self.radius),
            ("omega_perp", self.omega_perp),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("scattering_length", self.scattering_length),
            ("barrier", self.barrier),
            ("barrier_width", self.barrier_width),
            ("temperature", self.temperature),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        Ok(())
    }
}

/// g = 2ħ²a/(M a⊥(a⊥ - 𝒞a)) in J·m.
pub fn coupling_from_scattering(s: &RingScenario) -> Result<f64> {
    let a_perp = s.a_perp();
    let denom = a_perp - CONFINEMENT_C * s.scattering_length;
    if denom <= 0.0 {
        return Err(Error::ConfinementResonance(denom));
    }
    Ok(2.0 * HBAR * HBAR * s.scattering_length / (s.mass * a_perp * denom))
}

/// Inverse of [`coupling_from_scattering`] at fixed mass and ω⊥.
pub fn scattering_from_coupling(mass: f64, omega_perp: f64, g: f64) -> f64 {
    let a_perp = (HBAR / (mass * omega_perp)).sqrt();
    g * mass * a_perp * a_perp / (2.0 * HBAR * HBAR + g * mass * a_perp * CONFINEMENT_C)
}

/// dg/da at fixed confinement (J).
pub fn coupling_slope(s: &RingScenario) -> Result<f64> {
    let denom = s.a_perp() - CONFINEMENT_C * s.scattering_length;
    if denom <= 0.0 {
        return Err(Error::ConfinementResonance(denom));
    }
    Ok(2.0 * HBAR * HBAR / (s.mass * denom * denom))
}

/// A scenario expressed in model units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dimensionless {
    pub params: ModelParams,
    /// E₀ in J.
    pub e0: f64,
    /// k_B T / E₀.
    pub temperature: f64,
}

/// β = b/(L·E₀), γ = g/(L·E₀), σ̃ = σ/L, k_BT/E₀.
pub fn to_dimensionless(s: &RingScenario, modes_per_side: usize) -> Result<Dimensionless> {
    s.validate()?;
    let l = s.circumference();
    let e0 = s.e0();
    let g = coupling_from_scattering(s)?;
    let params = ModelParams {
        n_atoms: s.n_atoms,
        mode_window: default_window(s.n_atoms, modes_per_side)?,
        omega: PI,
        barrier: s.barrier / (l * e0),
        barrier_width: s.barrier_width / l,
        coupling: g / (l * e0),
        coupling_rescale: 1.0,
    };
    params.validate()?;
    Ok(Dimensionless {
        params,
        e0,
        temperature: K_B * s.temperature / e0,
    })
}

/// Rebuild the SI scenario from model units, keeping the mass, radius and
/// ω⊥ of `template`.
pub fn to_si(template: &RingScenario, d: &Dimensionless) -> Result<RingScenario> {
    let l = template.circumference();
    let e0 = template.e0();
    let g = d.params.coupling * l * e0;
    let s = RingScenario {
        mass: template.mass,
        radius: template.radius,
        omega_perp: template.omega_perp,
        scattering_length: scattering_from_coupling(template.mass, template.omega_perp, g),
        barrier: d.params.barrier * l * e0,
        barrier_width: d.params.barrier_width * l,
        n_atoms: d.params.n_atoms,
        temperature: d.temperature * e0 / K_B,
    };
    s.validate()?;
    Ok(s)
}

/// Barrier revolution frequency ν = ħΩ/(ML²) in Hz.
pub fn stirring_frequency(s: &RingScenario, omega: f64) -> f64 {
    let l = s.circumference();
    HBAR * omega / (s.mass * l * l)
}

/// β for which the Tonks-Girardeau gap is half of its impenetrable-barrier
/// value. Even N uses the N + 1 spectrum.
pub fn half_gap_barrier(n: usize) -> Result<f64> {
    let n_odd = if n % 2 == 1 { n } else { n + 1 };
    let target = 0.5 * analytic::tg_gap_large_barrier(n);
    let f = |beta: f64| -> Result<f64> { Ok(analytic::tg_gap(n_odd, beta)? - target) };
    let (mut lo, mut hi) = (1e-6, 1e6);
    if f(lo)? > 0.0 || f(hi)? < 0.0 {
        return Err(Error::RootNotBracketed(format!("half-gap barrier for N={n}")));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    Ok((lo * hi).sqrt())
}

/// One line of the scenario report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportItem {
    pub key: &'static str,
    pub label: &'static str,
    pub value: f64,
    pub unit: &'static str,
    pub formula: &'static str,
    /// Value quoted for comparison, when there is one.
    pub reference: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: RingScenario,
    pub items: Vec<ReportItem>,
}

impl ScenarioReport {
    pub fn get(&self, key: &str) -> Option<&ReportItem> {
        self.items.iter().find(|i| i.key == key)
    }

    pub fn value(&self, key: &str) -> f64 {
        self.get(key).map_or(f64::NAN, |i| i.value)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            out.push_str(&format!(
                "{:<34} {:>14.6e} {:<14} [{}]\n",
                item.label, item.value, item.unit, item.formula
            ));
            if let Some(r) = item.reference {
                out.push_str(&format!("{:<34} {:>14.6e} {:<14}\n", "  quoted", r, item.unit));
            }
            if let Some(note) = &item.note {
                out.push_str(&format!("  note: {note}\n"));
            }
        }
        out
    }
}

/// All derived quantities of the ring experiment.
pub fn scenario_report(s: &RingScenario) -> Result<ScenarioReport> {
    s.validate()?;
    let n = s.n_atoms;
    let nf = n as f64;
    let l = s.circumference();
    let e0 = s.e0();
    let e0_rate = e0 / HBAR;
    let beta = s.barrier / (l * e0);
    let mut items = Vec::new();
    let mut push = |key, label, value, unit, formula, reference: Option<f64>, note: Option<String>| {
        items.push(ReportItem {
            key,
            label,
            value,
            unit,
            formula,
            reference,
            note,
        })
    };

    push("circumference", "circumference L", l, "m", "L = 2πR", None, None);
    push("mean_spacing", "mean atom spacing", s.mean_spacing(), "m", "L/N", Some(3.1e-6), None);
    push("a_perp", "transverse length a⊥", s.a_perp(), "m", "√(ħ/Mω⊥)", Some(1e-6), None);
    push("e0", "energy unit E₀", e0, "J", "2π²ħ²/(ML²)", None, None);
    push("e0_rate", "E₀/ħ", e0_rate, "1/s", "E₀/ħ", Some(1.8), None);

    let g = coupling_from_scattering(s)?;
    push("coupling", "coupling g", g, "J·m", "2ħ²a/(M a⊥(a⊥-𝒞a))", None, None);
    let g_noon = l * e0 / (2.0 * nf);
    push("coupling_noon", "coupling at NOON point", g_noon, "J·m", "L·E₀/(2N)", None, None);
    let a_noon = scattering_from_coupling(s.mass, s.omega_perp, g_noon);
    push("scattering_noon", "scattering length at NOON point", a_noon, "m", "inverse of g(a)", None, None);

    let gap = 0.5 * analytic::tg_gap_large_barrier(n);
    push("gap", "target gap ΔE", gap, "E₀", "half of (2N+1)/4", Some(25.0), None);
    push("gap_rate", "target gap ΔE/ħ", gap * e0_rate, "1/s", "ΔE/ħ", Some(45.0), None);
    push(
        "barrier_dimensionless",
        "barrier β = b/(LE₀) giving ΔE",
        beta,
        "",
        "ε_N - ε_{N-1} = ΔE",
        None,
        (n % 2 == 0).then(|| "even N: barrier taken from the N+1 spectrum".to_string()),
    );

    let nu = stirring_frequency(s, PI);
    push("stirring_frequency", "stirring frequency at Ω=π", nu, "Hz", "ħΩ/(ML²)", Some(0.29), None);
    let width = analytic::lorentzian_width(n, gap);
    let tolerance = nu * width / PI;
    push(
        "stirring_tolerance",
        "stirring frequency tolerance",
        tolerance,
        "Hz",
        "ν·Γ/π, Γ = πΔE/(E₀N)",
        Some(0.01),
        Some("quoted tolerance is not reproduced by ν·Γ/π at this gap".to_string()),
    );

    // dΩ/dt in E₀/ħ per unit dimensionless time, then as dν/dt
    let omega_rate = analytic::adiabatic_omega_bound(n, gap, beta).general;
    let nu_rate = omega_rate * e0_rate * e0_rate / (2.0 * PI * PI);
    push(
        "omega_rate",
        "max dν/dt",
        nu_rate,
        "Hz/s",
        "2π²ΔE²/(Nħ E₀) converted to ν",
        Some(26.0),
        Some("formula chain differs from the quoted 26 × 2π Hz/s".to_string()),
    );

    let ramp = analytic::g_ramp_model(n, g_noon / (l * e0));
    let to_si_rate = l * e0 * e0_rate;
    let g_rate = ramp.max_rate_large_n * to_si_rate;
    push(
        "g_rate",
        "max dg/dt at NOON point",
        g_rate,
        "kg·m³/s³",
        "5√5 g³N²/(ħE₀L²)",
        Some(1.7e-39),
        None,
    );
    push(
        "g_rate_full",
        "max dg/dt, full two-state form",
        ramp.max_rate * to_si_rate,
        "kg·m³/s³",
        "(L/E₀)ħ²ω₀₁³/√(N(N-1))",
        None,
        Some("the large-N form drops the 2E₀ offset of ħω₀₁".to_string()),
    );
    let probe = RingScenario {
        scattering_length: a_noon,
        ..s.clone()
    };
    let a_rate = g_rate / coupling_slope(&probe)?;
    push(
        "a_rate",
        "max da/dt",
        a_rate * 1e10 * 1e-3,
        "Å/ms",
        "(dg/dt)/(dg/da)",
        Some(0.0044),
        Some("chaining g(a) with dg/dt does not give the quoted 0.0044 Å/ms".to_string()),
    );

    let kt = analytic::half_qfi_temperature(gap) * e0;
    push(
        "temperature_threshold",
        "temperature where F_Q = N²/2",
        kt / K_B,
        "K",
        "N²tanh²(ΔE/2k_BT) = N²/2",
        Some(0.2e-9),
        None,
    );

    let sigma_max = analytic::gaussian_suppression(beta, 0.0, n).sigma_max * l;
    push(
        "barrier_width_max",
        "barrier width bound",
        sigma_max,
        "m",
        "L/(√2πN)",
        Some(0.5e-6),
        Some("the width bound L/(√2πN) exceeds the quoted 0.5 μm".to_string()),
    );
    push(
        "temperature_dimensionless",
        "k_BT/E₀",
        K_B * s.temperature / e0,
        "",
        "k_BT/E₀",
        None,
        None,
    );

    Ok(ScenarioReport {
        scenario: s.clone(),
        items,
    })
}

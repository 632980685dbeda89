//! Dimensionless model parameters.
//!
//! Energies are measured in E₀ = 2π²ħ²/(ML²), lengths in the ring
//! circumference L and times in ħ/E₀. The barrier strength is β = b/(L·E₀),
//! the contact coupling γ = g/(L·E₀) and the Gaussian barrier width σ̃ = σ/L.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive interval `[lo, hi]` of single-particle angular momentum modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeWindow {
    pub lo: i32,
    pub hi: i32,
}

impl ModeWindow {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "mode window [{lo}, {hi}] needs lo < hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, k: i32) -> bool {
        (self.lo..=self.hi).contains(&k)
    }

    pub fn modes(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    /// Window shifted by `shift` modes.
    pub fn shifted(&self, shift: i32) -> Self {
        Self {
            lo: self.lo + shift,
            hi: self.hi + shift,
        }
    }
}

/// Window of `2 * modes_per_side` modes symmetric about k = 1/2, so that
/// every mode k has its partner 1 - k inside the window.
pub fn default_window(_n_atoms: usize, modes_per_side: usize) -> Result<ModeWindow> {
    if modes_per_side == 0 {
        return Err(Error::InvalidParameter(
            "modes_per_side must be at least 1".into(),
        ));
    }
    let m = modes_per_side as i32;
    ModeWindow::new(1 - m, m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_atoms: usize,
    pub mode_window: ModeWindow,
    /// Dimensionless rotation rate Ω; the crossing sits at Ω = π.
    pub omega: f64,
    /// β = b/(L·E₀).
    pub barrier: f64,
    /// σ̃ = σ/L; zero selects the δ-function barrier.
    pub barrier_width: f64,
    /// γ = g/(L·E₀).
    pub coupling: f64,
    /// Multiplies `coupling` to compensate for mode truncation.
    pub coupling_rescale: f64,
}

impl ModelParams {
    pub fn new(n_atoms: usize, modes_per_side: usize) -> Result<Self> {
        let params = Self {
            n_atoms,
            mode_window: default_window(n_atoms, modes_per_side)?,
            omega: PI,
            barrier: 0.0,
            barrier_width: 0.0,
            coupling: 0.0,
            coupling_rescale: 1.0,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_barrier(mut self, barrier: f64) -> Self {
        self.barrier = barrier;
        self
    }

    pub fn with_barrier_width(mut self, width: f64) -> Self {
        self.barrier_width = width;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_window(mut self, window: ModeWindow) -> Self {
        self.mode_window = window;
        self
    }

    pub fn with_coupling_rescale(mut self, rescale: f64) -> Self {
        self.coupling_rescale = rescale;
        self
    }

    /// Coupling actually entering the Hamiltonian.
    pub fn effective_coupling(&self) -> f64 {
        self.coupling * self.coupling_rescale
    }

    pub fn n_modes(&self) -> usize {
        self.mode_window.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_atoms == 0 {
            return bad("n_atoms must be at least 1".into());
        }
        if self.mode_window.lo >= self.mode_window.hi {
            return bad(format!(
                "mode window [{}, {}] needs lo < hi",
                self.mode_window.lo, self.mode_window.hi
            ));
        }
        for (name, v) in [
            ("barrier", self.barrier),
            ("barrier_width", self.barrier_width),
            ("coupling", self.coupling),
            ("coupling_rescale", self.coupling_rescale),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !self.omega.is_finite() {
            return bad("omega must be finite".into());
        }
        Ok(())
    }

    /// Parse the line-based `key=value` format. Blank lines and `#` comments
    /// are skipped; unknown keys are rejected.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        if let Some(key) = map.keys().find(|k| !PARAM_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        Self::from_map(&map)
    }

    /// Build parameters from an already parsed map, ignoring keys that are
    /// not model-parameter keys (the caller decides whether they are legal).
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let get_f = |key: &str, default: f64| -> Result<f64> {
            match map.get(key) {
                Some(v) => parse_f64(key, v),
                None => Ok(default),
            }
        };
        let get_u = |key: &str, default: usize| -> Result<usize> {
            match map.get(key) {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("{key}: expected integer, got '{v}'"))),
                None => Ok(default),
            }
        };
        let n_atoms = get_u("n_atoms", 5)?;
        let modes_per_side = get_u("modes_per_side", 9)?;
        let params = Self {
            n_atoms,
            mode_window: default_window(n_atoms, modes_per_side)?,
            omega: get_f("omega", PI)?,
            barrier: get_f("barrier", 0.0)?,
            barrier_width: get_f("barrier_width", 0.0)?,
            coupling: get_f("coupling", 0.0)?,
            coupling_rescale: get_f("coupling_rescale", 1.0)?,
        };
        params.validate()?;
        Ok(params)
    }

    /// Modes per side for windows produced by [`default_window`].
    pub fn modes_per_side(&self) -> Option<usize> {
        let w = self.mode_window;
        (w.lo == 1 - w.hi && w.hi >= 1).then_some(w.hi as usize)
    }

    /// Serialize back into the `key=value` format. Only windows symmetric
    /// about k = 1/2 are representable.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n_atoms={}\n", self.n_atoms));
        if let Some(m) = self.modes_per_side() {
            out.push_str(&format!("modes_per_side={m}\n"));
        }
        out.push_str(&format!("omega={:?}\n", self.omega));
        out.push_str(&format!("barrier={:?}\n", self.barrier));
        out.push_str(&format!("barrier_width={:?}\n", self.barrier_width));
        out.push_str(&format!("coupling={:?}\n", self.coupling));
        out.push_str(&format!("coupling_rescale={:?}\n", self.coupling_rescale));
        out
    }
}

/// Keys understood by [`ModelParams::from_config_str`].
pub const PARAM_KEYS: &[&str] = &[
    "n_atoms",
    "modes_per_side",
    "omega",
    "barrier",
    "barrier_width",
    "coupling",
    "coupling_rescale",
];

pub(crate) fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let t = v.trim();
    // "pi" and multiples like "0.5pi" are accepted for rotation rates.
    if let Some(prefix) = t.strip_suffix("pi") {
        let factor = if prefix.is_empty() {
            1.0
        } else {
            prefix
                .trim_end_matches('*')
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: expected number, got '{v}'")))?
        };
        return Ok(factor * PI);
    }
    t.parse::<f64>()
        .map_err(|_| Error::Config(format!("{key}: expected number, got '{v}'")))
}

/// Split `key=value` lines into a map. Duplicate keys are an error.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected key=value, got '{raw}'", lineno + 1))
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Config(format!("line {}: empty key or value", lineno + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", lineno + 1)));
        }
    }
    Ok(map)
}

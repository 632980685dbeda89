//! Layered job settings: preset, then config file, then flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{parse_f64, parse_key_values, ModelParams, PARAM_KEYS};

/// Keys beyond the model parameters that a config file may set.
pub const JOB_KEYS: &[&str] = &[
    "omega_min",
    "omega_max",
    "omega_steps",
    "levels",
    "gamma_min",
    "gamma_max",
    "gamma_steps",
    "gamma_scale",
    "mode",
    "n_min",
    "n_max",
    "t_min",
    "t_max",
    "t_steps",
    "gammas",
    "param",
    "from",
    "to",
    "duration",
    "steps",
    "noon",
    "barrier_removed",
    "workers",
    "seed",
    "tol",
    "calibrate",
];

pub const PRESETS: &[&str] = &["fig2", "fig3", "fig4a", "fig4b", "fig5", "fig6", "li7-100"];

/// Interaction strength used for the Tonks-Girardeau presets.
pub const TG_COUPLING: f64 = 5.0;

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Key/value pairs of a named preset.
pub fn preset(name: &str) -> Result<Vec<(&'static str, String)>> {
    let tg = num(TG_COUPLING);
    let ring = |barrier: &str| {
        vec![
            ("n_atoms", "5".to_string()),
            ("modes_per_side", "9".to_string()),
            ("barrier", barrier.to_string()),
        ]
    };
    let mut kv = match name {
        "fig2" => {
            let mut v = ring("0.008");
            v.extend([
                ("coupling", tg),
                ("omega_min", "0".into()),
                ("omega_max", "2pi".into()),
                ("omega_steps", "41".into()),
                ("levels", "4".into()),
            ]);
            v
        }
        "fig3" => {
            let mut v = ring("0.08");
            v.extend([
                ("gamma_min", "0.01".into()),
                ("gamma_max", "20".into()),
                ("gamma_steps", "16".into()),
                ("gamma_scale", "log".into()),
                ("levels", "4".into()),
            ]);
            v
        }
        "fig4a" => vec![
            ("mode", "noon".into()),
            ("barrier", "0.008".into()),
            ("n_min", "2".into()),
            ("n_max", "20".into()),
        ],
        "fig4b" => vec![
            ("mode", "tg".into()),
            ("barrier", "0.08".into()),
            ("n_min", "1".into()),
            ("n_max", "41".into()),
        ],
        "fig5" => {
            let mut v = ring("0.08");
            v.extend([
                ("coupling", tg),
                ("omega_min", num(PI - 0.3)),
                ("omega_max", num(PI + 0.3)),
                ("omega_steps", "21".into()),
            ]);
            v
        }
        "fig6" => {
            let mut v = ring("0.08");
            v.extend([
                ("coupling", tg),
                ("gammas", "0.2,1,5".into()),
                ("t_min", "0".into()),
                ("t_max", "0.5".into()),
                ("t_steps", "51".into()),
                ("levels", "20".into()),
            ]);
            v
        }
        "li7-100" => {
            return Err(Error::Config(
                "preset li7-100 describes an SI scenario; use it with the scenario command".into(),
            ))
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            )))
        }
    };
    kv.sort_by_key(|(k, _)| *k);
    Ok(kv)
}

fn known(key: &str) -> bool {
    PARAM_KEYS.contains(&key) || JOB_KEYS.contains(&key)
}

/// Fully merged settings of one job.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    /// Merge `preset`, the file at `config` and `overrides`, later sources
    /// winning. Unknown keys are rejected.
    pub fn resolve(
        preset_name: Option<&str>,
        config: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(name) = preset_name {
            for (k, v) in preset(name)? {
                map.insert(k.to_string(), v);
            }
        }
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            map.extend(parse_key_values(&text)?);
        }
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        if let Some(key) = map.keys().find(|k| !known(k)) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        Ok(Self { map })
    }

    pub fn map(&self) -> &BTreeMap<String, String> {
        &self.map
    }

    pub fn insert(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    pub fn model(&self) -> Result<ModelParams> {
        ModelParams::from_map(&self.map)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.map.get(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    pub fn f64_required(&self, key: &str) -> Result<f64> {
        self.f64(key)?
            .ok_or_else(|| Error::Config(format!("missing required setting '{key}'")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: expected integer, got '{v}'"))),
            None => Ok(default),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.map.get(key) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: expected integer, got '{v}'"))),
            None => Ok(default),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.map.get(key).map(|v| v.trim()) {
            None => Ok(default),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.map
            .get(key)
            .map(|v| v.split(',').map(|x| parse_f64(key, x)).collect())
            .transpose()
    }
}

/// `steps` points from `lo` to `hi` inclusive, evenly or geometrically spaced.
pub fn grid(lo: f64, hi: f64, steps: usize, log: bool) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Config("grid needs at least one point".into()));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Config(format!("grid bounds must be finite, got {lo}..{hi}")));
    }
    if log && !(lo > 0.0 && hi > 0.0) {
        return Err(Error::Config("logarithmic grid needs positive bounds".into()));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let s = i as f64 / last;
            if i == steps - 1 {
                hi
            } else if log {
                (lo.ln() + s * (hi.ln() - lo.ln())).exp()
            } else {
                lo + s * (hi - lo)
            }
        })
        .collect())
}

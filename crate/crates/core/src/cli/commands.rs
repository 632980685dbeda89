//! Pipelines behind each subcommand.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;

use super::config::{grid, Settings};
use super::output::{fmt_f64, out_dir, Csv, Metadata};
use crate::analytic;
use crate::basis::FockBasis;
use crate::dynamics::{self, EvolveOptions, RampParam, RampSpec};
use crate::eigen::{EigenResult, SolverConfig};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, calibrate_coupling, k_operator, CalibrationTarget};
use crate::observables::{momentum_distribution, qfi_pure, qfi_vs_temperature};
use crate::params::ModelParams;
use crate::spectra::{self, SweepPoint};
use crate::units::{self, RingScenario};

/// Side outputs requested on the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dumps {
    pub basis: bool,
    pub operator: bool,
}

/// A model job with its basis built and metadata started.
struct Job {
    settings: Settings,
    params: ModelParams,
    solver: SolverConfig,
    workers: usize,
    out: PathBuf,
    basis: Arc<FockBasis>,
    meta: Metadata,
}

fn solver_config(settings: &Settings) -> Result<SolverConfig> {
    let defaults = SolverConfig::default();
    let tol = settings.f64_or("tol", defaults.tol)?;
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be > 0, got {tol}")));
    }
    let seed = settings.u64_or("seed", defaults.seed)?;
    Ok(defaults.with_tol(tol).with_seed(seed))
}

fn prepare(command: &str, settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<Job> {
    let out = out_dir(out)?;
    let mut params = settings.model()?;
    let solver = solver_config(&settings)?;
    let workers = settings.usize_or("workers", 1)?.max(1);
    let basis = Arc::new(FockBasis::enumerate(&params)?);
    let mut meta = Metadata::new(command);
    if settings.bool_or("calibrate", false)? {
        let factor =
            calibrate_coupling(&basis, &params, CalibrationTarget::TonksGirardeauGap, &solver)?;
        params.coupling_rescale = factor;
        meta.set("calibration_factor", json!(factor));
    }
    if dumps.basis {
        basis.write_csv(BufWriter::new(File::create(out.join("basis.csv"))?))?;
    }
    if dumps.operator {
        let h = assemble(&params, &basis)?.to_csr();
        h.write_coo(BufWriter::new(File::create(out.join("hamiltonian_coo.csv"))?))?;
    }
    meta.set("params", json!(params));
    meta.set("settings", json!(settings.map()));
    meta.set("basis_size", json!(basis.len()));
    meta.set("seed", json!(solver.seed));
    meta.set("tol", json!(solver.tol));
    meta.set("workers", json!(workers));
    Ok(Job {
        settings,
        params,
        solver,
        workers,
        out,
        basis,
        meta,
    })
}

fn converged(points: Vec<SweepPoint>) -> Result<Vec<(f64, EigenResult)>> {
    points
        .into_iter()
        .map(|p| p.outcome.map(|r| (p.parameter, r)))
        .collect()
}

fn ground_observables(r: &EigenResult, job: &Job, k: &dyn crate::LinearOperator) -> Result<[f64; 3]> {
    let d = momentum_distribution(r.ground_state(), &job.basis)?;
    let qfi = qfi_pure(r.ground_state(), k)?;
    Ok([d.get(0), d.get(job.params.n_atoms as i64), qfi])
}

pub fn spectrum(settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<()> {
    let mut job = prepare("spectrum", settings, out, dumps)?;
    let s = &job.settings;
    let levels = s.usize_or("levels", 4)?;
    let omegas = grid(
        s.f64_or("omega_min", 0.0)?,
        s.f64_or("omega_max", 2.0 * PI)?,
        s.usize_or("omega_steps", 41)?,
        false,
    )?;
    let points = spectra::spectrum_sweep(&job.params, &job.basis, &omegas, levels, &job.solver, job.workers)?;
    let min_gap = spectra::min_gap_index(&points);
    let results = converged(points)?;
    let k = k_operator(&job.basis);

    let mut csv = Csv::create(
        &job.out.join("spectrum.csv"),
        &["omega: dimensionless rotation rate; energy: E0"],
        &["omega", "level_index", "energy"],
    )?;
    let mut mom = Csv::create(
        &job.out.join("momentum.csv"),
        &["omega: dimensionless rotation rate; p_k0, p_kn: ground-state P(K=0), P(K=N); qfi: dimensionless"],
        &["omega", "p_k0", "p_kn", "qfi"],
    )?;
    for (omega, r) in &results {
        for (i, e) in r.eigenvalues.iter().enumerate() {
            csv.row(&[fmt_f64(*omega), i.to_string(), fmt_f64(*e)])?;
        }
        let [p0, pn, q] = ground_observables(r, &job, &k)?;
        mom.row(&[fmt_f64(*omega), fmt_f64(p0), fmt_f64(pn), fmt_f64(q)])?;
    }
    csv.finish()?;
    mom.finish()?;
    if let Some(i) = min_gap {
        job.meta.set("min_gap_omega", json!(results[i].0));
        job.meta.set("min_gap", json!(results[i].1.gap()));
    }
    job.meta.write(&job.out.join("spectrum.json"))
}

pub fn gap_vs_g(settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<()> {
    let mut job = prepare("gap-vs-g", settings, out, dumps)?;
    let s = &job.settings;
    let levels = s.usize_or("levels", 4)?;
    let log = match s.str("gamma_scale").unwrap_or("log") {
        "log" => true,
        "linear" => false,
        other => return Err(Error::Config(format!("gamma_scale must be log or linear, got '{other}'"))),
    };
    let gammas = grid(
        s.f64_or("gamma_min", 0.01)?,
        s.f64_or("gamma_max", 20.0)?,
        s.usize_or("gamma_steps", 16)?,
        log,
    )?;
    let points = spectra::gap_vs_g_sweep(&job.params, &job.basis, &gammas, levels, &job.solver, job.workers)?;
    let min_gap = spectra::min_gap_index(&points);
    let results = converged(points)?;
    let k = k_operator(&job.basis);

    let mut csv = Csv::create(
        &job.out.join("gap_vs_g.csv"),
        &["gamma: g/(L E0); energy_rel_ground: E_j - E_0 in E0; omega = pi"],
        &["gamma", "level_index", "energy_rel_ground"],
    )?;
    let mut ground = Csv::create(
        &job.out.join("gap_vs_g_ground.csv"),
        &["gamma: g/(L E0); p_k0, p_kn: ground-state P(K=0), P(K=N); qfi: dimensionless"],
        &["gamma", "p_k0", "p_kn", "qfi"],
    )?;
    for (gamma, r) in &results {
        for (i, e) in r.relative_energies().iter().enumerate() {
            csv.row(&[fmt_f64(*gamma), i.to_string(), fmt_f64(*e)])?;
        }
        let [p0, pn, q] = ground_observables(r, &job, &k)?;
        ground.row(&[fmt_f64(*gamma), fmt_f64(p0), fmt_f64(pn), fmt_f64(q)])?;
    }
    csv.finish()?;
    ground.finish()?;
    if let Some(i) = min_gap {
        job.meta.set("min_gap_gamma", json!(results[i].0));
        job.meta.set("min_gap", json!(results[i].1.gap()));
        let interior = i > 0 && i + 1 < results.len();
        job.meta.set("min_gap_interior", json!(interior));
    }
    job.meta.write(&job.out.join("gap_vs_g.json"))
}

/// Gap at Ω = π of the two-mode (k = 0, 1) model, by dense diagonalization.
pub fn two_mode_gap(n: usize, beta: f64, gamma: f64) -> Result<f64> {
    let p = ModelParams::new(n, 1)?
        .with_barrier(beta)
        .with_coupling(gamma)
        .with_omega(PI);
    let basis = Arc::new(FockBasis::enumerate(&p)?);
    let cfg = SolverConfig::default().with_method(crate::eigen::Method::Dense);
    spectra::gap_at_crossing(&p, &basis, &cfg)
}

pub fn gap_vs_n(settings: Settings, out: Option<&Path>) -> Result<()> {
    let out = out_dir(out)?;
    let mut meta = Metadata::new("gap-vs-n");
    let mode = settings.str("mode").unwrap_or("noon").to_string();
    let (n_lo, n_hi, beta_default) = match mode.as_str() {
        "noon" => (2, 20, 0.008),
        "tg" => (1, 41, 0.08),
        other => return Err(Error::Config(format!("mode must be noon or tg, got '{other}'"))),
    };
    let n_min = settings.usize_or("n_min", n_lo)?;
    let n_max = settings.usize_or("n_max", n_hi)?;
    let beta = settings.f64_or("barrier", beta_default)?;
    if n_min > n_max {
        return Err(Error::Config(format!("n_min {n_min} exceeds n_max {n_max}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::Config(format!("barrier must be >= 0, got {beta}")));
    }
    let path = out.join("gap_vs_n.csv");
    if mode == "noon" {
        if n_min < 2 {
            return Err(Error::Config("the NOON rule needs N >= 2".into()));
        }
        let mut csv = Csv::create(
            &path,
            &["n: atoms; gamma: g/(L E0) from 4 pi beta sqrt(N)/(N-1); delta_e: E0; valid: analytic regime"],
            &["n", "gamma", "delta_e", "delta_e_numeric", "valid"],
        )?;
        for n in n_min..=n_max {
            let gamma = analytic::noon_coupling_rule(n, beta);
            let g = analytic::noon_gap(n, beta, gamma)?;
            let numeric = two_mode_gap(n, beta, gamma)?;
            csv.row(&[n.to_string(), fmt_f64(gamma), fmt_f64(g.delta_e), fmt_f64(numeric), g.valid.to_string()])?;
        }
        csv.finish()?;
    } else {
        let mut csv = Csv::create(
            &path,
            &["n: atoms (odd); delta_e: Tonks-Girardeau gap in E0"],
            &["n", "delta_e"],
        )?;
        for n in (n_min..=n_max).filter(|n| n % 2 == 1) {
            csv.row(&[n.to_string(), fmt_f64(analytic::tg_gap(n, beta)?)])?;
        }
        csv.finish()?;
    }
    meta.set("settings", json!(settings.map()));
    meta.set("mode", json!(mode));
    meta.set("barrier", json!(beta));
    meta.write(&out.join("gap_vs_n.json"))
}

pub fn qfi_omega(settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<()> {
    let mut job = prepare("qfi-omega", settings, out, dumps)?;
    let s = &job.settings;
    let omegas = grid(
        s.f64_or("omega_min", PI - 0.3)?,
        s.f64_or("omega_max", PI + 0.3)?,
        s.usize_or("omega_steps", 21)?,
        false,
    )?;
    let n = job.params.n_atoms;
    let delta_e = spectra::gap_at_crossing(&job.params, &job.basis, &job.solver)?;
    let points = spectra::spectrum_sweep(&job.params, &job.basis, &omegas, 2, &job.solver, job.workers)?;
    let results = converged(points)?;
    let k = k_operator(&job.basis);
    let mut csv = Csv::create(
        &job.out.join("qfi_omega.csv"),
        &["omega: dimensionless rotation rate; qfi: ground-state quantum Fisher information; qfi_lorentzian: two-state form"],
        &["omega", "qfi", "qfi_lorentzian"],
    )?;
    for (omega, r) in &results {
        let q = qfi_pure(r.ground_state(), &k)?;
        let (l, _) = analytic::qfi_lorentzian(n, delta_e, *omega);
        csv.row(&[fmt_f64(*omega), fmt_f64(q), fmt_f64(l)])?;
    }
    csv.finish()?;
    job.meta.set("delta_e", json!(delta_e));
    job.meta.set("lorentzian_width", json!(analytic::lorentzian_width(n, delta_e)));
    job.meta.write(&job.out.join("qfi_omega.json"))
}

pub fn qfi_temp(settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<()> {
    let mut job = prepare("qfi-temp", settings, out, dumps)?;
    let s = &job.settings;
    let levels = s.usize_or("levels", 20)?;
    let temps = grid(
        s.f64_or("t_min", 0.0)?,
        s.f64_or("t_max", 0.5)?,
        s.usize_or("t_steps", 51)?,
        false,
    )?;
    if temps.iter().any(|t| *t < 0.0) {
        return Err(Error::Config("temperatures must be >= 0".into()));
    }
    let gammas = s.f64_list("gammas")?.unwrap_or_else(|| vec![job.params.coupling]);
    let n = job.params.n_atoms;
    let k = k_operator(&job.basis);
    let mut csv = Csv::create(
        &job.out.join("qfi_temp.csv"),
        &["temperature: k_B T / E0; gamma: g/(L E0); qfi: thermal quantum Fisher information; qfi_two_level: N^2 tanh^2(dE/2kT)"],
        &["temperature", "gamma", "qfi", "qfi_two_level", "converged"],
    )?;
    let mut gaps = Vec::new();
    for &gamma in &gammas {
        let p = job.params.clone().with_coupling(gamma);
        let r = spectra::solve(&p, &job.basis, 2 * levels, &job.solver, None)?;
        let delta_e = r.gap().unwrap_or(0.0);
        gaps.push(json!({"gamma": gamma, "delta_e": delta_e}));
        for point in qfi_vs_temperature(&r, &k, &temps, levels)? {
            let two = analytic::qfi_thermal_two_level(n, delta_e, point.temperature);
            csv.row(&[
                fmt_f64(point.temperature),
                fmt_f64(gamma),
                fmt_f64(point.qfi),
                fmt_f64(two),
                point.converged.to_string(),
            ])?;
        }
    }
    csv.finish()?;
    job.meta.set("gaps", json!(gaps));
    job.meta.write(&job.out.join("qfi_temp.json"))
}

pub fn ramp(settings: Settings, out: Option<&Path>, dumps: Dumps) -> Result<()> {
    let mut job = prepare("ramp", settings, out, dumps)?;
    let s = &job.settings;
    let param: RampParam = s.str("param").unwrap_or("omega").parse()?;
    let noon = s.bool_or("noon", false)?;
    let current = match param {
        RampParam::Omega => job.params.omega,
        RampParam::Coupling => job.params.coupling,
    };
    let spec = RampSpec {
        param,
        start: s.f64_or("from", current)?,
        end: s.f64_required("to")?,
        duration: s.f64_required("duration")?,
        steps: s.usize_or("steps", 1000)?,
    };
    let opts = EvolveOptions {
        solver: job.solver.clone(),
        ..EvolveOptions::default()
    };
    let result = if noon {
        let removed = s.bool_or("barrier_removed", true)?;
        dynamics::noon_ramp(&job.params, &job.basis, &spec, removed, &opts)?
    } else {
        dynamics::evolve_ramp(&job.params, &job.basis, &spec, &opts)?
    };
    let mut csv = Csv::create(
        &job.out.join("ramp.csv"),
        &["time: hbar/E0; fidelity: overlap with instantaneous ground manifold; excitation: 1 - fidelity"],
        &["time", "fidelity", "excitation", "p_k0", "p_kn"],
    )?;
    for r in &result.samples {
        csv.row(&[
            fmt_f64(r.time),
            fmt_f64(r.fidelity),
            fmt_f64(r.excitation),
            fmt_f64(r.p_k0),
            fmt_f64(r.p_kn),
        ])?;
    }
    csv.finish()?;
    job.meta.set("ramp", json!(spec));
    job.meta.set("rate", json!(spec.rate()));
    job.meta.set("final", json!(result.final_sample()));
    job.meta.set("noon_overlap", json!(result.noon_overlap));
    job.meta.write(&job.out.join("ramp.json"))
}

/// SI inputs of the scenario command; unset fields keep the preset value.
#[derive(Debug, Clone, Default)]
pub struct ScenarioInputs {
    pub preset: Option<String>,
    pub mass: Option<f64>,
    pub radius: Option<f64>,
    pub omega_perp: Option<f64>,
    pub scattering_length: Option<f64>,
    pub barrier: Option<f64>,
    pub barrier_width: Option<f64>,
    pub n_atoms: Option<usize>,
    pub temperature: Option<f64>,
}

impl ScenarioInputs {
    pub fn resolve(&self) -> Result<RingScenario> {
        let mut s = match self.preset.as_deref() {
            Some("li7-100") => RingScenario::li7_100(),
            Some(other) => {
                return Err(Error::Config(format!(
                    "scenario preset must be li7-100, got '{other}'"
                )))
            }
            None => {
                let missing: Vec<&str> = [
                    ("mass", self.mass.is_none()),
                    ("radius", self.radius.is_none()),
                    ("omega-perp", self.omega_perp.is_none()),
                    ("scattering-length", self.scattering_length.is_none()),
                    ("barrier-area", self.barrier.is_none()),
                    ("n-atoms", self.n_atoms.is_none()),
                ]
                .iter()
                .filter(|(_, m)| *m)
                .map(|(name, _)| *name)
                .collect();
                if !missing.is_empty() {
                    return Err(Error::Config(format!(
                        "without --preset these flags are required: {}",
                        missing.join(", ")
                    )));
                }
                RingScenario {
                    mass: 0.0,
                    radius: 0.0,
                    omega_perp: 0.0,
                    scattering_length: 0.0,
                    barrier: 0.0,
                    barrier_width: 0.0,
                    n_atoms: 0,
                    temperature: 0.0,
                }
            }
        };
        if let Some(v) = self.mass {
            s.mass = v;
        }
        if let Some(v) = self.radius {
            s.radius = v;
        }
        if let Some(v) = self.omega_perp {
            s.omega_perp = v;
        }
        if let Some(v) = self.scattering_length {
            s.scattering_length = v;
        }
        if let Some(v) = self.barrier {
            s.barrier = v;
        }
        if let Some(v) = self.barrier_width {
            s.barrier_width = v;
        }
        if let Some(v) = self.n_atoms {
            s.n_atoms = v;
        }
        if let Some(v) = self.temperature {
            s.temperature = v;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Print the report; with `out` also write scenario.json and scenario.txt.
pub fn scenario(inputs: &ScenarioInputs, out: Option<&Path>, json_stdout: bool) -> Result<()> {
    let s = inputs.resolve()?;
    let report = units::scenario_report(&s)?;
    let text = report.to_text();
    let value = json!({
        "command": "scenario",
        "version": env!("CARGO_PKG_VERSION"),
        "report": report,
    });
    let pretty = serde_json::to_string_pretty(&value)
        .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
    if let Some(dir) = out {
        let dir = out_dir(Some(dir))?;
        std::fs::write(dir.join("scenario.json"), pretty.clone() + "\n")?;
        std::fs::write(dir.join("scenario.txt"), &text)?;
    }
    if json_stdout {
        println!("{pretty}");
    } else {
        print!("{text}");
    }
    Ok(())
}

type Check = (&'static str, fn() -> Result<bool>);

fn selftest_checks() -> Vec<Check> {
    vec![
        ("K on the condensate in k=1 gives N", || {
            let p = ModelParams::new(3, 2)?;
            let b = FockBasis::enumerate(&p)?;
            let i = b.condensate_index(1).ok_or_else(|| Error::Unsupported("mode 1".into()))?;
            let mut v = vec![0.0; b.len()];
            v[i] = 1.0;
            let mut kv = vec![0.0; b.len()];
            crate::LinearOperator::apply(&k_operator(&b), &v, &mut kv);
            Ok(kv[i] == 3.0)
        }),
        ("two atoms in two modes give three states", || {
            let p = ModelParams::new(2, 1)?;
            Ok(FockBasis::enumerate(&p)?.len() == 3)
        }),
        ("no barrier means no gap at the crossing", || {
            let p = ModelParams::new(3, 2)?.with_coupling(1.0);
            let b = Arc::new(FockBasis::enumerate(&p)?);
            Ok(spectra::gap_at_crossing(&p, &b, &SolverConfig::default())?.abs() < 1e-10)
        }),
        ("uncorrelated two-mode ground state has QFI N", || {
            let p = ModelParams::new(4, 1)?.with_barrier(0.1);
            let b = Arc::new(FockBasis::enumerate(&p)?);
            let r = spectra::solve(&p, &b, 1, &SolverConfig::default(), None)?;
            Ok((qfi_pure(r.ground_state(), &k_operator(&b))? - 4.0).abs() < 1e-8)
        }),
        ("static ramp keeps the ground state", || {
            let p = ModelParams::new(2, 2)?.with_barrier(0.05).with_coupling(0.5);
            let b = Arc::new(FockBasis::enumerate(&p)?);
            let ramp = RampSpec {
                param: RampParam::Omega,
                start: 2.0,
                end: 2.0,
                duration: 1.0,
                steps: 10,
            };
            let r = dynamics::evolve_ramp(&p, &b, &ramp, &EvolveOptions::default())?;
            Ok(r.samples.iter().all(|s| (s.fidelity - 1.0).abs() < 1e-8))
        }),
        ("identity calibration returns 1", || {
            let p = ModelParams::new(2, 1)?;
            let b = Arc::new(FockBasis::enumerate(&p)?);
            let f = calibrate_coupling(&b, &p, CalibrationTarget::Identity, &SolverConfig::default())?;
            Ok(f == 1.0)
        }),
        ("stirring frequency vanishes at rest", || {
            Ok(units::stirring_frequency(&RingScenario::li7_100(), 0.0) == 0.0)
        }),
        ("zero-temperature two-level QFI is N^2", || {
            Ok(analytic::qfi_thermal_two_level(5, 0.1, 0.0) == 25.0)
        }),
    ]
}

/// Run the quick checks; true when all pass.
pub fn selftest() -> bool {
    let mut all = true;
    for (name, check) in selftest_checks() {
        let ok = matches!(check(), Ok(true));
        all &= ok;
        println!("{} {name}", if ok { "ok  " } else { "FAIL" });
    }
    all
}

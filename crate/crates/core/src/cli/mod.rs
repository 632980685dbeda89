//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver failure.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use commands::{Dumps, ScenarioInputs};
use config::Settings;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stirred-ring", version, about = "Bosons on a ring stirred by a rotating barrier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model and solver options shared by the sweep commands.
#[derive(Debug, Clone, Args)]
struct Common {
    /// Named preset: fig2, fig3, fig4a, fig4b, fig5, fig6.
    #[arg(long)]
    preset: Option<String>,
    /// key=value file; flags override it, it overrides the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Existing directory for CSV and JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_atoms: Option<usize>,
    #[arg(long)]
    modes_per_side: Option<usize>,
    /// Rotation rate Ω; accepts multiples of pi such as 0.5pi.
    #[arg(long)]
    omega: Option<String>,
    /// β = b/(L E₀).
    #[arg(long)]
    barrier: Option<String>,
    /// σ/L of a Gaussian barrier; 0 for a δ barrier.
    #[arg(long)]
    barrier_width: Option<String>,
    /// γ = g/(L E₀).
    #[arg(long)]
    coupling: Option<String>,
    #[arg(long)]
    coupling_rescale: Option<String>,
    /// Seed for eigensolver start vectors.
    #[arg(long)]
    seed: Option<u64>,
    /// Eigensolver residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
    /// Rescale γ so the gap at Ω = π matches the Tonks-Girardeau gap.
    #[arg(long)]
    calibrate: bool,
    /// Write the Fock basis to basis.csv.
    #[arg(long)]
    dump_basis: bool,
    /// Write the Hamiltonian in coordinate format to hamiltonian_coo.csv.
    #[arg(long)]
    dump_operator: bool,
    /// Extra KEY=VALUE settings, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest levels versus Ω.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega_min: Option<String>,
        #[arg(long)]
        omega_max: Option<String>,
        #[arg(long)]
        omega_steps: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Levels relative to the ground state versus γ at Ω = π.
    GapVsG {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gamma_min: Option<String>,
        #[arg(long)]
        gamma_max: Option<String>,
        #[arg(long)]
        gamma_steps: Option<usize>,
        /// log or linear.
        #[arg(long)]
        gamma_scale: Option<String>,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Gap at the crossing versus atom number.
    GapVsN {
        #[command(flatten)]
        common: Common,
        /// noon or tg.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        n_min: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Ground-state QFI versus Ω with the two-state Lorentzian.
    QfiOmega {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega_min: Option<String>,
        #[arg(long)]
        omega_max: Option<String>,
        #[arg(long)]
        omega_steps: Option<usize>,
    },
    /// Thermal QFI versus temperature.
    QfiTemp {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t_min: Option<String>,
        #[arg(long)]
        t_max: Option<String>,
        #[arg(long)]
        t_steps: Option<usize>,
        /// Levels in the thermal ensemble; twice as many are computed.
        #[arg(long)]
        levels: Option<usize>,
        /// Comma-separated couplings.
        #[arg(long)]
        gammas: Option<String>,
    },
    /// Linear ramp of Ω or γ starting from the ground state.
    Ramp {
        #[command(flatten)]
        common: Common,
        /// omega or coupling.
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        /// Units of ħ/E₀.
        #[arg(long)]
        duration: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Coupling ramp from the superposition at Ω = π, reporting the NOON overlap.
        #[arg(long)]
        noon: bool,
        /// Keep the barrier on during a NOON ramp.
        #[arg(long)]
        keep_barrier: bool,
    },
    /// Experimental numbers for a ring of atoms in SI units.
    Scenario {
        /// li7-100.
        #[arg(long)]
        preset: Option<String>,
        /// kg.
        #[arg(long)]
        mass: Option<f64>,
        /// m.
        #[arg(long)]
        radius: Option<f64>,
        /// rad/s.
        #[arg(long)]
        omega_perp: Option<f64>,
        /// m.
        #[arg(long)]
        scattering_length: Option<f64>,
        /// Barrier area b in J·m.
        #[arg(long)]
        barrier_area: Option<f64>,
        /// Gaussian width σ in m.
        #[arg(long)]
        barrier_width: Option<f64>,
        #[arg(long)]
        n_atoms: Option<usize>,
        /// K.
        #[arg(long)]
        temperature: Option<f64>,
        /// Directory for scenario.json and scenario.txt.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Quick consistency checks.
    Selftest,
}

fn push<T: ToString>(kv: &mut Vec<(String, String)>, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        kv.push((key.to_string(), v.to_string()));
    }
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, Error> {
        let mut kv = Vec::new();
        push(&mut kv, "n_atoms", &self.n_atoms);
        push(&mut kv, "modes_per_side", &self.modes_per_side);
        push(&mut kv, "omega", &self.omega);
        push(&mut kv, "barrier", &self.barrier);
        push(&mut kv, "barrier_width", &self.barrier_width);
        push(&mut kv, "coupling", &self.coupling);
        push(&mut kv, "coupling_rescale", &self.coupling_rescale);
        push(&mut kv, "seed", &self.seed);
        push(&mut kv, "tol", &self.tol);
        push(&mut kv, "workers", &self.workers);
        if self.calibrate {
            kv.push(("calibrate".into(), "true".into()));
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{item}'")))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(kv)
    }

    fn settings(&self, extra: Vec<(String, String)>) -> Result<Settings, Error> {
        let mut kv = self.overrides()?;
        kv.extend(extra);
        Settings::resolve(self.preset.as_deref(), self.config.as_deref(), &kv)
    }

    fn dumps(&self) -> Dumps {
        Dumps {
            basis: self.dump_basis,
            operator: self.dump_operator,
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NoConvergence { .. } | Error::StepRejected { .. } | Error::RootNotBracketed(_) => {
            EXIT_SOLVER
        }
        _ => EXIT_CONFIG,
    }
}

fn dispatch(command: Command) -> Result<i32, Error> {
    let mut kv = Vec::new();
    match command {
        Command::Spectrum { common, omega_min, omega_max, omega_steps, levels } => {
            push(&mut kv, "omega_min", &omega_min);
            push(&mut kv, "omega_max", &omega_max);
            push(&mut kv, "omega_steps", &omega_steps);
            push(&mut kv, "levels", &levels);
            commands::spectrum(common.settings(kv)?, common.out.as_deref(), common.dumps())?;
        }
        Command::GapVsG { common, gamma_min, gamma_max, gamma_steps, gamma_scale, levels } => {
            push(&mut kv, "gamma_min", &gamma_min);
            push(&mut kv, "gamma_max", &gamma_max);
            push(&mut kv, "gamma_steps", &gamma_steps);
            push(&mut kv, "gamma_scale", &gamma_scale);
            push(&mut kv, "levels", &levels);
            commands::gap_vs_g(common.settings(kv)?, common.out.as_deref(), common.dumps())?;
        }
        Command::GapVsN { common, mode, n_min, n_max } => {
            push(&mut kv, "mode", &mode);
            push(&mut kv, "n_min", &n_min);
            push(&mut kv, "n_max", &n_max);
            commands::gap_vs_n(common.settings(kv)?, common.out.as_deref())?;
        }
        Command::QfiOmega { common, omega_min, omega_max, omega_steps } => {
            push(&mut kv, "omega_min", &omega_min);
            push(&mut kv, "omega_max", &omega_max);
            push(&mut kv, "omega_steps", &omega_steps);
            commands::qfi_omega(common.settings(kv)?, common.out.as_deref(), common.dumps())?;
        }
        Command::QfiTemp { common, t_min, t_max, t_steps, levels, gammas } => {
            push(&mut kv, "t_min", &t_min);
            push(&mut kv, "t_max", &t_max);
            push(&mut kv, "t_steps", &t_steps);
            push(&mut kv, "levels", &levels);
            push(&mut kv, "gammas", &gammas);
            commands::qfi_temp(common.settings(kv)?, common.out.as_deref(), common.dumps())?;
        }
        Command::Ramp { common, param, from, to, duration, steps, noon, keep_barrier } => {
            push(&mut kv, "param", &param);
            push(&mut kv, "from", &from);
            push(&mut kv, "to", &to);
            push(&mut kv, "duration", &duration);
            push(&mut kv, "steps", &steps);
            if noon {
                kv.push(("noon".into(), "true".into()));
                if param.is_none() {
                    kv.push(("param".into(), "coupling".into()));
                }
            }
            if keep_barrier {
                kv.push(("barrier_removed".into(), "false".into()));
            }
            commands::ramp(common.settings(kv)?, common.out.as_deref(), common.dumps())?;
        }
        Command::Scenario {
            preset,
            mass,
            radius,
            omega_perp,
            scattering_length,
            barrier_area,
            barrier_width,
            n_atoms,
            temperature,
            out,
            json,
        } => {
            let inputs = ScenarioInputs {
                preset,
                mass,
                radius,
                omega_perp,
                scattering_length,
                barrier: barrier_area,
                barrier_width,
                n_atoms,
                temperature,
            };
            commands::scenario(&inputs, out.as_deref(), json)?;
        }
        Command::Selftest => {
            return Ok(if commands::selftest() { EXIT_OK } else { 1 });
        }
    }
    Ok(EXIT_OK)
}

/// Parse `args` (program name first) and run the command.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

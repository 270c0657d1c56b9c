use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qslbound_core::dynamics::DEFAULT_STEPS_PER_UNIT;
use qslbound_core::scenarios::BatteryMode;

use crate::presets::Preset;
use crate::CliError;

pub const MIN_STEPS: usize = 16;

#[derive(Parser, Debug)]
#[command(name = "qslbound", version, about = "Speed-limit bound curves for observables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entanglement entropy of a two-qubit Schmidt state under a nonlocal Hamiltonian.
    Entanglement(Flags),
    /// Modular energy of the same system in the Heisenberg picture.
    Modular(Flags),
    /// Charging of a two-cell quantum battery.
    Battery(Flags),
    /// Runs every consistency check and oracle comparison.
    Verify(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum OutputFormat {
    #[value(name = "csv")]
    #[serde(rename = "csv")]
    Csv,
    #[value(name = "csv+svg")]
    #[serde(rename = "csv+svg")]
    CsvSvg,
}

/// Command-line flags. The same keys are accepted in a flat JSON config file.
#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Schmidt weight of the initial state, in [0, 1].
    #[arg(long)]
    pub p: Option<f64>,
    /// Coupling angle of the nonlocal Hamiltonian.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Z-Z coefficient of the nonlocal Hamiltonian.
    #[arg(long)]
    pub mu3: Option<f64>,
    /// Cell splitting of the battery.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Charger drive strength.
    #[arg(long = "Omega")]
    #[serde(rename = "Omega")]
    pub omega_drive: Option<f64>,
    /// Cell-cell coupling.
    #[arg(long = "J")]
    #[serde(rename = "J")]
    pub j: Option<f64>,
    /// Battery mode: parallel, collective, coupled or decoupled.
    #[arg(long)]
    pub mode: Option<String>,
    /// Final time of the grid.
    #[arg(long = "t-max")]
    #[serde(rename = "t-max")]
    pub t_max: Option<f64>,
    /// Number of grid intervals (at least 16).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// JSON file with default flag values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Named run (fig2, fig3, fig5, fig6, fig7, fig8).
    #[arg(long)]
    pub preset: Option<String>,
}

impl Flags {
    /// Fills unset fields from `other`.
    fn or(self, other: Flags) -> Flags {
        Flags {
            p: self.p.or(other.p),
            theta: self.theta.or(other.theta),
            mu3: self.mu3.or(other.mu3),
            omega: self.omega.or(other.omega),
            omega_drive: self.omega_drive.or(other.omega_drive),
            j: self.j.or(other.j),
            mode: self.mode.or(other.mode),
            t_max: self.t_max.or(other.t_max),
            steps: self.steps.or(other.steps),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            config: self.config,
            preset: self.preset.or(other.preset),
        }
    }

    fn has_scenario_parameters(&self) -> bool {
        self.p.is_some()
            || self.theta.is_some()
            || self.mu3.is_some()
            || self.omega.is_some()
            || self.omega_drive.is_some()
            || self.j.is_some()
            || self.mode.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Entanglement,
    Modular,
    Battery,
    Verify,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Entanglement => "entanglement",
            ScenarioKind::Modular => "modular",
            ScenarioKind::Battery => "battery",
            ScenarioKind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScenarioParams {
    /// Shared by the entanglement and modular scenarios.
    TwoQubit { p: f64, theta: f64, mu3: f64 },
    Battery {
        omega: f64,
        omega_drive: f64,
        j: f64,
        mode: BatteryMode,
    },
    None,
}

/// One curve to compute and write.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub kind: ScenarioKind,
    /// Distinguishes the curves of a multi-curve preset.
    pub label: Option<String>,
    pub params: ScenarioParams,
    pub t_max: f64,
    pub steps: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
}

/// Every curve requested by one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Invocation {
    pub kind: ScenarioKind,
    pub preset: Option<Preset>,
    pub jobs: Vec<RunConfig>,
    /// Report path for `verify`.
    pub out: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn read_config_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
}

pub fn default_steps(t_max: f64) -> usize {
    let n = (t_max * DEFAULT_STEPS_PER_UNIT as f64).ceil() as usize;
    (n + n % 2).max(MIN_STEPS)
}

fn validate_grid(t_max: f64, steps: usize) -> Result<(), CliError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(usage(format!("--t-max must be positive, got {t_max}")));
    }
    if steps < MIN_STEPS {
        return Err(usage(format!("--steps must be at least {MIN_STEPS}, got {steps}")));
    }
    Ok(())
}

fn check_finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be finite")))
    }
}

fn scenario_params(kind: ScenarioKind, f: &Flags) -> Result<ScenarioParams, CliError> {
    match kind {
        ScenarioKind::Entanglement | ScenarioKind::Modular => {
            if f.omega.is_some() || f.omega_drive.is_some() || f.j.is_some() || f.mode.is_some() {
                return Err(usage(format!("battery flags do not apply to `{}`", kind.as_str())));
            }
            let p = check_finite("p", f.p.unwrap_or(0.1))?;
            let theta = check_finite("theta", f.theta.unwrap_or(1.0))?;
            let mu3 = check_finite("mu3", f.mu3.unwrap_or(0.0))?;
            if !(p > 0.0 && p < 1.0) || p == 0.5 {
                return Err(usage(format!("--p must lie in (0, 1) and differ from 0.5, got {p}")));
            }
            if theta == 0.0 {
                return Err(usage("--theta must be non-zero"));
            }
            Ok(ScenarioParams::TwoQubit { p, theta, mu3 })
        }
        ScenarioKind::Battery => {
            if f.p.is_some() || f.theta.is_some() || f.mu3.is_some() {
                return Err(usage("two-qubit flags do not apply to `battery`"));
            }
            let mode: BatteryMode = f
                .mode
                .as_deref()
                .unwrap_or("coupled")
                .parse()
                .map_err(|e: qslbound_core::Error| usage(e.to_string()))?;
            let (omega, omega_drive, j) = mode.default_parameters();
            let omega = check_finite("omega", f.omega.unwrap_or(omega))?;
            let omega_drive = check_finite("Omega", f.omega_drive.unwrap_or(omega_drive))?;
            let j = check_finite("J", f.j.unwrap_or(j))?;
            if omega <= 0.0 {
                return Err(usage(format!("--omega must be positive, got {omega}")));
            }
            if omega_drive <= 0.0 {
                return Err(usage(format!("--Omega must be positive, got {omega_drive}")));
            }
            Ok(ScenarioParams::Battery {
                omega,
                omega_drive,
                j,
                mode,
            })
        }
        ScenarioKind::Verify => Ok(ScenarioParams::None),
    }
}

/// `<stem>-<label>.<ext>` next to `base`.
pub fn labelled_path(base: &Path, label: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("curve");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    base.with_file_name(format!("{stem}-{label}.{ext}"))
}

/// Merges flags with the optional config file and expands presets.
pub fn resolve(command: Command) -> Result<Invocation, CliError> {
    let (kind, flags) = match command {
        Command::Entanglement(f) => (ScenarioKind::Entanglement, f),
        Command::Modular(f) => (ScenarioKind::Modular, f),
        Command::Battery(f) => (ScenarioKind::Battery, f),
        Command::Verify(f) => (ScenarioKind::Verify, f),
    };
    let flags = match &flags.config {
        Some(path) => {
            let file = read_config_file(path)?;
            flags.or(file)
        }
        None => flags,
    };

    if kind == ScenarioKind::Verify {
        if flags.has_scenario_parameters() || flags.preset.is_some() || flags.t_max.is_some() {
            return Err(usage("`verify` accepts only --out and --config"));
        }
        return Ok(Invocation {
            kind,
            preset: None,
            jobs: Vec::new(),
            out: flags.out,
        });
    }

    let format = flags.format.unwrap_or(OutputFormat::Csv);
    let preset = flags
        .preset
        .as_deref()
        .map(|s| s.parse::<Preset>().map_err(usage))
        .transpose()?;

    let jobs = match preset {
        Some(preset) => {
            if preset.kind() != kind {
                return Err(usage(format!(
                    "preset {preset} belongs to `{}`, not `{}`",
                    preset.kind().as_str(),
                    kind.as_str()
                )));
            }
            if flags.has_scenario_parameters() {
                return Err(usage("a preset fixes the scenario parameters"));
            }
            let curves = preset.curves();
            let t_max = flags.t_max.unwrap_or(preset.t_max());
            let steps = flags.steps.unwrap_or_else(|| preset.default_steps());
            validate_grid(t_max, steps)?;
            let base = flags.out.unwrap_or_else(|| PathBuf::from(format!("{preset}.csv")));
            let multi = curves.len() > 1;
            curves
                .into_iter()
                .map(|(label, params)| RunConfig {
                    kind,
                    out: if multi { labelled_path(&base, &label) } else { base.clone() },
                    label: Some(label),
                    params,
                    t_max,
                    steps,
                    format,
                })
                .collect()
        }
        None => {
            let t_max = flags.t_max.unwrap_or(match kind {
                ScenarioKind::Battery => 2.0,
                _ => 1.0,
            });
            let steps = flags.steps.unwrap_or_else(|| default_steps(t_max));
            validate_grid(t_max, steps)?;
            let params = scenario_params(kind, &flags)?;
            let out = flags
                .out
                .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.as_str())));
            vec![RunConfig {
                kind,
                label: None,
                params,
                t_max,
                steps,
                out,
                format,
            }]
        }
    };
    Ok(Invocation {
        kind,
        preset,
        jobs,
        out: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &[&str]) -> Result<Invocation, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("qslbound").chain(args.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        resolve(cli.command)
    }

    #[test]
    fn fig2_flags() {
        let inv = parse(&[
            "entanglement", "--p", "0.1", "--theta", "1.0", "--t-max", "1.0", "--steps", "2000", "--out", "fig2.csv",
        ])
        .unwrap();
        let job = &inv.jobs[0];
        assert_eq!(job.params, ScenarioParams::TwoQubit { p: 0.1, theta: 1.0, mu3: 0.0 });
        assert_eq!((job.t_max, job.steps), (1.0, 2000));
        assert_eq!(job.out, PathBuf::from("fig2.csv"));
    }

    #[test]
    fn battery_flags() {
        let inv = parse(&["battery", "--mode", "coupled", "--omega", "2", "--Omega", "1", "--J", "1"]).unwrap();
        assert_eq!(
            inv.jobs[0].params,
            ScenarioParams::Battery { omega: 2.0, omega_drive: 1.0, j: 1.0, mode: BatteryMode::Coupled }
        );
        let inv = parse(&["battery", "--mode", "decoupled"]).unwrap();
        assert_eq!(
            inv.jobs[0].params,
            ScenarioParams::Battery { omega: 2.0, omega_drive: 4.0, j: 1.0, mode: BatteryMode::Decoupled }
        );
    }

    #[test]
    fn rejects_bad_values() {
        for args in [
            &["entanglement", "--p", "1.5"][..],
            &["entanglement", "--p", "0.5"],
            &["entanglement", "--steps", "8"],
            &["entanglement", "--t-max", "-1"],
            &["entanglement", "--omega", "2"],
            &["battery", "--mode", "serial"],
            &["battery", "--Omega", "0"],
            &["battery", "--preset", "fig2"],
            &["entanglement", "--preset", "fig9"],
            &["entanglement", "--preset", "fig3", "--theta", "2"],
            &["entanglement", "--bogus", "1"],
        ] {
            assert!(matches!(parse(args), Err(CliError::Usage(_))), "{args:?}");
        }
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, r#"{{"p": 0.3, "theta": 0.5, "t-max": 0.5, "steps": 100}}"#).unwrap();
        let path = file.path().to_str().unwrap();
        let inv = parse(&["modular", "--config", path, "--theta", "2"]).unwrap();
        let job = &inv.jobs[0];
        assert_eq!(job.params, ScenarioParams::TwoQubit { p: 0.3, theta: 2.0, mu3: 0.0 });
        assert_eq!((job.t_max, job.steps), (0.5, 100));

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        write!(bad, r#"{{"q": 1}}"#).unwrap();
        let path = bad.path().to_str().unwrap();
        assert!(matches!(parse(&["modular", "--config", path]), Err(CliError::Usage(_))));
        assert!(matches!(
            parse(&["modular", "--config", "/nonexistent/qsl.json"]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn multi_curve_presets_label_outputs() {
        let inv = parse(&["entanglement", "--preset", "fig3", "--out", "out/f3.csv"]).unwrap();
        assert_eq!(inv.jobs.len(), 4);
        assert_eq!(inv.jobs[0].out, PathBuf::from("out/f3-theta0.5.csv"));
        let inv = parse(&["entanglement", "--preset", "fig2"]).unwrap();
        assert_eq!(inv.jobs[0].out, PathBuf::from("fig2.csv"));
    }

    #[test]
    fn default_steps_follow_density() {
        assert_eq!(default_steps(1.0), 2000);
        assert_eq!(default_steps(0.001), MIN_STEPS);
        assert_eq!(default_steps(0.0015) % 2, 0);
    }
}

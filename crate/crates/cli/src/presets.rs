use std::fmt;
use std::str::FromStr;

use qslbound_core::scenarios::BatteryMode;

use crate::config::{default_steps, ScenarioKind, ScenarioParams};

/// Named reproduction runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Entanglement, `p = 0.1`, `θ = 1`.
    Fig2,
    /// Entanglement, `p = 0.1`, several `θ`.
    Fig3,
    /// Modular energy for a grid of `(p, θ)`.
    Fig5,
    /// Modular energy, `p = 0.1`, `θ ∈ {0.5, 1}`.
    Fig6,
    /// Battery, all four protocols.
    Fig7,
    /// Battery, coupled and decoupled over a long window.
    Fig8,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Fig2,
        Preset::Fig3,
        Preset::Fig5,
        Preset::Fig6,
        Preset::Fig7,
        Preset::Fig8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }

    pub fn kind(self) -> ScenarioKind {
        match self {
            Preset::Fig2 | Preset::Fig3 => ScenarioKind::Entanglement,
            Preset::Fig5 | Preset::Fig6 => ScenarioKind::Modular,
            Preset::Fig7 | Preset::Fig8 => ScenarioKind::Battery,
        }
    }

    pub fn t_max(self) -> f64 {
        match self {
            Preset::Fig7 => 2.0,
            Preset::Fig8 => 10.0,
            _ => 1.0,
        }
    }

    pub fn default_steps(self) -> usize {
        match self {
            Preset::Fig8 => 10_000,
            _ => default_steps(self.t_max()),
        }
    }

    /// `(label, parameters)` for every curve of the preset.
    pub fn curves(self) -> Vec<(String, ScenarioParams)> {
        let two = |p: f64, theta: f64| ScenarioParams::TwoQubit { p, theta, mu3: 0.0 };
        let battery = |mode: BatteryMode| {
            let (omega, omega_drive, j) = mode.default_parameters();
            (
                mode.to_string(),
                ScenarioParams::Battery {
                    omega,
                    omega_drive,
                    j,
                    mode,
                },
            )
        };
        match self {
            Preset::Fig2 => vec![("p0.1-theta1".into(), two(0.1, 1.0))],
            Preset::Fig3 => [0.5, 1.0, 1.5, 2.0]
                .iter()
                .map(|&th| (format!("theta{th}"), two(0.1, th)))
                .collect(),
            Preset::Fig5 => [(0.1, 0.5), (0.1, 1.0), (0.4, 0.5), (0.4, 1.0)]
                .iter()
                .map(|&(p, th)| (format!("p{p}-theta{th}"), two(p, th)))
                .collect(),
            Preset::Fig6 => [0.5, 1.0]
                .iter()
                .map(|&th| (format!("theta{th}"), two(0.1, th)))
                .collect(),
            Preset::Fig7 => BatteryMode::ALL.into_iter().map(battery).collect(),
            Preset::Fig8 => [BatteryMode::Coupled, BatteryMode::Decoupled]
                .into_iter()
                .map(battery)
                .collect(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig2, fig3, fig5, fig6, fig7 or fig8)"))
    }
}

use qslbound_core::bounds::BoundCurve;
use qslbound_core::dynamics::TimeGrid;
use qslbound_core::scenarios::{
    run_battery_scenario, run_entanglement_scenario, run_modular_scenario, BatteryScenario,
    EntanglementScenario,
};
use qslbound_core::{Error, Result};

use crate::config::{RunConfig, ScenarioKind, ScenarioParams};

pub fn grid(cfg: &RunConfig) -> Result<TimeGrid> {
    TimeGrid::new(cfg.t_max, cfg.steps)
}

/// Computes the bound curve described by `cfg`.
pub fn run_job(cfg: &RunConfig) -> Result<BoundCurve> {
    let grid = grid(cfg)?;
    match (cfg.kind, cfg.params) {
        (ScenarioKind::Entanglement, ScenarioParams::TwoQubit { p, theta, mu3 }) => {
            run_entanglement_scenario(&EntanglementScenario::new(p, theta, mu3, grid)?)
        }
        (ScenarioKind::Modular, ScenarioParams::TwoQubit { p, theta, mu3 }) => {
            run_modular_scenario(&EntanglementScenario::new(p, theta, mu3, grid)?)
        }
        (
            ScenarioKind::Battery,
            ScenarioParams::Battery {
                omega,
                omega_drive,
                j,
                mode,
            },
        ) => run_battery_scenario(&BatteryScenario::new(omega, omega_drive, j, mode, grid)?),
        (kind, params) => Err(Error::InvalidParameter(format!(
            "parameters {params:?} do not describe a `{}` run",
            kind.as_str()
        ))),
    }
}

//! From a validated config to library objects, plus the error type that
//! carries the process exit code.

use qnd::{
    Complex64, GridError, GridSpec, GridWavefunction, MeasurementError, OptimizeError, ProbeSpec,
    SetupParams,
};

use crate::config::{Parity, ScenarioConfig, SignalSpec};

/// Failures after configuration was accepted; exit code 3.
#[derive(Debug, Clone)]
pub struct NumericError(pub String);

impl std::fmt::Display for NumericError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numeric error: {}", self.0)
    }
}

impl std::error::Error for NumericError {}

impl From<GridError> for NumericError {
    fn from(e: GridError) -> Self {
        Self(e.to_string())
    }
}

impl From<MeasurementError> for NumericError {
    fn from(e: MeasurementError) -> Self {
        Self(e.to_string())
    }
}

impl From<OptimizeError> for NumericError {
    fn from(e: OptimizeError) -> Self {
        Self(e.to_string())
    }
}

/// Everything a command needs, built once from the config.
pub struct Scenario {
    pub grid: GridSpec,
    pub signal: GridWavefunction,
    pub probe: ProbeSpec,
    pub setup: SetupParams,
    /// Signal quadrature variance, computed from the state itself.
    pub sigma_s2: f64,
}

impl Scenario {
    pub fn build(config: &ScenarioConfig) -> Result<Self, NumericError> {
        let grid = GridSpec::new(config.grid_points, config.x_max)?;
        let signal = build_signal(config, grid)?;
        let probe = ProbeSpec::new(config.probe_r, config.probe_direction)?;
        let setup = SetupParams::new(config.setup.phi())?;
        let sigma_s2 = signal.quadrature_variance();
        Ok(Self {
            grid,
            signal,
            probe,
            setup,
            sigma_s2,
        })
    }

    /// Maps a trade-off value to the measurement kernel variance.
    pub fn sigma_eff2_at(&self, x: f64) -> f64 {
        (x * self.sigma_s2.sqrt()).powi(2)
    }
}

pub fn build_signal(
    config: &ScenarioConfig,
    grid: GridSpec,
) -> Result<GridWavefunction, NumericError> {
    let state = match config.signal {
        SignalSpec::Gaussian { variance } => GridWavefunction::gaussian(grid, 0.0, variance)?,
        SignalSpec::Fock { n } => GridWavefunction::fock(grid, n)?,
        SignalSpec::Cat {
            displacement,
            parity,
        } => {
            let plus = GridWavefunction::gaussian(grid, displacement, 0.25)?;
            let minus = GridWavefunction::gaussian(grid, -displacement, 0.25)?;
            let sign = match parity {
                Parity::Even => 1.0,
                Parity::Odd => -1.0,
            };
            GridWavefunction::superpose(
                &plus,
                &minus,
                Complex64::new(1.0, 0.0),
                Complex64::new(sign, 0.0),
            )?
        }
    };
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SweepParams;

    #[test]
    fn scenario_builds_from_defaults() {
        let scenario = Scenario::build(&ScenarioConfig::default()).unwrap();
        assert!((scenario.sigma_s2 - 0.25).abs() < 1e-6);
        assert!((scenario.sigma_eff2_at(1.0) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn fock_and_cat_signals_build() {
        let config = ScenarioConfig {
            signal: SignalSpec::Fock { n: 1 },
            ..Default::default()
        };
        let scenario = Scenario::build(&config).unwrap();
        assert!((scenario.sigma_s2 - 0.75).abs() < 1e-6);

        let config = ScenarioConfig {
            signal: SignalSpec::Cat {
                displacement: 2.0,
                parity: Parity::Odd,
            },
            ..Default::default()
        };
        let scenario = Scenario::build(&config).unwrap();
        assert!(scenario.sigma_s2 > 3.0);
    }

    #[test]
    fn numeric_errors_surface() {
        // a cat displaced onto the grid edge cannot be built
        let config = ScenarioConfig {
            signal: SignalSpec::Cat {
                displacement: 7.5,
                parity: Parity::Even,
            },
            sweep: SweepParams {
                x_lo: 0.2,
                x_hi: 5.0,
                points: 5,
            },
            ..Default::default()
        };
        assert!(Scenario::build(&config).is_err());
    }
}

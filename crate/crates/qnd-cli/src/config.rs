//! Scenario configuration: a flat `key = value` text file plus command-line
//! overrides, with precedence flags > file > defaults.
//!
//! Grammar: one `key = value` pair per line; `#` starts a comment; blank
//! lines are ignored. Unknown or duplicate keys are errors, with the line
//! number in the diagnostic.
//!
//! ```text
//! signal.kind        = gaussian | fock | cat
//! signal.variance    = 0.25          # gaussian only
//! signal.n           = 1             # fock only
//! signal.displacement= 2.0           # cat only
//! signal.parity      = even | odd    # cat only
//! probe.r            = 0.0
//! probe.direction    = squeezed | antisqueezed
//! setup.phi          = 0.7853981633974483   # exclusive with setup.tau1
//! setup.tau1         = 0.5
//! grid.points        = 1024
//! grid.x_max         = 8.0
//! run                = sweep | optimize | simulate | validate   # informational
//! sweep.x_lo         = 0.2
//! sweep.x_hi         = 5.0
//! sweep.points       = 50
//! simulate.samples   = 100000
//! simulate.seed      = 0
//! simulate.state_moments = false
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use qnd::SqueezeDirection;

/// Config-stage failure; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalSpec {
    Gaussian { variance: f64 },
    Fock { n: usize },
    Cat { displacement: f64, parity: Parity },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// How the beam-splitter angle was given; kept for faithful reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetupChoice {
    Phi(f64),
    Tau1(f64),
}

impl SetupChoice {
    pub fn phi(&self) -> f64 {
        match *self {
            SetupChoice::Phi(phi) => phi,
            SetupChoice::Tau1(tau1) => tau1.sqrt().acos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub x_lo: f64,
    pub x_hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateParams {
    pub samples: usize,
    pub seed: u64,
    pub state_moments: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub signal: SignalSpec,
    pub probe_r: f64,
    pub probe_direction: SqueezeDirection,
    pub setup: SetupChoice,
    pub grid_points: usize,
    pub x_max: f64,
    pub sweep: SweepParams,
    pub simulate: SimulateParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            signal: SignalSpec::Gaussian { variance: 0.25 },
            probe_r: 0.0,
            probe_direction: SqueezeDirection::Squeezed,
            setup: SetupChoice::Phi(std::f64::consts::FRAC_PI_4),
            grid_points: 1024,
            x_max: 8.0,
            sweep: SweepParams {
                x_lo: 0.2,
                x_hi: 5.0,
                points: 50,
            },
            simulate: SimulateParams {
                samples: 100_000,
                seed: 0,
                state_moments: false,
            },
        }
    }
}

/// Command-line overrides applied on top of file values.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub x_max: Option<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "signal.kind",
    "signal.variance",
    "signal.n",
    "signal.displacement",
    "signal.parity",
    "probe.r",
    "probe.direction",
    "setup.phi",
    "setup.tau1",
    "grid.points",
    "grid.x_max",
    "run",
    "sweep.x_lo",
    "sweep.x_hi",
    "sweep.points",
    "simulate.samples",
    "simulate.seed",
    "simulate.state_moments",
];

struct RawConfig {
    entries: HashMap<String, (String, usize)>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let stripped = line.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "line {line_no}: expected `key = value`, got `{stripped}`"
                ))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!("line {line_no}: unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(ConfigError(format!(
                    "line {line_no}: empty value for `{key}`"
                )));
            }
            if let Some((_, first)) = entries.insert(key.clone(), (value, line_no)) {
                return Err(ConfigError(format!(
                    "line {line_no}: duplicate key `{key}` (first set on line {first})"
                )));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn parse_typed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((value, line)) => value.parse::<T>().map(Some).map_err(|_| {
                ConfigError(format!("line {line}: cannot parse `{value}` for `{key}`"))
            }),
        }
    }
}

impl ScenarioConfig {
    /// Loads the config file (when given), applies overrides, validates.
    pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            config.apply_file(&text)?;
        }
        if let Some(seed) = overrides.seed {
            config.simulate.seed = seed;
        }
        if let Some(points) = overrides.grid_points {
            config.grid_points = points;
        }
        if let Some(x_max) = overrides.x_max {
            config.x_max = x_max;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut raw = RawConfig::parse(text)?;

        if let Some((kind, line)) = raw.take("signal.kind") {
            self.signal = match kind.as_str() {
                "gaussian" => SignalSpec::Gaussian {
                    variance: raw.parse_typed("signal.variance")?.unwrap_or(0.25),
                },
                "fock" => SignalSpec::Fock {
                    n: raw.parse_typed("signal.n")?.ok_or_else(|| {
                        ConfigError("missing field `signal.n` for a fock signal".into())
                    })?,
                },
                "cat" => {
                    let displacement =
                        raw.parse_typed("signal.displacement")?.ok_or_else(|| {
                            ConfigError(
                                "missing field `signal.displacement` for a cat signal".into(),
                            )
                        })?;
                    let parity = match raw.take("signal.parity") {
                        None => Parity::Even,
                        Some((p, l)) => match p.as_str() {
                            "even" => Parity::Even,
                            "odd" => Parity::Odd,
                            other => {
                                return Err(ConfigError(format!(
                                    "line {l}: signal.parity must be even|odd, got `{other}`"
                                )))
                            }
                        },
                    };
                    SignalSpec::Cat {
                        displacement,
                        parity,
                    }
                }
                other => {
                    return Err(ConfigError(format!(
                        "line {line}: signal.kind must be gaussian|fock|cat, got `{other}`"
                    )))
                }
            };
        } else if raw.entries.keys().any(|k| k.starts_with("signal.")) {
            return Err(ConfigError(
                "missing field `signal.kind` (signal.* keys present without it)".into(),
            ));
        }

        if let Some(r) = raw.parse_typed("probe.r")? {
            self.probe_r = r;
        }
        if let Some((dir, line)) = raw.take("probe.direction") {
            self.probe_direction = match dir.as_str() {
                "squeezed" => SqueezeDirection::Squeezed,
                "antisqueezed" => SqueezeDirection::AntiSqueezed,
                other => {
                    return Err(ConfigError(format!(
                        "line {line}: probe.direction must be squeezed|antisqueezed, got `{other}`"
                    )))
                }
            };
        }

        let phi: Option<f64> = raw.parse_typed("setup.phi")?;
        let tau1: Option<f64> = raw.parse_typed("setup.tau1")?;
        match (phi, tau1) {
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "setup.phi and setup.tau1 are mutually exclusive".into(),
                ))
            }
            (Some(phi), None) => self.setup = SetupChoice::Phi(phi),
            (None, Some(tau1)) => self.setup = SetupChoice::Tau1(tau1),
            (None, None) => {}
        }

        if let Some(points) = raw.parse_typed("grid.points")? {
            self.grid_points = points;
        }
        if let Some(x_max) = raw.parse_typed("grid.x_max")? {
            self.x_max = x_max;
        }

        // `run` is informational: the subcommand decides what executes
        raw.take("run");

        if let Some(v) = raw.parse_typed("sweep.x_lo")? {
            self.sweep.x_lo = v;
        }
        if let Some(v) = raw.parse_typed("sweep.x_hi")? {
            self.sweep.x_hi = v;
        }
        if let Some(v) = raw.parse_typed("sweep.points")? {
            self.sweep.points = v;
        }
        if let Some(v) = raw.parse_typed("simulate.samples")? {
            self.simulate.samples = v;
        }
        if let Some(v) = raw.parse_typed("simulate.seed")? {
            self.simulate.seed = v;
        }
        if let Some(v) = raw.parse_typed("simulate.state_moments")? {
            self.simulate.state_moments = v;
        }

        if let Some(key) = raw.entries.keys().next() {
            return Err(ConfigError(format!(
                "key `{key}` is not applicable to the configured signal kind"
            )));
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        match self.signal {
            SignalSpec::Gaussian { variance } => {
                if !variance.is_finite() || variance <= 0.0 {
                    return Err(ConfigError(format!(
                        "signal.variance must be positive, got {variance}"
                    )));
                }
            }
            SignalSpec::Fock { n } => {
                if n > 60 {
                    return Err(ConfigError(format!("signal.n must be at most 60, got {n}")));
                }
            }
            SignalSpec::Cat { displacement, .. } => {
                if !displacement.is_finite() || displacement <= 0.0 {
                    return Err(ConfigError(format!(
                        "signal.displacement must be positive, got {displacement}"
                    )));
                }
            }
        }
        if !self.probe_r.is_finite() || self.probe_r < 0.0 {
            return Err(ConfigError(format!(
                "probe.r must be non-negative, got {}",
                self.probe_r
            )));
        }
        match self.setup {
            SetupChoice::Phi(phi) => {
                if !phi.is_finite() || phi <= 0.0 || phi >= std::f64::consts::FRAC_PI_2 {
                    return Err(ConfigError(format!(
                        "setup.phi must lie strictly inside (0, pi/2), got {phi}"
                    )));
                }
            }
            SetupChoice::Tau1(tau1) => {
                if !tau1.is_finite() || tau1 <= 0.0 || tau1 >= 1.0 {
                    return Err(ConfigError(format!(
                        "setup.tau1 must lie strictly inside (0, 1), got {tau1}"
                    )));
                }
            }
        }
        if self.grid_points < 16 {
            return Err(ConfigError(format!(
                "grid.points must be at least 16, got {}",
                self.grid_points
            )));
        }
        if !self.x_max.is_finite() || self.x_max <= 0.0 {
            return Err(ConfigError(format!(
                "grid.x_max must be positive, got {}",
                self.x_max
            )));
        }
        let SweepParams { x_lo, x_hi, points } = self.sweep;
        if !(x_lo.is_finite() && x_hi.is_finite() && 0.0 < x_lo && x_lo < x_hi) {
            return Err(ConfigError(format!(
                "sweep range must satisfy 0 < x_lo < x_hi, got [{x_lo}, {x_hi}]"
            )));
        }
        if points < 2 {
            return Err(ConfigError(format!(
                "sweep.points must be at least 2, got {points}"
            )));
        }
        if self.simulate.samples == 0 {
            return Err(ConfigError("simulate.samples must be at least 1".into()));
        }
        Ok(())
    }
}

//! JSON scenario files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "fig3a",
//!   "coupling": { "kind": "measured", "xi_khz": 2.64 },
//!   "preps": {
//!     "hot":  { "kind": "thermal", "nbar": 0.66 },
//!     "work": { "kind": "thermal", "nbar": 4.44 },
//!     "cold": { "kind": "thermal", "nbar": 2.63 }
//!   },
//!   "time_grid": { "stop_us": 400, "points": 81 }
//! }
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fockspace::TruncationPolicy;
use crate::measurement::SidebandConfig;
use crate::states::ModePrep;
use crate::trap::{coupling_rate, TrapConfig, XiConvention};
use crate::{khz_to_angular, Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    /// A measured rate in units of 2π·kHz.
    Measured {
        xi_khz: f64,
        #[serde(default)]
        convention: XiConvention,
    },
    /// Coupling from the trap geometry formula.
    Trap { trap: TrapSpec },
}

impl Coupling {
    pub fn measured(xi_khz: f64) -> Self {
        Coupling::Measured {
            xi_khz,
            convention: XiConvention::default(),
        }
    }

    /// Hamiltonian coefficient ξ in rad/s.
    pub fn xi(&self) -> Result<f64> {
        match self {
            Coupling::Measured { xi_khz, convention } => {
                if !(*xi_khz > 0.0 && xi_khz.is_finite()) {
                    return Err(Error::Validation(format!(
                        "coupling must be positive, got {xi_khz} kHz"
                    )));
                }
                Ok(convention.hamiltonian_xi(khz_to_angular(*xi_khz)))
            }
            Coupling::Trap { trap } => Ok(coupling_rate(&trap.resolve()?)?.xi),
        }
    }
}

/// A named trap configuration or explicit single-ion frequencies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrapSpec {
    Named(String),
    Frequencies {
        omega_x_khz: f64,
        omega_y_khz: f64,
        omega_z_khz: f64,
    },
}

impl TrapSpec {
    pub fn resolve(&self) -> Result<TrapConfig> {
        let cfg = match self {
            TrapSpec::Named(n) => match n.to_ascii_lowercase().as_str() {
                "a" | "config_a" => TrapConfig::config_a(),
                "b" | "config_b" => TrapConfig::config_b(),
                other => return Err(Error::Validation(format!("unknown trap preset '{other}'"))),
            },
            TrapSpec::Frequencies {
                omega_x_khz,
                omega_y_khz,
                omega_z_khz,
            } => TrapConfig::from_khz(*omega_x_khz, *omega_y_khz, *omega_z_khz),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preps {
    pub hot: ModePrep,
    pub work: ModePrep,
    pub cold: ModePrep,
}

impl Preps {
    pub fn thermal(h: f64, w: f64, c: f64) -> Self {
        Preps {
            hot: ModePrep::thermal(h),
            work: ModePrep::thermal(w),
            cold: ModePrep::thermal(c),
        }
    }

    pub fn as_array(&self) -> [ModePrep; 3] {
        [self.hot.clone(), self.work.clone(), self.cold.clone()]
    }

    pub fn means(&self) -> [f64; 3] {
        [self.hot.mean(), self.work.mean(), self.cold.mean()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGrid {
    pub times_us: Vec<f64>,
}

/// `points` evenly spaced times from `start_us` to `stop_us` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformGrid {
    #[serde(default)]
    pub start_us: f64,
    pub stop_us: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeGrid {
    Explicit(ExplicitGrid),
    Uniform(UniformGrid),
}

impl TimeGrid {
    pub fn uniform(start_us: f64, stop_us: f64, points: usize) -> Self {
        TimeGrid::Uniform(UniformGrid {
            start_us,
            stop_us,
            points,
        })
    }

    pub fn explicit(times_us: Vec<f64>) -> Self {
        TimeGrid::Explicit(ExplicitGrid { times_us })
    }

    /// Grid in microseconds, validated to be non-empty and strictly increasing.
    pub fn times_us(&self) -> Result<Vec<f64>> {
        let t = match self {
            TimeGrid::Explicit(g) => g.times_us.clone(),
            TimeGrid::Uniform(UniformGrid {
                start_us,
                stop_us,
                points,
            }) => match points {
                0 => Vec::new(),
                1 => vec![*start_us],
                n => (0..*n)
                    .map(|i| start_us + (stop_us - start_us) * i as f64 / (*n - 1) as f64)
                    .collect(),
            },
        };
        if t.is_empty() {
            return Err(Error::Validation("time grid is empty".into()));
        }
        if t.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(
                "time grid entries must be finite and >= 0".into(),
            ));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("time grid must be strictly increasing".into()));
        }
        Ok(t)
    }
}

/// Datasets requested by `simulate`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Trajectory,
    SteadyState,
    SingleShot,
}

/// A labelled set of initial states, used by sweep-style datasets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub label: String,
    pub preps: Preps,
    /// Optional measured cold steady state to compare with.
    #[serde(default)]
    pub measured_nbar_c_ss: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub nbar_w: Vec<f64>,
    #[serde(default)]
    pub nbar_c: Vec<f64>,
    #[serde(default)]
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub coupling: Coupling,
    /// Detuning from resonance in 2π·kHz.
    #[serde(default)]
    pub detuning_khz: f64,
    pub preps: Preps,
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub truncation: TruncationPolicy,
    /// Trap whose mode frequencies and ion mass are used for temperatures
    /// and cooling power. Defaults to the coupling trap, else preset "a".
    #[serde(default)]
    pub trap: Option<TrapSpec>,
    #[serde(default)]
    pub sideband: Option<SidebandConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub sweep: Sweep,
}

fn default_outputs() -> Vec<OutputKind> {
    vec![OutputKind::Trajectory]
}

impl Scenario {
    pub fn new(name: &str, coupling: Coupling, preps: Preps, time_grid: TimeGrid) -> Self {
        Scenario {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            coupling,
            detuning_khz: 0.0,
            preps,
            time_grid,
            truncation: TruncationPolicy::default(),
            trap: None,
            sideband: None,
            seed: 0,
            outputs: default_outputs(),
            sweep: Sweep::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Validation(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.coupling.xi()?;
        self.trap_config()?;
        if !self.detuning_khz.is_finite() {
            return Err(Error::Validation("detuning must be finite".into()));
        }
        for p in self.preps.as_array() {
            p.validate()?;
        }
        self.time_grid.times_us()?;
        self.truncation.validate()?;
        if let Some(sb) = &self.sideband {
            sb.validate()?;
        }
        for row in &self.sweep.rows {
            for p in row.preps.as_array() {
                p.validate()?;
            }
        }
        Ok(())
    }

    pub fn xi(&self) -> Result<f64> {
        self.coupling.xi()
    }

    pub fn trap_config(&self) -> Result<TrapConfig> {
        match (&self.trap, &self.coupling) {
            (Some(t), _) => t.resolve(),
            (None, Coupling::Trap { trap }) => trap.resolve(),
            (None, _) => Ok(TrapConfig::config_a()),
        }
    }

    pub fn detuning(&self) -> f64 {
        khz_to_angular(self.detuning_khz)
    }

    /// Time grid in seconds.
    pub fn times(&self) -> Result<Vec<f64>> {
        Ok(self.time_grid.times_us()?.into_iter().map(|t| t * 1e-6).collect())
    }

    pub fn with_preps(&self, preps: Preps) -> Self {
        Scenario {
            preps,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3A: &str = r#"{
        "schema_version": 1,
        "name": "fig3a",
        "coupling": { "kind": "measured", "xi_khz": 2.64 },
        "preps": {
            "hot":  { "kind": "thermal", "nbar": 0.66 },
            "work": { "kind": "thermal", "nbar": 4.44 },
            "cold": { "kind": "thermal", "nbar": 2.63 }
        },
        "time_grid": { "stop_us": 400, "points": 81 }
    }"#;

    #[test]
    fn parses_documented_example() {
        let s = Scenario::from_json(FIG3A).unwrap();
        let t = s.times().unwrap();
        assert_eq!(t.len(), 81);
        assert!((t[1] - 5e-6).abs() < 1e-18);
        assert!((s.xi().unwrap() - khz_to_angular(1.32)).abs() < 1e-9);
        assert_eq!(s.outputs, vec![OutputKind::Trajectory]);
        let back = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let extra = FIG3A.replace("\"name\"", "\"colour\": 1, \"name\"");
        assert!(Scenario::from_json(&extra).is_err());
        let v2 = FIG3A.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(Scenario::from_json(&v2).is_err());
        let bad_prep = FIG3A.replace("\"nbar\": 0.66", "\"nbar\": 0.66, \"r\": 1");
        assert!(Scenario::from_json(&bad_prep).is_err());
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::explicit(vec![0.0, 2.0, 1.0]).times_us().is_err());
        assert!(TimeGrid::explicit(vec![]).times_us().is_err());
        assert_eq!(TimeGrid::uniform(0.0, 10.0, 1).times_us().unwrap(), vec![0.0]);
    }

    #[test]
    fn trap_coupling() {
        let c = Coupling::Trap {
            trap: TrapSpec::Named("a".into()),
        };
        let xi = c.xi().unwrap();
        assert!(xi > khz_to_angular(1.0) && xi < khz_to_angular(1.6));
        assert!(Coupling::Trap {
            trap: TrapSpec::Named("z".into())
        }
        .xi()
        .is_err());
        let conv = Coupling::Measured {
            xi_khz: 2.0,
            convention: XiConvention::Hamiltonian,
        };
        assert!((conv.xi().unwrap() - khz_to_angular(2.0)).abs() < 1e-9);
    }
}

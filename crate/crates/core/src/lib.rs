//! Simulator and experiment harness for a three-mode trilinear absorption
//! refrigerator built from the motional modes of a trapped-ion crystal.
//!
//! The interaction `ħξ(a_h† a_w a_c + a_h a_w† a_c†)` conserves the pair
//! `(N, M) = (n_h + n_w, n_h + n_c)`, so the dynamics splits into small
//! tridiagonal blocks ("sectors"). Everything downstream (steady states,
//! single-shot cooling, readout models) is built on that decomposition.
//!
//! Module map:
//!
//! * [`trap`]: mode frequencies, ion spacing, coupling rate, temperatures.
//! * [`fockspace`]: sector enumeration and truncation.
//! * [`states`]: thermal, coherent, squeezed phonon distributions.
//! * [`dynamics`]: sector Hamiltonians, unitary and dephasing evolution,
//!   plus a dense full-space oracle.
//! * [`measurement`]: sideband brightness models, the linearised phonon
//!   estimator and least-squares calibration fits.
//! * [`benchmarks`]: classical thermodynamic predictions.
//! * [`experiments`]: scenarios, dataset generation and file output.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fockspace;
pub mod measurement;
pub mod states;
pub mod trap;

pub use error::{Error, Result};

/// Index of a refrigerator mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hot,
    Work,
    Cold,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Hot, Mode::Work, Mode::Cold];

    pub fn index(self) -> usize {
        match self {
            Mode::Hot => 0,
            Mode::Work => 1,
            Mode::Cold => 2,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Mode::Hot => "h",
            Mode::Work => "w",
            Mode::Cold => "c",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" | "hot" => Ok(Mode::Hot),
            "w" | "work" => Ok(Mode::Work),
            "c" | "cold" => Ok(Mode::Cold),
            other => Err(Error::Validation(format!("unknown mode '{other}'"))),
        }
    }
}

/// Convert an ordinary frequency in kHz to angular frequency in rad/s.
pub fn khz_to_angular(khz: f64) -> f64 {
    2.0 * std::f64::consts::PI * khz * 1e3
}

/// Convert an angular frequency in rad/s to ordinary frequency in kHz.
pub fn angular_to_khz(omega: f64) -> f64 {
    omega / (2.0 * std::f64::consts::PI * 1e3)
}

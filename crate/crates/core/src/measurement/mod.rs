//! Sideband readout models, the linearised phonon-number estimator and
//! calibration fits.

pub mod fit;
pub mod lsq;

use std::io::{Read, Write};
use std::path::Path;

use rand::rngs::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::{Error, Mode, Result};

pub use fit::{
    fit_distribution, fit_preparation_curves, DistributionFit, DistributionModel, FitOptions,
    PreparationData, PreparationFit, FREE_MODEL_MAX_N,
};
pub use lsq::{levenberg_marquardt, LsqOptions, LsqSolution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidebandConfig {
    /// Base sideband Rabi rate Ω (red sideband) or Ω₀,₁ (blue sideband), rad/s.
    pub omega_rabi: f64,
    /// Red-sideband pulse length, s.
    pub t_rsb: f64,
    /// Detection background.
    pub a_bg: f64,
    /// Detection efficiency.
    pub eta: f64,
    /// Base decoherence rate γ₀ of blue-sideband flopping, 1/s.
    #[serde(default)]
    pub gamma0: f64,
}

impl Default for SidebandConfig {
    /// 2π·10 kHz sideband, π pulse on the `n = 1` transition, 2% background,
    /// 95% efficiency.
    fn default() -> Self {
        let omega = crate::khz_to_angular(10.0);
        SidebandConfig {
            omega_rabi: omega,
            t_rsb: std::f64::consts::PI / omega,
            a_bg: 0.02,
            eta: 0.95,
            gamma0: 0.0,
        }
    }
}

impl SidebandConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !(self.omega_rabi > 0.0 && self.omega_rabi.is_finite()) {
            return Err(Error::Validation("sideband Rabi rate must be positive".into()));
        }
        if !(self.t_rsb >= 0.0) || !(self.gamma0 >= 0.0) {
            return Err(Error::Validation(
                "pulse length and decoherence rate must be >= 0".into(),
            ));
        }
        if !prob(self.a_bg) || !prob(self.eta) {
            return Err(Error::Validation(
                "background and efficiency must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// One point of a brightness curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrightnessSample {
    /// s
    pub t: f64,
    pub p_up: f64,
    pub sigma: f64,
}

impl BrightnessSample {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_up) || !(self.sigma > 0.0) || !self.t.is_finite() {
            return Err(Error::Validation(format!(
                "sample at t = {} has p_up = {}, sigma = {}",
                self.t, self.p_up, self.sigma
            )));
        }
        Ok(())
    }
}

/// `a + η Σ p(n) (1 - cos(√n Ω t_rsb)) / 2`.
pub fn red_sideband_brightness(p: &[f64], cfg: &SidebandConfig) -> f64 {
    let theta = cfg.omega_rabi * cfg.t_rsb;
    let excited: f64 = p
        .iter()
        .enumerate()
        .map(|(n, pn)| pn * (1.0 - ((n as f64).sqrt() * theta).cos()) / 2.0)
        .sum();
    cfg.a_bg + cfg.eta * excited
}

/// Contrast `a` and offset `b` of a blue-sideband flopping curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlopAmplitudes {
    pub contrast: f64,
    pub background: f64,
}

impl Default for FlopAmplitudes {
    fn default() -> Self {
        FlopAmplitudes {
            contrast: 0.95,
            background: 0.02,
        }
    }
}

/// `(a/2)(1 - Σ p(n) cos(√(n+1) Ω₀,₁ t) e^{-√(n+1) γ₀ t}) + b` at each time (s).
pub fn blue_sideband_flopping(
    p: &[f64],
    cfg: &SidebandConfig,
    amps: &FlopAmplitudes,
    times: &[f64],
) -> Vec<f64> {
    let roots: Vec<f64> = (0..p.len()).map(|n| ((n + 1) as f64).sqrt()).collect();
    times
        .iter()
        .map(|&t| {
            // Σ p(n)(1 - cos·e^{-γt}) equals 1 - Σ p(n) cos·e^{-γt} for normalised
            // p, and is exactly zero at t = 0.
            let mut s = 0.0;
            for (pn, root) in p.iter().zip(&roots) {
                if *pn != 0.0 {
                    let mut osc = (root * cfg.omega_rabi * t).cos();
                    if cfg.gamma0 != 0.0 {
                        osc *= (-root * cfg.gamma0 * t).exp();
                    }
                    s += pn * (1.0 - osc);
                }
            }
            amps.contrast / 2.0 * s + amps.background
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Finite-difference step in the initial occupation, phonons.
    pub delta: f64,
    pub mode: Mode,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            delta: 0.05,
            mode: Mode::Cold,
        }
    }
}

/// Simulated brightness and occupation at the nominal initial occupation and
/// at the two `±δ` shifted ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulatedReadout {
    pub p_up_th: f64,
    pub nbar_th: f64,
    pub p_up_plus: f64,
    pub nbar_plus: f64,
    pub p_up_minus: f64,
    pub nbar_minus: f64,
}

/// Sensitivity `Δp↑` below which the estimator refuses to divide.
pub const MIN_SENSITIVITY: f64 = 1e-6;

/// `n̄_exp = n̄_th + (Δn̄/Δp↑)(p↑_exp - p↑_th)`.
pub fn estimate_nbar(p_up_exp: f64, sim: &SimulatedReadout, cfg: &EstimatorConfig) -> Result<f64> {
    if !(cfg.delta > 0.0) {
        return Err(Error::Validation("estimator delta must be positive".into()));
    }
    let dp = sim.p_up_plus - sim.p_up_minus;
    if !(dp.abs() >= MIN_SENSITIVITY) {
        return Err(Error::Degenerate(format!(
            "brightness changes by only {dp:.3e} across the +/-delta simulations"
        )));
    }
    let slope = (sim.nbar_plus - sim.nbar_minus) / dp;
    Ok(sim.nbar_th + slope * (p_up_exp - sim.p_up_th))
}

/// Flopping curve with Gaussian noise of standard deviation `sigma` added to
/// each point, clamped to `[0, 1]`. Same seed, same samples.
pub fn synthetic_flopping(
    p: &[f64],
    cfg: &SidebandConfig,
    amps: &FlopAmplitudes,
    times: &[f64],
    sigma: f64,
    seed: u64,
) -> Result<Vec<BrightnessSample>> {
    if !(sigma > 0.0) {
        return Err(Error::Validation("noise sigma must be positive".into()));
    }
    let noise =
        Normal::new(0.0, sigma).map_err(|e| Error::Validation(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(blue_sideband_flopping(p, cfg, amps, times)
        .into_iter()
        .zip(times)
        .map(|(v, &t)| BrightnessSample {
            t,
            p_up: (v + noise.sample(&mut rng)).clamp(0.0, 1.0),
            sigma,
        })
        .collect())
}

/// Read samples from CSV with header `t_us,p_up,sigma`.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<BrightnessSample>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Row {
        t_us: f64,
        p_up: f64,
        sigma: f64,
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t_us", "p_up", "sigma"] {
        return Err(Error::Validation(format!(
            "expected header t_us,p_up,sigma, found {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: Row = row?;
        let s = BrightnessSample {
            t: row.t_us * 1e-6,
            p_up: row.p_up,
            sigma: row.sigma,
        };
        s.validate()?;
        out.push(s);
    }
    Ok(out)
}

pub fn read_samples_file(path: &Path) -> Result<Vec<BrightnessSample>> {
    read_samples(std::fs::File::open(path)?)
}

pub fn write_samples<W: Write>(mut w: W, samples: &[BrightnessSample]) -> Result<()> {
    writeln!(w, "t_us,p_up,sigma")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{}",
            crate::experiments::fmt_g12(s.t * 1e6),
            crate::experiments::fmt_g12(s.p_up),
            crate::experiments::fmt_g12(s.sigma)
        )?;
    }
    Ok(())
}

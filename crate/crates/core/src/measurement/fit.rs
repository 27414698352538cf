//! Calibration fits: phonon distributions from blue-sideband flopping and
//! the preparation curves (heating, random-walk steps, squeezing rate).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::rngs::ChaCha8Rng;
use rand::{RngExt, SeedableRng};
use serde::{Deserialize, Serialize};

use super::lsq::{levenberg_marquardt, LsqOptions};
use super::{blue_sideband_flopping, BrightnessSample, FlopAmplitudes, SidebandConfig};
use crate::states::{
    coherent_distribution, squeezed_thermal_distribution, squeezed_vacuum_distribution, thermal_distribution,
    PreparationModel,
};
use crate::{Error, Result};

/// Highest Fock state with its own parameter in the free fit.
pub const FREE_MODEL_MAX_N: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionModel {
    Thermal,
    Coherent,
    SqueezedVacuum,
    SqueezedThermal,
    /// Unconstrained populations on `0..=13` summing to one.
    Free,
}

impl DistributionModel {
    pub const ALL: [DistributionModel; 5] = [
        DistributionModel::Thermal,
        DistributionModel::Coherent,
        DistributionModel::SqueezedVacuum,
        DistributionModel::SqueezedThermal,
        DistributionModel::Free,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionModel::Thermal => "thermal",
            DistributionModel::Coherent => "coherent",
            DistributionModel::SqueezedVacuum => "squeezed-vacuum",
            DistributionModel::SqueezedThermal => "squeezed-thermal",
            DistributionModel::Free => "free",
        }
    }

    fn param_names(self) -> Vec<String> {
        match self {
            DistributionModel::Thermal => vec!["nbar".into()],
            DistributionModel::Coherent => vec!["alpha_sq".into()],
            DistributionModel::SqueezedVacuum => vec!["r".into()],
            DistributionModel::SqueezedThermal => vec!["nbar".into(), "r".into()],
            DistributionModel::Free => (0..=FREE_MODEL_MAX_N).map(|n| format!("p{n}")).collect(),
        }
    }

    /// Number of free parameters describing the distribution.
    fn dof(self) -> usize {
        match self {
            DistributionModel::SqueezedThermal => 2,
            DistributionModel::Free => FREE_MODEL_MAX_N,
            _ => 1,
        }
    }
}

impl fmt::Display for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistributionModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DistributionModel::ALL
            .into_iter()
            .find(|m| m.name() == s || m.name().replace('-', "_") == s)
            .ok_or_else(|| Error::Validation(format!("unknown distribution model '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Flopping rate Ω₀,₁ and decoherence γ₀; other fields are unused.
    pub sideband: SidebandConfig,
    /// Starting point for the contrast and background, or their fixed values.
    pub amplitudes: FlopAmplitudes,
    pub fit_amplitudes: bool,
    /// Number of randomised starting points.
    pub starts: usize,
    pub seed: u64,
    /// Fock cutoff used to evaluate model distributions.
    pub cutoff: usize,
    pub lsq: LsqOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            sideband: SidebandConfig::default(),
            amplitudes: FlopAmplitudes::default(),
            fit_amplitudes: true,
            starts: 4,
            seed: 0,
            cutoff: 200,
            lsq: LsqOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    /// 1σ, from the curvature of χ² at the optimum.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFit {
    pub model: DistributionModel,
    pub params: Vec<FittedParam>,
    pub amplitudes: FlopAmplitudes,
    /// Fitted populations on `0..cutoff`.
    pub populations: Vec<f64>,
    pub reduced_chi2: f64,
    pub iterations: usize,
    pub rank_deficient: bool,
}

impl DistributionFit {
    pub fn param(&self, name: &str) -> Option<&FittedParam> {
        self.params.iter().find(|p| p.name == name)
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    // Population of n = 0 has its logit pinned at zero.
    let mut logits = vec![0.0];
    logits.extend_from_slice(z);
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn populations(model: DistributionModel, x: &[f64], cutoff: usize) -> Result<Vec<f64>> {
    let d = match model {
        DistributionModel::Thermal => thermal_distribution(x[0].abs(), cutoff)?,
        DistributionModel::Coherent => coherent_distribution(x[0].abs(), cutoff)?,
        DistributionModel::SqueezedVacuum => squeezed_vacuum_distribution(x[0].abs(), cutoff)?,
        DistributionModel::SqueezedThermal => squeezed_thermal_distribution(x[0].abs(), x[1].abs(), cutoff)?,
        DistributionModel::Free => return Ok(softmax(&x[..FREE_MODEL_MAX_N])),
    };
    Ok(d.p)
}

fn initial_guess(model: DistributionModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match model {
        DistributionModel::Thermal | DistributionModel::Coherent => vec![rng.random_range(0.2..4.0)],
        DistributionModel::SqueezedVacuum => vec![rng.random_range(0.2..1.5)],
        DistributionModel::SqueezedThermal => {
            vec![rng.random_range(0.1..2.0), rng.random_range(0.2..1.5)]
        }
        DistributionModel::Free => (0..FREE_MODEL_MAX_N)
            .map(|n| -0.2 * (n + 1) as f64 + rng.random_range(-0.5..0.5))
            .collect(),
    }
}

/// Weighted least-squares fit of blue-sideband flopping data to a model
/// phonon distribution.
pub fn fit_distribution(
    data: &[BrightnessSample],
    model: DistributionModel,
    opts: &FitOptions,
) -> Result<DistributionFit> {
    for s in data {
        s.validate()?;
    }
    let n_amp = if opts.fit_amplitudes { 2 } else { 0 };
    let n_par = model.dof() + n_amp;
    if data.len() < 3 * n_par {
        return Err(Error::Validation(format!(
            "{} samples are too few for {} parameters (need at least {})",
            data.len(),
            n_par,
            3 * n_par
        )));
    }
    let times: Vec<f64> = data.iter().map(|s| s.t).collect();
    let dof = model.dof();
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        let mut p = populations(model, &x[..dof], opts.cutoff)?;
        // The far tail is below double precision of the curve anyway.
        let keep = p.iter().rposition(|v| *v > 1e-18).map_or(1, |i| i + 1);
        p.truncate(keep);
        let amps = if opts.fit_amplitudes {
            FlopAmplitudes {
                contrast: x[dof],
                background: x[dof + 1],
            }
        } else {
            opts.amplitudes
        };
        let curve = blue_sideband_flopping(&p, &opts.sideband, &amps, &times);
        Ok(curve
            .iter()
            .zip(data)
            .map(|(m, s)| (m - s.p_up) / s.sigma)
            .collect())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best = None;
    let mut last_err = None;
    for _ in 0..opts.starts.max(1) {
        let mut x0 = initial_guess(model, &mut rng);
        if opts.fit_amplitudes {
            x0.push(opts.amplitudes.contrast);
            x0.push(opts.amplitudes.background);
        }
        match levenberg_marquardt(residuals, &x0, &opts.lsq) {
            Ok(sol) => {
                if best
                    .as_ref()
                    .is_none_or(|b: &super::LsqSolution| sol.cost < b.cost)
                {
                    best = Some(sol);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let sol = match best {
        Some(s) => s,
        None => return Err(last_err.unwrap_or_else(|| Error::Convergence("no fit attempted".into()))),
    };
    if sol.rank_deficient && model != DistributionModel::Free {
        return Err(Error::RankDeficient(format!(
            "the data do not constrain every parameter of the {model} model"
        )));
    }

    let x = &sol.params;
    let pops = populations(model, &x[..dof], opts.cutoff)?;
    let err = |i: usize| sol.covariance[(i, i)].max(0.0).sqrt();
    let mut params = Vec::new();
    if model == DistributionModel::Free {
        // Propagate the logit covariance through the softmax.
        let n = FREE_MODEL_MAX_N + 1;
        let jac = DMatrix::from_fn(n, FREE_MODEL_MAX_N, |i, k| {
            let kk = k + 1;
            pops[i] * (if i == kk { 1.0 } else { 0.0 } - pops[kk])
        });
        let cov_z = sol.covariance.view((0, 0), (dof, dof)).into_owned();
        let cov_p = &jac * cov_z * jac.transpose();
        for (i, name) in model.param_names().into_iter().enumerate() {
            params.push(FittedParam {
                name,
                value: pops[i],
                error: cov_p[(i, i)].max(0.0).sqrt(),
            });
        }
    } else {
        for (i, name) in model.param_names().into_iter().enumerate() {
            params.push(FittedParam {
                name,
                value: x[i].abs(),
                error: err(i),
            });
        }
    }
    let amplitudes = if opts.fit_amplitudes {
        params.push(FittedParam {
            name: "contrast".into(),
            value: x[dof],
            error: err(dof),
        });
        params.push(FittedParam {
            name: "background".into(),
            value: x[dof + 1],
            error: err(dof + 1),
        });
        FlopAmplitudes {
            contrast: x[dof],
            background: x[dof + 1],
        }
    } else {
        opts.amplitudes
    };
    Ok(DistributionFit {
        model,
        params,
        amplitudes,
        populations: pops,
        reduced_chi2: sol.cost / (data.len() - n_par) as f64,
        iterations: sol.iterations,
        rank_deficient: sol.rank_deficient,
    })
}

/// Calibration measurements of the state preparation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreparationData {
    /// `(t_us, m̄)` from a continuous coherent drive: `m̄ = n₀ + β t²`.
    pub heating: Vec<(f64, f64)>,
    /// `(steps, n̄)` after random-walk heating: `n̄ = offset + slope·steps`.
    pub steps: Vec<(f64, f64)>,
    /// `(t_us, r)` squeezing parameter against squeezing time: `r = ρ t`.
    pub squeezing: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparationFit {
    pub n0: FittedParam,
    pub beta: FittedParam,
    pub offset: FittedParam,
    pub slope: FittedParam,
    pub rho_rate: FittedParam,
    /// Calibration model with `m̄` from β and zero steps.
    pub model: PreparationModel,
}

/// Ordinary least squares on a linear design matrix; returns values and 1σ
/// errors scaled by the residual variance.
fn linear_fit(design: DMatrix<f64>, y: DVector<f64>, names: &[&str]) -> Result<Vec<FittedParam>> {
    let (m, n) = design.shape();
    if m < 3.max(n) {
        return Err(Error::Validation(format!(
            "{m} points are too few for a calibration curve (need at least 3)"
        )));
    }
    let jtj = design.transpose() * &design;
    let inv = jtj
        .clone()
        .try_inverse()
        .filter(|_| jtj.determinant().abs() > 1e-300)
        .ok_or_else(|| Error::RankDeficient("calibration points do not constrain the curve".into()))?;
    let beta = &inv * design.transpose() * &y;
    let resid = &y - &design * &beta;
    let dof = (m - n).max(1) as f64;
    let s2 = resid.norm_squared() / dof;
    Ok(names
        .iter()
        .enumerate()
        .map(|(i, name)| FittedParam {
            name: (*name).into(),
            value: beta[i],
            error: (inv[(i, i)] * s2).max(0.0).sqrt(),
        })
        .collect())
}

pub fn fit_preparation_curves(data: &PreparationData) -> Result<PreparationFit> {
    let quad = {
        let d = &data.heating;
        let design = DMatrix::from_fn(d.len(), 2, |i, j| if j == 0 { 1.0 } else { d[i].0 * d[i].0 });
        linear_fit(
            design,
            DVector::from_iterator(d.len(), d.iter().map(|p| p.1)),
            &["n0", "beta"],
        )?
    };
    let lin = {
        let d = &data.steps;
        let design = DMatrix::from_fn(d.len(), 2, |i, j| if j == 0 { 1.0 } else { d[i].0 });
        linear_fit(
            design,
            DVector::from_iterator(d.len(), d.iter().map(|p| p.1)),
            &["offset", "slope"],
        )?
    };
    let sq = {
        let d = &data.squeezing;
        let design = DMatrix::from_fn(d.len(), 1, |i, _| d[i].0);
        linear_fit(
            design,
            DVector::from_iterator(d.len(), d.iter().map(|p| p.1)),
            &["rho_rate"],
        )?
    };
    let [n0, beta]: [FittedParam; 2] = quad.try_into().expect("two parameters");
    let [offset, slope]: [FittedParam; 2] = lin.try_into().expect("two parameters");
    let [rho_rate]: [FittedParam; 1] = sq.try_into().expect("one parameter");
    let model = PreparationModel {
        nbar0: offset.value,
        mbar: PreparationModel::mbar_from_beta(beta.value),
        steps: 0,
        beta: beta.value,
        rho_rate: rho_rate.value,
    };
    Ok(PreparationFit {
        n0,
        beta,
        offset,
        slope,
        rho_rate,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(p: &[f64], opts: &FitOptions) -> Vec<BrightnessSample> {
        let times: Vec<f64> = (0..90).map(|i| i as f64 * 4e-6).collect();
        blue_sideband_flopping(p, &opts.sideband, &opts.amplitudes, &times)
            .into_iter()
            .zip(&times)
            .map(|(v, t)| BrightnessSample {
                t: *t,
                p_up: v,
                sigma: 0.02,
            })
            .collect()
    }

    #[test]
    fn model_names_parse() {
        for m in DistributionModel::ALL {
            assert_eq!(m.name().parse::<DistributionModel>().unwrap(), m);
        }
        assert!("gaussian".parse::<DistributionModel>().is_err());
    }

    #[test]
    fn noiseless_thermal_recovered() {
        let opts = FitOptions::default();
        let p = thermal_distribution(1.82, 200).unwrap().p;
        let fit = fit_distribution(&synthetic(&p, &opts), DistributionModel::Thermal, &opts).unwrap();
        assert_abs_diff_eq!(fit.param("nbar").unwrap().value, 1.82, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.amplitudes.contrast, opts.amplitudes.contrast, epsilon = 1e-6);
    }

    #[test]
    fn too_few_samples() {
        let opts = FitOptions::default();
        let data = vec![
            BrightnessSample {
                t: 0.0,
                p_up: 0.1,
                sigma: 0.02
            };
            5
        ];
        assert!(matches!(
            fit_distribution(&data, DistributionModel::Thermal, &opts),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn free_fit_is_on_the_simplex() {
        let opts = FitOptions {
            fit_amplitudes: false,
            starts: 1,
            ..FitOptions::default()
        };
        let p = thermal_distribution(0.8, 200).unwrap().p;
        let fit = fit_distribution(&synthetic(&p, &opts), DistributionModel::Free, &opts).unwrap();
        let total: f64 = fit.populations.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert!(fit.populations.iter().all(|v| *v >= 0.0));
        assert_eq!(fit.populations.len(), FREE_MODEL_MAX_N + 1);
        for (a, b) in fit.populations.iter().zip(&p).take(4) {
            assert!((a - b).abs() < 0.02);
        }
    }

    #[test]
    fn preparation_curves() {
        let heating: Vec<_> = (0..6)
            .map(|i| {
                let t = 20.0 * i as f64;
                (t, 0.05 + 2e-4 * t * t)
            })
            .collect();
        let steps: Vec<_> = (0..8).map(|s| (s as f64, 0.025 + 0.075 * s as f64)).collect();
        let squeezing: Vec<_> = (1..6)
            .map(|i| (10.0 * i as f64, 0.012 * 10.0 * i as f64))
            .collect();
        let fit = fit_preparation_curves(&PreparationData {
            heating,
            steps,
            squeezing,
        })
        .unwrap();
        assert_abs_diff_eq!(fit.beta.value, 2e-4, epsilon = 1e-15);
        assert_abs_diff_eq!(fit.n0.value, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.slope.value, 0.075, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.offset.value, 0.025, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.rho_rate.value, 0.012, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.model.mbar, 2.0, epsilon = 1e-9);

        let short = PreparationData {
            heating: vec![(0.0, 0.1), (1.0, 0.2)],
            ..Default::default()
        };
        assert!(fit_preparation_curves(&short).is_err());
    }
}

//! Running a scenario: trajectories, steady states and the single-shot
//! optimum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::format::{Cell, Metadata, Table};
use super::scenario::{Preps, Scenario};
use crate::dynamics::{assemble_initial, SpectralEnsemble};
use crate::measurement::{estimate_nbar, red_sideband_brightness, EstimatorConfig, SimulatedReadout};
use crate::states::ModePrep;
use crate::trap::CODATA_2014;
use crate::{Error, Mode, Result};

/// Averaging windows used for the measured steady states.
pub const WINDOW_THERMAL_US: f64 = 240.0;
pub const WINDOW_SQUEEZED_US: f64 = 600.0;

/// Golden-section tolerance for the single-shot time, s.
pub const TAU_TOLERANCE: f64 = 0.1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateRule {
    /// Exact infinite-time average.
    #[default]
    Dephasing,
    /// Mean over grid points with `τ > start_us`.
    Window { start_us: f64 },
}

impl fmt::Display for SteadyStateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteadyStateRule::Dephasing => f.write_str("dephasing"),
            SteadyStateRule::Window { start_us } => write!(f, "window:{start_us}"),
        }
    }
}

impl FromStr for SteadyStateRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "dephasing" {
            return Ok(SteadyStateRule::Dephasing);
        }
        if let Some(rest) = s.strip_prefix("window:") {
            let start_us: f64 = rest
                .trim_end_matches("us")
                .parse()
                .map_err(|_| Error::Validation(format!("bad window start '{rest}'")))?;
            if !(start_us >= 0.0 && start_us.is_finite()) {
                return Err(Error::Validation("window start must be >= 0".into()));
            }
            return Ok(SteadyStateRule::Window { start_us });
        }
        Err(Error::Validation(format!(
            "unknown steady-state rule '{s}' (use dephasing or window:<us>)"
        )))
    }
}

/// Mean occupations on the time grid, with optional red-sideband brightness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times_us: Vec<f64>,
    pub nbar: Vec<[f64; 3]>,
    pub p_up: Option<Vec<[f64; 3]>>,
}

impl Trajectory {
    pub fn cold(&self) -> Vec<f64> {
        self.series(Mode::Cold)
    }

    pub fn series(&self, mode: Mode) -> Vec<f64> {
        self.nbar.iter().map(|m| m[mode.index()]).collect()
    }

    pub fn table(&self, meta: &Metadata) -> Table {
        let mut cols = vec!["tau_us", "nbar_h", "nbar_w", "nbar_c"];
        if self.p_up.is_some() {
            cols.extend(["p_up_h", "p_up_w", "p_up_c"]);
        }
        let mut t = Table::new(&cols);
        t.meta = meta.clone();
        for (i, (tau, m)) in self.times_us.iter().zip(&self.nbar).enumerate() {
            let mut row: Vec<Cell> = vec![(*tau).into(), m[0].into(), m[1].into(), m[2].into()];
            if let Some(p) = &self.p_up {
                row.extend(p[i].iter().map(|v| Cell::Num(*v)));
            }
            t.push(row);
        }
        t
    }
}

/// Position and depth of the transient cold-mode minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleShot {
    pub tau_star_us: f64,
    pub nbar_c_in: f64,
    pub nbar_c_min: f64,
    pub nbar_c_long_time: f64,
    pub means_at_tau: [f64; 3],
}

impl SingleShot {
    /// `n̄_c^in - n̄_c(τ*)`
    pub fn gain(&self) -> f64 {
        self.nbar_c_in - self.nbar_c_min
    }

    /// `n̄_c^in - n̄_c(ρ_∞)`
    pub fn long_time_gain(&self) -> f64 {
        self.nbar_c_in - self.nbar_c_long_time
    }
}

/// A scenario with its sector eigensystems ready for evaluation.
pub struct Simulation {
    pub scenario: Scenario,
    pub spectral: SpectralEnsemble,
    /// Grid in seconds.
    pub times: Vec<f64>,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let ens = assemble_initial(
            &scenario.preps.as_array(),
            &scenario.truncation,
            scenario.xi()?,
            scenario.detuning(),
        )?;
        Ok(Simulation {
            scenario: scenario.clone(),
            spectral: SpectralEnsemble::new(ens)?,
            times: scenario.times()?,
        })
    }

    pub fn initial_means(&self) -> [f64; 3] {
        self.spectral.means_at(0.0)
    }

    pub fn long_time_means(&self) -> [f64; 3] {
        self.spectral.long_time_means()
    }

    pub fn metadata(&self) -> Metadata {
        let ens = &self.spectral.ensemble;
        let c = &CODATA_2014;
        let mut m = Metadata::default();
        m.push("software", concat!("ionfridge ", env!("CARGO_PKG_VERSION")))
            .push("schema_version", super::scenario::SCHEMA_VERSION)
            .push(
                "scenario",
                if self.scenario.name.is_empty() {
                    "-"
                } else {
                    &self.scenario.name
                },
            )
            .push("hbar_J_s", super::fmt_g12(c.hbar))
            .push("k_B_J_per_K", super::fmt_g12(c.k_b))
            .push("xi_rad_per_s", super::fmt_g12(ens.xi))
            .push("detuning_rad_per_s", super::fmt_g12(ens.detuning))
            .push("epsilon", super::fmt_g12(self.scenario.truncation.epsilon))
            .push("retained_weight", super::fmt_g12(ens.retained_weight()))
            .push("sector_count", ens.sector_count())
            .push("max_sector_dim", ens.max_sector_dim())
            .push("seed", self.scenario.seed);
        m
    }

    pub fn trajectory(&self) -> Trajectory {
        let nbar = self.spectral.trajectory(&self.times);
        let p_up = self.scenario.sideband.as_ref().map(|cfg| {
            self.times
                .iter()
                .map(|&t| {
                    let mom = self.spectral.moments_at(t);
                    [0, 1, 2].map(|i| red_sideband_brightness(&mom.marginals[i], cfg))
                })
                .collect()
        });
        Trajectory {
            times_us: self.times.iter().map(|t| t * 1e6).collect(),
            nbar,
            p_up,
        }
    }

    pub fn steady_state(&self, rule: SteadyStateRule) -> Result<[f64; 3]> {
        match rule {
            SteadyStateRule::Dephasing => Ok(self.long_time_means()),
            SteadyStateRule::Window { start_us } => {
                let picked: Vec<f64> = self
                    .times
                    .iter()
                    .copied()
                    .filter(|t| *t * 1e6 > start_us)
                    .collect();
                if picked.is_empty() {
                    return Err(Error::Validation(format!(
                        "no grid points after {start_us} us for the averaging window"
                    )));
                }
                let traj = self.spectral.trajectory(&picked);
                let n = traj.len() as f64;
                let mut acc = [0.0; 3];
                for m in &traj {
                    for i in 0..3 {
                        acc[i] += m[i];
                    }
                }
                Ok(acc.map(|v| v / n))
            }
        }
    }

    /// Grid scan for the cold-mode minimum, refined by golden-section search
    /// to [`TAU_TOLERANCE`].
    pub fn single_shot(&self) -> SingleShot {
        let cold: Vec<f64> = self
            .spectral
            .trajectory(&self.times)
            .iter()
            .map(|m| m[2])
            .collect();
        let i = cold
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let lo = self.times[i.saturating_sub(1)];
        let hi = self.times[(i + 1).min(self.times.len() - 1)];
        let f = |t: f64| self.spectral.means_at(t)[2];
        let (mut t_best, mut v_best) = (self.times[i], cold[i]);
        if hi > lo {
            let (t, v) = golden_section(&f, lo, hi, TAU_TOLERANCE);
            if v < v_best {
                t_best = t;
                v_best = v;
            }
        }
        SingleShot {
            tau_star_us: t_best * 1e6,
            nbar_c_in: self.initial_means()[2],
            nbar_c_min: v_best,
            nbar_c_long_time: self.long_time_means()[2],
            means_at_tau: self.spectral.means_at(t_best),
        }
    }

    /// Cold-mode trajectory under the dephasing-only model.
    pub fn incoherent_cold(&self, xi_in: f64) -> Vec<f64> {
        self.times
            .iter()
            .map(|&t| self.spectral.incoherent_means_at(xi_in, t)[2])
            .collect()
    }
}

/// Minimise a unimodal `f` on `[a, b]`; returns `(argmin, min)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, f(t))
}

/// Trajectory dataset for a scenario.
pub fn run_scenario(scenario: &Scenario) -> Result<(Trajectory, Metadata)> {
    let sim = Simulation::new(scenario)?;
    Ok((sim.trajectory(), sim.metadata()))
}

pub fn steady_state(scenario: &Scenario, rule: SteadyStateRule) -> Result<[f64; 3]> {
    Simulation::new(scenario)?.steady_state(rule)
}

fn shift_prep(prep: &ModePrep, delta: f64) -> Result<ModePrep> {
    let shifted = match prep.clone() {
        ModePrep::Thermal { nbar } => ModePrep::Thermal { nbar: nbar + delta },
        ModePrep::Coherent { alpha_sq } => ModePrep::Coherent {
            alpha_sq: alpha_sq + delta,
        },
        ModePrep::SqueezedThermal { nbar, r, theta } => ModePrep::SqueezedThermal {
            nbar: nbar + delta,
            r,
            theta,
        },
        ModePrep::Fock { .. } => {
            return Err(Error::Validation(
                "cannot shift the occupation of a Fock preparation".into(),
            ))
        }
    };
    shifted.validate()?;
    Ok(shifted)
}

/// Mean occupation of `mode` inferred from measured brightness values on the
/// scenario grid, linearised around the simulated trajectory.
pub fn linearized_estimates(
    scenario: &Scenario,
    p_up_exp: &[f64],
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    let sideband = scenario
        .sideband
        .ok_or_else(|| Error::Validation("the scenario has no sideband configuration".into()))?;
    let k = cfg.mode.index();
    let variant = |delta: f64| -> Result<Trajectory> {
        let mut preps = scenario.preps.as_array();
        if delta != 0.0 {
            preps[k] = shift_prep(&preps[k], delta)?;
        }
        let [hot, work, cold] = preps;
        let s = scenario.with_preps(Preps { hot, work, cold });
        Ok(Simulation::new(&Scenario {
            sideband: Some(sideband),
            ..s
        })?
        .trajectory())
    };
    let nominal = variant(0.0)?;
    let plus = variant(cfg.delta)?;
    let minus = variant(-cfg.delta)?;
    if p_up_exp.len() != nominal.times_us.len() {
        return Err(Error::Validation(format!(
            "{} brightness values for a grid of {} points",
            p_up_exp.len(),
            nominal.times_us.len()
        )));
    }
    let p = |t: &Trajectory, i: usize| t.p_up.as_ref().expect("sideband set")[i][k];
    (0..p_up_exp.len())
        .map(|i| {
            let sim = SimulatedReadout {
                p_up_th: p(&nominal, i),
                nbar_th: nominal.nbar[i][k],
                p_up_plus: p(&plus, i),
                nbar_plus: plus.nbar[i][k],
                p_up_minus: p(&minus, i),
                nbar_minus: minus.nbar[i][k],
            };
            estimate_nbar(p_up_exp[i], &sim, cfg)
        })
        .collect()
}

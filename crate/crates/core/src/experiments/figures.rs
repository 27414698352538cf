//! Sweep datasets: hot-mode equilibrium maps, cold-mode cooling traces and
//! the single-shot study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::format::{Cell, Table};
use super::run::{Simulation, SteadyStateRule};
use super::scenario::{Preps, Scenario, SweepRow};
use crate::benchmarks::{
    classical_final_state, equilibrium_cold_occupation, extract_equilibrium_nc, OccupationTriple,
};
use crate::dynamics::IncoherentConfig;
use crate::states::ModePrep;
use crate::trap::{cooling_power_per_mass, mode_frequencies};
use crate::{Error, Result};

fn require(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Validation(format!("{what} sweep is empty")));
    }
    Ok(())
}

fn table_with_meta(columns: &[&str], base: &Simulation) -> Table {
    let mut t = Table::new(columns);
    t.meta = base.metadata();
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Cell {
    pub nbar_w_in: f64,
    pub nbar_c_in: f64,
    pub nbar_h_in: f64,
    pub nbar_h_ss: f64,
    /// `n̄_h^in - n̄_h^ss`
    pub eps_h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Equilibrium {
    pub nbar_w_in: f64,
    /// `None` for a single-cell sweep.
    pub nbar_c_eq: Option<f64>,
    pub crossing: bool,
    /// Cold occupation in classical equilibrium with `(n̄_h^in, n̄_w^in)`,
    /// `None` when no positive solution exists.
    pub classical_nbar_c_eq: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Dataset {
    pub cells: Vec<Fig2Cell>,
    pub equilibria: Vec<Fig2Equilibrium>,
    pub cells_table: Table,
    pub equilibria_table: Table,
}

/// Hot-mode change `ε_h` over a grid of initial work and cold occupations.
/// Work and cold modes are thermal; the hot mode keeps the base preparation.
pub fn fig2_dataset(
    base: &Scenario,
    nbar_c_in: &[f64],
    nbar_w_in: &[f64],
    rule: SteadyStateRule,
) -> Result<Fig2Dataset> {
    require(nbar_c_in, "cold-mode")?;
    require(nbar_w_in, "work-mode")?;
    let jobs: Vec<(f64, f64)> = nbar_w_in
        .iter()
        .flat_map(|w| nbar_c_in.iter().map(move |c| (*w, *c)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(w, c)| {
            let preps = Preps {
                hot: base.preps.hot.clone(),
                work: ModePrep::thermal(w),
                cold: ModePrep::thermal(c),
            };
            let sim = Simulation::new(&base.with_preps(preps))?;
            let init = sim.initial_means();
            let ss = sim.steady_state(rule)?;
            Ok(Fig2Cell {
                nbar_w_in: w,
                nbar_c_in: c,
                nbar_h_in: init[0],
                nbar_h_ss: ss[0],
                eps_h: init[0] - ss[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut equilibria = Vec::new();
    for (i, &w) in nbar_w_in.iter().enumerate() {
        let row = &cells[i * nbar_c_in.len()..(i + 1) * nbar_c_in.len()];
        let points: Vec<(f64, f64)> = row.iter().map(|c| (c.nbar_c_in, c.eps_h)).collect();
        let (nbar_c_eq, crossing) = match extract_equilibrium_nc(&points) {
            Ok(e) => (Some(e.nbar_c), e.crossing),
            Err(_) => (None, row.iter().any(|c| c.eps_h == 0.0)),
        };
        equilibria.push(Fig2Equilibrium {
            nbar_w_in: w,
            nbar_c_eq,
            crossing,
            classical_nbar_c_eq: equilibrium_cold_occupation(base.preps.hot.mean(), w).ok(),
        });
    }

    let meta_sim = Simulation::new(base)?;
    let mut cells_table = table_with_meta(
        &["nbar_w_in", "nbar_c_in", "nbar_h_in", "nbar_h_ss", "eps_h"],
        &meta_sim,
    );
    cells_table.meta.push("steady_state_rule", rule);
    for c in &cells {
        cells_table.push(vec![
            c.nbar_w_in.into(),
            c.nbar_c_in.into(),
            c.nbar_h_in.into(),
            c.nbar_h_ss.into(),
            c.eps_h.into(),
        ]);
    }
    let mut equilibria_table = table_with_meta(
        &["nbar_w_in", "nbar_c_eq", "crossing", "classical_nbar_c_eq"],
        &meta_sim,
    );
    equilibria_table.meta.push("steady_state_rule", rule);
    let opt = |v: Option<f64>| v.map(Cell::Num).unwrap_or(Cell::Text("nan".into()));
    for e in &equilibria {
        equilibria_table.push(vec![
            e.nbar_w_in.into(),
            opt(e.nbar_c_eq),
            e.crossing.into(),
            opt(e.classical_nbar_c_eq),
        ]);
    }
    Ok(Fig2Dataset {
        cells,
        equilibria,
        cells_table,
        equilibria_table,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub label: String,
    /// Initial mean occupations (hot, work, cold) of the retained state.
    pub nbar_in: [f64; 3],
    pub nbar_c_ss: f64,
    /// `n̄_c^in - n̄_c^ss`; positive means the cold mode was cooled.
    pub nett_cooling: f64,
    pub measured_nbar_c_ss: Option<f64>,
    /// `n̄_c(τ) - n̄_c^ss` on the grid.
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig3Dataset {
    pub times_us: Vec<f64>,
    pub rows: Vec<Fig3Row>,
    pub summary_table: Table,
    pub traces_table: Table,
}

/// Cold-mode traces relative to the steady state for each row, using the
/// base scenario's coupling, grid and truncation.
pub fn fig3_dataset(base: &Scenario, rows: &[SweepRow], rule: SteadyStateRule) -> Result<Fig3Dataset> {
    if rows.is_empty() {
        return Err(Error::Validation("no rows to simulate".into()));
    }
    let out = rows
        .par_iter()
        .map(|row| {
            let sim = Simulation::new(&base.with_preps(row.preps.clone()))?;
            let traj = sim.trajectory();
            let ss = sim.steady_state(rule)?[2];
            let init = traj.nbar[0];
            let nbar_in = if sim.times[0] == 0.0 {
                init
            } else {
                sim.initial_means()
            };
            Ok(Fig3Row {
                label: row.label.clone(),
                nbar_in,
                nbar_c_ss: ss,
                nett_cooling: nbar_in[2] - ss,
                measured_nbar_c_ss: row.measured_nbar_c_ss,
                trace: traj.cold().iter().map(|c| c - ss).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let times_us = base.time_grid.times_us()?;

    let meta_sim = Simulation::new(base)?;
    let mut summary_table = table_with_meta(
        &[
            "label",
            "nbar_h_in",
            "nbar_w_in",
            "nbar_c_in",
            "nbar_c_ss",
            "nett_cooling",
            "measured_nbar_c_ss",
        ],
        &meta_sim,
    );
    summary_table.meta.push("steady_state_rule", rule);
    for r in &out {
        summary_table.push(vec![
            r.label.as_str().into(),
            r.nbar_in[0].into(),
            r.nbar_in[1].into(),
            r.nbar_in[2].into(),
            r.nbar_c_ss.into(),
            r.nett_cooling.into(),
            r.measured_nbar_c_ss
                .map(Cell::Num)
                .unwrap_or(Cell::Text("nan".into())),
        ]);
    }
    let mut cols = vec!["tau_us".to_string()];
    cols.extend(out.iter().map(|r| format!("dnbar_c_{}", r.label)));
    let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
    let mut traces_table = table_with_meta(&col_refs, &meta_sim);
    traces_table.meta.push("steady_state_rule", rule);
    for (i, t) in times_us.iter().enumerate() {
        let mut row = vec![Cell::Num(*t)];
        row.extend(out.iter().map(|r| Cell::Num(r.trace[i])));
        traces_table.push(row);
    }
    Ok(Fig3Dataset {
        times_us,
        rows: out,
        summary_table,
        traces_table,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig4Point {
    pub nbar_w_in: f64,
    pub tau_star_us: f64,
    /// `n̄_c^in - n̄_c(τ*)`
    pub single_shot_gain: f64,
    /// `n̄_c^in - n̄_c(ρ_∞)`
    pub long_time_gain: f64,
    /// `n̄_c^in - n̄_c` at the classical end point of the exchange.
    pub classical_gain: f64,
    /// `ħ ω_c Δn_c / (3 m τ*)` at the single-shot optimum, W/kg.
    pub cooling_power_w_per_kg: f64,
    /// Largest amount by which the dephasing-only model dips below the
    /// long-time average on the grid; present when requested.
    pub incoherent_undercut: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig4Dataset {
    pub points: Vec<Fig4Point>,
    pub table: Table,
}

impl Fig4Dataset {
    /// Point with the largest single-shot gain.
    pub fn best(&self) -> Option<&Fig4Point> {
        self.points
            .iter()
            .max_by(|a, b| a.single_shot_gain.total_cmp(&b.single_shot_gain))
    }
}

/// Single-shot optimum against the work-mode occupation. With
/// `incoherent = true` each point is also run under the dephasing-only
/// model at its default strength.
pub fn fig4_dataset(base: &Scenario, nbar_w_in: &[f64], incoherent: bool) -> Result<Fig4Dataset> {
    require(nbar_w_in, "work-mode")?;
    let trap = base.trap_config()?;
    let omega_c = mode_frequencies(&trap)?.omega_c;
    let points = nbar_w_in
        .par_iter()
        .map(|&w| {
            let preps = Preps {
                work: ModePrep::thermal(w),
                ..base.preps.clone()
            };
            let sim = Simulation::new(&base.with_preps(preps))?;
            let shot = sim.single_shot();
            let init = sim.initial_means();
            let classical = classical_final_state(&OccupationTriple::from(init))?;
            let power = cooling_power_per_mass(shot.gain(), shot.tau_star_us * 1e-6, omega_c, trap.ion_mass)?;
            let incoherent_undercut = if incoherent {
                let xi_in = IncoherentConfig::default_strength(&sim.spectral.ensemble)?;
                let cold = sim.incoherent_cold(xi_in);
                Some(
                    cold.iter()
                        .map(|c| shot.nbar_c_long_time - c)
                        .fold(f64::NEG_INFINITY, f64::max),
                )
            } else {
                None
            };
            Ok(Fig4Point {
                nbar_w_in: w,
                tau_star_us: shot.tau_star_us,
                single_shot_gain: shot.gain(),
                long_time_gain: shot.long_time_gain(),
                classical_gain: init[2] - classical.nbar_c,
                cooling_power_w_per_kg: power,
                incoherent_undercut,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let meta_sim = Simulation::new(base)?;
    let mut table = table_with_meta(
        &[
            "nbar_w_in",
            "tau_star_us",
            "single_shot_gain",
            "long_time_gain",
            "classical_gain",
            "cooling_power_w_per_kg",
            "incoherent_undercut",
        ],
        &meta_sim,
    );
    for p in &points {
        table.push(vec![
            p.nbar_w_in.into(),
            p.tau_star_us.into(),
            p.single_shot_gain.into(),
            p.long_time_gain.into(),
            p.classical_gain.into(),
            p.cooling_power_w_per_kg.into(),
            p.incoherent_undercut
                .map(Cell::Num)
                .unwrap_or(Cell::Text("nan".into())),
        ]);
    }
    Ok(Fig4Dataset { points, table })
}

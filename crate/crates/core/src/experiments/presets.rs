//! Built-in scenarios matching the published experimental runs.
//!
//! Occupations are the calibrated initial values of each run. Runs on the
//! higher trap frequencies use coupling 2π·2.64 kHz, runs on the lower ones
//! 2π·1.89 kHz; both are exchange rates.

use super::scenario::{Coupling, OutputKind, Preps, Scenario, Sweep, SweepRow, TimeGrid, TrapSpec};
use crate::states::ModePrep;
use crate::trap::{MEASURED_XI_A_KHZ, MEASURED_XI_B_KHZ};

fn row(label: &str, preps: Preps, measured: Option<f64>) -> SweepRow {
    SweepRow {
        label: label.into(),
        preps,
        measured_nbar_c_ss: measured,
    }
}

fn squeezed(nbar_h: f64, nbar_w: f64, r: f64, nbar_c: f64) -> Preps {
    Preps {
        hot: ModePrep::thermal(nbar_h),
        work: ModePrep::squeezed_thermal(nbar_w, r),
        cold: ModePrep::thermal(nbar_c),
    }
}

/// Thermal cooling runs on the higher trap: (label, n̄_h, n̄_w, n̄_c, measured n̄_c^ss).
pub const FIG3_THERMAL: [(&str, f64, f64, f64, f64); 6] = [
    ("a", 0.66, 4.44, 2.63, 2.11),
    ("b", 0.66, 2.16, 2.63, 2.58),
    ("c", 0.66, 1.10, 2.63, 2.53),
    ("d", 0.66, 0.67, 2.63, 2.61),
    ("e", 0.66, 0.37, 2.63, 2.70),
    ("f", 0.66, 0.19, 2.63, 2.92),
];

/// Squeezed-work runs on the lower trap: (label, n̄_h, n̄_w, r, n̄_c, measured n̄_c^ss).
pub const FIG3_SQUEEZED: [(&str, f64, f64, f64, f64, f64); 4] = [
    ("h", 0.47, 0.50, 1.34, 2.60, 2.26),
    ("i", 0.52, 0.50, 1.15, 2.72, 2.46),
    ("j", 0.52, 0.50, 0.77, 2.81, 2.76),
    ("k", 0.46, 0.50, 0.0, 3.01, 3.26),
];

/// Cold-mode initial occupations of the equilibrium sweeps.
pub const FIG2_NBAR_C: [f64; 6] = [0.48, 0.91, 1.40, 1.81, 2.36, 2.76];
/// Work-mode initial occupations of the equilibrium sweeps.
pub const FIG2_NBAR_W: [f64; 3] = [4.44, 2.47, 1.10];

/// Work-mode sweep for the single-shot study. The lowest value sits just
/// above the classical cooling threshold for the hot and cold modes.
pub const FIG4_NBAR_W: [f64; 5] = [1.3, 2.16, 3.0, 4.44, 6.0];

/// Thermal (0.66, 4.44, 2.63) on the higher trap, 0 to 400 μs in 5 μs steps.
pub fn fig3a() -> Scenario {
    let mut s = Scenario::new(
        "fig3a",
        Coupling::measured(MEASURED_XI_A_KHZ),
        Preps::thermal(0.66, 4.44, 2.63),
        TimeGrid::uniform(0.0, 400.0, 81),
    );
    s.trap = Some(TrapSpec::Named("a".into()));
    s.outputs = vec![
        OutputKind::Trajectory,
        OutputKind::SteadyState,
        OutputKind::SingleShot,
    ];
    s
}

/// All six thermal cooling runs as sweep rows on the [`fig3a`] base.
pub fn fig3_thermal() -> Scenario {
    let mut s = fig3a();
    s.name = "fig3-thermal".into();
    s.sweep.rows = FIG3_THERMAL
        .iter()
        .map(|(l, h, w, c, m)| row(l, Preps::thermal(*h, *w, *c), Some(*m)))
        .collect();
    s
}

/// Squeezed-work runs on the lower trap, 0 to 1200 μs in 10 μs steps.
pub fn fig3_squeezed() -> Scenario {
    let (_, h, w, r, c, _) = FIG3_SQUEEZED[0];
    let mut s = Scenario::new(
        "fig3-squeezed",
        Coupling::measured(MEASURED_XI_B_KHZ),
        squeezed(h, w, r, c),
        TimeGrid::uniform(0.0, 1200.0, 121),
    );
    s.trap = Some(TrapSpec::Named("b".into()));
    s.sweep.rows = FIG3_SQUEEZED
        .iter()
        .map(|(l, h, w, r, c, m)| row(l, squeezed(*h, *w, *r, *c), Some(*m)))
        .collect();
    s
}

/// Steady-state comparison rows: three thermal and two squeezed runs.
pub fn steady_state_rows() -> Vec<SweepRow> {
    let thermal = fig3_thermal().sweep.rows;
    let squeezed = fig3_squeezed().sweep.rows;
    vec![
        thermal[0].clone(),
        thermal[2].clone(),
        thermal[3].clone(),
        squeezed[0].clone(),
        squeezed[3].clone(),
    ]
}

/// Hot-mode equilibrium sweeps on the higher trap.
pub fn fig2() -> Scenario {
    let mut s = fig3a();
    s.name = "fig2".into();
    s.sweep = Sweep {
        nbar_w: FIG2_NBAR_W.to_vec(),
        nbar_c: FIG2_NBAR_C.to_vec(),
        rows: Vec::new(),
    };
    s
}

/// Single-shot sweep on the lower trap with (n̄_h, n̄_c) = (0.66, 2.63),
/// 0 to 300 μs in 2.5 μs steps.
pub fn fig4() -> Scenario {
    let mut s = Scenario::new(
        "fig4",
        Coupling::measured(MEASURED_XI_B_KHZ),
        Preps::thermal(0.66, 4.44, 2.63),
        TimeGrid::uniform(0.0, 300.0, 121),
    );
    s.trap = Some(TrapSpec::Named("b".into()));
    s.sweep.nbar_w = FIG4_NBAR_W.to_vec();
    s
}

/// Preset by name, as accepted on the command line.
pub fn by_name(name: &str) -> Option<Scenario> {
    Some(match name {
        "fig2" => fig2(),
        "fig3a" => fig3a(),
        "fig3-thermal" => fig3_thermal(),
        "fig3-squeezed" => fig3_squeezed(),
        "fig4" => fig4(),
        _ => return None,
    })
}

pub const PRESET_NAMES: [&str; 5] = ["fig2", "fig3a", "fig3-thermal", "fig3-squeezed", "fig4"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let s = by_name(name).unwrap();
            s.validate().unwrap();
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
        assert!(by_name("fig9").is_none());
    }
}

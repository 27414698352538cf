//! Simulated steady-state cold-mode occupations against the measured values
//! for the ten cooling runs, with both steady-state rules.

use ionfridge::experiments::{presets, Simulation, SteadyStateRule, WINDOW_SQUEEZED_US, WINDOW_THERMAL_US};

fn main() -> ionfridge::Result<()> {
    println!("row  n_c(in)  exact   window  measured");
    for (base, window) in [
        (presets::fig3_thermal(), WINDOW_THERMAL_US),
        (presets::fig3_squeezed(), WINDOW_SQUEEZED_US),
    ] {
        for row in &base.sweep.rows {
            let sim = Simulation::new(&base.with_preps(row.preps.clone()))?;
            let exact = sim.steady_state(SteadyStateRule::Dephasing)?[2];
            let win = sim.steady_state(SteadyStateRule::Window { start_us: window })?[2];
            println!(
                "{:<4} {:7.3}  {:6.3}  {:6.3}  {:6.2}",
                row.label,
                sim.initial_means()[2],
                exact,
                win,
                row.measured_nbar_c_ss.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

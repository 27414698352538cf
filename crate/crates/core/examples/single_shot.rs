//! Switching the interaction off at the right moment.
//!
//! For each work-mode occupation, finds the time of the deepest cold-mode
//! minimum and compares it with the long-time average and the classical
//! end point, then reports the cooling power of the best point.

use ionfridge::experiments::{fig4_dataset, presets, Simulation};

fn main() -> ionfridge::Result<()> {
    let sim = Simulation::new(&presets::fig3a())?;
    let shot = sim.single_shot();
    println!(
        "(0.66, 4.44, 2.63): tau* = {:.1} us, n_c {:.3} -> {:.3}, long-time {:.3}",
        shot.tau_star_us, shot.nbar_c_in, shot.nbar_c_min, shot.nbar_c_long_time
    );

    let base = presets::fig4();
    let data = fig4_dataset(&base, &base.sweep.nbar_w, true)?;
    println!(" n_w   tau*(us)  single   long    classical  W/kg   dephasing-only undercut");
    for p in &data.points {
        println!(
            "{:5.2}  {:7.2}  {:6.3}  {:6.3}  {:6.3}  {:6.2}   {:+.2e}",
            p.nbar_w_in,
            p.tau_star_us,
            p.single_shot_gain,
            p.long_time_gain,
            p.classical_gain,
            p.cooling_power_w_per_kg,
            p.incoherent_undercut.unwrap_or(f64::NAN)
        );
    }
    if let Some(best) = data.best() {
        println!(
            "best point: n_w = {}, {:.2} W/kg",
            best.nbar_w_in, best.cooling_power_w_per_kg
        );
    }
    Ok(())
}

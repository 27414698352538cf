//! Squeezing the work mode as a resource.
//!
//! Nett cooling of the cold mode for increasing squeezing at fixed thermal
//! occupation, and a thermal work mode with the same mean energy as the
//! strongest squeezing for comparison.

use ionfridge::experiments::{presets, Preps, Simulation, SteadyStateRule};
use ionfridge::states::{squeezed_thermal_mean, ModePrep};

fn main() -> ionfridge::Result<()> {
    let base = presets::fig3_squeezed();
    let (nbar_h, nbar_w, nbar_c) = (0.47, 0.50, 2.60);
    let nett = |work: ModePrep| -> ionfridge::Result<(f64, f64)> {
        let preps = Preps {
            hot: ModePrep::thermal(nbar_h),
            work,
            cold: ModePrep::thermal(nbar_c),
        };
        let sim = Simulation::new(&base.with_preps(preps))?;
        let init = sim.initial_means();
        Ok((
            init[1],
            init[2] - sim.steady_state(SteadyStateRule::Dephasing)?[2],
        ))
    };
    for r in [0.0, 0.77, 1.15, 1.34] {
        let (mean_w, gain) = nett(ModePrep::squeezed_thermal(nbar_w, r))?;
        println!("r = {r:4.2}  <n_w> = {mean_w:5.2}  nett cooling = {gain:+.3}");
    }
    let equal = squeezed_thermal_mean(nbar_w, 1.34);
    let (_, gain) = nett(ModePrep::thermal(equal))?;
    println!("thermal work mode with n_w = {equal:.2}: nett cooling = {gain:+.3}");
    Ok(())
}

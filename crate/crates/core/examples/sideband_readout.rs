//! Red-sideband readout of a simulated trajectory and the linearised
//! phonon-number estimate.

use ionfridge::experiments::{linearized_estimates, presets, Simulation};
use ionfridge::measurement::{EstimatorConfig, SidebandConfig};

fn main() -> ionfridge::Result<()> {
    let mut s = presets::fig3a();
    s.sideband = Some(SidebandConfig::default());
    let traj = Simulation::new(&s)?.trajectory();
    let p_up = traj.p_up.as_ref().expect("sideband configured");
    // Pretend the measured brightness sits 0.01 above the simulation.
    let measured: Vec<f64> = p_up.iter().map(|p| p[2] + 0.01).collect();
    let est = linearized_estimates(&s, &measured, &EstimatorConfig::default())?;
    for i in (0..traj.times_us.len()).step_by(10) {
        println!(
            "t = {:5.0} us  p_up(c) = {:.4}  n_c(sim) = {:.3}  n_c(est) = {:.3}",
            traj.times_us[i], p_up[i][2], traj.nbar[i][2], est[i]
        );
    }
    Ok(())
}

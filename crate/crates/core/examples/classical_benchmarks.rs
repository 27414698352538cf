//! Classical thermodynamics of the three-mode refrigerator: equilibrium,
//! cooling threshold, entropy flow and the end point of the exchange.

use ionfridge::benchmarks::{
    classical_final_state, cooling_condition, entropy_flow, equilibrium_cold_occupation, OccupationTriple,
};
use ionfridge::trap::{mode_frequencies, TrapConfig};

fn main() -> ionfridge::Result<()> {
    let modes = mode_frequencies(&TrapConfig::config_a())?;
    for nbar_w in [0.19, 0.67, 1.10, 2.16, 4.44] {
        let occ = OccupationTriple::new(0.66, nbar_w, 2.63);
        let (cools, threshold) = cooling_condition(&occ)?;
        let fin = classical_final_state(&occ)?;
        let eq = equilibrium_cold_occupation(0.66, nbar_w).map_or("none".into(), |v| format!("{v:.3}"));
        let ds = entropy_flow(&occ, [1.0, -1.0, -1.0], &modes)?;
        println!(
            "n_w = {nbar_w:4.2}: cools {cools:<5} (threshold {threshold:.3})  equilibrium n_c {eq:<5}  \
             end point n_c {:.3}  dS/dt per phonon {ds:+.2e} J/K",
            fin.nbar_c
        );
    }
    Ok(())
}

//! Where the hot mode stops changing.
//!
//! Sweeps the initial cold occupation for three work-mode occupations and
//! locates the zero of the hot-mode change, next to the classical
//! equilibrium.

use ionfridge::experiments::{fig2_dataset, presets, SteadyStateRule};

fn main() -> ionfridge::Result<()> {
    let base = presets::fig2();
    let data = fig2_dataset(
        &base,
        &base.sweep.nbar_c,
        &base.sweep.nbar_w,
        SteadyStateRule::Dephasing,
    )?;
    for cell in &data.cells {
        println!(
            "n_w = {:4.2}  n_c = {:4.2}  n_h: {:.3} -> {:.3}  eps_h = {:+.3}",
            cell.nbar_w_in, cell.nbar_c_in, cell.nbar_h_in, cell.nbar_h_ss, cell.eps_h
        );
    }
    for e in &data.equilibria {
        println!(
            "n_w = {:4.2}: zero at n_c = {}{}, classical {}",
            e.nbar_w_in,
            e.nbar_c_eq.map_or("-".into(), |v| format!("{v:.3}")),
            if e.crossing { "" } else { " (extrapolated)" },
            e.classical_nbar_c_eq.map_or("-".into(), |v| format!("{v:.3}"))
        );
    }
    Ok(())
}

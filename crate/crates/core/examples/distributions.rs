//! Phonon-number distributions of the prepared states and the preparation
//! calibration model.

use ionfridge::states::{
    coherent_distribution, random_walk_nbar, squeezed_thermal_distribution, squeezed_thermal_mean,
    squeezed_vacuum_distribution, thermal_distribution, PreparationModel,
};

fn show(label: &str, p: &[f64]) {
    let head: Vec<String> = p.iter().take(8).map(|v| format!("{v:.4}")).collect();
    println!("{label:<28} {}", head.join(" "));
}

fn main() -> ionfridge::Result<()> {
    show("thermal n = 1.82", &thermal_distribution(1.82, 200)?.p);
    show("coherent |alpha|^2 = 2", &coherent_distribution(2.0, 200)?.p);
    show(
        "squeezed vacuum r = 1.09",
        &squeezed_vacuum_distribution(1.09, 200)?.p,
    );
    for (n, r) in [(0.5, 0.77), (0.5, 1.34)] {
        let d = squeezed_thermal_distribution(n, r, 300)?;
        show(&format!("squeezed thermal {n}, r = {r}"), &d.p);
        println!(
            "{:<28} mean {:.4} (closed form {:.4})",
            "",
            d.mean,
            squeezed_thermal_mean(n, r)
        );
    }
    let model = PreparationModel {
        nbar0: 0.05,
        mbar: PreparationModel::mbar_from_beta(1.1e-4),
        steps: 4,
        beta: 1.1e-4,
        rho_rate: 0.0224,
    };
    println!(
        "random walk: {} steps of {:.2} phonons -> n = {:.2}; 60 us of squeezing -> r = {:.2}",
        model.steps,
        model.mbar,
        random_walk_nbar(&model),
        model.squeezing_after(60.0)
    );
    Ok(())
}

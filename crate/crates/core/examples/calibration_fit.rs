//! Phonon-distribution fits to blue-sideband flopping.
//!
//! Synthesises noisy flopping curves from known states, fits every model and
//! prints the recovered parameters. Also fits the three preparation
//! calibration curves.

use ionfridge::measurement::{
    fit_distribution, fit_preparation_curves, synthetic_flopping, DistributionModel, FitOptions,
    FlopAmplitudes, PreparationData,
};
use ionfridge::states::{squeezed_thermal_distribution, squeezed_vacuum_distribution, thermal_distribution};

fn main() -> ionfridge::Result<()> {
    let opts = FitOptions::default();
    let times: Vec<f64> = (0..=200).map(|i| i as f64 * 1e-6).collect();
    let amps = FlopAmplitudes::default();

    let truth = [
        (
            "thermal n = 1.82",
            thermal_distribution(1.82, 200)?,
            DistributionModel::Thermal,
        ),
        (
            "squeezed vacuum r = 1.09",
            squeezed_vacuum_distribution(1.09, 200)?,
            DistributionModel::SqueezedVacuum,
        ),
        (
            "squeezed thermal n = 0.77, r = 1.2",
            squeezed_thermal_distribution(0.77, 1.2, 200)?,
            DistributionModel::SqueezedThermal,
        ),
    ];
    for (label, dist, model) in &truth {
        let data = synthetic_flopping(&dist.p, &opts.sideband, &amps, &times, 0.02, 1)?;
        println!("{label}:");
        for m in [*model, DistributionModel::Free] {
            let fit = fit_distribution(&data, m, &opts)?;
            let params: Vec<String> = fit
                .params
                .iter()
                .filter(|p| !p.name.starts_with('z'))
                .map(|p| format!("{} = {:.3}({:.0})", p.name, p.value, 1e3 * p.error))
                .collect();
            println!(
                "  {:<17} chi2/dof {:.2}  {}",
                m.name(),
                fit.reduced_chi2,
                params.join("  ")
            );
            if m == DistributionModel::Free {
                let show: Vec<String> = (0..7)
                    .map(|n| format!("{:.3}/{:.3}", fit.populations[n], dist.get(n)))
                    .collect();
                println!("  p(n) fit/true for n = 0..6: {}", show.join(" "));
            }
        }
    }

    // Preparation: m = n0 + beta t^2, n = offset + slope steps, r = rho t.
    let data = PreparationData {
        heating: (0..8)
            .map(|i| {
                let t = 20.0 * i as f64;
                (t, 0.05 + 1.1e-4 * t * t + 0.01 * ((i % 3) as f64 - 1.0))
            })
            .collect(),
        steps: (0..6).map(|s| (s as f64, 0.05 + 1.1 * s as f64)).collect(),
        squeezing: (1..7)
            .map(|i| (10.0 * i as f64, 0.0224 * 10.0 * i as f64))
            .collect(),
    };
    let prep = fit_preparation_curves(&data)?;
    println!(
        "preparation: n0 = {:.3}, beta = {:.2e}/us^2 (m per step {:.2}), rho = {:.4}/us",
        prep.n0.value, prep.beta.value, prep.model.mbar, prep.rho_rate.value
    );
    Ok(())
}

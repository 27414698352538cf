//! Normal-mode frequencies, ion spacing and the trilinear coupling rate for
//! the two built-in traps, compared with the measured exchange rates.

use ionfridge::trap::{
    compare_coupling, coupling_rate, equilibrium_spacing, mode_frequencies, mode_temperature, TrapConfig,
    MEASURED_XI_A_KHZ, MEASURED_XI_B_KHZ,
};
use ionfridge::{angular_to_khz, khz_to_angular};

fn main() -> ionfridge::Result<()> {
    let mut formula = Vec::new();
    for (name, trap, measured_khz) in [
        ("A", TrapConfig::config_a(), MEASURED_XI_A_KHZ),
        ("B", TrapConfig::config_b(), MEASURED_XI_B_KHZ),
    ] {
        let modes = mode_frequencies(&trap)?;
        let rate = coupling_rate(&trap)?;
        println!("trap {name}:");
        println!(
            "  modes (kHz): hot {:.2}  work {:.2}  cold {:.2}  (resonance residual {:.2e})",
            angular_to_khz(modes.omega_h),
            angular_to_khz(modes.omega_w),
            angular_to_khz(modes.omega_c),
            modes.resonance_residual
        );
        println!(
            "  spacing {:.3} um, coupling 2pi x {:.3} kHz",
            equilibrium_spacing(&trap)? * 1e6,
            angular_to_khz(rate.xi)
        );
        let cmp = compare_coupling(&trap, khz_to_angular(measured_khz))?;
        println!(
            "  measured 2pi x {measured_khz} kHz, formula/measured = {:.3}",
            cmp.ratio
        );
        if let Some(w) = cmp.warning {
            println!("  note: {w}");
        }
        let temps: Vec<String> = [
            (0.66, modes.omega_h),
            (4.44, modes.omega_w),
            (2.63, modes.omega_c),
        ]
        .iter()
        .map(|(n, w)| Ok(format!("{:.1} uK", mode_temperature(*n, *w)? * 1e6)))
        .collect::<ionfridge::Result<_>>()?;
        println!("  temperatures at (0.66, 4.44, 2.63): {}", temps.join(", "));
        formula.push(rate.xi);
    }
    println!(
        "formula ratio A/B = {:.3} (measured {:.3})",
        formula[0] / formula[1],
        MEASURED_XI_A_KHZ / MEASURED_XI_B_KHZ
    );
    Ok(())
}

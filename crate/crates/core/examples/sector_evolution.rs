//! Unitary evolution in conserved-number sectors.
//!
//! Starts with the single sector of |0,1,1⟩, where one phonon pair swaps
//! into the hot mode and back, then evolves a thermal product state that
//! spans about a thousand sectors.

use ionfridge::dynamics::{assemble_initial, SpectralEnsemble};
use ionfridge::fockspace::TruncationPolicy;
use ionfridge::khz_to_angular;
use ionfridge::states::ModePrep;

fn main() -> ionfridge::Result<()> {
    let xi = 0.5 * khz_to_angular(2.64);

    let fock = [
        ModePrep::Fock { n: 0 },
        ModePrep::Fock { n: 1 },
        ModePrep::Fock { n: 1 },
    ];
    let ens = SpectralEnsemble::new(assemble_initial(&fock, &TruncationPolicy::default(), xi, 0.0)?)?;
    println!("|0,1,1>: {} sector", ens.ensemble.sector_count());
    for t_us in [0.0, 25.0, 50.0, 94.7, 150.0] {
        let t = t_us * 1e-6;
        let n = ens.means_at(t);
        println!(
            "  t = {t_us:6.1} us  n_c = {:.6}  cos^2(xi t) = {:.6}",
            n[2],
            (xi * t).cos().powi(2)
        );
    }

    let thermal = [
        ModePrep::thermal(0.66),
        ModePrep::thermal(4.44),
        ModePrep::thermal(2.63),
    ];
    let ens = SpectralEnsemble::new(assemble_initial(
        &thermal,
        &TruncationPolicy::with_epsilon(1e-4),
        xi,
        0.0,
    )?)?;
    println!(
        "thermal (0.66, 4.44, 2.63): {} sectors, largest {} states, retained weight {:.6}",
        ens.ensemble.sector_count(),
        ens.ensemble.max_sector_dim(),
        ens.ensemble.retained_weight()
    );
    for t_us in (0..=8).map(|i| 50.0 * i as f64) {
        let n = ens.means_at(t_us * 1e-6);
        println!(
            "  t = {t_us:5.0} us  n = ({:.3}, {:.3}, {:.3})  n_h+n_w = {:.9}  n_h+n_c = {:.9}",
            n[0],
            n[1],
            n[2],
            n[0] + n[1],
            n[0] + n[2]
        );
    }
    let lt = ens.long_time_means();
    println!(
        "  long-time average n = ({:.3}, {:.3}, {:.3})",
        lt[0], lt[1], lt[2]
    );
    Ok(())
}

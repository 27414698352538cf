//! Sector method against dense evolution of the full capped Hilbert space.
//!
//! The dense reference keeps the squeezed-state coherences that the sector
//! method drops; the mean occupations still agree to rounding.

use ionfridge::dynamics::oracle_comparison;
use ionfridge::khz_to_angular;
use ionfridge::states::ModePrep;

fn main() -> ionfridge::Result<()> {
    let xi = 0.5 * khz_to_angular(2.64);
    let times: Vec<f64> = (0..10).map(|i| i as f64 * 400e-6 / 9.0).collect();
    let cases = [
        (
            "thermal",
            [
                ModePrep::thermal(0.3),
                ModePrep::thermal(0.5),
                ModePrep::thermal(0.4),
            ],
            [6; 3],
        ),
        (
            "squeezed work",
            [
                ModePrep::thermal(0.3),
                ModePrep::squeezed_thermal(0.3, 0.6),
                ModePrep::thermal(0.4),
            ],
            [8; 3],
        ),
    ];
    for (name, preps, caps) in cases {
        let start = std::time::Instant::now();
        let cmp = oracle_comparison(&preps, caps, xi, 0.0, &times)?;
        println!(
            "{name:<14} caps {caps:?}: max |diff| = {:.2e}  ({:.2?})",
            cmp.max_abs_diff,
            start.elapsed()
        );
    }
    Ok(())
}

//! Classical thermodynamic predictions for the three-mode refrigerator.
//!
//! Treating each mode as a Bose-Einstein occupied oscillator, entropy
//! balance for a process that moves phonons one-for-one between the modes
//! gives the equilibrium condition
//! `(1 + 1/n̄_h) = (1 + 1/n̄_w)(1 + 1/n̄_c)`, and the cold mode cools only if
//! `n̄_w > n̄_h (1 + n̄_c) / (n̄_c - n̄_h)`.

use serde::{Deserialize, Serialize};

use crate::trap::{mode_temperature, ModeFrequencies, CODATA_2014};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationTriple {
    pub nbar_h: f64,
    pub nbar_w: f64,
    pub nbar_c: f64,
}

impl OccupationTriple {
    pub fn new(nbar_h: f64, nbar_w: f64, nbar_c: f64) -> Self {
        OccupationTriple {
            nbar_h,
            nbar_w,
            nbar_c,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.nbar_h, self.nbar_w, self.nbar_c]
    }

    fn check_positive(&self) -> Result<()> {
        if self.as_array().iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "occupations must be positive, got {self:?}"
            )))
        }
    }
}

impl From<[f64; 3]> for OccupationTriple {
    fn from(v: [f64; 3]) -> Self {
        OccupationTriple::new(v[0], v[1], v[2])
    }
}

/// Changes `ε_i = n̄_i^in - n̄_i^final` and the classical verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingReport {
    pub eps_h: f64,
    pub eps_w: f64,
    pub eps_c: f64,
    /// Whether the cold mode lost phonons.
    pub cooled: bool,
    pub threshold_w: f64,
    pub predicted: bool,
}

impl CoolingReport {
    pub fn new(initial: &OccupationTriple, fin: &OccupationTriple) -> Result<Self> {
        let (predicted, threshold_w) = cooling_condition(initial)?;
        let eps_c = initial.nbar_c - fin.nbar_c;
        Ok(CoolingReport {
            eps_h: initial.nbar_h - fin.nbar_h,
            eps_w: initial.nbar_w - fin.nbar_w,
            eps_c,
            cooled: eps_c > 0.0,
            threshold_w,
            predicted,
        })
    }
}

/// Cold-mode occupation in classical equilibrium with the given hot and
/// work occupations.
pub fn equilibrium_cold_occupation(nbar_h: f64, nbar_w: f64) -> Result<f64> {
    if !(nbar_h > 0.0 && nbar_w > 0.0) {
        return Err(Error::Domain(format!(
            "occupations must be positive, got n_h = {nbar_h}, n_w = {nbar_w}"
        )));
    }
    let ratio = (1.0 + 1.0 / nbar_h) / (1.0 + 1.0 / nbar_w);
    if !(ratio > 1.0) {
        return Err(Error::NoSolution(format!(
            "no positive cold occupation balances n_h = {nbar_h} against n_w = {nbar_w}"
        )));
    }
    Ok(1.0 / (ratio - 1.0))
}

/// `(cooling predicted, work-mode threshold)`. The inequality is strict, and
/// the threshold is `+∞` when `n̄_c <= n̄_h`.
pub fn cooling_condition(occ: &OccupationTriple) -> Result<(bool, f64)> {
    occ.check_positive()?;
    let OccupationTriple {
        nbar_h,
        nbar_w,
        nbar_c,
    } = *occ;
    if nbar_c <= nbar_h {
        return Ok((false, f64::INFINITY));
    }
    let threshold = nbar_h * (1.0 + nbar_c) / (nbar_c - nbar_h);
    Ok((nbar_w > threshold, threshold))
}

/// Entropy production rate `Σ ħω_i ṅ_i / T_i` in W/K.
pub fn entropy_flow(occ: &OccupationTriple, rates: [f64; 3], modes: &ModeFrequencies) -> Result<f64> {
    let omegas = modes.as_array();
    let mut total = 0.0;
    for ((n, rate), omega) in occ.as_array().into_iter().zip(rates).zip(omegas) {
        let t = mode_temperature(n, omega)?;
        total += CODATA_2014.hbar * omega * rate / t;
    }
    Ok(total)
}

/// Classical end point of an exchange that moves `ε` phonons from the work
/// and cold modes into the hot mode until the equilibrium condition holds.
/// Returns the final occupations `(n̄_h + ε, n̄_w - ε, n̄_c - ε)`.
pub fn classical_final_state(initial: &OccupationTriple) -> Result<OccupationTriple> {
    initial.check_positive()?;
    let OccupationTriple {
        nbar_h,
        nbar_w,
        nbar_c,
    } = *initial;
    let g = |x: f64| (1.0 / x).ln_1p();
    // Strictly decreasing in ε, from +∞ at ε = -n̄_h to -∞ at ε = min(n̄_w, n̄_c).
    let f = |e: f64| g(nbar_h + e) - g(nbar_w - e) - g(nbar_c - e);
    let (mut lo, mut hi) = (-nbar_h, nbar_w.min(nbar_c));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let e = 0.5 * (lo + hi);
    Ok(OccupationTriple::new(nbar_h + e, nbar_w - e, nbar_c - e))
}

/// Zero crossing of `ε_h` against the initial cold occupation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumEstimate {
    pub nbar_c: f64,
    /// False when every `ε_h` has the same sign, so the value is an
    /// extrapolation rather than an interpolation.
    pub crossing: bool,
}

/// Linear interpolation through the two points with the smallest `|ε_h|`.
/// `points` are `(n̄_c^in, ε_h)`.
pub fn extract_equilibrium_nc(points: &[(f64, f64)]) -> Result<EquilibriumEstimate> {
    if points.len() < 2 {
        return Err(Error::Validation(
            "equilibrium extraction needs at least two points".into(),
        ));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].1.abs().total_cmp(&points[b].1.abs()).then(a.cmp(&b)));
    let (x1, y1) = points[order[0]];
    let (x2, y2) = points[order[1]];
    if y1 == y2 || x1 == x2 {
        return Err(Error::NoSolution(
            "the two nearest points do not define a line".into(),
        ));
    }
    let x = x1 - y1 * (x2 - x1) / (y2 - y1);
    let pos = points.iter().any(|p| p.1 > 0.0);
    let neg = points.iter().any(|p| p.1 < 0.0);
    let zero = points.iter().any(|p| p.1 == 0.0);
    Ok(EquilibriumEstimate {
        nbar_c: x,
        crossing: (pos && neg) || zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trap::{mode_frequencies, TrapConfig};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn equilibrium_examples() {
        let nc = equilibrium_cold_occupation(0.66, 4.44).unwrap();
        assert_abs_diff_eq!(nc, 0.950, epsilon = 5e-4);
        let nc = equilibrium_cold_occupation(0.66, 1e12).unwrap();
        assert_abs_diff_eq!(nc, 0.66, epsilon = 1e-9);
        assert!(matches!(
            equilibrium_cold_occupation(0.66, 0.5),
            Err(Error::NoSolution(_))
        ));
        assert!(equilibrium_cold_occupation(0.66, 0.66).is_err());
    }

    #[test]
    fn cooling_condition_examples() {
        let (ok, thr) = cooling_condition(&OccupationTriple::new(0.66, 4.44, 2.63)).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(thr, 1.216, epsilon = 1e-3);
        let (ok, thr) = cooling_condition(&OccupationTriple::new(0.66, 4.44, 0.5)).unwrap();
        assert!(!ok && thr.is_infinite());
        let exact = 0.66 * 3.63 / (2.63 - 0.66);
        let (ok, _) = cooling_condition(&OccupationTriple::new(0.66, exact, 2.63)).unwrap();
        assert!(!ok);
    }

    #[test]
    fn entropy_examples() {
        let modes = mode_frequencies(&TrapConfig::config_a()).unwrap();
        let nc = equilibrium_cold_occupation(0.66, 4.44).unwrap();
        let occ = OccupationTriple::new(0.66, 4.44, nc);
        let s = entropy_flow(&occ, [1.0, -1.0, -1.0], &modes).unwrap();
        let scale = CODATA_2014.k_b * (1.0f64 / 0.66).ln_1p();
        assert!(s.abs() < 1e-12 * scale);
        let s = entropy_flow(
            &OccupationTriple::new(0.66, 4.44, 2.63),
            [1.0, -1.0, -1.0],
            &modes,
        )
        .unwrap();
        assert!(s > 0.0);
        assert_eq!(entropy_flow(&occ, [0.0; 3], &modes).unwrap(), 0.0);
    }

    #[test]
    fn classical_end_point() {
        let nc = equilibrium_cold_occupation(0.66, 4.44).unwrap();
        let fin = classical_final_state(&OccupationTriple::new(0.66, 4.44, nc)).unwrap();
        assert_abs_diff_eq!(fin.nbar_c, nc, epsilon = 1e-12);
        let fin = classical_final_state(&OccupationTriple::new(0.66, 4.44, 2.63)).unwrap();
        assert!(fin.nbar_c < 2.63);
        let lhs = 1.0 + 1.0 / fin.nbar_h;
        let rhs = (1.0 + 1.0 / fin.nbar_w) * (1.0 + 1.0 / fin.nbar_c);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        assert_abs_diff_eq!(fin.nbar_h - 0.66, 2.63 - fin.nbar_c, epsilon = 1e-12);
    }

    #[test]
    fn extraction() {
        let e = extract_equilibrium_nc(&[(1.0, -0.1), (2.0, 0.1)]).unwrap();
        assert_abs_diff_eq!(e.nbar_c, 1.5, epsilon = 1e-15);
        assert!(e.crossing);
        let e = extract_equilibrium_nc(&[(0.5, 0.3), (1.0, 0.2), (3.0, 0.9)]).unwrap();
        assert!(!e.crossing);
        assert_abs_diff_eq!(e.nbar_c, 2.0, epsilon = 1e-12);
        assert!(extract_equilibrium_nc(&[(1.0, 0.1)]).is_err());
    }

    proptest! {
        #[test]
        fn equilibrium_inverse(nh in 0.05f64..5.0, extra in 0.01f64..50.0) {
            let nw = nh + extra;
            let nc = equilibrium_cold_occupation(nh, nw).unwrap();
            let lhs = 1.0 + 1.0 / nh;
            let rhs = (1.0 + 1.0 / nw) * (1.0 + 1.0 / nc);
            prop_assert!((lhs - rhs).abs() < 1e-12 * lhs);
        }

        #[test]
        fn threshold_monotone(nh in 0.05f64..2.0, nc in 0.1f64..6.0, d in 0.001f64..0.05) {
            prop_assume!(nc > nh + 2.0 * d);
            let thr = |h: f64, c: f64| cooling_condition(&OccupationTriple::new(h, 1.0, c)).unwrap().1;
            prop_assert!(thr(nh + d, nc) > thr(nh, nc));
            prop_assert!(thr(nh, nc + d) < thr(nh, nc));
        }
    }
}

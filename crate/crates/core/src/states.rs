//! Phonon-number distributions of the states used to fuel the refrigerator.
//!
//! Every generator returns a [`PhononDistribution`] renormalised over
//! `0..=cutoff`, with the mass that fell beyond the cutoff reported in
//! `tail_mass`. Populations of squeezed states do not depend on the
//! squeezing phase, so no generator takes one.

use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::{Error, Result};

/// Default highest phonon number kept when generating distributions.
pub const DEFAULT_CUTOFF: usize = 300;

/// Largest probability mass allowed beyond the cutoff before a generator
/// reports the cutoff as too small.
pub const MAX_TAIL_MASS: f64 = 1e-6;

/// Declarative initial state of one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModePrep {
    Thermal {
        nbar: f64,
    },
    Coherent {
        /// Mean phonon number `|α|²`.
        alpha_sq: f64,
    },
    SqueezedThermal {
        nbar: f64,
        r: f64,
        #[serde(default)]
        theta: f64,
    },
    Fock {
        n: usize,
    },
}

impl ModePrep {
    pub fn thermal(nbar: f64) -> Self {
        ModePrep::Thermal { nbar }
    }

    pub fn squeezed_thermal(nbar: f64, r: f64) -> Self {
        ModePrep::SqueezedThermal { nbar, r, theta: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::Validation(format!(
                "{what} must be finite and >= 0, got {v}"
            )))
        };
        match *self {
            ModePrep::Thermal { nbar } if !(nbar >= 0.0 && nbar.is_finite()) => bad("nbar", nbar),
            ModePrep::Coherent { alpha_sq } if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) => {
                bad("alpha_sq", alpha_sq)
            }
            ModePrep::SqueezedThermal { nbar, .. } if !(nbar >= 0.0 && nbar.is_finite()) => bad("nbar", nbar),
            ModePrep::SqueezedThermal { r, .. } if !(r >= 0.0 && r.is_finite()) => bad("r", r),
            _ => Ok(()),
        }
    }

    /// Closed-form mean phonon number of the prepared state.
    pub fn mean(&self) -> f64 {
        match *self {
            ModePrep::Thermal { nbar } => nbar,
            ModePrep::Coherent { alpha_sq } => alpha_sq,
            ModePrep::SqueezedThermal { nbar, r, .. } => squeezed_thermal_mean(nbar, r),
            ModePrep::Fock { n } => n as f64,
        }
    }
}

/// `n̄ cosh 2r + sinh² r`.
pub fn squeezed_thermal_mean(nbar: f64, r: f64) -> f64 {
    nbar * (2.0 * r).cosh() + r.sinh().powi(2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhononDistribution {
    /// `p[n]` for `n = 0..=cutoff`.
    pub p: Vec<f64>,
    pub cutoff: usize,
    pub mean: f64,
    /// Mass beyond the cutoff before renormalisation.
    pub tail_mass: f64,
}

impl PhononDistribution {
    /// Build from raw populations on `0..=p.len()-1`; renormalises and
    /// records the missing mass as tail.
    pub fn from_populations(mut p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Validation("empty phonon distribution".into()));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Numerical("negative or non-finite population".into()));
        }
        let total: f64 = p.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical("phonon distribution has no mass".into()));
        }
        p.iter_mut().for_each(|v| *v /= total);
        let mean = p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
        Ok(PhononDistribution {
            cutoff: p.len() - 1,
            p,
            mean,
            tail_mass: (1.0 - total).max(0.0),
        })
    }

    pub fn delta(n: usize) -> Self {
        let mut p = vec![0.0; n + 1];
        p[n] = 1.0;
        PhononDistribution {
            p,
            cutoff: n,
            mean: n as f64,
            tail_mass: 0.0,
        }
    }

    /// Cut to `0..=cap` and renormalise.
    pub fn truncated(&self, cap: usize) -> Result<Self> {
        let keep = (cap + 1).min(self.p.len());
        Self::from_populations(self.p[..keep].to_vec())
    }

    pub fn get(&self, n: usize) -> f64 {
        self.p.get(n).copied().unwrap_or(0.0)
    }

    /// Drop trailing entries below `floor`; keeps at least one entry.
    pub fn trimmed(&self, floor: f64) -> Self {
        let last = self.p.iter().rposition(|v| *v >= floor).unwrap_or(0);
        let mut out = self.clone();
        out.p.truncate(last + 1);
        out.cutoff = last;
        out
    }

    fn check_tail(self) -> Result<Self> {
        if self.tail_mass > MAX_TAIL_MASS {
            return Err(Error::Truncation(format!(
                "cutoff {} leaves tail mass {:.3e} > {:.1e}",
                self.cutoff, self.tail_mass, MAX_TAIL_MASS
            )));
        }
        Ok(self)
    }
}

/// `ln k!` for `k = 0..=n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// Bose-Einstein populations `n̄ⁿ / (n̄ + 1)^{n+1}`.
pub fn thermal_distribution(nbar: f64, cutoff: usize) -> Result<PhononDistribution> {
    check_param("nbar", nbar)?;
    if nbar == 0.0 {
        return Ok(PhononDistribution::delta(0).padded(cutoff));
    }
    let ratio = nbar / (nbar + 1.0);
    let mut p = Vec::with_capacity(cutoff + 1);
    let mut v = 1.0 / (nbar + 1.0);
    for _ in 0..=cutoff {
        p.push(v);
        v *= ratio;
    }
    PhononDistribution::from_populations(p)?.check_tail()
}

/// Poisson populations `m̄ⁿ e^{-m̄} / n!`.
pub fn coherent_distribution(mbar: f64, cutoff: usize) -> Result<PhononDistribution> {
    check_param("mbar", mbar)?;
    if mbar == 0.0 {
        return Ok(PhononDistribution::delta(0).padded(cutoff));
    }
    let lf = ln_factorials(cutoff);
    let ln_m = mbar.ln();
    let p = (0..=cutoff)
        .map(|n| (n as f64 * ln_m - mbar - lf[n]).exp())
        .collect();
    PhononDistribution::from_populations(p)?.check_tail()
}

/// Squeezed vacuum: `p(2n) = (2n)! sech r tanh^{2n} r / (2ⁿ n!)²`, odd
/// populations vanish.
pub fn squeezed_vacuum_distribution(r: f64, cutoff: usize) -> Result<PhononDistribution> {
    check_param("r", r)?;
    if r == 0.0 {
        return Ok(PhononDistribution::delta(0).padded(cutoff));
    }
    let lf = ln_factorials(cutoff);
    let ln_sech = -r.cosh().ln();
    let ln_tanh = r.tanh().ln();
    let p = (0..=cutoff)
        .map(|n| {
            if n % 2 == 1 {
                return 0.0;
            }
            let h = n / 2;
            (lf[n] + ln_sech + n as f64 * ln_tanh - 2.0 * (h as f64 * std::f64::consts::LN_2 + lf[h])).exp()
        })
        .collect();
    PhononDistribution::from_populations(p)?.check_tail()
}

impl PhononDistribution {
    fn padded(mut self, cutoff: usize) -> Self {
        if self.p.len() < cutoff + 1 {
            self.p.resize(cutoff + 1, 0.0);
            self.cutoff = cutoff;
        }
        self
    }
}

/// Shared per-`r` constants of the squeezed-number-state populations.
struct SqueezeTables {
    lf: Vec<f64>,
    /// `-1 / sinh² r` in double-double precision.
    z: TwoFloat,
    ln_cosh: f64,
    ln_half_tanh: f64,
}

impl SqueezeTables {
    fn new(r: f64, max_index: usize) -> Self {
        let rr = TwoFloat::from(r);
        let s = rr.sinh();
        SqueezeTables {
            lf: ln_factorials(max_index),
            z: -(TwoFloat::from(1.0) / (s * s)),
            ln_cosh: r.cosh().ln(),
            ln_half_tanh: (0.5 * r.tanh()).ln(),
        }
    }

    /// `|⟨n|S(r)|m⟩|²`.
    fn population(&self, n: usize, m: usize) -> f64 {
        if (n + m) % 2 == 1 {
            return 0.0;
        }
        let lf = &self.lf;
        let (a, b, c, ln_pref) = if n.is_multiple_of(2) {
            let (a, b) = (n / 2, m / 2);
            let ln_pref =
                lf[n] + lf[m] - 2.0 * (lf[a] + lf[b]) - self.ln_cosh + (m + n) as f64 * self.ln_half_tanh;
            (a, b, 0.5, ln_pref)
        } else {
            let (a, b) = ((n - 1) / 2, (m - 1) / 2);
            let ln_pref = lf[n] + lf[m] - 2.0 * (lf[a] + lf[b]) - 3.0 * self.ln_cosh
                + (m + n - 2) as f64 * self.ln_half_tanh;
            (a, b, 1.5, ln_pref)
        };
        let ln_abs_f = terminating_2f1_ln_abs(a, b, c, self.z);
        if ln_abs_f == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_pref + 2.0 * ln_abs_f).exp().min(1.0)
    }
}

/// `ln |₂F₁(-a, -b; c; z)|` for non-negative integers `a`, `b`.
///
/// The series terminates after `min(a, b)` terms. Terms alternate in sign
/// for negative `z`, so the partial sums are carried in double-double
/// precision, with power-of-two rescaling to stay clear of overflow.
fn terminating_2f1_ln_abs(a: usize, b: usize, c: f64, z: TwoFloat) -> f64 {
    const RESCALE_ABOVE: f64 = 1e150;
    const RESCALE_EXP: i32 = 500;
    let scale_down = TwoFloat::from(2f64.powi(-RESCALE_EXP));
    let mut term = TwoFloat::from(1.0);
    let mut sum = TwoFloat::from(1.0);
    let mut scale = 0i32;
    let (fa, fb) = (-(a as f64), -(b as f64));
    for k in 0..a.min(b) {
        let kf = k as f64;
        let num = TwoFloat::from(fa + kf) * TwoFloat::from(fb + kf);
        let den = TwoFloat::from(c + kf) * TwoFloat::from(kf + 1.0);
        term = term * num / den * z;
        sum += term;
        if term.hi().abs() > RESCALE_ABOVE || sum.hi().abs() > RESCALE_ABOVE {
            term *= scale_down;
            sum *= scale_down;
            scale += RESCALE_EXP;
        }
    }
    let s = sum.hi() + sum.lo();
    if s == 0.0 {
        return f64::NEG_INFINITY;
    }
    s.abs().ln() + scale as f64 * std::f64::consts::LN_2
}

/// Populations `D_n(m, r)` of the squeezed number state `S(r)|m⟩`.
pub fn squeezed_number_distribution(m: usize, r: f64, cutoff: usize) -> Result<PhononDistribution> {
    check_param("r", r)?;
    if r == 0.0 {
        return Ok(PhononDistribution::delta(m).padded(cutoff));
    }
    let tables = SqueezeTables::new(r, cutoff.max(m));
    let p = (0..=cutoff).map(|n| tables.population(n, m)).collect();
    PhononDistribution::from_populations(p)?.check_tail()
}

/// Thermal populations below this weight do not feed the squeezed sum.
const THERMAL_WEIGHT_FLOOR: f64 = 1e-20;

/// Squeezed thermal state `S(r) ρ_th S†(r)`:
/// `p(n) = Σ_m n̄ᵐ/(n̄+1)^{m+1} D_n(m, r)`.
pub fn squeezed_thermal_distribution(nbar: f64, r: f64, cutoff: usize) -> Result<PhononDistribution> {
    check_param("nbar", nbar)?;
    check_param("r", r)?;
    if r == 0.0 {
        return thermal_distribution(nbar, cutoff);
    }
    // Thermal weights, without renormalisation, out to the point where they
    // stop mattering.
    let ratio = nbar / (nbar + 1.0);
    let mut weights = Vec::new();
    let mut w = 1.0 / (nbar + 1.0);
    while weights.len() <= cutoff && w >= THERMAL_WEIGHT_FLOOR {
        weights.push(w);
        w *= ratio;
        if ratio == 0.0 {
            break;
        }
    }
    let tables = SqueezeTables::new(r, cutoff.max(weights.len()));
    let p = (0..=cutoff)
        .map(|n| {
            weights
                .iter()
                .enumerate()
                .skip(n % 2)
                .step_by(2)
                .map(|(m, wm)| wm * tables.population(n, m))
                .sum()
        })
        .collect();
    PhononDistribution::from_populations(p)?.check_tail()
}

/// State-preparation calibration: residual occupation after cooling, the
/// coherent-state occupation per 100 μs kick, and the squeezing rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparationModel {
    pub nbar0: f64,
    /// Phonons added per random-walk step.
    pub mbar: f64,
    pub steps: usize,
    /// Coherent-drive curvature, phonons/μs².
    pub beta: f64,
    /// Squeezing parameter gained per μs.
    pub rho_rate: f64,
}

/// Duration of one random-walk step in μs.
pub const STEP_DURATION_US: f64 = 100.0;

impl PreparationModel {
    pub fn mbar_from_beta(beta: f64) -> f64 {
        beta * STEP_DURATION_US * STEP_DURATION_US
    }

    pub fn squeezing_after(&self, t_us: f64) -> f64 {
        self.rho_rate * t_us
    }
}

/// Mean occupation after a random walk of `steps` kicks: `n̄₀ + N m̄`.
pub fn random_walk_nbar(model: &PreparationModel) -> f64 {
    model.nbar0 + model.steps as f64 * model.mbar
}

pub fn prep_to_distribution(prep: &ModePrep, cutoff: usize) -> Result<PhononDistribution> {
    prep.validate()?;
    match *prep {
        ModePrep::Thermal { nbar } => thermal_distribution(nbar, cutoff),
        ModePrep::Coherent { alpha_sq } => coherent_distribution(alpha_sq, cutoff),
        ModePrep::SqueezedThermal { nbar, r, .. } => squeezed_thermal_distribution(nbar, r, cutoff),
        ModePrep::Fock { n } => Ok(PhononDistribution::delta(n).padded(cutoff)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn thermal_values() {
        let d = thermal_distribution(1.0, 80).unwrap();
        assert_abs_diff_eq!(d.p[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(d.p[2], 0.125, epsilon = 1e-15);
        assert_eq!(thermal_distribution(0.0, 10).unwrap().p[0], 1.0);

        let d = thermal_distribution(4.44, 100).unwrap();
        assert_abs_diff_eq!(d.p[0], 1.0 / 5.44, epsilon = 1e-8);
        assert!((d.mean - 4.44).abs() < 1e-3);
    }

    #[test]
    fn thermal_cutoff_too_small() {
        assert!(matches!(
            thermal_distribution(4.44, 20),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn coherent_values() {
        assert_eq!(coherent_distribution(0.0, 10).unwrap().p[0], 1.0);
        let d = coherent_distribution(1.0, 40).unwrap();
        assert_abs_diff_eq!(d.p[0], (-1.0f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(d.p[1], (-1.0f64).exp(), epsilon = 1e-14);
        let d = coherent_distribution(0.153, 40).unwrap();
        assert_abs_diff_eq!(d.p[2], 0.01004, epsilon = 1e-5);
    }

    #[test]
    fn squeezed_vacuum_values() {
        assert_eq!(squeezed_vacuum_distribution(0.0, 10).unwrap().p[0], 1.0);
        let d = squeezed_vacuum_distribution(1.09, 300).unwrap();
        assert_abs_diff_eq!(d.p[0], 0.604, epsilon = 1e-3);
        assert_abs_diff_eq!(d.p[2], 0.192, epsilon = 1e-3);
        assert_eq!(d.p.iter().skip(1).step_by(2).sum::<f64>(), 0.0);
        let expected_mean = 1.09f64.sinh().powi(2);
        assert!((d.mean - expected_mean).abs() < 1e-9);
    }

    #[test]
    fn squeezed_number_zero_is_vacuum() {
        for r in [0.3, 1.09, 1.4] {
            let a = squeezed_number_distribution(0, r, 200).unwrap();
            let b = squeezed_vacuum_distribution(r, 200).unwrap();
            for (x, y) in a.p.iter().zip(&b.p) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn squeezed_number_parity() {
        let d = squeezed_number_distribution(4, 0.8, 200).unwrap();
        assert!(d.p.iter().skip(1).step_by(2).all(|v| *v == 0.0));
        let d = squeezed_number_distribution(3, 0.8, 200).unwrap();
        assert!(d.p.iter().step_by(2).all(|v| *v == 0.0));
        let d = squeezed_number_distribution(5, 0.0, 10).unwrap();
        assert_eq!(d.p[5], 1.0);
    }

    #[test]
    fn squeezed_number_state_mean() {
        // ⟨m|S† n S|m⟩ = m cosh 2r + sinh² r.
        for m in [1usize, 2, 7, 20] {
            let r = 0.6;
            let d = squeezed_number_distribution(m, r, 300).unwrap();
            let expected = m as f64 * (2.0 * r).cosh() + r.sinh().powi(2);
            assert!(
                (d.mean - expected).abs() < 1e-9,
                "m={m}: {} vs {expected}",
                d.mean
            );
        }
    }

    #[test]
    fn squeezed_thermal_reduces_to_thermal() {
        let a = squeezed_thermal_distribution(2.63, 0.0, 200).unwrap();
        let b = thermal_distribution(2.63, 200).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn squeezed_thermal_mean_example() {
        let d = squeezed_thermal_distribution(0.5, 1.34, DEFAULT_CUTOFF).unwrap();
        let closed = squeezed_thermal_mean(0.5, 1.34);
        assert!((closed - 6.83).abs() < 0.01);
        assert!((d.mean - closed).abs() / closed < 1e-4);
    }

    #[test]
    fn random_walk() {
        let mut model = PreparationModel {
            nbar0: 0.025,
            mbar: 0.075,
            steps: 0,
            beta: 0.0,
            rho_rate: 0.0,
        };
        assert_eq!(random_walk_nbar(&model), 0.025);
        model.steps = 9;
        assert!((random_walk_nbar(&model) - 0.70).abs() < 1e-12);
    }

    #[test]
    fn dispatch() {
        let d = prep_to_distribution(&ModePrep::Fock { n: 1 }, 10).unwrap();
        assert_eq!(d.p[1], 1.0);
        assert_eq!(d.p.iter().sum::<f64>(), 1.0);
        let d = prep_to_distribution(&ModePrep::thermal(2.63), 300).unwrap();
        assert_eq!(d, thermal_distribution(2.63, 300).unwrap());
        let a = prep_to_distribution(
            &ModePrep::SqueezedThermal {
                nbar: 0.5,
                r: 1.34,
                theta: 1.1,
            },
            300,
        )
        .unwrap();
        let b = prep_to_distribution(&ModePrep::squeezed_thermal(0.5, 1.34), 300).unwrap();
        assert_eq!(a, b);
        assert!(prep_to_distribution(&ModePrep::thermal(-1.0), 10).is_err());
    }

    #[test]
    fn prep_json_rejects_unknown_fields() {
        let ok: ModePrep = serde_json::from_str(r#"{"kind":"thermal","nbar":0.66}"#).unwrap();
        assert_eq!(ok, ModePrep::thermal(0.66));
        assert!(serde_json::from_str::<ModePrep>(r#"{"kind":"thermal","nbar":0.66,"x":1}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn normalized_in_paper_range(nbar in 0.0f64..5.0, r in 0.0f64..1.4, sq_nbar in 0.0f64..1.0) {
            for d in [
                thermal_distribution(nbar, DEFAULT_CUTOFF).unwrap(),
                coherent_distribution(nbar, DEFAULT_CUTOFF).unwrap(),
                squeezed_vacuum_distribution(r, DEFAULT_CUTOFF).unwrap(),
                squeezed_thermal_distribution(sq_nbar, r, DEFAULT_CUTOFF).unwrap(),
            ] {
                prop_assert!((d.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(d.p.iter().all(|v| *v >= 0.0));
                let mean: f64 = d.p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
                prop_assert!((mean - d.mean).abs() < 1e-6);
            }
        }
    }
}

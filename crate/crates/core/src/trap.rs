//! Physical model of the three-ion crystal: normal-mode frequencies, ion
//! spacing, the trilinear coupling rate and mode temperatures.
//!
//! All frequencies are angular (rad/s). Use [`crate::khz_to_angular`] at the
//! boundary when starting from ordinary frequencies.

use serde::{Deserialize, Serialize};

use crate::{khz_to_angular, Error, Result};

/// CODATA 2014 values, pinned to 12 significant digits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// J·s
    pub hbar: f64,
    /// J/K
    pub k_b: f64,
    /// F/m
    pub eps0: f64,
    /// C
    pub e_charge: f64,
    /// kg
    pub amu: f64,
}

pub const CODATA_2014: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_800_00e-34,
    k_b: 1.380_648_520_00e-23,
    eps0: 8.854_187_817_62e-12,
    e_charge: 1.602_176_620_80e-19,
    amu: 1.660_539_040_00e-27,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2014
    }
}

/// Mass number of the ytterbium isotope used in the experiment.
pub const YB171_MASS_NUMBER: f64 = 171.0;

/// Mass of a ¹⁷¹Yb⁺ ion in kg.
pub fn yb171_mass() -> f64 {
    YB171_MASS_NUMBER * CODATA_2014.amu
}

/// Measured coupling rates (ordinary frequency, kHz) for the two trap
/// configurations, as reported alongside the experiment.
pub const MEASURED_XI_A_KHZ: f64 = 2.64;
pub const MEASURED_XI_B_KHZ: f64 = 1.89;

/// Single-ion trap frequencies for a three-ion chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    pub omega_x: f64,
    /// Carried for completeness; none of the mode formulas use it.
    pub omega_y: f64,
    pub omega_z: f64,
    pub ion_mass: f64,
}

impl TrapConfig {
    pub fn from_khz(x_khz: f64, y_khz: f64, z_khz: f64) -> Self {
        TrapConfig {
            omega_x: khz_to_angular(x_khz),
            omega_y: khz_to_angular(y_khz),
            omega_z: khz_to_angular(z_khz),
            ion_mass: yb171_mass(),
        }
    }

    /// Higher-frequency configuration (equilibrium and thermal cooling runs).
    pub fn config_a() -> Self {
        Self::from_khz(1025.1, 937.7, 570.0)
    }

    /// Lowered-frequency configuration (squeezing and single-shot runs).
    pub fn config_b() -> Self {
        Self::from_khz(764.9, 701.8, 425.3)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.omega_x, self.omega_y, self.omega_z, self.ion_mass]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive {
            return Err(Error::Validation(
                "trap frequencies and ion mass must be positive".into(),
            ));
        }
        if self.omega_x <= self.omega_y {
            return Err(Error::Validation("trap requires omega_x > omega_y".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeFrequencies {
    /// Axial zigzag.
    pub omega_h: f64,
    /// Radial rocking.
    pub omega_w: f64,
    /// Radial zigzag.
    pub omega_c: f64,
    /// `omega_h - omega_w - omega_c`; zero on exact resonance.
    pub resonance_residual: f64,
}

impl ModeFrequencies {
    pub fn as_array(&self) -> [f64; 3] {
        [self.omega_h, self.omega_w, self.omega_c]
    }
}

pub fn mode_frequencies(trap: &TrapConfig) -> Result<ModeFrequencies> {
    trap.validate()?;
    let wx2 = trap.omega_x * trap.omega_x;
    let wz2 = trap.omega_z * trap.omega_z;
    if wx2 <= wz2 {
        return Err(Error::Domain(
            "omega_x^2 <= omega_z^2: rocking mode frequency is imaginary".into(),
        ));
    }
    let cold_sq = wx2 - 12.0 * wz2 / 5.0;
    if cold_sq <= 0.0 {
        return Err(Error::Domain(
            "omega_x^2 <= (12/5) omega_z^2: radial zigzag mode frequency is imaginary".into(),
        ));
    }
    let omega_h = (29.0_f64 / 5.0).sqrt() * trap.omega_z;
    let omega_w = (wx2 - wz2).sqrt();
    let omega_c = cold_sq.sqrt();
    Ok(ModeFrequencies {
        omega_h,
        omega_w,
        omega_c,
        resonance_residual: omega_h - omega_w - omega_c,
    })
}

/// Equilibrium distance between neighbouring ions, in metres.
pub fn equilibrium_spacing(trap: &TrapConfig) -> Result<f64> {
    trap.validate()?;
    let c = &CODATA_2014;
    let num = 5.0 * c.e_charge * c.e_charge;
    let den = 16.0 * std::f64::consts::PI * c.eps0 * trap.ion_mass * trap.omega_z * trap.omega_z;
    Ok((num / den).cbrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRate {
    /// rad/s
    pub xi: f64,
    /// m
    pub x0: f64,
}

/// Trilinear coupling rate `9 ω_z² sqrt(ħ / (m ω_h ω_w ω_c)) / (5 x₀)`.
pub fn coupling_rate(trap: &TrapConfig) -> Result<CouplingRate> {
    let modes = mode_frequencies(trap)?;
    let x0 = equilibrium_spacing(trap)?;
    let zero_point =
        (CODATA_2014.hbar / (trap.ion_mass * modes.omega_h * modes.omega_w * modes.omega_c)).sqrt();
    let xi = 9.0 * trap.omega_z * trap.omega_z * zero_point / (5.0 * x0);
    Ok(CouplingRate { xi, x0 })
}

/// How a measured coupling value maps onto the Hamiltonian coefficient ξ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiConvention {
    /// The measured number is the population-exchange rate, i.e. `2ξ`.
    #[default]
    ExchangeRate,
    /// The measured number is the Hamiltonian coefficient itself.
    Hamiltonian,
}

impl XiConvention {
    /// Hamiltonian coefficient ξ (rad/s) for a measured rate (rad/s).
    pub fn hamiltonian_xi(self, measured: f64) -> f64 {
        match self {
            XiConvention::ExchangeRate => 0.5 * measured,
            XiConvention::Hamiltonian => measured,
        }
    }
}

/// Comparison of the coupling formula against a measured rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingComparison {
    pub formula: CouplingRate,
    pub measured_xi: f64,
    /// `formula.xi / measured_xi`
    pub ratio: f64,
    pub warning: Option<String>,
}

/// Relative mismatch above which [`compare_coupling`] emits a warning.
pub const COUPLING_WARN_FRACTION: f64 = 0.2;

pub fn compare_coupling(trap: &TrapConfig, measured_xi: f64) -> Result<CouplingComparison> {
    if !(measured_xi > 0.0) {
        return Err(Error::Validation("measured xi must be positive".into()));
    }
    let formula = coupling_rate(trap)?;
    let ratio = formula.xi / measured_xi;
    let warning = ((ratio - 1.0).abs() > COUPLING_WARN_FRACTION).then(|| {
        format!(
            "coupling formula gives 2pi x {:.3} kHz but the measured rate is 2pi x {:.3} kHz \
             (ratio {:.3}); downstream runs use the measured rate",
            crate::angular_to_khz(formula.xi),
            crate::angular_to_khz(measured_xi),
            ratio
        )
    });
    Ok(CouplingComparison {
        formula,
        measured_xi,
        ratio,
        warning,
    })
}

/// Bose-Einstein temperature `ħω / (k_B ln(1 + 1/n̄))` in kelvin.
pub fn mode_temperature(nbar: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!(
            "mode frequency must be positive, got {omega}"
        )));
    }
    if !(nbar > 0.0) || !nbar.is_finite() {
        // n̄ = 0 corresponds to T = 0, but ln(1 + 1/n̄) diverges.
        return Err(Error::Domain(format!(
            "temperature undefined for mean phonon number {nbar}"
        )));
    }
    let c = &CODATA_2014;
    Ok(c.hbar * omega / (c.k_b * (1.0 / nbar).ln_1p()))
}

/// True when `T_c < T_h < T_w`, the ordering under which the hot mode can
/// act as a sink for heat pumped out of the cold mode.
pub fn refrigeration_ordering(nbar: [f64; 3], modes: &ModeFrequencies) -> Result<bool> {
    let t_h = mode_temperature(nbar[0], modes.omega_h)?;
    let t_w = mode_temperature(nbar[1], modes.omega_w)?;
    let t_c = mode_temperature(nbar[2], modes.omega_c)?;
    Ok(t_c < t_h && t_h < t_w)
}

/// Cooling power per unit mass `ħ ω_c Δn_c / (3 m τ)` in W/kg for a
/// three-ion crystal. Positive `delta_n_c` means the cold mode lost phonons.
pub fn cooling_power_per_mass(delta_n_c: f64, tau: f64, omega_c: f64, ion_mass: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "interaction time must be positive, got {tau}"
        )));
    }
    Ok(CODATA_2014.hbar * omega_c * delta_n_c / (3.0 * ion_mass * tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular_to_khz;
    use approx::assert_relative_eq;

    #[test]
    fn config_a_mode_frequencies() {
        let m = mode_frequencies(&TrapConfig::config_a()).unwrap();
        assert!((angular_to_khz(m.omega_h) - 1372.8).abs() < 0.1);
        assert!((angular_to_khz(m.omega_w) - 852.0).abs() < 0.1);
        assert!((angular_to_khz(m.omega_c) - 520.6).abs() < 0.1);
        assert!((angular_to_khz(m.resonance_residual) - 0.1).abs() < 0.05);
        assert!(m.resonance_residual.abs() / m.omega_h < 1e-3);
    }

    #[test]
    fn config_b_mode_frequencies() {
        let m = mode_frequencies(&TrapConfig::config_b()).unwrap();
        assert!((angular_to_khz(m.omega_h) - 1024.3).abs() < 0.1);
        assert!((angular_to_khz(m.omega_w) - 635.8).abs() < 0.1);
        assert!((angular_to_khz(m.omega_c) - 388.5).abs() < 0.1);
        assert!(m.resonance_residual.abs() / m.omega_h < 1e-3);
    }

    #[test]
    fn cold_mode_boundary_is_domain_error() {
        let mut trap = TrapConfig::from_khz(1000.0, 900.0, 500.0);
        trap.omega_x = (12.0_f64 / 5.0).sqrt() * trap.omega_z;
        trap.omega_y = 0.5 * trap.omega_x;
        assert!(matches!(mode_frequencies(&trap), Err(Error::Domain(_))));
    }

    #[test]
    fn spacing_values_and_scaling() {
        let a = TrapConfig::config_a();
        let x0 = equilibrium_spacing(&a).unwrap();
        assert!((x0 * 1e6 - 4.30).abs() < 0.01, "x0 = {x0}");

        let mut fast = a;
        fast.omega_z *= 8.0;
        assert_relative_eq!(
            equilibrium_spacing(&fast).unwrap(),
            x0 / 4.0,
            max_relative = 1e-12
        );

        let b = TrapConfig::config_b();
        // 4.30 μm scaled by (570/425.3)^{2/3}.
        assert!((equilibrium_spacing(&b).unwrap() * 1e6 - 5.22).abs() < 0.01);
    }

    #[test]
    fn coupling_formula_and_ratio() {
        let a = coupling_rate(&TrapConfig::config_a()).unwrap();
        let b = coupling_rate(&TrapConfig::config_b()).unwrap();
        assert!(
            (angular_to_khz(a.xi) - 1.3).abs() < 0.05,
            "{}",
            angular_to_khz(a.xi)
        );
        let ratio = a.xi / b.xi;
        assert!((1.35..=1.45).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn coupling_scales_with_frequency() {
        // Scaling every frequency by s: ω_z² s², sqrt(1/ω³) s^{-3/2}, 1/x₀ s^{2/3}.
        let a = TrapConfig::config_a();
        let s = 1.7;
        let scaled = TrapConfig {
            omega_x: a.omega_x * s,
            omega_y: a.omega_y * s,
            omega_z: a.omega_z * s,
            ..a
        };
        let r = coupling_rate(&scaled).unwrap().xi / coupling_rate(&a).unwrap().xi;
        assert_relative_eq!(r, s.powf(2.0 - 1.5 + 2.0 / 3.0), max_relative = 1e-10);
    }

    #[test]
    fn temperature_special_points() {
        let c = CODATA_2014;
        let w = khz_to_angular(1000.0);
        let n = 1.0 / (std::f64::consts::E - 1.0);
        assert_relative_eq!(
            mode_temperature(n, w).unwrap(),
            c.hbar * w / c.k_b,
            max_relative = 1e-12
        );

        let big = 1e6;
        assert_relative_eq!(
            mode_temperature(big, w).unwrap(),
            c.hbar * w * big / c.k_b,
            max_relative = 1e-6
        );

        let t = mode_temperature(0.66, khz_to_angular(1372.8)).unwrap();
        // 66 μK scale: ħω/k_B = 65.9 μK at 1372.8 kHz.
        assert!((t - 7.14e-5).abs() < 0.01e-5, "T = {t}");

        assert!(mode_temperature(0.0, w).is_err());
        assert!(mode_temperature(-1.0, w).is_err());
    }

    #[test]
    fn temperature_is_monotone() {
        let w = khz_to_angular(520.0);
        let mut prev = 0.0;
        for i in 1..200 {
            let t = mode_temperature(i as f64 * 0.05, w).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn cooling_power_values() {
        let m = yb171_mass();
        let wc = khz_to_angular(388.5);
        assert_eq!(cooling_power_per_mass(0.0, 1e-4, wc, m).unwrap(), 0.0);
        let p = cooling_power_per_mass(7.94e3 * 1e-4, 1e-4, wc, m).unwrap();
        assert!((p - 2.4).abs() < 0.05, "P = {p}");
        assert!(cooling_power_per_mass(1.0, 0.0, wc, m).is_err());
    }

    #[test]
    fn comparison_warns_on_gap() {
        let cmp = compare_coupling(&TrapConfig::config_a(), khz_to_angular(MEASURED_XI_A_KHZ)).unwrap();
        assert!(cmp.warning.is_some());
        assert!(cmp.ratio > 1.0 / 2.5 && cmp.ratio < 2.5);
        let exact = coupling_rate(&TrapConfig::config_a()).unwrap().xi;
        assert!(compare_coupling(&TrapConfig::config_a(), exact)
            .unwrap()
            .warning
            .is_none());
    }
}

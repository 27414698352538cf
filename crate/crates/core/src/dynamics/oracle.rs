//! Dense full-space reference evolution for small occupation caps.
//!
//! Builds the complete three-mode Hamiltonian as a Kronecker product, keeps
//! every coherence of the initial single-mode density matrices (including
//! the off-diagonal elements of squeezed states) and diagonalises once.
//! Only meant for checking the sector method, so caps are limited to 8.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::states::{prep_to_distribution, ModePrep, PhononDistribution, DEFAULT_CUTOFF};
use crate::{Error, Result};

pub const MAX_ORACLE_CAP: usize = 8;

/// Ladder size on which squeezed states are built before projection.
const SQUEEZE_LADDER: usize = 320;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn annihilation(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// `S(z) = exp((z* a² - z a†²)/2)` with `z = r e^{iθ}` on a `dim`-level ladder.
/// Only the low levels are accurate; use a ladder well beyond the occupations
/// of interest.
pub fn squeeze_operator(r: f64, theta: f64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim).map(c);
    let a2 = &a * &a;
    let ad2 = a2.adjoint();
    let z = Complex64::from_polar(r, theta);
    let gen = (a2 * z.conj() - ad2 * z) * c(0.5);
    gen.exp()
}

fn project(rho: &DMatrix<Complex64>, cap: usize) -> Result<DMatrix<Complex64>> {
    let d = cap + 1;
    let block = rho.view((0, 0), (d, d)).into_owned();
    let tr: f64 = (0..d).map(|i| block[(i, i)].re).sum();
    if !(tr > 0.0) {
        return Err(Error::Numerical("projected density matrix has zero trace".into()));
    }
    Ok(block.map(|v| v / tr))
}

/// Single-mode density matrix on `0..=cap`, projected from the full state
/// and renormalised. Squeezed and coherent states keep their coherences.
pub fn capped_mode_density(prep: &ModePrep, cap: usize) -> Result<DMatrix<Complex64>> {
    prep.validate()?;
    match *prep {
        ModePrep::SqueezedThermal { nbar, r, theta } => {
            let l = SQUEEZE_LADDER;
            let th = crate::states::thermal_distribution(nbar, l - 1)?;
            let rho_th = DMatrix::from_fn(l, l, |i, j| if i == j { c(th.p[i]) } else { c(0.0) });
            let s = squeeze_operator(r, theta, l);
            let rho = &s * rho_th * s.adjoint();
            project(&rho, cap)
        }
        ModePrep::Coherent { alpha_sq } => {
            let alpha = alpha_sq.sqrt();
            let mut amp = Vec::with_capacity(cap + 1);
            let mut v = (-alpha_sq / 2.0).exp();
            for n in 0..=cap {
                if n > 0 {
                    v *= alpha / (n as f64).sqrt();
                }
                amp.push(v);
            }
            let rho = DMatrix::from_fn(cap + 1, cap + 1, |i, j| c(amp[i] * amp[j]));
            project(&rho, cap)
        }
        ModePrep::Thermal { .. } | ModePrep::Fock { .. } => {
            let d = prep_to_distribution(prep, DEFAULT_CUTOFF.max(cap))?;
            let rho = DMatrix::from_fn(cap + 1, cap + 1, |i, j| if i == j { c(d.get(i)) } else { c(0.0) });
            project(&rho, cap)
        }
    }
}

/// Diagonal of [`capped_mode_density`], the populations the sector method
/// sees for the same capped preparation.
pub fn capped_populations(prep: &ModePrep, cap: usize) -> Result<PhononDistribution> {
    let rho = capped_mode_density(prep, cap)?;
    PhononDistribution::from_populations((0..=cap).map(|i| rho[(i, i)].re.max(0.0)).collect())
}

/// Sector method and dense oracle evaluated on the same capped state.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub times: Vec<f64>,
    pub sector: Vec<[f64; 3]>,
    pub dense: Vec<[f64; 3]>,
    /// Largest `|Δ⟨n_i⟩|` over modes and times.
    pub max_abs_diff: f64,
}

/// Run both methods on `preps` capped at `caps`. The sector method receives
/// only the diagonal of each capped single-mode state; the oracle keeps all
/// coherences.
pub fn oracle_comparison(
    preps: &[ModePrep; 3],
    caps: [usize; 3],
    xi: f64,
    detuning: f64,
    times: &[f64],
) -> Result<OracleComparison> {
    let dists = [0, 1, 2].map(|i| capped_populations(&preps[i], caps[i]));
    let [h, w, c] = dists;
    let (h, w, c) = (h?, w?, c?);
    let policy = crate::fockspace::TruncationPolicy {
        epsilon: 1e-14,
        caps: caps.map(Some),
    };
    let ens = super::assemble_from_distributions([&h, &w, &c], &policy, xi, detuning)?;
    let sector = super::SpectralEnsemble::new(ens)?.trajectory(times);
    let dense = dense_oracle_evolve(preps, caps, xi, detuning, times)?;
    let max_abs_diff = sector
        .iter()
        .zip(&dense)
        .flat_map(|(a, b)| (0..3).map(move |i| (a[i] - b[i]).abs()))
        .fold(0.0, f64::max);
    Ok(OracleComparison {
        times: times.to_vec(),
        sector,
        dense,
        max_abs_diff,
    })
}

fn kron3(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(&b.kronecker(c))
}

/// Reference `(n̄_h, n̄_w, n̄_c)` at each time in `times` (s), with every mode
/// capped at `caps[i]` phonons.
pub fn dense_oracle_evolve(
    preps: &[ModePrep; 3],
    caps: [usize; 3],
    xi: f64,
    detuning: f64,
    times: &[f64],
) -> Result<Vec<[f64; 3]>> {
    let sys = build_dense(preps, caps, xi, detuning)?;
    Ok(times.iter().map(|&t| sys.at(t)).collect())
}

/// Reference infinite-time average of the mean occupations.
pub fn dense_oracle_long_time(
    preps: &[ModePrep; 3],
    caps: [usize; 3],
    xi: f64,
    detuning: f64,
) -> Result<[f64; 3]> {
    Ok(build_dense(preps, caps, xi, detuning)?.long_time())
}

fn build_dense(preps: &[ModePrep; 3], caps: [usize; 3], xi: f64, detuning: f64) -> Result<DenseSystem> {
    if caps.iter().any(|&k| k > MAX_ORACLE_CAP) {
        return Err(Error::Validation(format!(
            "oracle caps are limited to {MAX_ORACLE_CAP}, got {caps:?}"
        )));
    }
    let dims = caps.map(|k| k + 1);
    let a = dims.map(annihilation);
    let id = dims.map(|d| DMatrix::<f64>::identity(d, d));
    let n_ops = [0, 1, 2].map(|i| {
        let num = a[i].transpose() * &a[i];
        match i {
            0 => kron3(&num, &id[1], &id[2]),
            1 => kron3(&id[0], &num, &id[2]),
            _ => kron3(&id[0], &id[1], &num),
        }
    });
    let lower = kron3(&a[0].transpose(), &a[1], &a[2]);
    let h = (&lower + lower.transpose()) * xi + &n_ops[0] * detuning;

    let rho0 = {
        let m = preps
            .iter()
            .zip(caps)
            .map(|(p, k)| capped_mode_density(p, k))
            .collect::<Result<Vec<_>>>()?;
        m[0].kronecker(&m[1].kronecker(&m[2]))
    };

    Ok(DenseSystem::new(h, rho0, n_ops))
}

struct DenseSystem {
    values: Vec<f64>,
    rho_eig: DMatrix<Complex64>,
    n_eig: Vec<DMatrix<Complex64>>,
}

impl DenseSystem {
    fn new(h: DMatrix<f64>, rho0: DMatrix<Complex64>, n_ops: [DMatrix<f64>; 3]) -> Self {
        let eig = SymmetricEigen::new(h);
        let u = eig.eigenvectors.map(c);
        let ut = u.transpose();
        let rho_eig = &ut * &rho0 * &u;
        let n_eig = n_ops.iter().map(|n| &ut * n.map(c) * &u).collect();
        DenseSystem {
            values: eig.eigenvalues.iter().copied().collect(),
            rho_eig,
            n_eig,
        }
    }

    /// `Tr(n_i ρ)` with `ρ_ab` weighted by `f(a, b)`.
    fn means_with(&self, f: impl Fn(usize, usize) -> Complex64) -> [f64; 3] {
        let dim = self.values.len();
        let mut means = [0.0; 3];
        for (mode, n) in self.n_eig.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..dim {
                for a in 0..dim {
                    acc += n[(b, a)] * self.rho_eig[(a, b)] * f(a, b);
                }
            }
            means[mode] = acc.re;
        }
        means
    }

    fn at(&self, t: f64) -> [f64; 3] {
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|e| Complex64::from_polar(1.0, -e * t))
            .collect();
        self.means_with(|a, b| phases[a] * phases[b].conj())
    }

    /// Time average: only coherences between degenerate levels survive.
    fn long_time(&self) -> [f64; 3] {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        self.means_with(|a, b| {
            if (self.values[a] - self.values[b]).abs() <= 1e-9 * scale {
                c(1.0)
            } else {
                c(0.0)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn squeeze_operator_is_unitary_on_low_levels() {
        let s = squeeze_operator(0.8, 0.4, 200);
        let prod = s.adjoint() * &s;
        for i in 0..30 {
            for j in 0..30 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(want)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn squeezed_vacuum_mean_and_parity() {
        let r = 0.9;
        let rho = capped_mode_density(&ModePrep::squeezed_thermal(0.0, r), 60).unwrap();
        let mean: f64 = (0..=60).map(|n| n as f64 * rho[(n, n)].re).sum();
        assert_abs_diff_eq!(mean, r.sinh().powi(2), epsilon = 1e-6);
        assert!(rho[(1, 1)].re.abs() < 1e-12);
        // Coherence between |0> and |2> is real and negative for θ = 0.
        assert!(rho[(0, 2)].re < -0.1);
    }

    #[test]
    fn caps_are_limited() {
        let preps = [
            ModePrep::thermal(0.1),
            ModePrep::thermal(0.1),
            ModePrep::thermal(0.1),
        ];
        assert!(dense_oracle_evolve(&preps, [9, 2, 2], 1.0, 0.0, &[0.0]).is_err());
    }

    #[test]
    fn fock_rabi() {
        let preps = [
            ModePrep::Fock { n: 1 },
            ModePrep::Fock { n: 0 },
            ModePrep::Fock { n: 0 },
        ];
        let out = dense_oracle_evolve(&preps, [2, 2, 2], 2.0, 0.0, &[0.3]).unwrap();
        assert_abs_diff_eq!(out[0][0], (0.6f64).cos().powi(2), epsilon = 1e-12);
        let avg = dense_oracle_long_time(&preps, [2, 2, 2], 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(avg[0], 0.5, epsilon = 1e-12);
    }
}

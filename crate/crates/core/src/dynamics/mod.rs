//! Sector-resolved evolution under the trilinear interaction.
//!
//! Hamiltonians are stored as `H/ħ`, so every energy in this module is an
//! angular frequency in rad/s and times are in seconds.
//!
//! Initial states are products of per-mode populations. With diagonal hot
//! and cold modes such a product has no coherence inside a sector, and
//! coherences between sectors never reach number observables, so each
//! sector starts from a diagonal density matrix. [`oracle`] checks this
//! against a dense full-space evolution that keeps every coherence.

pub mod oracle;
pub mod tridiag;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fockspace::{
    enumerate_sector, enumerate_sector_capped, select_sectors, SectorBasis, SectorLabel, TruncationPolicy,
};
use crate::states::{prep_to_distribution, ModePrep, PhononDistribution, DEFAULT_CUTOFF};
use crate::{Error, Result};

pub use oracle::{
    capped_mode_density, capped_populations, dense_oracle_evolve, dense_oracle_long_time, oracle_comparison,
    squeeze_operator, OracleComparison, MAX_ORACLE_CAP,
};
pub use tridiag::{symmetric_tridiagonal_eigen, TridiagEigen};

/// Real symmetric tridiagonal `H/ħ` of one sector, in its chain basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorHamiltonian {
    pub basis: SectorBasis,
    /// `Δ·k` for each basis state.
    pub diag: Vec<f64>,
    /// `ξ sqrt((k+1)(N-k)(M-k))` between states `k` and `k+1`.
    pub offdiag: Vec<f64>,
}

impl SectorHamiltonian {
    pub fn label(&self) -> SectorLabel {
        self.basis.label
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for (i, v) in self.offdiag.iter().enumerate() {
            h[(i, i + 1)] = *v;
            h[(i + 1, i)] = *v;
        }
        debug_assert_eq!(h.nrows(), n);
        h
    }

    pub fn eigen(&self) -> Result<TridiagEigen> {
        symmetric_tridiagonal_eigen(&self.diag, &self.offdiag)
    }
}

pub fn build_sector_hamiltonian(label: SectorLabel, xi: f64, detuning: f64) -> SectorHamiltonian {
    sector_hamiltonian_for_basis(&enumerate_sector(label), xi, detuning)
}

pub fn sector_hamiltonian_for_basis(basis: &SectorBasis, xi: f64, detuning: f64) -> SectorHamiltonian {
    let (n, m) = (basis.label.n as f64, basis.label.m as f64);
    let diag = (basis.k_lo..=basis.k_hi).map(|k| detuning * k as f64).collect();
    let offdiag = (basis.k_lo..basis.k_hi)
        .map(|k| {
            let k = k as f64;
            xi * ((k + 1.0) * (n - k) * (m - k)).sqrt()
        })
        .collect();
    SectorHamiltonian {
        basis: basis.clone(),
        diag,
        offdiag,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorState {
    pub basis: SectorBasis,
    /// Probability of finding the system in this sector.
    pub weight: f64,
    /// Unit-trace density matrix in the chain basis.
    pub rho: DMatrix<Complex64>,
}

impl SectorState {
    pub fn label(&self) -> SectorLabel {
        self.basis.label
    }

    /// Populations of the chain basis states.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThreeModeEnsemble {
    pub sectors: Vec<SectorState>,
    pub discarded_weight: f64,
    /// Coupling ξ, rad/s.
    pub xi: f64,
    /// Detuning from resonance Δ, rad/s.
    pub detuning: f64,
}

impl ThreeModeEnsemble {
    /// Sum of sector weights in a fixed order.
    pub fn retained_weight(&self) -> f64 {
        self.sectors.iter().map(|s| s.weight).sum()
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.basis.dim()).sum()
    }

    pub fn max_sector_dim(&self) -> usize {
        self.sectors.iter().map(|s| s.basis.dim()).max().unwrap_or(0)
    }

    pub fn hamiltonians(&self) -> Vec<SectorHamiltonian> {
        self.sectors
            .iter()
            .map(|s| sector_hamiltonian_for_basis(&s.basis, self.xi, self.detuning))
            .collect()
    }
}

/// Build the initial product ensemble from per-mode preparations.
pub fn assemble_initial(
    preps: &[ModePrep; 3],
    policy: &TruncationPolicy,
    xi: f64,
    detuning: f64,
) -> Result<ThreeModeEnsemble> {
    let dists = preps
        .iter()
        .map(|p| prep_to_distribution(p, DEFAULT_CUTOFF))
        .collect::<Result<Vec<_>>>()?;
    assemble_from_distributions([&dists[0], &dists[1], &dists[2]], policy, xi, detuning)
}

/// Build the initial ensemble from explicit (hot, work, cold) populations.
pub fn assemble_from_distributions(
    dists: [&PhononDistribution; 3],
    policy: &TruncationPolicy,
    xi: f64,
    detuning: f64,
) -> Result<ThreeModeEnsemble> {
    if !(xi >= 0.0 && xi.is_finite()) || !detuning.is_finite() {
        return Err(Error::Validation(
            "coupling and detuning must be finite, xi >= 0".into(),
        ));
    }
    // Entries far below the noise floor only inflate the weight grid.
    let trimmed: Vec<PhononDistribution> = dists.iter().map(|d| d.trimmed(1e-30)).collect();
    let p = [&trimmed[0].p[..], &trimmed[1].p[..], &trimmed[2].p[..]];
    let selection = select_sectors(p, policy)?;
    let sectors = selection
        .sectors
        .iter()
        .map(|(label, weight)| {
            let basis = enumerate_sector_capped(*label, &policy.caps).ok_or_else(|| {
                Error::Numerical(format!("selected sector {label:?} has no states under the caps"))
            })?;
            let mut pops: Vec<f64> = (0..basis.dim())
                .map(|i| {
                    let (h, w, c) = basis.state(i);
                    trimmed[0].get(h) * trimmed[1].get(w) * trimmed[2].get(c)
                })
                .collect();
            let total: f64 = pops.iter().sum();
            pops.iter_mut().for_each(|v| *v /= total);
            let rho = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                pops.len(),
                pops.iter().map(|v| Complex64::new(*v, 0.0)),
            ));
            Ok(SectorState {
                basis,
                weight: *weight,
                rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThreeModeEnsemble {
        sectors,
        discarded_weight: selection.discarded_weight,
        xi,
        detuning,
    })
}

/// Mean occupations and per-mode phonon marginals of an ensemble,
/// conditioned on the retained sectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhononMoments {
    /// (hot, work, cold)
    pub nbar: [f64; 3],
    pub marginals: [Vec<f64>; 3],
}

fn accumulate_moments(bases: impl Iterator<Item = (SectorBasis, f64, Vec<f64>)>) -> PhononMoments {
    let mut nbar = [0.0; 3];
    let mut marginals: [Vec<f64>; 3] = Default::default();
    let mut total = 0.0;
    for (basis, weight, pops) in bases {
        total += weight;
        for (i, p) in pops.iter().enumerate() {
            let (h, w, c) = basis.state(i);
            let wp = weight * p;
            for (mode, n) in [h, w, c].into_iter().enumerate() {
                nbar[mode] += wp * n as f64;
                let marg = &mut marginals[mode];
                if marg.len() <= n {
                    marg.resize(n + 1, 0.0);
                }
                marg[n] += wp;
            }
        }
    }
    if total > 0.0 {
        nbar.iter_mut().for_each(|v| *v /= total);
        marginals
            .iter_mut()
            .for_each(|m| m.iter_mut().for_each(|v| *v /= total));
    }
    PhononMoments { nbar, marginals }
}

pub fn mean_phonons(ensemble: &ThreeModeEnsemble) -> PhononMoments {
    accumulate_moments(
        ensemble
            .sectors
            .iter()
            .map(|s| (s.basis.clone(), s.weight, s.populations())),
    )
}

/// Incoherent (pure dephasing) interaction `∂ρ/∂t = -ξ_in [H/ħ, [H/ħ, ρ]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncoherentConfig {
    /// Strength in seconds: coherence between levels split by `Δω` decays
    /// as `exp(-ξ_in Δω² t)`.
    pub xi_in: f64,
    /// Evolution time, s.
    pub t: f64,
}

impl IncoherentConfig {
    /// Strength that makes the slowest coherence of `ensemble` decay with
    /// time constant `5/ξ`.
    pub fn default_strength(ensemble: &ThreeModeEnsemble) -> Result<f64> {
        let mut min_gap = f64::INFINITY;
        for h in ensemble.hamiltonians() {
            let eig = h.eigen()?;
            for w in eig.values.windows(2) {
                min_gap = min_gap.min(w[1] - w[0]);
            }
        }
        if !min_gap.is_finite() || !(ensemble.xi > 0.0) {
            return Ok(0.0);
        }
        Ok(ensemble.xi / (5.0 * min_gap * min_gap))
    }
}

/// Sector eigensystems plus each sector's state expressed in its eigenbasis.
///
/// Building this once makes every later time evaluation a phase rotation.
#[derive(Clone, Debug)]
pub struct SpectralEnsemble {
    pub ensemble: ThreeModeEnsemble,
    pub spectra: Vec<TridiagEigen>,
    rho_eig: Vec<DMatrix<Complex64>>,
    /// `Uᵀ diag(k) U` per sector: hot-mode occupation in the eigenbasis.
    k_eig: Vec<DMatrix<f64>>,
}

fn to_eigenbasis(u: &DMatrix<f64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let uc = u.map(|v| Complex64::new(v, 0.0));
    uc.transpose() * rho * uc
}

fn from_eigenbasis(u: &DMatrix<f64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let uc = u.map(|v| Complex64::new(v, 0.0));
    &uc * rho * uc.transpose()
}

/// `ρ_ab exp(-i (E_a - E_b) t)`.
fn rotate(rho: &DMatrix<Complex64>, values: &[f64], t: f64) -> DMatrix<Complex64> {
    let phases: Vec<Complex64> = values
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * t))
        .collect();
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| {
        rho[(a, b)] * phases[a] * phases[b].conj()
    })
}

fn dephase(rho: &DMatrix<Complex64>, values: &[f64], xi_in: f64, t: f64) -> DMatrix<Complex64> {
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| {
        let gap = values[a] - values[b];
        if a == b {
            rho[(a, b)]
        } else {
            rho[(a, b)] * (-xi_in * gap * gap * t).exp()
        }
    })
}

fn keep_diagonal(rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(rho.nrows(), rho.ncols(), |a, b| {
        if a == b {
            rho[(a, b)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `Σ_ab K_ab ρ_ab`, the trace of a real symmetric observable against ρ.
fn expectation(k: &DMatrix<f64>, rho: &DMatrix<Complex64>) -> f64 {
    let n = k.nrows();
    let mut acc = 0.0;
    for b in 0..n {
        for a in 0..n {
            acc += k[(a, b)] * rho[(a, b)].re;
        }
    }
    acc
}

impl SpectralEnsemble {
    pub fn new(ensemble: ThreeModeEnsemble) -> Result<Self> {
        let hams = ensemble.hamiltonians();
        let parts = hams
            .par_iter()
            .zip(ensemble.sectors.par_iter())
            .map(|(h, s)| {
                let eig = h.eigen()?;
                let rho_eig = to_eigenbasis(&eig.vectors, &s.rho);
                let k_diag = nalgebra::DVector::from_iterator(
                    s.basis.dim(),
                    (s.basis.k_lo..=s.basis.k_hi).map(|k| k as f64),
                );
                let k_eig = eig.vectors.transpose() * DMatrix::from_diagonal(&k_diag) * &eig.vectors;
                Ok((eig, rho_eig, k_eig))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut spectra = Vec::with_capacity(parts.len());
        let mut rho_eig = Vec::with_capacity(parts.len());
        let mut k_eig = Vec::with_capacity(parts.len());
        for (e, r, k) in parts {
            spectra.push(e);
            rho_eig.push(r);
            k_eig.push(k);
        }
        Ok(SpectralEnsemble {
            ensemble,
            spectra,
            rho_eig,
            k_eig,
        })
    }

    fn map_sectors<F>(&self, f: F) -> ThreeModeEnsemble
    where
        F: Fn(&DMatrix<Complex64>, &[f64]) -> DMatrix<Complex64> + Sync,
    {
        let sectors = self
            .ensemble
            .sectors
            .par_iter()
            .zip(self.spectra.par_iter())
            .zip(self.rho_eig.par_iter())
            .map(|((s, eig), r)| SectorState {
                basis: s.basis.clone(),
                weight: s.weight,
                rho: from_eigenbasis(&eig.vectors, &f(r, &eig.values)),
            })
            .collect();
        ThreeModeEnsemble {
            sectors,
            ..self.ensemble.clone()
        }
    }

    /// Unitary evolution to time `t` (s).
    pub fn evolve(&self, t: f64) -> ThreeModeEnsemble {
        self.map_sectors(|r, e| rotate(r, e, t))
    }

    /// Infinite-time average: dephase every sector in its eigenbasis.
    pub fn long_time_average(&self) -> ThreeModeEnsemble {
        self.map_sectors(|r, _| keep_diagonal(r))
    }

    pub fn incoherent_evolve(&self, cfg: &IncoherentConfig) -> ThreeModeEnsemble {
        self.map_sectors(|r, e| dephase(r, e, cfg.xi_in, cfg.t))
    }

    /// Mean occupations from per-sector `⟨k⟩` values, in fixed sector order.
    fn means_from<F>(&self, sector_mean_k: F) -> [f64; 3]
    where
        F: Fn(usize) -> f64 + Sync,
    {
        let per_sector: Vec<f64> = (0..self.spectra.len())
            .into_par_iter()
            .map(&sector_mean_k)
            .collect();
        self.combine(&per_sector)
    }

    fn combine(&self, mean_k: &[f64]) -> [f64; 3] {
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for (s, k) in self.ensemble.sectors.iter().zip(mean_k) {
            let w = s.weight;
            total += w;
            acc[0] += w * k;
            acc[1] += w * (s.basis.label.n as f64 - k);
            acc[2] += w * (s.basis.label.m as f64 - k);
        }
        acc.map(|v| v / total)
    }

    /// `(n̄_h, n̄_w, n̄_c)` at time `t` without forming ρ(t).
    pub fn means_at(&self, t: f64) -> [f64; 3] {
        self.means_from(|i| {
            let rotated = rotate(&self.rho_eig[i], &self.spectra[i].values, t);
            expectation(&self.k_eig[i], &rotated)
        })
    }

    pub fn trajectory(&self, times: &[f64]) -> Vec<[f64; 3]> {
        // One pass per sector over the whole grid keeps the reduction order fixed.
        let per_sector: Vec<Vec<f64>> = (0..self.spectra.len())
            .into_par_iter()
            .map(|i| {
                times
                    .iter()
                    .map(|&t| {
                        let rotated = rotate(&self.rho_eig[i], &self.spectra[i].values, t);
                        expectation(&self.k_eig[i], &rotated)
                    })
                    .collect()
            })
            .collect();
        (0..times.len())
            .map(|j| {
                let col: Vec<f64> = per_sector.iter().map(|v| v[j]).collect();
                self.combine(&col)
            })
            .collect()
    }

    pub fn long_time_means(&self) -> [f64; 3] {
        self.means_from(|i| {
            let r = &self.rho_eig[i];
            (0..r.nrows()).map(|a| self.k_eig[i][(a, a)] * r[(a, a)].re).sum()
        })
    }

    pub fn incoherent_means_at(&self, xi_in: f64, t: f64) -> [f64; 3] {
        self.means_from(|i| {
            let dephased = dephase(&self.rho_eig[i], &self.spectra[i].values, xi_in, t);
            expectation(&self.k_eig[i], &dephased)
        })
    }

    /// Moments and marginals at time `t`.
    pub fn moments_at(&self, t: f64) -> PhononMoments {
        mean_phonons(&self.evolve(t))
    }

    pub fn long_time_moments(&self) -> PhononMoments {
        mean_phonons(&self.long_time_average())
    }
}

pub fn evolve(ensemble: &ThreeModeEnsemble, t: f64) -> Result<ThreeModeEnsemble> {
    if !(t >= 0.0) {
        return Err(Error::Validation(format!("evolution time must be >= 0, got {t}")));
    }
    Ok(SpectralEnsemble::new(ensemble.clone())?.evolve(t))
}

pub fn long_time_average(ensemble: &ThreeModeEnsemble) -> Result<ThreeModeEnsemble> {
    Ok(SpectralEnsemble::new(ensemble.clone())?.long_time_average())
}

pub fn incoherent_evolve(ensemble: &ThreeModeEnsemble, cfg: &IncoherentConfig) -> Result<ThreeModeEnsemble> {
    if !(cfg.xi_in >= 0.0) || !(cfg.t >= 0.0) {
        return Err(Error::Validation(
            "incoherent strength and time must be >= 0".into(),
        ));
    }
    Ok(SpectralEnsemble::new(ensemble.clone())?.incoherent_evolve(cfg))
}

//! Invariant subspaces of the trilinear interaction.
//!
//! The interaction conserves `N = n_h + n_w` and `M = n_h + n_c`, so the
//! Fock states `|k, N-k, M-k⟩` with `0 <= k <= min(N, M)` form a closed
//! chain. Truncation works on whole sectors: sector weights are conserved
//! in time, so the selection made at t = 0 holds for every later time.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sector weights below this value are treated as numerical noise.
pub const WEIGHT_NOISE_FLOOR: f64 = 1e-15;

/// Tolerance on the normalisation of input distributions.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Conserved pair `(N, M) = (n_h + n_w, n_h + n_c)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SectorLabel {
    pub n: usize,
    pub m: usize,
}

impl SectorLabel {
    pub fn new(n: usize, m: usize) -> Self {
        SectorLabel { n, m }
    }
}

/// Optional per-mode occupation caps, ordered (hot, work, cold).
pub type ModeCaps = [Option<usize>; 3];

/// Ordered basis of one sector: states `|k, N-k, M-k⟩` for `k` in
/// `k_lo..=k_hi`, ascending in `k`.
///
/// Without caps `k_lo = 0` and `k_hi = min(N, M)`. Caps cut the chain to the
/// states that fit inside the box, which is exactly the block structure of
/// the capped full-space Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorBasis {
    pub label: SectorLabel,
    pub k_lo: usize,
    pub k_hi: usize,
}

impl SectorBasis {
    pub fn dim(&self) -> usize {
        self.k_hi + 1 - self.k_lo
    }

    /// Occupations `(n_h, n_w, n_c)` of basis state `i`.
    pub fn state(&self, i: usize) -> (usize, usize, usize) {
        let k = self.k_lo + i;
        (k, self.label.n - k, self.label.m - k)
    }

    pub fn states(&self) -> Vec<(usize, usize, usize)> {
        (0..self.dim()).map(|i| self.state(i)).collect()
    }
}

pub fn enumerate_sector(label: SectorLabel) -> SectorBasis {
    SectorBasis {
        label,
        k_lo: 0,
        k_hi: label.n.min(label.m),
    }
}

/// Sector basis restricted to `n_i <= cap_i`. Returns `None` when no state
/// of the sector fits inside the caps.
pub fn enumerate_sector_capped(label: SectorLabel, caps: &ModeCaps) -> Option<SectorBasis> {
    let full = enumerate_sector(label);
    let mut k_lo = 0usize;
    let mut k_hi = full.k_hi;
    if let Some(cap_h) = caps[0] {
        k_hi = k_hi.min(cap_h);
    }
    if let Some(cap_w) = caps[1] {
        k_lo = k_lo.max(label.n.saturating_sub(cap_w));
    }
    if let Some(cap_c) = caps[2] {
        k_lo = k_lo.max(label.m.saturating_sub(cap_c));
    }
    (k_lo <= k_hi).then_some(SectorBasis { label, k_lo, k_hi })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationPolicy {
    /// Maximum total initial population that may be discarded.
    pub epsilon: f64,
    #[serde(default)]
    pub caps: ModeCaps,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            epsilon: 1e-4,
            caps: [None; 3],
        }
    }
}

impl TruncationPolicy {
    pub fn with_epsilon(epsilon: f64) -> Self {
        TruncationPolicy {
            epsilon,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation(format!(
                "truncation epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Result of [`select_sectors`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorSelection {
    /// Retained sectors in descending weight order.
    pub sectors: Vec<(SectorLabel, f64)>,
    pub retained_weight: f64,
    pub discarded_weight: f64,
}

impl SectorSelection {
    pub fn max_n(&self) -> usize {
        self.sectors.iter().map(|(l, _)| l.n).max().unwrap_or(0)
    }

    pub fn max_m(&self) -> usize {
        self.sectors.iter().map(|(l, _)| l.m).max().unwrap_or(0)
    }
}

/// Weight of every sector under a product of per-mode populations:
/// `w(N, M) = Σ_k p_h(k) p_w(N-k) p_c(M-k)`, stored row-major in `N`.
struct WeightGrid {
    cols: usize,
    w: Vec<f64>,
}

fn sector_weights(p: [&[f64]; 3]) -> WeightGrid {
    let [ph, pw, pc] = p;
    let rows = ph.len() + pw.len();
    let cols = ph.len() + pc.len();
    let mut w = vec![0.0; rows * cols];
    for (k, &a) in ph.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (j, &b) in pw.iter().enumerate() {
            let ab = a * b;
            // Products this small cannot lift any sector above the noise floor.
            if ab < WEIGHT_NOISE_FLOOR * 1e-3 {
                continue;
            }
            let row = (k + j) * cols;
            for (l, &c) in pc.iter().enumerate() {
                w[row + k + l] += ab * c;
            }
        }
    }
    WeightGrid { cols, w }
}

fn check_normalized(p: &[f64], which: &str) -> Result<()> {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Validation(format!(
            "{which} distribution has negative or non-finite entries"
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Validation(format!(
            "{which} distribution sums to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Select the smallest set of sectors (greedy by descending weight, ties
/// broken lexicographically by `(N, M)`) whose total weight reaches
/// `1 - epsilon`.
///
/// `p` holds the (hot, work, cold) phonon populations; each must be
/// normalised on its own support. Populations above a hard cap count as
/// discarded weight.
pub fn select_sectors(p: [&[f64]; 3], policy: &TruncationPolicy) -> Result<SectorSelection> {
    policy.validate()?;
    for (dist, name) in p.iter().zip(["hot", "work", "cold"]) {
        check_normalized(dist, name)?;
    }
    let capped: Vec<&[f64]> = p
        .iter()
        .zip(policy.caps.iter())
        .map(|(dist, cap)| match cap {
            Some(c) if *c + 1 < dist.len() => &dist[..=*c],
            _ => *dist,
        })
        .collect();
    let grid = sector_weights([capped[0], capped[1], capped[2]]);

    let mut all: Vec<(SectorLabel, f64)> = grid
        .w
        .iter()
        .enumerate()
        .filter(|(_, w)| **w >= WEIGHT_NOISE_FLOOR)
        .map(|(i, w)| (SectorLabel::new(i / grid.cols, i % grid.cols), *w))
        .collect();
    all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let target = 1.0 - policy.epsilon;
    let mut retained = 0.0;
    let mut sectors = Vec::new();
    for (label, w) in all {
        if retained >= target {
            break;
        }
        retained += w;
        sectors.push((label, w));
    }
    if retained < target {
        return Err(Error::Truncation(format!(
            "populations reach only {retained:.12} of the required {target:.12} \
             (caps or distribution cutoffs too small)"
        )));
    }
    Ok(SectorSelection {
        sectors,
        retained_weight: retained,
        discarded_weight: 1.0 - retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn geometric(nbar: f64, len: usize) -> Vec<f64> {
        let x = nbar / (nbar + 1.0);
        let mut p: Vec<f64> = (0..len).map(|n| x.powi(n as i32) / (nbar + 1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        p
    }

    #[test]
    fn small_sectors() {
        let b = enumerate_sector(SectorLabel::new(1, 1));
        assert_eq!(b.states(), vec![(0, 1, 1), (1, 0, 0)]);
        let b = enumerate_sector(SectorLabel::new(0, 5));
        assert_eq!(b.states(), vec![(0, 0, 5)]);
        let b = enumerate_sector(SectorLabel::new(3, 2));
        assert_eq!(b.states(), vec![(0, 3, 2), (1, 2, 1), (2, 1, 0)]);
        assert_eq!(b.dim(), 3);
    }

    #[test]
    fn capped_chain() {
        let caps = [Some(2), Some(2), Some(2)];
        let b = enumerate_sector_capped(SectorLabel::new(3, 3), &caps).unwrap();
        assert_eq!(b.states(), vec![(1, 2, 2), (2, 1, 1)]);
        assert!(enumerate_sector_capped(SectorLabel::new(5, 0), &caps).is_none());
    }

    #[test]
    fn fock_preparation_is_one_sector() {
        let ph = [0.0, 1.0];
        let pw = [1.0];
        let pc = [1.0];
        let sel = select_sectors([&ph, &pw, &pc], &TruncationPolicy::default()).unwrap();
        assert_eq!(sel.sectors, vec![(SectorLabel::new(1, 1), 1.0)]);
        assert_eq!(sel.discarded_weight, 0.0);
    }

    #[test]
    fn large_epsilon_keeps_top_sector() {
        let p = geometric(0.2, 40);
        let sel = select_sectors([&p, &p, &p], &TruncationPolicy::with_epsilon(0.5)).unwrap();
        assert_eq!(sel.sectors.len(), 1);
        assert_eq!(sel.sectors[0].0, SectorLabel::new(0, 0));
    }

    #[test]
    fn fig3_workload_size() {
        let ph = geometric(0.66, 300);
        let pw = geometric(4.44, 300);
        let pc = geometric(2.63, 300);
        let sel = select_sectors([&ph, &pw, &pc], &TruncationPolicy::default()).unwrap();
        assert!(sel.retained_weight >= 1.0 - 1e-4);
        assert!((sel.retained_weight + sel.discarded_weight - 1.0).abs() < 1e-12);
        assert!((45..=65).contains(&sel.max_n()), "max N {}", sel.max_n());
        assert!((28..=42).contains(&sel.max_m()), "max M {}", sel.max_m());
        assert!(
            (500..=5000).contains(&sel.sectors.len()),
            "{} sectors",
            sel.sectors.len()
        );
    }

    #[test]
    fn ties_are_lexicographic() {
        // Symmetric work/cold populations give equal weights to (N, M) and (M, N).
        let ph = [1.0];
        let pw = [0.5, 0.5];
        let pc = [0.5, 0.5];
        let sel = select_sectors([&ph, &pw, &pc], &TruncationPolicy::with_epsilon(1e-6)).unwrap();
        let labels: Vec<_> = sel.sectors.iter().map(|(l, _)| (l.n, l.m)).collect();
        assert_eq!(labels, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn unreachable_target_under_caps() {
        let p = geometric(3.0, 200);
        let policy = TruncationPolicy {
            epsilon: 1e-4,
            caps: [Some(3), None, None],
        };
        assert!(matches!(
            select_sectors([&p, &p, &p], &policy),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn unnormalized_input_rejected() {
        let p = [0.5, 0.4];
        assert!(select_sectors([&p, &[1.0], &[1.0]], &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn states_partition_the_box() {
        let (nmax, mmax) = (7usize, 5usize);
        let mut seen = HashSet::new();
        let mut total = 0;
        for n in 0..=nmax {
            for m in 0..=mmax {
                let b = enumerate_sector(SectorLabel::new(n, m));
                total += b.dim();
                assert_eq!(b.dim(), n.min(m) + 1);
                for s in b.states() {
                    assert_eq!(s.0 + s.1, n);
                    assert_eq!(s.0 + s.2, m);
                    assert!(seen.insert(s));
                }
            }
        }
        // Every (k, N-k, M-k) with N <= nmax, M <= mmax appears exactly once.
        let mut expected = 0;
        for k in 0..=nmax.min(mmax) {
            expected += (nmax - k + 1) * (mmax - k + 1);
        }
        assert_eq!(total, expected);
    }
}

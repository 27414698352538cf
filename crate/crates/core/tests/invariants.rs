//! Structural properties of the evolution, checked on random inputs.

use proptest::prelude::*;

use ionfridge::dynamics::{assemble_initial, oracle_comparison, SpectralEnsemble};
use ionfridge::experiments::{fig2_dataset, presets, run_scenario, Preps, SteadyStateRule};
use ionfridge::fockspace::TruncationPolicy;
use ionfridge::khz_to_angular;
use ionfridge::states::ModePrep;

fn spectral(preps: [ModePrep; 3], eps: f64, detuning: f64) -> SpectralEnsemble {
    let ens = assemble_initial(
        &preps,
        &TruncationPolicy::with_epsilon(eps),
        0.5 * khz_to_angular(2.64),
        detuning,
    )
    .unwrap();
    SpectralEnsemble::new(ens).unwrap()
}

fn prep() -> impl Strategy<Value = ModePrep> {
    prop_oneof![
        (0.05f64..2.0).prop_map(ModePrep::thermal),
        (0.05f64..0.6, 0.0f64..0.8).prop_map(|(n, r)| ModePrep::squeezed_thermal(n, r)),
        (0.05f64..2.0).prop_map(|a| ModePrep::Coherent { alpha_sq: a }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pair_numbers_conserved(h in prep(), w in prep(), c in prep(), t in 0.0f64..1e-3, det in -2e3f64..2e3) {
        let s = spectral([h, w, c], 1e-6, det);
        let a = s.means_at(0.0);
        let b = s.means_at(t);
        prop_assert!((a[0] + a[1] - b[0] - b[1]).abs() < 1e-9);
        prop_assert!((a[0] + a[2] - b[0] - b[2]).abs() < 1e-9);
    }

    #[test]
    fn marginals_are_distributions(h in prep(), w in prep(), c in prep(), t in 0.0f64..1e-3) {
        let s = spectral([h, w, c], 1e-6, 0.0);
        for m in s.moments_at(t).marginals.iter().chain(s.long_time_moments().marginals.iter()) {
            let total: f64 = m.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(m.iter().all(|p| *p > -1e-12));
        }
    }

    #[test]
    fn time_average_approaches_long_time_limit(nh in 0.1f64..1.0, nw in 0.1f64..3.0, nc in 0.1f64..3.0) {
        let s = spectral([ModePrep::thermal(nh), ModePrep::thermal(nw), ModePrep::thermal(nc)], 1e-5, 0.0);
        let times: Vec<f64> = (0..2000).map(|i| 1e-6 * (50.0 + 10.0 * i as f64)).collect();
        let traj = s.trajectory(&times);
        let avg = traj.iter().map(|m| m[2]).sum::<f64>() / times.len() as f64;
        prop_assert!((avg - s.long_time_means()[2]).abs() < 0.01);
    }

    #[test]
    fn incoherent_model_limits(nh in 0.1f64..1.0, nw in 0.1f64..3.0, nc in 0.1f64..3.0) {
        let s = spectral([ModePrep::thermal(nh), ModePrep::thermal(nw), ModePrep::thermal(nc)], 1e-5, 0.0);
        let init = s.means_at(0.0);
        let lt = s.long_time_means();
        let zero = s.incoherent_means_at(1e-3, 0.0);
        let far = s.incoherent_means_at(1e3, 1.0);
        for i in 0..3 {
            prop_assert!((zero[i] - init[i]).abs() < 1e-12);
            prop_assert!((far[i] - lt[i]).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn sector_method_matches_dense(nh in 0.05f64..1.0, nw in 0.05f64..1.0, r in 0.0f64..1.0, nc in 0.05f64..1.0, t in 0.0f64..5e-4) {
        let preps = [ModePrep::thermal(nh), ModePrep::squeezed_thermal(nw, r), ModePrep::thermal(nc)];
        let cmp = oracle_comparison(&preps, [4; 3], khz_to_angular(2.64), 0.0, &[t]).unwrap();
        prop_assert!(cmp.max_abs_diff < 1e-9, "{}", cmp.max_abs_diff);
    }
}

#[test]
fn fock_pair_swaps_as_cos_squared() {
    let s = spectral(
        [
            ModePrep::Fock { n: 0 },
            ModePrep::Fock { n: 1 },
            ModePrep::Fock { n: 1 },
        ],
        1e-4,
        0.0,
    );
    let xi = 0.5 * khz_to_angular(2.64);
    for t in [0.0, 13e-6, 77e-6, 400e-6] {
        let n = s.means_at(t);
        assert!((n[2] - (xi * t).cos().powi(2)).abs() < 1e-12);
        assert!((n[0] - (xi * t).sin().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn zero_length_run_echoes_initial_means() {
    let mut s = presets::fig3a();
    s.time_grid = ionfridge::experiments::TimeGrid::explicit(vec![0.0]);
    let (traj, meta) = run_scenario(&s).unwrap();
    let retained: f64 = meta.get("retained_weight").unwrap().parse().unwrap();
    assert!(retained > 1.0 - 1e-4);
    let expect = [0.66, 4.44, 2.63];
    for (got, want) in traj.nbar[0].iter().zip(expect) {
        assert!((got - want).abs() < 0.02, "{:?}", traj.nbar[0]);
    }
}

#[test]
fn single_cell_sweep_returns_that_cell() {
    let base = presets::fig2();
    let d = fig2_dataset(&base, &[1.4], &[4.44], SteadyStateRule::Dephasing).unwrap();
    assert_eq!(d.cells.len(), 1);
    assert!(d.equilibria[0].nbar_c_eq.is_none());
    assert!(fig2_dataset(&base, &[], &[4.44], SteadyStateRule::Dephasing).is_err());
}

#[test]
fn work_mode_below_hot_mode_has_no_crossing() {
    let mut base = presets::fig2();
    base.preps = Preps::thermal(0.66, 0.3, 1.0);
    let d = fig2_dataset(&base, &base.sweep.nbar_c, &[0.3], SteadyStateRule::Dephasing).unwrap();
    assert!(!d.equilibria[0].crossing);
    assert!(d.equilibria[0].classical_nbar_c_eq.is_none());
}

#[test]
fn window_and_exact_steady_states_agree() {
    for row in presets::fig3_thermal().sweep.rows {
        let s = presets::fig3a().with_preps(row.preps);
        let exact = ionfridge::experiments::steady_state(&s, SteadyStateRule::Dephasing).unwrap()[2];
        let window =
            ionfridge::experiments::steady_state(&s, SteadyStateRule::Window { start_us: 240.0 }).unwrap()[2];
        assert!(
            (exact - window).abs() < 0.02 * exact,
            "{} {exact} {window}",
            row.label
        );
    }
}

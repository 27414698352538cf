use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ionfridge::dynamics::oracle_comparison;
use ionfridge::experiments::{
    fig2_dataset, fig3_dataset, fig4_dataset, fmt_g12, presets, Cell, Metadata, OutputKind, Scenario,
    Simulation, SteadyStateRule, Table, TrapSpec, WINDOW_SQUEEZED_US, WINDOW_THERMAL_US,
};
use ionfridge::measurement::{fit_distribution, read_samples_file, DistributionModel, FitOptions};
use ionfridge::states::ModePrep;
use ionfridge::trap::{
    compare_coupling, coupling_rate, equilibrium_spacing, mode_frequencies, XiConvention, MEASURED_XI_A_KHZ,
    MEASURED_XI_B_KHZ,
};
use ionfridge::{angular_to_khz, khz_to_angular, Error, Result};

#[derive(Parser)]
#[command(
    name = "ionfridge",
    version,
    about = "Three-mode trapped-ion refrigerator simulator"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "IONFRIDGE_OUT", default_value = "out")]
    out: PathBuf,
    /// Truncation budget, overriding the scenario value.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Steady-state rule: `dephasing` or `window:<us>`.
    #[arg(long, global = true)]
    rule: Option<SteadyStateRule>,
    /// Seed, overriding the scenario value.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trajectory (and any other requested outputs) for one scenario.
    Simulate { scenario: PathBuf },
    /// Hot-mode change over the scenario's (n_w, n_c) sweep.
    Fig2 { scenario: PathBuf },
    /// Cold-mode traces relative to the steady state for the scenario's rows.
    Fig3 { scenario: PathBuf },
    /// Single-shot optimum over the scenario's n_w sweep.
    Fig4 {
        scenario: PathBuf,
        /// Also run the dephasing-only model at each point.
        #[arg(long)]
        incoherent: bool,
    },
    /// Simulated against measured steady states for the built-in runs.
    SteadyState,
    /// Compare the sector method with the dense full-space evolution.
    OracleCheck {
        /// Per-mode phonon cap for the thermal check.
        #[arg(long, default_value_t = 6)]
        cap: usize,
    },
    /// Fit a phonon distribution to blue-sideband flopping data.
    Fit {
        data: PathBuf,
        #[arg(long)]
        model: DistributionModel,
        /// Carrier Rabi frequency Ω₀,₁ in kHz (ordinary frequency).
        #[arg(long)]
        rabi_khz: Option<f64>,
    },
    /// Mode frequencies and coupling rate for a trap.
    Coupling {
        /// `a`, `b`, `x,y,z` single-ion frequencies in kHz, or a JSON file.
        #[arg(long)]
        trap: String,
        /// Measured exchange rate in kHz to compare against.
        #[arg(long)]
        measured_khz: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load(cli: &Cli, path: &Path) -> Result<Scenario> {
    let mut s = Scenario::load(path)?;
    if let Some(eps) = cli.epsilon {
        s.truncation.epsilon = eps;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    s.validate()?;
    Ok(s)
}

fn stem(s: &Scenario) -> &str {
    if s.name.is_empty() {
        "scenario"
    } else {
        &s.name
    }
}

fn save(cli: &Cli, name: &str, table: &Table) -> Result<()> {
    let path = cli.out.join(name);
    table.save(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let rule = cli.rule.unwrap_or_default();
    match &cli.cmd {
        Cmd::Simulate { scenario } => simulate(cli, &load(cli, scenario)?, rule),
        Cmd::Fig2 { scenario } => {
            let s = load(cli, scenario)?;
            let d = fig2_dataset(&s, &s.sweep.nbar_c, &s.sweep.nbar_w, rule)?;
            for e in &d.equilibria {
                println!(
                    "n_w = {:<6} n_c^eq = {:<10} crossing = {:<5} classical = {}",
                    e.nbar_w_in,
                    e.nbar_c_eq.map_or("-".into(), |v| format!("{v:.3}")),
                    e.crossing,
                    e.classical_nbar_c_eq.map_or("-".into(), |v| format!("{v:.3}")),
                );
            }
            save(cli, &format!("{}-cells.csv", stem(&s)), &d.cells_table)?;
            save(cli, &format!("{}-equilibria.csv", stem(&s)), &d.equilibria_table)
        }
        Cmd::Fig3 { scenario } => {
            let s = load(cli, scenario)?;
            let d = fig3_dataset(&s, &s.sweep.rows, rule)?;
            for r in &d.rows {
                println!(
                    "{:<4} n_c^in = {:.3}  n_c^ss = {:.3}  nett = {:+.3}  measured = {}",
                    r.label,
                    r.nbar_in[2],
                    r.nbar_c_ss,
                    r.nett_cooling,
                    r.measured_nbar_c_ss.map_or("-".into(), |v| format!("{v:.2}")),
                );
            }
            save(cli, &format!("{}-summary.csv", stem(&s)), &d.summary_table)?;
            save(cli, &format!("{}-traces.csv", stem(&s)), &d.traces_table)
        }
        Cmd::Fig4 { scenario, incoherent } => {
            let s = load(cli, scenario)?;
            let d = fig4_dataset(&s, &s.sweep.nbar_w, *incoherent)?;
            for p in &d.points {
                println!(
                    "n_w = {:<5} tau* = {:7.2} us  single-shot = {:.3}  long-time = {:.3}  classical = {:.3}  power = {:.2} W/kg",
                    p.nbar_w_in, p.tau_star_us, p.single_shot_gain, p.long_time_gain, p.classical_gain, p.cooling_power_w_per_kg
                );
                if let Some(u) = p.incoherent_undercut {
                    println!(
                        "           dephasing-only model undercuts the long-time value by at most {u:.3e}"
                    );
                }
            }
            if let Some(b) = d.best() {
                println!(
                    "best: n_w = {} at {:.2} W/kg",
                    b.nbar_w_in, b.cooling_power_w_per_kg
                );
            }
            save(cli, &format!("{}.csv", stem(&s)), &d.table)
        }
        Cmd::SteadyState => steady_state_table(cli, rule),
        Cmd::OracleCheck { cap } => oracle_check(cli, *cap),
        Cmd::Fit {
            data,
            model,
            rabi_khz,
        } => fit(cli, data, *model, *rabi_khz),
        Cmd::Coupling { trap, measured_khz } => coupling(cli, trap, *measured_khz),
    }
}

fn simulate(cli: &Cli, s: &Scenario, rule: SteadyStateRule) -> Result<()> {
    let sim = Simulation::new(s)?;
    let mut meta = sim.metadata();
    meta.push("steady_state_rule", rule);
    let name = stem(s);
    println!(
        "{} sectors, max dim {}, retained weight {:.6}",
        sim.spectral.ensemble.sector_count(),
        sim.spectral.ensemble.max_sector_dim(),
        sim.spectral.ensemble.retained_weight()
    );
    for kind in &s.outputs {
        match kind {
            OutputKind::Trajectory => save(
                cli,
                &format!("{name}-trajectory.csv"),
                &sim.trajectory().table(&meta),
            )?,
            OutputKind::SteadyState => {
                let ss = sim.steady_state(rule)?;
                println!(
                    "steady state ({rule}): n_h = {:.4}  n_w = {:.4}  n_c = {:.4}",
                    ss[0], ss[1], ss[2]
                );
                let mut t = Table::new(&["nbar_h", "nbar_w", "nbar_c"]);
                t.meta = meta.clone();
                t.push(ss.map(Cell::Num).to_vec());
                save(cli, &format!("{name}-steady-state.csv"), &t)?;
            }
            OutputKind::SingleShot => {
                let shot = sim.single_shot();
                println!(
                    "single shot: tau* = {:.2} us, n_c {:.4} -> {:.4} (long time {:.4})",
                    shot.tau_star_us, shot.nbar_c_in, shot.nbar_c_min, shot.nbar_c_long_time
                );
                let mut t = Table::new(&["tau_star_us", "nbar_c_in", "nbar_c_min", "nbar_c_long_time"]);
                t.meta = meta.clone();
                t.push(vec![
                    shot.tau_star_us.into(),
                    shot.nbar_c_in.into(),
                    shot.nbar_c_min.into(),
                    shot.nbar_c_long_time.into(),
                ]);
                save(cli, &format!("{name}-single-shot.csv"), &t)?;
            }
        }
    }
    Ok(())
}

fn steady_state_table(cli: &Cli, rule: SteadyStateRule) -> Result<()> {
    let mut t = Table::new(&[
        "label",
        "nbar_h_in",
        "nbar_w_in",
        "r",
        "nbar_c_in",
        "nbar_c_ss",
        "nbar_c_ss_window",
        "measured_nbar_c_ss",
    ]);
    let groups = [
        (presets::fig3_thermal(), WINDOW_THERMAL_US),
        (presets::fig3_squeezed(), WINDOW_SQUEEZED_US),
    ];
    for (base, window) in &groups {
        let mut base = base.clone();
        if let Some(eps) = cli.epsilon {
            base.truncation.epsilon = eps;
        }
        for row in &base.sweep.rows {
            let sim = Simulation::new(&base.with_preps(row.preps.clone()))?;
            if t.meta.entries.is_empty() {
                t.meta = sim.metadata();
                t.meta.push("steady_state_rule", rule);
            }
            let ss = sim.steady_state(rule)?[2];
            let win = sim.steady_state(SteadyStateRule::Window { start_us: *window })?[2];
            let init = sim.initial_means();
            let r = match row.preps.work {
                ModePrep::SqueezedThermal { r, .. } => r,
                _ => 0.0,
            };
            let measured = row.measured_nbar_c_ss.unwrap_or(f64::NAN);
            println!(
                "{:<3} n_c^in = {:.3}  n_c^ss = {:.3}  window({window} us) = {:.3}  measured = {measured:.2}",
                row.label, init[2], ss, win
            );
            t.push(vec![
                row.label.as_str().into(),
                init[0].into(),
                init[1].into(),
                r.into(),
                init[2].into(),
                ss.into(),
                win.into(),
                measured.into(),
            ]);
        }
    }
    save(cli, "steady-state.csv", &t)
}

fn oracle_check(cli: &Cli, cap: usize) -> Result<()> {
    let xi = 0.5 * khz_to_angular(MEASURED_XI_A_KHZ);
    let times: Vec<f64> = (0..10).map(|i| i as f64 * 400e-6 / 9.0).collect();
    let cases = [
        (
            "thermal",
            [
                ModePrep::thermal(0.3),
                ModePrep::thermal(0.5),
                ModePrep::thermal(0.4),
            ],
            [cap; 3],
        ),
        (
            "squeezed",
            [
                ModePrep::thermal(0.3),
                ModePrep::squeezed_thermal(0.2, 0.5),
                ModePrep::thermal(0.4),
            ],
            [8; 3],
        ),
    ];
    let mut t = Table::new(&["case", "tau_us", "mode", "sector", "dense", "abs_diff"]);
    t.meta.push("xi_rad_per_s", fmt_g12(xi));
    let mut worst: f64 = 0.0;
    for (name, preps, caps) in &cases {
        let cmp = oracle_comparison(preps, *caps, xi, 0.0, &times)?;
        println!("{name:<9} caps {caps:?}: max |diff| = {:.3e}", cmp.max_abs_diff);
        worst = worst.max(cmp.max_abs_diff);
        for (k, time) in cmp.times.iter().enumerate() {
            for m in 0..3 {
                t.push(vec![
                    (*name).into(),
                    (time * 1e6).into(),
                    ["h", "w", "c"][m].into(),
                    cmp.sector[k][m].into(),
                    cmp.dense[k][m].into(),
                    (cmp.sector[k][m] - cmp.dense[k][m]).abs().into(),
                ]);
            }
        }
    }
    save(cli, "oracle-check.csv", &t)?;
    if worst > 1e-9 {
        return Err(Error::Numerical(format!(
            "sector and dense evolution differ by {worst:.3e}"
        )));
    }
    Ok(())
}

fn fit(cli: &Cli, data: &Path, model: DistributionModel, rabi_khz: Option<f64>) -> Result<()> {
    let samples = read_samples_file(data)?;
    let mut opts = FitOptions {
        seed: cli.seed.unwrap_or(0),
        ..FitOptions::default()
    };
    if let Some(k) = rabi_khz {
        if k.is_nan() || k <= 0.0 {
            return Err(Error::Validation("--rabi-khz must be positive".into()));
        }
        opts.sideband.omega_rabi = khz_to_angular(k);
    }
    let f = fit_distribution(&samples, model, &opts)?;
    println!(
        "model {model}: reduced chi2 = {:.3}, {} iterations",
        f.reduced_chi2, f.iterations
    );
    for p in &f.params {
        println!("  {:<12} = {:.5} +/- {:.5}", p.name, p.value, p.error);
    }
    let mut t = Table::new(&["name", "value", "error"]);
    t.meta
        .push("model", model)
        .push("reduced_chi2", fmt_g12(f.reduced_chi2))
        .push("seed", opts.seed);
    for p in &f.params {
        t.push(vec![p.name.as_str().into(), p.value.into(), p.error.into()]);
    }
    for (n, v) in f.populations.iter().enumerate().take(40) {
        t.push(vec![
            format!("p{n}").into(),
            (*v).into(),
            Cell::Text(String::new()),
        ]);
    }
    save(cli, &format!("fit-{model}.csv"), &t)
}

fn parse_trap(spec: &str) -> Result<TrapSpec> {
    let lower = spec.to_ascii_lowercase();
    if matches!(lower.as_str(), "a" | "b" | "config_a" | "config_b") {
        return Ok(TrapSpec::Named(lower));
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() == 3 {
        let v = parts
            .iter()
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Validation(format!("bad trap frequencies '{spec}'")))?;
        return Ok(TrapSpec::Frequencies {
            omega_x_khz: v[0],
            omega_y_khz: v[1],
            omega_z_khz: v[2],
        });
    }
    let text = std::fs::read_to_string(spec)?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{spec}: {e}")))
}

fn coupling(cli: &Cli, spec: &str, measured_khz: Option<f64>) -> Result<()> {
    let trap_spec = parse_trap(spec)?;
    let trap = trap_spec.resolve()?;
    let modes = mode_frequencies(&trap)?;
    let rate = coupling_rate(&trap)?;
    let x0 = equilibrium_spacing(&trap)?;
    let measured = measured_khz.or(match &trap_spec {
        TrapSpec::Named(n) if n.ends_with('a') => Some(MEASURED_XI_A_KHZ),
        TrapSpec::Named(_) => Some(MEASURED_XI_B_KHZ),
        _ => None,
    });
    let mut meta = Metadata::default();
    meta.push("trap", spec);
    let mut t = Table::new(&["quantity", "rad_per_s", "khz"]);
    t.meta = meta;
    for (name, w) in [
        ("omega_h", modes.omega_h),
        ("omega_w", modes.omega_w),
        ("omega_c", modes.omega_c),
    ] {
        println!("{name} = 2pi x {:.3} kHz ({:.6e} rad/s)", angular_to_khz(w), w);
        t.push(vec![name.into(), w.into(), angular_to_khz(w).into()]);
    }
    println!("ion spacing x0 = {:.3} um", x0 * 1e6);
    println!(
        "coupling xi = 2pi x {:.4} kHz ({:.6e} rad/s)",
        angular_to_khz(rate.xi),
        rate.xi
    );
    t.push(vec![
        "xi_formula".into(),
        rate.xi.into(),
        angular_to_khz(rate.xi).into(),
    ]);
    if let Some(k) = measured {
        let cmp = compare_coupling(&trap, khz_to_angular(k))?;
        println!("measured 2pi x {k} kHz, ratio {:.3}", cmp.ratio);
        println!(
            "read as an exchange rate 2xi, ratio {:.3}",
            rate.xi / XiConvention::ExchangeRate.hamiltonian_xi(khz_to_angular(k))
        );
        if let Some(w) = &cmp.warning {
            eprintln!("warning: {w}");
        }
        t.push(vec!["xi_measured".into(), cmp.measured_xi.into(), k.into()]);
        t.meta.push("formula_to_measured_ratio", fmt_g12(cmp.ratio));
    }
    t.meta.push("x0_m", fmt_g12(x0));
    save(cli, "coupling.csv", &t)
}

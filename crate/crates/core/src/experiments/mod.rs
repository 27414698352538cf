//! Scenarios, dataset generation and file output.

mod figures;
mod format;
pub mod presets;
mod run;
mod scenario;

pub use figures::{
    fig2_dataset, fig3_dataset, fig4_dataset, Fig2Cell, Fig2Dataset, Fig2Equilibrium, Fig3Dataset, Fig3Row,
    Fig4Dataset, Fig4Point,
};
pub use format::{fmt_g12, Cell, Metadata, Table};
pub use run::{
    golden_section, linearized_estimates, run_scenario, steady_state, Simulation, SingleShot,
    SteadyStateRule, Trajectory, WINDOW_SQUEEZED_US, WINDOW_THERMAL_US,
};
pub use scenario::{
    Coupling, ExplicitGrid, OutputKind, Preps, Scenario, Sweep, SweepRow, TimeGrid, TrapSpec, UniformGrid,
    SCHEMA_VERSION,
};

//! Configuration, experiment drivers, CSV output and bundled presets.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, FGrid, ModelKind, RunConfig, Series};
pub use experiments::{
    build_model, run, run_convergence, run_entanglement_trace, run_evolve, run_nmm_sweep, run_population_trace,
    run_steady_sweep, run_sweep, RunOutput,
};
pub use output::{emit, format_number, Cell, Table};

/// Bundled configurations, by name.
pub const PRESETS: [(&str, &str); 4] = [
    ("fig1", include_str!("../../presets/fig1.conf")),
    ("fig2", include_str!("../../presets/fig2.conf")),
    ("fig3", include_str!("../../presets/fig3.conf")),
    ("eq8", include_str!("../../presets/eq8.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

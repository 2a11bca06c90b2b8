//! Configuration, experiment orchestration and result export.
//!
//! A run is described by an [`ExperimentConfig`] (defaults, then a
//! key-value file, then flags), executed by [`run_experiment`] into a
//! [`RunArtifact`], and written by [`write_outputs`] as JSON, CSV and SVG.

mod artifact;
mod config;
mod plot;
mod run;

pub use artifact::{cells_to_nodes, NodalTable, RunArtifact};
pub use config::{parse_constraints, parse_pairs, Command, ExperimentConfig};
pub use plot::{curve_svg, export_plot, graph_svg, phase_color, PlotKind, COLOR_RANGE};
pub use run::{run_experiment, sweep_label, write_outputs};

//! Twin experiments, trace files, metrics and plots.

mod config;
mod metrics;
mod pipeline;
mod report;
mod stages;
mod svg;
mod trace_io;
mod twin;

pub use config::{HarnessSection, MeasuredPaths, ProfilesSection, RunConfig, RunMode, SensitivitySection, SolversSection, SEED_ENV};
pub use metrics::{relative_error, rmse, ParamError, ProfileRmse};
pub use pipeline::{
    build_pulse_set, estimate_composition, joint_baseline, pre_pulse_rest_voltage, pulse_fit, run_stage, twin_for_stage,
    BaselineComparison, CompositionEstimate, StageInput, StageReport, StageTiming,
};
pub use report::{to_json, write_config, write_file, write_stage};
pub use stages::DegradationStage;
pub use svg::{heatmap_svg, line_plot_svg, Series};
pub use trace_io::{load_trace, save_trace, trace_from_csv, trace_to_csv};
pub use twin::{generate_twin, pulse_start_state, TwinData, TwinTruth};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot access {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("identification step {step} failed: {error}")]
    Sso {
        step: usize,
        #[source]
        error: crate::identify::IdentifyError,
    },
    #[error("unknown degradation stage {0}")]
    Stage(u32),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error(transparent)]
    Profile(#[from] crate::profiles::ProfileError),
    #[error(transparent)]
    Identify(#[from] crate::identify::IdentifyError),
}

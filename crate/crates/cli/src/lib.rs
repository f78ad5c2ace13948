//! Command-line front end: flag parsing, experiment dispatch and report
//! serialization for the `nlmeas` binary.

pub mod args;
pub mod report;

use std::time::Instant;

use num_complex::Complex64;

use nlmeas::experiments::{
    preset, run_custom, run_hardy_signaling, run_nondemolition, run_product_rule, run_reliability,
    ExperimentParams, ExperimentReport, NamedState, Visibility,
};
use nlmeas::protocol::{CouplingSpec, ReadoutPhase};
use nlmeas::qstate::{SpinAxis, SystemState};

pub use args::{parse_args, Experiment, Format, Mode, Postselect, RunConfig};
pub use report::{ReportDocument, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IMPOSSIBLE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] nlmeas::Error),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::ImpossiblePostselection => EXIT_IMPOSSIBLE,
        }
    }
}

fn state_from_reals(values: &[f64]) -> Result<SystemState, nlmeas::Error> {
    let amps: [Complex64; 4] =
        std::array::from_fn(|i| Complex64::new(values[2 * i], values[2 * i + 1]));
    SystemState::normalized(amps)
}

fn postselection(p: &Postselect) -> Result<NamedState, nlmeas::Error> {
    match p {
        Postselect::Preset(name) => preset(name),
        Postselect::Amplitudes(values) => Ok(NamedState {
            name: "custom".to_string(),
            state: state_from_reals(values)?,
        }),
    }
}

fn coupling(axes: Option<[Option<[f64; 3]>; 2]>) -> Result<CouplingSpec, nlmeas::Error> {
    let [a, b] = axes.unwrap_or([Some([0.0, 0.0, 1.0]); 2]);
    let axis = |v: Option<[f64; 3]>| {
        v.map(|[x, y, z]| SpinAxis::from_vector(x, y, z))
            .transpose()
    };
    CouplingSpec::new(axis(a)?, axis(b)?)
}

/// Runs the configured experiment without timing or serialization.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport, nlmeas::Error> {
    let params = ExperimentParams {
        shots: config.shots,
        seed: config.seed,
        phi: ReadoutPhase::new(config.phi)?,
        visibility: Visibility::new(config.visibility)?,
        sample: config.mode.sampled(),
        ..ExperimentParams::default()
    };
    match config.experiment {
        Experiment::Reliability => run_reliability(&params),
        Experiment::Nondemolition => run_nondemolition(&params),
        Experiment::Hardy => run_hardy_signaling(&params),
        Experiment::ProductRule => {
            let post = match &config.postselect {
                Some(p) => postselection(p)?,
                None => preset("up_y_up_x")?,
            };
            run_product_rule(&params, &post)
        }
        Experiment::Custom => {
            let values = config.state.as_deref().ok_or(nlmeas::Error::NonFinite)?;
            let system = state_from_reals(values)?;
            let spec = coupling(config.axes)?;
            let post = config.postselect.as_ref().map(postselection).transpose()?;
            run_custom(&system, &spec, post.as_ref().map(|p| &p.state), &params)
        }
    }
}

/// Runs the experiment and wraps it in a timed report document.
pub fn execute(config: &RunConfig) -> Result<ReportDocument, RunError> {
    let start = Instant::now();
    let report = run_experiment(config)?;
    let elapsed = start.elapsed().as_millis() as u64;
    Ok(ReportDocument::new(config, &report, elapsed))
}

//! Flag parsing into a validated [`RunConfig`].

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use nlmeas::experiments::PRESET_NAMES;

/// Amplitude lists and axis vectors must be unit length to this tolerance
/// before they are renormalized.
pub const INPUT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Reliability,
    Nondemolition,
    ProductRule,
    Hardy,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Sampled,
    #[default]
    Both,
}

impl Mode {
    pub fn exact(self) -> bool {
        matches!(self, Mode::Exact | Mode::Both)
    }

    pub fn sampled(self) -> bool {
        matches!(self, Mode::Sampled | Mode::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Postselection target: a preset name or eight reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Postselect {
    Preset(String),
    Amplitudes(Vec<f64>),
}

/// Simulate von Neumann measurements of nonlocal two-particle spin variables.
#[derive(Parser, Debug)]
#[command(name = "nlmeas", version)]
struct Cli {
    /// Experiment to run
    #[arg(value_enum)]
    experiment: Experiment,

    /// Number of sampled shots
    #[arg(long, default_value_t = 100_000)]
    shots: u64,

    /// Master seed for sampling
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Readout phase φ in radians
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    phi: f64,

    /// Visibility in [0, 1]; 1 is ideal
    #[arg(long, default_value_t = 1.0, value_parser = unit_interval)]
    visibility: f64,

    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// System state for `custom`: re,im of |↑↑⟩,|↑↓⟩,|↓↑⟩,|↓↓⟩
    #[arg(long, allow_hyphen_values = true, value_parser = amplitudes)]
    state: Option<std::vec::Vec<f64>>,

    /// Axes for sites A and B, e.g. `x,y`, `-z,none`, `0.6:0.8:0,z`
    #[arg(long, allow_hyphen_values = true, value_parser = axis_pair)]
    axes: Option<[Option<[f64; 3]>; 2]>,

    /// Postselection: a preset name or eight reals
    #[arg(long, allow_hyphen_values = true, value_parser = postselect)]
    postselect: Option<Postselect>,

    /// Write the report to FILE instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<std::path::PathBuf>,
}

/// Everything one run needs; echoed verbatim in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub shots: u64,
    pub seed: u64,
    pub phi: f64,
    pub visibility: f64,
    pub mode: Mode,
    pub format: Format,
    pub state: Option<Vec<f64>>,
    /// Unit vectors per site; `None` switches that site's coupling off.
    pub axes: Option<[Option<[f64; 3]>; 2]>,
    pub postselect: Option<Postselect>,
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
}

impl RunConfig {
    /// Defaults for `experiment`, as if no flags were given.
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            shots: 100_000,
            seed: 42,
            phi: 0.0,
            visibility: 1.0,
            mode: Mode::Both,
            format: Format::Json,
            state: None,
            axes: None,
            postselect: None,
            out: None,
        }
    }
}

/// Parses `argv` (including the program name). Usage errors carry clap's
/// exit code 2; `--help` and `--version` come back as errors that print and
/// exit 0.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let usage = |msg: &str| Cli::command().error(ErrorKind::ArgumentConflict, msg);
    match cli.experiment {
        Experiment::Custom => {
            if cli.state.is_none() {
                return Err(Cli::command()
                    .error(ErrorKind::MissingRequiredArgument, "custom needs --state"));
            }
        }
        Experiment::ProductRule => {
            if cli.state.is_some() || cli.axes.is_some() {
                return Err(usage("--state and --axes only apply to custom"));
            }
        }
        _ => {
            if cli.state.is_some() || cli.axes.is_some() || cli.postselect.is_some() {
                return Err(usage(
                    "--state, --axes and --postselect only apply to custom and product-rule",
                ));
            }
        }
    }
    Ok(RunConfig {
        experiment: cli.experiment,
        shots: cli.shots,
        seed: cli.seed,
        phi: cli.phi,
        visibility: cli.visibility,
        mode: cli.mode,
        format: cli.format,
        state: cli.state,
        axes: cli.axes,
        postselect: cli.postselect,
        out: cli.out,
    })
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    number(s)
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = number(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn amplitudes(s: &str) -> Result<Vec<f64>, String> {
    let values = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    if values.len() != 8 {
        return Err(format!("expected 8 reals, got {}", values.len()));
    }
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > INPUT_TOLERANCE {
        return Err(format!("amplitudes have norm {norm}, expected 1"));
    }
    Ok(values)
}

fn axis(s: &str) -> Result<Option<[f64; 3]>, String> {
    let v = match s.trim() {
        "none" | "off" => return Ok(None),
        "x" | "+x" => [1.0, 0.0, 0.0],
        "-x" => [-1.0, 0.0, 0.0],
        "y" | "+y" => [0.0, 1.0, 0.0],
        "-y" => [0.0, -1.0, 0.0],
        "z" | "+z" => [0.0, 0.0, 1.0],
        "-z" => [0.0, 0.0, -1.0],
        other => {
            let parts = other
                .split(':')
                .map(number)
                .collect::<Result<Vec<_>, _>>()?;
            let [x, y, z] = parts[..] else {
                return Err(format!(
                    "axis `{other}` is not x|y|z|-x|-y|-z|none or n1:n2:n3"
                ));
            };
            [x, y, z]
        }
    };
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > INPUT_TOLERANCE {
        return Err(format!("axis has length {norm}, expected 1"));
    }
    Ok(Some(v))
}

fn axis_pair(s: &str) -> Result<[Option<[f64; 3]>; 2], String> {
    let Some((a, b)) = s.split_once(',') else {
        return Err("expected two axes separated by a comma".into());
    };
    let pair = [axis(a)?, axis(b)?];
    if pair == [None, None] {
        return Err("at least one site needs an axis".into());
    }
    Ok(pair)
}

fn postselect(s: &str) -> Result<Postselect, String> {
    if PRESET_NAMES.contains(&s) {
        return Ok(Postselect::Preset(s.to_string()));
    }
    if s.contains(',') {
        return amplitudes(s).map(Postselect::Amplitudes);
    }
    Err(format!(
        "`{s}` is neither a preset ({}) nor 8 reals",
        PRESET_NAMES.join(", ")
    ))
}

//! Scripted experiments: reliability, nondemolition verification, product
//! rule failure under pre- and postselection, and the signaling argument
//! against measuring `P₁ᴬP₁ᴮ`.
//!
//! Every experiment computes exact probabilities first. When sampling is
//! enabled, coincidence counts are drawn from those probabilities (after the
//! optional visibility mix) with one sampler stream per count table.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::protocol::{
    decode, port_labels, run_protocol, CouplingSpec, ReadoutPhase, Sign, Site, PORTS,
};
use crate::qstate::{
    tensor2, PairState, Projector, Qubit, SpinAxis, SystemState, IMPOSSIBLE_CUTOFF,
};
use crate::sampler::{sample_counts_with, CountTable, Distribution, SeedSpec};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Interferometric visibility `v ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility(f64);

impl Visibility {
    pub const PERFECT: Self = Self(1.0);

    pub fn new(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Self(v))
        } else {
            Err(Error::InvalidVisibility(v))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_perfect(self) -> bool {
        self.0 == 1.0
    }
}

impl Default for Visibility {
    fn default() -> Self {
        Self::PERFECT
    }
}

/// `v·p + (1 − v)·uniform` over the same outcomes.
pub fn apply_visibility(probs: &[f64], v: f64) -> Result<Vec<f64>> {
    let v = Visibility::new(v)?;
    Ok(mix(probs, v))
}

fn mix(probs: &[f64], v: Visibility) -> Vec<f64> {
    let v = v.value();
    let uniform = 1.0 / probs.len() as f64;
    probs.iter().map(|p| v * p + (1.0 - v) * uniform).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedState {
    pub name: String,
    pub state: SystemState,
}

pub const PRESET_NAMES: [&str; 6] = [
    "psi1",
    "psi2",
    "psi3",
    "singlet",
    "up_y_up_x",
    "up_y_down_x",
];

/// Preset system states.
///
/// * `psi1` = `|↑↑⟩`
/// * `psi2` = `(|↑↓⟩ + i|↓↑⟩)/√2`
/// * `psi3` = `√0.5|↑↑⟩ + √0.1|↑↓⟩ − i√0.2|↓↑⟩ + √0.2|↓↓⟩`
/// * `singlet` = `(|↑↓⟩ − |↓↑⟩)/√2`
/// * `up_y_up_x` = `|↑_y⟩ᴬ|↑_x⟩ᴮ`, the default postselection
/// * `up_y_down_x` = `|↑_y⟩ᴬ|↓_x⟩ᴮ`
pub fn preset(name: &str) -> Result<NamedState> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let zero = c(0.0, 0.0);
    let state = match name {
        "psi1" => SystemState::basis(0),
        "psi2" => SystemState::new([zero, c(h, 0.0), c(0.0, h), zero])?,
        "psi3" => SystemState::new([
            c(0.5f64.sqrt(), 0.0),
            c(0.1f64.sqrt(), 0.0),
            c(0.0, -(0.2f64.sqrt())),
            c(0.2f64.sqrt(), 0.0),
        ])?,
        "singlet" => SystemState::singlet(),
        "up_y_up_x" => PairState::product(SpinAxis::Y.up(), SpinAxis::X.up())?,
        "up_y_down_x" => PairState::product(SpinAxis::Y.up(), SpinAxis::X.down())?,
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(NamedState {
        name: name.to_string(),
        state,
    })
}

pub fn presets() -> Vec<NamedState> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("preset names are valid"))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentParams {
    pub shots: u64,
    pub seed: u64,
    pub phi: ReadoutPhase,
    pub visibility: Visibility,
    /// Draw count tables; exact blocks are always computed.
    pub sample: bool,
    pub exec: Execution,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        Self {
            shots: 100_000,
            seed: 42,
            phi: ReadoutPhase::default(),
            visibility: Visibility::PERFECT,
            sample: true,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub label: String,
    pub value: f64,
}

/// Named group of exact values, e.g. decoded outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactBlock {
    pub name: String,
    pub entries: Vec<Quantity>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTable {
    pub name: String,
    pub table: CountTable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Postselection {
    pub probability: f64,
    /// Sampled accepted and rejected shots, when sampling ran.
    pub accepted: Option<u64>,
    pub rejected: Option<u64>,
}

impl Postselection {
    pub fn is_impossible(&self) -> bool {
        self.probability < IMPOSSIBLE_CUTOFF
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub label: String,
    pub description: String,
    pub exact: Vec<ExactBlock>,
    pub counts: Vec<NamedTable>,
    pub postselection: Option<Postselection>,
    /// Labels of branches or events with probability below the cutoff.
    pub impossible: Vec<String>,
}

impl Section {
    fn new(label: &str, description: impl Into<String>) -> Self {
        Self {
            label: label.to_string(),
            description: description.into(),
            exact: Vec::new(),
            counts: Vec::new(),
            postselection: None,
            impossible: Vec::new(),
        }
    }

    fn push_block<S: Into<String>>(
        &mut self,
        name: &str,
        entries: impl IntoIterator<Item = (S, f64)>,
    ) {
        self.exact.push(ExactBlock {
            name: name.to_string(),
            entries: entries
                .into_iter()
                .map(|(label, value)| Quantity {
                    label: label.into(),
                    value,
                })
                .collect(),
        });
    }

    pub fn block(&self, name: &str) -> Option<&ExactBlock> {
        self.exact.iter().find(|b| b.name == name)
    }

    pub fn value(&self, block: &str, label: &str) -> Option<f64> {
        self.block(block)?
            .entries
            .iter()
            .find(|q| q.label == label)
            .map(|q| q.value)
    }

    pub fn table(&self, name: &str) -> Option<&CountTable> {
        self.counts
            .iter()
            .find(|t| t.name == name)
            .map(|t| &t.table)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub shots: u64,
    pub seed: u64,
    pub phi: f64,
    pub visibility: f64,
    pub sections: Vec<Section>,
}

impl ExperimentReport {
    fn new(experiment: &str, params: &ExperimentParams, sections: Vec<Section>) -> Self {
        Self {
            experiment: experiment.to_string(),
            shots: params.shots,
            seed: params.seed,
            phi: params.phi.value(),
            visibility: params.visibility.value(),
            sections,
        }
    }

    pub fn section(&self, label: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.label == label)
    }

    /// True when some section's postselection can never succeed.
    pub fn postselection_impossible(&self) -> bool {
        self.sections
            .iter()
            .filter_map(|s| s.postselection)
            .any(|p| p.is_impossible())
    }
}

fn draw(
    params: &ExperimentParams,
    labels: Vec<String>,
    probs: Vec<f64>,
    stream: u64,
) -> Result<CountTable> {
    let dist = Distribution::new(labels, probs)?;
    Ok(sample_counts_with(
        &dist,
        params.shots,
        SeedSpec::new(params.seed, stream),
        params.exec,
    ))
}

fn zz() -> CouplingSpec {
    CouplingSpec::nonlocal(SpinAxis::Z, SpinAxis::Z)
}

fn outcome_entries(p_plus: f64, p_minus: f64) -> [(&'static str, f64); 2] {
    [
        (Sign::Plus.eigen_label(), p_plus),
        (Sign::Minus.eigen_label(), p_minus),
    ]
}

fn decoded_from_ports(ports: &[f64]) -> (f64, f64) {
    PORTS
        .iter()
        .zip(ports)
        .fold((0.0, 0.0), |(plus, minus), (&(a, b), &p)| {
            match decode(a, b) {
                Sign::Plus => (plus + p, minus),
                Sign::Minus => (plus, minus + p),
            }
        })
}

/// Plain measurement section: decoded outcomes, ports, optional observed
/// (visibility-mixed) distributions and a sampled port table.
fn measurement_section(
    label: &str,
    description: String,
    system: &SystemState,
    spec: &CouplingSpec,
    params: &ExperimentParams,
    stream: u64,
) -> Result<Section> {
    let run = run_protocol(system, spec, params.phi);
    let mut section = Section::new(label, description);
    let result = &run.result;
    section.push_block(
        "outcome",
        outcome_entries(
            result.probability(Sign::Plus),
            result.probability(Sign::Minus),
        ),
    );
    let ports = run.port_probabilities();
    section.push_block("ports", port_labels().into_iter().zip(ports));
    for branch in result.branches() {
        if branch.probability < IMPOSSIBLE_CUTOFF {
            section
                .impossible
                .push(branch.eigenvalue.eigen_label().to_string());
        }
    }
    let observed = mix(&ports, params.visibility);
    if !params.visibility.is_perfect() {
        let (plus, minus) = decoded_from_ports(&observed);
        section.push_block("outcome_observed", outcome_entries(plus, minus));
        section.push_block(
            "ports_observed",
            port_labels().into_iter().zip(observed.iter().copied()),
        );
    }
    if params.sample {
        section.counts.push(NamedTable {
            name: "ports".into(),
            table: draw(params, port_labels(), observed, stream)?,
        });
    }
    Ok(section)
}

/// Eigenstates ψ₁, ψ₂ and the superposition ψ₃ under the `σ_z^A σ_z^B`
/// measurement.
pub fn run_reliability(params: &ExperimentParams) -> Result<ExperimentReport> {
    let states = ["psi1", "psi2", "psi3"].map(|n| preset(n).expect("preset"));
    let sections = params
        .exec
        .map_indices(states.len(), |i| {
            let s = &states[i];
            measurement_section(
                &s.name,
                format!("sigma_z^A sigma_z^B on {}", s.name),
                &s.state,
                &zz(),
                params,
                i as u64,
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("reliability", params, sections))
}

/// One state-verification configuration: measure, keep one decoded branch,
/// then test the conditional system state with each projector.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationSpec {
    pub label: String,
    pub input: NamedState,
    pub coupling: CouplingSpec,
    pub branch: Sign,
    pub projectors: Vec<(String, Projector)>,
}

fn product_projectors(
    a: &[(String, [Complex64; 2])],
    b: &[(String, [Complex64; 2])],
) -> Vec<(String, Projector)> {
    a.iter()
        .flat_map(|(la, va)| {
            b.iter().map(move |(lb, vb)| {
                let proj = Projector::product(&[(Qubit::SystemA, *va), (Qubit::SystemB, *vb)])
                    .expect("unit single-qubit states");
                (format!("{la}/{lb}"), proj)
            })
        })
        .collect()
}

fn axis_states(name: &str, axis: SpinAxis) -> [(String, [Complex64; 2]); 2] {
    [
        (format!("up_{name}"), axis.up()),
        (format!("down_{name}"), axis.down()),
    ]
}

/// `|↑_θ1⟩ = (√0.5|↑⟩ + √0.2|↓⟩)/√0.7` and `|↑_θ2⟩ = (√0.5|↑⟩ − √0.2|↓⟩)/√0.7`.
pub fn rotated_states() -> [[Complex64; 2]; 2] {
    let n = 0.7f64.sqrt();
    let (u, d) = (0.5f64.sqrt() / n, 0.2f64.sqrt() / n);
    [[c(u, 0.0), c(d, 0.0)], [c(u, 0.0), c(-d, 0.0)]]
}

/// Default verification set (a)–(e).
pub fn nondemolition_configs() -> Vec<VerificationSpec> {
    let z = axis_states("z", SpinAxis::Z);
    let x = axis_states("x", SpinAxis::X);
    let y = axis_states("y", SpinAxis::Y);
    let zz_basis = product_projectors(&z, &z);
    let xy_basis = product_projectors(&x, &y);
    let [t1, t2] = rotated_states();
    let theta = [("theta1".to_string(), t1), ("theta2".to_string(), t2)];
    let theta_set = product_projectors(&theta, &theta);

    let spec = |label: &str, input: &str, coupling, branch, projectors| VerificationSpec {
        label: label.to_string(),
        input: preset(input).expect("preset"),
        coupling,
        branch,
        projectors,
    };
    vec![
        spec("a", "psi1", zz(), Sign::Plus, zz_basis.clone()),
        spec("b", "psi2", zz(), Sign::Minus, zz_basis.clone()),
        spec("c", "psi2", zz(), Sign::Minus, xy_basis),
        spec("d", "psi3", zz(), Sign::Plus, zz_basis),
        spec("e", "psi3", zz(), Sign::Plus, theta_set),
    ]
}

fn verification_section(
    config: &VerificationSpec,
    params: &ExperimentParams,
    section_index: u64,
) -> Result<Section> {
    let run = run_protocol(&config.input.state, &config.coupling, params.phi);
    let branch = run.result.branch(config.branch);
    let mut section = Section::new(
        &config.label,
        format!(
            "{} branch {} verified with {} projectors",
            config.input.name,
            config.branch.eigen_label(),
            config.projectors.len()
        ),
    );
    section.push_block(
        "outcome",
        outcome_entries(
            run.result.probability(Sign::Plus),
            run.result.probability(Sign::Minus),
        ),
    );
    let Some(post) = branch.post_system else {
        section
            .impossible
            .push(config.branch.eigen_label().to_string());
        return Ok(section);
    };
    section.push_block(
        "nondemolition",
        [
            ("fidelity_with_input", post.fidelity(&config.input.state)),
            ("pre_readout_purity", run.pre_readout_purity()),
        ],
    );
    let conditional = config
        .projectors
        .iter()
        .map(|(label, proj)| Ok((label.clone(), post.probability(proj)?)))
        .collect::<Result<Vec<_>>>()?;
    section.push_block("verification", conditional.iter().cloned());

    if params.sample {
        let observed = mix(&run.port_probabilities(), params.visibility);
        let (plus, minus) = decoded_from_ports(&observed);
        let in_branch = match config.branch {
            Sign::Plus => plus,
            Sign::Minus => minus,
        };
        for (k, (label, q)) in conditional.iter().enumerate() {
            let q = q.clamp(0.0, 1.0);
            let probs = vec![
                in_branch * q,
                in_branch * (1.0 - q),
                (1.0 - in_branch).max(0.0),
            ];
            let labels = ["pass", "blocked", "other_branch"]
                .map(String::from)
                .to_vec();
            let stream = section_index * 64 + k as u64;
            section.counts.push(NamedTable {
                name: label.clone(),
                table: draw(params, labels, probs, stream)?,
            });
        }
    }
    Ok(section)
}

pub fn run_nondemolition(params: &ExperimentParams) -> Result<ExperimentReport> {
    run_nondemolition_with(&nondemolition_configs(), params)
}

pub fn run_nondemolition_with(
    configs: &[VerificationSpec],
    params: &ExperimentParams,
) -> Result<ExperimentReport> {
    let sections = params
        .exec
        .map_indices(configs.len(), |i| {
            verification_section(&configs[i], params, i as u64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("nondemolition", params, sections))
}

/// Measurement followed by postselection of the system on `post`.
fn postselected_section(
    label: &str,
    description: String,
    pre: &SystemState,
    spec: &CouplingSpec,
    post: &SystemState,
    params: &ExperimentParams,
    stream: u64,
) -> Result<Section> {
    let run = run_protocol(pre, spec, params.phi);
    let post_proj = Projector::onto_pair(Qubit::SystemA, Qubit::SystemB, post)?;
    // P(port ∧ postselection success) from the full post-readout state.
    let joint: Vec<f64> = run
        .ports
        .iter()
        .map(|port| match &port.state {
            Some(s) => s.probability(&post_proj).map(|q| port.probability * q),
            None => Ok(0.0),
        })
        .collect::<Result<_>>()?;
    let accepted: f64 = joint.iter().sum();
    let (joint_plus, joint_minus) = decoded_from_ports(&joint);

    let mut section = Section::new(label, description);
    section.push_block("joint", outcome_entries(joint_plus, joint_minus));
    for (sign, p) in [(Sign::Plus, joint_plus), (Sign::Minus, joint_minus)] {
        if p < IMPOSSIBLE_CUTOFF {
            section
                .impossible
                .push(format!("{}&postselected", sign.eigen_label()));
        }
    }
    let mut postselection = Postselection {
        probability: accepted,
        accepted: None,
        rejected: None,
    };
    let conditional_ports = if postselection.is_impossible() {
        section.impossible.push("postselection".into());
        None
    } else {
        let ports: Vec<f64> = joint.iter().map(|j| j / accepted).collect();
        section.push_block(
            "conditional",
            outcome_entries(joint_plus / accepted, joint_minus / accepted),
        );
        section.push_block(
            "ports_conditional",
            port_labels().into_iter().zip(ports.iter().copied()),
        );
        Some(ports)
    };
    if let Some(ports) = &conditional_ports {
        if !params.visibility.is_perfect() {
            let observed = mix(ports, params.visibility);
            let (plus, minus) = decoded_from_ports(&observed);
            section.push_block("conditional_observed", outcome_entries(plus, minus));
        }
    }

    if params.sample {
        let mut labels = port_labels();
        labels.push("rejected".into());
        let probs = match &conditional_ports {
            Some(ports) => {
                let mut probs: Vec<f64> = mix(ports, params.visibility)
                    .into_iter()
                    .map(|p| p * accepted)
                    .collect();
                probs.push((1.0 - accepted).max(0.0));
                probs
            }
            None => vec![0.0, 0.0, 0.0, 0.0, 1.0],
        };
        let all = draw(params, labels, probs, stream)?;
        let rejected = all.counts()[4];
        let table = CountTable::from_counts(port_labels(), all.counts()[..4].to_vec())?;
        postselection.accepted = Some(table.total());
        postselection.rejected = Some(rejected);
        section.counts.push(NamedTable {
            name: "ports_accepted".into(),
            table,
        });
    }
    section.postselection = Some(postselection);
    Ok(section)
}

/// Singlet preselection, postselection on `postselection` (default
/// `|↑_y⟩ᴬ|↑_x⟩ᴮ`), with three separate measurements: (a) `σ_x^A σ_y^B`,
/// (b) `σ_x^A` alone, (c) `σ_y^B` alone.
pub fn run_product_rule(
    params: &ExperimentParams,
    postselection: &NamedState,
) -> Result<ExperimentReport> {
    let singlet = SystemState::singlet();
    let cases = [
        (
            "a",
            "sigma_x^A sigma_y^B",
            CouplingSpec::nonlocal(SpinAxis::X, SpinAxis::Y),
        ),
        ("b", "sigma_x^A", CouplingSpec::local(Site::A, SpinAxis::X)),
        ("c", "sigma_y^B", CouplingSpec::local(Site::B, SpinAxis::Y)),
    ];
    let sections = params
        .exec
        .map_indices(cases.len(), |i| {
            let (label, observable, spec) = &cases[i];
            postselected_section(
                label,
                format!(
                    "{observable} on singlet, postselected on {}",
                    postselection.name
                ),
                &singlet,
                spec,
                &postselection.state,
                params,
                i as u64,
            )
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::new("product-rule", params, sections))
}

/// Ideal nondemolition measurement of `P₁ᴬP₁ᴮ` with Bob's qubit prepared in
/// `(|0⟩ + |1⟩)/√2` and Alice's in `|0⟩` or `|1⟩`. Reports the chance that
/// Bob re-finds his state afterwards. Visibility does not apply.
pub fn run_hardy_signaling(params: &ExperimentParams) -> Result<ExperimentReport> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bob = [c(h, 0.0), c(h, 0.0)];
    let targets = vec![Qubit::SystemA, Qubit::SystemB];
    let eigenspaces = [
        ("0", Projector::computational(targets.clone(), &[0, 1, 2])?),
        ("1", Projector::computational(targets, &[3])?),
    ];
    let bob_check = Projector::product(&[(Qubit::SystemB, bob)])?;

    let mut sections = Vec::new();
    for (stream, alice) in [0usize, 1].into_iter().enumerate() {
        let mut alice_state = [c(0.0, 0.0); 2];
        alice_state[alice] = c(1.0, 0.0);
        let initial = PairState::new(tensor2(alice_state, bob))?;

        let mut section = Section::new(
            &format!("alice_{alice}"),
            format!("Alice prepares |{alice}>, Bob prepares (|0>+|1>)/sqrt2"),
        );
        let mut eigen = Vec::new();
        let mut given = Vec::new();
        let mut joint = Vec::new();
        for (label, proj) in &eigenspaces {
            let p = initial.probability(proj)?;
            eigen.push((*label, p));
            let found = match initial.measure_projective(proj) {
                Ok((_, post)) => {
                    let q = post.probability(&bob_check)?;
                    given.push((*label, q));
                    q
                }
                Err(Error::ImpossibleBranch { .. }) => {
                    section.impossible.push(format!("P1P1={label}"));
                    0.0
                }
                Err(e) => return Err(e),
            };
            joint.push(p * found);
            joint.push((p * (1.0 - found)).max(0.0));
        }
        let total_found = joint[0] + joint[2];
        section.push_block("eigenvalue", eigen);
        section.push_block("bob_given_eigenvalue", given);
        section.push_block("bob", [("found", total_found)]);
        if params.sample {
            let labels = ["0/found", "0/missed", "1/found", "1/missed"]
                .map(String::from)
                .to_vec();
            section.counts.push(NamedTable {
                name: "events".into(),
                table: draw(params, labels, joint, stream as u64)?,
            });
        }
        sections.push(section);
    }
    Ok(ExperimentReport::new("hardy", params, sections))
}

/// Arbitrary input state and coupling, optionally postselected. Two-site
/// couplings also report the projective oracle's branch probabilities.
pub fn run_custom(
    system: &SystemState,
    spec: &CouplingSpec,
    postselection: Option<&SystemState>,
    params: &ExperimentParams,
) -> Result<ExperimentReport> {
    let describe = |axis: Option<SpinAxis>| match axis {
        Some(a) => {
            let [x, y, z] = a.components();
            format!("({x}, {y}, {z})")
        }
        None => "off".to_string(),
    };
    let description = format!(
        "axis A {}, axis B {}",
        describe(spec.axis(Site::A)),
        describe(spec.axis(Site::B))
    );
    let mut section = match postselection {
        Some(post) => postselected_section("custom", description, system, spec, post, params, 0)?,
        None => measurement_section("custom", description, system, spec, params, 0)?,
    };
    let run = run_protocol(system, spec, params.phi);
    section.push_block(
        "nondemolition",
        [("pre_readout_purity", run.pre_readout_purity())],
    );
    if spec.is_nonlocal() {
        let oracle = crate::protocol::projective_oracle(system, spec)?;
        section.push_block(
            "oracle",
            outcome_entries(
                oracle.probability(Sign::Plus),
                oracle.probability(Sign::Minus),
            ),
        );
    }
    Ok(ExperimentReport::new("custom", params, vec![section]))
}

//! Measurement of nonlocal products `σ_a^A σ_b^B` with an entangled pointer.
//!
//! The pointer pair starts in `(|LR⟩ + |RL⟩)/√2`. Each present site couples
//! its spin to its own pointer qubit through a conditional π phase: at site
//! A on (spin along `−a`, arm `R`), at site B on (spin along `−b`, arm `L`).
//! This is `exp(−i·π/4·(1−σ_a)(1∓σ̃_z))` per site. An eigenvalue −1 of the
//! coupled observable flips the pointer to `(|LR⟩ − |RL⟩)/√2`, +1 leaves it
//! alone. Both pointer qubits are then read out in the `|±⟩ = (|L⟩ ±
//! e^{iφ}|R⟩)/√2` basis; equal local records decode to +1, unequal to −1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qstate::{
    embed, tensor2, LocalUnitary, PointerState, Projector, PureState, Qubit, SpinAxis, SystemState,
    IMPOSSIBLE_CUTOFF,
};

/// A ± readout symbol, also used for decoded ±1 eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }

    /// `"+1"` or `"-1"`.
    pub fn eigen_label(self) -> &'static str {
        match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    A,
    B,
}

impl Site {
    pub fn system(self) -> Qubit {
        match self {
            Site::A => Qubit::SystemA,
            Site::B => Qubit::SystemB,
        }
    }

    pub fn pointer(self) -> Qubit {
        match self {
            Site::A => Qubit::PointerA,
            Site::B => Qubit::PointerB,
        }
    }

    /// Pointer arm that picks up the conditional phase: `R` at A, `L` at B.
    fn coupled_arm(self) -> u8 {
        match self {
            Site::A => 1,
            Site::B => 0,
        }
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const H: Complex64 = Complex64::new(FRAC_1_SQRT_2, 0.0);

/// Ready state of the measuring device, `(|LR⟩ + |RL⟩)/√2`.
pub fn prepare_pointer() -> PointerState {
    PointerState::new([ZERO, H, H, ZERO]).expect("unit norm")
}

/// `(|LR⟩ − |RL⟩)/√2`, the pointer after a −1 outcome.
pub fn flipped_pointer() -> PointerState {
    PointerState::new([ZERO, H, -H, ZERO]).expect("unit norm")
}

/// Which local spin observables are coupled to the pointer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    a: Option<SpinAxis>,
    b: Option<SpinAxis>,
}

impl CouplingSpec {
    pub fn new(a: Option<SpinAxis>, b: Option<SpinAxis>) -> Result<Self> {
        if a.is_none() && b.is_none() {
            return Err(Error::EmptyCoupling);
        }
        Ok(Self { a, b })
    }

    /// Product observable `σ_a^A σ_b^B`.
    pub fn nonlocal(a: SpinAxis, b: SpinAxis) -> Self {
        Self {
            a: Some(a),
            b: Some(b),
        }
    }

    /// Single-site observable with the opposite coupling switched off.
    pub fn local(site: Site, axis: SpinAxis) -> Self {
        match site {
            Site::A => Self {
                a: Some(axis),
                b: None,
            },
            Site::B => Self {
                a: None,
                b: Some(axis),
            },
        }
    }

    pub fn axis(&self, site: Site) -> Option<SpinAxis> {
        match site {
            Site::A => self.a,
            Site::B => self.b,
        }
    }

    pub fn is_nonlocal(&self) -> bool {
        self.a.is_some() && self.b.is_some()
    }

    fn sites(&self) -> impl Iterator<Item = (Site, SpinAxis)> + '_ {
        [(Site::A, self.a), (Site::B, self.b)]
            .into_iter()
            .filter_map(|(site, axis)| axis.map(|a| (site, a)))
    }
}

/// Composition recipe for the coupling unitary: per site, rotate the spin
/// into the axis eigenbasis, apply the conditional π phase, rotate back.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    steps: Vec<(Site, LocalUnitary)>,
}

pub fn coupling_unitary(spec: &CouplingSpec) -> Coupling {
    Coupling {
        steps: spec
            .sites()
            .map(|(site, axis)| (site, axis.eigenbasis()))
            .collect(),
    }
}

impl Coupling {
    pub fn apply(&self, state: &PureState) -> PureState {
        self.steps.iter().fold(*state, |s, (site, basis)| {
            let system = site.system();
            let mask = [(system, 1), (site.pointer(), site.coupled_arm())];
            s.apply_local(system, &basis.adjoint())
                .apply_phase_on_mask(&mask, PI)
                .expect("mask names one system and one pointer qubit")
                .apply_local(system, basis)
        })
    }

    /// Dense 16×16 matrix, `m[row][col]`.
    pub fn matrix(&self) -> [[Complex64; 16]; 16] {
        let mut m = [[ZERO; 16]; 16];
        for col in 0..16 {
            let image = self.apply(&PureState::basis(col));
            for (row, entry) in m.iter_mut().enumerate() {
                entry[col] = image[row];
            }
        }
        m
    }
}

/// Common, unknown phase `φ` of the `|±⟩` readout basis at both sites.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReadoutPhase(f64);

impl ReadoutPhase {
    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() {
            Ok(Self(phi))
        } else {
            Err(Error::InvalidPhase)
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `|±⟩ = (|L⟩ ± e^{iφ}|R⟩)/√2`.
    pub fn ket(self, sign: Sign) -> [Complex64; 2] {
        let r = Complex64::from_polar(FRAC_1_SQRT_2, self.0);
        match sign {
            Sign::Plus => [H, r],
            Sign::Minus => [H, -r],
        }
    }
}

/// Detector-pair ports in label order `++, +-, -+, --`.
pub const PORTS: [(Sign, Sign); 4] = [
    (Sign::Plus, Sign::Plus),
    (Sign::Plus, Sign::Minus),
    (Sign::Minus, Sign::Plus),
    (Sign::Minus, Sign::Minus),
];

pub fn port_label(a: Sign, b: Sign) -> String {
    format!("{}{}", a.symbol(), b.symbol())
}

pub fn port_labels() -> Vec<String> {
    PORTS.iter().map(|&(a, b)| port_label(a, b)).collect()
}

/// Combines the two local records into the nonlocal eigenvalue.
pub fn decode(local_a: Sign, local_b: Sign) -> Sign {
    if local_a == local_b {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortOutcome {
    pub local_a: Sign,
    pub local_b: Sign,
    pub probability: f64,
    /// Post-readout joint state; `None` for impossible ports.
    pub state: Option<PureState>,
}

impl PortOutcome {
    pub fn label(&self) -> String {
        port_label(self.local_a, self.local_b)
    }

    pub fn decoded(&self) -> Sign {
        decode(self.local_a, self.local_b)
    }
}

fn pointer_projector(phi: ReadoutPhase, ports: impl Iterator<Item = (Sign, Sign)>) -> Projector {
    let span = ports
        .map(|(a, b)| tensor2(phi.ket(a), phi.ket(b)).to_vec())
        .collect();
    Projector::new(vec![Qubit::PointerA, Qubit::PointerB], span)
        .expect("readout basis is orthonormal")
}

/// Local `|±⟩` readout of both pointer qubits.
pub fn readout(state: &PureState, phi: ReadoutPhase) -> [PortOutcome; 4] {
    PORTS.map(|(a, b)| {
        let proj = pointer_projector(phi, std::iter::once((a, b)));
        let (probability, state) = branch_of(state, &proj);
        PortOutcome {
            local_a: a,
            local_b: b,
            probability,
            state,
        }
    })
}

fn branch_of(state: &PureState, proj: &Projector) -> (f64, Option<PureState>) {
    match state.measure_projective(proj) {
        Ok((p, post)) => (p, Some(post)),
        Err(Error::ImpossibleBranch { probability }) => (probability, None),
        Err(e) => unreachable!("pointer projector on the full register: {e}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub eigenvalue: Sign,
    pub probability: f64,
    /// Conditional system state; `None` when the branch is impossible.
    pub post_system: Option<SystemState>,
}

/// Decoded ±1 branches, `+1` first.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult {
    branches: [Branch; 2],
}

impl MeasurementResult {
    pub fn branches(&self) -> &[Branch; 2] {
        &self.branches
    }

    pub fn branch(&self, eigenvalue: Sign) -> &Branch {
        &self.branches[eigenvalue.index()]
    }

    pub fn probability(&self, eigenvalue: Sign) -> f64 {
        self.branch(eigenvalue).probability
    }
}

/// Every intermediate of one pass through the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    /// Joint state after the couplings, before readout.
    pub coupled: PureState,
    pub ports: [PortOutcome; 4],
    pub result: MeasurementResult,
}

impl ProtocolRun {
    pub fn pre_readout_purity(&self) -> f64 {
        self.coupled.system_purity()
    }

    pub fn port_probabilities(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.ports[i].probability)
    }
}

/// Runs embed → couple → read out → decode. The `(+,+)`/`(−,−)` ports are
/// merged coherently by projecting onto their joint pointer subspace before
/// the system state is extracted, and likewise `(+,−)`/`(−,+)`.
pub fn run_protocol(system: &SystemState, spec: &CouplingSpec, phi: ReadoutPhase) -> ProtocolRun {
    let joint = embed(system, &prepare_pointer());
    let coupled = coupling_unitary(spec).apply(&joint);
    let ports = readout(&coupled, phi);
    let branches = Sign::BOTH.map(|eigenvalue| {
        let proj = pointer_projector(
            phi,
            PORTS
                .into_iter()
                .filter(|&(a, b)| decode(a, b) == eigenvalue),
        );
        let (probability, post) = branch_of(&coupled, &proj);
        Branch {
            eigenvalue,
            probability,
            post_system: post.map(|s| s.system_factor().expect("branch state has weight")),
        }
    });
    ProtocolRun {
        coupled,
        ports,
        result: MeasurementResult { branches },
    }
}

/// Measures `σ_a^A σ_b^B`; both axes must be present.
pub fn measure_nonlocal(
    system: &SystemState,
    spec: &CouplingSpec,
    phi: ReadoutPhase,
) -> Result<MeasurementResult> {
    if !spec.is_nonlocal() {
        return Err(Error::CouplingArity {
            expected: "two-site",
        });
    }
    Ok(run_protocol(system, spec, phi).result)
}

/// Measures `σ_axis` at one site with the other coupling switched off. The
/// pointer and decoding are unchanged.
pub fn measure_local(
    system: &SystemState,
    site: Site,
    axis: SpinAxis,
    phi: ReadoutPhase,
) -> MeasurementResult {
    run_protocol(system, &CouplingSpec::local(site, axis), phi).result
}

/// Textbook projective measurement of `σ_a ⊗ σ_b` via `(1 ± σ_a⊗σ_b)/2`,
/// with no pointer involved.
pub fn projective_oracle(system: &SystemState, spec: &CouplingSpec) -> Result<MeasurementResult> {
    let (Some(a), Some(b)) = (spec.axis(Site::A), spec.axis(Site::B)) else {
        return Err(Error::CouplingArity {
            expected: "two-site",
        });
    };
    let (ma, mb) = (a.observable(), b.observable());
    let product = |r: usize, c: usize| ma[r >> 1][c >> 1] * mb[r & 1][c & 1];
    let amps = system.amplitudes();
    let branches = Sign::BOTH.map(|eigenvalue| {
        let sign = f64::from(eigenvalue.value());
        let projected: [Complex64; 4] = std::array::from_fn(|r| {
            let o: Complex64 = (0..4).map(|c| product(r, c) * amps[c]).sum();
            (amps[r] + o * sign) * 0.5
        });
        let probability: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
        let post_system = if probability < IMPOSSIBLE_CUTOFF {
            None
        } else {
            SystemState::normalized(projected).ok()
        };
        Branch {
            eigenvalue,
            probability,
            post_system,
        }
    });
    Ok(MeasurementResult { branches })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularSumRow {
    pub a: Sign,
    pub b: Sign,
    /// `(a + b) mod 4 − 1` with a non-negative remainder.
    pub modular: i32,
    pub product: i32,
}

impl ModularSumRow {
    pub fn holds(&self) -> bool {
        self.modular == self.product
    }
}

/// Checks `σ_z^A σ_z^B = (σ_z^A + σ_z^B) mod 4 − 1` on the four joint
/// z eigenstates.
pub fn modular_sum_check() -> Vec<ModularSumRow> {
    PORTS
        .iter()
        .map(|&(a, b)| ModularSumRow {
            a,
            b,
            modular: (a.value() + b.value()).rem_euclid(4) - 1,
            product: a.value() * b.value(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::fidelity;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn psi3() -> SystemState {
        SystemState::new([
            c(0.5f64.sqrt(), 0.0),
            c(0.1f64.sqrt(), 0.0),
            c(0.0, -(0.2f64.sqrt())),
            c(0.2f64.sqrt(), 0.0),
        ])
        .unwrap()
    }

    const ZZ: CouplingSpec = CouplingSpec {
        a: Some(SpinAxis::Z),
        b: Some(SpinAxis::Z),
    };

    #[test]
    fn pointer_ready_state() {
        let p = prepare_pointer();
        let h = FRAC_1_SQRT_2;
        assert_eq!(
            p.amplitudes(),
            &[c(0.0, 0.0), c(h, 0.0), c(h, 0.0), c(0.0, 0.0)]
        );
        assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&p, &flipped_pointer()), 0.0);
    }

    #[test]
    fn empty_coupling_is_rejected() {
        assert_eq!(CouplingSpec::new(None, None), Err(Error::EmptyCoupling));
    }

    #[test]
    fn down_down_leaves_pointer_alone() {
        let joint = embed(&SystemState::basis(3), &prepare_pointer());
        let out = coupling_unitary(&ZZ).apply(&joint);
        let pointer = out.pointer_factor().unwrap();
        assert!((fidelity(&pointer, &prepare_pointer()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn up_down_flips_pointer() {
        let joint = embed(&SystemState::basis(1), &prepare_pointer());
        let out = coupling_unitary(&ZZ).apply(&joint);
        let pointer = out.pointer_factor().unwrap();
        assert!((fidelity(&pointer, &flipped_pointer()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_matrix_is_unitary() {
        let spec = CouplingSpec::nonlocal(SpinAxis::X, SpinAxis::Y);
        let m = coupling_unitary(&spec).matrix();
        for i in 0..16 {
            for j in 0..16 {
                let dot: Complex64 = (0..16).map(|k| m[k][i].conj() * m[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - c(target, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn readout_of_ready_pointer_is_correlated() {
        for phi in [0.0, 0.7, 2.0, -3.1] {
            let phi = ReadoutPhase::new(phi).unwrap();
            let ports = readout(&embed(&SystemState::basis(0), &prepare_pointer()), phi);
            let p: Vec<f64> = ports.iter().map(|o| o.probability).collect();
            assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
            assert!(p[1] < 1e-14 && p[2] < 1e-14);
            assert!(ports[1].state.is_none());

            let ports = readout(&embed(&SystemState::basis(0), &flipped_pointer()), phi);
            let p: Vec<f64> = ports.iter().map(|o| o.probability).collect();
            assert!((p[1] - 0.5).abs() < 1e-12 && (p[2] - 0.5).abs() < 1e-12);
            assert!(p[0] < 1e-14 && p[3] < 1e-14);
        }
    }

    #[test]
    fn readout_is_phase_independent_on_psi3() {
        let run = |phi| {
            let r = run_protocol(&psi3(), &ZZ, ReadoutPhase::new(phi).unwrap());
            r.port_probabilities()
        };
        let (p0, p1) = (run(0.0), run(1.234));
        for (a, b) in p0.iter().zip(&p1) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((p0.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn decoding_table() {
        assert_eq!(decode(Sign::Plus, Sign::Plus), Sign::Plus);
        assert_eq!(decode(Sign::Plus, Sign::Minus), Sign::Minus);
        assert_eq!(decode(Sign::Minus, Sign::Minus), Sign::Plus);
        for (a, b) in PORTS {
            assert_eq!(decode(a, b), decode(a.flipped(), b.flipped()));
        }
    }

    #[test]
    fn nonlocal_examples() {
        let phi = ReadoutPhase::default();
        let psi1 = SystemState::basis(0);
        let r = measure_nonlocal(&psi1, &ZZ, phi).unwrap();
        assert!((r.probability(Sign::Plus) - 1.0).abs() < 1e-12);
        let post = r.branch(Sign::Plus).post_system.unwrap();
        assert!((fidelity(&post, &psi1) - 1.0).abs() < 1e-12);
        assert!(r.branch(Sign::Minus).post_system.is_none());

        let r = measure_nonlocal(&psi3(), &ZZ, phi).unwrap();
        assert!((r.probability(Sign::Plus) - 0.7).abs() < 1e-12);
        assert!((r.probability(Sign::Minus) - 0.3).abs() < 1e-12);

        let xy = CouplingSpec::nonlocal(SpinAxis::X, SpinAxis::Y);
        let singlet = SystemState::singlet();
        let r = measure_nonlocal(&singlet, &xy, phi).unwrap();
        let o = projective_oracle(&singlet, &xy).unwrap();
        for s in Sign::BOTH {
            assert!((r.probability(s) - 0.5).abs() < 1e-12);
            let f = fidelity(
                &r.branch(s).post_system.unwrap(),
                &o.branch(s).post_system.unwrap(),
            );
            assert!((f - 1.0).abs() < 1e-10);
        }

        assert!(
            measure_nonlocal(&singlet, &CouplingSpec::local(Site::A, SpinAxis::X), phi).is_err()
        );
    }

    #[test]
    fn plus_branch_of_singlet_is_orthogonal_to_postselection() {
        // Standard phase conventions for the x and y eigenvectors.
        let h = FRAC_1_SQRT_2;
        let (up_x, down_x) = ([c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]);
        let (up_y, down_y) = ([c(h, 0.0), c(0.0, h)], [c(h, 0.0), c(0.0, -h)]);
        let xy = CouplingSpec::nonlocal(SpinAxis::X, SpinAxis::Y);
        let r = measure_nonlocal(&SystemState::singlet(), &xy, ReadoutPhase::default()).unwrap();
        let post = r.branch(Sign::Plus).post_system.unwrap();
        let overlap = |a, b| SystemState::product(a, b).unwrap().fidelity(&post);
        // Supported on |↑y↓x⟩ and |↓y↑x⟩ with equal weight, as (|↑y↓x⟩ − |↓y↑x⟩)/√2.
        assert!((overlap(up_y, down_x) - 0.5).abs() < 1e-12);
        assert!((overlap(down_y, up_x) - 0.5).abs() < 1e-12);
        assert!(overlap(up_y, up_x) < 1e-14);
        let a = tensor2(up_y, down_x);
        let b = tensor2(down_y, up_x);
        let expected = SystemState::normalized(std::array::from_fn(|i| a[i] - b[i])).unwrap();
        assert!((fidelity(&post, &expected) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn local_examples() {
        let phi = ReadoutPhase::default();
        let r = measure_local(&SystemState::basis(0), Site::A, SpinAxis::Z, phi);
        assert!((r.probability(Sign::Plus) - 1.0).abs() < 1e-12);

        let singlet = SystemState::singlet();
        let r = measure_local(&singlet, Site::A, SpinAxis::X, phi);
        assert!((r.probability(Sign::Plus) - 0.5).abs() < 1e-12);
        assert!((r.probability(Sign::Minus) - 0.5).abs() < 1e-12);

        let post_b = Projector::product(&[(Qubit::SystemB, SpinAxis::X.up())]).unwrap();
        let (_, conditioned) = singlet.measure_projective(&post_b).unwrap();
        let r = measure_local(&conditioned, Site::A, SpinAxis::X, phi);
        assert!((r.probability(Sign::Minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_examples() {
        let r = projective_oracle(&SystemState::basis(0), &ZZ).unwrap();
        assert!((r.probability(Sign::Plus) - 1.0).abs() < 1e-15);
        let r = projective_oracle(&psi3(), &ZZ).unwrap();
        assert!((r.probability(Sign::Plus) - 0.7).abs() < 1e-12);
        assert!((r.probability(Sign::Minus) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn modular_sum_identity() {
        let rows = modular_sum_check();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(ModularSumRow::holds));
        let down_down = rows
            .iter()
            .find(|r| r.a == Sign::Minus && r.b == Sign::Minus)
            .unwrap();
        assert_eq!(down_down.modular, 1);
    }
}

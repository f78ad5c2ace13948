//! Dense complex state vectors over the fixed four-qubit register.
//!
//! The register holds two system spins and two pointer (path) qubits in the
//! order `[SystemA, SystemB, PointerA, PointerB]`. A basis state's index is
//! `8·SystemA + 4·SystemB + 2·PointerA + PointerB`, where qubit value 0 is
//! spin up along z (pointer arm `L`) and value 1 is spin down (arm `R`).
//!
//! Two-qubit states ([`PairState`]) use the index `2·A + B`. Global phases
//! are never normalized away; compare states with [`fidelity`].

use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Index;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Tolerance for invariants such as normalization and unitarity.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Tolerance for derived equalities between two computation routes.
pub const EQUALITY_TOLERANCE: f64 = 1e-10;
/// Branches with probability below this are treated as impossible.
pub const IMPOSSIBLE_CUTOFF: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Qubit {
    SystemA,
    SystemB,
    PointerA,
    PointerB,
}

impl Qubit {
    pub const ALL: [Qubit; 4] = [
        Qubit::SystemA,
        Qubit::SystemB,
        Qubit::PointerA,
        Qubit::PointerB,
    ];

    /// Bit weight of this qubit in a 16-amplitude register index.
    pub const fn weight(self) -> usize {
        match self {
            Qubit::SystemA => 8,
            Qubit::SystemB => 4,
            Qubit::PointerA => 2,
            Qubit::PointerB => 1,
        }
    }

    /// Bit weight inside a two-qubit state, where the A-side qubit is the
    /// high bit whether the pair is the system or the pointer.
    pub const fn pair_weight(self) -> usize {
        match self {
            Qubit::SystemA | Qubit::PointerA => 2,
            Qubit::SystemB | Qubit::PointerB => 1,
        }
    }

    pub const fn is_system(self) -> bool {
        matches!(self, Qubit::SystemA | Qubit::SystemB)
    }
}

fn weight_in<const N: usize>(qubit: Qubit) -> usize {
    if N == 16 {
        qubit.weight()
    } else {
        qubit.pair_weight()
    }
}

fn norm_sqr_of(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_finite(amps: &[Complex64]) -> Result<()> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Tensor product of two single-qubit vectors, `a` on the high bit.
pub fn tensor2(a: [Complex64; 2], b: [Complex64; 2]) -> [Complex64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

/// A unit-norm pure state over `N` amplitudes (`N` is 4 or 16).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket<const N: usize> {
    amps: [Complex64; N],
}

/// Full register: system pair ⊗ pointer pair.
pub type PureState = Ket<16>;
/// Any two-qubit state, A side on the high bit.
pub type PairState = Ket<4>;
/// Polarization (spin) state of the two particles.
pub type SystemState = PairState;
/// Path state of the measuring device.
pub type PointerState = PairState;

impl<const N: usize> Ket<N> {
    const DIM_OK: () = assert!(N == 4 || N == 16, "registers hold 2 or 4 qubits");

    /// Wraps `amps`, rejecting non-finite entries and norms off by more than
    /// [`NORM_TOLERANCE`].
    pub fn new(amps: [Complex64; N]) -> Result<Self> {
        #[allow(clippy::let_unit_value)]
        let () = Self::DIM_OK;
        check_finite(&amps)?;
        let norm_sqr = norm_sqr_of(&amps);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm. Fails on (numerically) zero vectors.
    pub fn normalized(amps: [Complex64; N]) -> Result<Self> {
        #[allow(clippy::let_unit_value)]
        let () = Self::DIM_OK;
        check_finite(&amps)?;
        let norm_sqr = norm_sqr_of(&amps);
        if norm_sqr < IMPOSSIBLE_CUTOFF {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = 1.0 / norm_sqr.sqrt();
        Ok(Self {
            amps: amps.map(|a| a * scale),
        })
    }

    /// Computational basis state `|index⟩`.
    ///
    /// Panics if `index >= N`.
    pub fn basis(index: usize) -> Self {
        #[allow(clippy::let_unit_value)]
        let () = Self::DIM_OK;
        assert!(index < N, "basis index {index} out of range");
        let mut amps = [ZERO; N];
        amps[index] = ONE;
        Self { amps }
    }

    pub(crate) fn from_raw(amps: [Complex64; N]) -> Self {
        Self { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; N] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr_of(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Applies a single-qubit unitary to `qubit`.
    pub fn apply_local(&self, qubit: Qubit, u: &LocalUnitary) -> Self {
        let w = weight_in::<N>(qubit);
        let m = u.matrix();
        let mut out = self.amps;
        for i in (0..N).filter(|i| i & w == 0) {
            let (a0, a1) = (self.amps[i], self.amps[i | w]);
            out[i] = m[0][0] * a0 + m[0][1] * a1;
            out[i | w] = m[1][0] * a0 + m[1][1] * a1;
        }
        Self { amps: out }
    }

    /// Unnormalized `Π|ψ⟩`.
    pub fn project(&self, proj: &Projector) -> Result<[Complex64; N]> {
        let weights: Vec<usize> = proj.targets.iter().map(|&q| weight_in::<N>(q)).collect();
        let mask: usize = weights.iter().sum();
        let distinct = weights.iter().fold(0usize, |acc, w| acc | w) == mask;
        if !distinct || mask >= N {
            return Err(Error::InvalidProjector(format!(
                "targets {:?} do not address distinct qubits of a {N}-amplitude state",
                proj.targets
            )));
        }
        let k = weights.len();
        let local_dim = 1usize << k;
        // Offsets of each local basis state; the first target is the most significant bit.
        let offsets: Vec<usize> = (0..local_dim)
            .map(|l| {
                weights
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| (l >> (k - 1 - t)) & 1 == 1)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();

        let mut out = [ZERO; N];
        let mut local = vec![ZERO; local_dim];
        for base in (0..N).filter(|i| i & mask == 0) {
            for (slot, off) in local.iter_mut().zip(&offsets) {
                *slot = self.amps[base | off];
            }
            for v in &proj.span {
                let overlap: Complex64 = v.iter().zip(&local).map(|(vi, xi)| vi.conj() * xi).sum();
                for (off, vi) in offsets.iter().zip(v) {
                    out[base | off] += vi * overlap;
                }
            }
        }
        Ok(out)
    }

    /// `‖Π|ψ⟩‖²`.
    pub fn probability(&self, proj: &Projector) -> Result<f64> {
        Ok(norm_sqr_of(&self.project(proj)?))
    }

    /// Projective measurement branch: returns `(‖Π|ψ⟩‖², Π|ψ⟩/‖Π|ψ⟩‖)`.
    ///
    /// Branches below [`IMPOSSIBLE_CUTOFF`] yield [`Error::ImpossibleBranch`].
    pub fn measure_projective(&self, proj: &Projector) -> Result<(f64, Self)> {
        let projected = self.project(proj)?;
        let probability = norm_sqr_of(&projected);
        if probability < IMPOSSIBLE_CUTOFF {
            return Err(Error::ImpossibleBranch { probability });
        }
        let scale = 1.0 / probability.sqrt();
        Ok((
            probability,
            Self {
                amps: projected.map(|a| a * scale),
            },
        ))
    }
}

impl<const N: usize> Index<usize> for Ket<N> {
    type Output = Complex64;

    fn index(&self, index: usize) -> &Complex64 {
        &self.amps[index]
    }
}

impl Ket<4> {
    /// Product state `|a⟩ ⊗ |b⟩` of two single-qubit vectors.
    pub fn product(a: [Complex64; 2], b: [Complex64; 2]) -> Result<Self> {
        Self::new(tensor2(a, b))
    }

    pub fn singlet() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::from_raw([ZERO, h, -h, ZERO])
    }
}

impl Ket<16> {
    /// Multiplies every amplitude whose index matches `mask` by `e^{i·phase}`.
    ///
    /// The mask names at most one system and at most one pointer qubit, each
    /// with a value of 0 or 1. An empty mask would be a global phase and is
    /// rejected.
    pub fn apply_phase_on_mask(&self, mask: &[(Qubit, u8)], phase: f64) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        if mask.iter().any(|&(_, v)| v > 1) {
            return Err(Error::InvalidMask("qubit values must be 0 or 1"));
        }
        let systems = mask.iter().filter(|(q, _)| q.is_system()).count();
        if systems > 1 || mask.len() - systems > 1 {
            return Err(Error::InvalidMask(
                "at most one system and one pointer qubit may be named",
            ));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidPhase);
        }
        let select: usize = mask.iter().map(|(q, _)| q.weight()).sum();
        let want: usize = mask.iter().map(|&(q, v)| q.weight() * v as usize).sum();
        let factor = Complex64::from_polar(1.0, phase);
        let mut amps = self.amps;
        for (i, a) in amps.iter_mut().enumerate() {
            if i & select == want {
                *a *= factor;
            }
        }
        Ok(Self { amps })
    }

    /// Reduced density matrix of the system pair (pointer traced out).
    pub fn reduced_system(&self) -> [[Complex64; 4]; 4] {
        let mut rho = [[ZERO; 4]; 4];
        for (i, row) in rho.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..4)
                    .map(|p| self.amps[4 * i + p] * self.amps[4 * j + p].conj())
                    .sum();
            }
        }
        rho
    }

    /// `Tr ρ_sys²`: 1 iff the state factorizes as system ⊗ pointer.
    pub fn system_purity(&self) -> f64 {
        self.reduced_system()
            .iter()
            .flat_map(|row| row.iter())
            .map(|e| e.norm_sqr())
            .sum()
    }

    /// System factor of a (near-)product state, read off the pointer column
    /// carrying the most weight. Meaningful only when [`Self::system_purity`] is 1.
    pub fn system_factor(&self) -> Result<SystemState> {
        let column = (0..4)
            .max_by(|&p, &q| {
                let wp: f64 = (0..4).map(|i| self.amps[4 * i + p].norm_sqr()).sum();
                let wq: f64 = (0..4).map(|i| self.amps[4 * i + q].norm_sqr()).sum();
                wp.total_cmp(&wq)
            })
            .unwrap_or(0);
        SystemState::normalized(std::array::from_fn(|i| self.amps[4 * i + column]))
    }

    /// Pointer factor of a (near-)product state.
    pub fn pointer_factor(&self) -> Result<PointerState> {
        let row = (0..4)
            .max_by(|&i, &j| {
                let wi: f64 = self.amps[4 * i..4 * i + 4]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum();
                let wj: f64 = self.amps[4 * j..4 * j + 4]
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum();
                wi.total_cmp(&wj)
            })
            .unwrap_or(0);
        PointerState::normalized(std::array::from_fn(|p| self.amps[4 * row + p]))
    }
}

/// Joint state `system ⊗ pointer`.
pub fn embed(system: &SystemState, pointer: &PointerState) -> PureState {
    PureState::from_raw(std::array::from_fn(|idx| {
        system.amps[idx >> 2] * pointer.amps[idx & 3]
    }))
}

pub fn fidelity<const N: usize>(a: &Ket<N>, b: &Ket<N>) -> f64 {
    a.fidelity(b)
}

/// Purity of the reduced system state; 1 iff `state` is system ⊗ pointer.
pub fn factorization_check(state: &PureState) -> f64 {
    state.system_purity()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalUnitary {
    m: [[Complex64; 2]; 2],
}

impl LocalUnitary {
    pub const IDENTITY: Self = Self {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };
    pub const PAULI_X: Self = Self {
        m: [[ZERO, ONE], [ONE, ZERO]],
    };
    pub const PAULI_Y: Self = Self {
        m: [[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]],
    };
    pub const PAULI_Z: Self = Self {
        m: [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]],
    };
    pub const HADAMARD: Self = Self {
        m: [
            [
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            ],
            [
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(-FRAC_1_SQRT_2, 0.0),
            ],
        ],
    };

    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        check_finite(&[m[0][0], m[0][1], m[1][0], m[1][1]])?;
        let u = Self { m };
        let product = u.adjoint().compose(&u);
        let deviation = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| {
                let target = if r == c { ONE } else { ZERO };
                (product.m[r][c] - target).norm()
            })
            .fold(0.0, f64::max);
        if deviation > NORM_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(u)
    }

    /// Unitary whose columns are `first` and `second`.
    pub fn from_columns(first: [Complex64; 2], second: [Complex64; 2]) -> Result<Self> {
        Self::new([[first[0], second[0]], [first[1], second[1]]])
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        let (a, b) = (&self.m, &other.m);
        Self {
            m: std::array::from_fn(|r| {
                std::array::from_fn(|c| a[r][0] * b[0][c] + a[r][1] * b[1][c])
            }),
        }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

/// Unit Bloch vector selecting the local observable `n·σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinAxis {
    nx: f64,
    ny: f64,
    nz: f64,
}

impl SpinAxis {
    pub const X: Self = Self {
        nx: 1.0,
        ny: 0.0,
        nz: 0.0,
    };
    pub const Y: Self = Self {
        nx: 0.0,
        ny: 1.0,
        nz: 0.0,
    };
    pub const Z: Self = Self {
        nx: 0.0,
        ny: 0.0,
        nz: 1.0,
    };

    pub fn new(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm_sqr = nx * nx + ny * ny + nz * nz;
        if !norm_sqr.is_finite() || (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidAxis { norm_sqr });
        }
        Ok(Self { nx, ny, nz })
    }

    /// Normalizes an arbitrary nonzero direction.
    pub fn from_vector(nx: f64, ny: f64, nz: f64) -> Result<Self> {
        let norm_sqr = nx * nx + ny * ny + nz * nz;
        if !norm_sqr.is_finite() || norm_sqr < IMPOSSIBLE_CUTOFF {
            return Err(Error::InvalidAxis { norm_sqr });
        }
        let n = norm_sqr.sqrt();
        Ok(Self {
            nx: nx / n,
            ny: ny / n,
            nz: nz / n,
        })
    }

    pub fn components(&self) -> [f64; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn reversed(self) -> Self {
        Self {
            nx: -self.nx,
            ny: -self.ny,
            nz: -self.nz,
        }
    }

    /// `n·σ` as a 2×2 matrix.
    pub fn observable(&self) -> [[Complex64; 2]; 2] {
        [
            [
                Complex64::new(self.nz, 0.0),
                Complex64::new(self.nx, -self.ny),
            ],
            [
                Complex64::new(self.nx, self.ny),
                Complex64::new(-self.nz, 0.0),
            ],
        ]
    }

    fn angles(&self) -> (f64, f64) {
        (self.nz.clamp(-1.0, 1.0).acos(), self.ny.atan2(self.nx))
    }

    /// Eigenvector of `n·σ` with eigenvalue +1.
    pub fn up(&self) -> [Complex64; 2] {
        let (theta, phi) = self.angles();
        let (s, c) = (theta / 2.0).sin_cos();
        [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
    }

    /// Eigenvector of `n·σ` with eigenvalue −1.
    pub fn down(&self) -> [Complex64; 2] {
        let (theta, phi) = self.angles();
        let (s, c) = (theta / 2.0).sin_cos();
        [-Complex64::from_polar(s, -phi), Complex64::new(c, 0.0)]
    }

    /// Unitary mapping `|0⟩ → |up⟩` and `|1⟩ → |down⟩`.
    pub fn eigenbasis(&self) -> LocalUnitary {
        let (up, down) = (self.up(), self.down());
        LocalUnitary {
            m: [[up[0], down[0]], [up[1], down[1]]],
        }
    }
}

/// Orthogonal projector onto the span of orthonormal vectors on `targets`.
///
/// Vectors are indexed with the first target as the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    targets: Vec<Qubit>,
    span: Vec<Vec<Complex64>>,
}

impl Projector {
    pub fn new(targets: Vec<Qubit>, span: Vec<Vec<Complex64>>) -> Result<Self> {
        if targets.is_empty() || targets.len() > 4 {
            return Err(Error::InvalidProjector(format!(
                "expected 1 to 4 targets, got {}",
                targets.len()
            )));
        }
        for (i, q) in targets.iter().enumerate() {
            if targets[..i].contains(q) {
                return Err(Error::InvalidProjector(format!("duplicate target {q:?}")));
            }
        }
        let dim = 1usize << targets.len();
        if span.is_empty() || span.len() > dim {
            return Err(Error::InvalidProjector(format!(
                "rank {} impossible on a {dim}-dimensional space",
                span.len()
            )));
        }
        for v in &span {
            if v.len() != dim {
                return Err(Error::InvalidProjector(format!(
                    "vector of length {} for {dim}-dimensional targets",
                    v.len()
                )));
            }
            check_finite(v)?;
        }
        for (i, u) in span.iter().enumerate() {
            for (j, v) in span.iter().enumerate().skip(i) {
                let overlap: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { ONE } else { ZERO };
                if (overlap - target).norm() > NORM_TOLERANCE {
                    return Err(Error::InvalidProjector(format!(
                        "spanning vectors {i} and {j} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Self { targets, span })
    }

    /// Rank-1 projector onto a product of single-qubit states.
    pub fn product(factors: &[(Qubit, [Complex64; 2])]) -> Result<Self> {
        let targets = factors.iter().map(|(q, _)| *q).collect();
        let vector = factors.iter().fold(vec![ONE], |acc, (_, v)| {
            acc.iter()
                .flat_map(|a| [a * v[0], a * v[1]])
                .collect::<Vec<_>>()
        });
        Self::new(targets, vec![vector])
    }

    /// Projector onto a set of computational basis states of `targets`.
    pub fn computational(targets: Vec<Qubit>, indices: &[usize]) -> Result<Self> {
        let dim = 1usize << targets.len();
        let span = indices
            .iter()
            .map(|&idx| {
                if idx >= dim {
                    return Err(Error::InvalidProjector(format!(
                        "basis index {idx} out of range for {dim} states"
                    )));
                }
                let mut v = vec![ZERO; dim];
                v[idx] = ONE;
                Ok(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(targets, span)
    }

    /// Rank-1 projector onto a two-qubit state on the given pair of qubits.
    pub fn onto_pair(a: Qubit, b: Qubit, state: &PairState) -> Result<Self> {
        Self::new(vec![a, b], vec![state.amplitudes().to_vec()])
    }

    pub fn targets(&self) -> &[Qubit] {
        &self.targets
    }

    pub fn span(&self) -> &[Vec<Complex64>] {
        &self.span
    }

    pub fn rank(&self) -> usize {
        self.span.len()
    }
}

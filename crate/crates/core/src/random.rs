//! Random states, axes and eigenstates for sweeps and property checks.

use num_complex::Complex64;
use rand::Rng;

use crate::protocol::Sign;
use crate::qstate::{tensor2, Ket, LocalUnitary, SpinAxis, SystemState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; 1 - u keeps the logarithm finite.
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    (-2.0 * (1.0 - u).ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng))
}

/// Haar-random pure state.
pub fn ket<const N: usize, R: Rng + ?Sized>(rng: &mut R) -> Ket<N> {
    loop {
        let amps: [Complex64; N] = std::array::from_fn(|_| complex_gaussian(rng));
        if let Ok(k) = Ket::normalized(amps) {
            return k;
        }
    }
}

/// Uniformly distributed direction on the Bloch sphere.
pub fn axis<R: Rng + ?Sized>(rng: &mut R) -> SpinAxis {
    loop {
        let (x, y, z) = (gaussian(rng), gaussian(rng), gaussian(rng));
        if let Ok(a) = SpinAxis::from_vector(x, y, z) {
            return a;
        }
    }
}

/// Random single-qubit unitary: an axis eigenbasis followed by random phases.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R) -> LocalUnitary {
    let basis = axis(rng).eigenbasis();
    let phases = LocalUnitary::new([
        [
            Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
            Complex64::new(0.0, 0.0),
        ],
        [
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
        ],
    ])
    .expect("diagonal phases are unitary");
    basis.compose(&phases)
}

/// Random joint eigenstate of `σ_a ⊗ σ_b` with the given eigenvalue.
pub fn product_eigenstate<R: Rng + ?Sized>(
    rng: &mut R,
    a: &SpinAxis,
    b: &SpinAxis,
    eigenvalue: Sign,
) -> SystemState {
    let (first, second) = match eigenvalue {
        Sign::Plus => (tensor2(a.up(), b.up()), tensor2(a.down(), b.down())),
        Sign::Minus => (tensor2(a.up(), b.down()), tensor2(a.down(), b.up())),
    };
    loop {
        let (c1, c2) = (complex_gaussian(rng), complex_gaussian(rng));
        let amps = std::array::from_fn(|i| c1 * first[i] + c2 * second[i]);
        if let Ok(s) = SystemState::normalized(amps) {
            return s;
        }
    }
}

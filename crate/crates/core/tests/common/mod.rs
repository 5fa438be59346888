#![allow(dead_code)]

use petz_lab::linalg::{hermitian_part, re, ComplexMatrix, HermitianMatrix, PsdMatrix};
use petz_lab::states::{ginibre, keyed_rng, random_isometry_channel, sample_state, DensityMatrix, QuantumChannel, StateKind};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    keyed_rng(seed, 0)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    max_abs(&(a - b)) <= tol * max_abs(b).max(1.0)
}

pub fn mixed(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    sample_state(d, &StateKind::Mixed, rng).unwrap()
}

pub fn faithful(d: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    mixed(d, rng).regularized(1e-3).unwrap()
}

pub fn comparable(eta: &DensityMatrix, delta: f64, rng: &mut ChaCha8Rng) -> DensityMatrix {
    sample_state(eta.dim(), &StateKind::ComparableTo { eta: eta.clone(), delta }, rng).unwrap()
}

pub fn channel(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> QuantumChannel {
    random_isometry_channel(d_in, d_out, d_in.max(2), rng).unwrap()
}

pub fn psd(d: usize, rng: &mut ChaCha8Rng) -> PsdMatrix {
    let g = ginibre(d, d, rng);
    PsdMatrix::from_hermitian_part(&(&g * g.adjoint() + ComplexMatrix::identity(d, d) * re(0.05))).unwrap()
}

pub fn hermitian(d: usize, scale: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    HermitianMatrix::from_hermitian_part(&(hermitian_part(&ginibre(d, d, rng)) * re(scale))).unwrap()
}

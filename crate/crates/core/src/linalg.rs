//! Hermitian eigensystems, functional calculus on supports, and Schatten norms.
//!
//! Everything downstream works with dense complex matrices of dimension at most
//! 64. Positive semidefinite matrices carry their eigensystem so that complex
//! powers `A^z`, pseudo-logarithms and support projections are a rescaling of
//! cached eigenvectors rather than a fresh decomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix, row/column shape arbitrary.
pub type ComplexMatrix = DMatrix<C64>;

/// Largest dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 64;

/// Eigenvalues at or below `SUPPORT_CUTOFF * λ_max` are treated as exact zeros.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// Relative Hermiticity tolerance, measured against the largest absolute entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| re(v)),
    ))
}

/// Builds a matrix from row-major real and imaginary parts.
pub fn from_parts(rows: usize, cols: usize, re_part: &[f64], im_part: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        c(re_part[i * cols + j], im_part[i * cols + j])
    })
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 || m.nrows() > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "dimension {} outside 1..={MAX_DIM}",
            m.nrows()
        )));
    }
    Ok(m.nrows())
}

/// A square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: ComplexMatrix,
}

impl HermitianMatrix {
    /// Validates Hermiticity and stores the exactly Hermitian part.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square(&m)?;
        let scale = max_abs(&m);
        let deviation = max_abs(&(&m - m.adjoint()));
        let tolerance = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self {
            entries: hermitian_part(&m),
        })
    }

    /// Hermitian part of an arbitrary square matrix; never fails on shape-valid input.
    pub fn from_hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        check_square(m)?;
        Ok(Self {
            entries: hermitian_part(m),
        })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(diag_real(values))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.entries
    }

    pub fn eig(&self) -> Eigensystem {
        eig_hermitian(self)
    }

    /// `f(H)` through the eigendecomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let eig = self.eig();
        eig.reconstruct_with(f)
    }

    pub fn exp(&self) -> ComplexMatrix {
        self.map_spectrum(|l| re(l.exp()))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            entries: self.entries.map(|z| z * s),
        }
    }
}

impl std::ops::Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            entries: &self.entries + &rhs.entries,
        }
    }
}

/// Ascending eigenvalues and the matching unitary of eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    /// `U diag(f(λ)) U†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        spectral_sum(&self.vectors, &weights)
    }
}

/// `Σ_i w_i u_i u_i†`, skipping zero weights.
fn spectral_sum(vectors: &ComplexMatrix, weights: &[C64]) -> ComplexMatrix {
    let d = vectors.nrows();
    let active: Vec<usize> = (0..weights.len())
        .filter(|&i| weights[i] != C64::new(0.0, 0.0))
        .collect();
    if active.is_empty() {
        return ComplexMatrix::zeros(d, d);
    }
    let mut scaled = ComplexMatrix::zeros(d, active.len());
    let mut basis = ComplexMatrix::zeros(d, active.len());
    for (k, &i) in active.iter().enumerate() {
        let col = vectors.column(i);
        basis.set_column(k, &col);
        scaled.set_column(k, &(col * weights[i]));
    }
    scaled * basis.adjoint()
}

/// Eigendecomposition `H = U diag(λ) U†` with eigenvalues in ascending order.
pub fn eig_hermitian(h: &HermitianMatrix) -> Eigensystem {
    let eig = SymmetricEigen::new(h.entries.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let d = h.dim();
    let mut vectors = ComplexMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Eigensystem {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors,
    }
}

/// Positive semidefinite matrix with cached eigensystem and support.
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    base: HermitianMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    support_rank: usize,
    cutoff: f64,
}

impl PsdMatrix {
    /// Decomposes `h`; eigenvalues in `[-cutoff, 0)` are clipped to zero and
    /// anything more negative is rejected.
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let eig = h.eig();
        let lambda_max = eig.values.last().copied().unwrap_or(0.0);
        let min = eig.values.first().copied().unwrap_or(0.0);
        let cutoff = SUPPORT_CUTOFF * lambda_max.max(0.0);
        if lambda_max < 0.0 || min < -cutoff {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
                threshold: -cutoff,
            });
        }
        let eigenvalues: Vec<f64> = eig
            .values
            .iter()
            .map(|&l| if l > cutoff { l } else { 0.0 })
            .collect();
        let support_rank = eigenvalues.iter().filter(|&&l| l > 0.0).count();
        Ok(Self {
            base: h,
            eigenvalues,
            eigenvectors: eig.vectors,
            support_rank,
            cutoff,
        })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Takes the Hermitian part first; for outputs of maps that are Hermitian
    /// only up to round-off.
    pub fn from_hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::from_hermitian_part(m)?)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(values)?)
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn support_rank(&self) -> usize {
        self.support_rank
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn is_faithful(&self) -> bool {
        self.support_rank == self.dim()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `f` applied to the strictly positive eigenvalues; the kernel maps to zero.
    pub fn map_support(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let weights: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { f(l) } else { C64::new(0.0, 0.0) })
            .collect();
        spectral_sum(&self.eigenvectors, &weights)
    }

    /// Principal-branch complex power on the support.
    pub fn power(&self, z: C64) -> ComplexMatrix {
        self.map_support(|l| (z * l.ln()).exp())
    }

    pub fn real_power(&self, s: f64) -> ComplexMatrix {
        self.map_support(|l| re(l.powf(s)))
    }

    /// Real power returned as a PSD matrix with its eigensystem reused.
    pub fn real_power_psd(&self, s: f64) -> PsdMatrix {
        let eigenvalues: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if l > 0.0 { l.powf(s) } else { 0.0 })
            .collect();
        let lambda_max = eigenvalues.iter().cloned().fold(0.0, f64::max);
        let matrix = spectral_sum(
            &self.eigenvectors,
            &eigenvalues.iter().map(|&l| re(l)).collect::<Vec<_>>(),
        );
        PsdMatrix {
            base: HermitianMatrix {
                entries: hermitian_part(&matrix),
            },
            support_rank: self.support_rank,
            eigenvalues,
            eigenvectors: self.eigenvectors.clone(),
            cutoff: SUPPORT_CUTOFF * lambda_max,
        }
    }

    /// Natural logarithm on the support, zero on the kernel.
    pub fn log(&self) -> ComplexMatrix {
        self.map_support(|l| re(l.ln()))
    }

    pub fn support_projection(&self) -> ComplexMatrix {
        self.map_support(|_| re(1.0))
    }

    /// Scales to unit trace.
    pub fn normalized(&self) -> Result<PsdMatrix> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(Error::InvalidParameter("zero matrix cannot be normalized".into()));
        }
        PsdMatrix::from_matrix(self.matrix().map(|z| z / t))
    }

    /// Mixes with `I/d`: `(1 − δ) A + δ tr(A) I/d`.
    pub fn mixed_with_identity(&self, delta: f64) -> Result<PsdMatrix> {
        let d = self.dim() as f64;
        let t = self.trace();
        let m = self.matrix().map(|z| z * (1.0 - delta)) + identity(self.dim()).map(|z| z * (delta * t / d));
        PsdMatrix::from_matrix(m)
    }
}

pub fn matrix_power(a: &PsdMatrix, z: C64) -> ComplexMatrix {
    a.power(z)
}

pub fn support_projection(a: &PsdMatrix) -> ComplexMatrix {
    a.support_projection()
}

/// Schatten p-norm `(Σ σ_i^p)^{1/p}`; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(a: &ComplexMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("Schatten exponent {p} < 1")));
    }
    Ok(schatten_from_singular_values(&singular_values(a), p))
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.singular_values().iter().copied().collect()
}

/// Schatten norm from singular values; valid also for quasi-norm exponents
/// `0 < p < 1`, which some identities pass through internally.
pub fn schatten_from_singular_values(sigma: &[f64], p: f64) -> f64 {
    let top = sigma.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let sum: f64 = sigma.iter().map(|&s| (s / top).powf(p)).sum();
    top * sum.powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn random_hermitian(seed: u64, d: usize) -> HermitianMatrix {
        HermitianMatrix::from_hermitian_part(&random_matrix(seed, d, d)).unwrap()
    }

    fn random_pd(seed: u64, d: usize) -> PsdMatrix {
        let g = random_matrix(seed, d, d);
        PsdMatrix::from_hermitian_part(&(&g * g.adjoint() + identity(d).scale(0.1))).unwrap()
    }

    #[test]
    fn diagonal_eigensystem_is_trivial() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let eig = eig_hermitian(&h);
        assert!((eig.values[0] - 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 2.0).abs() < 1e-15);
        for i in 0..2 {
            assert!((eig.vectors[(i, i)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn pauli_x_eigenvalues_are_plus_minus_one() {
        let x = from_parts(2, 2, &[0.0, 1.0, 1.0, 0.0], &[0.0; 4]);
        let eig = HermitianMatrix::new(x).unwrap().eig();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_eig_round_trip() {
        let h = random_hermitian(7, 4);
        let eig = h.eig();
        let rebuilt = eig.reconstruct_with(re);
        let scale = operator_norm(h.matrix()).max(1.0);
        assert!(operator_norm(&(&rebuilt - h.matrix())) <= 1e-11 * scale);
        let gram = eig.vectors.adjoint() * &eig.vectors;
        assert!(max_abs(&(gram - identity(4))) < 1e-11);
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = from_parts(2, 2, &[0.0, 1.0, 0.0, 0.0], &[0.0; 4]);
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn negative_matrix_rejected_small_negatives_clipped() {
        assert!(PsdMatrix::from_real_diagonal(&[1.0, -1e-6]).is_err());
        let a = PsdMatrix::from_real_diagonal(&[1.0, -1e-13]).unwrap();
        assert_eq!(a.eigenvalues()[0], 0.0);
        assert_eq!(a.support_rank(), 1);
    }

    #[test]
    fn identity_power_is_identity() {
        let a = PsdMatrix::from_matrix(identity(3)).unwrap();
        for z in [c(0.3, -2.0), c(-1.5, 0.7), c(2.0, 0.0)] {
            assert!(max_abs(&(a.power(z) - identity(3))) < 1e-14);
        }
    }

    #[test]
    fn square_root_of_diagonal() {
        let a = PsdMatrix::from_real_diagonal(&[4.0, 9.0]).unwrap();
        let r = a.power(re(0.5));
        assert!(max_abs(&(r - diag_real(&[2.0, 3.0]))) < 1e-14);
    }

    #[test]
    fn imaginary_power_is_unitary() {
        let a = random_pd(3, 4);
        let u = a.power(c(0.0, 1.7));
        assert!(max_abs(&(u.adjoint() * &u - identity(4))) < 1e-12);
        let x = random_matrix(9, 4, 1);
        assert!(((&u * &x).norm() - x.norm()).abs() < 1e-12);
    }

    #[test]
    fn zero_power_is_support_projector() {
        let a = PsdMatrix::from_real_diagonal(&[1.0, 0.0, 0.5]).unwrap();
        assert!(max_abs(&(a.power(re(0.0)) - diag_real(&[1.0, 0.0, 1.0]))) < 1e-15);
        // negative powers vanish on the kernel
        assert!(max_abs(&(a.power(re(-1.0)) - diag_real(&[1.0, 0.0, 2.0]))) < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        assert!((schatten_norm(&identity(3), 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((schatten_norm(&diag_real(&[3.0, 4.0]), 1.0).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&diag_real(&[3.0, -4.0]), f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
        assert!(schatten_norm(&identity(2), 0.5).is_err());
    }

    #[test]
    fn schatten_matches_gram_eigenvalue_oracle() {
        // independent route: σ_i = sqrt(eig(A†A))
        let a = random_matrix(11, 4, 3);
        let gram = HermitianMatrix::from_hermitian_part(&(a.adjoint() * &a)).unwrap();
        let sigma: Vec<f64> = gram.eig().values.iter().map(|l| l.max(0.0).sqrt()).collect();
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let oracle = if p.is_infinite() {
                sigma.iter().cloned().fold(0.0, f64::max)
            } else {
                sigma.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
            };
            assert!((schatten_norm(&a, p).unwrap() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn support_projection_examples() {
        let a = PsdMatrix::from_real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(max_abs(&(a.support_projection() - diag_real(&[1.0, 0.0]))) < 1e-15);
        let b = random_pd(5, 3);
        assert!(max_abs(&(b.support_projection() - identity(3))) < 1e-11);
    }

    #[test]
    fn rank_two_projector() {
        let g = random_matrix(21, 4, 2);
        let a = PsdMatrix::from_hermitian_part(&(&g * g.adjoint())).unwrap();
        let p = a.support_projection();
        // rank oracle: count of singular values of g above tolerance
        let rank = singular_values(&g).iter().filter(|&&s| s > 1e-10).count();
        assert_eq!(a.support_rank(), rank);
        assert!((trace(&p).re - 2.0).abs() < 1e-11);
        assert!(max_abs(&(&p * &p - &p)) < 1e-11);
        assert!(max_abs(&(p.adjoint() - &p)) < 1e-15);
    }
}

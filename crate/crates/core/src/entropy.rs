//! Weighted p-norms, relative entropies, Rényi families, p-fidelities and the
//! measured relative entropy.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, re, schatten_from_singular_values, singular_values, trace, ComplexMatrix, HermitianMatrix, PsdMatrix,
};
use crate::states::DensityMatrix;

/// Mass of `ρ` outside `supp η` above which supports count as incompatible.
pub const SUPPORT_LEAK_TOL: f64 = 1e-12;

/// Kosaki weighting `x ↦ ρ^{(1−w)/p} x η^{w/p}` measured in the Schatten p-norm.
#[derive(Debug, Clone, Copy)]
pub struct WeightedNormSpec<'a> {
    pub p: f64,
    pub w: f64,
    pub left: &'a PsdMatrix,
    pub right: &'a PsdMatrix,
}

impl<'a> WeightedNormSpec<'a> {
    pub fn new(p: f64, w: f64, left: &'a PsdMatrix, right: &'a PsdMatrix) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("norm exponent {p} < 1")));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidParameter(format!("weight {w} outside [0,1]")));
        }
        if left.dim() != right.dim() {
            return Err(Error::dims(left.dim(), right.dim()));
        }
        Ok(Self { p, w, left, right })
    }

    /// The `L^1_p(ρ)` norm `‖x ρ^{1/p}‖_p`.
    pub fn right_weighted(p: f64, rho: &'a PsdMatrix) -> Result<Self> {
        Self::new(p, 1.0, rho, rho)
    }

    /// Precomputes both weights for repeated evaluation.
    pub fn prepare(&self) -> PreparedNorm {
        let inv_p = if self.p.is_infinite() { 0.0 } else { 1.0 / self.p };
        PreparedNorm {
            p: self.p,
            left: self.left.real_power((1.0 - self.w) * inv_p),
            right: self.right.real_power(self.w * inv_p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreparedNorm {
    pub p: f64,
    pub left: ComplexMatrix,
    pub right: ComplexMatrix,
}

impl PreparedNorm {
    pub fn norm(&self, x: &ComplexMatrix) -> f64 {
        let weighted = &self.left * x * &self.right;
        schatten_from_singular_values(&singular_values(&weighted), self.p)
    }
}

pub fn weighted_p_norm(x: &ComplexMatrix, spec: &WeightedNormSpec<'_>) -> Result<f64> {
    if x.nrows() != spec.left.dim() || x.ncols() != spec.right.dim() {
        return Err(Error::dims(
            format!("{}x{}", spec.left.dim(), spec.right.dim()),
            format!("{}x{}", x.nrows(), x.ncols()),
        ));
    }
    Ok(spec.prepare().norm(x))
}

/// An entropy that may be `+∞` because of incompatible supports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub support_violation: bool,
}

impl EntropyValue {
    pub fn finite(value: f64) -> Self {
        Self {
            value,
            support_violation: false,
        }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            support_violation: true,
        }
    }

    pub fn is_finite(&self) -> bool {
        !self.support_violation
    }
}

/// `tr(ρ (I − P_η))`.
pub fn support_leak(rho: &PsdMatrix, eta: &PsdMatrix) -> f64 {
    let outside = ComplexMatrix::identity(eta.dim(), eta.dim()) - eta.support_projection();
    trace(&(rho.matrix() * outside)).re.max(0.0)
}

pub fn support_contained(rho: &PsdMatrix, eta: &PsdMatrix) -> bool {
    support_leak(rho, eta) <= SUPPORT_LEAK_TOL * rho.trace().max(1.0)
}

fn entropy_term(values: &[f64]) -> f64 {
    values.iter().filter(|&&l| l > 0.0).map(|&l| l * l.ln()).sum()
}

/// `D(ρ‖η) = tr ρ(ln ρ − ln η)` with logarithms on supports.
pub fn relative_entropy(rho: &DensityMatrix, eta: &DensityMatrix) -> Result<EntropyValue> {
    relative_entropy_psd(rho.psd(), eta.psd())
}

/// Same formula for arbitrary PSD arguments.
pub fn relative_entropy_psd(rho: &PsdMatrix, eta: &PsdMatrix) -> Result<EntropyValue> {
    if rho.dim() != eta.dim() {
        return Err(Error::dims(rho.dim(), eta.dim()));
    }
    if !support_contained(rho, eta) {
        return Ok(EntropyValue::infinite());
    }
    let cross = trace(&(rho.matrix() * eta.log())).re;
    Ok(EntropyValue::finite(entropy_term(rho.eigenvalues()) - cross))
}

/// Parameter domain policy for the α-z family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenyiDomain {
    /// `α ∈ (0, 2]`, `z ≥ max(α − 1, α/2)`.
    Checked,
    /// Any `α > 0, α ≠ 1, z > 0`.
    Unchecked,
}

/// `(1/(α−1)) ln tr((ρ^{α/2z} η^{(1−α)/z} ρ^{α/2z})^z)`.
pub fn alpha_z_renyi(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    alpha: f64,
    z: f64,
    domain: RenyiDomain,
) -> Result<EntropyValue> {
    if !(alpha > 0.0 && alpha != 1.0 && z > 0.0) || !alpha.is_finite() || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha-z parameters ({alpha}, {z})")));
    }
    if domain == RenyiDomain::Checked && (alpha > 2.0 || z < (alpha - 1.0).max(alpha / 2.0)) {
        return Err(Error::InvalidParameter(format!(
            "({alpha}, {z}) outside the checked domain alpha <= 2, z >= max(alpha-1, alpha/2)"
        )));
    }
    if rho.dim() != eta.dim() {
        return Err(Error::dims(rho.dim(), eta.dim()));
    }
    if alpha > 1.0 && !support_contained(rho.psd(), eta.psd()) {
        return Ok(EntropyValue::infinite());
    }
    // A A† with A = ρ^{α/2z} η^{(1−α)/2z}; the trace is Σ σ_i^{2z}.
    let a = rho.real_power(alpha / (2.0 * z)) * eta.real_power((1.0 - alpha) / (2.0 * z));
    let sigma = singular_values(&a);
    let top = sigma.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(EntropyValue::infinite());
    }
    let log_q = 2.0 * z * top.ln() + sigma.iter().map(|s| (s / top).powf(2.0 * z)).sum::<f64>().ln();
    Ok(EntropyValue::finite(log_q / (alpha - 1.0)))
}

/// Sandwiched Rényi divergence `D_α = alpha_z_renyi(α, z = α)`.
pub fn sandwiched_renyi(rho: &DensityMatrix, eta: &DensityMatrix, alpha: f64) -> Result<EntropyValue> {
    alpha_z_renyi(rho, eta, alpha, alpha, RenyiDomain::Unchecked)
}

/// `f_p(x, y) = ‖√x √y‖_p`.
pub fn p_fidelity(x: &PsdMatrix, y: &PsdMatrix, p: f64) -> Result<f64> {
    p_fidelity_of_powers(x, y, 0.5, p)
}

/// `f_p(x^{1/p}, y^{1/p}) = ‖x^{1/2p} y^{1/2p}‖_p`, the normalization under which
/// states have fidelity at most one for every `p`.
pub fn p_fidelity_normalized(x: &PsdMatrix, y: &PsdMatrix, p: f64) -> Result<f64> {
    p_fidelity_of_powers(x, y, 0.5 / p, p)
}

fn p_fidelity_of_powers(x: &PsdMatrix, y: &PsdMatrix, s: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("fidelity exponent {p} < 1")));
    }
    if x.dim() != y.dim() {
        return Err(Error::dims(x.dim(), y.dim()));
    }
    let prod = x.real_power(s) * y.real_power(s);
    Ok(schatten_from_singular_values(&singular_values(&prod), p))
}

/// Outcome of the variational measured relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredEntropy {
    pub value: EntropyValue,
    pub iterations: usize,
    pub gradient_norm: f64,
}

pub const MEASURED_MAX_ITERATIONS: usize = 500;
pub const MEASURED_DEFAULT_TOL: f64 = 1e-9;

/// Real coordinates of a Hermitian matrix in an orthonormal basis for the trace pairing.
fn hermitian_to_vec(h: &ComplexMatrix) -> DVector<f64> {
    let d = h.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        v.push(h[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            v.push(s * h[(i, j)].re);
            v.push(s * h[(i, j)].im);
        }
    }
    DVector::from_vec(v)
}

fn vec_to_hermitian(v: &DVector<f64>, d: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut h = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h[(i, i)] = re(v[i]);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = c(s * v[k], s * v[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// `tr(ρH) + 1 − tr(η e^H)`.
pub fn measured_objective(rho: &ComplexMatrix, eta: &ComplexMatrix, h: &ComplexMatrix) -> Result<f64> {
    let hh = HermitianMatrix::from_hermitian_part(h)?;
    Ok(trace(&(rho * hh.matrix())).re + 1.0 - trace(&(eta * hh.exp())).re)
}

/// Gradient of [`measured_objective`] under the trace pairing:
/// `ρ − U (Γ ∘ U†ηU) U†` with `Γ_ij = (e^{h_i} − e^{h_j}) / (h_i − h_j)`.
pub fn measured_gradient(rho: &ComplexMatrix, eta: &ComplexMatrix, h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = HermitianMatrix::from_hermitian_part(h)?.eig();
    Ok(objective_and_gradient(rho, eta, &eig.values, &eig.vectors).1)
}

fn divided_difference(a: f64, b: f64) -> f64 {
    let (ea, eb) = (a.exp(), b.exp());
    let gap = a - b;
    if gap.abs() < 1e-8 {
        // exp(m) (1 + gap²/24) around the midpoint
        ((a + b) / 2.0).exp() * (1.0 + gap * gap / 24.0)
    } else {
        (ea - eb) / gap
    }
}

fn objective_and_gradient(
    rho: &ComplexMatrix,
    eta: &ComplexMatrix,
    h_values: &[f64],
    u: &ComplexMatrix,
) -> (f64, ComplexMatrix) {
    let d = h_values.len();
    let eta_u = u.adjoint() * eta * u;
    let rho_u = u.adjoint() * rho * u;
    let mut objective = 1.0;
    for i in 0..d {
        objective += rho_u[(i, i)].re * h_values[i] - eta_u[(i, i)].re * h_values[i].exp();
    }
    let mut kernel = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            kernel[(i, j)] = eta_u[(i, j)] * divided_difference(h_values[i], h_values[j]);
        }
    }
    let grad = crate::linalg::hermitian_part(&(rho - u * kernel * u.adjoint()));
    (objective, grad)
}

struct Evaluation {
    h: DVector<f64>,
    objective: f64,
    grad: DVector<f64>,
}

fn evaluate(rho: &ComplexMatrix, eta: &ComplexMatrix, h: DVector<f64>) -> Evaluation {
    let d = rho.nrows();
    let hm = vec_to_hermitian(&h, d);
    let eig = HermitianMatrix::from_hermitian_part(&hm).expect("square").eig();
    let (objective, g) = objective_and_gradient(rho, eta, &eig.values, &eig.vectors);
    Evaluation {
        h,
        objective,
        grad: hermitian_to_vec(&g),
    }
}

/// Restricts both operators to `supp η`, in the eigenbasis of `η`.
fn compress_to_support(rho: &PsdMatrix, eta: &PsdMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let cols: Vec<usize> = (0..eta.dim()).filter(|&i| eta.eigenvalues()[i] > 0.0).collect();
    let mut q = ComplexMatrix::zeros(eta.dim(), cols.len());
    for (k, &i) in cols.iter().enumerate() {
        q.set_column(k, &eta.eigenvectors().column(i));
    }
    let compress = |m: &ComplexMatrix| crate::linalg::hermitian_part(&(q.adjoint() * m * &q));
    (compress(rho.matrix()), compress(eta.matrix()))
}

/// `D_M(ρ‖η) = sup_H tr(ρH) + 1 − tr(η e^H)`, by BFGS ascent from `H = ln ρ − ln η`.
pub fn measured_relative_entropy(rho: &DensityMatrix, eta: &DensityMatrix, tol: f64) -> Result<MeasuredEntropy> {
    measured_relative_entropy_psd(rho.psd(), eta.psd(), tol)
}

pub fn measured_relative_entropy_psd(rho: &PsdMatrix, eta: &PsdMatrix, tol: f64) -> Result<MeasuredEntropy> {
    if rho.dim() != eta.dim() {
        return Err(Error::dims(rho.dim(), eta.dim()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("optimizer tolerance {tol} must be positive")));
    }
    if !support_contained(rho, eta) {
        return Ok(MeasuredEntropy {
            value: EntropyValue::infinite(),
            iterations: 0,
            gradient_norm: 0.0,
        });
    }
    let (r, e) = compress_to_support(rho, eta);
    let start = {
        let lr = PsdMatrix::from_hermitian_part(&r)?;
        let le = PsdMatrix::from_hermitian_part(&e)?;
        // pseudo-log of ρ is zero on its kernel; clamp that direction well below the support
        let floor = lr.eigenvalues().iter().cloned().filter(|&l| l > 0.0).fold(1.0, f64::min).ln() - 2.0;
        let log_r = lr.map_support(|l| re(l.ln())) + (ComplexMatrix::identity(r.nrows(), r.nrows()) - lr.support_projection()) * re(floor);
        hermitian_to_vec(&(log_r - le.log()))
    };
    let n = start.len();
    let mut cur = evaluate(&r, &e, start);
    let mut inv_hess = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    while iterations < MEASURED_MAX_ITERATIONS {
        let gnorm = cur.grad.norm();
        if gnorm <= tol {
            break;
        }
        iterations += 1;
        let mut direction = &inv_hess * &cur.grad;
        if direction.dot(&cur.grad) <= 0.0 {
            inv_hess = DMatrix::identity(n, n);
            direction = cur.grad.clone();
        }
        let slope = direction.dot(&cur.grad);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = evaluate(&r, &e, &cur.h + &direction * step);
            if trial.objective.is_finite() && trial.objective >= cur.objective + 1e-4 * step * slope {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            if direction != cur.grad {
                inv_hess = DMatrix::identity(n, n);
                continue;
            }
            // no ascent left at working precision
            break;
        };
        let s = &next.h - &cur.h;
        // ascent on J is descent on −J: y = ∇(−J)_{k+1} − ∇(−J)_k
        let y = &cur.grad - &next.grad;
        let sy = s.dot(&y);
        if sy > 1e-300 {
            let rho_k = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - &s * y.transpose() * rho_k;
            let right = &eye - &y * s.transpose() * rho_k;
            inv_hess = &left * &inv_hess * &right + &s * s.transpose() * rho_k;
        }
        cur = next;
    }
    let gradient_norm = cur.grad.norm();
    if gradient_norm > tol.max(1e-6) {
        return Err(Error::Optimizer {
            iterations,
            objective: cur.objective,
            gradient_norm,
        });
    }
    Ok(MeasuredEntropy {
        value: EntropyValue::finite(cur.objective),
        iterations,
        gradient_norm,
    })
}

/// Classical relative entropy `Σ p ln(p/q)`, `+∞` when `q` misses mass of `p`.
pub fn classical_relative_entropy(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a <= 0.0 {
                0.0
            } else if b <= 0.0 {
                f64::INFINITY
            } else {
                a * (a / b).ln()
            }
        })
        .sum()
}

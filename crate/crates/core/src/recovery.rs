//! Petz, rotated, universal and nonlinear recovery maps, the interpolant G(z),
//! and the logarithmic fidelity of recovery.
//!
//! With `A = η̂^{−z/2}` and `B = η^{z/2}` the rotated map is
//! `R_z(X) = B† Φ†(A† X A) B`; negative powers act on supports, so input mass
//! outside `supp η̂` is discarded.

use crate::entropy::p_fidelity;
use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_part, identity, kron, max_abs, re, ComplexMatrix, PsdMatrix, C64};
use crate::quadrature::{integrate_weighted_matrix, try_integrate_weighted, Integral, MatrixIntegral, QuadratureRule};
use crate::states::{DensityMatrix, QuantumChannel, StinespringIsometry};

/// Reference state and channel with `η̂ = Φ(η)` decomposed once.
#[derive(Debug, Clone)]
pub struct RecoveryContext {
    eta: DensityMatrix,
    channel: QuantumChannel,
    eta_hat: PsdMatrix,
}

impl RecoveryContext {
    pub fn new(eta: &DensityMatrix, channel: &QuantumChannel) -> Result<Self> {
        if eta.dim() != channel.d_in() {
            return Err(Error::dims(format!("reference state of dimension {}", channel.d_in()), eta.dim()));
        }
        let eta_hat = PsdMatrix::from_hermitian_part(&channel.apply(eta.matrix())?)?;
        Ok(Self {
            eta: eta.clone(),
            channel: channel.clone(),
            eta_hat,
        })
    }

    pub fn eta(&self) -> &DensityMatrix {
        &self.eta
    }

    pub fn eta_hat(&self) -> &PsdMatrix {
        &self.eta_hat
    }

    pub fn channel(&self) -> &QuantumChannel {
        &self.channel
    }

    /// `‖X − P X P‖_∞` for the support projector `P` of `η̂`.
    pub fn support_leak(&self, x: &ComplexMatrix) -> f64 {
        let p = self.eta_hat.support_projection();
        max_abs(&(x - &p * x * &p))
    }

    fn check_input(&self, x: &ComplexMatrix) -> Result<()> {
        let d = self.channel.d_out();
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::dims(format!("{d}x{d} output operator"), format!("{}x{}", x.nrows(), x.ncols())));
        }
        Ok(())
    }

    /// `R_z` without the strip check; `z` may have any real part.
    fn rotated_raw(&self, z: C64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let a = self.eta_hat.power(-z * 0.5);
        let b = self.eta.power(z * 0.5);
        let inner = self.channel.adjoint_apply(&(a.adjoint() * x * &a))?;
        Ok(b.adjoint() * inner * b)
    }

    pub fn rotated(&self, z: C64, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_strip(z)?;
        self.check_input(x)?;
        self.rotated_raw(z, x)
    }

    pub fn petz(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.rotated(c(1.0, 0.0), x)
    }

    /// `∫ β₀(t) R_{1+it}(X) dt`.
    pub fn universal(&self, x: &ComplexMatrix, rule: &QuadratureRule) -> Result<MatrixIntegral> {
        self.check_input(x)?;
        let mut out = integrate_weighted_matrix(|t| self.rotated_raw(c(1.0, t), x), 0.0, rule)?;
        out.value = hermitian_part(&out.value);
        Ok(out)
    }

    /// `(∫ β₀(t) R_{(1+it)/p}(X^{1/p}) dt)^p`.
    pub fn nonlinear(&self, p: f64, x: &PsdMatrix, rule: &QuadratureRule) -> Result<NonlinearRecovery> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("recovery exponent {p} < 1")));
        }
        self.check_input(x.matrix())?;
        let root = x.real_power(1.0 / p);
        let inner = integrate_weighted_matrix(|t| self.rotated_raw(c(1.0 / p, t / p), &root), 0.0, rule)?;
        let average = PsdMatrix::from_hermitian_part(&inner.value)?;
        let value = if p == 1.0 { average } else { average.real_power_psd(p) };
        Ok(NonlinearRecovery {
            value,
            quadrature_error: inner.error,
        })
    }

    /// `R_{1/2}(X̂) = η^{1/4} Φ†(η̂^{−1/4} X̂ η̂^{−1/4}) η^{1/4}`.
    pub fn vector_recover_half(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.rotated(c(0.5, 0.0), x)
    }

    /// Orthonormal eigenvectors of `η̂` spanning its support, as columns.
    pub fn support_basis(&self) -> ComplexMatrix {
        let support: Vec<usize> = (0..self.eta_hat.dim())
            .filter(|&i| self.eta_hat.eigenvalues()[i] > 0.0)
            .collect();
        let mut q = ComplexMatrix::zeros(self.eta_hat.dim(), support.len());
        for (k, &i) in support.iter().enumerate() {
            q.set_column(k, &self.eta_hat.eigenvectors().column(i));
        }
        q
    }

    /// Choi-assembled `Y ↦ R̃(Q Y Q†)` with `Q` an orthonormal basis of `supp η̂`.
    pub fn assemble_universal(&self, rule: &QuadratureRule) -> Result<QuantumChannel> {
        let q = self.support_basis();
        let r = q.ncols();
        let d_in = self.eta.dim();
        let choi = integrate_weighted_matrix(
            |t| {
                let mut j = ComplexMatrix::zeros(r * d_in, r * d_in);
                for a in 0..r {
                    for b in 0..r {
                        let unit = q.column(a) * q.column(b).adjoint();
                        let image = self.rotated_raw(c(1.0, t), &unit)?;
                        j.view_mut((a * d_in, b * d_in), (d_in, d_in)).copy_from(&image);
                    }
                }
                Ok(j)
            },
            0.0,
            rule,
        )?;
        QuantumChannel::from_choi(&hermitian_part(&choi.value), r, d_in)
    }
}

#[derive(Debug, Clone)]
pub struct NonlinearRecovery {
    pub value: PsdMatrix,
    pub quadrature_error: f64,
}

fn check_strip(z: C64) -> Result<()> {
    if !(z.re > 0.0 && z.re <= 1.0) || !z.im.is_finite() {
        return Err(Error::InvalidParameter(format!("recovery parameter {z} needs 0 < Re z <= 1")));
    }
    Ok(())
}

/// `R_z` for a fixed reference state, channel and strip parameter.
#[derive(Debug, Clone)]
pub struct RecoveryMapSpec {
    pub context: RecoveryContext,
    pub z: C64,
}

impl RecoveryMapSpec {
    pub fn new(eta: &DensityMatrix, channel: &QuantumChannel, z: C64) -> Result<Self> {
        check_strip(z)?;
        Ok(Self {
            context: RecoveryContext::new(eta, channel)?,
            z,
        })
    }

    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.context.rotated(self.z, x)
    }
}

pub fn petz_apply(eta: &DensityMatrix, channel: &QuantumChannel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    RecoveryContext::new(eta, channel)?.petz(x)
}

pub fn rotated_recovery_apply(spec: &RecoveryMapSpec, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    spec.apply(x)
}

pub fn universal_recovery_apply(
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    x: &ComplexMatrix,
    rule: &QuadratureRule,
) -> Result<ComplexMatrix> {
    Ok(RecoveryContext::new(eta, channel)?.universal(x, rule)?.value)
}

pub fn nonlinear_recovery_p(
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    p: f64,
    x: &PsdMatrix,
    rule: &QuadratureRule,
) -> Result<ComplexMatrix> {
    Ok(RecoveryContext::new(eta, channel)?.nonlinear(p, x, rule)?.value.matrix().clone())
}

pub fn vector_recover_half(eta: &DensityMatrix, channel: &QuantumChannel, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    RecoveryContext::new(eta, channel)?.vector_recover_half(x)
}

/// `G(z)` together with its `L^1_q(ρ)` norm `‖G ρ^{1/q}‖_q`.
#[derive(Debug, Clone)]
pub struct InterpolantPoint {
    pub z: C64,
    pub g: ComplexMatrix,
    pub q: f64,
    pub weighted_norm: f64,
}

/// State pair, channel and dilation with all four densities decomposed once.
#[derive(Debug, Clone)]
pub struct InterpolantContext {
    rho: PsdMatrix,
    eta: PsdMatrix,
    rho_hat: PsdMatrix,
    eta_hat: PsdMatrix,
    isometry: StinespringIsometry,
}

impl InterpolantContext {
    pub fn new(rho: &DensityMatrix, eta: &DensityMatrix, channel: &QuantumChannel) -> Result<Self> {
        Self::with_isometry(rho, eta, channel, channel.stinespring())
    }

    pub fn with_isometry(
        rho: &DensityMatrix,
        eta: &DensityMatrix,
        channel: &QuantumChannel,
        isometry: StinespringIsometry,
    ) -> Result<Self> {
        if rho.dim() != eta.dim() || rho.dim() != channel.d_in() {
            return Err(Error::dims(channel.d_in(), rho.dim()));
        }
        if isometry.d_in != channel.d_in() || isometry.d_out != channel.d_out() {
            return Err(Error::dims(
                format!("isometry for {} -> {}", channel.d_in(), channel.d_out()),
                format!("{} -> {}", isometry.d_in, isometry.d_out),
            ));
        }
        Ok(Self {
            rho: rho.psd().clone(),
            eta: eta.psd().clone(),
            rho_hat: PsdMatrix::from_hermitian_part(&channel.apply(rho.matrix())?)?,
            eta_hat: PsdMatrix::from_hermitian_part(&channel.apply(eta.matrix())?)?,
            isometry,
        })
    }

    /// `(ρ̂^{z/2} η̂^{−z/2} ⊗ I_env) V η^{z/2} ρ^{−z/2}`.
    pub fn g(&self, z: C64) -> ComplexMatrix {
        let half = z * 0.5;
        let left = self.rho_hat.power(half) * self.eta_hat.power(-half);
        let right = self.eta.power(half) * self.rho.power(-half);
        kron(&left, &identity(self.isometry.d_env)) * &self.isometry.v * right
    }

    /// `‖G(z) ρ^{1/q}‖_q`.
    pub fn norm(&self, z: C64, q: f64) -> Result<f64> {
        Ok(self.point(z, q)?.weighted_norm)
    }

    pub fn point(&self, z: C64, q: f64) -> Result<InterpolantPoint> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::InvalidParameter(format!("interpolant norm exponent {q} < 1")));
        }
        let g = self.g(z);
        let weight = if q.is_infinite() { self.rho.power(re(0.0)) } else { self.rho.real_power(1.0 / q) };
        let weighted_norm = crate::linalg::schatten_norm(&(&g * weight), q)?;
        Ok(InterpolantPoint { z, g, q, weighted_norm })
    }
}

/// `G(z)` with the norm taken at `q = 1/Re z` (or the supplied `q` on the imaginary axis).
pub fn interpolant_g(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    isometry: &StinespringIsometry,
    z: C64,
    q: Option<f64>,
) -> Result<InterpolantPoint> {
    let ctx = InterpolantContext::with_isometry(rho, eta, channel, isometry.clone())?;
    let q = match q {
        Some(q) => q,
        None if z.re > 0.0 => 1.0 / z.re,
        None => {
            return Err(Error::InvalidParameter(
                "a norm exponent is required on the imaginary axis".into(),
            ))
        }
    };
    ctx.point(z, q)
}

/// Fidelity values below this are reported as an infinite logarithm.
pub const FIDELITY_FLOOR: f64 = 1e-300;

/// Evaluates `FR^z(ρ) = −ln f_{1/θ}(ρ^θ, R_z(ρ̂^θ))`, `θ = Re z`.
#[derive(Debug, Clone)]
pub struct FidelityOfRecovery {
    rho: PsdMatrix,
    rho_hat: PsdMatrix,
    context: RecoveryContext,
}

impl FidelityOfRecovery {
    pub fn new(rho: &DensityMatrix, eta: &DensityMatrix, channel: &QuantumChannel) -> Result<Self> {
        let context = RecoveryContext::new(eta, channel)?;
        Ok(Self {
            rho: rho.psd().clone(),
            rho_hat: PsdMatrix::from_hermitian_part(&channel.apply(rho.matrix())?)?,
            context,
        })
    }

    pub fn context(&self) -> &RecoveryContext {
        &self.context
    }

    /// `f_{1/θ}(ρ^θ, R_z(ρ̂^θ))`.
    pub fn fidelity(&self, z: C64) -> Result<f64> {
        check_strip(z)?;
        let theta = z.re;
        self.fidelity_with(z, &self.rho.real_power_psd(theta), &self.rho_hat.real_power(theta))
    }

    fn fidelity_with(&self, z: C64, rho_theta: &PsdMatrix, rho_hat_theta: &ComplexMatrix) -> Result<f64> {
        let recovered = PsdMatrix::from_hermitian_part(&self.context.rotated_raw(z, rho_hat_theta)?)?;
        p_fidelity(rho_theta, &recovered, 1.0 / z.re)
    }

    pub fn log_fidelity(&self, z: C64) -> Result<f64> {
        Ok(neg_log(self.fidelity(z)?))
    }

    /// `∫ β₀(t) FR^{(1+it)/p} dt`.
    pub fn integrated(&self, p: f64, rule: &QuadratureRule) -> Result<Integral> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidParameter(format!("recovery exponent {p} < 1")));
        }
        let rho_theta = self.rho.real_power_psd(1.0 / p);
        let rho_hat_theta = self.rho_hat.real_power(1.0 / p);
        try_integrate_weighted(
            |t| Ok(neg_log(self.fidelity_with(c(1.0 / p, t / p), &rho_theta, &rho_hat_theta)?)),
            0.0,
            rule,
        )
    }
}

fn neg_log(f: f64) -> f64 {
    if f < FIDELITY_FLOOR {
        f64::INFINITY
    } else {
        -f.ln()
    }
}

pub fn log_fidelity_of_recovery(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    z: C64,
) -> Result<f64> {
    FidelityOfRecovery::new(rho, eta, channel)?.log_fidelity(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, schatten_norm};
    use crate::states::{ginibre, keyed_rng, make_channel, random_isometry_channel, sample_state, ChannelKind, StateKind};

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    fn instance(seed: u64, d: usize) -> (DensityMatrix, DensityMatrix, QuantumChannel) {
        let mut rng = keyed_rng(seed, 0);
        let eta = sample_state(d, &StateKind::Mixed, &mut rng).unwrap();
        let rho = sample_state(
            d,
            &StateKind::ComparableTo {
                eta: eta.clone(),
                delta: 0.2,
            },
            &mut rng,
        )
        .unwrap();
        let ch = random_isometry_channel(d, d, d, &mut rng).unwrap();
        (rho, eta, ch)
    }

    #[test]
    fn petz_fixed_point() {
        let (_, eta, ch) = instance(1, 3);
        let out = petz_apply(&eta, &ch, &ch.apply(eta.matrix()).unwrap()).unwrap();
        assert!(close(&out, eta.matrix(), 1e-10));
    }

    #[test]
    fn identity_channel_recovers_input() {
        let (rho, eta, _) = instance(2, 3);
        let id = QuantumChannel::identity(3);
        let rule = QuadratureRule::default();
        assert!(close(&petz_apply(&eta, &id, rho.matrix()).unwrap(), rho.matrix(), 1e-10));
        assert!(close(&universal_recovery_apply(&eta, &id, rho.matrix(), &rule).unwrap(), rho.matrix(), 1e-9));
        assert!(close(&vector_recover_half(&eta, &id, rho.matrix()).unwrap(), rho.matrix(), 1e-10));
    }

    #[test]
    fn pinching_recovers_block_diagonal_states() {
        let ch = make_channel(&ChannelKind::BlockPinching { blocks: vec![1, 2] }).unwrap();
        let mut rng = keyed_rng(3, 0);
        let eta = ch.apply_state(&sample_state(3, &StateKind::Mixed, &mut rng).unwrap()).unwrap();
        let rho = ch.apply_state(&sample_state(3, &StateKind::Mixed, &mut rng).unwrap()).unwrap();
        let out = petz_apply(&eta, &ch, &ch.apply(rho.matrix()).unwrap()).unwrap();
        assert!(close(&out, rho.matrix(), 1e-9));
        let rule = QuadratureRule::default();
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let rho_hat = PsdMatrix::from_matrix(ch.apply(rho.matrix()).unwrap()).unwrap();
        let nl = ctx.nonlinear(2.0, &rho_hat, &rule).unwrap();
        assert!(close(nl.value.matrix(), rho.matrix(), 1e-7));
        for z in [c(1.0, 0.0), c(0.5, 0.3), c(0.25, -1.0)] {
            assert!(log_fidelity_of_recovery(&rho, &eta, &ch, z).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn z_one_is_petz() {
        let (rho, eta, ch) = instance(4, 3);
        let x = ch.apply(rho.matrix()).unwrap();
        let spec = RecoveryMapSpec::new(&eta, &ch, c(1.0, 0.0)).unwrap();
        assert_eq!(rotated_recovery_apply(&spec, &x).unwrap(), petz_apply(&eta, &ch, &x).unwrap());
    }

    #[test]
    fn strip_parameter_checked() {
        let (_, eta, ch) = instance(5, 2);
        assert!(RecoveryMapSpec::new(&eta, &ch, c(0.0, 1.0)).is_err());
        assert!(RecoveryMapSpec::new(&eta, &ch, c(1.5, 0.0)).is_err());
    }

    #[test]
    fn rotated_fixes_powers_of_eta_hat() {
        let (_, eta, ch) = instance(6, 3);
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        for (p, t) in [(1.0, 0.7), (2.0, -1.3), (4.0, 2.5)] {
            let z = c(1.0 / p, t / p);
            let out = ctx.rotated(z, &ctx.eta_hat().real_power(1.0 / p)).unwrap();
            assert!(close(&out, &eta.real_power(1.0 / p), 1e-9));
        }
    }

    #[test]
    fn rotation_structure() {
        let (rho, eta, ch) = instance(7, 3);
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let x = ch.apply(rho.matrix()).unwrap();
        let (theta, t) = (0.4, 1.1);
        let direct = ctx.rotated(c(theta, t), &x).unwrap();
        let eh = ctx.eta_hat();
        let twisted = eh.power(c(0.0, t / 2.0)) * &x * eh.power(c(0.0, -t / 2.0));
        let via = eta.power(c(0.0, -t / 2.0)) * ctx.rotated(c(theta, 0.0), &twisted).unwrap() * eta.power(c(0.0, t / 2.0));
        assert!(close(&direct, &via, 1e-9));
    }

    #[test]
    fn rotated_maps_contract_schatten_norms() {
        let (_, eta, ch) = instance(8, 3);
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let mut rng = keyed_rng(8, 1);
        for (theta, t) in [(1.0, 0.0), (0.5, 0.8), (0.25, -2.0), (0.75, 3.0)] {
            let g = ginibre(3, 3, &mut rng);
            let x = &g * g.adjoint();
            let p = 1.0 / theta;
            let out = ctx.rotated(c(theta, t), &x).unwrap();
            assert!(schatten_norm(&out, p).unwrap() <= schatten_norm(&x, p).unwrap() + 1e-9);
        }
    }

    #[test]
    fn universal_fixes_eta_and_is_cptp() {
        let (_, eta, ch) = instance(9, 2);
        let rule = QuadratureRule::default();
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let out = ctx.universal(ctx.eta_hat().matrix(), &rule).unwrap();
        assert!(close(&out.value, eta.matrix(), 1e-9));
        let assembled = ctx.assemble_universal(&rule).unwrap();
        let v = assembled.validate();
        assert!(v.tp_defect < 1e-8 && v.min_choi_eigenvalue > -1e-8);
        // assembled action matches direct quadrature
        let q = ctx.support_basis();
        let x = q.adjoint() * ctx.eta_hat().matrix() * &q;
        assert!(close(&assembled.apply(&x).unwrap(), &out.value, 1e-8));
    }

    #[test]
    fn nonlinear_reduces_and_fixes() {
        let (rho, eta, ch) = instance(10, 2);
        let rule = QuadratureRule::default();
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let rho_hat = PsdMatrix::from_hermitian_part(&ch.apply(rho.matrix()).unwrap()).unwrap();
        let lin = ctx.universal(rho_hat.matrix(), &rule).unwrap().value;
        let p1 = ctx.nonlinear(1.0, &rho_hat, &rule).unwrap();
        assert!(close(p1.value.matrix(), &lin, 1e-12));
        for p in [1.5, 2.0, 3.0] {
            let fixed = ctx.nonlinear(p, ctx.eta_hat(), &rule).unwrap();
            assert!(close(fixed.value.matrix(), eta.matrix(), 1e-8));
        }
    }

    #[test]
    fn vector_recovery_fixes_and_contracts() {
        let (_, eta, ch) = instance(11, 3);
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let fixed = ctx.vector_recover_half(&ctx.eta_hat().real_power(0.5)).unwrap();
        assert!(close(&fixed, &eta.real_power(0.5), 1e-10));
        let mut rng = keyed_rng(11, 1);
        for _ in 0..5 {
            let x = hermitian_part(&ginibre(3, 3, &mut rng));
            let out = ctx.vector_recover_half(&x).unwrap();
            assert!(out.norm() <= x.norm() + 1e-9);
        }
    }

    #[test]
    fn interpolant_boundary_and_identity() {
        let (rho, eta, ch) = instance(12, 3);
        let ctx = InterpolantContext::new(&rho, &eta, &ch).unwrap();
        for t in [-2.0, 0.0, 0.5, 3.0] {
            assert!(ctx.norm(c(0.0, t), 4.0).unwrap() <= 1.0 + 1e-9);
        }
        let fr = FidelityOfRecovery::new(&rho, &eta, &ch).unwrap();
        for theta in [0.25, 0.5, 1.0] {
            for t in [-1.0, 0.0, 1.0] {
                let z = c(theta, t);
                let lhs = ctx.norm(z, 1.0 / theta).unwrap();
                let rhs = fr.fidelity(z).unwrap();
                assert!((lhs - rhs).abs() <= 1e-8, "z = {z}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn interpolant_exact_case_has_unit_norm() {
        let (_, eta, _) = instance(13, 3);
        let u = make_channel(&ChannelKind::Unitary { dim: 3, seed: 13 }).unwrap();
        let point = interpolant_g(&eta, &eta, &u, &u.stinespring(), c(1.0, 0.0), None).unwrap();
        assert!((point.weighted_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn log_fidelity_nonnegative_and_zero_for_identity() {
        let (rho, eta, ch) = instance(14, 3);
        for z in [c(1.0, 0.0), c(0.5, 1.0), c(0.3, -0.4)] {
            assert!(log_fidelity_of_recovery(&rho, &eta, &ch, z).unwrap() >= -1e-12);
            let id = QuantumChannel::identity(3);
            assert!(log_fidelity_of_recovery(&rho, &eta, &id, z).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn log_fidelity_is_continuous() {
        let (rho, eta, ch) = instance(15, 2);
        let fr = FidelityOfRecovery::new(&rho, &eta, &ch).unwrap();
        for z in [c(0.5, 0.0), c(0.9, 2.0), c(0.2, -1.0)] {
            let a = fr.log_fidelity(z).unwrap();
            let b = fr.log_fidelity(z + c(7e-4, -7e-4)).unwrap();
            assert!((a - b).abs() <= 0.1);
        }
    }

    #[test]
    fn support_compression_of_off_support_input() {
        let eta = DensityMatrix::from_diagonal(&[0.5, 0.5, 0.0]).unwrap();
        let id = QuantumChannel::identity(3);
        let ctx = RecoveryContext::new(&eta, &id).unwrap();
        let x = diag_real(&[0.2, 0.3, 0.5]);
        assert!((ctx.support_leak(&x) - 0.5).abs() < 1e-15);
        assert!(close(&ctx.petz(&x).unwrap(), &diag_real(&[0.2, 0.3, 0.0]), 1e-14));
    }
}

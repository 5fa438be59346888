use serde::{Deserialize, Serialize};

use crate::entropy::{
    alpha_z_renyi, measured_relative_entropy_psd, p_fidelity_normalized, relative_entropy, RenyiDomain,
    WeightedNormSpec, MEASURED_DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{c, re, schatten_norm, ComplexMatrix, HermitianMatrix, PsdMatrix, C64};
use crate::quadrature::{try_integrate_weighted, QuadratureRule};
use crate::recovery::{FidelityOfRecovery, InterpolantContext, RecoveryContext};
use crate::states::{DensityMatrix, QuantumChannel};

use super::ensemble::DEFAULT_REGULARIZATION;
use super::GapReport;

/// Shared numerical settings for the checkers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSettings {
    pub rule: QuadratureRule,
    /// `δ_reg` for non-faithful inputs where a check requires faithfulness.
    pub regularization: f64,
    /// Entropy gap below which an instance is treated as sufficient.
    pub equality_tol: f64,
    pub measured_tol: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        Self {
            rule: QuadratureRule::default(),
            regularization: DEFAULT_REGULARIZATION,
            equality_tol: 1e-9,
            measured_tol: MEASURED_DEFAULT_TOL,
        }
    }
}

/// `∥R(Φ(ρ)) − ρ∥₁` below this counts as exact Petz recovery.
pub const PETZ_EXACT_TOL: f64 = 1e-7;
/// Tolerance of the interpolant/fidelity identity.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Additive slack of the interpolation check.
pub const INTERPOLATION_SLACK: f64 = 1e-6;
/// Trotter exponents recorded by [`check_gt`].
pub const TROTTER_STEPS: [f64; 3] = [0.25, 1.0 / 16.0, 1.0 / 64.0];
/// Step sequence of [`check_entropy_derivative`].
pub const DERIVATIVE_STEPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Exponent at `Re z = 0` in the entropy-derivative interpolant.
pub const DERIVATIVE_Q0: f64 = 4.0;

fn regularize(state: &DensityMatrix, delta: f64) -> Result<(DensityMatrix, bool)> {
    if state.is_faithful() || delta == 0.0 {
        Ok((state.clone(), false))
    } else {
        Ok((state.regularized(delta)?, true))
    }
}

fn same_dims(rho: &DensityMatrix, eta: &DensityMatrix, channel: Option<&QuantumChannel>) -> Result<()> {
    if rho.dim() != eta.dim() {
        return Err(Error::dims(rho.dim(), eta.dim()));
    }
    if let Some(ch) = channel {
        if ch.d_in() != rho.dim() {
            return Err(Error::dims(format!("channel input {}", rho.dim()), ch.d_in()));
        }
    }
    Ok(())
}

/// `(D(ρ∥η), D(Φ(ρ)∥Φ(η)))`.
pub fn entropy_pair(rho: &DensityMatrix, eta: &DensityMatrix, channel: &QuantumChannel) -> Result<(f64, f64)> {
    same_dims(rho, eta, Some(channel))?;
    let before = relative_entropy(rho, eta)?.value;
    let after = relative_entropy(&channel.apply_state(rho)?, &channel.apply_state(eta)?)?.value;
    Ok((before, after))
}

fn gap_of((before, after): (f64, f64)) -> f64 {
    if before == f64::INFINITY {
        f64::INFINITY
    } else {
        before - after
    }
}

fn product(factors: impl Iterator<Item = ComplexMatrix>, d: usize) -> ComplexMatrix {
    factors.fold(ComplexMatrix::identity(d, d), |acc, f| acc * f)
}

/// `ln ∥e^H∥_p` from the spectrum of `H`, stable for large exponents.
fn log_norm_of_exp(h: &HermitianMatrix, p: f64) -> f64 {
    let values = h.eig().values;
    let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + values.iter().map(|v| (p * (v - top)).exp()).sum::<f64>().ln() / p
}

/// Multivariate Araki–Lieb–Thirring:
/// `ln∥∏x_k^r∥_{p/r,w} ≤ r ∫β_r(t) ln∥∏x_k^{1+it}∥_{p,w} dt` for Kosaki norms
/// weighted by `(ρ, η)`.
pub fn check_alt(
    xs: &[PsdMatrix],
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    p: f64,
    r: f64,
    w: f64,
    settings: &CheckSettings,
) -> Result<GapReport> {
    same_dims(rho, eta, None)?;
    if xs.is_empty() || xs.iter().any(|x| x.dim() != rho.dim()) {
        return Err(Error::InvalidParameter("need at least one operator of the state dimension".into()));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidParameter(format!("exponent r = {r} outside (0,1]")));
    }
    let (rho, reg_rho) = regularize(rho, settings.regularization)?;
    let (eta, reg_eta) = regularize(eta, settings.regularization)?;
    let d = rho.dim();
    let lhs_norm = WeightedNormSpec::new(p / r, w, rho.psd(), eta.psd())?.prepare();
    let lhs = lhs_norm.norm(&product(xs.iter().map(|x| x.real_power(r)), d)).ln();
    let (rhs, error, evaluations) = if r == 1.0 {
        // β₁ is the point mass at t = 0.
        (lhs, 0.0, 0)
    } else {
        let norm = WeightedNormSpec::new(p, w, rho.psd(), eta.psd())?.prepare();
        let integral = try_integrate_weighted(
            |t| Ok(norm.norm(&product(xs.iter().map(|x| x.power(c(1.0, t))), d)).ln()),
            r,
            &settings.rule,
        )?;
        (r * integral.value, r * integral.error, integral.evaluations)
    };
    Ok(GapReport::new("alt", lhs, rhs)
        .diag("quadrature_error", error)
        .diag("evaluations", evaluations as f64)
        .diag("regularization", if reg_rho || reg_eta { settings.regularization } else { 0.0 }))
}

/// Multivariate Golden–Thompson with `ρ = e^{H₀}`:
/// `ln∥exp(H₀/p + ΣH_k)∥_p ≤ ∫β₀(t) ln∥∏e^{(1+it)H_k} ρ^{1/p}∥_p dt`.
///
/// Diagnostics `trotter(r)` hold `∥α_r − exp(H₀/p + ΣH_k)∥_p` with
/// `α_r = (ρ^{r/2p} e^{rH₁/2}⋯e^{rH_n}⋯e^{rH₁/2} ρ^{r/2p})^{1/r}`.
pub fn check_gt(hs: &[HermitianMatrix], rho: &DensityMatrix, p: f64, settings: &CheckSettings) -> Result<GapReport> {
    if hs.is_empty() || hs.iter().any(|h| h.dim() != rho.dim()) {
        return Err(Error::InvalidParameter("need at least one Hermitian operator of the state dimension".into()));
    }
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::InvalidParameter(format!("norm exponent {p} must be finite and >= 1")));
    }
    let (rho, reg) = regularize(rho, settings.regularization)?;
    let d = rho.dim();
    let h0 = HermitianMatrix::from_hermitian_part(&rho.log())?;
    let total = hs.iter().fold(h0.scale(1.0 / p), |acc, h| &acc + h);
    let lhs = log_norm_of_exp(&total, p);

    let eigs: Vec<_> = hs.iter().map(|h| h.eig()).collect();
    let weight = rho.real_power(1.0 / p);
    let integral = try_integrate_weighted(
        |t| {
            let z = c(1.0, t);
            let prod = product(eigs.iter().map(|e| e.reconstruct_with(|v| (z * v).exp())), d);
            Ok(schatten_norm(&(prod * &weight), p)?.ln())
        },
        0.0,
        &settings.rule,
    )?;
    let mut report = GapReport::new("gt", lhs, integral.value)
        .diag("quadrature_error", integral.error)
        .diag("regularization", if reg { settings.regularization } else { 0.0 });

    let target = total.exp();
    for r in TROTTER_STEPS {
        let outer = rho.real_power(r / (2.0 * p));
        let half: Vec<ComplexMatrix> = eigs.iter().map(|e| e.reconstruct_with(|v| re((0.5 * r * v).exp()))).collect();
        let n = hs.len();
        let mut s = outer.clone();
        for h in &half[..n - 1] {
            s *= h;
        }
        s *= eigs[n - 1].reconstruct_with(|v| re((r * v).exp()));
        for h in half[..n - 1].iter().rev() {
            s *= h;
        }
        s *= &outer;
        let alpha = PsdMatrix::from_hermitian_part(&s)?.real_power(1.0 / r);
        report = report.diag(format!("trotter(r={r})"), schatten_norm(&(alpha - &target), p)?);
    }
    Ok(report)
}

/// Concavity of `X ↦ ∥exp(H₀/p + ln X)∥_p` along a segment.
///
/// This holds at `p = 1` (Lieb). For `p > 1` it fails in general: with
/// `H₀ = 0` the map is the Schatten norm itself, which is convex.
pub fn check_lieb(h0: &HermitianMatrix, p: f64, x1: &PsdMatrix, x2: &PsdMatrix, lambda: f64) -> Result<GapReport> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("mixing weight {lambda} outside [0,1]")));
    }
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::InvalidParameter(format!("norm exponent {p} must be finite and >= 1")));
    }
    if !x1.is_faithful() || !x2.is_faithful() {
        return Err(Error::InvalidParameter("concavity check needs positive definite arguments".into()));
    }
    if x1.dim() != h0.dim() || x2.dim() != h0.dim() {
        return Err(Error::dims(h0.dim(), x1.dim().max(x2.dim())));
    }
    let f = |x: &PsdMatrix| -> Result<f64> {
        let h = HermitianMatrix::from_hermitian_part(&(h0.matrix() * re(1.0 / p) + x.log()))?;
        Ok(log_norm_of_exp(&h, p).exp())
    };
    let mix = PsdMatrix::from_hermitian_part(&(x1.matrix() * re(lambda) + x2.matrix() * re(1.0 - lambda)))?;
    let (f1, f2, fm) = (f(x1)?, f(x2)?, f(&mix)?);
    let lhs = lambda * f1 + (1.0 - lambda) * f2;
    let margin = if lambda == 0.0 || lambda == 1.0 { 0.0 } else { fm - lhs };
    Ok(GapReport::with_margin("lieb", lhs, fm, margin).diag("lambda", lambda))
}

/// `D(Φ(ρ)∥Φ(η)) ≤ D(ρ∥η)`.
pub fn check_dpi_relative_entropy(rho: &DensityMatrix, eta: &DensityMatrix, channel: &QuantumChannel) -> Result<GapReport> {
    let (before, after) = entropy_pair(rho, eta, channel)?;
    Ok(GapReport::new("dpi_relative_entropy", after, before))
}

/// Sandwiched Rényi data processing at `α = z = p > 1`.
pub fn check_dpi_sandwiched(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    p: f64,
) -> Result<GapReport> {
    same_dims(rho, eta, Some(channel))?;
    if p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::InvalidParameter(format!("sandwiched order {p} must be finite and > 1")));
    }
    let before = alpha_z_renyi(rho, eta, p, p, RenyiDomain::Unchecked)?.value;
    let after = alpha_z_renyi(&channel.apply_state(rho)?, &channel.apply_state(eta)?, p, p, RenyiDomain::Unchecked)?.value;
    Ok(GapReport::new("dpi_sandwiched", after, before))
}

/// `f_p(ρ, η) ≤ f_p(Φ(ρ), Φ(η))` for the normalized fidelity `∥ρ^{1/2p} η^{1/2p}∥_p`.
pub fn check_dpi_p_fidelity(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    p: f64,
) -> Result<GapReport> {
    same_dims(rho, eta, Some(channel))?;
    let before = p_fidelity_normalized(rho.psd(), eta.psd(), p)?;
    let after = p_fidelity_normalized(channel.apply_state(rho)?.psd(), channel.apply_state(eta)?.psd(), p)?;
    Ok(GapReport::new("dpi_p_fidelity", before, after))
}

/// `2p ∫β₀(t) FR^{(1+it)/p}(ρ) dt ≤ D(ρ∥η) − D(Φ(ρ)∥Φ(η))`.
pub fn check_recovery_p(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    p: f64,
    settings: &CheckSettings,
) -> Result<GapReport> {
    let (rho, reg_rho) = regularize(rho, settings.regularization)?;
    let (eta, reg_eta) = regularize(eta, settings.regularization)?;
    let gap = gap_of(entropy_pair(&rho, &eta, channel)?);
    let integral = FidelityOfRecovery::new(&rho, &eta, channel)?.integrated(p, &settings.rule)?;
    Ok(GapReport::new("recovery_p", 2.0 * p * integral.value, gap)
        .diag("entropy_gap", gap)
        .diag("quadrature_error", 2.0 * p * integral.error)
        .diag("regularization", if reg_rho || reg_eta { settings.regularization } else { 0.0 }))
}

/// `−ln f_p(ρ, R̃_p(Φ(ρ))) ≤ (D(ρ∥η) − D(Φ(ρ)∥Φ(η)))/2p` with the nonlinear
/// universal recovery `R̃_p` and the normalized p-fidelity.
pub fn check_universal_recovery(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    p: f64,
    settings: &CheckSettings,
) -> Result<GapReport> {
    let (rho, _) = regularize(rho, settings.regularization)?;
    let (eta, _) = regularize(eta, settings.regularization)?;
    let gap = gap_of(entropy_pair(&rho, &eta, channel)?);
    let ctx = RecoveryContext::new(&eta, channel)?;
    let rho_hat = channel.apply_state(&rho)?;
    let recovered = ctx.nonlinear(p, rho_hat.psd(), &settings.rule)?;
    let fidelity = p_fidelity_normalized(rho.psd(), &recovered.value, p)?;
    Ok(GapReport::new("universal_recovery", -fidelity.ln(), gap / (2.0 * p))
        .diag("entropy_gap", gap)
        .diag("fidelity", fidelity)
        .diag("quadrature_error", recovered.quadrature_error))
}

/// Which state the universal recovery map is applied to in [`check_measured_recovery`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasuredTarget {
    /// `D_M(ρ ∥ R̃(Φ(ρ)))`, the nontrivial statement.
    Rho,
    /// `D_M(ρ ∥ R̃(Φ(η))) = D_M(ρ∥η)`, trivial by the Petz fixed point.
    Eta,
}

/// `D_M(ρ ∥ R̃(Φ(ρ))) ≤ D(ρ∥η) − D(Φ(ρ)∥Φ(η))`.
pub fn check_measured_recovery(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    target: MeasuredTarget,
    settings: &CheckSettings,
) -> Result<GapReport> {
    let (rho, _) = regularize(rho, settings.regularization)?;
    let (eta, _) = regularize(eta, settings.regularization)?;
    let gap = gap_of(entropy_pair(&rho, &eta, channel)?);
    let ctx = RecoveryContext::new(&eta, channel)?;
    let input = match target {
        MeasuredTarget::Rho => channel.apply(rho.matrix())?,
        MeasuredTarget::Eta => ctx.eta_hat().matrix().clone(),
    };
    let recovered = ctx.universal(&input, &settings.rule)?;
    let recovered_psd = PsdMatrix::from_hermitian_part(&recovered.value)?;
    let measured = measured_relative_entropy_psd(rho.psd(), &recovered_psd, settings.measured_tol)?;
    Ok(GapReport::new("measured_recovery", measured.value.value, gap)
        .diag("entropy_gap", gap)
        .diag("iterations", measured.iterations as f64)
        .diag("gradient_norm", measured.gradient_norm)
        .diag("quadrature_error", recovered.error))
}

/// `∥ρ^{1/2} − R_{1/2}(ρ̂^{1/2})∥₂² ≤ gap` and `∥ρ − R_{1/2}(ρ̂^{1/2})²∥₁² ≤ 4·gap`.
pub fn check_quadratic(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    settings: &CheckSettings,
) -> Result<GapReport> {
    let (rho, _) = regularize(rho, settings.regularization)?;
    let (eta, _) = regularize(eta, settings.regularization)?;
    let gap = gap_of(entropy_pair(&rho, &eta, channel)?);
    let ctx = RecoveryContext::new(&eta, channel)?;
    let rho_hat = PsdMatrix::from_hermitian_part(&channel.apply(rho.matrix())?)?;
    let xi = ctx.vector_recover_half(&rho_hat.real_power(0.5))?;
    let two = schatten_norm(&(rho.real_power(0.5) - &xi), 2.0)?;
    let one = schatten_norm(&(rho.matrix() - &xi * &xi), 1.0)?;
    let sqrt_part = GapReport::new("quadratic", two * two, gap);
    let square_part = GapReport::new("quadratic", one * one, 4.0 * gap);
    Ok(GapReport::worst("quadratic", vec![("sqrt".into(), sqrt_part), ("square".into(), square_part)])
        .diag("entropy_gap", gap))
}

/// Equality case of data processing: a vanishing entropy gap forces exact
/// Petz recovery (and exact nonlinear recovery at `p ∈ {1, 2}`), and exact
/// Petz recovery forces a vanishing gap.
///
/// Branches, recorded as the `branch` diagnostic:
/// 0. gap ≤ `equality_tol`: `lhs` is the largest recovery error, `rhs = 10√equality_tol`;
/// 1. Petz-exact with a larger gap: `lhs` is the gap, `rhs = 0`;
/// 2. neither: consistent, `margin` is the gap.
pub fn check_petz_equality(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    settings: &CheckSettings,
) -> Result<GapReport> {
    let gap = gap_of(entropy_pair(rho, eta, channel)?);
    let ctx = RecoveryContext::new(eta, channel)?;
    let rho_hat = PsdMatrix::from_hermitian_part(&channel.apply(rho.matrix())?)?;
    let petz_error = schatten_norm(&(ctx.petz(rho_hat.matrix())? - rho.matrix()), 1.0)?;
    let report = if gap <= settings.equality_tol {
        let mut worst = petz_error;
        let mut report_diag = Vec::new();
        for p in [1.0, 2.0] {
            let recovered = ctx.nonlinear(p, &rho_hat, &settings.rule)?;
            let err = schatten_norm(&(recovered.value.matrix() - rho.matrix()), 1.0)?;
            report_diag.push((format!("nonlinear_error(p={p})"), err));
            worst = worst.max(err);
        }
        let bound = 10.0 * settings.equality_tol.sqrt();
        let mut r = GapReport::new("petz_equality", worst, bound).slack(0.0).diag("branch", 0.0);
        for (k, v) in report_diag {
            r = r.diag(k, v);
        }
        r
    } else if petz_error <= PETZ_EXACT_TOL {
        GapReport::new("petz_equality", gap, 0.0).diag("branch", 1.0)
    } else {
        GapReport::with_margin("petz_equality", 0.0, gap, gap).diag("branch", 2.0)
    };
    Ok(report.diag("entropy_gap", gap).diag("petz_error", petz_error))
}

/// Hirschman's strengthened three-line bound for `g(z) = Σ c_k e^{a_k z}`:
/// `ln|g(θ)| ≤ (1−θ)∫ln|g(it)|β_{1−θ} + θ∫ln|g(1+it)|β_θ`.
pub fn check_hirschman_scalar(coefficients: &[(C64, f64)], theta: f64, rule: &QuadratureRule) -> Result<GapReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("θ = {theta} outside (0,1)")));
    }
    if coefficients.is_empty() {
        return Err(Error::InvalidParameter("empty exponential sum".into()));
    }
    let g = |z: C64| -> C64 { coefficients.iter().map(|(ck, ak)| ck * (z * ak).exp()).sum() };
    let at_theta = g(c(theta, 0.0)).norm();
    if at_theta < 1e-12 {
        return Err(Error::InvalidParameter(format!("|g(θ)| = {at_theta:e} too close to a zero")));
    }
    let left = try_integrate_weighted(|t| Ok(g(c(0.0, t)).norm().ln()), 1.0 - theta, rule)?;
    let right = try_integrate_weighted(|t| Ok(g(c(1.0, t)).norm().ln()), theta, rule)?;
    let rhs = (1.0 - theta) * left.value + theta * right.value;
    Ok(GapReport::new("hirschman_scalar", at_theta.ln(), rhs)
        .diag("theta", theta)
        .diag("quadrature_error", (1.0 - theta) * left.error + theta * right.error))
}

/// Value at zero of the quadratic through three points (Neville).
pub fn extrapolate_to_zero(points: &[(f64, f64)]) -> f64 {
    let n = points.len();
    let mut p: Vec<f64> = points.iter().map(|(_, y)| *y).collect();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (points[i].0, points[i + k].0);
            p[i] = (xk * p[i] - xi * p[i + 1]) / (xk - xi);
        }
    }
    p[0]
}

/// `F(θ) = −(2/θ) ln∥G(θ)∥_{L^1_{q(θ)}(ρ)}` with `1/q(θ) = (1−θ)/4 + θ`;
/// `F(θ) → D(ρ∥η) − D(Φ(ρ)∥Φ(η))` as `θ → 0`.
pub fn derivative_quotient(ctx: &InterpolantContext, theta: f64) -> Result<f64> {
    let q = 1.0 / ((1.0 - theta) / DERIVATIVE_Q0 + theta);
    Ok(-2.0 / theta * ctx.norm(c(theta, 0.0), q)?.ln())
}

/// Extrapolates the difference quotients at `thetas` to zero and compares the
/// result with the entropy gap within `1e−3·max(1, gap)`.
pub fn check_entropy_derivative(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    thetas: &[f64],
) -> Result<GapReport> {
    if thetas.len() < 2 || thetas.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
        return Err(Error::InvalidParameter("need at least two steps in (0,1)".into()));
    }
    let gap = gap_of(entropy_pair(rho, eta, channel)?);
    let ctx = InterpolantContext::new(rho, eta, channel)?;
    let points = thetas
        .iter()
        .map(|&t| Ok((t, derivative_quotient(&ctx, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let limit = extrapolate_to_zero(&points);
    let tol = 1e-3 * gap.abs().max(1.0);
    let mut report = GapReport::new("entropy_derivative", (limit - gap).abs(), tol)
        .slack(0.0)
        .diag("entropy_gap", gap)
        .diag("extrapolated", limit);
    for (t, f) in points {
        report = report.diag(format!("quotient(theta={t})"), f);
    }
    Ok(report)
}

/// `∥G(z)∥_{L^1_{1/θ}(ρ)} = f_{1/θ}(ρ^θ, R_z(Φ(ρ)^θ))` at each `z = θ + it`.
pub fn check_fidelity_identity(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    zs: &[C64],
) -> Result<GapReport> {
    let ctx = InterpolantContext::new(rho, eta, channel)?;
    let fr = FidelityOfRecovery::new(rho, eta, channel)?;
    let mut worst = 0.0f64;
    for &z in zs {
        let lhs = ctx.norm(z, 1.0 / z.re)?;
        let rhs = fr.fidelity(z)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(GapReport::new("fidelity_identity", worst, IDENTITY_TOL).slack(0.0))
}

/// Interpolation of `z ↦ ∥G(z)∥_{L^1_{q(z)}(ρ)}` between `q₀` on `Re z = 0`
/// and `q₁` on `Re z = 1`, evaluated at `θ` with `1/q(θ) = (1−θ)/q₀ + θ/q₁`.
#[allow(clippy::too_many_arguments)]
pub fn check_interpolation(
    rho: &DensityMatrix,
    eta: &DensityMatrix,
    channel: &QuantumChannel,
    theta: f64,
    q0: f64,
    q1: f64,
    settings: &CheckSettings,
) -> Result<GapReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!("θ = {theta} outside (0,1)")));
    }
    let ctx = InterpolantContext::new(rho, eta, channel)?;
    let q = 1.0 / ((1.0 - theta) / q0 + theta / q1);
    let lhs = ctx.norm(c(theta, 0.0), q)?.ln();
    let left = try_integrate_weighted(|t| Ok(ctx.norm(c(0.0, t), q0)?.ln()), 1.0 - theta, &settings.rule)?;
    let right = try_integrate_weighted(|t| Ok(ctx.norm(c(1.0, t), q1)?.ln()), theta, &settings.rule)?;
    let rhs = (1.0 - theta) * left.value + theta * right.value;
    Ok(GapReport::new("interpolation", lhs, rhs)
        .slack(INTERPOLATION_SLACK)
        .diag("theta", theta)
        .diag("quadrature_error", (1.0 - theta) * left.error + theta * right.error))
}

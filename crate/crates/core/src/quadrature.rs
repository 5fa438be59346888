//! The strip densities β_θ and composite Gauss–Legendre quadrature against them.
//!
//! For θ ∈ (0,1), β_θ(t) = sin(πθ) / (2θ (cosh πt + cos πθ)) is a probability
//! density on ℝ; β₀(t) = (π/2) / (cosh πt + 1) is its θ → 0 limit. Both decay
//! like e^{−π|t|}, so integrals are truncated to [−T, T] with T = 12.

use std::f64::consts::PI;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_abs, ComplexMatrix};

pub const DEFAULT_TRUNCATION: f64 = 12.0;
pub const DEFAULT_NODES_PER_UNIT: usize = 32;
pub const DEFAULT_TARGET_TOL: f64 = 1e-9;
/// Number of doublings attempted past the base rule.
pub const DEFAULT_MAX_REFINEMENTS: usize = 3;

/// The density β_θ; θ = 0 selects β₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaWeight {
    theta: f64,
}

impl BetaWeight {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!("beta weight theta {theta} outside [0,1)")));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn density(&self, t: f64) -> f64 {
        density_unchecked(self.theta, t)
    }
}

fn density_unchecked(theta: f64, t: f64) -> f64 {
    let a = PI * t.abs();
    if a > 700.0 {
        return 0.0;
    }
    if theta == 0.0 {
        return 0.5 * PI / (a.cosh() + 1.0);
    }
    (PI * theta).sin() / (2.0 * theta * (a.cosh() + (PI * theta).cos()))
}

pub fn beta_density(theta: f64, t: f64) -> Result<f64> {
    Ok(BetaWeight::new(theta)?.density(t))
}

/// Composite Gauss–Legendre rule on [−T, T] with unit-or-finer panels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub truncation: f64,
    pub nodes_per_unit: usize,
    pub target_tol: f64,
    pub max_refinements: usize,
    #[serde(skip)]
    nodes: Vec<f64>,
    #[serde(skip)]
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(DEFAULT_TRUNCATION, DEFAULT_NODES_PER_UNIT, DEFAULT_TARGET_TOL)
            .expect("default quadrature parameters are valid")
    }
}

fn legendre_32() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(32)
            .expect("degree 32 is valid")
            .as_node_weight_pairs()
            .to_vec()
    })
}

impl QuadratureRule {
    /// `nodes_per_unit` must be a multiple of 32 or a power-of-two fraction of it
    /// (16, 8, …); panels carry 32 nodes each.
    pub fn new(truncation: f64, nodes_per_unit: usize, target_tol: f64) -> Result<Self> {
        if !(truncation > 0.0 && truncation.is_finite()) {
            return Err(Error::InvalidParameter(format!("truncation {truncation} must be positive")));
        }
        if !(target_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("target tolerance {target_tol} must be positive")));
        }
        if nodes_per_unit < 2 || !(nodes_per_unit.is_multiple_of(32) || 32usize.is_multiple_of(nodes_per_unit)) {
            return Err(Error::InvalidParameter(format!(
                "nodes per unit {nodes_per_unit} must divide or be a multiple of 32"
            )));
        }
        let mut rule = Self {
            truncation,
            nodes_per_unit,
            target_tol,
            max_refinements: DEFAULT_MAX_REFINEMENTS,
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        rule.build();
        Ok(rule)
    }

    fn build(&mut self) {
        let base = legendre_32();
        let panel = 32.0 / self.nodes_per_unit as f64;
        let panels = ((2.0 * self.truncation) / panel).ceil() as usize;
        let width = 2.0 * self.truncation / panels as f64;
        self.nodes.clear();
        self.weights.clear();
        for k in 0..panels {
            let a = -self.truncation + k as f64 * width;
            for &(x, w) in base {
                self.nodes.push(a + 0.5 * width * (x + 1.0));
                self.weights.push(0.5 * width * w);
            }
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Same rule at twice the node density.
    pub fn refined(&self) -> QuadratureRule {
        let mut next = self.clone();
        next.nodes_per_unit *= 2;
        next.build();
        next
    }

    /// Same rule at half the node density, used as the embedded error estimate.
    pub fn coarsened(&self) -> QuadratureRule {
        let mut next = self.clone();
        next.nodes_per_unit = (next.nodes_per_unit / 2).max(1);
        next.build();
        next
    }

    /// Nodes paired with `weight · β_θ(node)`; serialized rules rebuild lazily.
    pub fn weighted_nodes(&self, theta: f64) -> Result<Vec<(f64, f64)>> {
        let beta = BetaWeight::new(theta)?;
        let rule = if self.nodes.is_empty() {
            let mut r = self.clone();
            r.build();
            std::borrow::Cow::Owned(r)
        } else {
            std::borrow::Cow::Borrowed(self)
        };
        Ok(rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| (t, w * beta.density(t)))
            .collect())
    }
}

/// Quadrature value with the difference between the last two refinement levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn sum_level(f: &mut impl FnMut(f64) -> Result<f64>, rule: &QuadratureRule, theta: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (t, w) in rule.weighted_nodes(theta)? {
        acc += w * f(t)?;
    }
    Ok(acc)
}

/// ∫ f(t) β_θ(t) dt with a fallible integrand.
///
/// The base rule is compared with its half-density companion; on disagreement
/// the density doubles until two successive levels agree within `target_tol`
/// (absolute, or relative once the value exceeds 1).
pub fn try_integrate_weighted(
    mut f: impl FnMut(f64) -> Result<f64>,
    theta: f64,
    rule: &QuadratureRule,
) -> Result<Integral> {
    let mut level = rule.coarsened();
    let mut previous = sum_level(&mut f, &level, theta)?;
    let mut evaluations = level.len();
    for depth in 0..=rule.max_refinements {
        level = if depth == 0 { rule.clone() } else { level.refined() };
        let current = sum_level(&mut f, &level, theta)?;
        evaluations += level.len();
        let error = (current - previous).abs();
        if error < rule.target_tol * current.abs().max(1.0) {
            return Ok(Integral {
                value: current,
                error,
                evaluations,
            });
        }
        if !current.is_finite() || depth == rule.max_refinements {
            return Err(Error::Quadrature {
                previous,
                last: current,
            });
        }
        previous = current;
    }
    unreachable!("loop returns on its last iteration")
}

/// ∫ f(t) β_θ(t) dt.
pub fn integrate_weighted(f: impl Fn(f64) -> f64, theta: f64, rule: &QuadratureRule) -> Result<f64> {
    try_integrate_weighted(|t| Ok(f(t)), theta, rule).map(|i| i.value)
}

/// Matrix-valued quadrature value with the entrywise difference of the last two levels.
#[derive(Debug, Clone)]
pub struct MatrixIntegral {
    pub value: ComplexMatrix,
    pub error: f64,
    pub evaluations: usize,
}

fn sum_matrix_level(
    f: &mut impl FnMut(f64) -> Result<ComplexMatrix>,
    rule: &QuadratureRule,
    theta: f64,
) -> Result<ComplexMatrix> {
    let mut acc: Option<ComplexMatrix> = None;
    for (t, w) in rule.weighted_nodes(theta)? {
        let term = f(t)? * crate::linalg::re(w);
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.ok_or_else(|| Error::InvalidParameter("empty quadrature rule".into()))
}

/// ∫ F(t) β_θ(t) dt for matrix-valued F, same refinement policy as the scalar case.
pub fn integrate_weighted_matrix(
    mut f: impl FnMut(f64) -> Result<ComplexMatrix>,
    theta: f64,
    rule: &QuadratureRule,
) -> Result<MatrixIntegral> {
    let mut level = rule.coarsened();
    let mut previous = sum_matrix_level(&mut f, &level, theta)?;
    let mut evaluations = level.len();
    let mut last_error = f64::INFINITY;
    for depth in 0..=rule.max_refinements {
        level = if depth == 0 { rule.clone() } else { level.refined() };
        let current = sum_matrix_level(&mut f, &level, theta)?;
        evaluations += level.len();
        let error = max_abs(&(&current - &previous));
        last_error = error;
        if error < rule.target_tol * max_abs(&current).max(1.0) {
            return Ok(MatrixIntegral {
                value: current,
                error,
                evaluations,
            });
        }
        previous = current;
    }
    Err(Error::Quadrature {
        previous: 0.0,
        last: last_error,
    })
}

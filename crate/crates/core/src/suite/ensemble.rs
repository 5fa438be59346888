use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{ChannelJson, MatrixJson};
use crate::linalg::{diag_real, ComplexMatrix};
use crate::states::{
    haar_unitary, keyed_rng, label_hash, make_channel, random_isometry_channel, sample_state, ChannelKind,
    DensityMatrix, QuantumChannel, StateKind, Subsystem,
};

/// Default `δ_reg` mixing weight with `I/d` for non-faithful inputs.
pub const DEFAULT_REGULARIZATION: f64 = 1e-6;
/// Default comparability constant for comparable states.
pub const DEFAULT_DELTA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleStateKind {
    /// Cycles through the other kinds by instance index.
    Any,
    Pure,
    Mixed,
    NearDegenerate,
    Diagonal,
    /// `δη ≤ ρ ≤ δ⁻¹η` with `δ` from the `delta` parameter.
    Comparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleChannelKind {
    /// Cycles through the other random families by instance index.
    Any,
    Identity,
    Depolarizing,
    PartialTrace,
    Pinching,
    ConditionalExpectation,
    RandomIsometry,
    Unitary,
    /// Engineered exactly recoverable triples; overrides the state kind.
    Sufficient,
}

/// Descriptor from which instances regenerate deterministically by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEnsemble {
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    #[serde(default = "any_state")]
    pub state_kind: EnsembleStateKind,
    #[serde(default = "any_channel")]
    pub channel_kind: EnsembleChannelKind,
    /// Optional `regularization`, `delta`, `lambda`, `d_out`, `d_env`.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn any_state() -> EnsembleStateKind {
    EnsembleStateKind::Any
}

fn any_channel() -> EnsembleChannelKind {
    EnsembleChannelKind::Any
}

/// One `(ρ, η, Φ)` triple. `η` is always faithful; `ρ` is regularized when
/// it is not.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub index: usize,
    pub rho: DensityMatrix,
    pub eta: DensityMatrix,
    pub channel: QuantumChannel,
    pub state_family: String,
    pub channel_family: String,
    pub regularized: bool,
}

impl Instance {
    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "state_family": self.state_family,
            "channel_family": self.channel_family,
            "regularized": self.regularized,
            "rho": MatrixJson::from_matrix(self.rho.matrix()),
            "eta": MatrixJson::from_matrix(self.eta.matrix()),
            "channel": ChannelJson::from(self.channel.clone()),
        })
    }
}

const STATE_CYCLE: [EnsembleStateKind; 5] = [
    EnsembleStateKind::Mixed,
    EnsembleStateKind::Comparable,
    EnsembleStateKind::Pure,
    EnsembleStateKind::NearDegenerate,
    EnsembleStateKind::Diagonal,
];

const CHANNEL_CYCLE: [EnsembleChannelKind; 6] = [
    EnsembleChannelKind::RandomIsometry,
    EnsembleChannelKind::Depolarizing,
    EnsembleChannelKind::Pinching,
    EnsembleChannelKind::ConditionalExpectation,
    EnsembleChannelKind::PartialTrace,
    EnsembleChannelKind::Unitary,
];

impl InstanceEnsemble {
    pub fn new(dim: usize, count: usize, seed: u64) -> Self {
        Self {
            dim,
            count,
            seed,
            state_kind: EnsembleStateKind::Any,
            channel_kind: EnsembleChannelKind::Any,
            params: BTreeMap::new(),
        }
    }

    pub fn states(mut self, kind: EnsembleStateKind) -> Self {
        self.state_kind = kind;
        self
    }

    pub fn channels(mut self, kind: EnsembleChannelKind) -> Self {
        self.channel_kind = kind;
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn regularization(&self) -> f64 {
        self.params.get("regularization").copied().unwrap_or(DEFAULT_REGULARIZATION)
    }

    pub fn delta(&self) -> f64 {
        self.params.get("delta").copied().unwrap_or(DEFAULT_DELTA)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=crate::linalg::MAX_DIM).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!("ensemble dimension {} outside 2..=64", self.dim)));
        }
        let reg = self.regularization();
        if !(0.0..1.0).contains(&reg) {
            return Err(Error::InvalidParameter(format!("regularization {reg} outside [0,1)")));
        }
        let delta = self.delta();
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter(format!("comparability constant {delta} outside (0,1]")));
        }
        Ok(())
    }

    fn key(&self) -> u64 {
        self.seed ^ label_hash(&format!("d{}", self.dim)).rotate_left(17)
    }

    /// Generator for instance `index`; stable under reordering and threading.
    pub fn rng(&self, index: usize) -> ChaCha8Rng {
        keyed_rng(self.key(), index as u64)
    }

    /// Independent generator for check-specific auxiliary data.
    pub fn aux_rng(&self, index: usize) -> ChaCha8Rng {
        keyed_rng(self.key() ^ 0x9e37_79b9_7f4a_7c15, index as u64)
    }

    pub fn instance_id(&self, index: usize) -> String {
        format!("s{}-d{}-{:04}", self.seed, self.dim, index)
    }

    pub fn instances(&self) -> impl Iterator<Item = Result<Instance>> + '_ {
        (0..self.count).map(move |i| self.instance(i))
    }

    pub fn instance(&self, index: usize) -> Result<Instance> {
        self.validate()?;
        let mut rng = self.rng(index);
        let d = self.dim;
        let reg = self.regularization();
        let id = self.instance_id(index);
        if self.channel_kind == EnsembleChannelKind::Sufficient {
            let (rho, eta, channel, family) = sufficient_triple(d, index, &mut rng)?;
            return Ok(Instance {
                id,
                index,
                rho,
                eta,
                channel,
                state_family: "sufficient".into(),
                channel_family: family,
                regularized: false,
            });
        }
        let eta = faithful(sample_state(d, &StateKind::Mixed, &mut rng)?, reg.max(1e-9))?;
        let state_kind = match self.state_kind {
            EnsembleStateKind::Any => STATE_CYCLE[index % STATE_CYCLE.len()],
            k => k,
        };
        let raw = match state_kind {
            EnsembleStateKind::Pure => sample_state(d, &StateKind::Pure, &mut rng)?,
            EnsembleStateKind::Mixed | EnsembleStateKind::Any => sample_state(d, &StateKind::Mixed, &mut rng)?,
            EnsembleStateKind::NearDegenerate => sample_state(d, &StateKind::NearDegenerate, &mut rng)?,
            EnsembleStateKind::Diagonal => sample_state(d, &StateKind::Diagonal, &mut rng)?,
            EnsembleStateKind::Comparable => sample_state(
                d,
                &StateKind::ComparableTo {
                    eta: eta.clone(),
                    delta: self.delta(),
                },
                &mut rng,
            )?,
        };
        let regularized = !raw.is_faithful() && reg > 0.0;
        let rho = if regularized { raw.regularized(reg)? } else { raw };
        let channel_kind = match self.channel_kind {
            EnsembleChannelKind::Any => CHANNEL_CYCLE[index % CHANNEL_CYCLE.len()],
            k => k,
        };
        let (channel, channel_family) = self.random_channel(channel_kind, &mut rng)?;
        Ok(Instance {
            id,
            index,
            rho,
            eta,
            channel,
            state_family: format!("{state_kind:?}").to_lowercase(),
            channel_family,
            regularized,
        })
    }

    fn random_channel(&self, kind: EnsembleChannelKind, rng: &mut ChaCha8Rng) -> Result<(QuantumChannel, String)> {
        let d = self.dim;
        let param = |k: &str| self.params.get(k).copied();
        let channel = match kind {
            EnsembleChannelKind::Identity => QuantumChannel::identity(d),
            EnsembleChannelKind::Depolarizing => {
                let lambda = param("lambda").unwrap_or_else(|| rng.random::<f64>());
                make_channel(&ChannelKind::Depolarizing { dim: d, lambda })?
            }
            EnsembleChannelKind::Pinching => {
                let blocks = random_partition(d, rng, 2);
                rotated(make_channel(&ChannelKind::BlockPinching { blocks })?, rng)?
            }
            EnsembleChannelKind::ConditionalExpectation => {
                let blocks = random_factor_blocks(d, rng);
                rotated(make_channel(&ChannelKind::ConditionalExpectation { blocks })?, rng)?
            }
            EnsembleChannelKind::PartialTrace => match smallest_factor(d) {
                Some(a) => {
                    let traced = if rng.random::<bool>() { Subsystem::First } else { Subsystem::Second };
                    let ch = make_channel(&ChannelKind::PartialTrace { dims: [a, d / a], traced })?;
                    let u = haar_unitary(d, rng);
                    QuantumChannel::conjugation(u)?.then(&ch)?
                }
                // Prime dimension: a random channel into a smaller space.
                None => {
                    let d_out = rng.random_range(2..d.max(3));
                    random_isometry_channel(d, d_out, d, rng)?
                }
            },
            EnsembleChannelKind::RandomIsometry => {
                let d_out = param("d_out").map(|x| x as usize).unwrap_or(d);
                let d_env = param("d_env").map(|x| x as usize).unwrap_or(d);
                random_isometry_channel(d, d_out, d_env, rng)?
            }
            EnsembleChannelKind::Unitary => QuantumChannel::conjugation(haar_unitary(d, rng))?,
            EnsembleChannelKind::Any | EnsembleChannelKind::Sufficient => unreachable!("resolved by caller"),
        };
        Ok((channel, format!("{kind:?}").to_lowercase()))
    }
}

fn faithful(state: DensityMatrix, delta: f64) -> Result<DensityMatrix> {
    if state.is_faithful() {
        Ok(state)
    } else {
        state.regularized(delta)
    }
}

/// `Φ` followed by conjugation with a Haar unitary on both sides: `U Φ(U† X U) U†`.
fn rotated(ch: QuantumChannel, rng: &mut ChaCha8Rng) -> Result<QuantumChannel> {
    let u = haar_unitary(ch.d_in(), rng);
    let inward = QuantumChannel::conjugation(u.adjoint())?;
    let outward = QuantumChannel::conjugation(u)?;
    inward.then(&ch)?.then(&outward)
}

fn smallest_factor(d: usize) -> Option<usize> {
    (2..d).find(|a| d.is_multiple_of(*a))
}

/// Random composition of `d` into at least `min_parts` positive parts (when possible).
fn random_partition(d: usize, rng: &mut impl Rng, min_parts: usize) -> Vec<usize> {
    let parts = rng.random_range(min_parts.min(d)..=d);
    let mut cuts: Vec<usize> = (1..d).collect();
    for i in 0..cuts.len() {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    chosen.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut last = 0;
    for c in chosen.into_iter().chain(std::iter::once(d)) {
        sizes.push(c - last);
        last = c;
    }
    sizes
}

/// Random `(n_k, m_k)` blocks with `Σ n_k m_k = d`.
fn random_factor_blocks(d: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut left = d;
    let mut blocks = Vec::new();
    while left > 0 {
        let m = rng.random_range(1..=left);
        let n = rng.random_range(1..=left / m);
        blocks.push((n, m));
        left -= n * m;
    }
    blocks
}

/// `(ρ, η, Φ)` with `Φ` sufficient for `{ρ, η}`.
fn sufficient_triple(
    d: usize,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(DensityMatrix, DensityMatrix, QuantumChannel, String)> {
    let mixed = |rng: &mut ChaCha8Rng| -> Result<DensityMatrix> {
        faithful(sample_state(d, &StateKind::Mixed, rng)?, 1e-6)
    };
    let variants = if smallest_factor(d).is_some() { 4 } else { 3 };
    match index % variants {
        0 => {
            let blocks = random_partition(d, rng, 2);
            let ch = make_channel(&ChannelKind::BlockPinching { blocks })?;
            let rho = ch.apply_state(&mixed(rng)?)?;
            let eta = ch.apply_state(&mixed(rng)?)?;
            Ok((rho, eta, ch, "pinching".into()))
        }
        1 => {
            let ch = QuantumChannel::conjugation(haar_unitary(d, rng))?;
            Ok((mixed(rng)?, mixed(rng)?, ch, "unitary".into()))
        }
        2 => {
            let blocks = random_factor_blocks(d, rng);
            let ch = make_channel(&ChannelKind::ConditionalExpectation { blocks })?;
            let rho = ch.apply_state(&mixed(rng)?)?;
            let eta = ch.apply_state(&mixed(rng)?)?;
            Ok((rho, eta, ch, "conditional_expectation".into()))
        }
        _ => {
            let a = smallest_factor(d).expect("composite");
            let b = d / a;
            let sample = |n: usize, rng: &mut ChaCha8Rng| -> Result<ComplexMatrix> {
                Ok(faithful(sample_state(n, &StateKind::Mixed, rng)?, 1e-6)?.matrix().clone())
            };
            let sigma = sample(b, rng)?;
            let rho = DensityMatrix::normalized(&crate::linalg::kron(&sample(a, rng)?, &sigma))?;
            let eta = DensityMatrix::normalized(&crate::linalg::kron(&sample(a, rng)?, &sigma))?;
            let ch = make_channel(&ChannelKind::PartialTrace {
                dims: [a, b],
                traced: Subsystem::Second,
            })?;
            Ok((rho, eta, ch, "partial_trace_product".into()))
        }
    }
}

/// Random diagonal faithful state, used by commuting sub-ensembles.
pub(crate) fn random_diagonal_state(d: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let p: Vec<f64> = (0..d).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = p.iter().sum();
    DensityMatrix::from_matrix(diag_real(&p.iter().map(|x| x / s).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::relative_entropy;
    use crate::linalg::max_abs;

    #[test]
    fn regeneration_is_deterministic() {
        let e = InstanceEnsemble::new(3, 12, 7);
        for i in 0..12 {
            let a = e.instance(i).unwrap();
            let b = e.instance(i).unwrap();
            assert_eq!(a.rho.matrix(), b.rho.matrix());
            assert_eq!(a.channel, b.channel);
            assert_eq!(a.to_json(), b.to_json());
        }
        let other = InstanceEnsemble::new(3, 12, 8).instance(0).unwrap();
        assert_ne!(other.rho.matrix(), e.instance(0).unwrap().rho.matrix());
    }

    #[test]
    fn channels_validate_and_eta_is_faithful() {
        for d in [2, 3, 4, 6] {
            let e = InstanceEnsemble::new(d, 24, 1);
            for inst in e.instances() {
                let inst = inst.unwrap();
                assert!(inst.channel.validate().pass, "{} {}", inst.id, inst.channel_family);
                assert!(inst.eta.is_faithful());
                assert!(inst.rho.is_faithful() || !inst.regularized);
            }
        }
    }

    #[test]
    fn sufficient_triples_have_zero_gap() {
        for d in [2, 3, 4] {
            let e = InstanceEnsemble::new(d, 8, 3).channels(EnsembleChannelKind::Sufficient);
            for inst in e.instances() {
                let inst = inst.unwrap();
                let rho_hat = inst.channel.apply_state(&inst.rho).unwrap();
                let eta_hat = inst.channel.apply_state(&inst.eta).unwrap();
                let gap = relative_entropy(&inst.rho, &inst.eta).unwrap().value
                    - relative_entropy(&rho_hat, &eta_hat).unwrap().value;
                assert!(gap.abs() < 1e-9, "{} {}: {gap}", inst.id, inst.channel_family);
                let recovered = crate::recovery::petz_apply(&inst.eta, &inst.channel, rho_hat.matrix()).unwrap();
                assert!(max_abs(&(recovered - inst.rho.matrix())) < 1e-9);
            }
        }
    }

    #[test]
    fn partitions_cover_dimension() {
        let mut rng = keyed_rng(5, 0);
        for d in 2..8 {
            let p = random_partition(d, &mut rng, 2);
            assert_eq!(p.iter().sum::<usize>(), d);
            assert!(p.len() >= 2 && p.iter().all(|&x| x > 0));
            let b = random_factor_blocks(d, &mut rng);
            assert_eq!(b.iter().map(|(n, m)| n * m).sum::<usize>(), d);
        }
    }

    #[test]
    fn descriptor_json_round_trip() {
        let e = InstanceEnsemble::new(2, 3, 42).param("delta", 0.3);
        let text = serde_json::to_string(&e).unwrap();
        let back: InstanceEnsemble = serde_json::from_str(&text).unwrap();
        assert_eq!(back, e);
        let minimal: InstanceEnsemble = serde_json::from_str(r#"{"dim":2,"count":3,"seed":1}"#).unwrap();
        assert_eq!(minimal.state_kind, EnsembleStateKind::Any);
    }
}

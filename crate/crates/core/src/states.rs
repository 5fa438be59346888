//! Density matrices, channels in Kraus form, and seeded random constructors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{ChannelJson, MatrixJson};
use crate::linalg::{
    c, hermitian_part, identity, kron, max_abs, operator_norm, re, trace, ComplexMatrix, HermitianMatrix,
    PsdMatrix, C64,
};

/// Trace tolerance for states.
pub const TRACE_TOL: f64 = 1e-10;
/// Tolerance on `ΣK†K − I` and on negative Choi eigenvalues.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Unit-trace positive semidefinite matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    psd: PsdMatrix,
}

impl DensityMatrix {
    pub fn new(psd: PsdMatrix) -> Result<Self> {
        let t = psd.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("state trace {t} differs from 1")));
        }
        Ok(Self { psd })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(PsdMatrix::from_matrix(m)?)
    }

    /// Normalizes a nonzero PSD matrix; the input may be Hermitian only up to round-off.
    pub fn normalized(m: &ComplexMatrix) -> Result<Self> {
        let psd = PsdMatrix::from_hermitian_part(m)?;
        Self::new(psd.normalized()?)
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(PsdMatrix::from_real_diagonal(p)?)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_diagonal(&vec![1.0 / d as f64; d]).expect("I/d is a state")
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = ComplexMatrix::from_column_slice(psi.len(), 1, psi);
        Self::normalized(&(&v * v.adjoint()))
    }

    pub fn psd(&self) -> &PsdMatrix {
        &self.psd
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.psd.matrix()
    }

    pub fn dim(&self) -> usize {
        self.psd.dim()
    }

    pub fn power(&self, z: C64) -> ComplexMatrix {
        self.psd.power(z)
    }

    pub fn real_power(&self, s: f64) -> ComplexMatrix {
        self.psd.real_power(s)
    }

    pub fn log(&self) -> ComplexMatrix {
        self.psd.log()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.psd.eigenvalues()
    }

    pub fn support_projection(&self) -> ComplexMatrix {
        self.psd.support_projection()
    }

    pub fn is_faithful(&self) -> bool {
        self.psd.is_faithful()
    }

    /// `(1 − δ) ρ + δ I/d`; the identity for δ = 0.
    pub fn regularized(&self, delta: f64) -> Result<Self> {
        if delta == 0.0 {
            return Ok(self.clone());
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("regularization {delta} outside [0,1]")));
        }
        Self::new(self.psd.mixed_with_identity(delta)?)
    }
}

/// Pass flag together with the measured defects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelValidation {
    pub pass: bool,
    pub tp_defect: f64,
    pub min_choi_eigenvalue: f64,
}

/// Completely positive map `X ↦ Σ K_i X K_i†` with `K_i` of shape `d_out × d_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl TryFrom<ChannelJson> for QuantumChannel {
    type Error = Error;

    fn try_from(j: ChannelJson) -> Result<Self> {
        let kraus = j.kraus.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?;
        QuantumChannel::new(j.d_in, j.d_out, kraus)
    }
}

impl From<QuantumChannel> for ChannelJson {
    fn from(ch: QuantumChannel) -> Self {
        ChannelJson {
            d_in: ch.d_in,
            d_out: ch.d_out,
            kraus: ch.kraus.iter().map(MatrixJson::from_matrix).collect(),
        }
    }
}

impl QuantumChannel {
    /// Checks shapes only; see [`QuantumChannel::validate`] for CPTP.
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        }
        if d_in == 0 || d_out == 0 || d_in > crate::linalg::MAX_DIM || d_out > crate::linalg::MAX_DIM {
            return Err(Error::InvalidParameter(format!("channel dimensions {d_in} -> {d_out}")));
        }
        for k in &kraus {
            if k.nrows() != d_out || k.ncols() != d_in {
                return Err(Error::dims(
                    format!("{d_out}x{d_in} Kraus operator"),
                    format!("{}x{}", k.nrows(), k.ncols()),
                ));
            }
        }
        Ok(Self { d_in, d_out, kraus })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(d, d, vec![identity(d)]).expect("identity channel")
    }

    /// `X ↦ U X U†` for a unitary or isometry `U`.
    pub fn conjugation(u: ComplexMatrix) -> Result<Self> {
        Self::new(u.ncols(), u.nrows(), vec![u])
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `‖Σ K†K − I‖_∞`.
    pub fn tp_defect(&self) -> f64 {
        let s = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * k);
        operator_norm(&(s - identity(self.d_in)))
    }

    pub fn validate(&self) -> ChannelValidation {
        let tp_defect = self.tp_defect();
        let choi = HermitianMatrix::from_hermitian_part(&self.choi()).expect("Choi matrix is square");
        let min_choi_eigenvalue = choi.eig().values[0];
        ChannelValidation {
            pass: tp_defect <= CHANNEL_TOL && min_choi_eigenvalue >= -CHANNEL_TOL,
            tp_defect,
            min_choi_eigenvalue,
        }
    }

    fn check_input(&self, x: &ComplexMatrix, d: usize, side: &str) -> Result<()> {
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::dims(
                format!("{d}x{d} {side} operator"),
                format!("{}x{}", x.nrows(), x.ncols()),
            ));
        }
        Ok(())
    }

    /// `Φ(X) = Σ K X K†`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_input(x, self.d_in, "input")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_out, self.d_out), |acc, k| acc + k * x * k.adjoint()))
    }

    /// `Φ†(Y) = Σ K† Y K`.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_input(y, self.d_out, "output")?;
        Ok(self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| acc + k.adjoint() * y * k))
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply(rho.matrix())?;
        DensityMatrix::new(PsdMatrix::from_hermitian_part(&out)?)
    }

    /// Choi matrix `Σ_{ab} |a⟩⟨b| ⊗ Φ(|a⟩⟨b|)` with the input factor first.
    pub fn choi(&self) -> ComplexMatrix {
        let (di, d_o) = (self.d_in, self.d_out);
        let mut j = ComplexMatrix::zeros(di * d_o, di * d_o);
        for k in &self.kraus {
            // vec_k[(a, i)] = K[i, a]; J = Σ_k vec_k vec_k†
            let v = ComplexMatrix::from_fn(di * d_o, 1, |r, _| k[(r % d_o, r / d_o)]);
            j += &v * v.adjoint();
        }
        j
    }

    /// Kraus operators from the eigenvectors of a Choi matrix.
    pub fn from_choi(choi: &ComplexMatrix, d_in: usize, d_out: usize) -> Result<Self> {
        if choi.nrows() != d_in * d_out || choi.ncols() != d_in * d_out {
            return Err(Error::dims(
                format!("{0}x{0} Choi matrix", d_in * d_out),
                format!("{}x{}", choi.nrows(), choi.ncols()),
            ));
        }
        let psd = PsdMatrix::from_hermitian_part(choi)?;
        let vecs = psd.eigenvectors();
        let kraus: Vec<ComplexMatrix> = psd
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0)
            .map(|(col, &l)| {
                let s = l.sqrt();
                ComplexMatrix::from_fn(d_out, d_in, |i, a| vecs[(a * d_out + i, col)] * s)
            })
            .collect();
        if kraus.is_empty() {
            return Err(Error::InvalidParameter("Choi matrix is zero".into()));
        }
        Self::new(d_in, d_out, kraus)
    }

    pub fn stinespring(&self) -> StinespringIsometry {
        StinespringIsometry::from_channel(self)
    }

    /// `Φ₂ ∘ Φ₁` (self applied first).
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if next.d_in != self.d_out {
            return Err(Error::dims(format!("input dimension {}", self.d_out), next.d_in));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for b in &next.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Self::new(self.d_in, next.d_out, kraus)
    }
}

/// Isometry `V` with `tr_env(V X V†) = Φ(X)`, rows indexed by (output, environment).
#[derive(Debug, Clone)]
pub struct StinespringIsometry {
    pub v: ComplexMatrix,
    pub d_in: usize,
    pub d_out: usize,
    pub d_env: usize,
}

impl StinespringIsometry {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        let d_env = ch.kraus.len();
        let v = ComplexMatrix::from_fn(ch.d_out * d_env, ch.d_in, |r, b| ch.kraus[r % d_env][(r / d_env, b)]);
        Self {
            v,
            d_in: ch.d_in,
            d_out: ch.d_out,
            d_env,
        }
    }

    /// `‖V†V − I‖_∞`.
    pub fn isometry_defect(&self) -> f64 {
        operator_norm(&(self.v.adjoint() * &self.v - identity(self.d_in)))
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        partial_trace(&(&self.v * x * self.v.adjoint()), self.d_out, self.d_env, Subsystem::Second)
    }

    /// `V† (Y ⊗ I_env) V`.
    pub fn adjoint_apply(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.v.adjoint() * kron(y, &identity(self.d_env)) * &self.v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `C^{da} ⊗ C^{db}` over the named factor.
pub fn partial_trace(m: &ComplexMatrix, da: usize, db: usize, traced: Subsystem) -> ComplexMatrix {
    match traced {
        Subsystem::Second => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
        Subsystem::First => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        }),
    }
}

/// Channel families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Identity { dim: usize },
    /// `X ↦ (1 − λ) X + λ tr(X) I/d`, Kraus operators from the Weyl basis.
    Depolarizing { dim: usize, lambda: f64 },
    /// Trace over one factor of `C^{dims[0]} ⊗ C^{dims[1]}`.
    PartialTrace { dims: [usize; 2], traced: Subsystem },
    /// `X ↦ Σ P X P` over orthogonal projectors summing to the identity.
    Pinching {
        #[serde(with = "crate::io::serde_matrix_vec")]
        projectors: Vec<ComplexMatrix>,
    },
    /// Pinching onto consecutive computational-basis blocks of the given sizes.
    BlockPinching { blocks: Vec<usize> },
    /// Trace-preserving conditional expectation onto `⊕_k M_{n_k} ⊗ I_{m_k}`;
    /// each block is the pair `(n_k, m_k)`.
    ConditionalExpectation { blocks: Vec<(usize, usize)> },
    /// Haar-random Stinespring isometry with Kraus rank uniform in `1..=d_env`.
    RandomIsometry { d_in: usize, d_out: usize, d_env: usize, seed: u64 },
    /// Conjugation by a Haar-random unitary.
    Unitary { dim: usize, seed: u64 },
    /// `X ↦ V X V†` with `V` embedding `C^{d_in}` as the leading block of `C^{d_out}`.
    BlockEmbedding { d_in: usize, d_out: usize },
}

pub fn make_channel(kind: &ChannelKind) -> Result<QuantumChannel> {
    let ch = match kind {
        ChannelKind::Identity { dim } => QuantumChannel::new(*dim, *dim, vec![identity(*dim)])?,
        ChannelKind::Depolarizing { dim, lambda } => depolarizing(*dim, *lambda)?,
        ChannelKind::PartialTrace { dims, traced } => partial_trace_channel(dims[0], dims[1], *traced)?,
        ChannelKind::Pinching { projectors } => pinching(projectors)?,
        ChannelKind::BlockPinching { blocks } => pinching(&block_projectors(blocks)?)?,
        ChannelKind::ConditionalExpectation { blocks } => conditional_expectation(blocks)?,
        ChannelKind::RandomIsometry {
            d_in,
            d_out,
            d_env,
            seed,
        } => random_isometry_channel(*d_in, *d_out, *d_env, &mut keyed_rng(*seed, 0))?,
        ChannelKind::Unitary { dim, seed } => {
            QuantumChannel::conjugation(haar_unitary(*dim, &mut keyed_rng(*seed, 0)))?
        }
        ChannelKind::BlockEmbedding { d_in, d_out } => {
            if d_out < d_in {
                return Err(Error::InvalidParameter(format!("cannot embed {d_in} into {d_out}")));
            }
            QuantumChannel::conjugation(ComplexMatrix::from_fn(*d_out, *d_in, |i, j| re((i == j) as u8 as f64)))?
        }
    };
    let report = ch.validate();
    if !report.pass {
        return Err(Error::InvalidParameter(format!(
            "constructed channel is not CPTP (TP defect {:.3e}, min Choi eigenvalue {:.3e})",
            report.tp_defect, report.min_choi_eigenvalue
        )));
    }
    Ok(ch)
}

/// Weyl operator `X^a Z^b` on `C^d`.
fn weyl(d: usize, a: usize, b: usize) -> ComplexMatrix {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    ComplexMatrix::from_fn(d, d, |i, j| {
        if i == (j + a) % d {
            C64::from_polar(1.0, omega * (b * j) as f64)
        } else {
            c(0.0, 0.0)
        }
    })
}

fn depolarizing(d: usize, lambda: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("depolarizing parameter {lambda} outside [0,1]")));
    }
    let d2 = (d * d) as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { 1.0 - lambda + lambda / d2 } else { lambda / d2 };
            if w > 0.0 {
                kraus.push(weyl(d, a, b) * re(w.sqrt()));
            }
        }
    }
    QuantumChannel::new(d, d, kraus)
}

fn partial_trace_channel(da: usize, db: usize, traced: Subsystem) -> Result<QuantumChannel> {
    let (keep, drop) = match traced {
        Subsystem::Second => (da, db),
        Subsystem::First => (db, da),
    };
    let kraus = (0..drop)
        .map(|k| {
            let bra = ComplexMatrix::from_fn(1, drop, |_, j| re((j == k) as u8 as f64));
            match traced {
                Subsystem::Second => kron(&identity(keep), &bra),
                Subsystem::First => kron(&bra, &identity(keep)),
            }
        })
        .collect();
    QuantumChannel::new(da * db, keep, kraus)
}

fn block_projectors(blocks: &[usize]) -> Result<Vec<ComplexMatrix>> {
    let d: usize = blocks.iter().sum();
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(Error::InvalidParameter("block sizes must be positive".into()));
    }
    let mut start = 0;
    Ok(blocks
        .iter()
        .map(|&n| {
            let p = ComplexMatrix::from_fn(d, d, |i, j| re((i == j && i >= start && i < start + n) as u8 as f64));
            start += n;
            p
        })
        .collect())
}

fn pinching(projectors: &[ComplexMatrix]) -> Result<QuantumChannel> {
    let first = projectors
        .first()
        .ok_or_else(|| Error::InvalidParameter("pinching needs projectors".into()))?;
    let d = first.nrows();
    let mut sum = ComplexMatrix::zeros(d, d);
    for (i, p) in projectors.iter().enumerate() {
        if p.nrows() != d || p.ncols() != d {
            return Err(Error::dims(format!("{d}x{d} projector"), format!("{}x{}", p.nrows(), p.ncols())));
        }
        if max_abs(&(p * p - p)) > 1e-10 || max_abs(&(p.adjoint() - p)) > 1e-10 {
            return Err(Error::InvalidParameter(format!("operand {i} is not an orthogonal projector")));
        }
        for q in &projectors[..i] {
            if max_abs(&(p * q)) > 1e-10 {
                return Err(Error::InvalidParameter("projectors are not mutually orthogonal".into()));
            }
        }
        sum += p;
    }
    if max_abs(&(sum - identity(d))) > 1e-10 {
        return Err(Error::InvalidParameter("projectors do not sum to the identity".into()));
    }
    QuantumChannel::new(d, d, projectors.to_vec())
}

fn conditional_expectation(blocks: &[(usize, usize)]) -> Result<QuantumChannel> {
    if blocks.is_empty() || blocks.iter().any(|&(n, m)| n == 0 || m == 0) {
        return Err(Error::InvalidParameter("block structure needs positive (n, m) pairs".into()));
    }
    let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
    let mut kraus = Vec::new();
    let mut offset = 0;
    for &(n, m) in blocks {
        let scale = re(1.0 / (m as f64).sqrt());
        for i in 0..m {
            for j in 0..m {
                let unit = ComplexMatrix::from_fn(m, m, |a, b| re((a == i && b == j) as u8 as f64));
                let local = kron(&identity(n), &unit) * scale;
                let mut k = ComplexMatrix::zeros(d, d);
                k.view_mut((offset, offset), (n * m, n * m)).copy_from(&local);
                kraus.push(k);
            }
        }
        offset += n * m;
    }
    QuantumChannel::new(d, d, kraus)
}

/// ChaCha8 stream `index` under the master `seed`; independent of call order.
pub fn keyed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// FNV-1a, used to derive per-label sub-seeds that are stable across builds.
pub fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar isometry `rows × cols` (`rows ≥ cols`) from a phase-corrected QR.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let qr = ginibre(rows, cols, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q.columns(0, cols).into_owned();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

pub fn random_isometry_channel(d_in: usize, d_out: usize, d_env: usize, rng: &mut impl Rng) -> Result<QuantumChannel> {
    if d_in == 0 || d_out == 0 || d_env == 0 {
        return Err(Error::InvalidParameter("random channel dimensions must be positive".into()));
    }
    let min_rank = d_in.div_ceil(d_out);
    if min_rank > d_env {
        return Err(Error::InvalidParameter(format!(
            "environment {d_env} too small for an isometry {d_in} -> {d_out}"
        )));
    }
    let rank = rng.random_range(min_rank..=d_env);
    let v = haar_isometry(d_out * rank, d_in, rng);
    let kraus = (0..rank)
        .map(|k| ComplexMatrix::from_fn(d_out, d_in, |a, b| v[(a * rank + k, b)]))
        .collect();
    QuantumChannel::new(d_in, d_out, kraus)
}

/// State families.
#[derive(Debug, Clone)]
pub enum StateKind {
    Pure,
    /// Hilbert–Schmidt random mixed state.
    Mixed,
    /// Random state with its two smallest eigenvalues split by about 1e−9 relative.
    NearDegenerate,
    /// Random diagonal state in the computational basis.
    Diagonal,
    /// State with `δη ≤ ρ ≤ δ⁻¹η`.
    ComparableTo { eta: DensityMatrix, delta: f64 },
}

pub fn random_state(dim: usize, seed: u64, kind: &StateKind) -> Result<DensityMatrix> {
    sample_state(dim, kind, &mut keyed_rng(seed, 0))
}

fn random_probabilities(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

pub fn sample_state(dim: usize, kind: &StateKind, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if !(2..=crate::linalg::MAX_DIM).contains(&dim) {
        return Err(Error::InvalidParameter(format!("state dimension {dim} outside 2..=64")));
    }
    match kind {
        StateKind::Pure => {
            let g = ginibre(dim, 1, rng);
            DensityMatrix::normalized(&(&g * g.adjoint()))
        }
        StateKind::Mixed => {
            let g = ginibre(dim, dim, rng);
            DensityMatrix::normalized(&(&g * g.adjoint()))
        }
        StateKind::NearDegenerate => {
            let mut p = random_probabilities(dim, rng);
            p.sort_by(f64::total_cmp);
            p[1] = p[0] * (1.0 + 1e-9 * rng.random::<f64>());
            let u = haar_unitary(dim, rng);
            let m = &u * crate::linalg::diag_real(&p) * u.adjoint();
            DensityMatrix::normalized(&m)
        }
        StateKind::Diagonal => DensityMatrix::from_diagonal(&random_probabilities(dim, rng)),
        StateKind::ComparableTo { eta, delta } => comparable_state(eta, *delta, rng),
    }
}

fn is_psd(m: &ComplexMatrix) -> bool {
    let h = HermitianMatrix::from_hermitian_part(m).expect("square");
    let values = h.eig().values;
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    values[0] >= -1e-12 * scale.max(1.0)
}

/// `ρ = (1 − s) η + s W` with `W` random inside `supp η`, accepted once both
/// `ρ − δη` and `δ⁻¹η − ρ` are PSD.
fn comparable_state(eta: &DensityMatrix, delta: f64, rng: &mut impl Rng) -> Result<DensityMatrix> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!("comparability constant {delta} outside (0,1]")));
    }
    let d = eta.dim();
    let p = eta.support_projection();
    let comparable = |rho: &ComplexMatrix| {
        is_psd(&(rho - eta.matrix() * re(delta))) && is_psd(&(eta.matrix() * re(1.0 / delta) - rho))
    };
    let g = ginibre(d, d, rng);
    let w = &p * &g * g.adjoint() * &p;
    let w = &w / trace(&w);
    let mut s_max = 1.0 - delta;
    loop {
        for _ in 0..100 {
            let s = s_max * rng.random::<f64>();
            let rho = hermitian_part(&(eta.matrix() * re(1.0 - s) + &w * re(s)));
            if comparable(&rho) {
                return DensityMatrix::normalized(&rho);
            }
        }
        s_max *= 0.5;
        if s_max < 1e-12 {
            return DensityMatrix::normalized(eta.matrix());
        }
    }
}

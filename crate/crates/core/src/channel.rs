//! Quantum channels in Kraus form, their Choi and Stinespring views,
//! complementary channels, tensor products and named channel families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, C64, ONE, ZERO};
use crate::serde_matrix;
use crate::state::{DensityMatrix, RANK_CUTOFF};

/// Trace-preservation tolerance on `‖Σ K†K − I‖`.
pub const TP_TOL: f64 = 1e-8;
const CP_TOL: f64 = 1e-8;

/// Named constructions whose information quantities are known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Family {
    Identity { d: usize },
    Erasure { d: usize, p: f64 },
    Depolarizing { d: usize, p: f64 },
    AmplitudeDamping { gamma: f64 },
    Dephasing { d: usize, p: f64 },
    SymmetricSide { d: usize },
}

impl Family {
    pub fn build(&self) -> Result<Channel> {
        match *self {
            Family::Identity { d } => identity(d),
            Family::Erasure { d, p } => erasure(d, p),
            Family::Depolarizing { d, p } => depolarizing(d, p),
            Family::AmplitudeDamping { gamma } => amplitude_damping(gamma),
            Family::Dephasing { d, p } => dephasing(d, p),
            Family::SymmetricSide { d } => symmetric_side_channel(d),
        }
    }

    /// Coherent information `Q¹` when it is known analytically.
    pub fn coherent_information(&self) -> Option<f64> {
        match *self {
            Family::Identity { d } => Some((d as f64).log2()),
            Family::Erasure { d, p } => Some(((1.0 - 2.0 * p) * (d as f64).log2()).max(0.0)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    /// Operator norm of `Σ K†K − I`.
    pub violation: f64,
}

/// Checks the trace-preservation condition of a Kraus set.
pub fn validate_channel(kraus: &[CMat]) -> Result<ValidationReport> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::Dimension("empty Kraus set".into()))?;
    let (dout, din) = first.shape();
    if dout == 0 || din == 0 {
        return Err(Error::Dimension("zero-sized Kraus operator".into()));
    }
    if let Some(k) = kraus.iter().find(|k| k.shape() != (dout, din)) {
        return Err(Error::Dimension(format!(
            "Kraus operator of shape {:?}, expected {:?}",
            k.shape(),
            (dout, din)
        )));
    }
    let mut sum = CMat::zeros(din, din);
    for k in kraus {
        sum += k.adjoint() * k;
    }
    let violation = linalg::op_norm(&(sum - linalg::identity(din)));
    Ok(ValidationReport { ok: violation <= TP_TOL, violation })
}

/// A CPTP map `A → B` with Kraus operators `K_k`, `k = 0..dim_env`.
///
/// The Stinespring isometry is `V|ψ⟩ = Σ_k K_k|ψ⟩ ⊗ |k⟩_E`, output factor
/// first, so the environment basis is fixed by the Kraus index order.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
    family: Option<Family>,
}

impl Channel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let report = validate_channel(&kraus)?;
        if !report.ok {
            return Err(Error::NotTp { violation: report.violation });
        }
        let (dim_out, dim_in) = kraus[0].shape();
        Ok(Channel { dim_in, dim_out, kraus, family: None })
    }

    /// Channel with Stinespring isometry `v`, rows indexed `b·dim_env + e`.
    pub fn from_stinespring(v: &CMat, dim_out: usize, dim_env: usize) -> Result<Self> {
        if v.nrows() != dim_out * dim_env || dim_out == 0 || dim_env == 0 {
            return Err(Error::Dimension(format!(
                "isometry has {} rows, expected {dim_out}·{dim_env}",
                v.nrows()
            )));
        }
        let kraus = (0..dim_env)
            .map(|e| CMat::from_fn(dim_out, v.ncols(), |b, a| v[(b * dim_env + e, a)]))
            .collect();
        Channel::new(kraus)
    }

    fn tagged(mut self, family: Family) -> Self {
        self.family = Some(family);
        self
    }

    /// Drops the family tag so that only the Kraus data is visible to the
    /// estimators.
    pub fn untagged(mut self) -> Self {
        self.family = None;
        self
    }

    pub fn family(&self) -> Option<Family> {
        self.family
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_env(&self) -> usize {
        self.kraus.len()
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// Stinespring isometry as a `(dim_out·dim_env) × dim_in` matrix.
    pub fn stinespring(&self) -> CMat {
        let (dout, denv) = (self.dim_out, self.dim_env());
        let mut v = CMat::zeros(dout * denv, self.dim_in);
        for (k, op) in self.kraus.iter().enumerate() {
            for b in 0..dout {
                for a in 0..self.dim_in {
                    v[(b * denv + k, a)] = op[(b, a)];
                }
            }
        }
        v
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Heisenberg-picture map `Y ↦ Σ K†YK`.
    pub fn apply_adjoint(&self, y: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::Dimension(format!(
                "input of dimension {} for channel with dim_in {}",
                rho.dim(),
                self.dim_in
            )));
        }
        Ok(DensityMatrix::from_trusted(self.apply(rho.matrix())))
    }

    /// Unnormalized Choi operator `(id ⊗ N)(γ)` on `A ⊗ B`.
    pub fn choi(&self) -> ChoiMatrix {
        let (din, dout) = (self.dim_in, self.dim_out);
        let n = din * dout;
        let mut j = CMat::zeros(n, n);
        for k in &self.kraus {
            let v = nalgebra::DVector::from_fn(n, |idx, _| k[(idx % dout, idx / dout)]);
            j += &v * v.adjoint();
        }
        ChoiMatrix { dim_in: din, dim_out: dout, mat: j }
    }

    /// Complementary channel `A → E`: `(E_j)_{k,i} = (K_k)_{j,i}`.
    pub fn complementary(&self) -> Channel {
        let denv = self.dim_env();
        let kraus = (0..self.dim_out)
            .map(|j| CMat::from_fn(denv, self.dim_in, |k, i| self.kraus[k][(j, i)]))
            .collect();
        let family = match self.family {
            Some(Family::SymmetricSide { d }) => Some(Family::SymmetricSide { d }),
            _ => None,
        };
        Channel { dim_in: self.dim_in, dim_out: denv, kraus, family }
    }

    /// `N ⊗ M` with Kraus operators `K_i ⊗ L_j`, `i` major.
    pub fn tensor(&self, other: &Channel) -> Channel {
        let mut kraus = Vec::with_capacity(self.dim_env() * other.dim_env());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        Channel {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
            family: None,
        }
    }

    /// Re-derives the family tag if the Kraus data matches the named
    /// construction exactly (up to 1e-12); otherwise the tag is dropped.
    fn verify_family(mut self, claimed: Option<Family>) -> Self {
        self.family = claimed.filter(|f| {
            f.build().is_ok_and(|reference| {
                reference.kraus.len() == self.kraus.len()
                    && reference
                        .kraus
                        .iter()
                        .zip(&self.kraus)
                        .all(|(a, b)| a.shape() == b.shape() && (a - b).norm() <= 1e-12)
            })
        });
        self
    }
}

/// Unnormalized Choi operator on `A ⊗ B` (trace `dim_in`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim_in: usize,
    dim_out: usize,
    mat: CMat,
}

impl ChoiMatrix {
    /// Wraps a matrix without checking the channel conditions; used for
    /// Choi operators of Hermitian-preserving maps such as channel differences.
    pub fn from_matrix(dim_in: usize, dim_out: usize, mat: CMat) -> Result<Self> {
        if mat.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::Dimension(format!(
                "Choi matrix of shape {:?} for dims {dim_in}->{dim_out}",
                mat.shape()
            )));
        }
        Ok(ChoiMatrix { dim_in, dim_out, mat })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.dim_in, self.dim_out]
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// `J^{T_B}`, the Choi operator of the output-transposed map.
    pub fn partial_transpose(&self) -> ChoiMatrix {
        ChoiMatrix {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            mat: linalg::partial_transpose(&self.mat, &self.dims(), &[1]),
        }
    }

    /// Normalized Choi state `J / dim_in`.
    pub fn state(&self) -> CMat {
        self.mat.unscale(self.dim_in as f64)
    }

    pub fn tp_violation(&self) -> f64 {
        let reduced = linalg::partial_trace(&self.mat, &self.dims(), &[0]);
        linalg::op_norm(&(reduced - linalg::identity(self.dim_in)))
    }

    pub fn scale(&self, alpha: f64) -> ChoiMatrix {
        ChoiMatrix { dim_in: self.dim_in, dim_out: self.dim_out, mat: self.mat.scale(alpha) }
    }

    pub fn sub(&self, other: &ChoiMatrix) -> Result<ChoiMatrix> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension("Choi matrices of different shape".into()));
        }
        Ok(ChoiMatrix { dim_in: self.dim_in, dim_out: self.dim_out, mat: &self.mat - &other.mat })
    }

    /// Kraus decomposition from the eigendecomposition of the Choi operator.
    pub fn to_channel(&self) -> Result<Channel> {
        let (vals, vecs) = linalg::eigh(&self.mat);
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -CP_TOL {
            return Err(Error::NotCp { min_eig: min });
        }
        let violation = self.tp_violation();
        if violation > TP_TOL {
            return Err(Error::NotTp { violation });
        }
        let dout = self.dim_out;
        let kraus: Vec<CMat> = vals
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &l)| l > RANK_CUTOFF)
            .map(|(k, &l)| {
                let s = l.sqrt();
                CMat::from_fn(dout, self.dim_in, |b, a| vecs[(a * dout + b, k)] * s)
            })
            .collect();
        if kraus.is_empty() {
            return Err(Error::NotTp { violation });
        }
        Ok(Channel { dim_in: self.dim_in, dim_out: dout, kraus, family: None })
    }
}

/// Kraus-to-Choi conversion.
pub fn kraus_to_choi(ch: &Channel) -> ChoiMatrix {
    ch.choi()
}

/// Choi-to-Kraus conversion (eigenvalues at or below 1e-12 are dropped).
pub fn choi_to_kraus(choi: &ChoiMatrix) -> Result<Channel> {
    choi.to_channel()
}

pub fn complementary_channel(ch: &Channel) -> Channel {
    ch.complementary()
}

pub fn tensor(a: &Channel, b: &Channel) -> Channel {
    a.tensor(b)
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::Parameter(format!("{name} = {p} not in [0, 1]")));
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::Parameter(format!("dimension {d} < 2")));
    }
    Ok(())
}

pub fn identity(d: usize) -> Result<Channel> {
    if d == 0 {
        return Err(Error::Parameter("dimension 0".into()));
    }
    Ok(Channel::new(vec![linalg::identity(d)])?.tagged(Family::Identity { d }))
}

/// Erasure channel with output `C^d ⊕ |e⟩`; the flag is basis vector `d`.
pub fn erasure(d: usize, p: f64) -> Result<Channel> {
    check_dim(d)?;
    check_prob("erasure probability", p)?;
    let mut kraus = Vec::with_capacity(d + 1);
    kraus.push(CMat::from_fn(d + 1, d, |r, col| {
        if r == col {
            c((1.0 - p).sqrt(), 0.0)
        } else {
            ZERO
        }
    }));
    for i in 0..d {
        let mut k = CMat::zeros(d + 1, d);
        k[(d, i)] = c(p.sqrt(), 0.0);
        kraus.push(k);
    }
    Ok(Channel::new(kraus)?.tagged(Family::Erasure { d, p }))
}

/// Generalized Pauli (Weyl) operator `X^a Z^b` in dimension `d`.
fn weyl(d: usize, a: usize, b: usize) -> CMat {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    CMat::from_fn(d, d, |r, col| {
        if r == (col + a) % d {
            C64::from_polar(1.0, omega * (b * col) as f64)
        } else {
            ZERO
        }
    })
}

/// `ρ ↦ (1-p)ρ + p I/d`, Kraus operators built from the Weyl basis.
pub fn depolarizing(d: usize, p: f64) -> Result<Channel> {
    check_dim(d)?;
    check_prob("depolarizing parameter", p)?;
    let d2 = (d * d) as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let w = if a == 0 && b == 0 { 1.0 - p + p / d2 } else { p / d2 };
            kraus.push(weyl(d, a, b).scale(w.sqrt()));
        }
    }
    Ok(Channel::new(kraus)?.tagged(Family::Depolarizing { d, p }))
}

pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    check_prob("damping parameter", gamma)?;
    let k0 = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c((1.0 - gamma).sqrt(), 0.0)]);
    let k1 = CMat::from_row_slice(2, 2, &[ZERO, c(gamma.sqrt(), 0.0), ZERO, ZERO]);
    Ok(Channel::new(vec![k0, k1])?.tagged(Family::AmplitudeDamping { gamma }))
}

/// `ρ ↦ (1-p)ρ + p Σ_k |k⟩⟨k|ρ|k⟩⟨k|`.
pub fn dephasing(d: usize, p: f64) -> Result<Channel> {
    check_dim(d)?;
    check_prob("dephasing parameter", p)?;
    let mut kraus = Vec::with_capacity(d + 1);
    if p < 1.0 {
        kraus.push(linalg::identity(d).scale((1.0 - p).sqrt()));
    }
    for k in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(k, k)] = c(p.sqrt(), 0.0);
        kraus.push(m);
    }
    Ok(Channel::new(kraus)?.tagged(Family::Dephasing { d, p }))
}

/// Isometry from `C^{d(d+1)/2}` onto the symmetric subspace of `C^d ⊗ C^d`.
pub fn symmetric_embedding(d: usize) -> CMat {
    let n = d * (d + 1) / 2;
    let mut s = CMat::zeros(d * d, n);
    let mut col = 0;
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i..d {
            if i == j {
                s[(i * d + i, col)] = ONE;
            } else {
                s[(i * d + j, col)] = c(r2, 0.0);
                s[(j * d + i, col)] = c(r2, 0.0);
            }
            col += 1;
        }
    }
    s
}

/// The symmetric side channel `A_d`: embed into the symmetric subspace and
/// discard the second factor.
pub fn symmetric_side_channel(d: usize) -> Result<Channel> {
    check_dim(d)?;
    let s = symmetric_embedding(d);
    let n = s.ncols();
    let kraus = (0..d)
        .map(|k| CMat::from_fn(d, n, |r, col| s[(r * d + k, col)]))
        .collect();
    Ok(Channel::new(kraus)?.tagged(Family::SymmetricSide { d }))
}

/// Named channel lookup used by the CLI and FFI.
pub fn builtin(name: &str, params: &[f64]) -> Result<Channel> {
    let int = |k: usize| -> Result<usize> {
        let v = *params
            .get(k)
            .ok_or_else(|| Error::Parameter(format!("`{name}` needs parameter #{}", k + 1)))?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::Parameter(format!("`{name}` dimension {v} is not an integer")));
        }
        Ok(v as usize)
    };
    let real = |k: usize| -> Result<f64> {
        params
            .get(k)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("`{name}` needs parameter #{}", k + 1)))
    };
    match name {
        "identity" => identity(int(0)?),
        "erasure" => erasure(int(0)?, real(1)?),
        "depolarizing" => depolarizing(int(0)?, real(1)?),
        "amplitude_damping" | "amplitude-damping" => amplitude_damping(real(0)?),
        "dephasing" => dephasing(int(0)?, real(1)?),
        "symmetric_side" | "symmetric-side" => symmetric_side_channel(int(0)?),
        _ => Err(Error::Parameter(format!("unknown channel family `{name}`"))),
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    #[serde(with = "serde_matrix::vec")]
    kraus: Vec<CMat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelJson {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.clone(),
            family: self.family,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ChannelJson::deserialize(d)?;
        let ch = Channel::new(raw.kraus).map_err(D::Error::custom)?;
        if ch.dim_in != raw.dim_in || ch.dim_out != raw.dim_out {
            return Err(D::Error::custom(format!(
                "declared dims {}->{} do not match Kraus shape {}->{}",
                raw.dim_in, raw.dim_out, ch.dim_in, ch.dim_out
            )));
        }
        Ok(ch.verify_family(raw.family))
    }
}

/// Parses a channel file, distinguishing non-TP input from malformed JSON.
pub fn channel_from_json(text: &str) -> Result<Channel> {
    let raw: ChannelJson = serde_json::from_str(text)?;
    let report = validate_channel(&raw.kraus)?;
    if !report.ok {
        return Err(Error::NotTp { violation: report.violation });
    }
    let ch = Channel::new(raw.kraus)?;
    if ch.dim_in != raw.dim_in || ch.dim_out != raw.dim_out {
        return Err(Error::Dimension(format!(
            "declared dims {}->{} do not match Kraus shape {}->{}",
            raw.dim_in, raw.dim_out, ch.dim_in, ch.dim_out
        )));
    }
    Ok(ch.verify_family(raw.family))
}

//! Density matrices and bipartite states.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::serde_matrix;

/// Eigenvalues at or below this are treated as zero in rank decisions.
pub const RANK_CUTOFF: f64 = 1e-12;

const HERM_TOL: f64 = 1e-10;
const POS_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;

/// A validated quantum state: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() || mat.nrows() == 0 {
            return Err(Error::InvalidState(format!("shape {:?} is not square", mat.shape())));
        }
        let herm = linalg::hermiticity_error(&mat);
        if herm > HERM_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = linalg::min_eig(&mat);
        if min < -POS_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { mat: linalg::hermitize(&mat) })
    }

    /// Wraps a matrix known to be a state up to rounding; it is hermitized and
    /// renormalized but not otherwise checked.
    pub fn from_trusted(mat: CMat) -> Self {
        let h = linalg::hermitize(&mat);
        let t = h.trace().re;
        DensityMatrix { mat: if t > 0.0 { h.unscale(t) } else { h } }
    }

    pub fn pure(v: &DVector<C64>) -> Self {
        let n = v.norm();
        let v = v.unscale(n);
        DensityMatrix { mat: linalg::projector(&v) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix { mat: linalg::identity(d).unscale(d as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > RANK_CUTOFF).count()
    }
}

/// State on `A ⊗ B`, subsystem `A` first.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    rho: DensityMatrix,
}

/// Purification `|Φ⟩_{ABE}` of a bipartite state.
#[derive(Clone, Debug)]
pub struct Purification {
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_e: usize,
    /// Vector on `A ⊗ B ⊗ E`.
    pub vector: DVector<C64>,
}

impl Purification {
    pub fn dims(&self) -> [usize; 3] {
        [self.dim_a, self.dim_b, self.dim_e]
    }

    pub fn density(&self) -> CMat {
        linalg::projector(&self.vector)
    }
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, rho: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho.dim() {
            return Err(Error::Dimension(format!(
                "state of dimension {} is not {dim_a}x{dim_b}",
                rho.dim()
            )));
        }
        Ok(BipartiteState { dim_a, dim_b, rho })
    }

    pub fn from_matrix(dim_a: usize, dim_b: usize, mat: CMat) -> Result<Self> {
        Self::new(dim_a, dim_b, DensityMatrix::new(mat)?)
    }

    pub fn pure(dim_a: usize, dim_b: usize, v: &DVector<C64>) -> Result<Self> {
        Self::new(dim_a, dim_b, DensityMatrix::pure(v))
    }

    /// `√λ|00⟩ + √(1-λ)|11⟩` on two qubits.
    pub fn schmidt_qubits(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Parameter(format!("Schmidt weight {lambda} not in [0,1]")));
        }
        let mut v = DVector::zeros(4);
        v[0] = linalg::c(lambda.sqrt(), 0.0);
        v[3] = linalg::c((1.0 - lambda).sqrt(), 0.0);
        Self::pure(2, 2, &v)
    }

    /// Normalized maximally entangled state on `d ⊗ d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = DVector::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = linalg::c(1.0 / (d as f64).sqrt(), 0.0);
        }
        BipartiteState { dim_a: d, dim_b: d, rho: DensityMatrix::pure(&v) }
    }

    /// Isotropic state `v Φ + (1-v) I/d²` on `d ⊗ d`.
    pub fn isotropic(d: usize, visibility: f64) -> Result<Self> {
        let phi = Self::maximally_entangled(d);
        let n = d * d;
        let mat = phi.rho.matrix().scale(visibility)
            + linalg::identity(n).scale((1.0 - visibility) / n as f64);
        Self::from_matrix(d, d, mat)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.dim_a, self.dim_b]
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn matrix(&self) -> &CMat {
        self.rho.matrix()
    }

    pub fn reduced_a(&self) -> CMat {
        linalg::partial_trace(self.matrix(), &self.dims(), &[0])
    }

    pub fn reduced_b(&self) -> CMat {
        linalg::partial_trace(self.matrix(), &self.dims(), &[1])
    }

    /// `|Φ⟩ = Σ_k √λ_k |ψ_k⟩_{AB} |k⟩_E` over eigenvalues above [`RANK_CUTOFF`].
    pub fn purify(&self) -> Purification {
        let (vals, vecs) = linalg::eigh(self.matrix());
        let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > RANK_CUTOFF).collect();
        let dim_e = kept.len().max(1);
        let n = self.dim_a * self.dim_b;
        let mut v = DVector::zeros(n * dim_e);
        for (e, &k) in kept.iter().enumerate() {
            let s = vals[k].sqrt();
            for i in 0..n {
                v[i * dim_e + e] = vecs[(i, k)] * s;
            }
        }
        let norm = v.norm();
        if norm > 0.0 {
            v.unscale_mut(norm);
        }
        Purification { dim_a: self.dim_a, dim_b: self.dim_b, dim_e, vector: v }
    }

    /// `ρ^c_{AB} = ρ_{AE} = Tr_B Φ_{ABE}`.
    pub fn complementary_state(&self) -> BipartiteState {
        let p = self.purify();
        let ae = linalg::partial_trace(&p.density(), &p.dims(), &[0, 2]);
        BipartiteState {
            dim_a: self.dim_a,
            dim_b: p.dim_e,
            rho: DensityMatrix::from_trusted(ae),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim_a: usize,
    dim_b: usize,
    #[serde(with = "serde_matrix")]
    rho: CMat,
}

impl Serialize for BipartiteState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson { dim_a: self.dim_a, dim_b: self.dim_b, rho: self.matrix().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BipartiteState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = StateJson::deserialize(d)?;
        DensityMatrix::new(raw.rho.clone()).map_err(serde::de::Error::custom)?;
        // Keep the stored entries verbatim so files round-trip exactly.
        let state = BipartiteState::new(raw.dim_a, raw.dim_b, DensityMatrix { mat: raw.rho })
            .map_err(serde::de::Error::custom)?;
        Ok(state)
    }
}

//! Entropic quantities in bits, and a differentiable entropy functional used
//! by the optimizers.

use std::f64::consts::LN_2;

use nalgebra::DVector;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::state::DensityMatrix;

/// Eigenvalues below this are treated as zero inside logarithms.
pub const LOG_CUTOFF: f64 = 1e-12;

/// Support-inclusion thresholds for the relative entropy.
const SUPPORT_EIG: f64 = 1e-10;
const SUPPORT_OVERLAP: f64 = 1e-8;

fn xlog2x(l: f64) -> f64 {
    if l <= LOG_CUTOFF {
        0.0
    } else {
        l * l.log2()
    }
}

/// `-Σ λ log₂ λ` over the given spectrum.
pub fn entropy_of_spectrum(vals: &[f64]) -> f64 {
    -vals.iter().map(|&l| xlog2x(l)).sum::<f64>()
}

/// Von Neumann entropy of a Hermitian matrix (no normalization applied).
pub fn entropy_of(m: &CMat) -> f64 {
    entropy_of_spectrum(&linalg::eigvalsh(m))
}

pub fn entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.matrix())
}

/// Clipped base-2 logarithm of a PSD matrix.
pub fn log2m(m: &CMat) -> CMat {
    linalg::spectral_apply(m, |l| l.max(LOG_CUTOFF).log2())
}

/// Entropy and its gradient `-(log₂ σ + I/ln 2)` at `σ`.
pub fn entropy_with_grad(sigma: &CMat) -> (f64, CMat) {
    let (vals, vecs) = linalg::eigh(sigma);
    let h = entropy_of_spectrum(&vals);
    let g: Vec<f64> = vals.iter().map(|&l| -(l.max(LOG_CUTOFF).log2() + 1.0 / LN_2)).collect();
    (h, linalg::from_spectrum(&g, &vecs))
}

/// A joint state with named tensor factors.
#[derive(Clone, Debug)]
pub struct LabeledState {
    labels: Vec<String>,
    dims: Vec<usize>,
    rho: DensityMatrix,
}

impl LabeledState {
    pub fn new<S: Into<String>>(systems: Vec<(S, usize)>, rho: DensityMatrix) -> Result<Self> {
        let (labels, dims): (Vec<String>, Vec<usize>) =
            systems.into_iter().map(|(l, d)| (l.into(), d)).unzip();
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Config(format!("duplicate subsystem label `{l}`")));
            }
        }
        let total: usize = dims.iter().product();
        if total != rho.dim() {
            return Err(Error::Dimension(format!(
                "subsystem dims {dims:?} do not multiply to state dimension {}",
                rho.dim()
            )));
        }
        Ok(LabeledState { labels, dims, rho })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    fn indices(&self, systems: &[&str]) -> Result<Vec<usize>> {
        let mut out: Vec<usize> = systems
            .iter()
            .map(|s| {
                self.labels
                    .iter()
                    .position(|l| l == s)
                    .ok_or_else(|| Error::UnknownLabel((*s).to_string()))
            })
            .collect::<Result<_>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub fn marginal(&self, systems: &[&str]) -> Result<CMat> {
        let keep = self.indices(systems)?;
        Ok(linalg::partial_trace(self.rho.matrix(), &self.dims, &keep))
    }

    /// Entropy of the marginal on `systems`; the empty set has entropy 0.
    pub fn entropy(&self, systems: &[&str]) -> Result<f64> {
        if systems.is_empty() {
            return Ok(0.0);
        }
        Ok(entropy_of(&self.marginal(systems)?))
    }
}

fn disjoint(parts: &[&[&str]]) -> Result<()> {
    for (i, p) in parts.iter().enumerate() {
        for q in &parts[..i] {
            if let Some(x) = p.iter().find(|x| q.contains(x)) {
                return Err(Error::Config(format!("subsystem `{x}` used twice")));
            }
        }
    }
    Ok(())
}

fn union<'a>(parts: &[&[&'a str]]) -> Vec<&'a str> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

/// `I(A:B) = H(A) + H(B) - H(AB)`.
pub fn mutual_information(s: &LabeledState, a: &[&str], b: &[&str]) -> Result<f64> {
    disjoint(&[a, b])?;
    Ok(s.entropy(a)? + s.entropy(b)? - s.entropy(&union(&[a, b]))?)
}

/// `I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C)`.
pub fn conditional_mutual_information(
    s: &LabeledState,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    disjoint(&[a, b, c])?;
    Ok(s.entropy(&union(&[a, c]))? + s.entropy(&union(&[b, c]))?
        - s.entropy(&union(&[a, b, c]))?
        - s.entropy(c)?)
}

/// `I(A⟩B) = H(B) - H(AB)`.
pub fn coherent_information(s: &LabeledState, a: &[&str], b: &[&str]) -> Result<f64> {
    disjoint(&[a, b])?;
    Ok(s.entropy(b)? - s.entropy(&union(&[a, b]))?)
}

/// `D(ρ‖σ)` in bits, `+∞` when the support of `ρ` is not inside that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    relative_entropy_of(rho.matrix(), sigma.matrix())
}

pub fn relative_entropy_of(rho: &CMat, sigma: &CMat) -> f64 {
    let (rv, rvec) = linalg::eigh(rho);
    let (sv, svec) = linalg::eigh(sigma);
    let range: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > SUPPORT_EIG).collect();
    for (k, &l) in rv.iter().enumerate() {
        if l <= SUPPORT_EIG {
            continue;
        }
        let v = rvec.column(k);
        let overlap: f64 = range.iter().map(|&j| svec.column(j).dotc(&v).norm_sqr()).sum();
        if overlap < 1.0 - SUPPORT_OVERLAP {
            return f64::INFINITY;
        }
    }
    let log_sigma = linalg::from_spectrum(
        &sv.iter().map(|&l| l.max(LOG_CUTOFF).log2()).collect::<Vec<_>>(),
        &svec,
    );
    let cross = linalg::real_inner(rho, &log_sigma);
    let self_term: f64 = rv.iter().map(|&l| xlog2x(l)).sum();
    (self_term - cross).max(0.0)
}

/// Output systems of a channel acting on half of a purified input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sys {
    /// Purifying reference of the input.
    R,
    B,
    E,
}

impl Sys {
    fn label(self) -> &'static str {
        match self {
            Sys::R => "R",
            Sys::B => "B",
            Sys::E => "E",
        }
    }
}

/// `|ψ⟩_{RA} = Σ_k √λ_k |k⟩_R |v_k⟩_A` with `dim R = dim A`.
pub fn purify_input(rho: &CMat) -> DVector<C64> {
    let d = rho.nrows();
    let (vals, vecs) = linalg::eigh(rho);
    let mut v = DVector::zeros(d * d);
    for k in 0..d {
        let s = vals[k].max(0.0).sqrt();
        for a in 0..d {
            v[k * d + a] = vecs[(a, k)] * s;
        }
    }
    v
}

/// Applies the Stinespring isometry to a purification of `input` and keeps
/// the requested systems (labelled `R`, `B`, `E`, in that order).
pub fn channel_output_state(ch: &Channel, input: &DensityMatrix, keep: &[Sys]) -> Result<LabeledState> {
    if input.dim() != ch.dim_in() {
        return Err(Error::Dimension(format!(
            "input of dimension {} for channel with dim_in {}",
            input.dim(),
            ch.dim_in()
        )));
    }
    let d = ch.dim_in();
    let w = linalg::kron(&linalg::identity(d), &ch.stinespring());
    let psi = w * purify_input(input.matrix());
    let dims = [d, ch.dim_out(), ch.dim_env()];
    let all = [Sys::R, Sys::B, Sys::E];
    let kept: Vec<usize> = (0..3).filter(|&k| keep.contains(&all[k])).collect();
    let joint = linalg::projector(&psi);
    let marg = linalg::partial_trace(&joint, &dims, &kept);
    let systems = kept.iter().map(|&k| (all[k].label(), dims[k])).collect();
    LabeledState::new(systems, DensityMatrix::from_trusted(marg))
}

/// Linear combination of marginal entropies of `W ρ W†`:
/// `F(ρ) = Σ_t c_t H(Tr_{not S_t} W ρ W†)`.
#[derive(Clone, Debug)]
pub struct EntropyFunctional {
    w: CMat,
    dims: Vec<usize>,
    terms: Vec<(Vec<usize>, f64)>,
}

impl EntropyFunctional {
    pub fn new(w: CMat, dims: Vec<usize>, terms: Vec<(Vec<usize>, f64)>) -> Self {
        debug_assert_eq!(w.nrows(), dims.iter().product::<usize>());
        EntropyFunctional { w, dims, terms }
    }

    /// `H(B) - H(E)` on the Stinespring output.
    pub fn coherent_info(ch: &Channel) -> Self {
        Self::new(ch.stinespring(), vec![ch.dim_out(), ch.dim_env()], vec![(vec![0], 1.0), (vec![1], -1.0)])
    }

    /// `H(A) + H(B) - H(E)`, the mutual information `I(A:B)` of the purified input.
    pub fn mutual_info(ch: &Channel) -> Self {
        Self::new(
            ch.stinespring(),
            vec![ch.dim_out(), ch.dim_env()],
            vec![(vec![0, 1], 1.0), (vec![0], 1.0), (vec![1], -1.0)],
        )
    }

    /// `I(R:B) - I(R:E)` for inputs on `R ⊗ A`.
    pub fn private_assisted(ch: &Channel, dim_r: usize) -> Self {
        let w = linalg::kron(&linalg::identity(dim_r), &ch.stinespring());
        Self::new(
            w,
            vec![dim_r, ch.dim_out(), ch.dim_env()],
            vec![(vec![1], 1.0), (vec![0, 1], -1.0), (vec![2], -1.0), (vec![0, 2], 1.0)],
        )
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn value(&self, rho: &CMat) -> f64 {
        let out = &self.w * rho * self.w.adjoint();
        self.terms
            .iter()
            .map(|(s, c)| c * entropy_of(&self.marginal(&out, s)))
            .sum()
    }

    /// Value and the Hermitian gradient with respect to `ρ`.
    pub fn value_grad(&self, rho: &CMat) -> (f64, CMat) {
        let out = &self.w * rho * self.w.adjoint();
        let n = out.nrows();
        let mut value = 0.0;
        let mut g = CMat::zeros(n, n);
        for (s, c) in &self.terms {
            let (h, gh) = entropy_with_grad(&self.marginal(&out, s));
            value += c * h;
            if s.len() == self.dims.len() {
                g += gh.scale(*c);
            } else {
                g += linalg::partial_trace_adjoint(&gh, &self.dims, s).scale(*c);
            }
        }
        (value, self.w.adjoint() * g * &self.w)
    }

    fn marginal(&self, out: &CMat, s: &[usize]) -> CMat {
        if s.len() == self.dims.len() {
            out.clone()
        } else {
            linalg::partial_trace(out, &self.dims, s)
        }
    }
}

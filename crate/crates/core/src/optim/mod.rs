//! Estimators for single-letter channel quantities.
//!
//! All nonconvex quantities are maximized by multi-start gradient ascent and
//! reported as heuristic lower bounds. `ce` is concave and is solved to a
//! Frank-Wolfe gap, giving a certified interval.

pub mod ascent;
mod ensemble;
mod relative;

pub use ensemble::{holevo_chi, p1, p1_from};
pub use relative::{r1_estimate, r1_objective};

use serde::{Deserialize, Serialize};

use crate::channel::{self, Channel};
use crate::entropy::EntropyFunctional;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::serde_matrix;
use ascent::{best_of, density_grad, density_of, maximize, unit_blocks, Trial};

/// Seed used when none is given, so documented runs reproduce exactly.
pub const DEFAULT_SEED: u64 = 1729;

/// Default limit on `dim_out · dim_env` of tensor-product channels.
pub const DEFAULT_BUDGET: usize = 512;

/// Reference dimension used by [`pe`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceDim {
    #[default]
    Input,
    InputSquared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub budget: usize,
    pub pe_reference: ReferenceDim,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            restarts: 20,
            max_iter: 1000,
            tol: 1e-9,
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            pe_reference: ReferenceDim::Input,
        }
    }
}

impl OptimOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(Error::Config("restarts and max-iter must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance {} must be positive", self.tol)));
        }
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    Analytic,
    ConcaveExact,
    HeuristicLowerBound,
}

/// The optimizing input behind an estimate.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Argument {
    State {
        #[serde(with = "serde_matrix")]
        rho: CMat,
    },
    Ensemble {
        probs: Vec<f64>,
        #[serde(with = "serde_matrix::vec")]
        states: Vec<CMat>,
    },
    Pair {
        #[serde(with = "serde_matrix")]
        rho: CMat,
        #[serde(with = "serde_matrix")]
        sigma: CMat,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateResult {
    pub value: f64,
    pub argument: Argument,
    pub restarts: usize,
    pub converged_fraction: f64,
    pub certainty: Certainty,
    /// For concave problems, `value + gap` is a certified upper bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl EstimateResult {
    /// Largest value the true quantity can take given this estimate, when
    /// such a bound is known.
    pub fn certified_upper(&self) -> Option<f64> {
        match self.certainty {
            Certainty::Analytic => Some(self.value),
            Certainty::ConcaveExact => Some(self.value + self.gap.unwrap_or(0.0)),
            Certainty::HeuristicLowerBound => None,
        }
    }

    pub fn state(&self) -> Option<&CMat> {
        match &self.argument {
            Argument::State { rho } => Some(rho),
            _ => None,
        }
    }
}

/// Maximizes a smooth function of a density matrix of size `dim` (rank
/// `rank`), restart 0 starting from `start` when given and from the
/// maximally mixed state otherwise.
pub(crate) fn maximize_density<F>(
    f: F,
    dim: usize,
    rank: usize,
    start: Option<&CMat>,
    opts: &OptimOptions,
) -> (Trial<CMat>, f64)
where
    F: Fn(&CMat) -> (f64, CMat) + Sync,
{
    let start_g = start.map(|s| {
        let mut g = CMat::zeros(dim, rank);
        let root = linalg::psd_sqrt(s);
        for col in 0..rank.min(dim) {
            g.set_column(col, &root.column(col));
        }
        g
    });
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |i, rng| {
        let g0 = match (i, &start_g) {
            (0, Some(g)) => g + linalg::random_gaussian(rng, dim, rank).scale(1e-4),
            (0, None) => CMat::identity(dim, rank),
            _ => linalg::random_gaussian(rng, dim, rank),
        };
        let obj = |x: &[CMat]| {
            let rho = density_of(&x[0]);
            let (v, gamma) = f(&rho);
            (v, vec![density_grad(&x[0], &rho, &gamma)])
        };
        let out = maximize(obj, unit_blocks, vec![g0], opts.max_iter, opts.tol);
        Trial { value: out.value, arg: density_of(&out.x[0]), converged: out.converged }
    });
    (best, conv)
}

/// Single-letter coherent information `Q¹(N) = max_ρ H(N(ρ)) − H(N^c(ρ))`.
pub fn q1(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let f = EntropyFunctional::coherent_info(ch);
    let d = ch.dim_in();
    let (best, conv) = maximize_density(|r| f.value_grad(r), d, d, None, opts);
    let (value, certainty) = match ch.family().and_then(|fam| fam.coherent_information()) {
        Some(v) => (v, Certainty::Analytic),
        None => (best.value, Certainty::HeuristicLowerBound),
    };
    EstimateResult {
        value,
        argument: Argument::State { rho: best.arg },
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty,
        gap: None,
        flags: vec![],
    }
}

/// `Q_E = 2 Q¹`, reusing the stored `Q¹` value.
pub fn qe(q1_result: &EstimateResult) -> EstimateResult {
    EstimateResult { value: 2.0 * q1_result.value, ..q1_result.clone() }
}

/// Direct maximization of `I(R:B) − I(R:E)` over pure inputs on `R ⊗ A`;
/// used to cross-check `Q_E = 2 Q¹`.
pub fn qe_direct(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let d = ch.dim_in();
    let f = EntropyFunctional::private_assisted(ch, d);
    let (best, conv) = maximize_density(|r| f.value_grad(r), d * d, 1, None, opts);
    EstimateResult {
        value: best.value,
        argument: Argument::State { rho: best.arg },
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty: Certainty::HeuristicLowerBound,
        gap: None,
        flags: vec![],
    }
}

/// `P_E(N) = max_{ρ_{RA}} I(R:B) − I(R:E)`. The purified `Q¹` optimizer is
/// used as a warm start, so the result is at least `2 Q¹`.
pub fn pe(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let q = q1(ch, opts);
    pe_from(ch, &q, opts)
}

pub fn pe_from(ch: &Channel, q1_result: &EstimateResult, opts: &OptimOptions) -> EstimateResult {
    let d = ch.dim_in();
    let dr = match opts.pe_reference {
        ReferenceDim::Input => d,
        ReferenceDim::InputSquared => d * d,
    };
    let f = EntropyFunctional::private_assisted(ch, dr);
    let n = dr * d;
    let warm = q1_result.state().map(|rho| {
        let psi = crate::entropy::purify_input(rho);
        let mut v = nalgebra::DVector::zeros(n);
        v.rows_mut(0, d * d).copy_from(&psi);
        linalg::projector(&v)
    });
    let (best, conv) = maximize_density(|r| f.value_grad(r), n, n, warm.as_ref(), opts);
    let floor = qe(q1_result).value;
    let (value, argument) = match warm {
        Some(w) if best.value < floor => (floor, w),
        _ => (best.value, best.arg),
    };
    EstimateResult {
        value,
        argument: Argument::State { rho: argument },
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty: Certainty::HeuristicLowerBound,
        gap: None,
        flags: vec![],
    }
}

/// Largest-eigenvalue gap `λ_max(Γ) − Tr(Γρ)` of a concave objective.
fn frank_wolfe_gap(gamma: &CMat, rho: &CMat) -> f64 {
    (linalg::max_eig(gamma) - linalg::real_inner(gamma, rho)).max(0.0)
}

const CE_GAP: f64 = 1e-7;

/// `C_E(N) = max_ρ I(A:B)` by mirror ascent, stopped at Frank-Wolfe gap 1e-7.
pub fn ce(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let f = EntropyFunctional::mutual_info(ch);
    let d = ch.dim_in();
    let gibbs = |l: &CMat| {
        let shift = linalg::max_eig(l);
        let e = linalg::spectral_apply(l, |x| (x - shift).exp());
        let t = e.trace().re;
        e.unscale(t)
    };
    let mut l = CMat::zeros(d, d);
    let mut rho = gibbs(&l);
    let (mut val, mut gamma) = f.value_grad(&rho);
    let mut gap = frank_wolfe_gap(&gamma, &rho);
    let mut eta = 1.0;
    let max_iter = opts.max_iter.max(5000);
    let mut it = 0;
    while gap > CE_GAP && it < max_iter {
        it += 1;
        let mut accepted = false;
        while eta > 1e-12 {
            let l_new = linalg::hermitize(&(&l + gamma.scale(eta)));
            let rho_new = gibbs(&l_new);
            let (v_new, g_new) = f.value_grad(&rho_new);
            if v_new >= val - 1e-15 {
                l = l_new;
                rho = rho_new;
                val = v_new;
                gamma = g_new;
                accepted = true;
                eta *= 1.5;
                break;
            }
            eta *= 0.5;
        }
        gap = frank_wolfe_gap(&gamma, &rho);
        if !accepted {
            break;
        }
    }
    let mut flags = vec![];
    if gap > CE_GAP {
        flags.push(format!("gap {gap:.2e} above target"));
    }
    EstimateResult {
        value: val,
        argument: Argument::State { rho },
        restarts: 1,
        converged_fraction: if gap <= CE_GAP { 1.0 } else { 0.0 },
        certainty: Certainty::ConcaveExact,
        gap: Some(gap),
        flags,
    }
}

/// `Q¹(N ⊗ A_d)`, a lower bound on the symmetric-side-assisted capacity.
pub fn qss_lower(ch: &Channel, d: usize, opts: &OptimOptions) -> Result<EstimateResult> {
    let side = channel::symmetric_side_channel(d)?;
    let needed = ch.dim_out() * side.dim_out() * ch.dim_env() * side.dim_env();
    if needed > opts.budget {
        return Err(Error::Budget { needed, budget: opts.budget });
    }
    let mut r = q1(&ch.tensor(&side), opts);
    r.certainty = Certainty::HeuristicLowerBound;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{amplitude_damping, depolarizing, erasure, identity, symmetric_side_channel};

    fn quick() -> OptimOptions {
        OptimOptions { restarts: 6, ..OptimOptions::default() }
    }

    #[test]
    fn q1_examples() {
        let o = quick();
        assert!((q1(&identity(2).unwrap().untagged(), &o).value - 1.0).abs() < 1e-6);
        let r = q1(&erasure(2, 0.25).unwrap().untagged(), &o);
        assert!((r.value - 0.5).abs() < 1e-6);
        assert_eq!(r.certainty, Certainty::HeuristicLowerBound);
        assert!(q1(&erasure(2, 0.5).unwrap().untagged(), &o).value <= 1e-6);
        let tagged = q1(&erasure(2, 0.25).unwrap(), &o);
        assert_eq!((tagged.value, tagged.certainty), (0.5, Certainty::Analytic));
    }

    #[test]
    fn qe_is_twice_q1() {
        let r = q1(&amplitude_damping(0.2).unwrap(), &quick());
        assert_eq!(qe(&r).value, 2.0 * r.value);
        assert!((qe(&q1(&erasure(2, 0.25).unwrap(), &quick())).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ce_examples() {
        let o = quick();
        let id = ce(&identity(2).unwrap(), &o);
        assert!((id.value - 2.0).abs() < 1e-6);
        assert!(id.gap.unwrap() <= 1e-7);
        assert!((ce(&erasure(2, 0.25).unwrap(), &o).value - 1.5).abs() < 1e-6);
        assert!(ce(&depolarizing(2, 1.0).unwrap(), &o).value.abs() < 1e-6);
    }

    #[test]
    fn ce_dominates_twice_q1() {
        let o = quick();
        for g in [0.1, 0.3, 0.45] {
            let ch = amplitude_damping(g).unwrap();
            assert!(ce(&ch, &o).value >= 2.0 * q1(&ch, &o).value - 1e-6);
        }
    }

    #[test]
    fn pe_examples() {
        let o = quick();
        assert!((pe(&identity(2).unwrap().untagged(), &o).value - 2.0).abs() < 1e-5);
        assert!(pe(&depolarizing(2, 1.0).unwrap(), &o).value.abs() < 1e-6);
    }

    #[test]
    fn qss_examples() {
        let o = quick();
        assert!(qss_lower(&identity(2).unwrap(), 2, &o).unwrap().value >= 1.0 - 1e-4);
        assert!(q1(&symmetric_side_channel(2).unwrap(), &o).value.abs() < 1e-5);
        let small = OptimOptions { budget: 8, ..o };
        assert!(matches!(qss_lower(&identity(2).unwrap(), 3, &small), Err(Error::Budget { .. })));
    }

    #[test]
    fn more_restarts_never_lower_q1() {
        let ch = depolarizing(2, 0.1).unwrap().tensor(&amplitude_damping(0.2).unwrap());
        let mut last = f64::NEG_INFINITY;
        for r in [1, 2, 4, 8] {
            let v = q1(&ch, &OptimOptions { restarts: r, ..OptimOptions::default() }).value;
            assert!(v >= last);
            last = v;
        }
    }
}

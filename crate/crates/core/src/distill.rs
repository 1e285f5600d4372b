//! One-way distillable entanglement and key of bipartite states.
//!
//! Alice applies an instrument with PSD Kraus operators `K_x` to `A` and
//! announces `x`; key distillation may further coarse-grain `x` into `t`
//! with a stochastic matrix `R(t|x)`. Writing `β_x = Tr_A[(K_x² ⊗ I)ρ_AB]`
//! and `ε_x` for the same on `ρ_AE`, and `S(X) = −Tr X log₂ X`,
//!
//! ```text
//! H(B|X) − H(E|X)         = Σ_x S(β_x) − S(ε_x)
//! I(X:B|T) − I(X:E|T)     = Σ_t [S(β_t) − S(ε_t)] − Σ_x [S(β_x) − S(ε_x)]
//! ```
//!
//! with `β_t = Σ_x R(t|x) β_x`. The POVM `M_x = K_x²` is parameterized by a
//! stacked isometry `V` with `M_x = V_x† V_x`, projected back by the polar
//! decomposition after every step.

use serde::Serialize;

use crate::bounds::{BoundReport, Provenance, Role, Target, Term};
use crate::entropy::entropy_with_grad;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::optim::ascent::{best_of, maximize, Trial};
use crate::optim::{Certainty, OptimOptions};
use crate::serde_matrix;
use crate::state::BipartiteState;

pub const INSTRUMENT_TOL: f64 = 1e-8;

/// Instrument with PSD Kraus operators, `Σ K_x² = I`.
#[derive(Clone, Debug, Serialize)]
pub struct Instrument {
    #[serde(with = "serde_matrix::vec")]
    pub kraus: Vec<CMat>,
}

impl Instrument {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let d = kraus.first().map(|k| k.nrows()).ok_or_else(|| Error::Config("empty instrument".into()))?;
        let mut sum = CMat::zeros(d, d);
        for k in &kraus {
            if k.shape() != (d, d) {
                return Err(Error::Dimension("instrument Kraus operators must be square and equal".into()));
            }
            if linalg::hermiticity_error(k) > 1e-9 || linalg::min_eig(k) < -1e-9 {
                return Err(Error::Config("instrument Kraus operators must be PSD".into()));
            }
            sum += k * k;
        }
        let violation = (sum - linalg::identity(d)).norm();
        if violation > INSTRUMENT_TOL {
            return Err(Error::NotTp { violation });
        }
        Ok(Instrument { kraus })
    }

    /// The one-outcome instrument `K = I`.
    pub fn trivial(d: usize) -> Self {
        Instrument { kraus: vec![linalg::identity(d)] }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(d: usize) -> Self {
        let kraus = (0..d)
            .map(|k| CMat::from_fn(d, d, |r, col| if r == k && col == k { linalg::ONE } else { linalg::ZERO }))
            .collect();
        Instrument { kraus }
    }

    fn from_isometry(v: &CMat, n: usize, d: usize) -> Self {
        let kraus = povm_of(v, n, d).iter().map(linalg::psd_sqrt).collect();
        Instrument { kraus }
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn povm(&self) -> Vec<CMat> {
        self.kraus.iter().map(|k| k * k).collect()
    }

    fn isometry(&self, outcomes: usize) -> CMat {
        let d = self.kraus[0].nrows();
        let mut v = CMat::zeros(outcomes * d, d);
        for (x, k) in self.kraus.iter().take(outcomes).enumerate() {
            v.view_mut((x * d, 0), (d, d)).copy_from(k);
        }
        v
    }
}

/// Stochastic matrix `R(t|x)`, stored by rows `t`.
#[derive(Clone, Debug, Serialize)]
pub struct ClassicalPostChannel {
    pub matrix: Vec<Vec<f64>>,
}

impl ClassicalPostChannel {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let nx = matrix.first().map(Vec::len).unwrap_or(0);
        if nx == 0 || matrix.iter().any(|r| r.len() != nx) {
            return Err(Error::Dimension("post-processing matrix must be rectangular".into()));
        }
        for x in 0..nx {
            let s: f64 = matrix.iter().map(|r| r[x]).sum();
            if (s - 1.0).abs() > 1e-10 || matrix.iter().any(|r| r[x] < -1e-12) {
                return Err(Error::Config(format!("column {x} of R(t|x) is not a probability vector")));
            }
        }
        Ok(ClassicalPostChannel { matrix })
    }

    /// `T` independent of `X`.
    pub fn trivial(nx: usize) -> Self {
        ClassicalPostChannel { matrix: vec![vec![1.0; nx]] }
    }

    fn from_logits(w: &CMat) -> Self {
        let (nt, nx) = w.shape();
        let mut matrix = vec![vec![0.0; nx]; nt];
        for x in 0..nx {
            let col: Vec<f64> = (0..nt).map(|t| w[(t, x)].re).collect();
            let m = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = col.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            for t in 0..nt {
                matrix[t][x] = e[t] / s;
            }
        }
        ClassicalPostChannel { matrix }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistillEstimate {
    pub value: f64,
    pub instrument: Instrument,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_channel: Option<ClassicalPostChannel>,
    pub certainty: Certainty,
    pub restarts: usize,
    pub converged_fraction: f64,
}

/// `ρ_AB` and `ρ_AE` of a purification, with the maps `M ↦ Tr_A[(M⊗I)σ]`.
struct Split {
    da: usize,
    ab: CMat,
    ae: CMat,
    db: usize,
    de: usize,
}

impl Split {
    fn new(state: &BipartiteState) -> Self {
        let comp = state.complementary_state();
        Split {
            da: state.dim_a(),
            db: state.dim_b(),
            de: comp.dim_b(),
            ab: state.matrix().clone(),
            ae: comp.matrix().clone(),
        }
    }

    fn side(&self, which: usize) -> (&CMat, usize) {
        if which == 0 {
            (&self.ab, self.db)
        } else {
            (&self.ae, self.de)
        }
    }

    fn push(&self, m: &CMat, which: usize) -> CMat {
        let (s, dy) = self.side(which);
        let lifted = linalg::kron(m, &linalg::identity(dy)) * s;
        linalg::hermitize(&linalg::partial_trace(&lifted, &[self.da, dy], &[1]))
    }

    fn pull(&self, y: &CMat, which: usize) -> CMat {
        let (s, dy) = self.side(which);
        let lifted = linalg::kron(&linalg::identity(self.da), y) * s;
        linalg::hermitize(&linalg::partial_trace(&lifted, &[self.da, dy], &[0]))
    }
}

fn povm_of(v: &CMat, n: usize, d: usize) -> Vec<CMat> {
    (0..n)
        .map(|x| {
            let b = v.view((x * d, 0), (d, d));
            linalg::hermitize(&(b.adjoint() * b))
        })
        .collect()
}

/// `Σ_x S(β_x) − S(ε_x)` and its gradient in each `M_x`.
fn d_terms(sp: &Split, povm: &[CMat]) -> (f64, Vec<CMat>, Vec<[CMat; 2]>) {
    let mut value = 0.0;
    let mut grads = Vec::with_capacity(povm.len());
    let mut outs = Vec::with_capacity(povm.len());
    for m in povm {
        let b = sp.push(m, 0);
        let e = sp.push(m, 1);
        let (hb, gb) = entropy_with_grad(&b);
        let (he, ge) = entropy_with_grad(&e);
        value += hb - he;
        grads.push(sp.pull(&gb, 0) - sp.pull(&ge, 1));
        outs.push([b, e]);
    }
    (value, grads, outs)
}

/// `I(X:B|T) − I(X:E|T)` with gradients in each `M_x` and in `R(t|x)`.
fn k_terms(sp: &Split, povm: &[CMat], r: &[Vec<f64>]) -> (f64, Vec<CMat>, Vec<Vec<f64>>) {
    let (fine, fine_grads, outs) = d_terms(sp, povm);
    let nx = povm.len();
    let mut value = -fine;
    let mut grads: Vec<CMat> = fine_grads.into_iter().map(|g| -g).collect();
    let mut dr = vec![vec![0.0; nx]; r.len()];
    for (t, row) in r.iter().enumerate() {
        let mut bt = CMat::zeros(sp.db, sp.db);
        let mut et = CMat::zeros(sp.de, sp.de);
        for x in 0..nx {
            bt += outs[x][0].scale(row[x]);
            et += outs[x][1].scale(row[x]);
        }
        let (hb, gb) = entropy_with_grad(&bt);
        let (he, ge) = entropy_with_grad(&et);
        value += hb - he;
        let pulled = sp.pull(&gb, 0) - sp.pull(&ge, 1);
        for x in 0..nx {
            grads[x] += pulled.scale(row[x]);
            dr[t][x] = linalg::real_inner(&gb, &outs[x][0]) - linalg::real_inner(&ge, &outs[x][1]);
        }
    }
    (value, grads, dr)
}

/// Gradient in the stacked isometry from gradients `Γ_x` in `M_x = V_x†V_x`,
/// projected to the tangent space of the polar map.
fn isometry_grad(v: &CMat, gammas: &[CMat], d: usize) -> CMat {
    let mut gv = CMat::zeros(v.nrows(), d);
    for (x, g) in gammas.iter().enumerate() {
        let block = v.view((x * d, 0), (d, d)) * g.scale(2.0);
        gv.view_mut((x * d, 0), (d, d)).copy_from(&block);
    }
    linalg::isometry_tangent(v, &gv)
}

fn softmax_grad(w: &CMat, r: &[Vec<f64>], dr: &[Vec<f64>]) -> CMat {
    let (nt, nx) = w.shape();
    CMat::from_fn(nt, nx, |t, x| {
        let mean: f64 = (0..nt).map(|s| r[s][x] * dr[s][x]).sum();
        c(r[t][x] * (dr[t][x] - mean), 0.0)
    })
}

/// `H(B|X) − H(E|X)` for a given instrument.
pub fn d_objective(state: &BipartiteState, inst: &Instrument) -> f64 {
    d_terms(&Split::new(state), &inst.povm()).0
}

/// `I(X:B|T) − I(X:E|T)` for a given instrument and post-processing.
pub fn k_objective(state: &BipartiteState, inst: &Instrument, post: &ClassicalPostChannel) -> f64 {
    k_terms(&Split::new(state), &inst.povm(), &post.matrix).0
}

fn random_isometry(rng: &mut rand_chacha::ChaCha8Rng, n: usize, d: usize) -> CMat {
    linalg::polar_isometry(&linalg::random_gaussian(rng, n * d, d))
}

fn normalize(x: &mut [CMat]) {
    x[0] = linalg::polar_isometry(&x[0]);
    if x.len() > 1 {
        let w = &mut x[1];
        for col in 0..w.ncols() {
            let mean = w.column(col).iter().map(|z| z.re).sum::<f64>() / w.nrows() as f64;
            for z in w.column_mut(col).iter_mut() {
                *z = c(z.re - mean, 0.0);
            }
        }
    }
}

/// `D¹→(ρ_AB) = max_T H(B|X) − H(E|X)` over instruments with `dim_a²`
/// outcomes. The trivial instrument (value `I(A⟩B)`) and the computational
/// basis measurement are always among the candidates.
pub fn d1_arrow(state: &BipartiteState, opts: &OptimOptions) -> DistillEstimate {
    let sp = Split::new(state);
    let d = sp.da;
    let n = d * d;
    let trivial = Instrument::trivial(d);
    let basis = Instrument::computational(d);
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |i, rng| {
        let v0 = match i {
            0 => trivial.isometry(n) + linalg::random_gaussian(rng, n * d, d).scale(1e-4),
            1 => basis.isometry(n) + linalg::random_gaussian(rng, n * d, d).scale(1e-4),
            _ => random_isometry(rng, n, d),
        };
        let f = |x: &[CMat]| {
            let povm = povm_of(&x[0], n, d);
            let (v, g, _) = d_terms(&sp, &povm);
            (v, vec![isometry_grad(&x[0], &g, d)])
        };
        let out = maximize(f, normalize, vec![v0], opts.max_iter, opts.tol);
        Trial { value: out.value, arg: Instrument::from_isometry(&out.x[0], n, d), converged: out.converged }
    });
    let mut value = best.value;
    let mut instrument = best.arg;
    for cand in [trivial, basis] {
        let v = d_terms(&sp, &cand.povm()).0;
        if v > value + 1e-12 {
            value = v;
            instrument = cand;
        }
    }
    DistillEstimate {
        value,
        instrument,
        post_channel: None,
        certainty: Certainty::HeuristicLowerBound,
        restarts: opts.restarts,
        converged_fraction: conv,
    }
}

fn k_search(sp: &Split, opts: &OptimOptions, warm: &Instrument, trivial_post: bool) -> (Trial<(Instrument, ClassicalPostChannel)>, f64) {
    let d = sp.da;
    let n = d * d;
    let nt = if trivial_post { 1 } else { n };
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |i, rng| {
        let (v0, w0) = match i {
            0 => (warm.isometry(n) + linalg::random_gaussian(rng, n * d, d).scale(1e-4), CMat::zeros(nt, n)),
            1 => (Instrument::computational(d).isometry(n) + linalg::random_gaussian(rng, n * d, d).scale(1e-4), CMat::zeros(nt, n)),
            _ => (random_isometry(rng, n, d), linalg::random_gaussian(rng, nt, n).map(|z| c(z.re, 0.0))),
        };
        let f = |x: &[CMat]| {
            let povm = povm_of(&x[0], n, d);
            let r = ClassicalPostChannel::from_logits(&x[1]).matrix;
            let (v, g, dr) = k_terms(sp, &povm, &r);
            (v, vec![isometry_grad(&x[0], &g, d), softmax_grad(&x[1], &r, &dr)])
        };
        let out = maximize(f, normalize, vec![v0, w0], opts.max_iter, opts.tol);
        let inst = Instrument::from_isometry(&out.x[0], n, d);
        let post = ClassicalPostChannel::from_logits(&out.x[1]);
        Trial { value: out.value, arg: (inst, post), converged: out.converged }
    });
    (best, conv)
}

/// `K¹→(ρ_AB) = max_{Q, T|X} I(X:B|T) − I(X:E|T)` with `|X| = dim_a²` and
/// `|T| ≤ |X|`. Warm-started from the `D¹→` instrument with trivial `T`.
pub fn k1_arrow(state: &BipartiteState, opts: &OptimOptions) -> DistillEstimate {
    let d1 = d1_arrow(state, opts);
    k1_arrow_from(state, &d1, opts)
}

pub fn k1_arrow_from(state: &BipartiteState, d1: &DistillEstimate, opts: &OptimOptions) -> DistillEstimate {
    let sp = Split::new(state);
    let (best, conv) = k_search(&sp, opts, &d1.instrument, false);
    finish_k(&sp, best, conv, opts)
}

fn finish_k(sp: &Split, best: Trial<(Instrument, ClassicalPostChannel)>, conv: f64, opts: &OptimOptions) -> DistillEstimate {
    let (mut instrument, mut post) = best.arg;
    let mut value = best.value;
    // Measuring nothing gives zero key.
    let trivial = Instrument::trivial(sp.da);
    let one = ClassicalPostChannel::trivial(1);
    let v0 = k_terms(sp, &trivial.povm(), &one.matrix).0;
    if v0 > value {
        value = v0;
        instrument = trivial;
        post = one;
    }
    DistillEstimate {
        value,
        instrument,
        post_channel: Some(post),
        certainty: Certainty::HeuristicLowerBound,
        restarts: opts.restarts,
        converged_fraction: conv,
    }
}

/// Single-letter estimates of the state partial-order parameters.
#[derive(Clone, Debug, Serialize)]
pub struct OrderEpsilons {
    /// `K¹→(ρ^c)`.
    pub more_secret_eps: f64,
    /// `D¹→(ρ^c)`.
    pub more_informative_eps: f64,
    /// `K¹→(ρ)`.
    pub anti_more_secret_eps: f64,
    /// `D¹→(ρ)`.
    pub anti_more_informative_eps: f64,
    /// `max_T I(X:E) − I(X:B)`, the trivial-`T` part of `more_secret_eps`.
    pub weaker_condition_eps: f64,
    pub converged_fraction: f64,
    pub flags: Vec<String>,
}

pub fn state_order_epsilons(state: &BipartiteState, opts: &OptimOptions) -> OrderEpsilons {
    let comp = state.complementary_state();
    let d1 = d1_arrow(state, opts);
    let k1 = k1_arrow_from(state, &d1, opts);
    let d1c = d1_arrow(&comp, opts);
    let k1c = k1_arrow_from(&comp, &d1c, opts);
    let spc = Split::new(&comp);
    let (weak, conv_w) = k_search(&spc, opts, &d1c.instrument, true);
    let weak = finish_k(&spc, weak, conv_w, opts);
    let conv = [d1.converged_fraction, k1.converged_fraction, d1c.converged_fraction, k1c.converged_fraction, conv_w]
        .iter()
        .copied()
        .fold(1.0, f64::min);
    OrderEpsilons {
        more_secret_eps: k1c.value.max(0.0),
        more_informative_eps: d1c.value.max(0.0),
        anti_more_secret_eps: k1.value.max(0.0),
        anti_more_informative_eps: d1.value.max(0.0),
        weaker_condition_eps: weak.value.max(0.0),
        converged_fraction: conv,
        flags: vec!["heuristic-lower-bound".to_string()],
    }
}

/// All one-way estimates of a state and its complement.
#[derive(Clone, Debug, Serialize)]
pub struct StateEstimates {
    pub d1: DistillEstimate,
    pub k1: DistillEstimate,
    pub d1_c: DistillEstimate,
    pub k1_c: DistillEstimate,
}

impl StateEstimates {
    pub fn compute(state: &BipartiteState, opts: &OptimOptions) -> Result<Self> {
        opts.validate()?;
        let comp = state.complementary_state();
        let d1 = d1_arrow(state, opts);
        let k1 = k1_arrow_from(state, &d1, opts);
        let d1_c = d1_arrow(&comp, opts);
        let k1_c = k1_arrow_from(&comp, &d1_c, opts);
        Ok(StateEstimates { d1, k1, d1_c, k1_c })
    }
}

const SINGLE_LETTER: &str = "regularized terms evaluated single-letter";

fn term(name: &str, e: &DistillEstimate, role: Role, tol: f64) -> Term {
    Term::new(name, e.value.max(0.0), Provenance::HeuristicLowerBound, tol, role)
}

/// Distillation chains for a state and its complement.
pub fn state_bounds(state: &BipartiteState, opts: &OptimOptions) -> Result<Vec<BoundReport>> {
    state_bounds_from(&StateEstimates::compute(state, opts)?, opts.tol)
}

pub fn state_bounds_from(e: &StateEstimates, tol: f64) -> Result<Vec<BoundReport>> {
    let t = |name: &str, est: &DistillEstimate, role| term(name, est, role, tol);
    Ok(vec![
        BoundReport::chain(
            Target::K1OneWay,
            "single-letter key vs entanglement",
            "D¹→(ρ) ≤ K¹→(ρ) ≤ D¹→(ρ) + D¹→(ρ^c)",
            vec![
                t("D¹→(ρ)", &e.d1, Role::Lower),
                t("K¹→(ρ)", &e.k1, Role::Lower),
                t("D¹→(ρ)", &e.d1, Role::Upper),
                t("D¹→(ρ^c)", &e.d1_c, Role::Upper),
            ],
        )?,
        BoundReport::chain(
            Target::KOneWay,
            "key vs entanglement",
            "D→(ρ) ≤ K→(ρ) ≤ D→(ρ) + D→(ρ^c)",
            vec![
                t("D¹→(ρ)", &e.d1, Role::Lower),
                t("K¹→(ρ)", &e.k1, Role::Lower),
                t("D¹→(ρ)", &e.d1, Role::Upper),
                t("D¹→(ρ^c)", &e.d1_c, Role::Upper),
            ],
        )?
        .with_flag(SINGLE_LETTER),
        BoundReport::chain(
            Target::DOneWay,
            "entanglement regularization",
            "D¹→(ρ) ≤ D→(ρ) ≤ D¹→(ρ) + K→(ρ^c)",
            vec![t("D¹→(ρ)", &e.d1, Role::Lower), t("D¹→(ρ)", &e.d1, Role::Upper), t("K¹→(ρ^c)", &e.k1_c, Role::Upper)],
        )?
        .with_flag(SINGLE_LETTER),
        BoundReport::chain(
            Target::KOneWay,
            "key regularization",
            "K¹→(ρ) ≤ K→(ρ) ≤ K¹→(ρ) + K→(ρ^c) + D→(ρ^c)",
            vec![
                t("K¹→(ρ)", &e.k1, Role::Lower),
                t("K¹→(ρ)", &e.k1, Role::Upper),
                t("K¹→(ρ^c)", &e.k1_c, Role::Upper),
                t("D¹→(ρ^c)", &e.d1_c, Role::Upper),
            ],
        )?
        .with_flag(SINGLE_LETTER),
    ])
}

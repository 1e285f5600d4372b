//! Semidefinite programs on channels: diamond norm, approximate
//! degradability, PPT tests, and the transpose capacity bound.

mod problem;

pub use problem::{ConeSpec, HermExpr, HermVar, RawSolution, Sdp, SdpInstance, SdpOptions, SdpStatus};

use serde::Serialize;

use crate::channel::{Channel, ChoiMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ONE};

/// Minimum eigenvalue of `J^{T_B}` accepted as PPT.
pub const PPT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub objective: f64,
    pub status: SdpStatus,
    pub duality_gap: f64,
    #[serde(skip)]
    pub witness: Vec<CMat>,
}

impl SdpSolution {
    fn from_raw(raw: &RawSolution, objective: f64, witness: Vec<CMat>) -> Result<Self> {
        match raw.status {
            SdpStatus::Optimal | SdpStatus::NearOptimal => Ok(SdpSolution {
                objective,
                status: raw.status,
                duality_gap: raw.duality_gap(),
                witness,
            }),
            s => Err(Error::Solver(format!("status {s:?}"))),
        }
    }
}

/// Adds `‖Δ‖⋄` as a minimization, where `delta` is the Choi operator (on
/// `A ⊗ X`) of a Hermitian-preserving map. Writing `Δ = P − Q` with
/// `P, Q ⪰ 0`, the norm is the least `λ_max(Tr_X(P + Q))`; here `Q = P − Δ`.
/// Returns the objective variable.
fn diamond_constraints(sdp: &mut Sdp, delta: &HermExpr, dims: [usize; 2]) -> usize {
    let [da, dx] = dims;
    let p = sdp.herm_var(da * dx);
    let t = sdp.scalar_var();
    sdp.psd_var(&p);

    let mut q = scaled(delta, -1.0);
    q.add_var_block(0, 0, &p, 1.0);
    sdp.psd(&q);

    // t I − Tr_X(2P − Δ) ⪰ 0
    let mut e = HermExpr::new(da);
    for a in 0..da {
        e.add_term(a, a, t, ONE);
        for a2 in 0..da {
            for x in 0..dx {
                let (r, col) = (a * dx + x, a2 * dx + x);
                e.add_entry(a, a2, &p, r, col, c(-2.0, 0.0));
                e.constant[(a, a2)] += delta.constant[(r, col)];
            }
        }
    }
    for &(r, col, v, z) in delta.terms() {
        if r % dx == col % dx {
            e.add_term(r / dx, col / dx, v, z);
        }
    }
    sdp.psd(&e);
    sdp.minimize(t, 1.0);
    t
}

fn scaled(e: &HermExpr, s: f64) -> HermExpr {
    let mut out = HermExpr::new(e.dim());
    out.constant = e.constant.scale(s);
    for &(r, col, v, z) in e.terms() {
        out.add_term(r, col, v, z * s);
    }
    out
}

/// `‖Δ‖⋄` for a Hermitian-preserving map given by its Choi operator.
pub fn diamond_norm(delta: &ChoiMatrix) -> Result<SdpSolution> {
    diamond_norm_with(delta, &SdpOptions::default())
}

pub fn diamond_norm_with(delta: &ChoiMatrix, opts: &SdpOptions) -> Result<SdpSolution> {
    if linalg::hermiticity_error(delta.matrix()) > 1e-9 {
        return Err(Error::Dimension("Choi operator of the difference map is not Hermitian".into()));
    }
    let mut sdp = Sdp::new();
    let mut e = HermExpr::new(delta.matrix().nrows());
    e.constant = delta.matrix().clone();
    diamond_constraints(&mut sdp, &e, delta.dims());
    let raw = sdp.solve(opts)?;
    SdpSolution::from_raw(&raw, raw.objective, vec![])
}

/// Result of an approximate (anti)degradability computation.
#[derive(Clone, Debug, Serialize)]
pub struct DegradabilityResult {
    pub eps: f64,
    pub solution: SdpSolution,
    /// Choi operator of the optimal simulating channel.
    #[serde(skip)]
    pub map_choi: CMat,
    #[serde(skip)]
    pub map_dims: [usize; 2],
}

impl DegradabilityResult {
    pub fn map_choi(&self) -> Result<ChoiMatrix> {
        ChoiMatrix::from_matrix(self.map_dims[0], self.map_dims[1], self.map_choi.clone())
    }
}

/// Builds `min_D ‖target − D∘source‖⋄` over channels `D: X → Y`, where
/// `source: A → X` and `target: A → Y` share the input.
fn simulation_sdp(source: &Channel, target: &Channel) -> (Sdp, HermVar) {
    let js = source.choi();
    let jt = target.choi();
    let (da, dx, dy) = (source.dim_in(), source.dim_out(), target.dim_out());
    let mut sdp = Sdp::new();
    let d = sdp.herm_var(dx * dy);
    sdp.psd_var(&d);
    // Tr_Y J_D = I_X
    for x in 0..dx {
        for x2 in x..dx {
            let mut terms = Vec::new();
            for y in 0..dy {
                let (t, k) = d.entry(x * dy + y, x2 * dy + y);
                terms.extend_from_slice(&t[..k]);
            }
            sdp.equal_complex(&terms, if x == x2 { ONE } else { c(0.0, 0.0) });
        }
    }
    // Δ = J_target − J(D∘source), with
    // J(D∘N)[(a,y),(a',y')] = Σ_{x,x'} J_N[(a,x),(a',x')] J_D[(x,y),(x',y')].
    let mut delta = HermExpr::new(da * dy);
    delta.constant = jt.matrix().clone();
    let jm = js.matrix();
    for a in 0..da {
        for a2 in 0..da {
            for x in 0..dx {
                for x2 in 0..dx {
                    let w = jm[(a * dx + x, a2 * dx + x2)];
                    if w.norm() < 1e-15 {
                        continue;
                    }
                    for y in 0..dy {
                        for y2 in 0..dy {
                            delta.add_entry(a * dy + y, a2 * dy + y2, &d, x * dy + y, x2 * dy + y2, -w);
                        }
                    }
                }
            }
        }
    }
    diamond_constraints(&mut sdp, &delta, [da, dy]);
    (sdp, d)
}

fn simulation(source: &Channel, target: &Channel, opts: &SdpOptions) -> Result<DegradabilityResult> {
    let (sdp, d) = simulation_sdp(source, target);
    let raw = sdp.solve(opts)?;
    let jd = linalg::hermitize(&d.value(&raw.x));
    let eps = raw.objective.max(0.0);
    Ok(DegradabilityResult {
        eps,
        solution: SdpSolution::from_raw(&raw, eps, vec![jd.clone()])?,
        map_choi: jd,
        map_dims: [source.dim_out(), target.dim_out()],
    })
}

/// `min_D ‖N^c − D∘N‖⋄` over degrading maps `D: B → E`.
pub fn eps_degradable(ch: &Channel) -> Result<DegradabilityResult> {
    eps_degradable_with(ch, &SdpOptions::default())
}

pub fn eps_degradable_with(ch: &Channel, opts: &SdpOptions) -> Result<DegradabilityResult> {
    simulation(ch, &ch.complementary(), opts)
}

/// `min_D ‖N − D∘N^c‖⋄` over maps `D: E → B`.
pub fn eps_antidegradable(ch: &Channel) -> Result<DegradabilityResult> {
    eps_antidegradable_with(ch, &SdpOptions::default())
}

pub fn eps_antidegradable_with(ch: &Channel, opts: &SdpOptions) -> Result<DegradabilityResult> {
    simulation(&ch.complementary(), ch, opts)
}

/// Choi operator of `D∘N` for a map `D` given by its Choi operator.
pub fn compose_choi(n: &ChoiMatrix, d: &ChoiMatrix) -> Result<ChoiMatrix> {
    if n.dim_out() != d.dim_in() {
        return Err(Error::Dimension("composition of incompatible maps".into()));
    }
    let (da, dx, dy) = (n.dim_in(), n.dim_out(), d.dim_out());
    let (jn, jd) = (n.matrix(), d.matrix());
    let m = CMat::from_fn(da * dy, da * dy, |r, col| {
        let (a, y, a2, y2) = (r / dy, r % dy, col / dy, col % dy);
        let mut acc = c(0.0, 0.0);
        for x in 0..dx {
            for x2 in 0..dx {
                acc += jn[(a * dx + x, a2 * dx + x2)] * jd[(x * dy + y, x2 * dy + y2)];
            }
        }
        acc
    });
    ChoiMatrix::from_matrix(da, dy, m)
}

/// Minimum eigenvalue of `J^{T_B}` is at least `-1e-9`.
pub fn ppt_check(choi: &ChoiMatrix) -> bool {
    ppt_min_eig(choi) >= -PPT_TOL
}

pub fn ppt_min_eig(choi: &ChoiMatrix) -> f64 {
    linalg::min_eig(choi.partial_transpose().matrix())
}

/// Trace distance `½‖ρ − σ‖₁` from the normalized Choi state to the set of
/// PPT states.
pub fn ppt_distance(choi: &ChoiMatrix) -> Result<SdpSolution> {
    ppt_distance_with(choi, &SdpOptions::default())
}

pub fn ppt_distance_with(choi: &ChoiMatrix, opts: &SdpOptions) -> Result<SdpSolution> {
    let rho = choi.state();
    let dims = choi.dims();
    let n = rho.nrows();
    let mut sdp = Sdp::new();
    let sigma = sdp.herm_var(n);
    let p = sdp.herm_var(n);
    sdp.psd_var(&sigma);
    sdp.psd_var(&p);
    let mut pt = HermExpr::new(n);
    for r in 0..n {
        for col in 0..n {
            let (i, j) = linalg::partial_transpose_index(&dims, &[1], r, col);
            pt.add_entry(r, col, &sigma, i, j, ONE);
        }
    }
    sdp.psd(&pt);
    let mut q = HermExpr::new(n);
    q.add_var_block(0, 0, &p, 1.0);
    q.add_var_block(0, 0, &sigma, 1.0);
    q.constant = -rho;
    sdp.psd(&q);
    sdp.equal((0..n).map(|k| (sigma.diag_var(k), 1.0)).collect(), 1.0);
    for k in 0..n {
        sdp.minimize(p.diag_var(k), 1.0);
    }
    let raw = sdp.solve(opts)?;
    let s = sigma.value(&raw.x);
    SdpSolution::from_raw(&raw, raw.objective.max(0.0), vec![s])
}

/// `log₂ ‖Θ∘N‖⋄` with `Θ` the transpose on the output.
pub fn transpose_q_upper(ch: &Channel) -> Result<SdpSolution> {
    transpose_q_upper_with(ch, &SdpOptions::default())
}

pub fn transpose_q_upper_with(ch: &Channel, opts: &SdpOptions) -> Result<SdpSolution> {
    let sol = diamond_norm_with(&ch.choi().partial_transpose(), opts)?;
    Ok(SdpSolution { objective: sol.objective.log2(), ..sol })
}

/// Dimension and `ε` of a continuity bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuityParams {
    pub env_dim: usize,
    pub eps: f64,
}

fn check_continuity(env_dim: usize, eps: f64) -> Result<()> {
    if env_dim == 0 {
        return Err(Error::Parameter("environment dimension 0".into()));
    }
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::Parameter(format!("eps = {eps} not in [0, 2]")));
    }
    Ok(())
}

/// `(ε/2) log₂(|E|−1) + h(ε/2)`; the logarithmic term is dropped for `|E| = 1`.
pub fn f1(env_dim: usize, eps: f64) -> Result<f64> {
    check_continuity(env_dim, eps)?;
    let log_term = if env_dim > 1 { (eps / 2.0) * ((env_dim - 1) as f64).log2() } else { 0.0 };
    Ok(log_term + linalg::binary_entropy(eps / 2.0))
}

/// `ε log₂|E| + (1 + ε/2) h(ε/(2+ε))`.
pub fn f2(env_dim: usize, eps: f64) -> Result<f64> {
    check_continuity(env_dim, eps)?;
    Ok(eps * (env_dim as f64).log2() + (1.0 + eps / 2.0) * linalg::binary_entropy(eps / (2.0 + eps)))
}

impl ContinuityParams {
    pub fn f1(&self) -> Result<f64> {
        f1(self.env_dim, self.eps)
    }

    pub fn f2(&self) -> Result<f64> {
        f2(self.env_dim, self.eps)
    }
}

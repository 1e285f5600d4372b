//! A small conic modelling layer over Clarabel.
//!
//! Problems have real decision variables, a linear objective to minimize,
//! linear equalities, and PSD constraints on affine matrix expressions.
//! Hermitian expressions are mapped to real symmetric ones through
//! `H ↦ [[Re H, -Im H], [Im H, Re H]]`.

use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    SolverError,
}

/// Solver tolerances. `gap` bounds both absolute and relative duality gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdpOptions {
    pub feas: f64,
    pub gap: f64,
    pub max_iter: u32,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { feas: 1e-8, gap: 1e-8, max_iter: 200 }
    }
}

impl SdpOptions {
    pub fn tightened(&self, factor: f64) -> Self {
        SdpOptions { feas: self.feas / factor, gap: self.gap / factor, ..*self }
    }
}

/// Raw output of one solve.
#[derive(Clone, Debug)]
pub struct RawSolution {
    pub status: SdpStatus,
    pub objective: f64,
    pub dual_objective: f64,
    pub x: Vec<f64>,
}

impl RawSolution {
    pub fn duality_gap(&self) -> f64 {
        (self.objective - self.dual_objective).abs()
    }
}

/// A Hermitian `n × n` matrix of decision variables occupying `n²` reals.
#[derive(Clone, Copy, Debug)]
pub struct HermVar {
    offset: usize,
    n: usize,
}

impl HermVar {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// `X[p,q]` as a combination of at most two real variables.
    pub fn entry(&self, p: usize, q: usize) -> ([(usize, C64); 2], usize) {
        let (n, o) = (self.n, self.offset);
        if p == q {
            ([(o + p * n + p, c(1.0, 0.0)), (0, ZERO)], 1)
        } else if p < q {
            ([(o + p * n + q, c(1.0, 0.0)), (o + q * n + p, c(0.0, 1.0))], 2)
        } else {
            ([(o + q * n + p, c(1.0, 0.0)), (o + p * n + q, c(0.0, -1.0))], 2)
        }
    }

    /// Real variable holding `Re X[p,p]`, for trace-type objectives.
    pub fn diag_var(&self, p: usize) -> usize {
        self.offset + p * self.n + p
    }

    pub fn value(&self, x: &[f64]) -> CMat {
        CMat::from_fn(self.n, self.n, |p, q| {
            let (terms, k) = self.entry(p, q);
            terms[..k].iter().map(|&(v, m)| m * x[v]).sum()
        })
    }
}

/// Affine Hermitian expression `C + Σ coef·x_var` placed at entries `(r, c)`.
/// Callers supply both `(r, c)` and `(c, r)` contributions.
#[derive(Clone, Debug)]
pub struct HermExpr {
    pub constant: CMat,
    terms: Vec<(usize, usize, usize, C64)>,
}

impl HermExpr {
    pub fn new(n: usize) -> Self {
        HermExpr { constant: CMat::zeros(n, n), terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn terms(&self) -> &[(usize, usize, usize, C64)] {
        &self.terms
    }

    pub fn add_term(&mut self, r: usize, col: usize, var: usize, coef: C64) {
        if coef != ZERO {
            self.terms.push((r, col, var, coef));
        }
    }

    /// Adds `coef · X[p,q]` at `(r, c)`.
    pub fn add_entry(&mut self, r: usize, col: usize, x: &HermVar, p: usize, q: usize, coef: C64) {
        let (terms, k) = x.entry(p, q);
        for &(v, m) in &terms[..k] {
            self.add_term(r, col, v, coef * m);
        }
    }

    /// Adds `coef · X` to the block starting at `(r0, c0)`.
    pub fn add_var_block(&mut self, r0: usize, c0: usize, x: &HermVar, coef: f64) {
        for p in 0..x.n {
            for q in 0..x.n {
                self.add_entry(r0 + p, c0 + q, x, p, q, c(coef, 0.0));
            }
        }
    }

    pub fn add_constant_block(&mut self, r0: usize, c0: usize, m: &CMat) {
        let mut view = self.constant.view_mut((r0, c0), m.shape());
        view += m;
    }

    pub fn evaluate(&self, x: &[f64]) -> CMat {
        let mut m = self.constant.clone();
        for &(r, col, v, coef) in &self.terms {
            m[(r, col)] += coef * x[v];
        }
        m
    }

    /// Real symmetric embedding, upper triangle only.
    fn embed(&self) -> RealPsd {
        let n = self.dim();
        let mut out = RealPsd { n: 2 * n, entries: BTreeMap::new() };
        for r in 0..n {
            for col in 0..n {
                let z = self.constant[(r, col)];
                if r <= col {
                    out.add_const(r, col, z.re);
                    out.add_const(r + n, col + n, z.re);
                }
                out.add_const(r, col + n, -z.im);
            }
        }
        for &(r, col, v, z) in &self.terms {
            if r <= col {
                out.add_coef(r, col, v, z.re);
                out.add_coef(r + n, col + n, v, z.re);
            }
            out.add_coef(r, col + n, v, -z.im);
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
struct Affine {
    constant: f64,
    coefs: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
struct RealPsd {
    n: usize,
    /// Upper-triangular entries keyed by `(col, row)` so iteration follows
    /// Clarabel's column-major packing.
    entries: BTreeMap<(usize, usize), Affine>,
}

impl RealPsd {
    fn slot(&mut self, r: usize, col: usize) -> &mut Affine {
        debug_assert!(r <= col);
        self.entries.entry((col, r)).or_default()
    }

    fn add_const(&mut self, r: usize, col: usize, v: f64) {
        if v != 0.0 {
            self.slot(r, col).constant += v;
        }
    }

    fn add_coef(&mut self, r: usize, col: usize, var: usize, v: f64) {
        if v != 0.0 {
            self.slot(r, col).coefs.push((var, v));
        }
    }
}

/// Minimize `cᵀx` subject to equalities and PSD constraints.
#[derive(Clone, Debug, Default)]
pub struct Sdp {
    nvars: usize,
    objective: Vec<(usize, f64)>,
    eqs: Vec<(Vec<(usize, f64)>, f64)>,
    psd: Vec<RealPsd>,
}

/// Objective, constraint triplets (rows, cols, values), offsets and cones.
type Assembled = (Vec<f64>, Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>, Vec<ConeSpec>);

impl Sdp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar_var(&mut self) -> usize {
        self.nvars += 1;
        self.nvars - 1
    }

    pub fn herm_var(&mut self, n: usize) -> HermVar {
        let v = HermVar { offset: self.nvars, n };
        self.nvars += n * n;
        v
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn minimize(&mut self, var: usize, coef: f64) {
        self.objective.push((var, coef));
    }

    pub fn equal(&mut self, coefs: Vec<(usize, f64)>, rhs: f64) {
        self.eqs.push((coefs, rhs));
    }

    /// `Re Σ coef·X[p,q] = target.re` and the same for the imaginary part,
    /// skipping parts that are identically zero.
    pub fn equal_complex(&mut self, terms: &[(usize, C64)], target: C64) {
        let re: Vec<(usize, f64)> = terms.iter().filter(|t| t.1.re != 0.0).map(|t| (t.0, t.1.re)).collect();
        let im: Vec<(usize, f64)> = terms.iter().filter(|t| t.1.im != 0.0).map(|t| (t.0, t.1.im)).collect();
        if !re.is_empty() {
            self.equal(re, target.re);
        }
        if !im.is_empty() {
            self.equal(im, target.im);
        }
    }

    pub fn psd(&mut self, expr: &HermExpr) {
        self.psd.push(expr.embed());
    }

    /// `X ⪰ 0` for a Hermitian variable.
    pub fn psd_var(&mut self, x: &HermVar) {
        let mut e = HermExpr::new(x.n);
        e.add_var_block(0, 0, x, 1.0);
        self.psd(&e);
    }

    fn assemble(&self) -> Assembled {
        let mut q = vec![0.0; self.nvars];
        for &(v, w) in &self.objective {
            q[v] += w;
        }
        let (mut rows, mut cols, mut vals, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut cones = Vec::new();
        for (coefs, rhs) in &self.eqs {
            let row = b.len();
            for &(v, w) in coefs {
                rows.push(row);
                cols.push(v);
                vals.push(w);
            }
            b.push(*rhs);
        }
        if !self.eqs.is_empty() {
            cones.push(ConeSpec::Zero(self.eqs.len()));
        }
        let r2 = std::f64::consts::SQRT_2;
        for block in &self.psd {
            let base = b.len();
            let tri = block.n * (block.n + 1) / 2;
            b.resize(base + tri, 0.0);
            for (&(col, r), aff) in &block.entries {
                let idx = base + col * (col + 1) / 2 + r;
                let scale = if r == col { 1.0 } else { r2 };
                b[idx] = scale * aff.constant;
                for &(v, w) in &aff.coefs {
                    rows.push(idx);
                    cols.push(v);
                    vals.push(-scale * w);
                }
            }
            cones.push(ConeSpec::Psd(block.n));
        }
        (q, rows, cols, vals, b, cones)
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<RawSolution> {
        let (q, rows, cols, vals, b, cones) = self.assemble();
        let m = b.len();
        let a = CscMatrix::new_from_triplets(m, self.nvars, rows, cols, vals);
        let p = CscMatrix::zeros((self.nvars, self.nvars));
        let cones: Vec<SupportedConeT<f64>> = cones
            .iter()
            .map(|cs| match *cs {
                ConeSpec::Zero(k) => SupportedConeT::ZeroConeT(k),
                ConeSpec::Psd(n) => SupportedConeT::PSDTriangleConeT(n),
            })
            .collect();
        // The supernodal factorization is much faster on the dense cone
        // blocks; the simplicial one is the fallback on numerical trouble.
        let mut last = None;
        for method in ["faer", "qdldl"] {
            let settings = DefaultSettings {
                verbose: false,
                max_iter: opts.max_iter,
                tol_feas: opts.feas,
                tol_gap_abs: opts.gap,
                tol_gap_rel: opts.gap,
                direct_solve_method: method.to_string(),
                ..DefaultSettings::default()
            };
            let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings)
                .map_err(|e| Error::Solver(format!("setup failed: {e}")))?;
            solver.solve();
            let sol = &solver.solution;
            let status = match sol.status {
                SolverStatus::Solved => SdpStatus::Optimal,
                SolverStatus::AlmostSolved => SdpStatus::NearOptimal,
                SolverStatus::PrimalInfeasible
                | SolverStatus::DualInfeasible
                | SolverStatus::AlmostPrimalInfeasible
                | SolverStatus::AlmostDualInfeasible => SdpStatus::Infeasible,
                _ => SdpStatus::SolverError,
            };
            let raw = RawSolution { status, objective: sol.obj_val, dual_objective: sol.obj_val_dual, x: sol.x.clone() };
            if status != SdpStatus::SolverError {
                return Ok(raw);
            }
            last = Some(raw);
        }
        Ok(last.expect("at least one method runs"))
    }

    /// Conic problem data in sparse triplet form.
    pub fn instance(&self) -> SdpInstance {
        let (q, rows, cols, vals, b, cones) = self.assemble();
        SdpInstance {
            format: "min q'x s.t. b - Ax in K",
            nvars: self.nvars,
            q,
            a: Triplets { nrows: b.len(), rows, cols, vals },
            b,
            cones,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "type", content = "dim", rename_all = "snake_case")]
pub enum ConeSpec {
    /// Equality rows.
    Zero(usize),
    /// Real PSD cone of the given side, packed as the column-major upper
    /// triangle with off-diagonals scaled by √2.
    Psd(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct Triplets {
    pub nrows: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Serializable problem instance for cross-checking with other solvers.
#[derive(Clone, Debug, Serialize)]
pub struct SdpInstance {
    pub format: &'static str,
    pub nvars: usize,
    pub q: Vec<f64>,
    pub a: Triplets,
    pub b: Vec<f64>,
    pub cones: Vec<ConeSpec>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn smallest_eigenvalue_by_sdp() {
        // max t s.t. H - tI ⪰ 0 gives λ_min(H).
        let h = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let mut sdp = Sdp::new();
        let t = sdp.scalar_var();
        sdp.minimize(t, -1.0);
        let mut e = HermExpr::new(2);
        e.constant = h.clone();
        e.add_term(0, 0, t, c(-1.0, 0.0));
        e.add_term(1, 1, t, c(-1.0, 0.0));
        sdp.psd(&e);
        let sol = sdp.solve(&SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.x[t] - linalg::min_eig(&h)).abs() < 1e-7);
    }

    #[test]
    fn hermitian_variable_round_trip() {
        // min Tr(C X) over density matrices is λ_min(C), attained at the
        // ground state projector.
        let cm = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.5), c(0.5, -0.5), c(-1.0, 0.0)]);
        let mut sdp = Sdp::new();
        let x = sdp.herm_var(2);
        sdp.psd_var(&x);
        for p in 0..2 {
            for q in 0..2 {
                let (terms, k) = x.entry(q, p);
                for &(v, m) in &terms[..k] {
                    sdp.minimize(v, (cm[(p, q)] * m).re);
                }
            }
        }
        sdp.equal(vec![(x.diag_var(0), 1.0), (x.diag_var(1), 1.0)], 1.0);
        let sol = sdp.solve(&SdpOptions::default()).unwrap();
        assert!((sol.objective - linalg::min_eig(&cm)).abs() < 1e-7);
        let xv = x.value(&sol.x);
        assert!(linalg::hermiticity_error(&xv) < 1e-12);
        assert!((linalg::real_inner(&cm, &xv) - sol.objective).abs() < 1e-7);
    }

    #[test]
    fn instance_dump_is_consistent() {
        let mut sdp = Sdp::new();
        let x = sdp.herm_var(2);
        sdp.psd_var(&x);
        sdp.equal(vec![(x.diag_var(0), 1.0)], 1.0);
        let inst = sdp.instance();
        assert_eq!(inst.nvars, 4);
        assert_eq!(inst.b.len(), 1 + 10);
        assert_eq!(inst.a.rows.len(), inst.a.vals.len());
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"psd\""));
    }
}

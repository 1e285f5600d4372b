//! Randomized search for channels that are close to bi-PPT (both `N` and
//! `N^c` PPT) while keeping positive coherent information.
//!
//! Each seed descends the partial-transpose negativity of both Choi
//! operators over Stinespring isometries. Along the way the coherent
//! information drops to zero; the search keeps the last point of the path
//! where it is still above the floor, refines it by bisection, and only
//! then runs the SDPs that score it.

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::optim::ascent::{maximize, restart_rng};
use crate::optim::{self, OptimOptions, DEFAULT_SEED};
use crate::sdp::{self, SdpOptions};

/// Iterations between path snapshots.
const CHUNK: usize = 5;
/// Bisection steps between the last good and first bad snapshot.
const BISECTIONS: usize = 12;
/// The refined point keeps coherent information at this multiple of the floor.
const MARGIN: f64 = 2.0;
/// Negativity below which a path counts as converged onto the bi-PPT set.
const FLAT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub dim_in: usize,
    pub dim_out: usize,
    pub dim_env: usize,
    /// Weight of the channel's negativity in the objective.
    pub weight_channel: f64,
    /// Weight of the complement's negativity.
    pub weight_complement: f64,
    /// Gradient iterations per seed.
    pub iterations: usize,
    pub seed: u64,
    /// Number of consecutive seeds starting at `seed`.
    pub seeds: usize,
    /// Largest accepted trace distance to the PPT set, on each side.
    pub ppt_eps: f64,
    /// Largest accepted transpose bound, on each side.
    pub q_upper_max: f64,
    pub coherent_info_min: f64,
    /// Optimizer settings for the coherent information.
    pub optim: OptimOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            dim_in: 3,
            dim_out: 3,
            dim_env: 4,
            weight_channel: 1.0,
            weight_complement: 1.0,
            iterations: 400,
            seed: DEFAULT_SEED,
            seeds: 16,
            ppt_eps: 0.05,
            q_upper_max: 0.05,
            coherent_info_min: 1e-4,
            optim: OptimOptions { restarts: 6, max_iter: 500, ..OptimOptions::default() },
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim_in == 0 || self.dim_out == 0 || self.dim_env == 0 {
            return Err(Error::Config("dimensions must be positive".into()));
        }
        if self.dim_out * self.dim_env < self.dim_in {
            return Err(Error::Config(format!(
                "no isometry from dimension {} into {}·{}",
                self.dim_in, self.dim_out, self.dim_env
            )));
        }
        if self.iterations == 0 || self.seeds == 0 {
            return Err(Error::Config("iteration budget and seed count must be positive".into()));
        }
        let finite = [self.weight_channel, self.weight_complement, self.ppt_eps, self.q_upper_max, self.coherent_info_min];
        if finite.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config("weights and thresholds must be finite and non-negative".into()));
        }
        self.optim.validate()
    }

    fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.seeds as u64).map(move |k| self.seed.wrapping_add(k))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub ppt_dist_n: f64,
    pub ppt_dist_nc: f64,
    pub q_upper_n: f64,
    pub q_upper_nc: f64,
    pub coh_info_lb: f64,
}

impl Scores {
    /// Ranking key: the larger of the two transpose bounds.
    pub fn rank(&self) -> f64 {
        self.q_upper_n.max(self.q_upper_nc)
    }

    pub fn passes(&self, cfg: &SearchConfig) -> bool {
        self.ppt_dist_n <= cfg.ppt_eps
            && self.ppt_dist_nc <= cfg.ppt_eps
            && self.q_upper_n <= cfg.q_upper_max
            && self.q_upper_nc <= cfg.q_upper_max
            && self.coh_info_lb >= cfg.coherent_info_min
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchRecord {
    pub channel: Channel,
    pub scores: Scores,
    pub seed: u64,
    /// Gradient iteration at which the candidate was taken.
    pub iteration: usize,
    pub accepted: bool,
}

/// Recomputes every score of a channel.
pub fn score(ch: &Channel, opts: &OptimOptions) -> Result<Scores> {
    let nc = ch.complementary();
    Ok(Scores {
        ppt_dist_n: retrying(|o| sdp::ppt_distance_with(&ch.choi(), o))?,
        ppt_dist_nc: retrying(|o| sdp::ppt_distance_with(&nc.choi(), o))?,
        q_upper_n: retrying(|o| sdp::transpose_q_upper_with(ch, o))?,
        q_upper_nc: retrying(|o| sdp::transpose_q_upper_with(&nc, o))?,
        coh_info_lb: optim::q1(ch, opts).value,
    })
}

/// Solves with default tolerances, then once more with looser ones.
fn retrying(solve: impl Fn(&SdpOptions) -> Result<sdp::SdpSolution>) -> Result<f64> {
    let loose = SdpOptions { feas: 1e-7, gap: 1e-7, max_iter: 500 };
    match solve(&SdpOptions::default()) {
        Err(Error::Solver(_)) => solve(&loose).map(|s| s.objective),
        other => other.map(|s| s.objective),
    }
}

/// Sum of negative eigenvalues of `J^{T_2}` (as a positive number) and its
/// gradient in `J`.
fn negativity(j: &CMat, dims: [usize; 2]) -> (f64, CMat) {
    let (vals, vecs) = linalg::eigh(&linalg::partial_transpose(j, &dims, &[1]));
    let weights: Vec<f64> = vals.iter().map(|&l| if l < 0.0 { -1.0 } else { 0.0 }).collect();
    let value = -vals.iter().filter(|&&l| l < 0.0).sum::<f64>();
    let grad = linalg::from_spectrum(&weights, &vecs);
    (value, linalg::partial_transpose(&grad, &dims, &[1]))
}

struct Shape {
    din: usize,
    dout: usize,
    denv: usize,
}

impl Shape {
    /// Factors `W` with `J(N) = W_N W_N†` and `J(N^c) = W_C W_C†`.
    fn factors(&self, v: &CMat) -> (CMat, CMat) {
        let (din, dout, denv) = (self.din, self.dout, self.denv);
        let wn = CMat::from_fn(din * dout, denv, |r, e| v[((r % dout) * denv + e, r / dout)]);
        let wc = CMat::from_fn(din * denv, dout, |r, b| v[(b * denv + r % denv, r / denv)]);
        (wn, wc)
    }

    /// Weighted negativity of both Choi operators and its gradient in `v`.
    fn objective(&self, v: &CMat, weights: [f64; 2]) -> (f64, CMat) {
        let (din, dout, denv) = (self.din, self.dout, self.denv);
        let (wn, wc) = self.factors(v);
        let (gn, jn) = negativity(&(&wn * wn.adjoint()), [din, dout]);
        let (gc, jc) = negativity(&(&wc * wc.adjoint()), [din, denv]);
        let dn = (jn * &wn).scale(2.0 * weights[0]);
        let dc = (jc * &wc).scale(2.0 * weights[1]);
        let mut grad = CMat::zeros(v.nrows(), din);
        for a in 0..din {
            for b in 0..dout {
                for e in 0..denv {
                    grad[(b * denv + e, a)] = dn[(a * dout + b, e)] + dc[(a * denv + e, b)];
                }
            }
        }
        (weights[0] * gn + weights[1] * gc, grad)
    }

    fn channel(&self, v: &CMat) -> Result<Channel> {
        Channel::from_stinespring(v, self.dout, self.denv)
    }
}

/// Negativity descent from a random isometry; returns `(iteration, V)`
/// snapshots, the first being the starting point.
fn descend(shape: &Shape, cfg: &SearchConfig, seed: u64) -> Vec<(usize, CMat)> {
    let mut rng = restart_rng(seed, 0);
    let mut v = linalg::random_isometry(&mut rng, shape.dout * shape.denv, shape.din);
    let weights = [cfg.weight_channel, cfg.weight_complement];
    let mut path = vec![(0, v.clone())];
    let mut done = 0;
    while done < cfg.iterations {
        let steps = CHUNK.min(cfg.iterations - done);
        let f = |x: &[CMat]| {
            let (val, g) = shape.objective(&x[0], weights);
            (-val, vec![linalg::isometry_tangent(&x[0], &g.scale(-1.0))])
        };
        let polar = |x: &mut [CMat]| x[0] = linalg::polar_isometry(&x[0]);
        let out = maximize(f, polar, vec![v], steps, 1e-14);
        v = out.x.into_iter().next().expect("one block");
        done += steps;
        path.push((done, v.clone()));
        if -out.value < FLAT || (out.converged && out.iterations < steps) {
            break;
        }
    }
    path
}

fn coherent(shape: &Shape, v: &CMat, opts: &OptimOptions) -> f64 {
    shape.channel(v).map(|ch| optim::q1(&ch, opts).value).unwrap_or(f64::NEG_INFINITY)
}

/// Picks the path point nearest the bi-PPT end whose coherent information
/// stays above `MARGIN · coherent_info_min`.
fn refine(shape: &Shape, path: &[(usize, CMat)], cfg: &SearchConfig) -> (usize, CMat) {
    let target = MARGIN * cfg.coherent_info_min;
    let opts = OptimOptions { restarts: cfg.optim.restarts.min(4), ..cfg.optim.clone() };
    let good = |v: &CMat| coherent(shape, v, &opts) >= target;
    let last = path.len() - 1;
    if good(&path[last].1) {
        return path[last].clone();
    }
    if !good(&path[0].1) {
        return path[last].clone();
    }
    // Coherent information decreases along the path; find the boundary.
    let (mut lo, mut hi) = (0, last);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if good(&path[mid].1) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (&path[lo].1, &path[hi].1);
    let (mut t_lo, mut t_hi) = (0.0, 1.0);
    let at = |t: f64| linalg::polar_isometry(&(a.scale(1.0 - t) + b.scale(t)));
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (t_lo + t_hi);
        if good(&at(mid)) {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    (path[lo].0, at(t_lo))
}

fn run_seed(cfg: &SearchConfig, seed: u64) -> Result<SearchRecord> {
    let shape = Shape { din: cfg.dim_in, dout: cfg.dim_out, denv: cfg.dim_env };
    let path = descend(&shape, cfg, seed);
    let (iteration, v) = refine(&shape, &path, cfg);
    let channel = shape.channel(&v)?;
    let scores = score(&channel, &cfg.optim)?;
    let accepted = scores.passes(cfg);
    Ok(SearchRecord { channel, scores, seed, iteration, accepted })
}

/// Accepted records first, then by rank, seed and iteration.
pub fn sort_records(records: &mut [SearchRecord]) {
    records.sort_by(|x, y| {
        (!x.accepted)
            .cmp(&!y.accepted)
            .then(x.scores.rank().total_cmp(&y.scores.rank()))
            .then(x.seed.cmp(&y.seed))
            .then(x.iteration.cmp(&y.iteration))
    });
}

/// A seed whose candidate could not be scored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub records: Vec<SearchRecord>,
    pub failures: Vec<SeedFailure>,
}

impl SearchOutcome {
    pub fn accepted(&self) -> impl Iterator<Item = &SearchRecord> {
        self.records.iter().filter(|r| r.accepted)
    }
}

/// Runs every seed of the configuration in parallel; one record per scored seed.
pub fn search(cfg: &SearchConfig) -> Result<SearchOutcome> {
    search_resume(cfg, Vec::new())
}

/// As [`search`], skipping seeds already present in `previous`.
pub fn search_resume(cfg: &SearchConfig, previous: Vec<SearchRecord>) -> Result<SearchOutcome> {
    cfg.validate()?;
    let todo: Vec<u64> = cfg.seeds().filter(|s| !previous.iter().any(|r| r.seed == *s)).collect();
    let fresh: Vec<(u64, Result<SearchRecord>)> = todo.par_iter().map(|&s| (s, run_seed(cfg, s))).collect();
    let mut records = previous;
    let mut failures = Vec::new();
    for (seed, r) in fresh {
        match r {
            Ok(rec) => records.push(rec),
            Err(e @ Error::Solver(_)) => failures.push(SeedFailure { seed, error: e.to_string() }),
            Err(e) => return Err(e),
        }
    }
    sort_records(&mut records);
    Ok(SearchOutcome { records, failures })
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[SearchRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SearchRecord>> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipptVerdict {
    pub bippt: bool,
    pub ppt_min_eig: f64,
    pub ppt_min_eig_complement: f64,
    pub antidegradable_eps: f64,
    /// `TQ(N) + TQ(N^c)`, an SDP-certified bound on `P(N)`.
    pub p_upper_certified: f64,
    /// Small certified private capacity without being antidegradable.
    pub candidate: bool,
}

/// Threshold on `p_upper_certified` for a flagged candidate.
pub const CANDIDATE_P_UPPER: f64 = 0.1;
/// Minimum antidegradability parameter for a flagged candidate.
pub const CANDIDATE_ANTI_EPS: f64 = 0.01;

pub fn bippt_verdict(ch: &Channel, opts: &SdpOptions) -> Result<BipptVerdict> {
    let nc = ch.complementary();
    let (jn, jc) = (ch.choi(), nc.choi());
    let p_upper_certified = sdp::transpose_q_upper_with(ch, opts)?.objective + sdp::transpose_q_upper_with(&nc, opts)?.objective;
    let antidegradable_eps = sdp::eps_antidegradable_with(ch, opts)?.eps.max(0.0);
    Ok(BipptVerdict {
        bippt: sdp::ppt_check(&jn) && sdp::ppt_check(&jc),
        ppt_min_eig: sdp::ppt_min_eig(&jn),
        ppt_min_eig_complement: sdp::ppt_min_eig(&jc),
        antidegradable_eps,
        p_upper_certified,
        candidate: p_upper_certified <= CANDIDATE_P_UPPER && antidegradable_eps > CANDIDATE_ANTI_EPS,
    })
}

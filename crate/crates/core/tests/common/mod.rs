//! Helpers shared by the integration tests.
#![allow(dead_code)]

use capbound::channel::Channel;
use capbound::entropy::{conditional_mutual_information, mutual_information, LabeledState};
use capbound::linalg::{self, CMat, C64};
use capbound::optim::ascent::restart_rng;
use capbound::state::DensityMatrix;
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    restart_rng(seed, 0)
}

/// Random channel with a Haar-like Stinespring isometry.
pub fn random_channel<R: Rng>(rng: &mut R, din: usize, dout: usize, denv: usize) -> Channel {
    let v = linalg::random_isometry(rng, dout * denv, din);
    Channel::from_stinespring(&v, dout, denv).unwrap()
}

/// Random channel with dimensions in `1..=max` (input at least 2).
pub fn random_small_channel<R: Rng>(rng: &mut R, max: usize) -> Channel {
    let din = rng.gen_range(2..=max);
    let dout = rng.gen_range(1..=max);
    let min_env = din.div_ceil(dout);
    let denv = rng.gen_range(min_env..=max.max(min_env));
    random_channel(rng, din, dout, denv)
}

fn basis(d: usize, k: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(k, k)] = C64::new(1.0, 0.0);
    m
}

/// Both sides of the private-information split for an ensemble `{p(u), ρ^u}`:
/// `I(U:B) − I(U:E)` and
/// `I(UV:B) − I(UV:E) + Σ_u p(u)[I(V:E|U=u) − I(V:B|U=u)]`,
/// with `V` indexing the spectral decomposition of each `ρ^u`.
pub fn private_split(ch: &Channel, ensemble: &[(f64, CMat)]) -> (f64, f64) {
    let w = ch.stinespring();
    let (du, dv) = (ensemble.len(), ch.dim_in());
    let (db, de) = (ch.dim_out(), ch.dim_env());
    let labels = vec![("U", du), ("V", dv), ("B", db), ("E", de)];

    let mut joint = CMat::zeros(du * dv * db * de, du * dv * db * de);
    let mut conditional = 0.0;
    for (u, (pu, rho)) in ensemble.iter().enumerate() {
        let (vals, vecs) = linalg::eigh(rho);
        let mut given_u = CMat::zeros(dv * db * de, dv * db * de);
        for (v, &pv) in vals.iter().enumerate() {
            let out = linalg::projector(&(&w * vecs.column(v)));
            given_u += linalg::kron(&basis(dv, v), &out) * C64::new(pv.max(0.0), 0.0);
        }
        joint += linalg::kron(&basis(du, u), &given_u) * C64::new(*pu, 0.0);
        let s = LabeledState::new(labels[1..].to_vec(), DensityMatrix::from_trusted(given_u)).unwrap();
        let diff = mutual_information(&s, &["V"], &["E"]).unwrap() - mutual_information(&s, &["V"], &["B"]).unwrap();
        conditional += pu * diff;
    }
    let s = LabeledState::new(labels, DensityMatrix::from_trusted(joint)).unwrap();
    let mi = |a: &[&str], b: &[&str]| mutual_information(&s, a, b).unwrap();
    let lhs = mi(&["U"], &["B"]) - mi(&["U"], &["E"]);
    let rhs = mi(&["U", "V"], &["B"]) - mi(&["U", "V"], &["E"]) + conditional;
    // The conditional terms also come straight from the joint state.
    let cmi = conditional_mutual_information(&s, &["V"], &["E"], &["U"]).unwrap()
        - conditional_mutual_information(&s, &["V"], &["B"], &["U"]).unwrap();
    assert!((cmi - conditional).abs() < 1e-9, "conditional terms disagree: {cmi} vs {conditional}");
    (lhs, rhs)
}

/// Random ensemble of `n` mixed states on dimension `d`.
pub fn random_ensemble<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<(f64, CMat)> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.into_iter()
        .map(|p| (p / total, linalg::random_density(rng, d, d)))
        .collect()
}

/// Telescoped n-letter coherent information of `N^{⊗n}` on `rho`.
pub struct Telescope {
    /// `H(Bⁿ) − H(Eⁿ)`.
    pub total: f64,
    /// `H(E_1^{i−1} B_i B_{i+1}^n) − H(E_1^{i} B_{i+1}^n)` for each `i`.
    pub steps: Vec<f64>,
    /// `H(B_i) − H(E_i) + I(E_i : E_1^{i−1} B_{i+1}^n) − I(B_i : E_1^{i−1} B_{i+1}^n)`.
    pub split_steps: Vec<f64>,
}

pub fn telescope(ch: &Channel, n: usize, rho: &CMat) -> Telescope {
    let w1 = ch.stinespring();
    let mut w = CMat::identity(1, 1);
    for _ in 0..n {
        w = linalg::kron(&w, &w1);
    }
    let out = &w * rho * w.adjoint();
    let b: Vec<String> = (1..=n).map(|i| format!("B{i}")).collect();
    let e: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
    let mut systems = Vec::new();
    for i in 0..n {
        systems.push((b[i].clone(), ch.dim_out()));
        systems.push((e[i].clone(), ch.dim_env()));
    }
    let s = LabeledState::new(systems, DensityMatrix::from_trusted(out)).unwrap();
    let h = |sys: &[&str]| s.entropy(sys).unwrap();

    let total = h(&names(&b)) - h(&names(&e));
    let mut steps = Vec::new();
    let mut split_steps = Vec::new();
    for i in 0..n {
        let rest: Vec<&str> = names(&e[..i]).into_iter().chain(names(&b[i + 1..])).collect();
        steps.push(h(&with(&rest, &b[i])) - h(&with(&rest, &e[i])));
        let mi = |x: &str| mutual_information(&s, &[x], &rest).unwrap();
        split_steps.push(h(&[&b[i]]) - h(&[&e[i]]) + mi(&e[i]) - mi(&b[i]));
    }
    Telescope { total, steps, split_steps }
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn with<'a>(rest: &[&'a str], x: &'a str) -> Vec<&'a str> {
    rest.iter().copied().chain([x]).collect()
}

/// Random pure or mixed input on `d^n`.
pub fn random_input<R: Rng>(rng: &mut R, dim: usize) -> CMat {
    let rank = rng.gen_range(1..=dim);
    linalg::random_density(rng, dim, rank)
}

pub fn pure_density(v: &DVector<C64>) -> CMat {
    DensityMatrix::pure(v).into_matrix()
}

//! Single-letter estimate of `max_{ρ,σ} D(N(ρ)‖N(σ)) − D(N^c(ρ)‖N^c(σ))`.

use std::f64::consts::LN_2;

use crate::channel::Channel;
use crate::entropy::{relative_entropy_of, LOG_CUTOFF};
use crate::linalg::{self, CMat};

use super::ascent::{best_of, density_grad, density_of, maximize, unit_blocks, Trial};
use super::{Argument, Certainty, EstimateResult, OptimOptions};

/// Values above this are reported as a sign of an unbounded supremum.
const DIVERGENCE: f64 = 20.0;

/// The objective at a given pair, with exact support handling: `+∞` when
/// the first term diverges and `−∞` when only the second does.
pub fn r1_objective(ch: &Channel, rho: &CMat, sigma: &CMat) -> f64 {
    let nc = ch.complementary();
    let first = relative_entropy_of(&ch.apply(rho), &ch.apply(sigma));
    let second = relative_entropy_of(&nc.apply(rho), &nc.apply(sigma));
    match (first.is_finite(), second.is_finite()) {
        (true, true) => first - second,
        (false, true) => f64::INFINITY,
        (_, false) => f64::NEG_INFINITY,
    }
}

/// Clipped `D(a‖b)` in bits and its gradients in `a` and `b`.
fn smooth_divergence(a: &CMat, b: &CMat) -> (f64, CMat, CMat) {
    let clip = |x: f64| x.max(LOG_CUTOFF).ln();
    let dclip = |x: f64| if x > LOG_CUTOFF { 1.0 / x } else { 0.0 };
    let log_a = linalg::spectral_apply(a, clip);
    let (bv, bvec) = linalg::eigh(b);
    let log_b = linalg::from_spectrum(&bv.iter().map(|&x| clip(x)).collect::<Vec<_>>(), &bvec);
    let diff = &log_a - &log_b;
    let value = linalg::real_inner(a, &diff) / LN_2;
    let ga = (diff + linalg::identity(a.nrows())).unscale(LN_2);
    let gb = linalg::frechet_from_eig(&bv, &bvec, a, clip, dclip).unscale(-LN_2);
    (value, ga, gb)
}

fn smooth_objective(ch: &Channel, nc: &Channel, x: &[CMat]) -> (f64, Vec<CMat>) {
    let rho = density_of(&x[0]);
    let sigma = density_of(&x[1]);
    let (v1, a1, b1) = smooth_divergence(&ch.apply(&rho), &ch.apply(&sigma));
    let (v2, a2, b2) = smooth_divergence(&nc.apply(&rho), &nc.apply(&sigma));
    let grho = ch.apply_adjoint(&a1) - nc.apply_adjoint(&a2);
    let gsig = ch.apply_adjoint(&b1) - nc.apply_adjoint(&b2);
    (v1 - v2, vec![density_grad(&x[0], &rho, &grho), density_grad(&x[1], &sigma, &gsig)])
}

/// Heuristic lower bound on the single-letter quantity. Pairs where the
/// complement term diverges are skipped; a pair with `ρ = σ` always
/// contributes 0. A `divergent` flag marks runs whose value keeps growing
/// toward the support boundary of `N(σ)`.
pub fn r1_estimate(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let nc = ch.complementary();
    let d = ch.dim_in();
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |_, rng| {
        let x0 = vec![linalg::random_gaussian(rng, d, d), linalg::random_gaussian(rng, d, d)];
        let out = maximize(|x| smooth_objective(ch, &nc, x), unit_blocks, x0, opts.max_iter, opts.tol);
        let rho = density_of(&out.x[0]);
        let sigma = density_of(&out.x[1]);
        let exact = r1_objective(ch, &rho, &sigma);
        // Exact value when finite, the smoothed value along a divergent
        // direction, and nothing when only the complement term diverges.
        let value = if exact == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if exact.is_finite() {
            exact
        } else {
            out.value
        };
        let boundary = linalg::min_eig(&ch.apply(&sigma)) < 1e-9;
        Trial { value, arg: (rho, sigma, boundary), converged: out.converged }
    });
    let (rho, sigma, boundary) = best.arg;
    let mut flags = vec![];
    let value = if best.value > 0.0 {
        if best.value > DIVERGENCE || (boundary && conv < 1.0) {
            flags.push("divergent".to_string());
        }
        best.value
    } else {
        0.0
    };
    let argument = if value > 0.0 {
        Argument::Pair { rho, sigma }
    } else {
        let m = CMat::identity(d, d).unscale(d as f64);
        Argument::Pair { rho: m.clone(), sigma: m }
    };
    EstimateResult {
        value,
        argument,
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty: Certainty::HeuristicLowerBound,
        gap: None,
        flags,
    }
}

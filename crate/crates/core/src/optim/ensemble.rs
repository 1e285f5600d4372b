//! Ensemble quantities: the Holevo quantity and the private information.

use crate::channel::Channel;
use crate::entropy::{entropy_with_grad, relative_entropy_of, EntropyFunctional};
use crate::linalg::{self, CMat};

use super::ascent::{best_of, density_grad, density_of, maximize, Trial};
use super::{q1, Argument, Certainty, EstimateResult, OptimOptions};

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn mix(probs: &[f64], states: &[CMat]) -> CMat {
    let mut out = CMat::zeros(states[0].nrows(), states[0].ncols());
    for (p, s) in probs.iter().zip(states) {
        out += s.scale(*p);
    }
    out
}

/// `I(X:B)` and the gradients with respect to each ensemble state.
fn holevo_terms(ch: &Channel, probs: &[f64], states: &[CMat]) -> (f64, Vec<CMat>) {
    let outs: Vec<CMat> = states.iter().map(|s| ch.apply(s)).collect();
    let (h_avg, g_avg) = entropy_with_grad(&mix(probs, &outs));
    let mut value = h_avg;
    let grads = probs
        .iter()
        .zip(&outs)
        .map(|(&p, o)| {
            let (h, g) = entropy_with_grad(o);
            value -= p * h;
            ch.apply_adjoint(&(&g_avg - g)).scale(p)
        })
        .collect();
    (value, grads)
}

/// Holevo quantity `χ(N)` over pure-state ensembles of size `dim_in²`,
/// alternating Blahut-Arimoto updates of the probabilities with gradient
/// steps on the states.
pub fn holevo_chi(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    let d = ch.dim_in();
    let m = d * d;
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |i, rng| {
        let mut vecs: Vec<CMat> = if i == 0 {
            (0..m).map(|k| CMat::from_fn(d, 1, |r, _| linalg::c(if r == k % d { 1.0 } else { 0.0 }, 0.0))
                + linalg::random_gaussian(rng, d, 1).scale(1e-2)).collect()
        } else {
            (0..m).map(|_| linalg::random_gaussian(rng, d, 1)).collect()
        };
        let mut probs = vec![1.0 / m as f64; m];
        let mut alpha = 1.0;
        let mut value = f64::NEG_INFINITY;
        let mut small = 0;
        let mut converged = false;
        for _ in 0..opts.max_iter {
            let states: Vec<CMat> = vecs.iter().map(density_of).collect();
            // Blahut-Arimoto: p(x) ∝ p(x) 2^{D(N(ψ_x) ‖ N(ρ̄))}.
            let outs: Vec<CMat> = states.iter().map(|s| ch.apply(s)).collect();
            let avg = mix(&probs, &outs);
            let w: Vec<f64> = probs
                .iter()
                .zip(&outs)
                .map(|(&p, o)| {
                    let dv = relative_entropy_of(o, &avg);
                    if dv.is_finite() { p * dv.exp2() } else { p }
                })
                .collect();
            let s: f64 = w.iter().sum();
            probs = w.into_iter().map(|x| x / s).collect();

            // One Armijo step on the state vectors.
            let (v0, grads) = holevo_terms(ch, &probs, &states);
            let gv: Vec<CMat> =
                vecs.iter().zip(&states).zip(&grads).map(|((g, r), gm)| density_grad(g, r, gm)).collect();
            let gg: f64 = gv.iter().map(|g| g.norm_squared()).sum();
            let mut step = alpha;
            let mut new_value = v0;
            while step > 1e-14 {
                let cand: Vec<CMat> = vecs.iter().zip(&gv).map(|(v, g)| {
                    let x = v + g.scale(step);
                    let n = x.norm();
                    x.unscale(n)
                }).collect();
                let cs: Vec<CMat> = cand.iter().map(density_of).collect();
                let (vc, _) = holevo_terms(ch, &probs, &cs);
                if vc >= v0 + 1e-4 * step * gg {
                    vecs = cand;
                    new_value = vc;
                    alpha = step * 2.0;
                    break;
                }
                step *= 0.5;
            }
            if step <= 1e-14 {
                alpha = 1.0;
            }
            if new_value - value < opts.tol {
                small += 1;
                if small >= 3 {
                    converged = true;
                    break;
                }
            } else {
                small = 0;
            }
            value = value.max(new_value);
        }
        let states: Vec<CMat> = vecs.iter().map(density_of).collect();
        let (v, _) = holevo_terms(ch, &probs, &states);
        Trial { value: v, arg: (probs, states), converged }
    });
    let (probs, states) = best.arg;
    EstimateResult {
        value: best.value,
        argument: Argument::Ensemble { probs, states },
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty: Certainty::HeuristicLowerBound,
        gap: None,
        flags: vec![],
    }
}

/// Private-information objective `Ic(ρ̄) − Σ p_u Ic(ρ_u)` on an ensemble,
/// with parameters `[logits, G_1, …, G_m]`.
fn private_objective(f: &EntropyFunctional, x: &[CMat]) -> (f64, Vec<CMat>) {
    let logits: Vec<f64> = x[0].iter().map(|z| z.re).collect();
    let probs = softmax(&logits);
    let states: Vec<CMat> = x[1..].iter().map(density_of).collect();
    let (v_avg, g_avg) = f.value_grad(&mix(&probs, &states));
    let mut value = v_avg;
    let mut a = Vec::with_capacity(probs.len());
    let mut grads = vec![CMat::zeros(x[0].nrows(), 1)];
    for ((p, s), g) in probs.iter().zip(&states).zip(&x[1..]) {
        let (v, gu) = f.value_grad(s);
        value -= p * v;
        a.push(linalg::real_inner(&g_avg, s) - v);
        grads.push(density_grad(g, s, &(&g_avg - gu).scale(*p)));
    }
    let mean: f64 = probs.iter().zip(&a).map(|(p, ai)| p * ai).sum();
    for (k, (p, ai)) in probs.iter().zip(&a).enumerate() {
        grads[0][(k, 0)] = linalg::c(p * (ai - mean), 0.0);
    }
    (value, grads)
}

fn normalize_ensemble(x: &mut [CMat]) {
    let mean = x[0].iter().map(|z| z.re).sum::<f64>() / x[0].nrows() as f64;
    for z in x[0].iter_mut() {
        *z = linalg::c(z.re - mean, 0.0);
    }
    super::ascent::unit_blocks(&mut x[1..]);
}

/// Private information `P¹(N) = max I(U:B) − I(U:E)` over ensembles of
/// `dim_in²` mixed states.
pub fn p1(ch: &Channel, opts: &OptimOptions) -> EstimateResult {
    p1_from(ch, &q1(ch, opts), opts)
}

/// As [`p1`], warm-started from the eigen-ensemble of a `Q¹` optimizer; the
/// result is never below that `Q¹` value.
pub fn p1_from(ch: &Channel, q1_result: &EstimateResult, opts: &OptimOptions) -> EstimateResult {
    let f = EntropyFunctional::coherent_info(ch);
    let d = ch.dim_in();
    let m = d * d;
    let warm: Option<(Vec<f64>, Vec<CMat>)> = q1_result.state().map(|rho| {
        let (vals, vecs) = linalg::eigh(rho);
        let mut probs = vec![0.0; m];
        let mut states = Vec::with_capacity(m);
        for k in 0..m {
            let col = vecs.column(k % d).into_owned();
            states.push(linalg::projector(&col));
            if k < d {
                probs[k] = vals[k].max(0.0);
            }
        }
        (probs, states)
    });
    let (best, _, conv) = best_of(opts.restarts, opts.seed, |i, rng| {
        let x0: Vec<CMat> = match (i, &warm) {
            (0, Some((probs, states))) => {
                let logits = CMat::from_fn(m, 1, |k, _| linalg::c(probs[k].max(1e-12).ln(), 0.0));
                std::iter::once(logits)
                    .chain(states.iter().map(|s| {
                        // A pure start stays pure under the G-update, so
                        // give every member a small mixed component.
                        linalg::psd_sqrt(s) + linalg::random_gaussian(rng, d, d).scale(1e-3)
                    }))
                    .collect()
            }
            _ => std::iter::once(CMat::from_fn(m, 1, |_, _| linalg::c(rand::Rng::gen::<f64>(rng), 0.0)))
                .chain((0..m).map(|_| linalg::random_gaussian(rng, d, d)))
                .collect(),
        };
        let out = maximize(|x| private_objective(&f, x), normalize_ensemble, x0, opts.max_iter, opts.tol);
        let probs = softmax(&out.x[0].iter().map(|z| z.re).collect::<Vec<_>>());
        let states = out.x[1..].iter().map(density_of).collect();
        Trial { value: out.value, arg: (probs, states), converged: out.converged }
    });
    let (value, argument) = match &warm {
        Some((probs, states)) if q1_result.value > best.value => {
            (q1_result.value, Argument::Ensemble { probs: probs.clone(), states: states.clone() })
        }
        _ => {
            let (probs, states) = best.arg;
            (best.value.max(q1_result.value), Argument::Ensemble { probs, states })
        }
    };
    EstimateResult {
        value,
        argument,
        restarts: opts.restarts,
        converged_fraction: conv,
        certainty: Certainty::HeuristicLowerBound,
        gap: None,
        flags: vec![],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{amplitude_damping, depolarizing, erasure, identity};

    fn quick() -> OptimOptions {
        OptimOptions { restarts: 4, ..OptimOptions::default() }
    }

    #[test]
    fn chi_examples() {
        let o = quick();
        assert!((holevo_chi(&identity(2).unwrap(), &o).value - 1.0).abs() < 1e-4);
        assert!((holevo_chi(&erasure(2, 0.25).unwrap(), &o).value - 0.75).abs() < 1e-3);
        assert!(holevo_chi(&depolarizing(2, 1.0).unwrap(), &o).value.abs() < 1e-6);
    }

    #[test]
    fn private_objective_gradient() {
        let ch = amplitude_damping(0.3).unwrap().tensor(&depolarizing(2, 0.1).unwrap());
        let f = EntropyFunctional::coherent_info(&ch);
        let mut rng = super::super::ascent::restart_rng(9, 0);
        let d = ch.dim_in();
        let x: Vec<CMat> = std::iter::once(linalg::random_gaussian(&mut rng, 3, 1).map(|z| linalg::c(z.re, 0.0)))
            .chain((0..3).map(|_| linalg::random_gaussian(&mut rng, d, d)))
            .collect();
        let (_, g) = private_objective(&f, &x);
        let dir: Vec<CMat> = std::iter::once(linalg::random_gaussian(&mut rng, 3, 1).map(|z| linalg::c(z.re, 0.0)))
            .chain((0..3).map(|_| linalg::random_gaussian(&mut rng, d, d)))
            .collect();
        let e = 1e-6;
        let shift = |s: f64| -> Vec<CMat> { x.iter().zip(&dir).map(|(a, b)| a + b.scale(s)).collect() };
        let fd = (private_objective(&f, &shift(e)).0 - private_objective(&f, &shift(-e)).0) / (2.0 * e);
        let an: f64 = g.iter().zip(&dir).map(|(a, b)| linalg::real_inner(a, b)).sum();
        assert!((fd - an).abs() < 1e-5, "{fd} vs {an}");
    }

    #[test]
    fn p1_examples() {
        let o = quick();
        let ad = amplitude_damping(0.3).unwrap();
        let q = q1(&ad, &o);
        let p = p1_from(&ad, &q, &o);
        assert!(p.value >= q.value - 1e-9);
        assert!((p.value - q.value).abs() < 1e-4);
        assert!((p1(&erasure(2, 0.25).unwrap().untagged(), &o).value - 0.5).abs() < 1e-4);
        assert!(p1(&depolarizing(2, 1.0).unwrap(), &o).value.abs() < 1e-6);
    }
}

//! Gradient ascent over lists of complex matrices with Armijo backtracking
//! and Barzilai-Borwein step sizes, plus the restart driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{self, CMat};

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-16;
const MAX_STEP: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct Ascent {
    pub value: f64,
    pub x: Vec<CMat>,
    pub converged: bool,
    pub iterations: usize,
}

fn inner(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| linalg::real_inner(x, y)).sum()
}

fn axpy(x: &[CMat], alpha: f64, g: &[CMat]) -> Vec<CMat> {
    x.iter().zip(g).map(|(a, b)| a + b.scale(alpha)).collect()
}

/// Maximizes `f` from `x0`. `f` returns the value and the gradient with
/// respect to the real inner product `Re Tr[A†B]`; `normalize` may rescale
/// the parameters after each accepted step as long as `f` is invariant.
///
/// Stops when two consecutive steps improve the value by less than `tol`.
pub fn maximize<F, N>(f: F, normalize: N, x0: Vec<CMat>, max_iter: usize, tol: f64) -> Ascent
where
    F: Fn(&[CMat]) -> (f64, Vec<CMat>),
    N: Fn(&mut [CMat]),
{
    let mut x = x0;
    normalize(&mut x);
    let (mut fx, mut g) = f(&x);
    let mut alpha = 1.0 / inner(&g, &g).sqrt().max(1e-12);
    let mut small = 0;
    for it in 0..max_iter {
        let gg = inner(&g, &g);
        if gg < 1e-24 {
            return Ascent { value: fx, x, converged: true, iterations: it };
        }
        let mut step = alpha;
        let (xn, fn_, gn) = loop {
            let mut cand = axpy(&x, step, &g);
            normalize(&mut cand);
            let (fc, gc) = f(&cand);
            if fc.is_finite() && fc >= fx + ARMIJO * step * gg {
                break (cand, fc, gc);
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Ascent { value: fx, x, converged: true, iterations: it };
            }
        };
        let s: Vec<CMat> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<CMat> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = inner(&s, &y).abs();
        alpha = if sy > 1e-300 { (inner(&s, &s) / sy).clamp(MIN_STEP, MAX_STEP) } else { step * 2.0 };
        let improvement = fn_ - fx;
        x = xn;
        fx = fn_;
        g = gn;
        if improvement < tol {
            small += 1;
            if small >= 2 {
                return Ascent { value: fx, x, converged: true, iterations: it + 1 };
            }
        } else {
            small = 0;
        }
    }
    Ascent { value: fx, x, converged: false, iterations: max_iter }
}

/// Chain rule for `ρ = G G† / Tr(G G†)`: given `Γ = ∂F/∂ρ`, returns
/// `∂F/∂G = 2(Γ − Tr(Γρ) I) G / Tr(G G†)`.
pub fn density_grad(g: &CMat, rho: &CMat, gamma: &CMat) -> CMat {
    let t = g.norm_squared();
    let mean = linalg::real_inner(gamma, rho);
    let centered = gamma - linalg::identity(gamma.nrows()).scale(mean);
    (centered * g).scale(2.0 / t)
}

pub fn density_of(g: &CMat) -> CMat {
    let m = g * g.adjoint();
    let t = m.trace().re;
    m.unscale(t)
}

/// Rescales every block to unit Frobenius norm.
pub fn unit_blocks(x: &mut [CMat]) {
    for m in x.iter_mut() {
        let n = m.norm();
        if n > 0.0 {
            m.unscale_mut(n);
        }
    }
}

pub fn restart_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// One restart's outcome.
pub struct Trial<T> {
    pub value: f64,
    pub arg: T,
    pub converged: bool,
}

/// Runs `restarts` independent trials in parallel and returns the best one,
/// ties within 1e-12 going to the lowest index, together with the fraction
/// of converged trials.
pub fn best_of<T, F>(restarts: usize, seed: u64, run: F) -> (Trial<T>, usize, f64)
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Trial<T> + Sync,
{
    let n = restarts.max(1);
    let trials: Vec<Trial<T>> = (0..n)
        .into_par_iter()
        .map(|i| run(i, &mut restart_rng(seed, i)))
        .collect();
    let converged = trials.iter().filter(|t| t.converged).count() as f64 / n as f64;
    let mut best_idx = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.value > trials[best_idx].value + 1e-12 || (!trials[best_idx].value.is_finite() && t.value.is_finite()) {
            best_idx = i;
        }
    }
    let best = trials.into_iter().nth(best_idx).expect("at least one trial");
    (best, best_idx, converged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn maximizes_rayleigh_quotient() {
        // max Tr(Hρ) over density matrices is λ_max(H).
        let h = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(-0.5, 0.0)]);
        let f = |x: &[CMat]| {
            let rho = density_of(&x[0]);
            (linalg::real_inner(&h, &rho), vec![density_grad(&x[0], &rho, &h)])
        };
        let mut rng = restart_rng(1, 0);
        let x0 = vec![linalg::random_gaussian(&mut rng, 2, 2)];
        let out = maximize(f, unit_blocks, x0, 2000, 1e-14);
        assert!((out.value - linalg::max_eig(&h)).abs() < 1e-6, "{}", out.value);
    }

    #[test]
    fn density_grad_matches_finite_difference() {
        let mut rng = restart_rng(2, 0);
        let h = linalg::hermitize(&linalg::random_gaussian(&mut rng, 3, 3));
        let f = |g: &CMat| {
            let rho = density_of(g);
            crate::entropy::entropy_of(&rho) + linalg::real_inner(&h, &rho)
        };
        let g = linalg::random_gaussian(&mut rng, 3, 3);
        let rho = density_of(&g);
        let (_, gh) = crate::entropy::entropy_with_grad(&rho);
        let grad = density_grad(&g, &rho, &(gh + &h));
        let dir = linalg::random_gaussian(&mut rng, 3, 3);
        let e = 1e-6;
        let fd = (f(&(&g + dir.scale(e))) - f(&(&g - dir.scale(e)))) / (2.0 * e);
        assert!((fd - linalg::real_inner(&grad, &dir)).abs() < 1e-6);
    }

    #[test]
    fn best_of_breaks_ties_by_index() {
        let (best, idx, frac) = best_of(8, 3, |i, _| Trial { value: if i % 2 == 1 { 1.0 } else { 0.0 }, arg: i, converged: i < 4 });
        assert_eq!((best.arg, idx), (1, 1));
        assert!((frac - 0.5).abs() < 1e-15);
    }
}

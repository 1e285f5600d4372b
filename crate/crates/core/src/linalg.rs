//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Multipartite
//! operators are addressed through a list of subsystem dimensions with the
//! first subsystem as the most significant index digit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `(m + m†)/2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermiticity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && hermiticity_error(m) <= tol
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first, so small anti-Hermitian noise is ignored.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::identity(1, 1));
    }
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eig(m: &CMat) -> f64 {
    eigvalsh(m).first().copied().unwrap_or(0.0)
}

pub fn max_eig(m: &CMat) -> f64 {
    eigvalsh(m).last().copied().unwrap_or(0.0)
}

/// `U diag(f(λ)) U†` for Hermitian `m = U diag(λ) U†`.
pub fn spectral_apply(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals.iter().map(|&l| f(l)).collect::<Vec<_>>(), &vecs)
}

pub fn from_spectrum(vals: &[f64], vecs: &CMat) -> CMat {
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        scaled.column_mut(k).scale_mut(v);
    }
    scaled * vecs.adjoint()
}

/// Fréchet derivative `Df[m](h)` of the spectral function `f` at Hermitian `m`,
/// via the divided-difference (Daleckii-Krein) formula.
pub fn frechet(m: &CMat, h: &CMat, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    frechet_from_eig(&vals, &vecs, h, f, df)
}

pub fn frechet_from_eig(
    vals: &[f64],
    vecs: &CMat,
    h: &CMat,
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
) -> CMat {
    let n = vals.len();
    let fv: Vec<f64> = vals.iter().map(|&l| f(l)).collect();
    let mut t = vecs.adjoint() * h * vecs;
    for i in 0..n {
        for j in 0..n {
            let gap = vals[i] - vals[j];
            let g = if gap.abs() > 1e-10 * (1.0 + vals[i].abs().max(vals[j].abs())) {
                (fv[i] - fv[j]) / gap
            } else {
                df(0.5 * (vals[i] + vals[j]))
            };
            t[(i, j)] *= g;
        }
    }
    vecs * t * vecs.adjoint()
}

/// Principal square root of a positive semidefinite matrix (negative
/// eigenvalues are clipped to zero).
pub fn psd_sqrt(m: &CMat) -> CMat {
    spectral_apply(m, |l| l.max(0.0).sqrt())
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().sum()
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Real inner product `Re Tr[a† b]`.
pub fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Strides helper: row-major digit expansion of `idx` over `dims`.
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets into the joint index space for every multi-index over `subset`
/// (enumerated in row-major order over the subset, in the given order).
fn subset_offsets(dims: &[usize], subset: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let sub_dims: Vec<usize> = subset.iter().map(|&k| dims[k]).collect();
    let total: usize = sub_dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut dig = vec![0; subset.len()];
    for i in 0..total {
        digits(i, &sub_dims, &mut dig);
        out.push(subset.iter().zip(&dig).map(|(&k, &d)| st[k] * d).sum());
    }
    out
}

fn complement(n: usize, keep: &[usize]) -> Vec<usize> {
    (0..n).filter(|k| !keep.contains(k)).collect()
}

/// Partial trace keeping the subsystems in `keep` (output ordered as `keep`).
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    debug_assert_eq!(m.nrows(), dims.iter().product::<usize>());
    let traced = complement(dims.len(), keep);
    let ko = subset_offsets(dims, keep);
    let to = subset_offsets(dims, &traced);
    let n = ko.len();
    let mut out = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut acc = ZERO;
            for &t in &to {
                acc += m[(ko[i] + t, ko[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Adjoint of [`partial_trace`]: `x` on `keep` tensored with the identity on
/// the traced subsystems, laid out in the joint ordering.
pub fn partial_trace_adjoint(x: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let traced = complement(dims.len(), keep);
    let ko = subset_offsets(dims, keep);
    let to = subset_offsets(dims, &traced);
    let total: usize = dims.iter().product();
    let mut out = CMat::zeros(total, total);
    for j in 0..ko.len() {
        for i in 0..ko.len() {
            let v = x[(i, j)];
            if v == ZERO {
                continue;
            }
            for &t in &to {
                out[(ko[i] + t, ko[j] + t)] = v;
            }
        }
    }
    out
}

/// Reorders tensor factors: the `k`-th factor of the result is factor
/// `perm[k]` of the input.
pub fn permute_subsystems(m: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let map = permutation_index_map(dims, perm);
    let n = map.len();
    CMat::from_fn(n, n, |i, j| m[(map[i], map[j])])
}

/// Same reordering applied to a state vector.
pub fn permute_vector(v: &DVector<C64>, dims: &[usize], perm: &[usize]) -> DVector<C64> {
    let map = permutation_index_map(dims, perm);
    DVector::from_fn(map.len(), |i, _| v[map[i]])
}

fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let new_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
    let st = strides(dims);
    let total: usize = dims.iter().product();
    let mut dig = vec![0; dims.len()];
    (0..total)
        .map(|i| {
            digits(i, &new_dims, &mut dig);
            perm.iter().zip(&dig).map(|(&k, &d)| st[k] * d).sum()
        })
        .collect()
}

/// Partial transpose on the subsystems listed in `which`.
pub fn partial_transpose(m: &CMat, dims: &[usize], which: &[usize]) -> CMat {
    let n = m.nrows();
    let st = strides(dims);
    let mut out = CMat::zeros(n, n);
    let mut di = vec![0; dims.len()];
    let mut dj = vec![0; dims.len()];
    for i in 0..n {
        digits(i, dims, &mut di);
        for j in 0..n {
            digits(j, dims, &mut dj);
            let (mut ii, mut jj) = (i, j);
            for &k in which {
                ii = ii - di[k] * st[k] + dj[k] * st[k];
                jj = jj - dj[k] * st[k] + di[k] * st[k];
            }
            out[(ii, jj)] = m[(i, j)];
        }
    }
    out
}

/// Index permutation used by [`partial_transpose`]: entry `(i, j)` of the
/// result is entry `pt_index(i, j)` of the input.
pub fn partial_transpose_index(dims: &[usize], which: &[usize], i: usize, j: usize) -> (usize, usize) {
    let st = strides(dims);
    let mut di = vec![0; dims.len()];
    let mut dj = vec![0; dims.len()];
    digits(i, dims, &mut di);
    digits(j, dims, &mut dj);
    let (mut ii, mut jj) = (i, j);
    for &k in which {
        ii = ii - di[k] * st[k] + dj[k] * st[k];
        jj = jj - dj[k] * st[k] + di[k] * st[k];
    }
    (ii, jj)
}

pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Orthonormalizes the columns of a tall matrix (`rows >= cols`) by QR with
/// the phase convention that makes `R` have a positive diagonal.
pub fn orthonormalize_columns(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..q.ncols().min(r.nrows()) {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..q.nrows() {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

/// Closest isometry `G (G†G)^{-1/2}` to a tall matrix of full column rank.
pub fn polar_isometry(g: &CMat) -> CMat {
    let gram = hermitize(&(g.adjoint() * g));
    g * spectral_apply(&gram, |l| 1.0 / l.max(1e-300).sqrt())
}

/// Gradient of `F ∘ polar` at an isometry `v`, given the gradient `g` of `F`
/// at `v`.
pub fn isometry_tangent(v: &CMat, g: &CMat) -> CMat {
    let sym = v.adjoint() * g + g.adjoint() * v;
    g - v * sym.scale(0.5)
}

/// Haar-distributed isometry `C^cols -> C^rows`.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    orthonormalize_columns(&random_gaussian(rng, rows, cols))
}

/// Random mixed state of dimension `d` from the induced (Hilbert-Schmidt
/// for `rank == d`) measure.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize) -> CMat {
    let g = random_gaussian(rng, d, rank.max(1));
    let rho = &g * g.adjoint();
    let t = rho.trace().re;
    rho.unscale(t)
}

pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DVector<C64> {
    let g = random_gaussian(rng, d, 1);
    let n = g.norm();
    DVector::from_fn(d, |i, _| g[(i, 0)] / n)
}

pub fn projector(v: &DVector<C64>) -> CMat {
    v * v.adjoint()
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_density(&mut rng, 2, 2);
        let b = random_density(&mut rng, 3, 3);
        let cc = random_density(&mut rng, 2, 1);
        let abc = kron(&kron(&a, &b), &cc);
        let dims = [2, 3, 2];
        assert!((partial_trace(&abc, &dims, &[1]) - &b).norm() < 1e-12);
        assert!((partial_trace(&abc, &dims, &[0, 2]) - kron(&a, &cc)).norm() < 1e-12);
        assert!((partial_trace(&abc, &dims, &[2, 0]) - kron(&cc, &a)).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_adjoint_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dims = [2, 3, 2];
        let m = random_gaussian(&mut rng, 12, 12);
        let x = random_gaussian(&mut rng, 4, 4);
        let lhs = real_inner(&x, &partial_trace(&m, &dims, &[0, 2]));
        let rhs = real_inner(&partial_trace_adjoint(&x, &dims, &[0, 2]), &m);
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn permutation_swaps_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_gaussian(&mut rng, 2, 2);
        let b = random_gaussian(&mut rng, 3, 3);
        let p = permute_subsystems(&kron(&a, &b), &[2, 3], &[1, 0]);
        assert!((p - kron(&b, &a)).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_gaussian(&mut rng, 2, 2);
        let b = random_gaussian(&mut rng, 3, 3);
        let pt = partial_transpose(&kron(&a, &b), &[2, 3], &[1]);
        assert!((pt - kron(&a, &b.transpose())).norm() < 1e-12);
        let (i, j) = partial_transpose_index(&[2, 3], &[1], 1, 4);
        let full = kron(&a, &b);
        assert_eq!(partial_transpose(&full, &[2, 3], &[1])[(1, 4)], full[(i, j)]);
    }

    #[test]
    fn isometry_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_isometry(&mut rng, 12, 3);
        assert_eq!(v.shape(), (12, 3));
        assert!((v.adjoint() * &v - identity(3)).norm() < 1e-12);
    }

    #[test]
    fn frechet_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = random_density(&mut rng, 3, 3);
        let h = hermitize(&random_gaussian(&mut rng, 3, 3));
        let d = frechet(&m, &h, f64::ln, |x| 1.0 / x);
        let step = 1e-6;
        let fd = (spectral_apply(&(&m + h.scale(step)), f64::ln)
            - spectral_apply(&(&m - h.scale(step)), f64::ln))
        .unscale(2.0 * step);
        assert!((d - fd).norm() < 1e-6);
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_9).abs() < 1e-12);
    }
}

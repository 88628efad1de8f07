//! Dense complex linear algebra helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Above this size complex products go through four real GEMMs, which are
/// an order of magnitude faster than nalgebra's generic complex kernel.
const SPLIT_GEMM_THRESHOLD: usize = 24;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Complex matrix product `a * b`.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    if a.nrows().max(a.ncols()).max(b.ncols()) < SPLIT_GEMM_THRESHOLD {
        return a * b;
    }
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    DMatrix::from_fn(a.nrows(), b.ncols(), |i, j| c(re[(i, j)], im[(i, j)]))
}

fn split(m: &CMat) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

/// `a† * b`.
pub fn adjoint_mul(a: &CMat, b: &CMat) -> CMat {
    matmul(&a.adjoint(), b)
}

/// `u† m u`, the representation of `m` in the basis formed by the columns of `u`.
pub fn conjugate_by(m: &CMat, u: &CMat) -> CMat {
    matmul(&u.adjoint(), &matmul(m, u))
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real diagonal of `u† m u`, i.e. `⟨u_k|m|u_k⟩` for every column.
pub fn diagonal_in_basis(m: &CMat, u: &CMat) -> Vec<f64> {
    let mu = matmul(m, u);
    (0..u.ncols())
        .map(|k| {
            u.column(k)
                .iter()
                .zip(mu.column(k).iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum()
        })
        .collect()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    matmul(a, b) - matmul(b, a)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_all(ms: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for m in ms {
        out = out.kronecker(m);
    }
    out
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMat,
}

pub fn eigh(m: &CMat) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: vec![], vectors: CMat::zeros(0, 0) };
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Eigh { values, vectors }
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Matrix whose columns are the selected columns of `m`.
pub fn select_columns(m: &CMat, cols: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), cols.len(), |r, k| m[(r, cols[k])])
}

/// Partial trace keeping the subsystems listed in `keep` (any order; the
/// result is ordered by ascending subsystem index).
pub fn partial_trace(rho: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let n = dims.len();
    let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let offsets = |subs: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &s in subs.iter().rev() {
            off += (idx % dims[s]) * strides[s];
            idx /= dims[s];
        }
        off
    };
    let kept_off: Vec<usize> = (0..kept_dim).map(|i| offsets(&keep, i)).collect();
    let traced_off: Vec<usize> = (0..traced_dim).map(|i| offsets(&traced, i)).collect();

    CMat::from_fn(kept_dim, kept_dim, |i, j| {
        traced_off
            .iter()
            .map(|&t| rho[(kept_off[i] + t, kept_off[j] + t)])
            .sum()
    })
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed isometry with `cols` orthonormal columns in dimension `rows`.
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(cols <= rows);
    let qr = ginibre(rows, cols, rng).qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the phase ambiguity of QR so the distribution is exactly Haar.
    let mut out = q.columns(0, cols).into_owned();
    for k in 0..cols {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..rows {
            out[(i, k)] *= phase;
        }
    }
    out
}

pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    haar_isometry(dim, dim, rng)
}

pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVec {
    let g = ginibre(dim, 1, rng);
    let norm = g.norm();
    CVec::from_iterator(dim, g.iter().map(|z| z / norm))
}

/// Random density matrix `G G† / tr(G G†)` with a Ginibre `G` of the given rank.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMat {
    let g = ginibre(dim, rank.max(1), rng);
    let m = matmul(&g, &g.adjoint());
    let t = trace(&m).re;
    hermitian_part(&m.unscale(t))
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_gemm_matches_direct_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ginibre(40, 33, &mut rng);
        let b = ginibre(33, 29, &mut rng);
        assert!(max_abs(&(matmul(&a, &b) - &a * &b)) < 1e-12);
    }

    #[test]
    fn haar_isometry_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = haar_isometry(7, 3, &mut rng);
        assert!(max_abs(&(v.adjoint() * &v - CMat::identity(3, 3))) < 1e-12);
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = ginibre(6, 6, &mut rng);
        let h = hermitian_part(&g);
        let e = eigh(&h);
        let d = CMat::from_diagonal(&CVec::from_iterator(6, e.values.iter().map(|&x| c(x, 0.0))));
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(max_abs(&(back - &h)) < 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = CMat::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let b = CMat::from_diagonal(&CVec::from_vec(vec![c(0.2, 0.0), c(0.5, 0.0), c(0.3, 0.0)]));
        let ab = kron(&a, &b);
        assert!(max_abs(&(partial_trace(&ab, &[2, 3], &[0]) - &a)) < 1e-14);
        assert!(max_abs(&(partial_trace(&ab, &[2, 3], &[1]) - &b)) < 1e-14);
        assert!(max_abs(&(partial_trace(&ab, &[2, 3], &[0, 1]) - &ab)) < 1e-14);
    }

    #[test]
    fn partial_trace_middle_subsystem() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_density_matrix(2, 2, &mut rng);
        let b = random_density_matrix(3, 3, &mut rng);
        let d = random_density_matrix(2, 2, &mut rng);
        let abd = kron_all(&[a.clone(), b.clone(), d.clone()]);
        assert!(max_abs(&(partial_trace(&abd, &[2, 3, 2], &[1]) - &b)) < 1e-14);
        assert!(max_abs(&(partial_trace(&abd, &[2, 3, 2], &[2, 0]) - kron(&a, &d))) < 1e-14);
    }
}

//! Derivative-free search over a single complex Givens rotation
//!
//! `G(θ, φ)` mixes two orthonormal vectors `u_a, u_b` into
//! `c·u_a + e^{-iφ} s·u_b` and `-e^{iφ} s·u_a + c·u_b` with `c = cos θ`,
//! `s = sin θ`. The optimizers in `quarrelation` and `povm` sweep these
//! rotations over all index pairs.

use crate::linalg::{c, CMat};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy)]
pub struct AngleSearch {
    /// θ is searched in `[-theta_span, theta_span]`.
    pub theta_span: f64,
    /// Grid points per angle before refinement.
    pub grid: usize,
    /// Alternating golden-section rounds after the grid.
    pub rounds: usize,
    /// Search the phase φ as well (otherwise φ = 0).
    pub complex: bool,
}

impl Default for AngleSearch {
    fn default() -> Self {
        Self { theta_span: std::f64::consts::FRAC_PI_4, grid: 10, rounds: 3, complex: true }
    }
}

/// Best `(θ, φ, f)` found; never worse than `f(0, 0)`.
pub fn minimize_rotation(f: impl Fn(f64, f64) -> f64, search: &AngleSearch) -> (f64, f64, f64) {
    let mut best = (0.0, 0.0, f(0.0, 0.0));
    let n = search.grid.max(2);
    let dtheta = 2.0 * search.theta_span / n as f64;
    let nphi = if search.complex { n } else { 1 };
    let dphi = std::f64::consts::PI / nphi as f64;
    for i in 0..=n {
        let theta = -search.theta_span + i as f64 * dtheta;
        for j in 0..nphi {
            let phi = j as f64 * dphi;
            let v = f(theta, phi);
            if v < best.2 {
                best = (theta, phi, v);
            }
        }
    }
    let (mut theta, mut phi, mut value) = best;
    let mut htheta = dtheta;
    let mut hphi = dphi;
    for _ in 0..search.rounds {
        let (t, v) = golden_section(|t| f(t, phi), theta - htheta, theta + htheta, 1e-11);
        if v < value {
            theta = t;
            value = v;
        }
        if search.complex {
            let (p, v) = golden_section(|p| f(theta, p), phi - hphi, phi + hphi, 1e-11);
            if v < value {
                phi = p;
                value = v;
            }
        }
        htheta *= 0.5;
        hphi *= 0.5;
    }
    (theta, phi, value)
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Right-multiplies columns `a, b` of `u` by `G(θ, φ)`.
pub fn rotate_columns(u: &mut CMat, a: usize, b: usize, theta: f64, phi: f64) {
    let (s, co) = theta.sin_cos();
    let e_minus = c(phi.cos(), -phi.sin());
    let e_plus = e_minus.conj();
    for r in 0..u.nrows() {
        let ua = u[(r, a)];
        let ub = u[(r, b)];
        u[(r, a)] = ua * co + ub * e_minus * s;
        u[(r, b)] = -(ua * e_plus * s) + ub * co;
    }
}

/// Left-multiplies rows `a, b` of `v` by a unitary 2×2 rotation.
pub fn rotate_rows(v: &mut CMat, a: usize, b: usize, theta: f64, phi: f64) {
    let (s, co) = theta.sin_cos();
    let e_minus = c(phi.cos(), -phi.sin());
    let e_plus = e_minus.conj();
    for col in 0..v.ncols() {
        let va = v[(a, col)];
        let vb = v[(b, col)];
        v[(a, col)] = va * co - vb * e_plus * s;
        v[(b, col)] = va * e_minus * s + vb * co;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6 && (fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotations_preserve_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut u = crate::linalg::haar_unitary(4, &mut rng);
        rotate_columns(&mut u, 1, 3, 0.4, 1.3);
        assert!(max_abs(&(u.adjoint() * &u - CMat::identity(4, 4))) < 1e-14);
        let mut v = crate::linalg::haar_isometry(6, 2, &mut rng);
        rotate_rows(&mut v, 0, 5, -0.7, 2.1);
        assert!(max_abs(&(v.adjoint() * &v - CMat::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn rotation_search_never_worsens() {
        let f = |t: f64, p: f64| (t - 0.2).cos() * p.sin() + 3.0;
        let base = f(0.0, 0.0);
        let (_, _, v) = minimize_rotation(f, &AngleSearch::default());
        assert!(v <= base);
    }
}

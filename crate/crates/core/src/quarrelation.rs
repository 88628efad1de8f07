//! Quantum correlation ("quarrelation") entropy: the smallest observational
//! entropy reachable with local measurements, minus the von Neumann entropy.
//!
//! The search runs over rank-1 product bases. Any local projective
//! coarse-graining is refined by such a basis and refinement never raises
//! the entropy, so this family attains the local infimum. Each subsystem basis
//! is a unitary updated by Givens-rotation sweeps; independent restarts start
//! from random unitaries (and, first, from the eigenbases of the marginals).
//! Results are upper bounds on the true infimum.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::{tensor_local, CoarseGraining, LocalCoarseGraining};
use crate::entropy::{local_entropy, vn_entropy, PROBABILITY_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::optim::{minimize_rotation, rotate_columns, AngleSearch};
use crate::state::{reduce, DensityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcOptions {
    pub restarts: usize,
    /// A sweep improving the objective by less than this ends a restart.
    pub stall_tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Grid resolution of each rotation search.
    pub grid: usize,
    /// Use the marginal eigenbases as the first starting point.
    pub marginal_start: bool,
}

impl Default for QcOptions {
    fn default() -> Self {
        Self { restarts: 16, stall_tol: 1e-8, max_sweeps: 200, seed: 0, grid: 10, marginal_start: true }
    }
}

#[derive(Debug, Clone)]
pub struct QcResult {
    /// Upper-bound estimate of the quantum correlation entropy, clamped at 0.
    pub value: f64,
    /// Best local entropy found minus `S_VN` (unclamped).
    pub infimum_estimate: f64,
    /// Smallest local observational entropy found.
    pub best_entropy: f64,
    pub vn_entropy: f64,
    /// Rank-1 product coarse-graining achieving `best_entropy`.
    pub best_local_cg: LocalCoarseGraining,
    /// Per-subsystem unitaries whose columns define `best_local_cg`.
    pub best_bases: Vec<CMat>,
    pub restarts_used: usize,
    /// Whether the winning restart stalled before `max_sweeps`.
    pub converged: bool,
}

/// Serializable summary of a [`QcResult`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QcSummary {
    pub value: f64,
    pub upper_bound_estimate: bool,
    pub infimum_estimate: f64,
    pub best_entropy: f64,
    pub vn_entropy: f64,
    pub restarts_used: usize,
    pub converged: bool,
    /// Best basis of each subsystem as `[[re, im], …]` rows.
    pub best_bases: Vec<Vec<Vec<[f64; 2]>>>,
}

impl QcResult {
    pub fn summary(&self) -> QcSummary {
        QcSummary {
            value: self.value,
            upper_bound_estimate: true,
            infimum_estimate: self.infimum_estimate,
            best_entropy: self.best_entropy,
            vn_entropy: self.vn_entropy,
            restarts_used: self.restarts_used,
            converged: self.converged,
            best_bases: self.best_bases.iter().map(crate::io::matrix_to_rows).collect(),
        }
    }
}

fn check_partition(rho: &DensityMatrix, dims: &[usize]) -> Result<()> {
    let product: usize = dims.iter().product();
    if dims.is_empty() || product != rho.dim() || dims.contains(&0) {
        return Err(Error::MissingTensorStructure(format!(
            "partition {dims:?} does not factor dimension {}",
            rho.dim()
        )));
    }
    Ok(())
}

/// Entropy of the product-basis outcome distribution `diag(W† ρ W)`.
fn product_basis_entropy(rho: &CMat, bases: &[CMat]) -> f64 {
    let w = linalg::kron_all(bases);
    shannon_of(&linalg::diagonal_in_basis(rho, &w))
}

fn h(p: f64) -> f64 {
    if p < PROBABILITY_FLOOR {
        0.0
    } else {
        -p * p.ln()
    }
}

fn shannon_of(p: &[f64]) -> f64 {
    p.iter().map(|&x| h(x)).sum()
}

/// Pairs of flat indices that differ only in subsystem `x`, where that
/// subsystem's index is `a` and `b` respectively.
fn paired_indices(dims: &[usize], x: usize, a: usize, b: usize) -> Vec<(usize, usize)> {
    let stride: usize = dims[x + 1..].iter().product();
    let total: usize = dims.iter().product();
    let block = stride * dims[x];
    let mut out = Vec::with_capacity(total / dims[x]);
    for hi in (0..total).step_by(block) {
        for lo in 0..stride {
            out.push((hi + a * stride + lo, hi + b * stride + lo));
        }
    }
    out
}

struct Restart {
    entropy: f64,
    bases: Vec<CMat>,
    converged: bool,
}

/// One descent from `bases`: Givens sweeps over every subsystem and index pair.
fn descend(rho: &CMat, dims: &[usize], mut bases: Vec<CMat>, opts: &QcOptions) -> Restart {
    let search = AngleSearch { grid: opts.grid, ..AngleSearch::default() };
    let mut current = product_basis_entropy(rho, &bases);
    let mut converged = false;
    for _ in 0..opts.max_sweeps {
        let start = current;
        for x in 0..dims.len() {
            for a in 0..dims[x] {
                for b in (a + 1)..dims[x] {
                    let w = linalg::kron_all(&bases);
                    let r = linalg::conjugate_by(rho, &w);
                    let diag: Vec<f64> = (0..r.nrows()).map(|k| r[(k, k)].re).collect();
                    let pairs = paired_indices(dims, x, a, b);
                    let mut fixed = shannon_of(&diag);
                    let terms: Vec<(f64, f64, f64, f64)> = pairs
                        .iter()
                        .map(|&(ka, kb)| {
                            fixed -= h(diag[ka]) + h(diag[kb]);
                            let z = r[(ka, kb)];
                            (diag[ka], diag[kb], z.norm(), z.arg())
                        })
                        .collect();
                    let objective = |theta: f64, phi: f64| {
                        let (s2, c2) = (2.0 * theta).sin_cos();
                        let mut acc = fixed;
                        for &(xa, yb, zn, za) in &terms {
                            let mean = 0.5 * (xa + yb);
                            let pa = mean + 0.5 * (xa - yb) * c2 + zn * s2 * (za - phi).cos();
                            acc += h(pa.max(0.0)) + h((xa + yb - pa).max(0.0));
                        }
                        acc
                    };
                    let (theta, phi, value) = minimize_rotation(objective, &search);
                    if value < objective(0.0, 0.0) - 1e-15 {
                        rotate_columns(&mut bases[x], a, b, theta, phi);
                    }
                }
            }
        }
        current = product_basis_entropy(rho, &bases);
        if start - current < opts.stall_tol {
            converged = true;
            break;
        }
    }
    Restart { entropy: current, bases, converged }
}

fn marginal_bases(rho: &DensityMatrix, dims: &[usize]) -> Result<Vec<CMat>> {
    let rho = rho.clone().with_subsystems(dims.to_vec())?;
    (0..dims.len())
        .map(|x| Ok(linalg::eigh(reduce(&rho, &[x])?.matrix()).vectors))
        .collect()
}

/// Starting bases for restart `index`.
fn starting_bases(rho: &DensityMatrix, dims: &[usize], index: usize, opts: &QcOptions) -> Result<Vec<CMat>> {
    if index == 0 && opts.marginal_start {
        return marginal_bases(rho, dims);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    Ok(dims.iter().map(|&d| linalg::haar_unitary(d, &mut rng)).collect())
}

/// Quantum correlation entropy of `rho` for the subsystem partition `dims`.
pub fn qc_entropy(rho: &DensityMatrix, dims: &[usize], opts: &QcOptions) -> Result<QcResult> {
    check_partition(rho, dims)?;
    let restarts = opts.restarts.max(1);
    let starts = (0..restarts).map(|i| starting_bases(rho, dims, i, opts)).collect::<Result<Vec<_>>>()?;
    let runs: Vec<Restart> = starts.into_par_iter().map(|b| descend(rho.matrix(), dims, b, opts)).collect();

    // Lowest entropy wins, ties to the lowest restart index.
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.entropy < runs[best].entropy {
            best = i;
        }
    }
    let winner = &runs[best];
    let factors = winner.bases.iter().map(CoarseGraining::from_unitary).collect();
    let best_local_cg = tensor_local(factors, dims)?;
    let vn = vn_entropy(rho);
    let infimum_estimate = winner.entropy - vn;
    Ok(QcResult {
        value: infimum_estimate.max(0.0),
        infimum_estimate,
        best_entropy: winner.entropy,
        vn_entropy: vn,
        best_local_cg,
        best_bases: winner.bases.clone(),
        restarts_used: restarts,
        converged: winner.converged,
    })
}

/// Entanglement entropy `S_VN(ρ_A)` of a bipartite pure state, computed from
/// both reduced states (which must agree).
pub fn entanglement_entropy_pure_bipartite(psi: &CVec, split: (usize, usize)) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    if split.0 * split.1 != psi.len() {
        return Err(Error::MissingTensorStructure(format!(
            "split {split:?} does not factor dimension {}",
            psi.len()
        )));
    }
    let rho = DensityMatrix::pure(psi)?.with_subsystems(vec![split.0, split.1])?;
    let s_a = vn_entropy(&reduce(&rho, &[0])?);
    let s_b = vn_entropy(&reduce(&rho, &[1])?);
    debug_assert!((s_a - s_b).abs() <= 1e-9, "S(ρ_A) = {s_a} but S(ρ_B) = {s_b}");
    Ok(s_a)
}

/// Slack of `S_L(ρ) ≥ S_VN(ρ) + S_qc(ρ)` for a given local coarse-graining,
/// using the optimizer's estimate for `S_qc`.
pub fn qc_inequality_check(rho: &DensityMatrix, local: &LocalCoarseGraining, opts: &QcOptions) -> Result<f64> {
    let s_local = local_entropy(rho, local)?.total;
    let qc = qc_entropy(rho, local.subsystem_dims(), opts)?;
    Ok(s_local - qc.vn_entropy - qc.value)
}

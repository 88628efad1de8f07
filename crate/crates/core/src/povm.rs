//! Coarse-grainings built from Kraus operators (POVM measurements).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coarse::CoarseGraining;
use crate::entropy::{vn_entropy, EntropyReport, PROBABILITY_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::optim::{minimize_rotation, rotate_rows, AngleSearch};
use crate::quarrelation::{qc_entropy, QcOptions, QcResult};
use crate::state::DensityMatrix;
use crate::tolerances::Tolerances;

/// Trace-preserving set `{K_i}` with `∑ K_i† K_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmCoarseGraining {
    kraus: Vec<CMat>,
    dim: usize,
}

fn closure_residual(kraus: &[CMat], dim: usize) -> f64 {
    let mut sum = CMat::zeros(dim, dim);
    for k in kraus {
        sum += linalg::adjoint_mul(k, k);
    }
    linalg::max_abs(&(sum - CMat::identity(dim, dim)))
}

fn check_shapes(kraus: &[CMat]) -> Result<usize> {
    let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus set".into()))?;
    let dim = first.nrows();
    for k in kraus {
        if k.nrows() != k.ncols() {
            return Err(Error::NotSquare { rows: k.nrows(), cols: k.ncols() });
        }
        if k.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: k.nrows() });
        }
    }
    Ok(dim)
}

impl PovmCoarseGraining {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        Self::with_tolerances(kraus, &Tolerances::default())
    }

    pub fn with_tolerances(kraus: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        let dim = check_shapes(&kraus)?;
        let residual = closure_residual(&kraus, dim);
        if residual > tol.trace_preserving {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { kraus, dim })
    }

    /// Kraus operators equal to the projectors of `cg`.
    pub fn from_projective(cg: &CoarseGraining) -> Self {
        Self { kraus: cg.projectors().iter().map(|p| p.matrix().clone()).collect(), dim: cg.dim() }
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    /// `V_i = tr(K_i K_i†)`, positive reals.
    pub fn volumes(&self) -> Vec<f64> {
        self.kraus.iter().map(|k| k.norm_squared()).collect()
    }
}

/// `p_i = tr(K_i ρ K_i†)`.
pub fn povm_probabilities(rho: &DensityMatrix, povm: &PovmCoarseGraining) -> Result<Vec<f64>> {
    if rho.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: povm.dim() });
    }
    let mut p: Vec<f64> = povm
        .kraus()
        .iter()
        .map(|k| linalg::trace(&linalg::matmul(k, &linalg::matmul(rho.matrix(), &k.adjoint()))).re)
        .collect();
    crate::coarse::clamp_probabilities(&mut p);
    Ok(p)
}

/// `S_K(ρ) = -∑ p_i ln(p_i/V_i)` with `p_i = tr(K_i ρ K_i†)`, `V_i = tr(K_i K_i†)`.
pub fn povm_entropy(rho: &DensityMatrix, povm: &PovmCoarseGraining) -> Result<EntropyReport> {
    let p = povm_probabilities(rho, povm)?;
    Ok(EntropyReport::from_distribution(p, povm.volumes(), PROBABILITY_FLOOR))
}

/// Random trace-preserving Kraus set: the `outcomes` square blocks of a
/// Haar-random isometry from `dim` to `outcomes × dim`.
pub fn random_kraus<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> PovmCoarseGraining {
    let v = linalg::haar_isometry(outcomes * dim, dim, rng);
    PovmCoarseGraining { kraus: isometry_blocks(&v, dim), dim }
}

fn isometry_blocks(v: &CMat, dim: usize) -> Vec<CMat> {
    (0..v.nrows() / dim).map(|i| v.rows(i * dim, dim).into_owned()).collect()
}

/// `K_A ⊗ K_B ⊗ …` with every factor trace-preserving on its own subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalPovm {
    factors: Vec<PovmCoarseGraining>,
    subsystem_dims: Vec<usize>,
}

impl LocalPovm {
    /// Validates each factor locally and the expansion globally.
    pub fn new(factors: Vec<Vec<CMat>>, subsystem_dims: &[usize], tol: &Tolerances) -> Result<Self> {
        if factors.len() != subsystem_dims.len() {
            return Err(Error::DimensionMismatch { expected: subsystem_dims.len(), found: factors.len() });
        }
        let mut validated = Vec::with_capacity(factors.len());
        for (x, (kraus, &d)) in factors.into_iter().zip(subsystem_dims).enumerate() {
            let dim = check_shapes(&kraus)?;
            if dim != d {
                return Err(Error::DimensionMismatch { expected: d, found: dim });
            }
            let residual = closure_residual(&kraus, dim);
            if residual > tol.trace_preserving {
                return Err(Error::NotLocallyTracePreserving { subsystem: x, residual });
            }
            validated.push(PovmCoarseGraining { kraus, dim });
        }
        let local = Self { factors: validated, subsystem_dims: subsystem_dims.to_vec() };
        let expanded = local.expand();
        let residual = closure_residual(expanded.kraus(), expanded.dim());
        if residual > tol.trace_preserving {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(local)
    }

    pub fn factors(&self) -> &[PovmCoarseGraining] {
        &self.factors
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    /// `{K^A_l ⊗ K^B_m ⊗ …}` in row-major outcome order.
    pub fn expand(&self) -> PovmCoarseGraining {
        let mut kraus = vec![CMat::identity(1, 1)];
        for f in &self.factors {
            kraus = kraus.iter().flat_map(|k| f.kraus().iter().map(move |kf| linalg::kron(k, kf))).collect();
        }
        PovmCoarseGraining { kraus, dim: self.subsystem_dims.iter().product() }
    }
}

/// Checks a local POVM given as separate factors.
pub fn validate_local_povm(factors: Vec<Vec<CMat>>, subsystem_dims: &[usize], tol: &Tolerances) -> Result<LocalPovm> {
    LocalPovm::new(factors, subsystem_dims, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PovmQcOptions {
    /// Options for the projective search that seeds the POVM search.
    pub projective: QcOptions,
    /// Outcomes per subsystem; defaults to subsystem dimension + 1.
    pub outcomes: Option<Vec<usize>>,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub stall_tol: f64,
    pub grid: usize,
    pub seed: u64,
}

impl Default for PovmQcOptions {
    fn default() -> Self {
        Self {
            projective: QcOptions::default(),
            outcomes: None,
            restarts: 4,
            max_sweeps: 60,
            stall_tol: 1e-8,
            grid: 6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PovmQcResult {
    /// Upper-bound estimate of the POVM quantum correlation entropy, clamped at 0.
    pub value: f64,
    pub infimum_estimate: f64,
    pub best_entropy: f64,
    pub vn_entropy: f64,
    pub best_local_povm: LocalPovm,
    /// The projective search used as the first starting point.
    pub projective: QcResult,
    pub restarts_used: usize,
    pub converged: bool,
}

/// Local POVM search state: one isometry per subsystem whose square blocks
/// are the Kraus operators.
struct PovmSearch<'a> {
    rho: &'a CMat,
    dims: &'a [usize],
    outcomes: &'a [usize],
}

impl PovmSearch<'_> {
    fn effects(&self, iso: &CMat, x: usize) -> Vec<CMat> {
        isometry_blocks(iso, self.dims[x]).iter().map(|k| linalg::adjoint_mul(k, k)).collect()
    }

    /// `σ_r = tr_{¬x}(ρ (1_x ⊗ E_r))` for every outcome tuple `r` of the
    /// other subsystems, row-major over those subsystems.
    fn environments(&self, effects: &[Vec<CMat>], x: usize) -> (Vec<CMat>, Vec<f64>) {
        let others: Vec<usize> = (0..self.dims.len()).filter(|&y| y != x).collect();
        let count: usize = others.iter().map(|&y| self.outcomes[y]).product();
        let mut sigmas = Vec::with_capacity(count);
        let mut volumes = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rem = flat;
            let mut picks = vec![0; self.dims.len()];
            for &y in others.iter().rev() {
                picks[y] = rem % self.outcomes[y];
                rem /= self.outcomes[y];
            }
            let ops: Vec<CMat> = (0..self.dims.len())
                .map(|y| if y == x { CMat::identity(self.dims[x], self.dims[x]) } else { effects[y][picks[y]].clone() })
                .collect();
            let op = linalg::kron_all(&ops);
            let weighted = linalg::matmul(self.rho, &op);
            sigmas.push(linalg::partial_trace(&weighted, self.dims, &[x]));
            volumes.push(others.iter().map(|&y| linalg::trace(&effects[y][picks[y]]).re).product());
        }
        (sigmas, volumes)
    }

    fn entropy_with(&self, own: &[CMat], sigmas: &[CMat], env_volumes: &[f64]) -> f64 {
        let mut s = 0.0;
        for e in own {
            let v_own = linalg::trace(e).re;
            for (sigma, &v_env) in sigmas.iter().zip(env_volumes) {
                let p = linalg::trace_of_product(sigma, e).re;
                if p >= PROBABILITY_FLOOR {
                    s -= p * (p / (v_own * v_env)).ln();
                }
            }
        }
        s
    }

    fn total_entropy(&self, isos: &[CMat]) -> f64 {
        let effects: Vec<Vec<CMat>> = isos.iter().enumerate().map(|(x, v)| self.effects(v, x)).collect();
        let (sigmas, vols) = self.environments(&effects, 0);
        self.entropy_with(&effects[0], &sigmas, &vols)
    }

    fn descend(&self, mut isos: Vec<CMat>, opts: &PovmQcOptions) -> (f64, Vec<CMat>, bool) {
        let search =
            AngleSearch { theta_span: std::f64::consts::FRAC_PI_2, grid: opts.grid, ..AngleSearch::default() };
        let mut current = self.total_entropy(&isos);
        let mut converged = false;
        for _ in 0..opts.max_sweeps {
            let start = current;
            for x in 0..self.dims.len() {
                let effects: Vec<Vec<CMat>> = isos.iter().enumerate().map(|(y, v)| self.effects(v, y)).collect();
                let (sigmas, vols) = self.environments(&effects, x);
                let rows = isos[x].nrows();
                for a in 0..rows {
                    for b in (a + 1)..rows {
                        let base = isos[x].clone();
                        let objective = |theta: f64, phi: f64| {
                            let mut v = base.clone();
                            rotate_rows(&mut v, a, b, theta, phi);
                            self.entropy_with(&self.effects(&v, x), &sigmas, &vols)
                        };
                        let (theta, phi, value) = minimize_rotation(&objective, &search);
                        if value < objective(0.0, 0.0) - 1e-15 {
                            rotate_rows(&mut isos[x], a, b, theta, phi);
                        }
                    }
                }
            }
            current = self.total_entropy(&isos);
            if start - current < opts.stall_tol {
                converged = true;
                break;
            }
        }
        (current, isos, converged)
    }
}

/// Isometry whose first `dim` blocks are `|u_i⟩⟨u_i|` and the rest zero.
fn projective_isometry(u: &CMat, outcomes: usize) -> CMat {
    let d = u.nrows();
    let mut v = CMat::zeros(outcomes * d, d);
    for i in 0..d {
        let col = u.column(i);
        let k = &col * col.adjoint();
        v.rows_mut(i * d, d).copy_from(&k);
    }
    v
}

/// Generalized quantum correlation entropy over local POVMs with a fixed
/// number of outcomes per subsystem. The projective optimum is the first
/// starting point, so the estimate never exceeds the projective one.
pub fn qc_entropy_povm(rho: &DensityMatrix, dims: &[usize], opts: &PovmQcOptions) -> Result<PovmQcResult> {
    let projective = qc_entropy(rho, dims, &opts.projective)?;
    let outcomes: Vec<usize> = match &opts.outcomes {
        Some(o) if o.len() != dims.len() => {
            return Err(Error::DimensionMismatch { expected: dims.len(), found: o.len() })
        }
        Some(o) => o.clone(),
        None => dims.iter().map(|d| d + 1).collect(),
    };
    if let Some(x) = (0..dims.len()).find(|&x| outcomes[x] < dims[x]) {
        return Err(Error::InvalidInput(format!(
            "subsystem {x} needs at least {} outcomes to contain projective measurements",
            dims[x]
        )));
    }
    let search = PovmSearch { rho: rho.matrix(), dims, outcomes: &outcomes };
    let restarts = opts.restarts.max(1);
    let starts: Vec<Vec<CMat>> = (0..restarts)
        .map(|i| {
            if i == 0 {
                projective.best_bases.iter().zip(&outcomes).map(|(u, &n)| projective_isometry(u, n)).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(i as u64);
                dims.iter().zip(&outcomes).map(|(&d, &n)| linalg::haar_isometry(n * d, d, &mut rng)).collect()
            }
        })
        .collect();
    let runs: Vec<(f64, Vec<CMat>, bool)> = starts.into_par_iter().map(|s| search.descend(s, opts)).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 < runs[best].0 {
            best = i;
        }
    }
    let (best_entropy, isos, converged) = runs[best].clone();
    let factors = isos.iter().zip(dims).map(|(v, &d)| isometry_blocks(v, d)).collect();
    let best_local_povm = LocalPovm::new(factors, dims, &Tolerances::default())?;
    let vn = vn_entropy(rho);
    let infimum_estimate = best_entropy - vn;
    Ok(PovmQcResult {
        value: infimum_estimate.max(0.0),
        infimum_estimate,
        best_entropy,
        vn_entropy: vn,
        best_local_povm,
        projective,
        restarts_used: restarts,
        converged,
    })
}

//! Projective coarse-grainings: projectors, partitions of unity, the
//! refinement order, joint and local (tensor-product) coarse-grainings.
//!
//! Every projector is kept both as a dense matrix and as an orthonormal
//! basis of its range. Most algebra goes through the basis form, which keeps
//! refinement tests and probabilities at O(dim³) overall instead of
//! O(#projectors² · dim³).

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::state::{DensityMatrix, Observable};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: CMat,
    basis: CMat,
}

impl Projector {
    /// Validates a dense projector matrix.
    pub fn new(matrix: CMat, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > tol.projector {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = linalg::hermitian_part(&matrix);
        let residual = linalg::max_abs(&(linalg::matmul(&matrix, &matrix) - &matrix));
        if residual > tol.projector {
            return Err(Error::NotIdempotent { residual });
        }
        let trace = linalg::trace(&matrix).re;
        let rank = trace.round();
        if (trace - rank).abs() > tol.rank || rank < 1.0 {
            return Err(Error::NonIntegerRank { trace });
        }
        let eig = linalg::eigh(&matrix);
        let cols: Vec<usize> = (0..eig.values.len()).filter(|&k| eig.values[k] > 0.5).collect();
        if cols.len() != rank as usize {
            return Err(Error::NonIntegerRank { trace });
        }
        let basis = linalg::select_columns(&eig.vectors, &cols);
        Ok(Self { matrix, basis })
    }

    /// Projector onto the span of the (orthonormal) columns of `basis`.
    pub fn from_basis(basis: CMat, tol: &Tolerances) -> Result<Self> {
        if basis.ncols() == 0 {
            return Err(Error::NonIntegerRank { trace: 0.0 });
        }
        let gram = linalg::adjoint_mul(&basis, &basis);
        let residual = linalg::max_abs(&(gram - CMat::identity(basis.ncols(), basis.ncols())));
        if residual > tol.projector {
            return Err(Error::NotIdempotent { residual });
        }
        Ok(Self::from_orthonormal(basis))
    }

    pub(crate) fn from_orthonormal(basis: CMat) -> Self {
        let matrix = linalg::matmul(&basis, &basis.adjoint());
        Self { matrix, basis }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Orthonormal basis of the range, one vector per column.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// A finite set of mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraining {
    projectors: Vec<Projector>,
    labels: Option<Vec<f64>>,
    dim: usize,
}

impl CoarseGraining {
    pub fn new(projectors: Vec<Projector>, labels: Option<Vec<f64>>, tol: &Tolerances) -> Result<Self> {
        let dim = projectors.first().map(Projector::dim).ok_or_else(|| Error::Incomplete { residual: 1.0 })?;
        if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if let Some(l) = &labels {
            if l.len() != projectors.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} labels for {} projectors",
                    l.len(),
                    projectors.len()
                )));
            }
        }
        let cg = Self { projectors, labels, dim };
        cg.check_partition_of_unity(tol)?;
        Ok(cg)
    }

    fn check_partition_of_unity(&self, tol: &Tolerances) -> Result<()> {
        let (basis, owner) = self.basis_matrix();
        let gram = linalg::adjoint_mul(&basis, &basis);
        let mut worst = (0.0, 0, 0);
        for a in 0..gram.nrows() {
            for b in (a + 1)..gram.ncols() {
                if owner[a] != owner[b] && gram[(a, b)].norm() > worst.0 {
                    worst = (gram[(a, b)].norm(), owner[a], owner[b]);
                }
            }
        }
        if worst.0 > tol.projector {
            return Err(Error::NotOrthogonal { first: worst.1, second: worst.2, residual: worst.0 });
        }
        let sum = linalg::matmul(&basis, &basis.adjoint());
        let residual = linalg::max_abs(&(sum - CMat::identity(self.dim, self.dim)));
        if residual > tol.projector || basis.ncols() != self.dim {
            return Err(Error::Incomplete { residual: residual.max(tol.projector * 2.0) });
        }
        Ok(())
    }

    /// `{1}`, the coarsest coarse-graining.
    /// Projectors from orthonormal bases that are known to be complete.
    pub(crate) fn from_bases(bases: Vec<CMat>, labels: Option<Vec<f64>>, dim: usize) -> Self {
        let projectors = bases.into_iter().map(Projector::from_orthonormal).collect();
        CoarseGraining { projectors, labels, dim }
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            projectors: vec![Projector::from_orthonormal(CMat::identity(dim, dim))],
            labels: None,
            dim,
        }
    }

    /// Rank-1 projectors onto the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self::from_unitary(&CMat::identity(dim, dim))
    }

    /// Rank-1 projectors onto the columns of a unitary.
    pub fn from_unitary(u: &CMat) -> Self {
        let dim = u.nrows();
        let projectors = (0..u.ncols()).map(|k| Projector::from_orthonormal(u.columns(k, 1).into_owned())).collect();
        Self { projectors, labels: None, dim }
    }

    /// Partition of the computational basis into blocks of indices.
    pub fn from_blocks(dim: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; dim];
        for &i in blocks.iter().flatten() {
            if i >= dim || seen[i] {
                return Err(Error::InvalidInput(format!("index {i} repeated or out of range in blocks")));
            }
            seen[i] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInput(format!("basis index {missing} is not covered by any block")));
        }
        let eye = CMat::identity(dim, dim);
        let projectors = blocks
            .iter()
            .map(|b| {
                if b.is_empty() {
                    return Err(Error::InvalidInput("empty block".into()));
                }
                Ok(Projector::from_orthonormal(linalg::select_columns(&eye, b)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { projectors, labels: None, dim })
    }

    pub fn from_matrices(matrices: Vec<CMat>, tol: &Tolerances) -> Result<Self> {
        let projectors = matrices.into_iter().map(|m| Projector::new(m, tol)).collect::<Result<Vec<_>>>()?;
        Self::new(projectors, None, tol)
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn volumes(&self) -> Vec<f64> {
        self.projectors.iter().map(|p| p.rank() as f64).collect()
    }

    /// All basis vectors side by side (a unitary), with the index of the
    /// projector owning each column.
    pub fn basis_matrix(&self) -> (CMat, Vec<usize>) {
        let total: usize = self.projectors.iter().map(Projector::rank).sum();
        let mut out = CMat::zeros(self.dim, total);
        let mut owner = Vec::with_capacity(total);
        let mut col = 0;
        for (i, p) in self.projectors.iter().enumerate() {
            out.columns_mut(col, p.rank()).copy_from(p.basis());
            owner.extend(std::iter::repeat_n(i, p.rank()));
            col += p.rank();
        }
        (out, owner)
    }

    /// Coarser coarse-graining whose projectors are the sums over `groups`.
    pub fn merge(&self, groups: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; self.len()];
        let mut projectors = Vec::with_capacity(groups.len());
        for g in groups {
            if g.is_empty() {
                return Err(Error::InvalidInput("empty merge group".into()));
            }
            let mut cols = Vec::new();
            for &i in g {
                if i >= self.len() || seen[i] {
                    return Err(Error::InvalidInput(format!("projector {i} repeated or out of range")));
                }
                seen[i] = true;
                cols.push(self.projectors[i].basis().clone());
            }
            let rank: usize = cols.iter().map(|b| b.ncols()).sum();
            let mut basis = CMat::zeros(self.dim, rank);
            let mut at = 0;
            for b in cols {
                basis.columns_mut(at, b.ncols()).copy_from(&b);
                at += b.ncols();
            }
            projectors.push(Projector::from_orthonormal(basis));
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidInput("merge groups do not cover every projector".into()));
        }
        Ok(Self { projectors, labels: None, dim: self.dim })
    }
}

/// A sequence of coarse-grainings applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCoarseGraining {
    sequence: Vec<CoarseGraining>,
}

impl MultiCoarseGraining {
    pub fn new(sequence: Vec<CoarseGraining>) -> Result<Self> {
        let first = sequence.first().ok_or_else(|| Error::InvalidInput("empty coarse-graining sequence".into()))?;
        if let Some(c) = sequence.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: c.dim() });
        }
        Ok(Self { sequence })
    }

    pub fn sequence(&self) -> &[CoarseGraining] {
        &self.sequence
    }

    pub fn dim(&self) -> usize {
        self.sequence[0].dim()
    }
}

/// `C_A ⊗ C_B ⊗ …`, one coarse-graining per subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCoarseGraining {
    factors: Vec<CoarseGraining>,
    subsystem_dims: Vec<usize>,
}

impl LocalCoarseGraining {
    pub fn factors(&self) -> &[CoarseGraining] {
        &self.factors
    }

    pub fn subsystem_dims(&self) -> &[usize] {
        &self.subsystem_dims
    }

    pub fn dim(&self) -> usize {
        self.subsystem_dims.iter().product()
    }

    /// Number of outcomes per subsystem.
    pub fn shape(&self) -> Vec<usize> {
        self.factors.iter().map(CoarseGraining::len).collect()
    }

    pub fn num_outcomes(&self) -> usize {
        self.shape().iter().product()
    }

    /// Outcome tuple `(l, m, …, n)` for a row-major flat index.
    pub fn outcome_tuple(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut out = vec![0; shape.len()];
        for k in (0..shape.len()).rev() {
            out[k] = flat % shape[k];
            flat /= shape[k];
        }
        out
    }

    pub fn outcome_tuples(&self) -> Vec<Vec<usize>> {
        (0..self.num_outcomes()).map(|i| self.outcome_tuple(i)).collect()
    }

    /// `V_{lm…n} = V^A_l · V^B_m · … · V^C_n`, row-major.
    pub fn volumes(&self) -> Vec<f64> {
        self.outcome_tuples()
            .iter()
            .map(|t| t.iter().zip(&self.factors).map(|(&i, f)| f.projectors()[i].rank() as f64).product())
            .collect()
    }

    /// Explicit coarse-graining `{P^A_l ⊗ P^B_m ⊗ …}` in row-major outcome order.
    pub fn expand(&self) -> CoarseGraining {
        let projectors = self
            .outcome_tuples()
            .iter()
            .map(|t| {
                let bases: Vec<CMat> =
                    t.iter().zip(&self.factors).map(|(&i, f)| f.projectors()[i].basis().clone()).collect();
                Projector::from_orthonormal(linalg::kron_all(&bases))
            })
            .collect();
        CoarseGraining { projectors, labels: None, dim: self.dim() }
    }

    /// `⊗_X B_X` where `B_X` is the factor's basis matrix, together with the
    /// flat outcome index owning each column.
    pub fn product_basis(&self) -> (CMat, Vec<usize>) {
        let parts: Vec<(CMat, Vec<usize>)> = self.factors.iter().map(CoarseGraining::basis_matrix).collect();
        let w = linalg::kron_all(&parts.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
        let shape = self.shape();
        let mut owner = vec![0usize];
        for (k, (_, own)) in parts.iter().enumerate() {
            let width = shape[k];
            owner = owner.iter().flat_map(|&o| own.iter().map(move |&x| o * width + x)).collect();
        }
        (w, owner)
    }
}

/// Builds `C_A ⊗ C_B ⊗ …` from per-subsystem factors.
pub fn tensor_local(factors: Vec<CoarseGraining>, subsystem_dims: &[usize]) -> Result<LocalCoarseGraining> {
    if factors.len() != subsystem_dims.len() {
        return Err(Error::DimensionMismatch { expected: subsystem_dims.len(), found: factors.len() });
    }
    for (f, &d) in factors.iter().zip(subsystem_dims) {
        if f.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: f.dim() });
        }
    }
    Ok(LocalCoarseGraining { factors, subsystem_dims: subsystem_dims.to_vec() })
}

/// Groups ascending eigenvalues whose consecutive gaps are at most
/// `rel_tol × (max - min)`; returns index groups into `values`.
pub fn group_spectrum(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    if values.is_empty() {
        return vec![];
    }
    let range = values[values.len() - 1] - values[0];
    let gap = rel_tol * range;
    let mut groups = vec![vec![0]];
    for k in 1..values.len() {
        if values[k] - values[k - 1] <= gap {
            groups.last_mut().unwrap().push(k);
        } else {
            groups.push(vec![k]);
        }
    }
    groups
}

/// `C_Q`: one projector per (near-)degenerate eigenspace of `q`, labelled by
/// the mean eigenvalue of the group. Eigenspaces appear in ascending order.
pub fn spectral_coarse_graining(q: &Observable, degeneracy_tol: f64) -> CoarseGraining {
    let eig = linalg::eigh(q.matrix());
    let groups = group_spectrum(&eig.values, degeneracy_tol);
    let labels = groups.iter().map(|g| g.iter().map(|&k| eig.values[k]).sum::<f64>() / g.len() as f64).collect();
    let projectors = groups
        .iter()
        .map(|g| Projector::from_orthonormal(linalg::select_columns(&eig.vectors, g)))
        .collect();
    CoarseGraining { projectors, labels: Some(labels), dim: q.dim() }
}

/// `C_ρ`, the spectral coarse-graining of the state itself.
pub fn state_coarse_graining(rho: &DensityMatrix, tol: &Tolerances) -> CoarseGraining {
    spectral_coarse_graining(&Observable::from(rho), tol.degeneracy)
}

pub(crate) fn clamp_probabilities(p: &mut [f64]) {
    for x in p.iter_mut() {
        if *x < 0.0 {
            debug_assert!(*x > -1e-12, "probability {x} far below zero");
            *x = 0.0;
        }
    }
}

/// `p_i = tr(P_i ρ)`.
pub fn probabilities(rho: &DensityMatrix, cg: &CoarseGraining) -> Result<Vec<f64>> {
    if rho.dim() != cg.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: cg.dim() });
    }
    let (basis, owner) = cg.basis_matrix();
    let diag = linalg::diagonal_in_basis(rho.matrix(), &basis);
    let mut p = vec![0.0; cg.len()];
    for (k, v) in diag.into_iter().enumerate() {
        p[owner[k]] += v;
    }
    clamp_probabilities(&mut p);
    Ok(p)
}

/// Joint probabilities `p_{lm…n}` of a local coarse-graining, row-major.
pub fn local_probabilities(rho: &DensityMatrix, local: &LocalCoarseGraining) -> Result<Vec<f64>> {
    check_local_dims(rho, local)?;
    let (w, owner) = local.product_basis();
    let diag = linalg::diagonal_in_basis(rho.matrix(), &w);
    let mut p = vec![0.0; local.num_outcomes()];
    for (k, v) in diag.into_iter().enumerate() {
        p[owner[k]] += v;
    }
    clamp_probabilities(&mut p);
    Ok(p)
}

pub(crate) fn check_local_dims(rho: &DensityMatrix, local: &LocalCoarseGraining) -> Result<()> {
    match rho.subsystem_dims() {
        Some(d) if d != local.subsystem_dims() => Err(Error::MissingTensorStructure(format!(
            "state subsystems {d:?} do not match coarse-graining subsystems {:?}",
            local.subsystem_dims()
        ))),
        _ if rho.dim() != local.dim() => Err(Error::DimensionMismatch { expected: rho.dim(), found: local.dim() }),
        _ => Ok(()),
    }
}

/// `C ≥ C'`: every projector of `coarse` is a sum of projectors of `fine`.
///
/// Each pair is classified by `P_i Q_j = 0` or `P_i Q_j = Q_j`, measured in
/// Frobenius norm against `tol.order`; any other outcome means not coarser.
pub fn is_coarser(coarse: &CoarseGraining, fine: &CoarseGraining, tol: &Tolerances) -> Result<bool> {
    if coarse.dim() != fine.dim() {
        return Err(Error::DimensionMismatch { expected: coarse.dim(), found: fine.dim() });
    }
    let mut claimed = vec![false; fine.len()];
    for p in coarse.projectors() {
        let mut volume = 0;
        for (j, q) in fine.projectors().iter().enumerate() {
            // ‖P Q‖ = ‖M‖ and ‖(1-P) Q‖ = ‖B_Q - B_P M‖ with M = B_P† B_Q.
            let overlap = linalg::adjoint_mul(p.basis(), q.basis());
            if overlap.norm() <= tol.order {
                continue;
            }
            let outside = (q.basis() - linalg::matmul(p.basis(), &overlap)).norm();
            if outside <= tol.order && !claimed[j] {
                claimed[j] = true;
                volume += q.rank();
            } else {
                return Ok(false);
            }
        }
        if volume != p.rank() {
            return Ok(false);
        }
    }
    Ok(claimed.iter().all(|&c| c))
}

/// Largest Frobenius norm of `[P_i, Q_j]` over all pairs.
pub fn max_commutator(a: &CoarseGraining, b: &CoarseGraining) -> f64 {
    let mut worst: f64 = 0.0;
    for p in a.projectors() {
        for q in b.projectors() {
            // [P, Q] = PQ(1-P) - (1-P)QP with orthogonal terms, and
            // ‖PQ(1-P)‖ = ‖M B_Q† - M M† B_P†‖ for M = B_P† B_Q. Formed entrywise
            // this avoids the cancellation in ‖M‖² - ‖MM†‖².
            let m = linalg::adjoint_mul(p.basis(), q.basis());
            let mm = linalg::matmul(&m, &m.adjoint());
            let x = linalg::matmul(&m, &q.basis().adjoint()) - linalg::matmul(&mm, &p.basis().adjoint());
            worst = worst.max(std::f64::consts::SQRT_2 * x.norm());
        }
    }
    worst
}

/// `{P_i Q_j}` with vanishing products dropped, for commuting inputs.
pub fn joint(a: &CoarseGraining, b: &CoarseGraining, tol: &Tolerances) -> Result<CoarseGraining> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let max_commutator = max_commutator(a, b);
    if max_commutator > tol.commute {
        return Err(Error::NonCommuting { max_commutator });
    }
    let mut projectors = Vec::new();
    for p in a.projectors() {
        for q in b.projectors() {
            let m = linalg::adjoint_mul(p.basis(), q.basis());
            let rank = m.norm_squared().round() as usize;
            if rank == 0 {
                continue;
            }
            // For commuting P, Q the singular values of P_basis† Q_basis are 0 or 1
            // and the right singular vectors with value 1 span P∩Q inside Q.
            let svd = m.svd(false, true);
            let vt = svd.v_t.expect("requested V^T");
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
            let coeffs = CMat::from_fn(q.rank(), rank, |r, k| vt[(order[k], r)].conj());
            let basis = linalg::matmul(q.basis(), &coeffs);
            projectors.push(Projector::from_orthonormal(basis));
        }
    }
    CoarseGraining::new(projectors, None, tol)
}

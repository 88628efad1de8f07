//! Validated density matrices and observables.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tolerances::Tolerances;

/// Hermitian, positive semidefinite, unit-trace matrix, optionally carrying
/// a tensor-product structure `H = H_1 ⊗ … ⊗ H_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    subsystem_dims: Option<Vec<usize>>,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    /// Validates `matrix` against the given tolerances. The stored matrix is
    /// the Hermitian part of the input.
    pub fn with_tolerances(matrix: CMat, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > tol.hermitian {
            return Err(Error::NotHermitian { residual });
        }
        let matrix = linalg::hermitian_part(&matrix);
        let residual = (linalg::trace(&matrix) - 1.0).norm();
        if residual > tol.trace {
            return Err(Error::NotUnitTrace { residual });
        }
        let min_eigenvalue = linalg::eigvalsh(&matrix)[0];
        if min_eigenvalue < -tol.positivity {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix, subsystem_dims: None })
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector.
    pub fn pure(psi: &CVec) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { matrix: linalg::outer(psi), subsystem_dims: None })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMat::identity(dim, dim).unscale(dim as f64), subsystem_dims: None }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let d = CVec::from_iterator(probabilities.len(), probabilities.iter().map(|&p| linalg::c(p, 0.0)));
        Self::new(CMat::from_diagonal(&d))
    }

    /// Attaches a tensor structure; the product of `dims` must equal the dimension.
    pub fn with_subsystems(mut self, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if product != self.dim() || dims.iter().any(|&d| d == 0) {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: product });
        }
        self.subsystem_dims = Some(dims);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn subsystem_dims(&self) -> Option<&[usize]> {
        self.subsystem_dims.as_deref()
    }

    pub(crate) fn require_subsystems(&self) -> Result<&[usize]> {
        self.subsystem_dims()
            .ok_or_else(|| Error::MissingTensorStructure("state has no subsystem_dims".into()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// `U ρ U†`, keeping the tensor structure.
    pub fn conjugated(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.nrows() });
        }
        let m = linalg::hermitian_part(&linalg::matmul(u, &linalg::matmul(&self.matrix, &u.adjoint())));
        Ok(Self { matrix: m, subsystem_dims: self.subsystem_dims.clone() })
    }

    /// `ρ_A ⊗ ρ_B ⊗ …`; subsystem dims are concatenated (a factor without
    /// structure counts as one subsystem).
    pub fn tensor(factors: &[DensityMatrix]) -> Self {
        let matrix = linalg::kron_all(&factors.iter().map(|f| f.matrix.clone()).collect::<Vec<_>>());
        let dims = factors
            .iter()
            .flat_map(|f| f.subsystem_dims.clone().unwrap_or_else(|| vec![f.dim()]))
            .collect();
        Self { matrix, subsystem_dims: Some(dims) }
    }

    /// Used by constructions that are valid by design (canonical states,
    /// unitary evolution) and would otherwise pay for an eigendecomposition.
    pub(crate) fn from_trusted(matrix: CMat, subsystem_dims: Option<Vec<usize>>) -> Self {
        Self { matrix, subsystem_dims }
    }
}

/// Reduced state on the subsystems in `keep`.
pub fn reduce(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.require_subsystems()?;
    if let Some(&bad) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::MissingTensorStructure(format!(
            "subsystem {bad} out of range for {} subsystems",
            dims.len()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    let m = linalg::partial_trace(rho.matrix(), dims, &kept);
    let sub = kept.iter().map(|&k| dims[k]).collect();
    Ok(DensityMatrix::from_trusted(linalg::hermitian_part(&m), Some(sub)))
}

/// Hermitian operator, e.g. a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: CMat,
}

impl Observable {
    pub fn new(matrix: CMat) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMat, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        let residual = linalg::hermiticity_residual(&matrix);
        if residual > tol.hermitian {
            return Err(Error::NotHermitian { residual });
        }
        Ok(Self { matrix: linalg::hermitian_part(&matrix) })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = CVec::from_iterator(values.len(), values.iter().map(|&v| linalg::c(v, 0.0)));
        Self { matrix: CMat::from_diagonal(&d) }
    }

    /// For matrices Hermitian by construction.
    pub(crate) fn from_trusted(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }
}

impl From<&DensityMatrix> for Observable {
    fn from(rho: &DensityMatrix) -> Self {
        Self { matrix: rho.matrix.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn maximally_mixed_qubit_is_valid() {
        let m = CMat::identity(2, 2).unscale(2.0);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn diagonal_probabilities_are_valid() {
        assert!(DensityMatrix::diagonal(&[0.75, 0.25]).is_ok());
    }

    #[test]
    fn negative_eigenvalue_is_rejected() {
        match DensityMatrix::diagonal(&[1.5, -0.5]) {
            Err(Error::NotPositive { min_eigenvalue }) => assert!((min_eigenvalue + 0.5).abs() < 1e-12),
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn non_hermitian_and_bad_trace_are_rejected() {
        let m = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));
        let m = CMat::identity(2, 2);
        match DensityMatrix::new(m) {
            Err(Error::NotUnitTrace { residual }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let m = CMat::zeros(2, 3);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn reduce_bell_state_gives_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVec::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let rho = DensityMatrix::pure(&psi).unwrap().with_subsystems(vec![2, 2]).unwrap();
        let a = reduce(&rho, &[0]).unwrap();
        assert!(linalg::max_abs(&(a.matrix() - CMat::identity(2, 2).unscale(2.0))) < 1e-15);
        let all = reduce(&rho, &[0, 1]).unwrap();
        assert_eq!(all.matrix(), rho.matrix());
    }

    #[test]
    fn reduce_needs_tensor_structure() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(reduce(&rho, &[0]), Err(Error::MissingTensorStructure(_))));
    }

    #[test]
    fn reduce_product_state() {
        let a = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let b = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let ab = DensityMatrix::tensor(&[a.clone(), b]);
        assert_eq!(ab.subsystem_dims(), Some(&[2, 3][..]));
        let back = reduce(&ab, &[0]).unwrap();
        assert!(linalg::max_abs(&(back.matrix() - a.matrix())) < 1e-15);
    }
}

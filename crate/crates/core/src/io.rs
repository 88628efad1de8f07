//! JSON file formats for states and coarse-grainings.
//!
//! Complex matrices are row-major lists of rows, each entry `[re, im]`.
//!
//! ```json
//! {"dim": 2, "subsystem_dims": [2], "rho": [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]}
//! {"type": "partition", "basis": "computational", "blocks": [[0, 1], [2, 3]]}
//! {"type": "projectors", "matrices": [ ... ]}
//! {"type": "kraus", "matrices": [ ... ]}
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coarse::{tensor_local, CoarseGraining, LocalCoarseGraining};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec};
use crate::povm::PovmCoarseGraining;
use crate::state::DensityMatrix;
use crate::tolerances::Tolerances;

pub type MatrixRows = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_rows(m: &CMat) -> MatrixRows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystem_dims: Option<Vec<usize>>,
    /// Density matrix; exactly one of `rho` and `psi` must be present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<MatrixRows>,
    /// Pure state vector, `[re, im]` per amplitude.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            dim: rho.dim(),
            subsystem_dims: rho.subsystem_dims().map(<[usize]>::to_vec),
            rho: Some(matrix_to_rows(rho.matrix())),
            psi: None,
        }
    }

    pub fn build(&self, tol: &Tolerances) -> Result<DensityMatrix> {
        let rho = match (&self.rho, &self.psi) {
            (Some(rows), None) => DensityMatrix::with_tolerances(matrix_from_rows(rows)?, tol)?,
            (None, Some(amps)) => {
                DensityMatrix::pure(&CVec::from_iterator(amps.len(), amps.iter().map(|a| c(a[0], a[1]))))?
            }
            _ => return Err(Error::InvalidInput("state file needs exactly one of `rho`, `psi`".into())),
        };
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        match &self.subsystem_dims {
            Some(d) => rho.with_subsystems(d.clone()),
            None => Ok(rho),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CoarseGrainingFile {
    /// Partition of a named basis into blocks of basis indices.
    Partition {
        #[serde(default = "computational")]
        basis: String,
        #[serde(default)]
        dim: Option<usize>,
        blocks: Vec<Vec<usize>>,
    },
    /// Dense projector matrices.
    Projectors { matrices: Vec<MatrixRows> },
    /// Kraus operators of a POVM coarse-graining.
    Kraus { matrices: Vec<MatrixRows> },
    /// Tensor product of per-subsystem coarse-grainings.
    Local { subsystem_dims: Vec<usize>, factors: Vec<CoarseGrainingFile> },
}

fn computational() -> String {
    "computational".into()
}

/// A parsed measurement description.
#[derive(Debug, Clone)]
pub enum Measurement {
    Projective(CoarseGraining),
    Local(LocalCoarseGraining),
    Povm(PovmCoarseGraining),
}

impl CoarseGrainingFile {
    pub fn build(&self, tol: &Tolerances) -> Result<Measurement> {
        match self {
            CoarseGrainingFile::Partition { basis, dim, blocks } => {
                if basis != "computational" {
                    return Err(Error::InvalidInput(format!("unsupported basis `{basis}`")));
                }
                let dim = dim.unwrap_or_else(|| blocks.iter().map(Vec::len).sum());
                Ok(Measurement::Projective(CoarseGraining::from_blocks(dim, blocks)?))
            }
            CoarseGrainingFile::Projectors { matrices } => {
                let ms = matrices.iter().map(matrix_from_rows).collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Projective(CoarseGraining::from_matrices(ms, tol)?))
            }
            CoarseGrainingFile::Kraus { matrices } => {
                let ms = matrices.iter().map(matrix_from_rows).collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Povm(PovmCoarseGraining::with_tolerances(ms, tol)?))
            }
            CoarseGrainingFile::Local { subsystem_dims, factors } => {
                let fs = factors
                    .iter()
                    .map(|f| match f.build(tol)? {
                        Measurement::Projective(cg) => Ok(cg),
                        _ => Err(Error::InvalidInput("local factors must be projective".into())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Measurement::Local(tensor_local(fs, subsystem_dims)?))
            }
        }
    }

    pub fn from_coarse_graining(cg: &CoarseGraining) -> Self {
        CoarseGrainingFile::Projectors {
            matrices: cg.projectors().iter().map(|p| matrix_to_rows(p.matrix())).collect(),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

pub fn load_state(path: impl AsRef<Path>, tol: &Tolerances) -> Result<DensityMatrix> {
    read_json::<StateFile>(path)?.build(tol)
}

pub fn load_measurement(path: impl AsRef<Path>, tol: &Tolerances) -> Result<Measurement> {
    read_json::<CoarseGrainingFile>(path)?.build(tol)
}

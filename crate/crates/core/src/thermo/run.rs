use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    canonical_state, foe_coarse_graining, microcanonical_state, model_energy_coarse_graining, EnergyBinning, Evolver,
    HamiltonianModel, IsingParams,
};
use crate::coarse::{spectral_coarse_graining, CoarseGraining};
use crate::entropy::{vn_entropy, EntropyReport, PROBABILITY_FLOOR};
use crate::error::{Error, Result};
use crate::io::{matrix_from_rows, CoarseGrainingFile, Measurement, MatrixRows};
use crate::linalg::{self, c, CMat, CVec};
use crate::series::TimeSeries;
use crate::state::{DensityMatrix, Observable};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    IsingChain {
        #[serde(default = "one")]
        j: f64,
        #[serde(default)]
        hx: f64,
        #[serde(default)]
        hz: f64,
        sites: usize,
        #[serde(default)]
        periodic: bool,
        /// Sites per block, in chain order.
        #[serde(default)]
        blocks: Option<Vec<usize>>,
    },
    RandomHermitian {
        dim: usize,
        /// Defaults to the run seed.
        #[serde(default)]
        seed: Option<u64>,
    },
    Custom {
        hamiltonian: MatrixRows,
        /// Local block Hamiltonians, in tensor order.
        #[serde(default)]
        blocks: Option<Vec<MatrixRows>>,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    /// The reference chain split into two blocks of four sites.
    pub fn reference() -> Self {
        let p = IsingParams::reference();
        ModelConfig::IsingChain { j: p.j, hx: p.hx, hz: p.hz, sites: p.sites, periodic: p.periodic, blocks: Some(vec![4, 4]) }
    }

    pub fn build(&self, run_seed: u64, tol: &Tolerances) -> Result<HamiltonianModel> {
        match self {
            ModelConfig::IsingChain { j, hx, hz, sites, periodic, blocks } => {
                if *sites == 0 || *sites > 14 {
                    return Err(Error::InvalidInput(format!("{sites} sites is outside 1..=14")));
                }
                let params = IsingParams { j: *j, hx: *hx, hz: *hz, sites: *sites, periodic: *periodic };
                match blocks {
                    Some(b) => HamiltonianModel::ising_chain_blocks(params, b),
                    None => Ok(HamiltonianModel::ising_chain(params)),
                }
            }
            ModelConfig::RandomHermitian { dim, seed } => Ok(HamiltonianModel::random_hermitian(*dim, seed.unwrap_or(run_seed))),
            ModelConfig::Custom { hamiltonian, blocks } => {
                let h = Observable::with_tolerances(matrix_from_rows(hamiltonian)?, tol)?;
                let blocks = blocks
                    .as_ref()
                    .map(|bs| {
                        bs.iter()
                            .map(|b| Observable::with_tolerances(matrix_from_rows(b)?, tol))
                            .collect::<Result<Vec<_>>>()
                    })
                    .transpose()?;
                HamiltonianModel::custom(h, blocks)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    /// Product of spins, e.g. `"uudduudd"` (`u`/`0` up, `d`/`1` down).
    Product { spins: String },
    Canonical { beta: f64 },
    Microcanonical { e_min: f64, e_max: f64 },
    /// `index`-th eigenstate in ascending energy.
    Eigenstate { index: usize },
    /// Haar-random pure state drawn from the run seed.
    RandomPure,
    Pure { psi: Vec<[f64; 2]> },
}

impl StateConfig {
    pub fn build(&self, model: &HamiltonianModel, run_seed: u64) -> Result<DensityMatrix> {
        let dims = model.block_dims();
        let state = match self {
            StateConfig::Product { spins } => {
                let mut index = 0usize;
                for ch in spins.chars() {
                    let bit = match ch {
                        'u' | 'U' | '0' | '↑' => 0,
                        'd' | 'D' | '1' | '↓' => 1,
                        _ => return Err(Error::InvalidInput(format!("unknown spin `{ch}` in `{spins}`"))),
                    };
                    index = (index << 1) | bit;
                }
                let n = spins.chars().count();
                if n >= usize::BITS as usize || 1usize << n != model.dim() {
                    return Err(Error::DimensionMismatch { expected: model.dim(), found: 1usize << n.min(62) });
                }
                let mut psi = CVec::zeros(model.dim());
                psi[index] = c(1.0, 0.0);
                DensityMatrix::pure(&psi)?
            }
            StateConfig::Canonical { beta } => canonical_state(model, *beta)?,
            StateConfig::Microcanonical { e_min, e_max } => microcanonical_state(model, *e_min, *e_max)?,
            StateConfig::Eigenstate { index } => {
                let v = &model.spectrum().vectors;
                if *index >= v.ncols() {
                    return Err(Error::InvalidInput(format!("eigenstate {index} of {}", v.ncols())));
                }
                DensityMatrix::pure(&v.column(*index).into_owned())?
            }
            StateConfig::RandomPure => {
                let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
                DensityMatrix::pure(&linalg::haar_state(model.dim(), &mut rng))?
            }
            StateConfig::Pure { psi } => {
                DensityMatrix::pure(&CVec::from_iterator(psi.len(), psi.iter().map(|a| c(a[0], a[1]))))?
            }
        };
        if state.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: state.dim() });
        }
        match dims {
            Some(d) if state.subsystem_dims() != Some(d.as_slice()) => state.with_subsystems(d),
            _ => Ok(state),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    #[serde(default)]
    pub start: f64,
    #[serde(default = "default_end")]
    pub end: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_end() -> f64 {
    50.0
}
fn default_points() -> usize {
    200
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { start: 0.0, end: default_end(), points: default_points() }
    }
}

impl TimeGrid {
    /// Evenly spaced, both ends included.
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.points == 0 || (self.points > 1 && !(self.end > self.start)) {
            return Err(Error::InvalidInput(format!("bad time grid {self:?}")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let dt = (self.end - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.start + k as f64 * dt).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyColumn {
    /// `S_VN`.
    Vn,
    /// `S_CH`, global energy coarse-graining.
    Energy,
    /// `FOE`.
    Foe,
    /// `S_VN_block<i>` for every block.
    BlockVn,
}

/// Spectral coarse-graining of a named observable, reported as `S_<name>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedObservable {
    pub name: String,
    pub observable: ObservableSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// `∑ Z_i`.
    TotalZ,
    /// `∑ X_i`.
    TotalX,
    /// `∏ X_i`.
    ParityX,
    Matrix { rows: MatrixRows },
}

impl ObservableSpec {
    pub fn build(&self, dim: usize, tol: &Tolerances) -> Result<Observable> {
        let qubits = || {
            if dim.is_power_of_two() {
                Ok(dim.trailing_zeros() as usize)
            } else {
                Err(Error::InvalidInput(format!("spin observables need a power-of-two dimension, got {dim}")))
            }
        };
        let m = match self {
            ObservableSpec::TotalZ => {
                let n = qubits()?;
                let d: Vec<f64> = (0..dim).map(|s| n as f64 - 2.0 * s.count_ones() as f64).collect();
                return Ok(Observable::diagonal(&d));
            }
            ObservableSpec::TotalX => {
                let n = qubits()?;
                let mut m = CMat::zeros(dim, dim);
                for s in 0..dim {
                    for i in 0..n {
                        m[(s ^ (1 << i), s)] += c(1.0, 0.0);
                    }
                }
                m
            }
            ObservableSpec::ParityX => {
                qubits()?;
                CMat::from_fn(dim, dim, |r, col| if r == dim - 1 - col { c(1.0, 0.0) } else { c(0.0, 0.0) })
            }
            ObservableSpec::Matrix { rows } => matrix_from_rows(rows)?,
        };
        Observable::with_tolerances(m, tol)
    }
}

/// A coarse-graining from file syntax, reported as `S_<name>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedCoarseGraining {
    pub name: String,
    pub coarse_graining: CoarseGrainingFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondLawConfig {
    pub model: ModelConfig,
    pub state: StateConfig,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_columns")]
    pub columns: Vec<EntropyColumn>,
    /// Binning of the global `C_H`.
    #[serde(default)]
    pub energy_binning: EnergyBinning,
    /// Binning of each block's `C_{H_i}`.
    #[serde(default)]
    pub block_binning: EnergyBinning,
    #[serde(default)]
    pub observables: Vec<NamedObservable>,
    #[serde(default)]
    pub coarse_grainings: Vec<NamedCoarseGraining>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Output paths, used by the command-line front end.
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

fn default_columns() -> Vec<EntropyColumn> {
    vec![EntropyColumn::Vn, EntropyColumn::Energy, EntropyColumn::Foe]
}

impl SecondLawConfig {
    /// FOE second-law experiment on the reference chain from `|↑↑↓↓↑↑↓↓⟩`.
    pub fn reference() -> Self {
        Self {
            model: ModelConfig::reference(),
            state: StateConfig::Product { spins: "uudduudd".into() },
            times: TimeGrid::default(),
            seed: 0,
            columns: vec![EntropyColumn::Vn, EntropyColumn::Energy, EntropyColumn::Foe, EntropyColumn::BlockVn],
            energy_binning: EnergyBinning::default(),
            block_binning: EnergyBinning::default(),
            observables: Vec::new(),
            coarse_grainings: Vec::new(),
            tolerances: Tolerances::default(),
            output: None,
        }
    }
}

/// Outcome probabilities `diag(M† R M)` summed per owner, where `R` is the
/// state in the energy frame and `M = V†B` maps measurement basis columns.
struct Probe {
    name: String,
    frame_basis: CMat,
    owner: Vec<usize>,
    volumes: Vec<f64>,
}

impl Probe {
    fn new(name: String, basis: (CMat, Vec<usize>), volumes: Vec<f64>, energy_vectors: &CMat) -> Self {
        Self { name, frame_basis: linalg::adjoint_mul(energy_vectors, &basis.0), owner: basis.1, volumes }
    }

    fn entropy(&self, frame_rho: &CMat) -> f64 {
        let rm = linalg::matmul(frame_rho, &self.frame_basis);
        let mut p = vec![0.0; self.volumes.len()];
        for (k, &o) in self.owner.iter().enumerate() {
            p[o] += self.frame_basis.column(k).dotc(&rm.column(k)).re;
        }
        p.iter_mut().for_each(|x| *x = x.max(0.0));
        EntropyReport::from_distribution(p, self.volumes.clone(), PROBABILITY_FLOOR).total
    }
}

fn cg_probe(name: String, cg: &CoarseGraining, v: &CMat) -> Probe {
    Probe::new(name, cg.basis_matrix(), cg.volumes(), v)
}

/// Entropy time series of a closed system evolving under the model.
pub fn second_law_run(config: &SecondLawConfig) -> Result<TimeSeries> {
    let tol = &config.tolerances;
    let model = config.model.build(config.seed, tol)?;
    let rho0 = config.state.build(&model, config.seed)?;
    let times = config.times.times()?;
    let evolver = Evolver::new(&model, &rho0)?;
    let v = &model.spectrum().vectors;

    let mut probes = Vec::new();
    let mut want_vn = false;
    let mut block_dims = None;
    let mut names = Vec::new();
    for col in &config.columns {
        match col {
            EntropyColumn::Vn => want_vn = true,
            EntropyColumn::Energy => {
                let ch = model_energy_coarse_graining(&model, config.energy_binning)?.coarse_graining;
                probes.push(cg_probe("S_CH".into(), &ch, v));
            }
            EntropyColumn::Foe => {
                let local = foe_coarse_graining(&model, config.block_binning)?;
                probes.push(Probe::new("FOE".into(), local.product_basis(), local.volumes(), v));
            }
            EntropyColumn::BlockVn => {
                block_dims = Some(model.block_dims().ok_or_else(|| Error::MissingBlocks("block_vn column".into()))?);
            }
        }
    }
    for named in &config.observables {
        let q = named.observable.build(model.dim(), tol)?;
        let cg = spectral_coarse_graining(&q, tol.degeneracy);
        probes.push(cg_probe(format!("S_{}", named.name), &cg, v));
    }
    for named in &config.coarse_grainings {
        let probe = match named.coarse_graining.build(tol)? {
            Measurement::Projective(cg) if cg.dim() == model.dim() => cg_probe(format!("S_{}", named.name), &cg, v),
            Measurement::Local(l) if l.dim() == model.dim() => {
                Probe::new(format!("S_{}", named.name), l.product_basis(), l.volumes(), v)
            }
            Measurement::Povm(_) => {
                return Err(Error::InvalidInput(format!("coarse-graining `{}` must be projective", named.name)))
            }
            _ => return Err(Error::InvalidInput(format!("coarse-graining `{}` has the wrong dimension", named.name))),
        };
        probes.push(probe);
    }

    if want_vn {
        names.push("S_VN".to_string());
    }
    names.extend(probes.iter().map(|p| p.name.clone()));
    if let Some(d) = &block_dims {
        names.extend((0..d.len()).map(|i| format!("S_VN_block{i}")));
    }

    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let frame = evolver.energy_frame(t);
            let mut row = Vec::with_capacity(names.len());
            if want_vn {
                row.push(vn_entropy(&DensityMatrix::from_trusted(frame.clone(), None)));
            }
            row.extend(probes.iter().map(|p| p.entropy(&frame)));
            if let Some(d) = &block_dims {
                let rho = linalg::matmul(v, &linalg::matmul(&frame, &v.adjoint()));
                for i in 0..d.len() {
                    let reduced = linalg::partial_trace(&rho, d, &[i]);
                    row.push(vn_entropy(&DensityMatrix::from_trusted(linalg::hermitian_part(&reduced), None)));
                }
            }
            row
        })
        .collect();

    let mut ts = TimeSeries::new("t", times, false);
    for (k, name) in names.iter().enumerate() {
        ts.push_column(name, rows.iter().map(|r| r[k]).collect());
    }
    Ok(ts)
}

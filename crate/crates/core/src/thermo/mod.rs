//! Hamiltonian models, energy coarse-grainings, ensembles, unitary
//! evolution, factorized observational entropy and second-law runs.

mod run;

pub use run::{
    second_law_run, EntropyColumn, ModelConfig, NamedCoarseGraining, NamedObservable, ObservableSpec, OutputConfig, SecondLawConfig,
    StateConfig, TimeGrid,
};

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coarse::{tensor_local, CoarseGraining, LocalCoarseGraining};
use crate::entropy::{local_entropy, EntropyReport};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, Eigh};
use crate::state::{DensityMatrix, Observable};

/// Parameters of the mixed-field Ising chain
/// `H = J ∑ Z_i Z_{i+1} + h_x ∑ X_i + h_z ∑ Z_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingParams {
    #[serde(default = "one")]
    pub j: f64,
    #[serde(default)]
    pub hx: f64,
    #[serde(default)]
    pub hz: f64,
    pub sites: usize,
    #[serde(default)]
    pub periodic: bool,
}

fn one() -> f64 {
    1.0
}

impl IsingParams {
    /// The nonintegrable reference chain: 8 open sites, `J = 1`,
    /// `h_x = 0.9`, `h_z = 0.8`.
    pub fn reference() -> Self {
        Self { j: 1.0, hx: 0.9, hz: 0.8, sites: 8, periodic: false }
    }
}

/// Ising Hamiltonian on `n` sites; site 0 is the most significant qubit and
/// `|0⟩` is spin up (`Z = +1`).
pub fn ising_hamiltonian(n: usize, j: f64, hx: f64, hz: f64, periodic: bool) -> CMat {
    let dim = 1usize << n;
    let z = |s: usize, i: usize| if (s >> (n - 1 - i)) & 1 == 0 { 1.0 } else { -1.0 };
    let mut h = CMat::zeros(dim, dim);
    let bonds = if periodic && n > 2 { n } else { n.saturating_sub(1) };
    for s in 0..dim {
        let mut diag = 0.0;
        for b in 0..bonds {
            diag += j * z(s, b) * z(s, (b + 1) % n);
        }
        for i in 0..n {
            diag += hz * z(s, i);
            h[(s ^ (1 << (n - 1 - i)), s)] += c(hx, 0.0);
        }
        h[(s, s)] += c(diag, 0.0);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    IsingChain(IsingParams),
    RandomHermitian { dim: usize, seed: u64 },
    Custom,
}

/// Hamiltonian with an optional split into contiguous blocks, each with its
/// local Hamiltonian `H_i`. Inter-block couplings belong to no block.
#[derive(Debug, Clone)]
pub struct HamiltonianModel {
    hamiltonian: Observable,
    kind: ModelKind,
    blocks: Option<Vec<Observable>>,
    spectrum: OnceLock<Eigh>,
}

impl HamiltonianModel {
    pub fn ising_chain(params: IsingParams) -> Self {
        let h = ising_hamiltonian(params.sites, params.j, params.hx, params.hz, params.periodic);
        Self::trusted(h, ModelKind::IsingChain(params), None)
    }

    /// Ising chain split into consecutive blocks of `block_sizes` sites.
    pub fn ising_chain_blocks(params: IsingParams, block_sizes: &[usize]) -> Result<Self> {
        if block_sizes.iter().sum::<usize>() != params.sites || block_sizes.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "block sizes {block_sizes:?} do not cover {} sites",
                params.sites
            )));
        }
        let whole = block_sizes.len() == 1;
        let blocks = block_sizes
            .iter()
            .map(|&n| Observable::from_trusted(ising_hamiltonian(n, params.j, params.hx, params.hz, whole && params.periodic)))
            .collect();
        let mut model = Self::ising_chain(params);
        model.blocks = Some(blocks);
        Ok(model)
    }

    /// GUE matrix `(G + G†)/2` with a seeded complex Ginibre `G`.
    pub fn random_hermitian(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = linalg::ginibre(dim, dim, &mut rng);
        let h = (&g + g.adjoint()).scale(0.5);
        Self::trusted(h, ModelKind::RandomHermitian { dim, seed }, None)
    }

    pub fn custom(hamiltonian: Observable, blocks: Option<Vec<Observable>>) -> Result<Self> {
        if let Some(bs) = &blocks {
            let product: usize = bs.iter().map(Observable::dim).product();
            if product != hamiltonian.dim() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), found: product });
            }
        }
        Ok(Self { hamiltonian, kind: ModelKind::Custom, blocks, spectrum: OnceLock::new() })
    }

    fn trusted(h: CMat, kind: ModelKind, blocks: Option<Vec<Observable>>) -> Self {
        Self { hamiltonian: Observable::from_trusted(h), kind, blocks, spectrum: OnceLock::new() }
    }

    pub fn hamiltonian(&self) -> &Observable {
        &self.hamiltonian
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn blocks(&self) -> Option<&[Observable]> {
        self.blocks.as_deref()
    }

    pub fn block_dims(&self) -> Option<Vec<usize>> {
        self.blocks.as_ref().map(|b| b.iter().map(Observable::dim).collect())
    }

    /// Eigendecomposition, computed once.
    pub fn spectrum(&self) -> &Eigh {
        self.spectrum.get_or_init(|| linalg::eigh(self.hamiltonian.matrix()))
    }

    fn structure(&self) -> Option<Vec<usize>> {
        self.block_dims()
    }
}

/// How eigenvalues are grouped into energy macrostates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyBinning {
    /// One projector per eigenspace; gaps up to `rel_tol × range` count as degenerate.
    Degeneracy {
        #[serde(default = "default_degeneracy")]
        rel_tol: f64,
    },
    /// Windows `[E_0 + kΔE, E_0 + (k+1)ΔE)` anchored at the ground energy.
    Bins { width: f64 },
}

fn default_degeneracy() -> f64 {
    1e-10
}

impl Default for EnergyBinning {
    fn default() -> Self {
        EnergyBinning::Degeneracy { rel_tol: default_degeneracy() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyCoarseGraining {
    pub coarse_graining: CoarseGraining,
    pub binning: EnergyBinning,
}

/// Energy coarse-graining of a Hamiltonian; labels are the mean energy of
/// each eigenspace or the bin midpoint, strictly increasing.
pub fn energy_coarse_graining(h: &Observable, binning: EnergyBinning) -> Result<EnergyCoarseGraining> {
    energy_cg_from_spectrum(&linalg::eigh(h.matrix()), h, binning)
}

fn energy_cg_from_spectrum(eig: &Eigh, h: &Observable, binning: EnergyBinning) -> Result<EnergyCoarseGraining> {
    let coarse_graining = match binning {
        EnergyBinning::Degeneracy { rel_tol } => {
            let groups = crate::coarse::group_spectrum(&eig.values, rel_tol);
            let labels = groups.iter().map(|g| g.iter().map(|&k| eig.values[k]).sum::<f64>() / g.len() as f64).collect();
            let bases = groups.iter().map(|g| linalg::select_columns(&eig.vectors, g)).collect();
            CoarseGraining::from_bases(bases, Some(labels), h.dim())
        }
        EnergyBinning::Bins { width } => {
            if !(width > 0.0) || !width.is_finite() {
                return Err(Error::NonPositiveBinWidth(width));
            }
            let e0 = eig.values[0];
            let range = eig.values[eig.values.len() - 1] - e0;
            let nbins = ((range / width).ceil() as usize).max(1);
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); nbins];
            for (k, &e) in eig.values.iter().enumerate() {
                let b = (((e - e0) / width).floor() as usize).min(nbins - 1);
                members[b].push(k);
            }
            let mut bases = Vec::new();
            let mut labels = Vec::new();
            for (b, m) in members.iter().enumerate() {
                if !m.is_empty() {
                    bases.push(linalg::select_columns(&eig.vectors, m));
                    labels.push(e0 + (b as f64 + 0.5) * width);
                }
            }
            CoarseGraining::from_bases(bases, Some(labels), h.dim())
        }
    };
    Ok(EnergyCoarseGraining { coarse_graining, binning })
}

/// `C_H` of a model, reusing its cached spectrum.
pub fn model_energy_coarse_graining(model: &HamiltonianModel, binning: EnergyBinning) -> Result<EnergyCoarseGraining> {
    energy_cg_from_spectrum(model.spectrum(), model.hamiltonian(), binning)
}

fn from_energy_weights(model: &HamiltonianModel, weights: &[f64]) -> DensityMatrix {
    let v = &model.spectrum().vectors;
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |r, k| v[(r, k)] * weights[k]);
    let m = linalg::hermitian_part(&linalg::matmul(&scaled, &v.adjoint()));
    DensityMatrix::from_trusted(m, model.structure())
}

/// `e^{-βH}/Z`.
pub fn canonical_state(model: &HamiltonianModel, beta: f64) -> Result<DensityMatrix> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    let e = &model.spectrum().values;
    let e0 = e[0];
    let mut w: Vec<f64> = e.iter().map(|&x| (-beta * (x - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    Ok(from_energy_weights(model, &w))
}

/// Uniform mixture of the eigenstates with energy in `[lo, hi]`.
pub fn microcanonical_state(model: &HamiltonianModel, lo: f64, hi: f64) -> Result<DensityMatrix> {
    let e = &model.spectrum().values;
    let inside: Vec<bool> = e.iter().map(|&x| x >= lo && x <= hi).collect();
    let count = inside.iter().filter(|&&b| b).count();
    if count == 0 {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let w: Vec<f64> = inside.iter().map(|&b| if b { 1.0 / count as f64 } else { 0.0 }).collect();
    Ok(from_energy_weights(model, &w))
}

/// State in the energy eigenbasis, evolved by phases `e^{-i(E_a - E_b)t}`.
#[derive(Debug, Clone)]
pub struct Evolver<'a> {
    model: &'a HamiltonianModel,
    rho_energy: CMat,
    subsystem_dims: Option<Vec<usize>>,
}

impl<'a> Evolver<'a> {
    pub fn new(model: &'a HamiltonianModel, rho0: &DensityMatrix) -> Result<Self> {
        if rho0.dim() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: rho0.dim() });
        }
        let rho_energy = linalg::conjugate_by(rho0.matrix(), &model.spectrum().vectors);
        Ok(Self { model, rho_energy, subsystem_dims: rho0.subsystem_dims().map(<[usize]>::to_vec) })
    }

    /// `ρ(t)` expressed in the energy eigenbasis.
    pub fn energy_frame(&self, t: f64) -> CMat {
        let e = &self.model.spectrum().values;
        let phases: Vec<_> = e.iter().map(|&x| c((x * t).cos(), -(x * t).sin())).collect();
        CMat::from_fn(e.len(), e.len(), |a, b| self.rho_energy[(a, b)] * phases[a] * phases[b].conj())
    }

    pub fn at(&self, t: f64) -> DensityMatrix {
        let v = &self.model.spectrum().vectors;
        let m = linalg::matmul(v, &linalg::matmul(&self.energy_frame(t), &v.adjoint()));
        DensityMatrix::from_trusted(linalg::hermitian_part(&m), self.subsystem_dims.clone())
    }
}

/// `e^{-iHt} ρ₀ e^{iHt}`.
pub fn time_evolve(rho0: &DensityMatrix, model: &HamiltonianModel, t: f64) -> Result<DensityMatrix> {
    Ok(Evolver::new(model, rho0)?.at(t))
}

/// `⊗_i C_{H_i}` over the model's blocks.
pub fn foe_coarse_graining(model: &HamiltonianModel, binning: EnergyBinning) -> Result<LocalCoarseGraining> {
    let blocks = model.blocks().ok_or_else(|| Error::MissingBlocks("model defines no blocks".into()))?;
    let factors = blocks
        .iter()
        .map(|h| energy_coarse_graining(h, binning).map(|e| e.coarse_graining))
        .collect::<Result<Vec<_>>>()?;
    let dims: Vec<usize> = blocks.iter().map(Observable::dim).collect();
    tensor_local(factors, &dims)
}

/// Factorized observational entropy `S_{C_{H_1} ⊗ … ⊗ C_{H_m}}(ρ)`.
pub fn foe(rho: &DensityMatrix, model: &HamiltonianModel, binning: EnergyBinning) -> Result<EntropyReport> {
    local_entropy(rho, &foe_coarse_graining(model, binning)?)
}

/// `S_{C_S ⊗ C_E}(ρ)` with `C_E` the energy coarse-graining of the bath.
pub fn system_bath_entropy(
    rho: &DensityMatrix,
    system: &CoarseGraining,
    bath: &HamiltonianModel,
    binning: EnergyBinning,
) -> Result<EntropyReport> {
    if rho.subsystem_dims().is_none() {
        return Err(Error::MissingTensorStructure("system-bath entropy needs subsystem_dims".into()));
    }
    if system.dim() * bath.dim() != rho.dim() {
        return Err(Error::MissingTensorStructure(format!(
            "system {} x bath {} does not match state dimension {}",
            system.dim(),
            bath.dim(),
            rho.dim()
        )));
    }
    let c_e = model_energy_coarse_graining(bath, binning)?.coarse_graining;
    let local = tensor_local(vec![system.clone(), c_e], &[system.dim(), bath.dim()])?;
    local_entropy(rho, &local)
}

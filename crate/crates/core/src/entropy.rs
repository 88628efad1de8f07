//! Entropy functionals on quantum states. All values are in nats.

use serde::{Deserialize, Serialize};

use crate::coarse::{
    self, check_local_dims, is_coarser, probabilities, CoarseGraining, LocalCoarseGraining, MultiCoarseGraining,
};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::state::{reduce, DensityMatrix};
use crate::tolerances::Tolerances;

/// Probabilities below this are treated as exactly zero (`0 ln 0 = 0`).
pub const PROBABILITY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub total: f64,
    /// `-∑ p ln p`.
    pub shannon_term: f64,
    /// `∑ p ln V`, the mean Boltzmann entropy.
    pub boltzmann_term: f64,
    pub probabilities: Vec<f64>,
    pub volumes: Vec<f64>,
    /// Outcome tuples for multi-step and local coarse-grainings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<Vec<usize>>>,
    #[serde(default = "default_unit")]
    pub unit: String,
}

fn default_unit() -> String {
    "nats".into()
}

impl EntropyReport {
    /// `S = -∑ p_i ln(p_i / V_i)`, skipping outcomes with `p_i < floor`.
    pub fn from_distribution(probabilities: Vec<f64>, volumes: Vec<f64>, floor: f64) -> Self {
        debug_assert_eq!(probabilities.len(), volumes.len());
        let mut total = 0.0;
        let mut shannon = 0.0;
        let mut boltzmann = 0.0;
        for (&p, &v) in probabilities.iter().zip(&volumes) {
            if p < floor {
                continue;
            }
            total -= p * (p / v).ln();
            shannon -= p * p.ln();
            boltzmann += p * v.ln();
        }
        Self {
            total,
            shannon_term: shannon,
            boltzmann_term: boltzmann,
            probabilities,
            volumes,
            outcomes: None,
            unit: default_unit(),
        }
    }

    fn with_outcomes(mut self, outcomes: Vec<Vec<usize>>) -> Self {
        self.outcomes = Some(outcomes);
        self
    }

    /// Same report with entropies expressed in bits.
    pub fn in_bits(&self) -> Self {
        let k = std::f64::consts::LN_2;
        Self {
            total: self.total / k,
            shannon_term: self.shannon_term / k,
            boltzmann_term: self.boltzmann_term / k,
            unit: "bits".into(),
            ..self.clone()
        }
    }
}

/// Entropy of a bare distribution with unit volumes, in nats.
pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x >= PROBABILITY_FLOOR).map(|&x| -x * x.ln()).sum()
}

/// `S_C(ρ) = -∑ p_i ln(p_i/V_i)` with `p_i = tr(P_i ρ)`, `V_i = tr P_i`.
pub fn observational_entropy(rho: &DensityMatrix, cg: &CoarseGraining) -> Result<EntropyReport> {
    let p = probabilities(rho, cg)?;
    Ok(EntropyReport::from_distribution(p, cg.volumes(), PROBABILITY_FLOOR))
}

/// `-tr ρ ln ρ`.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    // Rounding in the eigensolver can leave -1e-16 for pure states.
    shannon(&rho.eigenvalues()).max(0.0)
}

/// Observational entropy of a local coarse-graining, evaluated in the
/// product basis without expanding the tensor products.
pub fn local_entropy(rho: &DensityMatrix, local: &LocalCoarseGraining) -> Result<EntropyReport> {
    let p = coarse::local_probabilities(rho, local)?;
    Ok(EntropyReport::from_distribution(p, local.volumes(), PROBABILITY_FLOOR).with_outcomes(local.outcome_tuples()))
}

/// Observational entropy of a sequence of measurements.
///
/// For `(C¹, C²)` the outcome `(i, j)` has `p_ij = tr(P²_j P¹_i ρ P¹_i P²_j)`
/// and `V_ij = tr(P²_j P¹_i P¹_i P²_j)`; longer sequences nest the same way,
/// first element applied first. Branches whose probability falls below the
/// floor are pruned, so zero-probability outcomes are not listed.
pub fn multi_cg_entropy(rho: &DensityMatrix, seq: &MultiCoarseGraining) -> Result<EntropyReport> {
    if rho.dim() != seq.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: seq.dim() });
    }
    let mut leaves = Vec::new();
    let dim = rho.dim();
    expand_branch(rho.matrix(), seq.sequence(), &CMat::identity(dim, dim), &mut Vec::new(), &mut leaves);
    let mut p = Vec::with_capacity(leaves.len());
    let mut v = Vec::with_capacity(leaves.len());
    let mut outcomes = Vec::with_capacity(leaves.len());
    for (tuple, pi, vi) in leaves {
        outcomes.push(tuple);
        p.push(pi);
        v.push(vi);
    }
    Ok(EntropyReport::from_distribution(p, v, PROBABILITY_FLOOR).with_outcomes(outcomes))
}

fn expand_branch(
    rho: &CMat,
    rest: &[CoarseGraining],
    chain: &CMat,
    prefix: &mut Vec<usize>,
    leaves: &mut Vec<(Vec<usize>, f64, f64)>,
) {
    let Some((cg, rest)) = rest.split_first() else {
        let p = linalg::trace(&linalg::matmul(chain, &linalg::matmul(rho, &chain.adjoint()))).re.max(0.0);
        let v = chain.norm_squared();
        leaves.push((prefix.clone(), p, v));
        return;
    };
    for (i, proj) in cg.projectors().iter().enumerate() {
        let next = linalg::matmul(proj.matrix(), chain);
        let p = linalg::trace(&linalg::matmul(&next, &linalg::matmul(rho, &next.adjoint()))).re;
        if p < PROBABILITY_FLOOR {
            continue;
        }
        prefix.push(i);
        expand_branch(rho, rest, &next, prefix, leaves);
        prefix.pop();
    }
}

/// Marginal entropies and mutual information of a local measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDecomposition {
    /// `S_{C_X}(ρ_X)` per subsystem.
    pub marginal_entropies: Vec<f64>,
    pub mutual_information: f64,
    /// `p_{lm…n}`, row-major over `shape`.
    pub joint_probabilities: Vec<f64>,
    pub shape: Vec<usize>,
    pub marginal_probabilities: Vec<Vec<f64>>,
    /// `S_{C_A⊗…⊗C_C}(ρ)` computed directly.
    pub total: f64,
}

impl LocalDecomposition {
    /// `∑_X S_{C_X}(ρ_X) - I`.
    pub fn reconstructed_total(&self) -> f64 {
        self.marginal_entropies.iter().sum::<f64>() - self.mutual_information
    }
}

/// Splits `S_{C_A⊗…⊗C_C}(ρ)` into marginal entropies minus mutual information.
pub fn local_decomposition(rho: &DensityMatrix, local: &LocalCoarseGraining) -> Result<LocalDecomposition> {
    rho.require_subsystems()?;
    check_local_dims(rho, local)?;
    let joint = coarse::local_probabilities(rho, local)?;
    let shape = local.shape();
    let tuples = local.outcome_tuples();

    let mut marginals: Vec<Vec<f64>> = shape.iter().map(|&n| vec![0.0; n]).collect();
    for (t, &p) in tuples.iter().zip(&joint) {
        for (x, &i) in t.iter().enumerate() {
            marginals[x][i] += p;
        }
    }

    let mut marginal_entropies = Vec::with_capacity(shape.len());
    for (x, factor) in local.factors().iter().enumerate() {
        let reduced = reduce(rho, &[x])?;
        let direct = probabilities(&reduced, factor)?;
        let drift = direct.iter().zip(&marginals[x]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        debug_assert!(drift < 1e-9, "marginal of subsystem {x} disagrees with reduced state by {drift}");
        marginal_entropies.push(EntropyReport::from_distribution(direct, factor.volumes(), PROBABILITY_FLOOR).total);
    }

    let mut mutual_information = 0.0;
    for (t, &p) in tuples.iter().zip(&joint) {
        if p < PROBABILITY_FLOOR {
            continue;
        }
        let product: f64 = t.iter().enumerate().map(|(x, &i)| marginals[x][i]).product();
        mutual_information += p * (p / product).ln();
    }

    let total = EntropyReport::from_distribution(joint.clone(), local.volumes(), PROBABILITY_FLOOR).total;
    Ok(LocalDecomposition {
        marginal_entropies,
        mutual_information,
        joint_probabilities: joint,
        shape,
        marginal_probabilities: marginals,
        total,
    })
}

pub enum BoundTarget<'a> {
    Single(&'a CoarseGraining),
    Sequence(&'a MultiCoarseGraining),
}

/// Position of `S_C(ρ)` inside `ln dim ≥ S_C(ρ) ≥ S_VN(ρ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundMargin {
    /// `S_C - S_VN`.
    pub lower_slack: f64,
    /// `ln dim - S_C`.
    pub upper_slack: f64,
    /// Lower bound saturated (within the equality tolerance).
    pub lower_equality: bool,
    /// `C_ρ ≥ C`; only defined for a single coarse-graining.
    pub finer_than_state: Option<bool>,
    /// Whether `lower_equality` agrees with `finer_than_state`.
    pub consistent: Option<bool>,
}

/// Tolerance for calling the lower bound saturated.
pub const EQUALITY_TOL: f64 = 1e-8;

pub fn bound_margin(rho: &DensityMatrix, target: BoundTarget<'_>, tol: &Tolerances) -> Result<BoundMargin> {
    let s = match target {
        BoundTarget::Single(cg) => observational_entropy(rho, cg)?.total,
        BoundTarget::Sequence(seq) => multi_cg_entropy(rho, seq)?.total,
    };
    let vn = vn_entropy(rho);
    let lower_slack = s - vn;
    let upper_slack = (rho.dim() as f64).ln() - s;
    let lower_equality = lower_slack.abs() <= EQUALITY_TOL;
    let finer_than_state = match target {
        BoundTarget::Single(cg) => Some(is_coarser(&coarse::state_coarse_graining(rho, tol), cg, tol)?),
        BoundTarget::Sequence(_) => None,
    };
    Ok(BoundMargin {
        lower_slack,
        upper_slack,
        lower_equality,
        finer_than_state,
        consistent: finer_than_state.map(|f| f == lower_equality),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::{joint, tensor_local};
    use crate::linalg::{c, CVec};
    use nalgebra::dmatrix;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn x_basis() -> CoarseGraining {
        let s = FRAC_1_SQRT_2;
        CoarseGraining::from_unitary(&dmatrix![c(s, 0.0), c(s, 0.0); c(s, 0.0), c(-s, 0.0)])
    }

    fn bell() -> DensityMatrix {
        let s = FRAC_1_SQRT_2;
        let psi = CVec::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        DensityMatrix::pure(&psi).unwrap().with_subsystems(vec![2, 2]).unwrap()
    }

    // -(0.75 ln 0.75 + 0.25 ln 0.25)
    const S_3_1: f64 = 0.562_335_144_618_808_7;

    #[test]
    fn observational_entropy_examples() {
        let z = CoarseGraining::computational(2);
        let r = observational_entropy(&DensityMatrix::maximally_mixed(2), &z).unwrap();
        assert!((r.total - LN_2).abs() < 1e-15);

        let rho = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let r = observational_entropy(&rho, &CoarseGraining::trivial(2)).unwrap();
        assert!((r.total - LN_2).abs() < 1e-15);
        assert!((r.shannon_term).abs() < 1e-15 && (r.boltzmann_term - LN_2).abs() < 1e-15);

        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let r = observational_entropy(&rho, &x_basis()).unwrap();
        assert!((r.total - LN_2).abs() < 1e-12);
        assert!((vn_entropy(&rho) - S_3_1).abs() < 1e-12);
        assert!(r.total > vn_entropy(&rho) + 0.1);
    }

    #[test]
    fn vn_entropy_examples() {
        let psi = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!(vn_entropy(&DensityMatrix::pure(&psi).unwrap()).abs() < 1e-12);
        assert!((vn_entropy(&DensityMatrix::maximally_mixed(2)) - LN_2).abs() < 1e-14);
        assert!((vn_entropy(&DensityMatrix::diagonal(&[0.75, 0.25]).unwrap()) - S_3_1).abs() < 1e-14);
    }

    #[test]
    fn report_splits_into_shannon_and_boltzmann() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let cg = CoarseGraining::from_blocks(3, &[vec![0, 1], vec![2]]).unwrap();
        let r = observational_entropy(&rho, &cg).unwrap();
        let expected = -(0.8f64 * (0.8f64 / 2.0).ln() + 0.2 * 0.2f64.ln());
        assert!((r.total - expected).abs() < 1e-14);
        assert!((r.total - r.shannon_term - r.boltzmann_term).abs() < 1e-14);
        let bits = r.in_bits();
        assert!((bits.total * LN_2 - r.total).abs() < 1e-14);
    }

    #[test]
    fn multi_cg_examples() {
        let z = CoarseGraining::computational(2);
        let seq = MultiCoarseGraining::new(vec![z.clone(), x_basis()]).unwrap();

        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let r = multi_cg_entropy(&zero, &seq).unwrap();
        assert!(r.total.abs() < 1e-14);
        assert_eq!(r.outcomes.as_ref().unwrap(), &vec![vec![0, 0], vec![0, 1]]);
        for (&p, &v) in r.probabilities.iter().zip(&r.volumes) {
            assert!((p - 0.5).abs() < 1e-14 && (v - 0.5).abs() < 1e-14);
        }

        let r = multi_cg_entropy(&DensityMatrix::maximally_mixed(2), &seq).unwrap();
        assert!((r.total - LN_2).abs() < 1e-14);
        assert_eq!(r.probabilities.len(), 4);
        assert!(r.probabilities.iter().all(|&p| (p - 0.25).abs() < 1e-14));
        assert!(r.volumes.iter().all(|&v| (v - 0.5).abs() < 1e-14));
    }

    #[test]
    fn commuting_multi_cg_equals_joint() {
        let a = CoarseGraining::from_blocks(4, &[vec![0, 1], vec![2, 3]]).unwrap();
        let b = CoarseGraining::from_blocks(4, &[vec![0, 2], vec![1, 3]]).unwrap();
        let rho = DensityMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let seq = MultiCoarseGraining::new(vec![a.clone(), b.clone()]).unwrap();
        let j = joint(&a, &b, &Tolerances::default()).unwrap();
        let s1 = multi_cg_entropy(&rho, &seq).unwrap().total;
        let s2 = observational_entropy(&rho, &j).unwrap().total;
        assert!((s1 - s2).abs() < 1e-12);
    }

    #[test]
    fn single_element_sequence_reduces_to_plain_entropy() {
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let seq = MultiCoarseGraining::new(vec![x_basis()]).unwrap();
        let a = multi_cg_entropy(&rho, &seq).unwrap().total;
        let b = observational_entropy(&rho, &x_basis()).unwrap().total;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn local_decomposition_bell() {
        let z = CoarseGraining::computational(2);
        let l = tensor_local(vec![z.clone(), z], &[2, 2]).unwrap();
        let d = local_decomposition(&bell(), &l).unwrap();
        assert!((d.marginal_entropies[0] - LN_2).abs() < 1e-14);
        assert!((d.marginal_entropies[1] - LN_2).abs() < 1e-14);
        assert!((d.mutual_information - LN_2).abs() < 1e-14);
        assert!((d.total - LN_2).abs() < 1e-14);
        let p = &d.joint_probabilities;
        assert!((p[0] - 0.5).abs() < 1e-15 && p[1].abs() < 1e-15 && p[2].abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn local_decomposition_uniform_and_product() {
        let z = CoarseGraining::computational(2);
        let l = tensor_local(vec![z.clone(), z.clone()], &[2, 2]).unwrap();
        let rho = DensityMatrix::maximally_mixed(4).with_subsystems(vec![2, 2]).unwrap();
        let d = local_decomposition(&rho, &l).unwrap();
        assert!(d.mutual_information.abs() < 1e-15);
        assert!((d.total - 4f64.ln()).abs() < 1e-14);

        let a = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap().conjugated(&x_basis_unitary()).unwrap();
        let b = DensityMatrix::diagonal(&[0.2, 0.8]).unwrap();
        let rho = DensityMatrix::tensor(&[a, b]);
        let l = tensor_local(vec![x_basis(), z], &[2, 2]).unwrap();
        let d = local_decomposition(&rho, &l).unwrap();
        assert!(d.mutual_information.abs() < 1e-14);
        assert!((d.reconstructed_total() - d.total).abs() < 1e-14);
        let expanded = observational_entropy(&rho, &l.expand()).unwrap().total;
        assert!((expanded - d.total).abs() < 1e-13);
    }

    fn x_basis_unitary() -> CMat {
        let s = FRAC_1_SQRT_2;
        dmatrix![c(s, 0.0), c(s, 0.0); c(s, 0.0), c(-s, 0.0)]
    }

    #[test]
    fn local_decomposition_needs_tensor_structure() {
        let z = CoarseGraining::computational(2);
        let l = tensor_local(vec![z.clone(), z], &[2, 2]).unwrap();
        let err = local_decomposition(&DensityMatrix::maximally_mixed(4), &l).unwrap_err();
        assert!(matches!(err, Error::MissingTensorStructure(_)));
    }

    #[test]
    fn bound_margin_examples() {
        let tol = Tolerances::default();
        let rho = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let c_rho = coarse::state_coarse_graining(&rho, &tol);
        let m = bound_margin(&rho, BoundTarget::Single(&c_rho), &tol).unwrap();
        assert!(m.lower_slack.abs() < 1e-12 && m.lower_equality);
        assert_eq!(m.finer_than_state, Some(true));

        let pure = DensityMatrix::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        let m = bound_margin(&pure, BoundTarget::Single(&CoarseGraining::trivial(3)), &tol).unwrap();
        assert!((m.lower_slack - 3f64.ln()).abs() < 1e-12 && m.upper_slack.abs() < 1e-14);

        let m = bound_margin(&rho, BoundTarget::Single(&x_basis()), &tol).unwrap();
        assert!((m.lower_slack - (LN_2 - S_3_1)).abs() < 1e-12);
        assert!((m.lower_slack - 0.130812).abs() < 1e-6);
        assert!(!m.lower_equality);
        assert_eq!(m.consistent, Some(true));
    }
}

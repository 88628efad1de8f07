//! Seeded random instances for property checks and benchmarks.

use rand::Rng;

use crate::classical::{ClassicalDensity, PhasePartition};
use crate::coarse::{tensor_local, CoarseGraining, LocalCoarseGraining};
use crate::linalg;
use crate::state::DensityMatrix;

/// Random set partition of `0..n` into at most `max_blocks` nonempty blocks.
pub fn random_partition<R: Rng + ?Sized>(n: usize, max_blocks: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let k = rng.random_range(1..=max_blocks.clamp(1, n.max(1)));
    let mut blocks = vec![Vec::new(); k];
    for i in 0..n {
        blocks[rng.random_range(0..k)].push(i);
    }
    blocks.retain(|b| !b.is_empty());
    blocks
}

/// Mixed state of random rank (Hilbert-Schmidt measure for that rank).
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let rank = rng.random_range(1..=dim);
    DensityMatrix::new(linalg::random_density_matrix(dim, rank, rng)).expect("valid by construction")
}

/// Blocks of a Haar-random basis.
pub fn random_coarse_graining<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CoarseGraining {
    let u = linalg::haar_unitary(dim, rng);
    let fine = CoarseGraining::from_unitary(&u);
    let groups = random_partition(dim, dim, rng);
    fine.merge(&groups).expect("valid grouping")
}

/// `(coarse, fine)` with `coarse` obtained by merging projectors of `fine`.
pub fn random_refinement_pair<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> (CoarseGraining, CoarseGraining) {
    let fine = random_coarse_graining(dim, rng);
    let groups = random_partition(fine.len(), fine.len(), rng);
    (fine.merge(&groups).expect("valid grouping"), fine)
}

pub fn random_local_coarse_graining<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> LocalCoarseGraining {
    let factors = dims.iter().map(|&d| random_coarse_graining(d, rng)).collect();
    tensor_local(factors, dims).expect("dims match")
}

/// Normalized cell masses; roughly a third of the cells are empty.
pub fn random_classical_density<R: Rng + ?Sized>(cells: usize, rng: &mut R) -> ClassicalDensity {
    loop {
        let raw: Vec<f64> =
            (0..cells).map(|_| if rng.random_bool(0.33) { 0.0 } else { rng.random::<f64>() }).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            let w = raw.iter().map(|x| x / total).collect();
            return ClassicalDensity::new(w).expect("normalized by construction");
        }
    }
}

pub fn random_phase_partition<R: Rng + ?Sized>(cells: usize, rng: &mut R) -> PhasePartition {
    let k = rng.random_range(1..=cells);
    let raw: Vec<usize> = (0..cells).map(|_| rng.random_range(0..k)).collect();
    PhasePartition::new(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn refinement_pairs_are_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let (coarse, fine) = random_refinement_pair(5, &mut rng);
            assert!(crate::coarse::is_coarser(&coarse, &fine, &Default::default()).unwrap());
        }
    }
}

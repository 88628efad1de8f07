use obsent_core::classical::{
    classical_obs_entropy, evolve_map, gibbs_entropy, AreaPreservingMap, PhasePartition, PhaseSpaceGrid, Transport,
};
use obsent_core::coarse::{joint, local_probabilities, probabilities, spectral_coarse_graining, state_coarse_graining};
use obsent_core::entropy::{local_decomposition, local_entropy, observational_entropy, vn_entropy};
use obsent_core::linalg::{self, max_abs};
use obsent_core::povm::{povm_entropy, random_kraus};
use obsent_core::random::*;
use obsent_core::thermo::{time_evolve, HamiltonianModel};
use obsent_core::{is_coarser, Observable, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn probabilities_form_a_distribution(dim in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let cg = random_coarse_graining(dim, &mut r);
        let p = probabilities(&rho, &cg).unwrap();
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert_eq!(cg.volumes().iter().sum::<f64>(), dim as f64);
    }

    #[test]
    fn entropy_lies_between_von_neumann_and_ln_dim(dim in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let cg = random_coarse_graining(dim, &mut r);
        let s = observational_entropy(&rho, &cg).unwrap().total;
        prop_assert!(s <= (dim as f64).ln() + 1e-9);
        prop_assert!(s >= vn_entropy(&rho) - 1e-9);
    }

    #[test]
    fn refining_never_increases_entropy(dim in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let (coarse, fine) = random_refinement_pair(dim, &mut r);
        prop_assert!(is_coarser(&coarse, &fine, &Tolerances::default()).unwrap());
        let sc = observational_entropy(&rho, &coarse).unwrap().total;
        let sf = observational_entropy(&rho, &fine).unwrap().total;
        prop_assert!(sc >= sf - 1e-9);
    }

    #[test]
    fn joint_is_finer_than_both(dim in 2usize..=7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let fine = random_coarse_graining(dim, &mut r);
        let a = fine.merge(&random_partition(fine.len(), fine.len(), &mut r)).unwrap();
        let b = fine.merge(&random_partition(fine.len(), fine.len(), &mut r)).unwrap();
        let tol = Tolerances::default();
        let ab = joint(&a, &b, &tol).unwrap();
        prop_assert!(is_coarser(&a, &ab, &tol).unwrap());
        prop_assert!(is_coarser(&b, &ab, &tol).unwrap());
        let s = observational_entropy(&rho, &ab).unwrap().total;
        prop_assert!(s <= observational_entropy(&rho, &a).unwrap().total + 1e-9);
        prop_assert!(s <= observational_entropy(&rho, &b).unwrap().total + 1e-9);
    }

    #[test]
    fn spectral_coarse_graining_commutes_and_attains_minimum(dim in 2usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let q = Observable::from(&rho);
        let cq = spectral_coarse_graining(&q, 1e-10);
        for p in cq.projectors() {
            prop_assert!(max_abs(&linalg::commutator(p.matrix(), q.matrix())) < 1e-9);
        }
        let s = observational_entropy(&rho, &state_coarse_graining(&rho, &Tolerances::default())).unwrap().total;
        prop_assert!((s - vn_entropy(&rho)).abs() < 1e-8);
    }

    #[test]
    fn local_volumes_multiply_and_decomposition_holds(
        dims in prop::collection::vec(2usize..=3, 2..=3),
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let dim: usize = dims.iter().product();
        let rho = random_state(dim, &mut r).with_subsystems(dims.clone()).unwrap();
        let local = random_local_coarse_graining(&dims, &mut r);
        let expanded = local.expand();
        let vol = local.volumes();
        prop_assert_eq!(&vol, &expanded.volumes());
        let p = local_probabilities(&rho, &local).unwrap();
        let q = probabilities(&rho, &expanded).unwrap();
        prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-10));
        let d = local_decomposition(&rho, &local).unwrap();
        prop_assert!(d.mutual_information >= -1e-10);
        prop_assert!((d.total - d.reconstructed_total()).abs() < 1e-9);
        prop_assert!((d.total - local_entropy(&rho, &local).unwrap().total).abs() < 1e-10);
    }

    #[test]
    fn povm_entropy_is_bounded_below(dim in 2usize..=6, outcomes in 1usize..=5, seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(dim, &mut r);
        let k = random_kraus(dim, outcomes, &mut r);
        let s = povm_entropy(&rho, &k).unwrap().total;
        prop_assert!(s >= vn_entropy(&rho) - 1e-9);
    }

    #[test]
    fn classical_entropy_is_bounded(n in 2usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = PhaseSpaceGrid::unit_torus(n);
        let rho = random_classical_density(n * n, &mut r);
        let part = random_phase_partition(n * n, &mut r);
        let s = classical_obs_entropy(&rho, &part, &grid).unwrap().total;
        prop_assert!(s <= grid.total_volume().ln() + 1e-9);
        prop_assert!(s >= gibbs_entropy(&rho, &grid).unwrap() - 1e-9);
        let fine = classical_obs_entropy(&rho, &PhasePartition::fine_graining(n * n), &grid).unwrap().total;
        prop_assert_eq!(fine.to_bits(), gibbs_entropy(&rho, &grid).unwrap().to_bits());
    }

    #[test]
    fn maps_conserve_mass_and_the_uniform_density(k in 0.0f64..8.0, steps in 0usize..6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let grid = PhaseSpaceGrid::unit_torus(16);
        let rho = random_classical_density(256, &mut r);
        let uniform = obsent_core::classical::ClassicalDensity::uniform(256);
        for map in [AreaPreservingMap::Baker, AreaPreservingMap::Cat, AreaPreservingMap::Standard { k }] {
            for transport in [Transport::Auto, Transport::Supersampled { s: 4 }] {
                let out = evolve_map(&rho, &grid, map, steps, transport).unwrap();
                prop_assert!((out.total_mass() - 1.0).abs() < 1e-9);
                let u = evolve_map(&uniform, &grid, map, steps, transport).unwrap();
                prop_assert!(u.weights().iter().all(|&w| (w - 1.0 / 256.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn unitary_evolution_preserves_spectrum(dim in 2usize..=8, t in -20.0f64..20.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let model = HamiltonianModel::random_hermitian(dim, seed);
        let rho = random_state(dim, &mut r);
        let later = time_evolve(&rho, &model, t).unwrap();
        prop_assert!((vn_entropy(&later) - vn_entropy(&rho)).abs() < 1e-8);
        prop_assert!((linalg::trace(later.matrix()).re - 1.0).abs() < 1e-12);
    }
}

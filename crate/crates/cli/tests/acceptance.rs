//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines come out in order and unbuffered.

use std::f64::consts::LN_2;
use std::process::Command;
use std::time::{Duration, Instant};

use obsent_core::classical::{
    classical_obs_entropy, classical_sim, gibbs_entropy, local_infimum_exhaustive, AreaPreservingMap,
    ClassicalSimConfig, PhasePartition, PhaseSpaceGrid,
};
use obsent_core::coarse::{is_coarser, state_coarse_graining, CoarseGraining};
use obsent_core::entropy::{bound_margin, local_decomposition, local_entropy, observational_entropy, vn_entropy, BoundTarget};
use obsent_core::linalg::{eigh, haar_state};
use obsent_core::povm::{povm_entropy, qc_entropy_povm, random_kraus, PovmCoarseGraining, PovmQcOptions};
use obsent_core::quarrelation::{qc_entropy, QcOptions};
use obsent_core::random::*;
use obsent_core::thermo::{
    canonical_state, microcanonical_state, model_energy_coarse_graining, second_law_run, EnergyBinning,
    HamiltonianModel, IsingParams, SecondLawConfig,
};
use obsent_core::{reduce, DensityMatrix, Observable, Tolerances};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn spread(xs: &[f64]) -> f64 {
    xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min)
}

fn require(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, elapsed: Duration, r: Check) -> Check {
    let r = r?;
    require(elapsed <= limit, format!("{r}; runtime limit {}s", limit.as_secs()))
}

fn bound_suite() -> Check {
    let mut r = rng(1);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..1000 {
        let dim = 2 + i % 7;
        let rho = random_state(dim, &mut r);
        let cg = random_coarse_graining(dim, &mut r);
        let s = observational_entropy(&rho, &cg).map_err(|e| e.to_string())?.total;
        let (lo, hi) = (s - vn_entropy(&rho), (dim as f64).ln() - s);
        worst = worst.min(lo).min(hi);
        if lo < -1e-9 || hi < -1e-9 {
            violations += 1;
        }
    }
    require(violations == 0, format!("1000 pairs, {violations} violations, smallest slack {worst:.2e}"))
}

fn monotonicity_suite() -> Check {
    let mut r = rng(2);
    let tol = Tolerances::default();
    let (mut violations, mut not_refinements) = (0, 0);
    for i in 0..500 {
        let dim = 2 + i % 7;
        let rho = random_state(dim, &mut r);
        let (coarse, fine) = random_refinement_pair(dim, &mut r);
        if !is_coarser(&coarse, &fine, &tol).map_err(|e| e.to_string())? {
            not_refinements += 1;
        }
        let sc = observational_entropy(&rho, &coarse).map_err(|e| e.to_string())?.total;
        let sf = observational_entropy(&rho, &fine).map_err(|e| e.to_string())?.total;
        if sc < sf - 1e-9 {
            violations += 1;
        }
    }
    require(
        violations == 0 && not_refinements == 0,
        format!("500 pairs, {violations} violations, {not_refinements} pairs not recognised as refinements"),
    )
}

fn minimum_suite() -> Check {
    let mut r = rng(3);
    let tol = Tolerances::default();
    let mut worst: f64 = 0.0;
    let (mut mismatches, mut strict_cases) = (0, 0);
    for i in 0..200 {
        let dim = 2 + i % 7;
        let rho = random_state(dim, &mut r);
        let s = observational_entropy(&rho, &state_coarse_graining(&rho, &tol)).map_err(|e| e.to_string())?.total;
        worst = worst.max((s - vn_entropy(&rho)).abs());

        // An eigenbasis of rho refines C_rho: equality expected.
        let eigen = CoarseGraining::from_unitary(&eigh(rho.matrix()).vectors);
        let m = bound_margin(&rho, BoundTarget::Single(&eigen), &tol).map_err(|e| e.to_string())?;
        if m.finer_than_state != Some(true) || !m.lower_equality {
            mismatches += 1;
        }
        // A Haar-random coarse-graining does not: strict inequality expected.
        let other = random_coarse_graining(dim, &mut r);
        let m = bound_margin(&rho, BoundTarget::Single(&other), &tol).map_err(|e| e.to_string())?;
        if m.consistent != Some(true) {
            mismatches += 1;
        }
        if !m.lower_equality {
            strict_cases += 1;
        }
    }
    require(
        worst <= 1e-8 && mismatches == 0 && strict_cases > 150,
        format!(
            "200 states, max |S_Crho - S_VN| {worst:.2e}; {strict_cases} strict cases; {mismatches} iff mismatches"
        ),
    )
}

fn decomposition_suite() -> Check {
    let mut r = rng(4);
    let shapes: [&[usize]; 5] = [&[2, 2], &[2, 3], &[3, 3], &[2, 2, 2], &[2, 3, 2]];
    let (mut worst, mut min_info) = (0.0f64, f64::INFINITY);
    for i in 0..200 {
        let dims = shapes[i % shapes.len()].to_vec();
        let dim = dims.iter().product();
        let rho = random_state(dim, &mut r).with_subsystems(dims.clone()).map_err(|e| e.to_string())?;
        let local = random_local_coarse_graining(&dims, &mut r);
        let d = local_decomposition(&rho, &local).map_err(|e| e.to_string())?;
        let s = local_entropy(&rho, &local).map_err(|e| e.to_string())?.total;
        let rebuilt = d.marginal_entropies.iter().sum::<f64>() - d.mutual_information;
        worst = worst.max((s - rebuilt).abs());
        min_info = min_info.min(d.mutual_information);
    }
    require(
        worst <= 1e-9 && min_info >= -1e-10,
        format!("200 cases, max identity error {worst:.2e}, min mutual information {min_info:.2e}"),
    )
}

fn quarrelation_suite() -> Check {
    let mut r = rng(5);
    let splits = [(2, 2), (2, 3), (3, 3)];
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let (da, db) = splits[i % 3];
        let psi = haar_state(da * db, &mut r);
        let rho = DensityMatrix::pure(&psi).and_then(|p| p.with_subsystems(vec![da, db])).map_err(|e| e.to_string())?;
        let oracle = vn_entropy(&reduce(&rho, &[0]).map_err(|e| e.to_string())?);
        let qc = qc_entropy(&rho, &[da, db], &QcOptions { seed: i as u64, ..QcOptions::default() })
            .map_err(|e| e.to_string())?;
        worst = worst.max((qc.value - oracle).abs());
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = DensityMatrix::pure(&obsent_core::linalg::CVec::from_vec(vec![
        obsent_core::linalg::c(h, 0.0),
        obsent_core::linalg::c(0.0, 0.0),
        obsent_core::linalg::c(0.0, 0.0),
        obsent_core::linalg::c(h, 0.0),
    ]))
    .and_then(|b| b.with_subsystems(vec![2, 2]))
    .map_err(|e| e.to_string())?;
    let bell_qc = qc_entropy(&bell, &[2, 2], &QcOptions::default()).map_err(|e| e.to_string())?.value;
    let classical = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5])
        .and_then(|c| c.with_subsystems(vec![2, 2]))
        .map_err(|e| e.to_string())?;
    let classical_qc = qc_entropy(&classical, &[2, 2], &QcOptions::default()).map_err(|e| e.to_string())?.value;
    require(
        worst <= 1e-4 && (bell_qc - LN_2).abs() <= 1e-4 && classical_qc <= 1e-4,
        format!(
            "50 pure states max error {worst:.2e}; Bell {bell_qc:.8} (ln 2 {LN_2:.8}); classically correlated {classical_qc:.2e}"
        ),
    )
}

fn povm_suite() -> Check {
    let mut r = rng(6);
    let tol = Tolerances::default();
    let mut min_slack = f64::INFINITY;
    for i in 0..500 {
        let dim = 2 + i % 5;
        let outcomes = 1 + (i / 5) % 5;
        let rho = random_state(dim, &mut r);
        let k = random_kraus(dim, outcomes, &mut r);
        min_slack = min_slack.min(povm_entropy(&rho, &k).map_err(|e| e.to_string())?.total - vn_entropy(&rho));
    }
    let mut reduction_err: f64 = 0.0;
    for i in 0..100 {
        let dim = 2 + i % 7;
        let rho = random_state(dim, &mut r);
        let cg = random_coarse_graining(dim, &mut r);
        let kraus = cg.projectors().iter().map(|p| p.matrix().clone()).collect();
        let k = PovmCoarseGraining::with_tolerances(kraus, &tol).map_err(|e| e.to_string())?;
        let a = povm_entropy(&rho, &k).map_err(|e| e.to_string())?.total;
        let b = observational_entropy(&rho, &cg).map_err(|e| e.to_string())?.total;
        reduction_err = reduction_err.max((a - b).abs());
    }
    let mut max_excess = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let rho = random_state(4, &mut r).with_subsystems(vec![2, 2]).map_err(|e| e.to_string())?;
        let qopts = QcOptions { seed: i, ..QcOptions::default() };
        let q = qc_entropy(&rho, &[2, 2], &qopts).map_err(|e| e.to_string())?.value;
        let popts = PovmQcOptions { projective: qopts, seed: i, ..PovmQcOptions::default() };
        let p = qc_entropy_povm(&rho, &[2, 2], &popts).map_err(|e| e.to_string())?.value;
        max_excess = max_excess.max(p - q);
    }
    require(
        min_slack >= -1e-9 && reduction_err <= 1e-12 && max_excess <= 1e-6,
        format!(
            "500 Kraus sets min slack {min_slack:.2e}; projective reduction error {reduction_err:.2e}; \
             max povm - projective over 20 states {max_excess:.2e}"
        ),
    )
}

/// Midpoint below eigenvalue `k`, moved up until it sits in a real gap.
fn window_edge(e: &[f64], mut k: usize) -> f64 {
    while k < e.len() - 1 && e[k] - e[k - 1] < 1e-6 {
        k += 1;
    }
    0.5 * (e[k - 1] + e[k])
}

fn equilibrium_suite() -> Check {
    let model = HamiltonianModel::ising_chain(IsingParams::reference());
    let ch = model_energy_coarse_graining(&model, EnergyBinning::default()).map_err(|e| e.to_string())?.coarse_graining;
    let mut worst: f64 = 0.0;
    for beta in [0.0, 0.5, 1.0, 5.0] {
        let rho = canonical_state(&model, beta).map_err(|e| e.to_string())?;
        let s = observational_entropy(&rho, &ch).map_err(|e| e.to_string())?.total;
        worst = worst.max((s - vn_entropy(&rho)).abs());
    }
    let e = model.spectrum().values.as_slice().to_vec();
    let n = e.len();
    let windows = [
        (e[0] - 1.0, window_edge(&e, 1)),
        (window_edge(&e, 10), window_edge(&e, 40)),
        (window_edge(&e, 100), window_edge(&e, 200)),
        (e[0] - 1.0, e[n - 1] + 1.0),
    ];
    for (lo, hi) in windows {
        let rho = microcanonical_state(&model, lo, hi).map_err(|e| e.to_string())?;
        let s = observational_entropy(&rho, &ch).map_err(|e| e.to_string())?.total;
        worst = worst.max((s - vn_entropy(&rho)).abs());
    }

    let qubit = HamiltonianModel::custom(Observable::diagonal(&[0.0, 1.0]), None).map_err(|e| e.to_string())?;
    let rho = canonical_state(&qubit, 1.0).map_err(|e| e.to_string())?;
    let cg = model_energy_coarse_graining(&qubit, EnergyBinning::default()).map_err(|e| e.to_string())?.coarse_graining;
    let s = observational_entropy(&rho, &cg).map_err(|e| e.to_string())?.total;
    let p = 1.0 / (1.0 + (-1.0f64).exp());
    let oracle = -(p * p.ln() + (1.0 - p) * (1.0 - p).ln());
    require(
        worst <= 1e-9 && (s - oracle).abs() <= 1e-9 && (oracle - 0.582203).abs() < 5e-7,
        format!("max |S_CH - S_VN| {worst:.2e} over 4 canonical + 4 microcanonical states; qubit S_CH {s:.9}"),
    )
}

fn second_law_suite() -> Check {
    let ts = second_law_run(&SecondLawConfig::reference()).map_err(|e| e.to_string())?;
    let col = |name: &str| ts.column(name).ok_or(format!("missing column {name}"));
    let (foe, ch, vn) = (col("FOE")?, col("S_CH")?, col("S_VN")?);
    let n = foe.len();
    let tail = &foe[n - n / 4..];
    let avg = tail.iter().sum::<f64>() / tail.len() as f64;
    let ln_dim = 256f64.ln();
    require(
        n == 200 && spread(ch) <= 1e-8 && spread(vn) <= 1e-8 && avg >= foe[0] + 0.1,
        format!(
            "{n} points; S_CH spread {:.2e}; S_VN spread {:.2e}; FOE {:.4} -> final-quarter mean {avg:.4} \
             (ln 256 = {ln_dim:.4}, gap {:.1}%)",
            spread(ch),
            spread(vn),
            foe[0],
            100.0 * (ln_dim - avg) / ln_dim
        ),
    )
}

fn classical_suite() -> Check {
    let mut r = rng(9);
    let (mut violations, mut inexact) = (0, 0);
    for i in 0..200 {
        let n = 2 + i % 7;
        let grid = PhaseSpaceGrid::unit_torus(n);
        let rho = random_classical_density(n * n, &mut r);
        let part = random_phase_partition(n * n, &mut r);
        let s = classical_obs_entropy(&rho, &part, &grid).map_err(|e| e.to_string())?.total;
        let g = gibbs_entropy(&rho, &grid).map_err(|e| e.to_string())?;
        if s < g - 1e-9 || s > grid.total_volume().ln() + 1e-9 {
            violations += 1;
        }
        let fine = classical_obs_entropy(&rho, &PhasePartition::fine_graining(n * n), &grid)
            .map_err(|e| e.to_string())?
            .total;
        if fine.to_bits() != g.to_bits() {
            inexact += 1;
        }
    }

    let ts = classical_sim(&ClassicalSimConfig::new(AreaPreservingMap::Baker, 20)).map_err(|e| e.to_string())?;
    let s = ts.column("S_cg").ok_or("missing S_cg")?;
    let gibbs = ts.column("S_gibbs").ok_or("missing S_gibbs")?;
    let gibbs_drift = gibbs.iter().map(|g| (g + LN_2).abs()).fold(0.0, f64::max);
    let baker_ok = (s[0] + LN_2).abs() <= 1e-9 && s[20].abs() <= 0.05 && gibbs_drift <= 1e-6;

    let grid = PhaseSpaceGrid::unit_torus(4);
    let mut qc_worst: f64 = 0.0;
    for _ in 0..10 {
        let rho = random_classical_density(16, &mut r);
        let inf = local_infimum_exhaustive(&rho, &grid, &[1, 1]).map_err(|e| e.to_string())?;
        qc_worst = qc_worst.max((inf - gibbs_entropy(&rho, &grid).map_err(|e| e.to_string())?).abs());
    }
    require(
        violations == 0 && inexact == 0 && baker_ok && qc_worst <= 1e-9,
        format!(
            "200 pairs: {violations} bound violations, {inexact} fine-graining mismatches; baker S_cg {:.9} -> {:.4} \
             at step 20, Gibbs drift {gibbs_drift:.1e}; exhaustive local infimum error {qc_worst:.1e}",
            s[0], s[20]
        ),
    )
}

fn determinism_suite() -> Check {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut slowest = Duration::ZERO;
    for d in &dirs {
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_obsent"))
            .args(["--seed", "0", "demo", "--out"])
            .arg(d.path())
            .output()
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if !status.status.success() {
            return Err(format!("demo failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    let mut differing = Vec::new();
    for name in obsent_cli::DEMO_FILES {
        let a = std::fs::read(dirs[0].path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| e.to_string())?;
        if a != b || a.is_empty() {
            differing.push(name);
        }
    }
    require(
        differing.is_empty() && slowest < Duration::from_secs(120),
        format!("{} files compared, differing: {differing:?}; slowest demo run {:.1}s", obsent_cli::DEMO_FILES.len(), slowest.as_secs_f64()),
    )
}

fn main() {
    let criteria: [(&str, Option<u64>, fn() -> Check); 10] = [
        ("bound suite", Some(30), bound_suite),
        ("monotonicity suite", None, monotonicity_suite),
        ("minimum and iff suite", None, minimum_suite),
        ("decomposition identity", None, decomposition_suite),
        ("quarrelation oracle", Some(120), quarrelation_suite),
        ("POVM suite", None, povm_suite),
        ("equilibrium identification", None, equilibrium_suite),
        ("conservation and second law", Some(180), second_law_suite),
        ("classical suite", None, classical_suite),
        ("determinism", None, determinism_suite),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match limit {
            Some(s) => within(Duration::from_secs(*s), elapsed, result),
            None => result,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failed += 1;
        }
        println!("acceptance {:>2} {tag} {name}: {detail} [{:.1}s]", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance summary: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

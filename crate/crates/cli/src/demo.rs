//! The flagship experiments, bundled so that one command reproduces them.

use std::f64::consts::LN_2;
use std::path::Path;

use obsent_core::classical::{classical_sim, AreaPreservingMap, ClassicalSimConfig};
use obsent_core::linalg::{c, CVec};
use obsent_core::povm::{qc_entropy_povm, PovmQcOptions};
use obsent_core::quarrelation::{entanglement_entropy_pure_bipartite, qc_entropy, QcOptions};
use obsent_core::thermo::{second_law_run, SecondLawConfig};
use obsent_core::{vn_entropy, DensityMatrix};

use crate::commands::{column_names, Context};
use crate::error::CliResult;
use crate::files::{print_stdout, write_series, write_text};
use crate::DemoArgs;

/// Files written by [`run_demo`], relative to its output directory.
pub const DEMO_FILES: [&str; 3] = ["foe_second_law.csv", "baker_mixing.csv", "bell_quarrelation.csv"];

/// Runs every experiment with the given seed and writes [`DEMO_FILES`] (and
/// SVG plots next to them when `svg` is set). Output is a pure function of
/// the seed.
pub fn run_demo(out_dir: &Path, seed: u64, svg: bool) -> CliResult<Vec<String>> {
    let mut log = Vec::new();
    let svg_path = |name: &str| svg.then(|| out_dir.join(name).with_extension("svg"));

    let mut cfg = SecondLawConfig::reference();
    cfg.seed = seed;
    let ts = second_law_run(&cfg)?;
    write_series(&ts, &out_dir.join(DEMO_FILES[0]), svg_path(DEMO_FILES[0]).as_deref(), "closed Ising chain")?;
    let foe = ts.column("FOE").expect("FOE column");
    log.push(format!(
        "{}: {} points ({}); FOE {:.4} -> {:.4}",
        DEMO_FILES[0],
        ts.len(),
        column_names(&ts),
        foe[0],
        foe[foe.len() - 1]
    ));

    let ts = classical_sim(&ClassicalSimConfig::new(AreaPreservingMap::Baker, 30))?;
    write_series(&ts, &out_dir.join(DEMO_FILES[1]), svg_path(DEMO_FILES[1]).as_deref(), "baker map mixing")?;
    let s = ts.column("S_cg").expect("S_cg column");
    log.push(format!("{}: S_cg {:.4} -> {:.4}", DEMO_FILES[1], s[0], s[s.len() - 1]));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = CVec::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)]);
    let bell = DensityMatrix::pure(&psi)?.with_subsystems(vec![2, 2])?;
    let qc = qc_entropy(&bell, &[2, 2], &QcOptions { seed, ..QcOptions::default() })?;
    let povm = qc_entropy_povm(&bell, &[2, 2], &PovmQcOptions { seed, ..PovmQcOptions::default() })?;
    let rows = [
        ("qc_entropy", qc.value),
        ("vn_entropy", vn_entropy(&bell)),
        ("entanglement_entropy", entanglement_entropy_pure_bipartite(&psi, (2, 2))?),
        ("ln2", LN_2),
        ("qc_entropy_povm", povm.value),
    ];
    let mut csv = String::from("quantity,value\n");
    for (name, v) in rows {
        csv.push_str(&format!("{name},{v:.16e}\n"));
    }
    write_text(&out_dir.join(DEMO_FILES[2]), &csv)?;
    log.push(format!("{}: S_qc {:.6} (ln 2 = {:.6})", DEMO_FILES[2], qc.value, LN_2));
    Ok(log)
}

pub fn demo(ctx: &Context, a: &DemoArgs) -> CliResult<()> {
    for line in run_demo(&a.out, ctx.seed, a.svg)? {
        print_stdout(&line)?;
    }
    print_stdout(&format!("outputs in {}", a.out.display()))
}

use std::f64::consts::LN_2;
use std::path::Path;

use obsent_core::classical::{
    classical_chi_entropy, classical_local_decomposition, classical_obs_entropy, classical_sim as run_classical,
    gibbs_entropy, AreaPreservingMap, ChiSet, ClassicalDensity, ClassicalSimConfig, InitialDensity, PartitionSpec,
    PhasePartition, PhaseSpaceGrid, Transport,
};
use obsent_core::coarse::joint;
use obsent_core::entropy::{bound_margin, BoundTarget, EntropyReport, LocalDecomposition};
use obsent_core::io::{matrix_from_rows, MatrixRows, Measurement};
use obsent_core::povm::{povm_entropy, PovmCoarseGraining, qc_entropy_povm, validate_local_povm, PovmQcOptions};
use obsent_core::quarrelation::{entanglement_entropy_pure_bipartite, qc_entropy, qc_inequality_check, QcOptions};
use obsent_core::series::TimeSeries;
use obsent_core::thermo::{second_law_run, system_bath_entropy, EnergyBinning, ModelConfig, SecondLawConfig};
use obsent_core::{
    local_decomposition, local_entropy, multi_cg_entropy, observational_entropy, reduce, vn_entropy, DensityMatrix,
    MultiCoarseGraining, Tolerances,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::files::{emit_json, print_stdout, load_measurement, load_state, read_config, write_series};
use crate::{ClassicalSimArgs, EntropyArgs, QcPovmArgs, QuarrelationArgs, ThermoSimArgs, ValidateArgs};

pub struct Context {
    pub seed: u64,
    pub bits: bool,
    pub tol: Tolerances,
}

impl Context {
    pub fn unit(&self) -> &'static str {
        if self.bits {
            "bits"
        } else {
            "nats"
        }
    }

    pub fn scale(&self, x: f64) -> f64 {
        if self.bits {
            x / LN_2
        } else {
            x
        }
    }

    fn report(&self, r: EntropyReport) -> EntropyReport {
        if self.bits {
            r.in_bits()
        } else {
            r
        }
    }

    fn decomposition(&self, mut d: LocalDecomposition) -> LocalDecomposition {
        d.marginal_entropies.iter_mut().for_each(|x| *x = self.scale(*x));
        d.mutual_information = self.scale(d.mutual_information);
        d.total = self.scale(d.total);
        d
    }

    pub fn series(&self, mut ts: TimeSeries) -> TimeSeries {
        if self.bits {
            for (_, col) in ts.columns.iter_mut() {
                col.iter_mut().for_each(|x| *x /= LN_2);
            }
        }
        ts
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalPovmFile {
    subsystem_dims: Vec<usize>,
    factors: Vec<Vec<MatrixRows>>,
}

/// Classical grid input: a density plus one of a partition, a chi set or a
/// local (per-subsystem) partition.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PhaseSpaceFile {
    grid: PhaseSpaceGrid,
    weights: Vec<f64>,
    #[serde(default)]
    partition: Option<Vec<usize>>,
    #[serde(default)]
    chi: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default)]
    local: Option<LocalPartitionFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalPartitionFile {
    /// Number of axes of each subsystem.
    split: Vec<usize>,
    /// Macrostate label per cell of each subsystem grid.
    factors: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BathFile {
    model: ModelConfig,
    #[serde(default)]
    binning: EnergyBinning,
}

enum PhaseSpaceMeasure {
    Partition(PhasePartition),
    Chi(ChiSet),
    Local(Vec<usize>, Vec<PhasePartition>),
}

fn load_phase_space(path: &Path, tol: &Tolerances) -> CliResult<(PhaseSpaceGrid, ClassicalDensity, PhaseSpaceMeasure)> {
    let f: PhaseSpaceFile = read_config(path)?;
    let grid = PhaseSpaceGrid::new(f.grid.axes().to_vec(), f.grid.h0())?;
    let rho = ClassicalDensity::with_tolerances(f.weights, tol)?;
    let measure = match (f.partition, f.chi, f.local) {
        (Some(labels), None, None) => PhaseSpaceMeasure::Partition(PhasePartition::new(&labels)),
        (None, Some(chi), None) => {
            let values = chi
                .iter()
                .map(|f| f.iter().map(|z| obsent_core::linalg::c(z[0], z[1])).collect())
                .collect();
            PhaseSpaceMeasure::Chi(ChiSet::new(values, tol)?)
        }
        (None, None, Some(local)) => {
            PhaseSpaceMeasure::Local(local.split, local.factors.iter().map(|l| PhasePartition::new(l)).collect())
        }
        _ => return Err(CliError::schema(path, "exactly one of `partition`, `chi`, `local` is required")),
    };
    Ok((grid, rho, measure))
}

pub fn validate(ctx: &Context, a: &ValidateArgs) -> CliResult<()> {
    let tol = &ctx.tol;
    let mut checked = serde_json::Map::new();
    if let Some(p) = &a.state {
        let rho = load_state(p, tol)?;
        checked.insert("state".into(), json!({"dim": rho.dim(), "subsystem_dims": rho.subsystem_dims()}));
    }
    if let Some(p) = &a.cg {
        let kind = match load_measurement(p, tol)? {
            Measurement::Projective(cg) => json!({"kind": "projective", "volumes": cg.volumes()}),
            Measurement::Local(l) => json!({"kind": "local", "shape": l.shape(), "dim": l.dim()}),
            Measurement::Povm(k) => json!({"kind": "povm", "outcomes": k.len(), "volumes": k.volumes()}),
        };
        checked.insert("coarse_graining".into(), kind);
    }
    if let Some(p) = &a.local_povm {
        let f: LocalPovmFile = read_config(p)?;
        let factors = f
            .factors
            .iter()
            .map(|ks| ks.iter().map(matrix_from_rows).collect::<obsent_core::Result<Vec<_>>>())
            .collect::<obsent_core::Result<Vec<_>>>()?;
        let local = validate_local_povm(factors, &f.subsystem_dims, tol)?;
        checked.insert("local_povm".into(), json!({"subsystem_dims": local.subsystem_dims()}));
    }
    if let Some(p) = &a.config {
        let cfg: SecondLawConfig = read_config(p)?;
        let model = cfg.model.build(cfg.seed, tol)?;
        cfg.state.build(&model, cfg.seed)?;
        cfg.times.times()?;
        checked.insert("config".into(), json!({"dim": model.dim()}));
    }
    if let Some(p) = &a.phase_space {
        let (grid, _, _) = load_phase_space(p, tol)?;
        checked.insert("phase_space".into(), json!({"cells": grid.num_cells()}));
    }
    if checked.is_empty() {
        return Err(CliError::Usage("nothing to validate; pass --state, --cg, --local-povm, --config or --phase-space".into()));
    }
    emit_json(&json!({"valid": true, "checked": checked}), None)
}

pub fn entropy(ctx: &Context, a: &EntropyArgs) -> CliResult<()> {
    let tol = &ctx.tol;
    if let Some(p) = &a.phase_space {
        return classical_entropy(ctx, p, a.out.as_deref());
    }
    let state_path = a.state.as_ref().ok_or_else(|| CliError::Usage("--state is required".into()))?;
    let mut rho = load_state(state_path, tol)?;
    if let Some(keep) = &a.keep {
        rho = reduce(&rho, keep)?;
    }
    let mut out = serde_json::Map::new();
    out.insert("unit".into(), json!(ctx.unit()));
    out.insert("vn_entropy".into(), json!(ctx.scale(vn_entropy(&rho))));

    if let Some(bath) = &a.bath {
        let cg_path = a.cg.as_ref().expect("clap enforces --cg");
        let system = match load_measurement(cg_path, tol)? {
            Measurement::Projective(cg) => cg,
            Measurement::Local(l) => l.expand(),
            Measurement::Povm(_) => return Err(CliError::schema(cg_path, "system coarse-graining must be projective")),
        };
        let f: BathFile = read_config(bath)?;
        let model = f.model.build(ctx.seed, tol)?;
        let r = system_bath_entropy(&rho, &system, &model, f.binning)?;
        out.insert("system_bath".into(), json!(ctx.report(r)));
        return emit_json(&Value::Object(out), a.out.as_deref());
    }

    if !a.seq.is_empty() {
        let seq = a
            .seq
            .iter()
            .map(|p| match load_measurement(p, tol)? {
                Measurement::Projective(cg) => Ok(cg),
                Measurement::Local(l) => Ok(l.expand()),
                Measurement::Povm(_) => Err(CliError::schema(p, "sequence elements must be projective")),
            })
            .collect::<CliResult<Vec<_>>>()?;
        if a.joint {
            let mut it = seq.into_iter();
            let first = it.next().expect("clap requires one file");
            let cg = it.try_fold(first, |acc, next| joint(&acc, &next, tol))?;
            out.insert("report".into(), json!(ctx.report(observational_entropy(&rho, &cg)?)));
            if a.bound {
                out.insert("bound".into(), json!(bound_margin(&rho, BoundTarget::Single(&cg), tol)?));
            }
            return emit_json(&Value::Object(out), a.out.as_deref());
        }
        let multi = MultiCoarseGraining::new(seq)?;
        out.insert("report".into(), json!(ctx.report(multi_cg_entropy(&rho, &multi)?)));
        if a.bound {
            out.insert("bound".into(), json!(bound_margin(&rho, BoundTarget::Sequence(&multi), tol)?));
        }
        return emit_json(&Value::Object(out), a.out.as_deref());
    }

    if let Some(p) = &a.povm {
        let k = match load_measurement(p, tol)? {
            Measurement::Povm(k) => k,
            Measurement::Projective(cg) => PovmCoarseGraining::from_projective(&cg),
            Measurement::Local(l) => PovmCoarseGraining::from_projective(&l.expand()),
        };
        out.insert("report".into(), json!(ctx.report(povm_entropy(&rho, &k)?)));
        return emit_json(&Value::Object(out), a.out.as_deref());
    }

    let cg_path =
        a.cg.as_ref().ok_or_else(|| CliError::Usage("pass --cg, --povm, --seq or --phase-space".into()))?;
    match load_measurement(cg_path, tol)? {
        Measurement::Projective(cg) => {
            out.insert("report".into(), json!(ctx.report(observational_entropy(&rho, &cg)?)));
            if a.bound {
                out.insert("bound".into(), json!(bound_margin(&rho, BoundTarget::Single(&cg), tol)?));
            }
        }
        Measurement::Local(local) => {
            out.insert("report".into(), json!(ctx.report(local_entropy(&rho, &local)?)));
            if a.decompose {
                out.insert("decomposition".into(), json!(ctx.decomposition(local_decomposition(&rho, &local)?)));
            }
            if a.bound {
                out.insert("bound".into(), json!(bound_margin(&rho, BoundTarget::Single(&local.expand()), tol)?));
            }
        }
        Measurement::Povm(k) => {
            out.insert("report".into(), json!(ctx.report(povm_entropy(&rho, &k)?)));
        }
    }
    emit_json(&Value::Object(out), a.out.as_deref())
}

fn classical_entropy(ctx: &Context, path: &Path, out_path: Option<&Path>) -> CliResult<()> {
    let (grid, rho, measure) = load_phase_space(path, &ctx.tol)?;
    let mut out = serde_json::Map::new();
    out.insert("unit".into(), json!(ctx.unit()));
    out.insert("gibbs_entropy".into(), json!(ctx.scale(gibbs_entropy(&rho, &grid)?)));
    out.insert("total_volume".into(), json!(grid.total_volume()));
    match measure {
        PhaseSpaceMeasure::Partition(p) => {
            out.insert("report".into(), json!(ctx.report(classical_obs_entropy(&rho, &p, &grid)?)));
        }
        PhaseSpaceMeasure::Chi(chi) => {
            out.insert("report".into(), json!(ctx.report(classical_chi_entropy(&rho, &chi, &grid)?)));
        }
        PhaseSpaceMeasure::Local(split, factors) => {
            let d = classical_local_decomposition(&rho, &grid, &split, &factors)?;
            out.insert("decomposition".into(), json!(ctx.decomposition(d)));
        }
    }
    emit_json(&Value::Object(out), out_path)
}

fn partition_dims(rho: &DensityMatrix, dims: &Option<Vec<usize>>) -> CliResult<Vec<usize>> {
    match dims {
        Some(d) => Ok(d.clone()),
        None => rho.subsystem_dims().map(<[usize]>::to_vec).ok_or_else(|| {
            CliError::Validation(obsent_core::Error::MissingTensorStructure(
                "state has no subsystem_dims; pass --dims".into(),
            ))
        }),
    }
}

#[derive(Serialize)]
struct QcOutput {
    unit: &'static str,
    qc_entropy: f64,
    upper_bound_estimate: bool,
    best_local_entropy: f64,
    vn_entropy: f64,
    restarts_used: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    entanglement_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inequality_slack: Option<f64>,
    best_bases: Vec<MatrixRows>,
}

pub fn quarrelation(ctx: &Context, a: &QuarrelationArgs) -> CliResult<()> {
    let rho = load_state(&a.state, &ctx.tol)?;
    let dims = partition_dims(&rho, &a.dims)?;
    let opts = QcOptions { restarts: a.restarts, max_sweeps: a.max_sweeps, seed: ctx.seed, ..QcOptions::default() };
    let result = qc_entropy(&rho, &dims, &opts)?;
    let summary = result.summary();

    let pure = rho.eigenvalues().last().is_some_and(|&l| (l - 1.0).abs() < 1e-10);
    let entanglement_entropy = if pure && dims.len() == 2 {
        let eig = obsent_core::linalg::eigh(rho.matrix());
        let psi = eig.vectors.column(rho.dim() - 1).into_owned();
        Some(ctx.scale(entanglement_entropy_pure_bipartite(&psi, (dims[0], dims[1]))?))
    } else {
        None
    };
    let inequality_slack = match &a.cg {
        Some(p) => match load_measurement(p, &ctx.tol)? {
            Measurement::Local(local) => Some(ctx.scale(qc_inequality_check(&rho, &local, &opts)?)),
            _ => return Err(CliError::schema(p, "the inequality check needs a local coarse-graining")),
        },
        None => None,
    };
    let out = QcOutput {
        unit: ctx.unit(),
        qc_entropy: ctx.scale(summary.value),
        upper_bound_estimate: summary.upper_bound_estimate,
        best_local_entropy: ctx.scale(summary.best_entropy),
        vn_entropy: ctx.scale(summary.vn_entropy),
        restarts_used: summary.restarts_used,
        converged: summary.converged,
        entanglement_entropy,
        inequality_slack,
        best_bases: summary.best_bases,
    };
    emit_json(&out, a.out.as_deref())
}

pub fn qc_povm_compare(ctx: &Context, a: &QcPovmArgs) -> CliResult<()> {
    let rho = load_state(&a.state, &ctx.tol)?;
    let dims = partition_dims(&rho, &a.dims)?;
    let opts = PovmQcOptions {
        projective: QcOptions { restarts: a.restarts, seed: ctx.seed, ..QcOptions::default() },
        outcomes: a.outcomes.clone(),
        restarts: a.povm_restarts,
        seed: ctx.seed,
        ..PovmQcOptions::default()
    };
    let r = qc_entropy_povm(&rho, &dims, &opts)?;
    let out = json!({
        "unit": ctx.unit(),
        "vn_entropy": ctx.scale(r.vn_entropy),
        "projective": {
            "qc_entropy": ctx.scale(r.projective.value),
            "best_local_entropy": ctx.scale(r.projective.best_entropy),
        },
        "povm": {
            "qc_entropy": ctx.scale(r.value),
            "best_local_entropy": ctx.scale(r.best_entropy),
            "outcomes": r.best_local_povm.factors().iter().map(|f| f.len()).collect::<Vec<_>>(),
            "restarts_used": r.restarts_used,
            "converged": r.converged,
        },
        "povm_minus_projective": ctx.scale(r.value - r.projective.value),
        "upper_bound_estimate": true,
    });
    emit_json(&out, a.out.as_deref())
}

pub fn parse_map(spec: &str, k: Option<f64>) -> CliResult<AreaPreservingMap> {
    let lower = spec.to_ascii_lowercase();
    let (name, arg) = match lower.split_once(':') {
        Some((n, a)) => (n.to_string(), Some(a.to_string())),
        None => match lower.strip_prefix("standard(").and_then(|r| r.strip_suffix(')')) {
            Some(a) => ("standard".to_string(), Some(a.to_string())),
            None => (lower.clone(), None),
        },
    };
    match name.as_str() {
        "baker" => Ok(AreaPreservingMap::Baker),
        "cat" => Ok(AreaPreservingMap::Cat),
        "standard" => {
            let from_spec = arg
                .map(|a| a.parse::<f64>().map_err(|_| CliError::Usage(format!("bad kicking strength `{a}`"))))
                .transpose()?;
            Ok(AreaPreservingMap::Standard { k: k.or(from_spec).unwrap_or(1.0) })
        }
        _ => Err(CliError::Usage(format!("unknown map `{spec}`; use baker, cat or standard:<k>"))),
    }
}

fn parse_transport(spec: &str) -> CliResult<Transport> {
    match spec {
        "auto" => Ok(Transport::Auto),
        "permutation" => Ok(Transport::CellPermutation),
        "supersampled" => Ok(Transport::Supersampled { s: 4 }),
        _ => spec
            .strip_prefix("supersampled:")
            .and_then(|s| s.parse().ok())
            .map(|s| Transport::Supersampled { s })
            .ok_or_else(|| CliError::Usage(format!("unknown transport `{spec}`"))),
    }
}

fn parse_initial(spec: &str) -> CliResult<InitialDensity> {
    match spec {
        "left_half" => Ok(InitialDensity::LeftHalf),
        "corner" => Ok(InitialDensity::Corner),
        "uniform" => Ok(InitialDensity::Uniform),
        _ => Err(CliError::Usage(format!("unknown initial density `{spec}`"))),
    }
}

pub fn classical_sim(ctx: &Context, a: &ClassicalSimArgs) -> CliResult<()> {
    let cfg = match &a.config {
        Some(p) => read_config::<ClassicalSimConfig>(p)?,
        None => ClassicalSimConfig {
            map: parse_map(&a.map, a.k)?,
            steps: a.steps,
            cells: a.cells,
            partition: a.partition.parse::<PartitionSpec>().map_err(|e| CliError::Usage(e.to_string()))?,
            initial: parse_initial(&a.initial)?,
            transport: parse_transport(&a.transport)?,
        },
    };
    let ts = ctx.series(run_classical(&cfg)?);
    write_series(&ts, &a.out, a.svg.as_deref(), "classical coarse-grained entropy")?;
    let s = ts.column("S_cg").expect("column present");
    print_stdout(&format!(
        "wrote {} ({} steps): S_cg {:.6} -> {:.6} {}",
        a.out.display(),
        cfg.steps,
        s[0],
        s[s.len() - 1],
        ctx.unit()
    ))
}

pub fn thermo_sim(ctx: &Context, a: &ThermoSimArgs) -> CliResult<()> {
    let mut cfg: SecondLawConfig = read_config(&a.config)?;
    cfg.tolerances = merge_tolerances(cfg.tolerances, ctx.tol);
    let output = cfg.output.clone().unwrap_or_default();
    let csv = a
        .out
        .clone()
        .or_else(|| output.csv.map(Into::into))
        .unwrap_or_else(|| a.config.with_extension("csv"));
    let svg = a.svg.clone().or_else(|| output.svg.map(Into::into));
    let ts = ctx.series(second_law_run(&cfg)?);
    write_series(&ts, &csv, svg.as_deref(), "entropy time series")?;
    print_stdout(&format!("wrote {} ({} time points, columns: {})", csv.display(), ts.len(), column_names(&ts)))
}

/// Command-line overrides win over the config file's values.
fn merge_tolerances(file: Tolerances, cli: Tolerances) -> Tolerances {
    let default = Tolerances::default();
    let pick = |f: f64, c: f64, d: f64| if c != d { c } else { f };
    Tolerances {
        hermitian: pick(file.hermitian, cli.hermitian, default.hermitian),
        trace: pick(file.trace, cli.trace, default.trace),
        positivity: pick(file.positivity, cli.positivity, default.positivity),
        projector: pick(file.projector, cli.projector, default.projector),
        rank: pick(file.rank, cli.rank, default.rank),
        order: pick(file.order, cli.order, default.order),
        commute: pick(file.commute, cli.commute, default.commute),
        degeneracy: pick(file.degeneracy, cli.degeneracy, default.degeneracy),
        probability_floor: pick(file.probability_floor, cli.probability_floor, default.probability_floor),
        trace_preserving: pick(file.trace_preserving, cli.trace_preserving, default.trace_preserving),
        chi: pick(file.chi, cli.chi, default.chi),
        mass: pick(file.mass, cli.mass, default.mass),
    }
}

pub fn column_names(ts: &TimeSeries) -> String {
    ts.columns.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>().join(", ")
}

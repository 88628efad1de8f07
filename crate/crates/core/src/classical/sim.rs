use serde::{Deserialize, Serialize};

use super::{
    classical_obs_entropy, gibbs_entropy, AreaPreservingMap, ClassicalDensity, PhasePartition, PhaseSpaceGrid,
    Transport, Transporter,
};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionSpec {
    Quadrants,
    /// Left and right halves in the first coordinate.
    Halves,
    /// `b × b` equal blocks.
    Blocks(usize),
    Fine,
}

impl PartitionSpec {
    pub fn build(&self, grid: &PhaseSpaceGrid) -> Result<PhasePartition> {
        match *self {
            PartitionSpec::Quadrants => PhasePartition::quadrants(grid),
            PartitionSpec::Halves => Ok(PhasePartition::from_fn(grid, |x| usize::from(x[0] >= 0.5))),
            PartitionSpec::Blocks(b) if b > 0 => {
                let axes = grid.axes();
                if axes.len() != 2 || axes.iter().any(|a| a.cells % b != 0) {
                    return Err(Error::IncompatibleGrid(format!("{b}x{b} blocks do not tile the grid")));
                }
                let (bx, by) = (axes[0].cells / b, axes[1].cells / b);
                let raw: Vec<usize> = (0..grid.num_cells())
                    .map(|c| {
                        let ij = grid.cell_coords(c);
                        (ij[0] / bx) * b + ij[1] / by
                    })
                    .collect();
                Ok(PhasePartition::new(&raw))
            }
            PartitionSpec::Blocks(_) => Err(Error::InvalidInput("block count must be positive".into())),
            PartitionSpec::Fine => Ok(PhasePartition::fine_graining(grid.num_cells())),
        }
    }
}

impl std::str::FromStr for PartitionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadrants" => Ok(PartitionSpec::Quadrants),
            "halves" => Ok(PartitionSpec::Halves),
            "fine" => Ok(PartitionSpec::Fine),
            _ => s
                .strip_prefix("blocks")
                .and_then(|n| n.trim_matches(|c| c == '(' || c == ')' || c == ':').parse().ok())
                .map(PartitionSpec::Blocks)
                .ok_or_else(|| Error::InvalidInput(format!("unknown partition `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialDensity {
    /// Uniform on `x < 1/2`.
    LeftHalf,
    /// Uniform on the lower-left quarter square.
    Corner,
    Uniform,
}

impl InitialDensity {
    pub fn build(&self, grid: &PhaseSpaceGrid) -> Result<ClassicalDensity> {
        match self {
            InitialDensity::LeftHalf => ClassicalDensity::uniform_where(grid, |x| x[0] < 0.5),
            InitialDensity::Corner => ClassicalDensity::uniform_where(grid, |x| x[0] < 0.5 && x[1] < 0.5),
            InitialDensity::Uniform => Ok(ClassicalDensity::uniform(grid.num_cells())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSimConfig {
    pub map: AreaPreservingMap,
    pub steps: usize,
    /// Cells per side of the unit torus.
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_partition")]
    pub partition: PartitionSpec,
    #[serde(default = "default_initial")]
    pub initial: InitialDensity,
    #[serde(default)]
    pub transport: Transport,
}

fn default_cells() -> usize {
    64
}
fn default_partition() -> PartitionSpec {
    PartitionSpec::Quadrants
}
fn default_initial() -> InitialDensity {
    InitialDensity::LeftHalf
}

impl ClassicalSimConfig {
    pub fn new(map: AreaPreservingMap, steps: usize) -> Self {
        Self {
            map,
            steps,
            cells: default_cells(),
            partition: default_partition(),
            initial: default_initial(),
            transport: Transport::Auto,
        }
    }
}

/// Steps the map and records `S_cg` (partition) and `S_gibbs` per step.
pub fn classical_sim(config: &ClassicalSimConfig) -> Result<TimeSeries> {
    let grid = PhaseSpaceGrid::unit_torus(config.cells);
    let partition = config.partition.build(&grid)?;
    let transporter = Transporter::new(config.map, &grid, config.transport)?;
    let mut rho = config.initial.build(&grid)?;
    let mut s_cg = Vec::with_capacity(config.steps + 1);
    let mut s_gibbs = Vec::with_capacity(config.steps + 1);
    for step in 0..=config.steps {
        if step > 0 {
            rho = transporter.step(&rho);
        }
        s_cg.push(classical_obs_entropy(&rho, &partition, &grid)?.total);
        s_gibbs.push(gibbs_entropy(&rho, &grid)?);
    }
    let mut ts = TimeSeries::new("step", (0..=config.steps).map(|s| s as f64).collect(), true);
    ts.push_column("S_cg", s_cg);
    ts.push_column("S_gibbs", s_gibbs);
    Ok(ts)
}

//! Classical observational entropy on a discretized phase space.
//!
//! Densities are probability masses per grid cell, partitions label every
//! cell with a macrostate, and volumes are cell counts times the cell volume.
//! Entropies can be negative (differential-entropy convention).

mod maps;
mod sim;

pub use maps::{evolve_map, AreaPreservingMap, Transport, Transporter};
pub use sim::{classical_sim, ClassicalSimConfig, InitialDensity, PartitionSpec};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entropy::{EntropyReport, LocalDecomposition, PROBABILITY_FLOOR};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub cells: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl Axis {
    pub fn unit(cells: usize, periodic: bool) -> Self {
        Self { lo: 0.0, hi: 1.0, cells, periodic }
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.cells as f64
    }
}

/// Rectangular grid over `(q_1, π_1, q_2, π_2, …)`; cells are indexed
/// row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceGrid {
    axes: Vec<Axis>,
    /// Normalizing constant per coordinate pair in the phase-space measure.
    #[serde(default = "one")]
    h0: f64,
}

fn one() -> f64 {
    1.0
}

impl PhaseSpaceGrid {
    pub fn new(axes: Vec<Axis>, h0: f64) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::IncompatibleGrid("grid needs at least one axis".into()));
        }
        if let Some(a) = axes.iter().find(|a| a.cells == 0 || a.hi <= a.lo || !a.lo.is_finite() || !a.hi.is_finite()) {
            return Err(Error::IncompatibleGrid(format!("bad axis {a:?}")));
        }
        if h0 <= 0.0 || !h0.is_finite() {
            return Err(Error::IncompatibleGrid(format!("normalizing constant must be positive, got {h0}")));
        }
        Ok(Self { axes, h0 })
    }

    /// `n × n` cells on the periodic unit square `[0,1)²`.
    pub fn unit_torus(n: usize) -> Self {
        Self { axes: vec![Axis::unit(n, true), Axis::unit(n, true)], h0: 1.0 }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn num_cells(&self) -> usize {
        self.axes.iter().map(|a| a.cells).product()
    }

    pub fn cell_volume(&self) -> f64 {
        let raw: f64 = self.axes.iter().map(Axis::width).product();
        raw / self.h0.powf(self.axes.len() as f64 / 2.0)
    }

    pub fn total_volume(&self) -> f64 {
        self.num_cells() as f64 * self.cell_volume()
    }

    /// Per-axis cell indices of a flat cell index.
    pub fn cell_coords(&self, mut cell: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = cell % a.cells;
            cell /= a.cells;
        }
        out
    }

    pub fn cell_index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.cells + i)
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        self.cell_coords(cell)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.lo + (i as f64 + 0.5) * a.width())
            .collect()
    }

    /// Grid of the axes `range` (a subsystem of a product grid).
    pub fn sub_grid(&self, range: std::ops::Range<usize>) -> Self {
        Self { axes: self.axes[range].to_vec(), h0: self.h0 }
    }
}

/// Probability mass per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalDensity {
    weights: Vec<f64>,
}

impl ClassicalDensity {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(weights, &Tolerances::default())
    }

    pub fn with_tolerances(weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDensity(format!("cell {i} has weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.mass {
            return Err(Error::InvalidDensity(format!("total mass {total}")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(cells: usize) -> Self {
        Self { weights: vec![1.0 / cells as f64; cells] }
    }

    /// Uniform over the cells whose centers satisfy `inside`.
    pub fn uniform_where(grid: &PhaseSpaceGrid, inside: impl Fn(&[f64]) -> bool) -> Result<Self> {
        let mask: Vec<bool> = (0..grid.num_cells()).map(|c| inside(&grid.cell_center(c))).collect();
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(Error::InvalidDensity("empty support".into()));
        }
        Ok(Self { weights: mask.iter().map(|&m| if m { 1.0 / count as f64 } else { 0.0 }).collect() })
    }

    /// All mass in one cell.
    pub fn point_mass(cells: usize, at: usize) -> Self {
        let mut weights = vec![0.0; cells];
        weights[at] = 1.0;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub(crate) fn from_weights_unchecked(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

/// Macrostate label per cell, compacted to `0..num_macrostates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePartition {
    labels: Vec<usize>,
    count: usize,
}

impl PhasePartition {
    /// Relabels arbitrary ids to `0..k` by ascending id.
    pub fn new(raw: &[usize]) -> Self {
        let mut ids: Vec<usize> = raw.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let labels = raw.iter().map(|r| ids.binary_search(r).unwrap()).collect();
        Self { labels, count: ids.len() }
    }

    /// Every cell its own macrostate.
    pub fn fine_graining(cells: usize) -> Self {
        Self { labels: (0..cells).collect(), count: cells }
    }

    pub fn trivial(cells: usize) -> Self {
        Self { labels: vec![0; cells], count: 1 }
    }

    pub fn from_fn(grid: &PhaseSpaceGrid, label: impl Fn(&[f64]) -> usize) -> Self {
        let raw: Vec<usize> = (0..grid.num_cells()).map(|c| label(&grid.cell_center(c))).collect();
        Self::new(&raw)
    }

    /// Four quadrants of a two-axis grid split at the axis midpoints.
    pub fn quadrants(grid: &PhaseSpaceGrid) -> Result<Self> {
        if grid.axes().len() != 2 {
            return Err(Error::IncompatibleGrid("quadrants need a two-axis grid".into()));
        }
        let mid: Vec<f64> = grid.axes().iter().map(|a| 0.5 * (a.lo + a.hi)).collect();
        Ok(Self::from_fn(grid, |x| 2 * usize::from(x[0] >= mid[0]) + usize::from(x[1] >= mid[1])))
    }

    /// Groups cells of (numerically) equal weight, the grid analog of `C_ρ`.
    pub fn density_level_sets(rho: &ClassicalDensity, rel_tol: f64) -> Self {
        let w = rho.weights();
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
        let scale = w.iter().copied().fold(0.0, f64::max);
        let mut raw = vec![0; w.len()];
        let mut label = 0;
        for k in 1..order.len() {
            if w[order[k]] - w[order[k - 1]] > rel_tol * scale {
                label += 1;
            }
            raw[order[k]] = label;
        }
        Self::new(&raw)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_macrostates(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_shape(what: &str, found: usize, grid: &PhaseSpaceGrid) -> Result<()> {
    if found != grid.num_cells() {
        return Err(Error::ShapeMismatch(format!("{what} has {found} cells, grid has {}", grid.num_cells())));
    }
    Ok(())
}

/// `S = -∑ p_i ln(p_i/V_i)` with `p_i` the mass in `Γ_i` and `V_i` its volume.
pub fn classical_obs_entropy(
    rho: &ClassicalDensity,
    partition: &PhasePartition,
    grid: &PhaseSpaceGrid,
) -> Result<EntropyReport> {
    check_shape("density", rho.len(), grid)?;
    check_shape("partition", partition.len(), grid)?;
    let mut p = vec![0.0; partition.num_macrostates()];
    let mut counts = vec![0usize; partition.num_macrostates()];
    for (&label, &w) in partition.labels().iter().zip(rho.weights()) {
        p[label] += w;
        counts[label] += 1;
    }
    let cv = grid.cell_volume();
    let v = counts.iter().map(|&n| n as f64 * cv).collect();
    Ok(EntropyReport::from_distribution(p, v, PROBABILITY_FLOOR))
}

/// Grid-resolved Gibbs entropy `-∑ w ln(w / cell_volume)`.
///
/// Summed exactly as [`classical_obs_entropy`] sums the per-cell
/// fine-graining, so the two agree bit for bit.
pub fn gibbs_entropy(rho: &ClassicalDensity, grid: &PhaseSpaceGrid) -> Result<f64> {
    check_shape("density", rho.len(), grid)?;
    let cv = grid.cell_volume();
    let p = rho.weights().iter().map(|&w| 0.0 + w).collect();
    let v = vec![1.0 * cv; rho.len()];
    Ok(EntropyReport::from_distribution(p, v, PROBABILITY_FLOOR).total)
}

/// Smooth measurement functions `χ_i` per cell with `∑_i |χ_i|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSet {
    /// `values[i][cell]`.
    values: Vec<Vec<Complex64>>,
}

impl ChiSet {
    pub fn new(values: Vec<Vec<Complex64>>, tol: &Tolerances) -> Result<Self> {
        let cells = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != cells) {
            return Err(Error::ShapeMismatch("chi functions have different lengths".into()));
        }
        for cell in 0..cells {
            let sum: f64 = values.iter().map(|v| v[cell].norm_sqr()).sum();
            if (sum - 1.0).abs() > tol.chi {
                return Err(Error::NotNormalizedChi { cell, sum });
            }
        }
        Ok(Self { values })
    }

    /// Indicator functions of a partition.
    pub fn indicators(partition: &PhasePartition) -> Self {
        let values = (0..partition.num_macrostates())
            .map(|i| {
                partition
                    .labels()
                    .iter()
                    .map(|&l| Complex64::new(if l == i { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[Vec<Complex64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `p_i = ∑ |χ_i|² w`, `V_i = ∑ |χ_i|² · cell_volume`.
pub fn classical_chi_entropy(rho: &ClassicalDensity, chi: &ChiSet, grid: &PhaseSpaceGrid) -> Result<EntropyReport> {
    check_shape("density", rho.len(), grid)?;
    if let Some(v) = chi.values().first() {
        check_shape("chi set", v.len(), grid)?;
    }
    let cv = grid.cell_volume();
    let mut p = Vec::with_capacity(chi.len());
    let mut v = Vec::with_capacity(chi.len());
    for f in chi.values() {
        let mut pi = 0.0;
        let mut vi = 0.0;
        for (z, &w) in f.iter().zip(rho.weights()) {
            pi += z.norm_sqr() * w;
            vi += z.norm_sqr() * cv;
        }
        p.push(pi);
        v.push(vi);
    }
    Ok(EntropyReport::from_distribution(p, v, PROBABILITY_FLOOR))
}

/// Axis counts of each subsystem of a product grid, validated.
fn subsystem_ranges(grid: &PhaseSpaceGrid, split: &[usize]) -> Result<Vec<std::ops::Range<usize>>> {
    if split.iter().sum::<usize>() != grid.axes().len() || split.contains(&0) {
        return Err(Error::NonProductGrid(format!(
            "split {split:?} does not divide {} axes",
            grid.axes().len()
        )));
    }
    let mut start = 0;
    Ok(split
        .iter()
        .map(|&n| {
            let r = start..start + n;
            start += n;
            r
        })
        .collect())
}

/// Sub-cell index of every subsystem for each cell of the product grid.
fn subsystem_cells(grid: &PhaseSpaceGrid, ranges: &[std::ops::Range<usize>]) -> Vec<Vec<usize>> {
    (0..grid.num_cells())
        .map(|cell| {
            let coords = grid.cell_coords(cell);
            ranges
                .iter()
                .map(|r| grid.sub_grid(r.clone()).cell_index(&coords[r.clone()]))
                .collect()
        })
        .collect()
}

/// Cartesian product of subsystem partitions; macrostate ids are row-major
/// tuples of the factor ids.
pub fn classical_local_partition(
    grid: &PhaseSpaceGrid,
    split: &[usize],
    factors: &[PhasePartition],
) -> Result<PhasePartition> {
    let ranges = subsystem_ranges(grid, split)?;
    if factors.len() != ranges.len() {
        return Err(Error::NonProductGrid(format!("{} factors for {} subsystems", factors.len(), ranges.len())));
    }
    for (f, r) in factors.iter().zip(&ranges) {
        let n = grid.sub_grid(r.clone()).num_cells();
        if f.len() != n {
            return Err(Error::NonProductGrid(format!("factor has {} cells, subsystem has {n}", f.len())));
        }
    }
    let raw: Vec<usize> = subsystem_cells(grid, &ranges)
        .iter()
        .map(|subs| {
            subs.iter()
                .zip(factors)
                .fold(0, |acc, (&c, f)| acc * f.num_macrostates() + f.labels()[c])
        })
        .collect();
    Ok(PhasePartition { labels: raw, count: factors.iter().map(PhasePartition::num_macrostates).product() })
}

/// Marginal entropies and mutual information of a classical local partition.
pub fn classical_local_decomposition(
    rho: &ClassicalDensity,
    grid: &PhaseSpaceGrid,
    split: &[usize],
    factors: &[PhasePartition],
) -> Result<LocalDecomposition> {
    check_shape("density", rho.len(), grid)?;
    let joint_partition = classical_local_partition(grid, split, factors)?;
    let ranges = subsystem_ranges(grid, split)?;
    let subs = subsystem_cells(grid, &ranges);
    let shape: Vec<usize> = factors.iter().map(PhasePartition::num_macrostates).collect();

    let mut joint = vec![0.0; joint_partition.num_macrostates()];
    for (&l, &w) in joint_partition.labels().iter().zip(rho.weights()) {
        joint[l] += w;
    }

    let mut marginal_entropies = Vec::new();
    let mut marginal_probabilities = Vec::new();
    for (x, (f, r)) in factors.iter().zip(&ranges).enumerate() {
        let g = grid.sub_grid(r.clone());
        let mut w = vec![0.0; g.num_cells()];
        for (cell, &m) in rho.weights().iter().enumerate() {
            w[subs[cell][x]] += m;
        }
        let marginal = ClassicalDensity::from_weights_unchecked(w);
        let report = classical_obs_entropy(&marginal, f, &g)?;
        marginal_entropies.push(report.total);
        marginal_probabilities.push(report.probabilities);
    }

    let mut mutual_information = 0.0;
    for (flat, &p) in joint.iter().enumerate() {
        if p < PROBABILITY_FLOOR {
            continue;
        }
        let mut rem = flat;
        let mut product = 1.0;
        for x in (0..shape.len()).rev() {
            product *= marginal_probabilities[x][rem % shape[x]];
            rem /= shape[x];
        }
        mutual_information += p * (p / product).ln();
    }
    let total = classical_obs_entropy(rho, &joint_partition, grid)?.total;
    Ok(LocalDecomposition {
        marginal_entropies,
        mutual_information,
        joint_probabilities: joint,
        shape,
        marginal_probabilities,
        total,
    })
}

/// All set partitions of `0..n` as restricted-growth label vectors.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for label in 0..=max + 1 {
            prefix.push(label);
            grow(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut prefix = vec![0];
    grow(&mut prefix, 0, n, &mut out);
    out
}

/// Minimum observational entropy over every local partition (all set
/// partitions of every subsystem grid). Only feasible for tiny grids.
pub fn local_infimum_exhaustive(rho: &ClassicalDensity, grid: &PhaseSpaceGrid, split: &[usize]) -> Result<f64> {
    let ranges = subsystem_ranges(grid, split)?;
    let per_factor: Vec<Vec<PhasePartition>> = ranges
        .iter()
        .map(|r| {
            let n = grid.sub_grid(r.clone()).num_cells();
            if n > 8 {
                return Err(Error::NonProductGrid(format!("{n} cells per subsystem is too many to enumerate")));
            }
            Ok(set_partitions(n).iter().map(|l| PhasePartition::new(l)).collect())
        })
        .collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    let mut idx = vec![0usize; per_factor.len()];
    loop {
        let factors: Vec<PhasePartition> = idx.iter().zip(&per_factor).map(|(&i, f)| f[i].clone()).collect();
        let p = classical_local_partition(grid, split, &factors)?;
        best = best.min(classical_obs_entropy(rho, &p, grid)?.total);
        let mut k = idx.len();
        loop {
            if k == 0 {
                return Ok(best);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_factor[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn uniform_on_one_macrostate_is_ln_volume() {
        let grid = PhaseSpaceGrid::new(vec![Axis { lo: 0.0, hi: 3.0, cells: 6, periodic: false }, Axis::unit(2, false)], 1.0)
            .unwrap();
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 1.5).unwrap();
        let part = PhasePartition::from_fn(&grid, |x| usize::from(x[0] >= 1.5));
        let r = classical_obs_entropy(&rho, &part, &grid).unwrap();
        assert!((r.total - 1.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn half_filled_square_with_quadrants() {
        let grid = PhaseSpaceGrid::unit_torus(8);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.5).unwrap();
        let q = PhasePartition::quadrants(&grid).unwrap();
        let r = classical_obs_entropy(&rho, &q, &grid).unwrap();
        assert!((r.total + LN_2).abs() < 1e-14);
        assert!((gibbs_entropy(&rho, &grid).unwrap() + LN_2).abs() < 1e-14);
    }

    #[test]
    fn uniform_density_any_partition_is_ln_total_volume() {
        let grid = PhaseSpaceGrid::new(vec![Axis { lo: 0.0, hi: 2.0, cells: 4, periodic: true }, Axis::unit(4, true)], 1.0)
            .unwrap();
        let rho = ClassicalDensity::uniform(16);
        for part in [PhasePartition::quadrants(&grid).unwrap(), PhasePartition::fine_graining(16), PhasePartition::trivial(16)] {
            let r = classical_obs_entropy(&rho, &part, &grid).unwrap();
            assert!((r.total - 2f64.ln()).abs() < 1e-14);
        }
        assert!((gibbs_entropy(&rho, &grid).unwrap() - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn point_mass_gibbs_is_ln_cell_volume() {
        let grid = PhaseSpaceGrid::unit_torus(4);
        let rho = ClassicalDensity::point_mass(16, 5);
        assert!((gibbs_entropy(&rho, &grid).unwrap() - (1.0f64 / 16.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn fine_graining_reproduces_gibbs_bitwise() {
        let grid = PhaseSpaceGrid::unit_torus(5);
        let raw: Vec<f64> = (0..25).map(|i| ((i * 7) % 11) as f64 + 0.5).collect();
        let total: f64 = raw.iter().sum();
        let rho = ClassicalDensity::new(raw.iter().map(|w| w / total).collect()).unwrap();
        let a = classical_obs_entropy(&rho, &PhasePartition::fine_graining(25), &grid).unwrap().total;
        let b = gibbs_entropy(&rho, &grid).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn level_set_partition_gives_gibbs() {
        let grid = PhaseSpaceGrid::unit_torus(4);
        let w = [0.1, 0.1, 0.05, 0.05, 0.1, 0.0, 0.0, 0.1, 0.05, 0.05, 0.1, 0.1, 0.0, 0.05, 0.05, 0.1];
        let rho = ClassicalDensity::new(w.to_vec()).unwrap();
        let part = PhasePartition::density_level_sets(&rho, 1e-9);
        assert_eq!(part.num_macrostates(), 3);
        let s = classical_obs_entropy(&rho, &part, &grid).unwrap().total;
        assert!((s - gibbs_entropy(&rho, &grid).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let grid = PhaseSpaceGrid::unit_torus(4);
        let err = classical_obs_entropy(&ClassicalDensity::uniform(15), &PhasePartition::trivial(16), &grid).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn chi_indicators_reduce_to_partition() {
        let grid = PhaseSpaceGrid::unit_torus(6);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.5 && x[1] < 0.7).unwrap();
        let q = PhasePartition::quadrants(&grid).unwrap();
        let a = classical_chi_entropy(&rho, &ChiSet::indicators(&q), &grid).unwrap().total;
        let b = classical_obs_entropy(&rho, &q, &grid).unwrap().total;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn flat_chi_pair_gives_ln_total_volume() {
        let grid = PhaseSpaceGrid::new(vec![Axis { lo: 0.0, hi: 3.0, cells: 3, periodic: false }, Axis::unit(3, false)], 1.0)
            .unwrap();
        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let chi = ChiSet::new(vec![vec![s; 9], vec![s; 9]], &Tolerances::default()).unwrap();
        let rho = ClassicalDensity::point_mass(9, 4);
        let r = classical_chi_entropy(&rho, &chi, &grid).unwrap();
        assert!((r.total - 3f64.ln()).abs() < 1e-14);
        assert!(r.volumes.iter().all(|&v| (v - 1.5).abs() < 1e-14));
    }

    #[test]
    fn unnormalized_chi_is_rejected() {
        let bad = vec![vec![Complex64::new(1.0, 0.0); 4], vec![Complex64::new(0.1, 0.0); 4]];
        assert!(matches!(ChiSet::new(bad, &Tolerances::default()), Err(Error::NotNormalizedChi { cell: 0, .. })));
    }

    #[test]
    fn smoothed_indicators_lie_between_sharp_and_maximal() {
        let n = 32;
        let grid = PhaseSpaceGrid::unit_torus(n);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.5).unwrap();
        // Left/right membership smoothed with a Gaussian of width 0.05 in x.
        let sigma: f64 = 0.05;
        let left: Vec<f64> = (0..grid.num_cells())
            .map(|c| {
                let x = grid.cell_center(c)[0];
                let d = (x - 0.25).abs().min(1.0 - (x - 0.25).abs());
                // Smooth step: weight of being within 0.25 of the left-half centre.
                let z = (d - 0.25) / sigma;
                0.5 * libm_erfc(z / std::f64::consts::SQRT_2)
            })
            .collect();
        let chi = ChiSet::new(
            vec![
                left.iter().map(|&l| Complex64::new(l.sqrt(), 0.0)).collect(),
                left.iter().map(|&l| Complex64::new((1.0 - l).sqrt(), 0.0)).collect(),
            ],
            &Tolerances::default(),
        )
        .unwrap();
        let halves = PhasePartition::from_fn(&grid, |x| usize::from(x[0] >= 0.5));
        let sharp = classical_obs_entropy(&rho, &halves, &grid).unwrap().total;
        let smooth = classical_chi_entropy(&rho, &chi, &grid).unwrap().total;
        assert!((sharp + LN_2).abs() < 1e-12);
        assert!(smooth > sharp && smooth < 0.0, "{smooth}");
    }

    // erfc via the Abramowitz-Stegun 7.1.26 rational approximation (|err| < 1.5e-7).
    fn libm_erfc(x: f64) -> f64 {
        let t = 1.0 / (1.0 + 0.327_591_1 * x.abs());
        let poly = t * (0.254_829_592 + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
        let e = poly * (-x * x).exp();
        if x >= 0.0 {
            e
        } else {
            2.0 - e
        }
    }

    #[test]
    fn local_partition_of_two_particles() {
        // Two subsystems, each a 2x2 phase-space grid.
        let grid = PhaseSpaceGrid::new(vec![Axis::unit(2, false); 4], 1.0).unwrap();
        let halves = PhasePartition::new(&[0, 0, 1, 1]);
        let p = classical_local_partition(&grid, &[2, 2], &[halves.clone(), halves.clone()]).unwrap();
        assert_eq!(p.num_macrostates(), 4);

        let lifted = classical_local_partition(&grid, &[2, 2], &[PhasePartition::trivial(4), halves.clone()]).unwrap();
        assert_eq!(lifted.num_macrostates(), 2);
        assert_eq!(&lifted.labels()[..4], &[0, 0, 1, 1]);

        assert!(matches!(
            classical_local_partition(&grid, &[3, 2], &[halves.clone(), halves.clone()]),
            Err(Error::NonProductGrid(_))
        ));
    }

    #[test]
    fn correlated_density_has_mutual_information() {
        let grid = PhaseSpaceGrid::new(vec![Axis::unit(4, false), Axis::unit(4, false)], 1.0).unwrap();
        let diag: Vec<f64> = (0..16).map(|c| if c / 4 == c % 4 { 0.25 } else { 0.0 }).collect();
        let rho = ClassicalDensity::new(diag).unwrap();
        let fine = PhasePartition::fine_graining(4);
        let d = classical_local_decomposition(&rho, &grid, &[1, 1], &[fine.clone(), fine]).unwrap();
        assert!((d.mutual_information - 4f64.ln()).abs() < 1e-12);
        assert!((d.reconstructed_total() - d.total).abs() < 1e-12);
    }

    #[test]
    fn set_partition_counts_are_bell_numbers() {
        let counts: Vec<usize> = (0..7).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn classical_local_infimum_is_gibbs() {
        let grid = PhaseSpaceGrid::new(vec![Axis::unit(4, false), Axis::unit(4, false)], 1.0).unwrap();
        let raw: Vec<f64> = (0..16).map(|i| ((i * 5 + 3) % 7) as f64).collect();
        let total: f64 = raw.iter().sum();
        let rho = ClassicalDensity::new(raw.iter().map(|w| w / total).collect()).unwrap();
        let inf = local_infimum_exhaustive(&rho, &grid, &[1, 1]).unwrap();
        assert!((inf - gibbs_entropy(&rho, &grid).unwrap()).abs() < 1e-9);
    }
}

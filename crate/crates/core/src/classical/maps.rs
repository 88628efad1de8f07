//! Area-preserving maps of the unit torus acting on cell densities.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ClassicalDensity, PhaseSpaceGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum AreaPreservingMap {
    /// `(x, y) ↦ (2x mod 1, (y + ⌊2x⌋)/2)`.
    Baker,
    /// Chirikov map `p' = p + k/(2π) sin 2πq`, `q' = q + p'` (mod 1).
    Standard { k: f64 },
    /// Arnold cat map `(x, y) ↦ (x + y, x + 2y)` (mod 1).
    Cat,
}

impl AreaPreservingMap {
    /// Continuous inverse on the unit torus.
    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            AreaPreservingMap::Baker => {
                if y < 0.5 {
                    (0.5 * x, 2.0 * y)
                } else {
                    (0.5 * (x + 1.0), 2.0 * y - 1.0)
                }
            }
            AreaPreservingMap::Standard { k } => {
                let q = (x - y).rem_euclid(1.0);
                let p = (y - k / TAU * (TAU * q).sin()).rem_euclid(1.0);
                (q, p)
            }
            AreaPreservingMap::Cat => ((2.0 * x - y).rem_euclid(1.0), (y - x).rem_euclid(1.0)),
        }
    }

    pub fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            AreaPreservingMap::Baker => {
                let h = (2.0 * x).floor().min(1.0);
                ((2.0 * x).rem_euclid(1.0), 0.5 * (y + h))
            }
            AreaPreservingMap::Standard { k } => {
                let p = (y + k / TAU * (TAU * x).sin()).rem_euclid(1.0);
                ((x + p).rem_euclid(1.0), p)
            }
            AreaPreservingMap::Cat => ((x + y).rem_euclid(1.0), (x + 2.0 * y).rem_euclid(1.0)),
        }
    }
}

/// How cell masses are moved by one map step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Transport {
    /// Exact cell permutation where the map admits one on the grid,
    /// otherwise supersampling with `s = 4`.
    #[default]
    Auto,
    /// Each target cell averages the source cells of `s × s` pre-image
    /// sample points; total mass is renormalized afterwards.
    Supersampled { s: usize },
    /// Exact bijection of cells (baker on `2^m × 2^m`, cat on `N × N`).
    CellPermutation,
}

/// Precomputed one-step transport on a fixed grid.
#[derive(Debug, Clone)]
pub enum Transporter {
    /// `target[perm[c]] = source[c]`.
    Permutation(Vec<usize>),
    /// Source cells (with repetition) averaged into each target cell.
    Gather { sources: Vec<Vec<usize>> },
}

fn check_torus(grid: &PhaseSpaceGrid) -> Result<(usize, usize)> {
    let axes = grid.axes();
    if axes.len() != 2 || axes.iter().any(|a| a.lo != 0.0 || a.hi != 1.0 || !a.periodic) {
        return Err(Error::IncompatibleGrid("maps act on a two-axis periodic unit torus".into()));
    }
    Ok((axes[0].cells, axes[1].cells))
}

fn baker_permutation(n: usize) -> Option<Vec<usize>> {
    if !n.is_power_of_two() || n < 2 {
        return None;
    }
    let m = n.trailing_zeros();
    Some(
        (0..n * n)
            .map(|cell| {
                let (i, j) = (cell / n, cell % n);
                // x loses its leading bit to y and gains y's trailing bit.
                let i2 = ((i << 1) & (n - 1)) | (j & 1);
                let j2 = ((i >> (m - 1)) << (m - 1)) | (j >> 1);
                i2 * n + j2
            })
            .collect(),
    )
}

fn cat_permutation(n: usize) -> Vec<usize> {
    (0..n * n)
        .map(|cell| {
            let (i, j) = (cell / n, cell % n);
            ((i + j) % n) * n + (i + 2 * j) % n
        })
        .collect()
}

impl Transporter {
    pub fn new(map: AreaPreservingMap, grid: &PhaseSpaceGrid, transport: Transport) -> Result<Self> {
        let (nx, ny) = check_torus(grid)?;
        let permutation = || -> Option<Vec<usize>> {
            if nx != ny {
                return None;
            }
            match map {
                AreaPreservingMap::Baker => baker_permutation(nx),
                AreaPreservingMap::Cat => Some(cat_permutation(nx)),
                AreaPreservingMap::Standard { .. } => None,
            }
        };
        match transport {
            Transport::CellPermutation => permutation().map(Transporter::Permutation).ok_or_else(|| {
                Error::IncompatibleGrid(format!("{map:?} is not a cell permutation on a {nx}x{ny} grid"))
            }),
            Transport::Auto => Ok(match permutation() {
                Some(p) => Transporter::Permutation(p),
                None => Self::supersampled(map, nx, ny, 4),
            }),
            Transport::Supersampled { s } if s > 0 => Ok(Self::supersampled(map, nx, ny, s)),
            Transport::Supersampled { .. } => Err(Error::InvalidInput("supersampling factor must be positive".into())),
        }
    }

    fn supersampled(map: AreaPreservingMap, nx: usize, ny: usize, s: usize) -> Self {
        let cell_of = |x: f64, y: f64| {
            let i = ((x * nx as f64) as usize).min(nx - 1);
            let j = ((y * ny as f64) as usize).min(ny - 1);
            i * ny + j
        };
        let sources = (0..nx * ny)
            .map(|cell| {
                let (i, j) = (cell / ny, cell % ny);
                let mut src = Vec::with_capacity(s * s);
                for a in 0..s {
                    for b in 0..s {
                        let x = (i as f64 + (a as f64 + 0.5) / s as f64) / nx as f64;
                        let y = (j as f64 + (b as f64 + 0.5) / s as f64) / ny as f64;
                        let (x0, y0) = map.inverse(x, y);
                        src.push(cell_of(x0, y0));
                    }
                }
                src
            })
            .collect();
        Transporter::Gather { sources }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Transporter::Permutation(_))
    }

    pub fn step(&self, rho: &ClassicalDensity) -> ClassicalDensity {
        let w = rho.weights();
        match self {
            Transporter::Permutation(perm) => {
                let mut out = vec![0.0; w.len()];
                for (c, &t) in perm.iter().enumerate() {
                    out[t] = w[c];
                }
                ClassicalDensity::from_weights_unchecked(out)
            }
            Transporter::Gather { sources } => {
                let mut out: Vec<f64> = sources
                    .iter()
                    .map(|src| src.iter().map(|&c| w[c]).sum::<f64>() / src.len() as f64)
                    .collect();
                let before: f64 = w.iter().sum();
                let after: f64 = out.iter().sum();
                if after > 0.0 {
                    out.iter_mut().for_each(|x| *x *= before / after);
                }
                ClassicalDensity::from_weights_unchecked(out)
            }
        }
    }
}

/// Applies `steps` iterations of `map` to `rho`.
pub fn evolve_map(
    rho: &ClassicalDensity,
    grid: &PhaseSpaceGrid,
    map: AreaPreservingMap,
    steps: usize,
    transport: Transport,
) -> Result<ClassicalDensity> {
    if rho.len() != grid.num_cells() {
        return Err(Error::ShapeMismatch(format!("density has {} cells, grid has {}", rho.len(), grid.num_cells())));
    }
    let t = Transporter::new(map, grid, transport)?;
    let mut cur = rho.clone();
    for _ in 0..steps {
        cur = t.step(&cur);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{gibbs_entropy, Axis};

    #[test]
    fn inverses_undo_forward_maps() {
        for map in [AreaPreservingMap::Baker, AreaPreservingMap::Standard { k: 1.3 }, AreaPreservingMap::Cat] {
            for &(x, y) in &[(0.1, 0.2), (0.73, 0.41), (0.5001, 0.9)] {
                let (a, b) = map.forward(x, y);
                let (x2, y2) = map.inverse(a, b);
                assert!((x - x2).abs() < 1e-12 && (y - y2).abs() < 1e-12, "{map:?}");
            }
        }
    }

    #[test]
    fn permutations_are_bijections_matching_the_continuous_map() {
        for n in [2usize, 8, 16] {
            let grid = PhaseSpaceGrid::unit_torus(n);
            for map in [AreaPreservingMap::Baker, AreaPreservingMap::Cat] {
                let Transporter::Permutation(p) = Transporter::new(map, &grid, Transport::CellPermutation).unwrap()
                else {
                    panic!()
                };
                let mut seen = p.clone();
                seen.sort_unstable();
                assert_eq!(seen, (0..n * n).collect::<Vec<_>>());
                // Lower-left corners move with the continuous map (baker up to the
                // bit shifted in from y, which lies below the grid resolution).
                if map == AreaPreservingMap::Cat {
                    for (c, &t) in p.iter().enumerate() {
                        let (x, y) = map.forward((c / n) as f64 / n as f64, (c % n) as f64 / n as f64);
                        let expect = ((x * n as f64).round() as usize % n) * n + (y * n as f64).round() as usize % n;
                        assert_eq!(t, expect);
                    }
                }
            }
        }
    }

    #[test]
    fn baker_permutation_follows_stripes() {
        // Mass on the left half becomes the lower half after one step.
        let grid = PhaseSpaceGrid::unit_torus(8);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.5).unwrap();
        let out = evolve_map(&rho, &grid, AreaPreservingMap::Baker, 1, Transport::Auto).unwrap();
        for c in 0..64 {
            let y = grid.cell_center(c)[1];
            assert_eq!(out.weights()[c] > 0.0, y < 0.5);
        }
    }

    #[test]
    fn permutation_transport_conserves_gibbs_exactly() {
        let grid = PhaseSpaceGrid::unit_torus(16);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.3 && x[1] < 0.6).unwrap();
        let s0 = gibbs_entropy(&rho, &grid).unwrap();
        for map in [AreaPreservingMap::Baker, AreaPreservingMap::Cat] {
            let out = evolve_map(&rho, &grid, map, 13, Transport::Auto).unwrap();
            assert_eq!(gibbs_entropy(&out, &grid).unwrap(), s0);
        }
    }

    #[test]
    fn supersampled_standard_map_conserves_mass() {
        let grid = PhaseSpaceGrid::unit_torus(32);
        let rho = ClassicalDensity::uniform_where(&grid, |x| x[0] < 0.25).unwrap();
        let out = evolve_map(&rho, &grid, AreaPreservingMap::Standard { k: 2.0 }, 10, Transport::Auto).unwrap();
        assert!((out.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_torus_grids_are_rejected() {
        let grid = PhaseSpaceGrid::new(vec![Axis::unit(4, false), Axis::unit(4, false)], 1.0).unwrap();
        assert!(matches!(
            Transporter::new(AreaPreservingMap::Cat, &grid, Transport::Auto),
            Err(Error::IncompatibleGrid(_))
        ));
        let odd = PhaseSpaceGrid::unit_torus(6);
        assert!(Transporter::new(AreaPreservingMap::Baker, &odd, Transport::CellPermutation).is_err());
    }
}

//! Phase-portrait data: the energy surface on a `(z, φ)` mesh, iso-energy
//! contours, and separatrix levels.
//!
//! Output lives on the rectangle `[−1, 1] × [0, 2π]`. The physical phase
//! space is a sphere: the φ = 0 and φ = 2π edges are the same line and each
//! pole row is a single point. Contour polylines are reported on the
//! rectangle, while component counts glue the seam and collapse the poles.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoints::{Kind, StationaryPoint};
use crate::model::{energy_at, ReducedParams};

pub const MIN_GRID_SIDE: usize = 16;
pub const DEFAULT_GRID_SIDE: usize = 512;
/// Polyline endpoints closer than this are treated as the same vertex.
const CLOSURE_TOLERANCE: f64 = 1e-9;
const SEPARATRIX_DEDUP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGrid {
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
    /// Row-major over z, then φ.
    pub values: Vec<f64>,
}

impl EnergyGrid {
    pub fn n_z(&self) -> usize {
        self.z.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phi.len() + j]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Samples H at `n_z × n_phi` nodes, pole rows and both φ edges included.
pub fn sample_grid(params: &ReducedParams, n_z: usize, n_phi: usize, t: f64) -> Result<EnergyGrid> {
    if n_z < MIN_GRID_SIDE || n_phi < MIN_GRID_SIDE {
        return Err(Error::InvalidParams(format!(
            "grid must be at least {MIN_GRID_SIDE} × {MIN_GRID_SIDE}"
        )));
    }
    let z = linspace(-1.0, 1.0, n_z);
    let phi = linspace(0.0, TAU, n_phi);
    let mut values = vec![0.0; n_z * n_phi];
    values
        .par_chunks_mut(n_phi)
        .zip(z.par_iter())
        .for_each(|(row, &zi)| {
            for (v, &pj) in row.iter_mut().zip(&phi) {
                *v = energy_at(zi, pj, params, t);
            }
        });
    Ok(EnergyGrid { z, phi, values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    /// Vertices as `(z, φ)`. Closed polylines repeat their first vertex.
    pub points: Vec<[f64; 2]>,
    pub closed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourLevel {
    pub level: f64,
    /// Level outside the sampled energy range.
    pub empty: bool,
    pub polylines: Vec<Polyline>,
    /// Connected components on the sphere.
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSet {
    pub levels: Vec<ContourLevel>,
}

/// Marching-squares contours for each level. Levels outside the data range
/// are marked empty.
pub fn extract_contours(grid: &EnergyGrid, levels: &[f64]) -> ContourSet {
    let levels = levels
        .par_iter()
        .map(|&level| match contour_level(grid, level) {
            Ok(traced) => ContourLevel {
                level,
                empty: false,
                components: traced.components,
                polylines: traced.polylines,
            },
            Err(_) => ContourLevel {
                level,
                empty: true,
                polylines: Vec::new(),
                components: 0,
            },
        })
        .collect();
    ContourSet { levels }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracedLevel {
    pub polylines: Vec<Polyline>,
    pub components: usize,
}

/// Contours of a single level.
pub fn contour_level(grid: &EnergyGrid, level: f64) -> Result<TracedLevel> {
    let (min, max) = (grid.min(), grid.max());
    if !(level >= min && level <= max) {
        return Err(Error::EmptyLevel { level, min, max });
    }
    let segments = march(grid, level);
    let chains = stitch(&segments);
    let components = sphere_components(grid, &chains);
    let polylines = chains
        .iter()
        .map(|chain| {
            let mut points: Vec<[f64; 2]> = chain
                .edges
                .iter()
                .map(|&e| crossing_point(grid, e, level))
                .collect();
            let mut closed = chain.closed;
            if !closed && points.len() > 2 {
                let (a, b) = (points[0], points[points.len() - 1]);
                closed = (a[0] - b[0]).hypot(a[1] - b[1]) <= CLOSURE_TOLERANCE;
            }
            if chain.closed {
                points.push(points[0]);
            }
            Polyline { points, closed }
        })
        .collect();
    Ok(TracedLevel {
        polylines,
        components,
    })
}

/// Grid edge: along z from node `(i, j)` to `(i+1, j)`, or along φ from
/// `(i, j)` to `(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    AlongZ(usize, usize),
    AlongPhi(usize, usize),
}

fn edge_nodes(e: Edge) -> ((usize, usize), (usize, usize)) {
    match e {
        Edge::AlongZ(i, j) => ((i, j), (i + 1, j)),
        Edge::AlongPhi(i, j) => ((i, j), (i, j + 1)),
    }
}

fn crossing_point(grid: &EnergyGrid, e: Edge, level: f64) -> [f64; 2] {
    let ((i0, j0), (i1, j1)) = edge_nodes(e);
    let (va, vb) = (grid.value(i0, j0), grid.value(i1, j1));
    let s = if vb == va {
        0.5
    } else {
        ((level - va) / (vb - va)).clamp(0.0, 1.0)
    };
    [
        grid.z[i0] + s * (grid.z[i1] - grid.z[i0]),
        grid.phi[j0] + s * (grid.phi[j1] - grid.phi[j0]),
    ]
}

fn march(grid: &EnergyGrid, level: f64) -> Vec<(Edge, Edge)> {
    let mut segments = Vec::new();
    for i in 0..grid.n_z() - 1 {
        for j in 0..grid.n_phi() - 1 {
            let v = [
                grid.value(i, j),
                grid.value(i + 1, j),
                grid.value(i + 1, j + 1),
                grid.value(i, j + 1),
            ];
            let above = v.map(|x| x >= level);
            // corner k sits between edges[k] and edges[(k + 3) % 4]
            let edges = [
                Edge::AlongZ(i, j),
                Edge::AlongPhi(i + 1, j),
                Edge::AlongZ(i, j + 1),
                Edge::AlongPhi(i, j),
            ];
            let cut: Vec<Edge> = (0..4)
                .filter(|&k| above[k] != above[(k + 1) % 4])
                .map(|k| edges[k])
                .collect();
            match cut.len() {
                0 => {}
                2 => segments.push((cut[0], cut[1])),
                _ => {
                    // saddle cell: the bilinear centre value decides which
                    // diagonal pair stays connected
                    let center_above = v.iter().sum::<f64>() / 4.0 >= level;
                    for k in 0..4 {
                        if above[k] != center_above {
                            segments.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
            }
        }
    }
    segments
}

struct Chain {
    edges: Vec<Edge>,
    closed: bool,
}

fn stitch(segments: &[(Edge, Edge)]) -> Vec<Chain> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(k);
        incident.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start_seg: usize, start_edge: Edge, used: &mut Vec<bool>| -> Chain {
        let mut edges = vec![start_edge];
        let mut seg = start_seg;
        let mut at = start_edge;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            if next == start_edge {
                return Chain {
                    edges,
                    closed: true,
                };
            }
            edges.push(next);
            at = next;
            match incident[&next].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => {
                    return Chain {
                        edges,
                        closed: false,
                    }
                }
            }
        }
    };

    // open chains start at edges touched by a single segment
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        for end in [segments[k].0, segments[k].1] {
            if !used[k] && incident[&end].len() == 1 {
                chains.push(walk(k, end, &mut used));
            }
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            chains.push(walk(k, segments[k].0, &mut used));
        }
    }
    chains
}

/// Number of connected contour components after gluing φ = 0 to φ = 2π and
/// collapsing each pole row to a point.
fn sphere_components(grid: &EnergyGrid, chains: &[Chain]) -> usize {
    #[derive(Hash, PartialEq, Eq)]
    enum Glue {
        Edge(Edge),
        SouthPole,
        NorthPole,
    }
    let last_z = grid.n_z() - 1;
    let last_phi = grid.n_phi() - 1;
    let glue = |e: Edge| match e {
        Edge::AlongZ(i, j) if j == last_phi => Glue::Edge(Edge::AlongZ(i, 0)),
        Edge::AlongPhi(0, _) => Glue::SouthPole,
        Edge::AlongPhi(i, _) if i == last_z => Glue::NorthPole,
        other => Glue::Edge(other),
    };

    let mut parent: Vec<usize> = (0..chains.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<Glue, usize> = HashMap::new();
    for (k, chain) in chains.iter().enumerate() {
        if chain.closed {
            continue;
        }
        for &end in [chain.edges[0], chain.edges[chain.edges.len() - 1]].iter() {
            match owner.entry(glue(end)) {
                std::collections::hash_map::Entry::Occupied(o) => {
                    let (a, b) = (find(&mut parent, k), find(&mut parent, *o.get()));
                    parent[a] = b;
                }
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(k);
                }
            }
        }
    }
    (0..chains.len())
        .filter(|&k| find(&mut parent, k) == k)
        .count()
}

/// Sorted, deduplicated energies of the saddle points.
pub fn separatrix_levels(points: &[StationaryPoint]) -> Vec<f64> {
    let mut energies: Vec<f64> = points
        .iter()
        .filter(|p| p.kind == Kind::Saddle)
        .map(|p| p.energy)
        .collect();
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|b, a| (*b - *a).abs() <= SEPARATRIX_DEDUP);
    energies
}

/// Grid quantiles `k/(n+1)` plus every stationary-point energy, sorted.
pub fn default_levels(grid: &EnergyGrid, points: &[StationaryPoint], quantiles: usize) -> Vec<f64> {
    let mut sorted = grid.values.clone();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<f64> = (1..=quantiles)
        .map(|k| {
            let idx = k * (sorted.len() - 1) / (quantiles + 1);
            sorted[idx]
        })
        .collect();
    levels.extend(points.iter().map(|p| p.energy));
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|b, a| (*b - *a).abs() <= SEPARATRIX_DEDUP);
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedpoints::{find_stationary_points, uncoupled_analytic, DEFAULT_GRID_N};
    use std::f64::consts::PI;

    fn coupled() -> ReducedParams {
        ReducedParams::new(3.0, 0.02, -0.65, 0.07).unwrap()
    }

    fn bilinear(grid: &EnergyGrid, z: f64, phi: f64) -> f64 {
        let dz = grid.z[1] - grid.z[0];
        let dp = grid.phi[1] - grid.phi[0];
        let i = (((z - grid.z[0]) / dz).floor() as usize).min(grid.n_z() - 2);
        let j = (((phi - grid.phi[0]) / dp).floor() as usize).min(grid.n_phi() - 2);
        let u = (z - grid.z[i]) / dz;
        let w = (phi - grid.phi[j]) / dp;
        (1.0 - u) * (1.0 - w) * grid.value(i, j)
            + u * (1.0 - w) * grid.value(i + 1, j)
            + u * w * grid.value(i + 1, j + 1)
            + (1.0 - u) * w * grid.value(i, j + 1)
    }

    #[test]
    fn grid_shape_and_periodicity() {
        let g = sample_grid(&coupled(), 64, 48, 0.0).unwrap();
        assert_eq!(g.values.len(), 64 * 48);
        assert_eq!(g.phi[47], TAU);
        for i in 0..64 {
            assert!((g.value(i, 0) - g.value(i, 47)).abs() < 1e-12);
        }
        assert!(g.values.iter().all(|v| v.is_finite()));
        assert!(sample_grid(&coupled(), 8, 64, 0.0).is_err());
    }

    #[test]
    fn uncoupled_grid_is_even_in_z() {
        let g = sample_grid(&ReducedParams::uncoupled(3.0).unwrap(), 65, 32, 0.0).unwrap();
        for i in 0..65 {
            for j in 0..32 {
                assert_eq!(g.value(i, j), g.value(64 - i, j));
            }
        }
    }

    #[test]
    fn grid_minimum_approaches_global_minimum() {
        let pts = find_stationary_points(&coupled(), DEFAULT_GRID_N).unwrap();
        let global = pts.iter().map(|p| p.energy).fold(f64::INFINITY, f64::min);
        let mut previous = f64::INFINITY;
        for n in [64, 128, 256, 512] {
            let gap = sample_grid(&coupled(), n + 1, n, 0.0).unwrap().min() - global;
            assert!(gap >= -1e-12);
            assert!(gap <= previous + 1e-12);
            previous = gap;
        }
        assert!(previous < 1e-4);
    }

    #[test]
    fn vertices_lie_on_level() {
        let g = sample_grid(&coupled(), 64, 64, 0.0).unwrap();
        for level in [-0.4, 0.3, 1.0, 1.5] {
            let traced = contour_level(&g, level).unwrap();
            assert!(!traced.polylines.is_empty());
            for pl in &traced.polylines {
                for p in &pl.points {
                    assert!((bilinear(&g, p[0], p[1]) - level).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn level_below_range_is_empty() {
        let g = sample_grid(&coupled(), 32, 32, 0.0).unwrap();
        assert!(matches!(
            contour_level(&g, g.min() - 1.0),
            Err(Error::EmptyLevel { .. })
        ));
        let set = extract_contours(&g, &[g.min() - 1.0, 0.0]);
        assert!(set.levels[0].empty);
        assert!(!set.levels[1].empty);
    }

    #[test]
    fn single_loop_below_maximum() {
        // uncoupled r < 1: one maximum at (0, π), interior to the rectangle
        let p = ReducedParams::uncoupled(0.5).unwrap();
        let g = sample_grid(&p, 129, 128, 0.0).unwrap();
        let traced = contour_level(&g, g.max() - 1e-2).unwrap();
        assert_eq!(traced.polylines.len(), 1);
        assert!(traced.polylines[0].closed);
        assert_eq!(traced.components, 1);
        let centre = traced.polylines[0]
            .points
            .iter()
            .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        let n = traced.polylines[0].points.len() as f64;
        assert!((centre[1] / n - PI).abs() < 0.05);
    }

    #[test]
    fn loop_around_minimum_glues_across_seam() {
        let p = ReducedParams::uncoupled(0.5).unwrap();
        let g = sample_grid(&p, 129, 128, 0.0).unwrap();
        let traced = contour_level(&g, g.min() + 1e-2).unwrap();
        // split by the φ = 0 seam on the rectangle, one loop on the sphere
        assert_eq!(traced.polylines.len(), 2);
        assert_eq!(traced.components, 1);
    }

    #[test]
    fn separatrix_energies() {
        let strong = uncoupled_analytic(3.0).unwrap();
        assert_eq!(separatrix_levels(&strong.points), vec![1.0]);
        let weak = uncoupled_analytic(0.5).unwrap();
        assert!(separatrix_levels(&weak.points).is_empty());
        let pts = find_stationary_points(&coupled(), DEFAULT_GRID_N).unwrap();
        let levels = separatrix_levels(&pts);
        assert_eq!(levels.len(), 3);
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
        let mut doubled = strong.points.clone();
        doubled.extend(strong.points.iter().cloned());
        assert_eq!(separatrix_levels(&doubled), vec![1.0]);
    }

    #[test]
    fn default_levels_include_stationary_energies() {
        let pts = find_stationary_points(&coupled(), DEFAULT_GRID_N).unwrap();
        let g = sample_grid(&coupled(), 64, 64, 0.0).unwrap();
        let levels = default_levels(&g, &pts, 10);
        for p in &pts {
            assert!(levels.contains(&p.energy));
        }
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }
}

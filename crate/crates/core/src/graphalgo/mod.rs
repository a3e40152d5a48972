//! Metric and random-walk algorithms on built graphs.
//!
//! Every routine treats a double edge uniformly: it contributes 2 to the
//! degree, twice the transition weight, and conductance 2. Graph distances
//! ignore multiplicity.

mod amg;
mod heat;
mod resistance;
mod srw;
mod weighted;

use std::collections::VecDeque;

use serde::Serialize;

use crate::mapbuild::MatedCrtGraph;
use crate::{Error, Result};

pub use heat::{return_probability, HeatFlow, DEFAULT_MAX_BALL};
pub use resistance::{effective_resistance, effective_resistance_with, CgOptions, Preconditioner, ResistanceResult};
pub use srw::{geometric_checkpoints, srw_displacement, step_from, WalkTrace};
pub(crate) use weighted::{distances_within, neighbor_distances};
pub use weighted::{weighted_distance, weighted_distances_from, WeightVector};

/// Distance label of vertices beyond the BFS horizon.
pub const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallGrowthCurve {
    pub radii: Vec<u32>,
    /// `volumes[i]` is the number of vertices within distance `radii[i]`.
    pub volumes: Vec<u64>,
    pub root: u32,
}

pub(crate) fn check_vertex(graph: &MatedCrtGraph, v: u32) -> Result<()> {
    if (v as usize) < graph.m_cells() {
        Ok(())
    } else {
        Err(Error::invalid(format!("vertex {v} outside {} cells", graph.m_cells())))
    }
}

/// Unweighted distances from `root`, truncated at `r_max`.
pub fn bfs_distances(graph: &MatedCrtGraph, root: u32, r_max: u32) -> Vec<u32> {
    bfs_order(graph, root, r_max).0
}

/// Distance labels plus the visit order (non-decreasing distance).
pub(crate) fn bfs_order(graph: &MatedCrtGraph, root: u32, r_max: u32) -> (Vec<u32>, Vec<u32>) {
    let mut dist = vec![UNREACHED; graph.m_cells()];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    dist[root as usize] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let d = dist[v as usize];
        if d == r_max {
            continue;
        }
        for &u in graph.neighbors(v) {
            if dist[u as usize] == UNREACHED {
                dist[u as usize] = d + 1;
                queue.push_back(u);
            }
        }
    }
    (dist, order)
}

/// Ball volumes `#{v : dist(root, v) <= r}` for `r = 0..=r_max`, and the
/// distance labels (`UNREACHED` beyond `r_max`).
pub fn bfs_ball(graph: &MatedCrtGraph, root: u32, r_max: u32) -> Result<(BallGrowthCurve, Vec<u32>)> {
    check_vertex(graph, root)?;
    if r_max == UNREACHED {
        return Err(Error::invalid("r_max too large"));
    }
    let dist = bfs_distances(graph, root, r_max);
    let mut shell = vec![0u64; r_max as usize + 1];
    for &d in &dist {
        if d != UNREACHED {
            shell[d as usize] += 1;
        }
    }
    let mut volumes = Vec::with_capacity(shell.len());
    let mut acc = 0;
    for s in shell {
        acc += s;
        volumes.push(acc);
    }
    Ok((
        BallGrowthCurve {
            radii: (0..=r_max).collect(),
            volumes,
            root,
        },
        dist,
    ))
}

#[cfg(test)]
pub(crate) mod test_graphs {
    use crate::mapbuild::{build_fast, EdgeFlags, MatedCrtGraph};
    use crate::walkgen::{sample_walk, StepLaw};

    pub fn path(n: usize) -> MatedCrtGraph {
        let edges: Vec<_> = (1..n as u32).map(|v| (v - 1, v, EdgeFlags::all())).collect();
        MatedCrtGraph::from_edges(n, 1, 0, &edges).unwrap()
    }

    pub fn mated(cells: u64, seed: u64) -> MatedCrtGraph {
        let law = StepLaw::gaussian((8.0f64 / 3.0).sqrt()).unwrap();
        build_fast(&sample_walk(&law, cells, seed).unwrap(), 1).unwrap()
    }

    pub fn lattice(cells: u64, seed: u64) -> MatedCrtGraph {
        build_fast(&sample_walk(&StepLaw::uipt(), cells, seed).unwrap(), 1).unwrap()
    }
}

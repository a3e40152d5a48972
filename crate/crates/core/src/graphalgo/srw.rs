use rand::RngCore;
use serde::Serialize;

use super::{bfs_distances, check_vertex, UNREACHED};
use crate::mapbuild::MatedCrtGraph;
use crate::{seed, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkTrace {
    pub checkpoints: Vec<u64>,
    /// `max_displacement[i] = max_{1 <= j <= checkpoints[i]} dist(root, X_j)`.
    pub max_displacement: Vec<u32>,
    pub seed: u64,
}

/// Geometric grid of times in `[1, n]` with `per_decade` points per factor
/// of ten (rounded and deduplicated), always ending at `n`.
pub fn geometric_checkpoints(n: u64, per_decade: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    if n == 0 {
        return out;
    }
    let mut i = 0u32;
    loop {
        let t = 10f64.powf(i as f64 / per_decade as f64).round() as u64;
        if t >= n {
            break;
        }
        if out.last() != Some(&t) {
            out.push(t);
        }
        i += 1;
    }
    out.push(n);
    out
}

/// One step of the simple random walk from `v`; a double edge is taken with
/// twice the probability of a single one.
#[inline]
pub fn step_from<R: RngCore>(graph: &MatedCrtGraph, v: u32, rng: &mut R) -> u32 {
    let mut u = seed::below(rng, graph.degree(v) as u64) as u32;
    for (w, mult) in graph.weighted_neighbors(v) {
        if u < mult {
            return w;
        }
        u -= mult;
    }
    unreachable!("degree and neighbor multiplicities disagree")
}

/// Runs an `n_steps` simple random walk from `root` and records the running
/// maximum graph distance at geometric checkpoints. Distances are labelled
/// up to `horizon_r`; stepping beyond it is an error, never a truncation.
pub fn srw_displacement(
    graph: &MatedCrtGraph,
    root: u32,
    n_steps: u64,
    seed_value: u64,
    horizon_r: u32,
) -> Result<WalkTrace> {
    check_vertex(graph, root)?;
    let checkpoints = geometric_checkpoints(n_steps, 20);
    let mut trace = WalkTrace {
        checkpoints: Vec::with_capacity(checkpoints.len()),
        max_displacement: Vec::with_capacity(checkpoints.len()),
        seed: seed_value,
    };
    if n_steps == 0 {
        return Ok(trace);
    }
    if graph.degree(root) == 0 {
        return Err(Error::invalid("root is isolated"));
    }
    let dist = bfs_distances(graph, root, horizon_r);
    let mut rng = seed::rng(seed_value);
    let mut v = root;
    let mut best = 0u32;
    let mut next_cp = checkpoints.iter().peekable();
    for step in 1..=n_steps {
        v = step_from(graph, v, &mut rng);
        let d = dist[v as usize];
        if d == UNREACHED {
            return Err(Error::HorizonExceeded {
                step,
                horizon: horizon_r,
            });
        }
        best = best.max(d);
        if next_cp.peek() == Some(&&step) {
            next_cp.next();
            trace.checkpoints.push(step);
            trace.max_displacement.push(best);
        }
    }
    Ok(trace)
}

use rayon::prelude::*;
use serde::Serialize;

use crate::graphalgo::{distances_within, neighbor_distances, step_from, weighted_distances_from, WeightVector};
use crate::mapbuild::MatedCrtGraph;
use crate::{seed, Error, Result};

pub const MAX_EXACT_VERTICES: usize = 12;
pub const MAX_EXACT_STEPS: u32 = 6;

/// All-pairs tables are used up to this many vertices; larger graphs run
/// one Dijkstra per sampled start.
const ALL_PAIRS_LIMIT: usize = 2048;
const CHUNK: u64 = 1024;

/// `E[max_{m<=n} d(X_0, X_m)^2] / (n * E[d(X_0, X_1)^2])` for the
/// stationary simple random walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovTypeEstimate {
    pub n: u32,
    pub ratio: f64,
    /// Zero for exact enumeration.
    pub samples: u64,
    pub std_error: f64,
}

fn squared_distances(graph: &MatedCrtGraph, omega: &WeightVector) -> Result<Vec<Vec<f64>>> {
    (0..graph.m_cells() as u32)
        .map(|s| Ok(weighted_distances_from(graph, omega, s)?.into_iter().map(|d| d * d).collect()))
        .collect()
}

/// `sum over directed edge copies of d(u, v)^2`; dividing by `2|E|` gives
/// the one-step second moment under the stationary start.
fn one_step_sum(graph: &MatedCrtGraph, d2: impl Fn(u32, u32) -> f64) -> f64 {
    let mut acc = 0.0;
    for u in 0..graph.m_cells() as u32 {
        for (v, mult) in graph.weighted_neighbors(u) {
            acc += mult as f64 * d2(u, v);
        }
    }
    acc
}

fn check_common(graph: &MatedCrtGraph, omega: &WeightVector, n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if omega.len() != graph.m_cells() {
        return Err(Error::invalid(format!("{} weights for {} cells", omega.len(), graph.m_cells())));
    }
    graph.check_connected()
}

/// Exact ratio by enumerating every length-`n` trajectory.
///
/// Each trajectory is weighted by `prod mult_i / prod_{1<=i<n} deg(X_i)`,
/// which is `2|E|` times its stationary probability, so for `n = 1` the
/// numerator is accumulated in the same order as the denominator and the
/// ratio is exactly one.
pub fn markov_type_exact(graph: &MatedCrtGraph, omega: &WeightVector, n: u32) -> Result<MarkovTypeEstimate> {
    check_common(graph, omega, n)?;
    if graph.m_cells() > MAX_EXACT_VERTICES || n > MAX_EXACT_STEPS {
        return Err(Error::Capacity(format!(
            "exact enumeration supports at most {MAX_EXACT_VERTICES} vertices and {MAX_EXACT_STEPS} steps"
        )));
    }
    let d2 = squared_distances(graph, omega)?;
    let denom = one_step_sum(graph, |u, v| d2[u as usize][v as usize]);

    #[allow(clippy::too_many_arguments)]
    fn walk(g: &MatedCrtGraph, d2: &[f64], cur: u32, left: u32, first: bool, weight: f64, best: f64, acc: &mut f64) {
        if left == 0 {
            *acc += weight * best;
            return;
        }
        let scale = if first { 1.0 } else { 1.0 / g.degree(cur) as f64 };
        for (v, mult) in g.weighted_neighbors(cur) {
            let w = if first { mult as f64 } else { weight * mult as f64 * scale };
            walk(g, d2, v, left - 1, false, w, best.max(d2[v as usize]), acc);
        }
    }

    let mut numer = 0.0;
    for x0 in 0..graph.m_cells() as u32 {
        walk(graph, &d2[x0 as usize], x0, n, true, 1.0, 0.0, &mut numer);
    }
    Ok(MarkovTypeEstimate {
        n,
        ratio: numer / (n as f64 * denom),
        samples: 0,
        std_error: 0.0,
    })
}

/// Monte Carlo ratio from `samples` stationary-start walks. Samples are
/// split into fixed chunks, each drawing from its own ChaCha stream, so the
/// result does not depend on the number of worker threads.
pub fn markov_type_ratio(
    graph: &MatedCrtGraph,
    omega: &WeightVector,
    n: u32,
    samples: u64,
    seed_value: u64,
) -> Result<MarkovTypeEstimate> {
    check_common(graph, omega, n)?;
    if samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let table = if graph.m_cells() <= ALL_PAIRS_LIMIT {
        Some(squared_distances(graph, omega)?)
    } else {
        None
    };
    let denom = match &table {
        Some(d2) => one_step_sum(graph, |u, v| d2[u as usize][v as usize]),
        None => {
            let mut acc = 0.0;
            for u in 0..graph.m_cells() as u32 {
                let d = neighbor_distances(graph, omega, u);
                for ((_, mult), d) in graph.weighted_neighbors(u).zip(d) {
                    acc += mult as f64 * d * d;
                }
            }
            acc
        }
    };
    // No edge costs more than the largest weight, so an n-step walk stays
    // within weighted distance n * max(omega) of its start.
    let reach = n as f64 * omega.as_slice().iter().copied().fold(0.0, f64::max) * (1.0 + 1e-9);
    let two_e = 2 * graph.num_edges();
    let mut cumulative = Vec::with_capacity(graph.m_cells());
    let mut acc = 0u64;
    for &d in graph.degrees() {
        acc += d as u64;
        cumulative.push(acc);
    }

    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::rng_stream(seed_value, c);
            let count = CHUNK.min(samples - c * CHUNK);
            let (mut s, mut ss) = (0.0, 0.0);
            for _ in 0..count {
                let u = seed::below(&mut rng, two_e);
                let x0 = cumulative.partition_point(|&c| c <= u) as u32;
                let mut v = x0;
                let mut best = 0.0f64;
                match &table {
                    Some(d2) => {
                        let row = &d2[x0 as usize];
                        for _ in 0..n {
                            v = step_from(graph, v, &mut rng);
                            best = best.max(row[v as usize]);
                        }
                    }
                    None => {
                        let near = distances_within(graph, omega, x0, reach);
                        for _ in 0..n {
                            v = step_from(graph, v, &mut rng);
                            best = best.max(near[&v]);
                        }
                        best *= best;
                    }
                }
                s += best;
                ss += best * best;
            }
            (s, ss)
        })
        .collect();
    let (mut s, mut ss) = (0.0, 0.0);
    for (a, b) in partial {
        s += a;
        ss += b;
    }
    let m = samples as f64;
    let mean = s / m;
    let var = ((ss - m * mean * mean) / (m - 1.0)).max(0.0);
    let scale = n as f64 * denom / two_e as f64;
    Ok(MarkovTypeEstimate {
        n,
        ratio: mean / scale,
        samples,
        std_error: (var / m).sqrt() / scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphalgo::test_graphs::*;
    use crate::mapbuild::EdgeFlags;

    #[test]
    fn single_edge_is_one() {
        let g = path(2);
        for w in [vec![1.0, 1.0], vec![0.3, 7.0]] {
            let est = markov_type_exact(&g, &WeightVector::new(w).unwrap(), 1).unwrap();
            assert_eq!(est.ratio, 1.0);
        }
    }

    #[test]
    fn three_vertex_path_by_hand() {
        // Stationary law (1/4, 1/2, 1/4). Length-2 trajectories and their
        // max squared displacement: 0-1-0 (1/8, 1), 0-1-2 (1/8, 4),
        // 2-1-2 (1/8, 1), 2-1-0 (1/8, 4), 1-0-1 (1/4, 1), 1-2-1 (1/4, 1).
        // Numerator 14/8, one-step moment 1, so ratio 14/8 / 2 = 0.875.
        let est = markov_type_exact(&path(3), &WeightVector::unit(3), 2).unwrap();
        assert!((est.ratio - 0.875).abs() < 1e-15);
    }

    #[test]
    fn exact_limits_and_errors() {
        assert!(markov_type_exact(&path(13), &WeightVector::unit(13), 1).is_err());
        assert!(markov_type_exact(&path(3), &WeightVector::unit(3), 7).is_err());
        assert!(markov_type_exact(&path(3), &WeightVector::unit(3), 0).is_err());
        let split = MatedCrtGraph::from_edges(4, 1, 0, &[(0, 1, EdgeFlags::L), (2, 3, EdgeFlags::R)]).unwrap();
        assert!(matches!(
            markov_type_exact(&split, &WeightVector::unit(4), 1),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            markov_type_ratio(&split, &WeightVector::unit(4), 1, 10, 0),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let g = mated(300, 2);
        let w = WeightVector::unit(g.m_cells());
        let a = markov_type_ratio(&g, &w, 16, 5000, 9).unwrap();
        let b = markov_type_ratio(&g, &w, 16, 5000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.ratio > 0.0 && a.std_error > 0.0);
    }

    #[test]
    fn truncated_search_on_large_graphs() {
        let g = mated(3000, 5);
        let w = WeightVector::new((0..g.m_cells()).map(|v| 0.5 + (v % 3) as f64).collect()).unwrap();
        let one = markov_type_ratio(&g, &w, 1, 8000, 2).unwrap();
        assert!((one.ratio - 1.0).abs() < 4.0 * one.std_error);
        let many = markov_type_ratio(&g, &w, 12, 2000, 2).unwrap();
        assert!(many.ratio > 0.0 && many.ratio < 20.0);
    }

    #[test]
    fn monte_carlo_one_step_near_one() {
        let g = mated(300, 2);
        let est = markov_type_ratio(&g, &WeightVector::unit(g.m_cells()), 1, 20_000, 1).unwrap();
        assert!((est.ratio - 1.0).abs() < 4.0 * est.std_error + 1e-12);
    }
}

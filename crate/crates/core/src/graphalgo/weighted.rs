use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use super::check_vertex;
use crate::mapbuild::MatedCrtGraph;
use crate::{Error, Result};

/// Non-negative finite vertex weights `omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = omega.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid(format!("weight {w} at vertex {i} is not a finite non-negative number")));
        }
        Ok(Self(omega))
    }

    pub fn unit(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Entry {
    cost: f64,
    vertex: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_weights(graph: &MatedCrtGraph, omega: &WeightVector) -> Result<()> {
    if omega.len() != graph.m_cells() {
        return Err(Error::invalid(format!(
            "{} weights for {} cells",
            omega.len(),
            graph.m_cells()
        )));
    }
    Ok(())
}

/// Vertex-weighted distances from `source`: a path costs
/// `sum_i (omega(P(i)) + omega(P(i-1))) / 2`. Unreachable vertices get
/// `f64::INFINITY`.
pub fn weighted_distances_from(graph: &MatedCrtGraph, omega: &WeightVector, source: u32) -> Result<Vec<f64>> {
    check_vertex(graph, source)?;
    check_weights(graph, omega)?;
    let w = omega.as_slice();
    let mut dist = vec![f64::INFINITY; graph.m_cells()];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(Entry { cost: 0.0, vertex: source });
    while let Some(Entry { cost, vertex }) = heap.pop() {
        if cost > dist[vertex as usize] {
            continue;
        }
        for &u in graph.neighbors(vertex) {
            let next = cost + 0.5 * (w[vertex as usize] + w[u as usize]);
            if next < dist[u as usize] {
                dist[u as usize] = next;
                heap.push(Entry { cost: next, vertex: u });
            }
        }
    }
    Ok(dist)
}

/// Weighted distances from `source` to every vertex at cost at most
/// `bound`; vertices farther away are absent.
pub(crate) fn distances_within(graph: &MatedCrtGraph, omega: &WeightVector, source: u32, bound: f64) -> HashMap<u32, f64> {
    let w = omega.as_slice();
    let mut dist: HashMap<u32, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 0.0);
    heap.push(Entry { cost: 0.0, vertex: source });
    while let Some(Entry { cost, vertex }) = heap.pop() {
        if cost > dist[&vertex] {
            continue;
        }
        for &u in graph.neighbors(vertex) {
            let next = cost + 0.5 * (w[vertex as usize] + w[u as usize]);
            if next <= bound && dist.get(&u).is_none_or(|&d| next < d) {
                dist.insert(u, next);
                heap.push(Entry { cost: next, vertex: u });
            }
        }
    }
    dist
}

/// Weighted distances from `source` to each of its neighbors, in neighbor
/// order. The search stops once the cost exceeds the heaviest direct edge.
pub(crate) fn neighbor_distances(graph: &MatedCrtGraph, omega: &WeightVector, source: u32) -> Vec<f64> {
    let w = omega.as_slice();
    let bound = graph
        .neighbors(source)
        .iter()
        .map(|&u| 0.5 * (w[source as usize] + w[u as usize]))
        .fold(0.0, f64::max);
    let dist = distances_within(graph, omega, source, bound);
    graph.neighbors(source).iter().map(|u| dist[u]).collect()
}

pub fn weighted_distance(graph: &MatedCrtGraph, omega: &WeightVector, u: u32, v: u32) -> Result<f64> {
    check_vertex(graph, v)?;
    if u == v {
        check_vertex(graph, u)?;
        check_weights(graph, omega)?;
        return Ok(0.0);
    }
    let d = weighted_distances_from(graph, omega, u)?[v as usize];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Unreachable { from: u, target: v })
    }
}

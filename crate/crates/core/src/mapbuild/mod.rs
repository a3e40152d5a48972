//! Mated-CRT graphs on walk-time cells.
//!
//! Vertex `v` (0-based) is the cell covering walk times `[v*k, (v+1)*k]`.
//! For cells `x1 < x2` and a coordinate `C` in `{L, R}`, the `C`-relation
//! holds when
//!
//! ```text
//! max(min_cell_C(x1), min_cell_C(x2)) <= min C over [(x1+1)*k, x2*k]
//! ```
//!
//! and the cells are adjacent when either relation holds. Consecutive cells
//! share the time `(x1+1)*k`, so they are always adjacent through both
//! relations. A non-consecutive pair related through both coordinates
//! carries a double edge.

mod bruteforce;
mod fast;

use bitflags::bitflags;
use serde::Serialize;

use crate::walkgen::EncodingWalk;
use crate::{Error, Result};

pub use bruteforce::build_bruteforce;
pub use fast::{build_fast, build_fast_with_limit, cell_minima, DEFAULT_MAX_ADJACENCY};

bitflags! {
    /// Which coordinate relations connect an adjacent pair.
    #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
    pub struct EdgeFlags: u8 {
        const L = 0b01;
        const R = 0b10;
    }
}

/// Immutable CSR adjacency. Neighbor lists are sorted ascending and each
/// adjacent pair appears once per endpoint with identical flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatedCrtGraph {
    cell_size: u64,
    root: u32,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    flags: Vec<EdgeFlags>,
    degrees: Vec<u32>,
}

/// Edge multiplicity between `u` and `v`.
#[inline]
pub fn multiplicity(u: u32, v: u32, flags: EdgeFlags) -> u32 {
    if flags == EdgeFlags::all() && u.abs_diff(v) > 1 {
        2
    } else {
        1
    }
}

/// Middle cell, `max(1, floor(m/2))` in 1-based numbering.
pub fn default_root(m_cells: usize) -> u32 {
    ((m_cells / 2).max(1) - 1) as u32
}

impl MatedCrtGraph {
    /// Assemble from CSR arrays, validating the canonical form.
    pub fn from_parts(
        cell_size: u64,
        root: u32,
        offsets: Vec<usize>,
        neighbors: Vec<u32>,
        flags: Vec<EdgeFlags>,
    ) -> Result<Self> {
        if offsets.len() < 2 || offsets[0] != 0 {
            return Err(Error::Format("offsets must start at 0 and cover at least one cell".into()));
        }
        let n = offsets.len() - 1;
        if offsets.windows(2).any(|w| w[0] > w[1]) || offsets[n] != neighbors.len() {
            return Err(Error::Format("offsets are not a valid CSR index".into()));
        }
        if flags.len() != neighbors.len() {
            return Err(Error::Format("flags and neighbors differ in length".into()));
        }
        if root as usize >= n {
            return Err(Error::Format(format!("root {root} outside {n} cells")));
        }
        let g = Self::assemble(cell_size, root, offsets, neighbors, flags);
        g.check_canonical()?;
        Ok(g)
    }

    /// Build from an undirected edge list. Repeated pairs are merged by
    /// OR-ing their flags.
    pub fn from_edges(m_cells: usize, cell_size: u64, root: u32, edges: &[(u32, u32, EdgeFlags)]) -> Result<Self> {
        if m_cells == 0 || root as usize >= m_cells {
            return Err(Error::invalid("graph needs at least one cell and a valid root"));
        }
        let mut directed: Vec<(u32, u32, EdgeFlags)> = Vec::with_capacity(2 * edges.len());
        for &(u, v, f) in edges {
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            if u as usize >= m_cells || v as usize >= m_cells {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside {m_cells} cells")));
            }
            if f.is_empty() {
                return Err(Error::invalid(format!("edge ({u}, {v}) has no relation flags")));
            }
            directed.push((u, v, f));
            directed.push((v, u, f));
        }
        directed.sort_unstable_by_key(|&(u, v, _)| (u, v));
        let mut merged: Vec<(u32, u32, EdgeFlags)> = Vec::with_capacity(directed.len());
        for e in directed {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (e.0, e.1) => last.2 |= e.2,
                _ => merged.push(e),
            }
        }
        let mut offsets = vec![0usize; m_cells + 1];
        for &(u, _, _) in &merged {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..m_cells {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = merged.iter().map(|e| e.1).collect();
        let flags = merged.iter().map(|e| e.2).collect();
        Ok(Self::assemble(cell_size, root, offsets, neighbors, flags))
    }

    pub(crate) fn assemble(
        cell_size: u64,
        root: u32,
        offsets: Vec<usize>,
        neighbors: Vec<u32>,
        flags: Vec<EdgeFlags>,
    ) -> Self {
        let n = offsets.len() - 1;
        let degrees = (0..n)
            .map(|v| {
                (offsets[v]..offsets[v + 1])
                    .map(|i| multiplicity(v as u32, neighbors[i], flags[i]))
                    .sum()
            })
            .collect();
        Self {
            cell_size,
            root,
            offsets,
            neighbors,
            flags,
            degrees,
        }
    }

    pub fn m_cells(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cell_size(&self) -> u64 {
        self.cell_size
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn with_root(mut self, root: u32) -> Result<Self> {
        if root as usize >= self.m_cells() {
            return Err(Error::invalid(format!("root {root} outside {} cells", self.m_cells())));
        }
        self.root = root;
        Ok(self)
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn neighbor_array(&self) -> &[u32] {
        &self.neighbors
    }

    pub fn flag_array(&self) -> &[EdgeFlags] {
        &self.flags
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn flags(&self, v: u32) -> &[EdgeFlags] {
        let v = v as usize;
        &self.flags[self.offsets[v]..self.offsets[v + 1]]
    }

    /// `(neighbor, multiplicity)` pairs of `v`.
    #[inline]
    pub fn weighted_neighbors(&self, v: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.neighbors(v)
            .iter()
            .zip(self.flags(v))
            .map(move |(&u, &f)| (u, multiplicity(v, u, f)))
    }

    /// Degree counted with multiplicity.
    #[inline]
    pub fn degree(&self, v: u32) -> u32 {
        self.degrees[v as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Number of distinct adjacent pairs.
    pub fn num_adjacent_pairs(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Number of edges counted with multiplicity, `|E|`.
    pub fn num_edges(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum::<u64>() / 2
    }

    /// Flags of the pair `(u, v)`, if adjacent.
    pub fn edge(&self, u: u32, v: u32) -> Option<EdgeFlags> {
        let nbrs = self.neighbors(u);
        nbrs.binary_search(&v).ok().map(|i| self.flags(u)[i])
    }

    fn check_canonical(&self) -> Result<()> {
        for v in 0..self.m_cells() as u32 {
            let nbrs = self.neighbors(v);
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Format(format!("neighbors of {v} not strictly sorted")));
            }
            for (&u, &f) in nbrs.iter().zip(self.flags(v)) {
                if u == v {
                    return Err(Error::Format(format!("self-loop at {v}")));
                }
                if u as usize >= self.m_cells() {
                    return Err(Error::Format(format!("neighbor {u} of {v} out of range")));
                }
                if f.is_empty() || f.bits() & !EdgeFlags::all().bits() != 0 {
                    return Err(Error::Format(format!("invalid flags on ({v}, {u})")));
                }
                if self.edge(u, v) != Some(f) {
                    return Err(Error::Format(format!("edge ({v}, {u}) is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Checks the structural invariants of a built mated-CRT graph:
    /// canonical symmetric storage and adjacency of consecutive cells
    /// through both relations.
    pub fn check_invariants(&self) -> Result<()> {
        self.check_canonical()?;
        for v in 1..self.m_cells() as u32 {
            if self.edge(v - 1, v) != Some(EdgeFlags::all()) {
                return Err(Error::invalid(format!("consecutive cells {} and {v} not joined by both relations", v - 1)));
            }
        }
        Ok(())
    }

    pub(crate) fn check_connected(&self) -> Result<()> {
        let dist = crate::graphalgo::bfs_distances(self, 0, u32::MAX);
        if dist.contains(&crate::graphalgo::UNREACHED) {
            Err(Error::Disconnected)
        } else {
            Ok(())
        }
    }
}

/// Number of cells for a walk of `m_steps` steps and cell size `k`, after
/// checking `1 <= k <= m_steps / 2`.
pub(crate) fn check_build_args(m_steps: u64, k: u64) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("cell size must be positive"));
    }
    if k > m_steps / 2 {
        return Err(Error::invalid(format!(
            "cell size {k} exceeds half the walk length {m_steps}"
        )));
    }
    let m_cells = m_steps / k;
    if m_cells > u32::MAX as u64 {
        return Err(Error::Capacity(format!("{m_cells} cells exceed the 2^32 limit")));
    }
    Ok(m_cells as usize)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeStats {
    pub mean_degree: f64,
    pub max_degree: u32,
    /// `histogram[d]` counts bulk cells of degree `d`.
    pub histogram: Vec<u64>,
    pub bulk_cells: usize,
}

impl DegreeStats {
    /// Fraction of bulk cells with degree strictly above `d`.
    pub fn tail_fraction(&self, d: usize) -> f64 {
        let above: u64 = self.histogram.iter().skip(d + 1).sum();
        above as f64 / self.bulk_cells as f64
    }
}

/// Degree statistics (with multiplicity) over cells at least
/// `bulk_margin * m_cells` away from both ends of the walk.
pub fn degree_stats(graph: &MatedCrtGraph, bulk_margin: f64) -> Result<DegreeStats> {
    if !(0.0..0.5).contains(&bulk_margin) {
        return Err(Error::OutOfRange {
            name: "bulk_margin",
            value: bulk_margin,
            range: "[0, 0.5)",
        });
    }
    let m = graph.m_cells();
    let margin = (bulk_margin * m as f64).ceil() as usize;
    if 2 * margin >= m {
        return Err(Error::invalid("bulk region is empty"));
    }
    let bulk = &graph.degrees()[margin..m - margin];
    let max_degree = bulk.iter().copied().max().unwrap();
    let mut histogram = vec![0u64; max_degree as usize + 1];
    let mut total = 0u64;
    for &d in bulk {
        histogram[d as usize] += 1;
        total += d as u64;
    }
    Ok(DegreeStats {
        mean_degree: total as f64 / bulk.len() as f64,
        max_degree,
        histogram,
        bulk_cells: bulk.len(),
    })
}

/// Spot-checks `samples` random cell pairs of `graph` against the adjacency
/// predicate, using block range-minimum queries on the walk's cell minima.
/// Returns the number of pairs checked.
pub fn spot_check(graph: &MatedCrtGraph, walk: &EncodingWalk, samples: usize, seed: u64) -> Result<usize> {
    use crate::rmq::BlockRmq;
    use crate::walkgen::WalkValues;

    fn run<T: Copy + PartialOrd + Default + std::ops::Add<Output = T>>(
        graph: &MatedCrtGraph,
        dl: &[T],
        dr: &[T],
        samples: usize,
        seed: u64,
    ) -> Result<usize> {
        let m = graph.m_cells();
        let k = graph.cell_size() as usize;
        let ml = cell_minima(dl, k, m);
        let mr = cell_minima(dr, k, m);
        let (ql, qr) = (BlockRmq::new(&ml), BlockRmq::new(&mr));
        let related = |mins: &[T], q: &BlockRmq<T>, a: usize, b: usize| -> bool {
            if b == a + 1 {
                return true;
            }
            let hi = if mins[a] < mins[b] { mins[b] } else { mins[a] };
            !(q.min(a + 1, b - 1).unwrap() < hi)
        };
        let mut rng = crate::seed::rng(seed);
        for i in 0..samples {
            let a = crate::seed::below(&mut rng, m as u64) as usize;
            // Alternate between existing edges and uniformly random pairs.
            let b = if i % 2 == 0 && graph.degree(a as u32) > 0 {
                let nb = graph.neighbors(a as u32);
                nb[crate::seed::below(&mut rng, nb.len() as u64) as usize] as usize
            } else {
                crate::seed::below(&mut rng, m as u64) as usize
            };
            if a == b {
                continue;
            }
            let (x1, x2) = (a.min(b), a.max(b));
            let mut want = EdgeFlags::empty();
            if related(&ml, &ql, x1, x2) {
                want |= EdgeFlags::L;
            }
            if related(&mr, &qr, x1, x2) {
                want |= EdgeFlags::R;
            }
            let got = graph.edge(x1 as u32, x2 as u32).unwrap_or(EdgeFlags::empty());
            if got != want {
                return Err(Error::invalid(format!(
                    "pair ({x1}, {x2}): graph has {got:?}, predicate gives {want:?}"
                )));
            }
        }
        Ok(samples)
    }

    if walk.m_steps() / graph.cell_size() != graph.m_cells() as u64 {
        return Err(Error::invalid("walk and graph sizes disagree"));
    }
    match &walk.values {
        WalkValues::Integer { dl, dr } => run(graph, dl, dr, samples, seed),
        WalkValues::Real { dl, dr } => run(graph, dl, dr, samples, seed),
    }
}

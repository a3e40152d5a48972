use super::{check_build_args, default_root, EdgeFlags, MatedCrtGraph};
use crate::walkgen::{EncodingWalk, Positions};
use crate::Result;

/// Reference builder: evaluates the adjacency predicate for every pair of
/// cells with direct linear scans of the walk. Quadratic in the number of
/// cells times the cell span, so only suitable for small walks.
pub fn build_bruteforce(walk: &EncodingWalk, k: u64) -> Result<MatedCrtGraph> {
    let m_cells = check_build_args(walk.m_steps(), k)?;
    let k = k as usize;
    let edges = match walk.positions() {
        Positions::Integer { l, r } => pairs(&l, &r, k, m_cells),
        Positions::Real { l, r } => pairs(&l, &r, k, m_cells),
    };
    MatedCrtGraph::from_edges(m_cells, k as u64, default_root(m_cells), &edges)
}

fn pairs<T: Copy + PartialOrd>(l: &[T], r: &[T], k: usize, m: usize) -> Vec<(u32, u32, EdgeFlags)> {
    let mut edges = Vec::new();
    for x1 in 0..m {
        for x2 in x1 + 1..m {
            let mut f = EdgeFlags::empty();
            if related(l, k, x1, x2) {
                f |= EdgeFlags::L;
            }
            if related(r, k, x1, x2) {
                f |= EdgeFlags::R;
            }
            if !f.is_empty() {
                edges.push((x1 as u32, x2 as u32, f));
            }
        }
    }
    edges
}

fn scan_min<T: Copy + PartialOrd>(c: &[T], from: usize, to: usize) -> T {
    let mut m = c[from];
    for &v in &c[from..=to] {
        if v < m {
            m = v;
        }
    }
    m
}

fn related<T: Copy + PartialOrd>(c: &[T], k: usize, x1: usize, x2: usize) -> bool {
    let first = scan_min(c, x1 * k, (x1 + 1) * k);
    let second = scan_min(c, x2 * k, (x2 + 1) * k);
    let between = scan_min(c, (x1 + 1) * k, x2 * k);
    let hi = if first < second { second } else { first };
    hi <= between
}

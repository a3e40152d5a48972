use std::ops::Add;

use super::{check_build_args, default_root, EdgeFlags, MatedCrtGraph};
use crate::walkgen::{EncodingWalk, WalkValues};
use crate::{Error, Result};

/// Default cap on stored adjacency entries (both directions). Integer walks
/// with many ties can produce dense graphs; the cap turns that into a
/// capacity error instead of an allocation failure.
pub const DEFAULT_MAX_ADJACENCY: usize = 1 << 29;

/// Minimum of each coordinate over every cell, computed by streaming the
/// increments: cell `v` covers walk times `v*k ..= (v+1)*k`.
pub fn cell_minima<T>(increments: &[T], k: usize, m_cells: usize) -> Vec<T>
where
    T: Copy + PartialOrd + Default + Add<Output = T>,
{
    let mut out = Vec::with_capacity(m_cells);
    let mut pos = T::default();
    let mut steps = increments.iter();
    for _ in 0..m_cells {
        let mut lo = pos;
        for _ in 0..k {
            pos = pos + *steps.next().expect("walk shorter than m_cells * k");
            if pos < lo {
                lo = pos;
            }
        }
        out.push(lo);
    }
    out
}

pub fn build_fast(walk: &EncodingWalk, k: u64) -> Result<MatedCrtGraph> {
    build_fast_with_limit(walk, k, DEFAULT_MAX_ADJACENCY)
}

/// Linear-time builder (plus output size).
///
/// For `x2 > x1 + 1` the interior interval is exactly the union of the cells
/// strictly between, so a relation holds iff every cell minimum strictly
/// between is `>=` both endpoint minima. Sweeping `x2` upward with a stack of
/// "suffix minima" (cells whose minimum is `<=` every later one seen so far)
/// enumerates the partners of `x2` from the top of the stack down.
pub fn build_fast_with_limit(walk: &EncodingWalk, k: u64, max_adjacency: usize) -> Result<MatedCrtGraph> {
    let m_cells = check_build_args(walk.m_steps(), k)?;
    let k = k as usize;
    match &walk.values {
        WalkValues::Integer { dl, dr } => {
            let (ml, mr) = (cell_minima(dl, k, m_cells), cell_minima(dr, k, m_cells));
            assemble(&ml, &mr, k as u64, max_adjacency)
        }
        WalkValues::Real { dl, dr } => {
            let (ml, mr) = (cell_minima(dl, k, m_cells), cell_minima(dr, k, m_cells));
            assemble(&ml, &mr, k as u64, max_adjacency)
        }
    }
}

struct Sweep<'a, T> {
    minima: &'a [T],
    stack: Vec<u32>,
    partners: Vec<u32>,
}

impl<'a, T: Copy + PartialOrd> Sweep<'a, T> {
    fn new(minima: &'a [T]) -> Self {
        Self {
            minima,
            stack: Vec::new(),
            partners: Vec::new(),
        }
    }

    /// Lower partners of `x2` in descending order, then push `x2`.
    fn advance(&mut self, x2: u32) -> &[u32] {
        let a = self.minima;
        let here = a[x2 as usize];
        self.partners.clear();
        if let Some(&top) = self.stack.last() {
            self.partners.push(top);
            let mut j = self.stack.len() - 1;
            while j > 0 && here <= a[self.stack[j] as usize] {
                self.partners.push(self.stack[j - 1]);
                j -= 1;
            }
        }
        while let Some(&t) = self.stack.last() {
            if a[t as usize] > here {
                self.stack.pop();
            } else {
                break;
            }
        }
        self.stack.push(x2);
        &self.partners
    }
}

/// Runs both sweeps and hands each `x2` its merged lower partners in
/// ascending order.
fn sweep_pairs<T: Copy + PartialOrd>(ml: &[T], mr: &[T], mut visit: impl FnMut(u32, &[(u32, EdgeFlags)])) {
    let mut sl = Sweep::new(ml);
    let mut sr = Sweep::new(mr);
    let mut merged: Vec<(u32, EdgeFlags)> = Vec::new();
    for x2 in 0..ml.len() as u32 {
        let pl = sl.advance(x2);
        let pr = sr.advance(x2);
        merged.clear();
        // Both lists are descending; merge from their tails to get ascending.
        let (mut i, mut j) = (pl.len(), pr.len());
        while i > 0 || j > 0 {
            let a = if i > 0 { Some(pl[i - 1]) } else { None };
            let b = if j > 0 { Some(pr[j - 1]) } else { None };
            match (a, b) {
                (Some(x), Some(y)) if x == y => {
                    merged.push((x, EdgeFlags::all()));
                    i -= 1;
                    j -= 1;
                }
                (Some(x), Some(y)) if x < y => {
                    merged.push((x, EdgeFlags::L));
                    i -= 1;
                }
                (Some(_), Some(y)) => {
                    merged.push((y, EdgeFlags::R));
                    j -= 1;
                }
                (Some(x), None) => {
                    merged.push((x, EdgeFlags::L));
                    i -= 1;
                }
                (None, Some(y)) => {
                    merged.push((y, EdgeFlags::R));
                    j -= 1;
                }
                (None, None) => unreachable!(),
            }
        }
        visit(x2, &merged);
    }
}

fn assemble<T: Copy + PartialOrd>(ml: &[T], mr: &[T], k: u64, max_adjacency: usize) -> Result<MatedCrtGraph> {
    let m = ml.len();
    // Pass 1: degrees (distinct neighbors) and lower-neighbor counts.
    let mut lower = vec![0u32; m];
    let mut distinct = vec![0u32; m];
    let mut total = 0usize;
    sweep_pairs(ml, mr, |x2, merged| {
        lower[x2 as usize] = merged.len() as u32;
        distinct[x2 as usize] += merged.len() as u32;
        for &(x1, _) in merged {
            distinct[x1 as usize] += 1;
        }
        total += 2 * merged.len();
    });
    if total > max_adjacency {
        return Err(Error::Capacity(format!(
            "{total} adjacency entries exceed the limit of {max_adjacency}"
        )));
    }
    let mut offsets = Vec::with_capacity(m + 1);
    offsets.push(0usize);
    for &d in &distinct {
        offsets.push(offsets.last().unwrap() + d as usize);
    }
    drop(distinct);
    // Pass 2: lower neighbors fill the front of each list, upper neighbors
    // arrive in increasing order and are appended behind them.
    let mut neighbors = vec![0u32; total];
    let mut flags = vec![EdgeFlags::empty(); total];
    let mut cursor: Vec<usize> = (0..m).map(|v| offsets[v] + lower[v] as usize).collect();
    drop(lower);
    sweep_pairs(ml, mr, |x2, merged| {
        let base = offsets[x2 as usize];
        for (i, &(x1, f)) in merged.iter().enumerate() {
            neighbors[base + i] = x1;
            flags[base + i] = f;
            let c = &mut cursor[x1 as usize];
            neighbors[*c] = x2;
            flags[*c] = f;
            *c += 1;
        }
    });
    Ok(MatedCrtGraph::assemble(k, default_root(m), offsets, neighbors, flags))
}

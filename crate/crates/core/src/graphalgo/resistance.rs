use serde::{Deserialize, Serialize};

use super::amg::{Multigrid, SymMatrix};
use super::{bfs_order, check_vertex, UNREACHED};
use crate::mapbuild::MatedCrtGraph;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResistanceResult {
    pub radius: u32,
    pub r_eff: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    Jacobi,
    /// Smoothed-aggregation multigrid V-cycle.
    #[default]
    Multigrid,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    /// `None` means `10 * sqrt(n) + 1000` for an `n`-unknown system.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iterations: None,
            preconditioner: Preconditioner::default(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn effective_resistance(graph: &MatedCrtGraph, root: u32, radius: u32, tol: f64) -> Result<ResistanceResult> {
    effective_resistance_with(
        graph,
        root,
        radius,
        CgOptions {
            tol,
            ..CgOptions::default()
        },
    )
}

/// Effective resistance between `root` and the sphere of vertices at graph
/// distance exactly `radius`, with unit conductance per edge copy.
///
/// Injects unit current at `root`, grounds the sphere, and solves the
/// reduced Laplacian system by preconditioned conjugate gradients.
/// The reported residual is the true relative residual of the returned
/// potential.
pub fn effective_resistance_with(
    graph: &MatedCrtGraph,
    root: u32,
    radius: u32,
    opts: CgOptions,
) -> Result<ResistanceResult> {
    check_vertex(graph, root)?;
    if radius == 0 || radius == UNREACHED {
        return Err(Error::invalid("radius must be at least 1"));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let (dist, order) = bfs_order(graph, root, radius);
    let interior = order.partition_point(|&v| dist[v as usize] < radius);
    if interior == order.len() {
        return Err(Error::invalid(format!(
            "ball of radius {radius} is the whole component; no boundary to ground"
        )));
    }
    // Walk-time order keeps most edges short, which the solver's memory
    // access prefers over BFS order.
    let mut cells = order[..interior].to_vec();
    drop(order);
    drop(dist);
    cells.sort_unstable();
    let root_local = cells.binary_search(&root).unwrap();
    let mut local = vec![u32::MAX; graph.m_cells()];
    for (i, &v) in cells.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut lap = SymMatrix {
        diag: Vec::with_capacity(interior),
        offsets: Vec::with_capacity(interior + 1),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    lap.offsets.push(0);
    for &v in &cells {
        lap.diag.push(graph.degree(v) as f64);
        for (u, mult) in graph.weighted_neighbors(v) {
            let j = local[u as usize];
            if j != u32::MAX {
                lap.cols.push(j);
                lap.vals.push(-(mult as f64));
            }
        }
        lap.offsets.push(lap.cols.len());
    }
    drop(local);

    let n = interior;
    let max_iter = opts
        .max_iterations
        .unwrap_or(10 * (n as f64).sqrt() as usize + 1000);
    // b is the unit vector at the root, so ||b|| = 1.
    let mut x = vec![0.0; n];
    let mut r = vec![0.0; n];
    r[root_local] = 1.0;
    enum Solver {
        Jacobi(SymMatrix, Vec<f64>),
        Multigrid(Multigrid),
    }
    let solver = match opts.preconditioner {
        Preconditioner::Jacobi => {
            let inv_diag = lap.diag.iter().map(|d| 1.0 / d).collect();
            Solver::Jacobi(lap, inv_diag)
        }
        Preconditioner::Multigrid => Solver::Multigrid(Multigrid::new(lap)),
    };
    let lap = match &solver {
        Solver::Jacobi(a, _) => a,
        Solver::Multigrid(mg) => mg.fine(),
    };
    let precondition = |r: &[f64], z: &mut [f64]| match &solver {
        Solver::Multigrid(mg) => mg.apply(r, z),
        Solver::Jacobi(_, inv_diag) => {
            for i in 0..r.len() {
                z[i] = r[i] * inv_diag[i];
            }
        }
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut iterations = 0;
    let mut res_norm = 1.0f64;
    while res_norm > opts.tol && iterations < max_iter {
        let alpha = rz / lap.apply(&p, &mut ap);
        let mut rr = 0.0;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr += r[i] * r[i];
        }
        res_norm = rr.sqrt();
        iterations += 1;
        if res_norm <= opts.tol {
            break;
        }
        precondition(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    // True residual of the returned solution.
    lap.apply(&x, &mut ap);
    ap[root_local] -= 1.0;
    let residual = dot(&ap, &ap).sqrt();
    if residual > opts.tol {
        return Err(Error::NotConverged { iterations, residual });
    }
    Ok(ResistanceResult {
        radius,
        r_eff: x[root_local],
        iterations,
        residual,
    })
}

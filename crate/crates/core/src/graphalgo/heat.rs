use rayon::prelude::*;

use super::{bfs_order, check_vertex};
use crate::mapbuild::MatedCrtGraph;
use crate::{Error, Result};

/// Largest ball `HeatFlow` will relabel.
pub const DEFAULT_MAX_BALL: usize = 1 << 27;

/// Exact evolution of the simple-random-walk distribution started from a
/// point mass, restricted to the ball the walk can reach within `horizon`
/// steps. Vertices are relabelled in BFS order so that after `s` steps the
/// support is a prefix of the local arrays.
pub struct HeatFlow {
    /// `layer_end[d]` = number of ball vertices at distance `<= d`.
    layer_end: Vec<usize>,
    offsets: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    inv_degree: Vec<f64>,
    mass: Vec<f64>,
    scaled: Vec<f64>,
    steps: usize,
}

impl HeatFlow {
    pub fn new(graph: &MatedCrtGraph, root: u32, horizon: u32) -> Result<Self> {
        Self::with_capacity_limit(graph, root, horizon, DEFAULT_MAX_BALL)
    }

    pub fn with_capacity_limit(graph: &MatedCrtGraph, root: u32, horizon: u32, max_ball: usize) -> Result<Self> {
        check_vertex(graph, root)?;
        if graph.degree(root) == 0 {
            return Err(Error::invalid("root is isolated"));
        }
        let (dist, order) = bfs_order(graph, root, horizon);
        if order.len() > max_ball {
            return Err(Error::Capacity(format!(
                "ball of radius {horizon} has {} vertices, limit {max_ball}",
                order.len()
            )));
        }
        let mut layer_end = vec![0usize; horizon as usize + 1];
        for &v in &order {
            layer_end[dist[v as usize] as usize] += 1;
        }
        for d in 1..layer_end.len() {
            layer_end[d] += layer_end[d - 1];
        }
        let mut local = vec![u32::MAX; graph.m_cells()];
        for (i, &v) in order.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let n = order.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for &v in &order {
            for (u, mult) in graph.weighted_neighbors(v) {
                let j = local[u as usize];
                if j != u32::MAX {
                    cols.push(j);
                    weights.push(mult as f64);
                }
            }
            offsets.push(cols.len());
        }
        let inv_degree = order.iter().map(|&v| 1.0 / graph.degree(v) as f64).collect();
        let mut mass = vec![0.0; n];
        mass[0] = 1.0;
        Ok(Self {
            layer_end,
            offsets,
            cols,
            weights,
            inv_degree,
            mass,
            scaled: vec![0.0; n],
            steps: 0,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> usize {
        self.layer_end.len() - 1
    }

    /// Applies the transition operator once.
    pub fn step(&mut self) -> Result<()> {
        if self.steps >= self.horizon() {
            return Err(Error::invalid(format!(
                "cannot step past the labelled horizon {}",
                self.horizon()
            )));
        }
        let old_support = self.layer_end[self.steps];
        let new_support = self.layer_end[self.steps + 1];
        for i in 0..old_support {
            self.scaled[i] = self.mass[i] * self.inv_degree[i];
        }
        let (offsets, cols, weights, scaled) = (&self.offsets, &self.cols, &self.weights, &self.scaled);
        self.mass[..new_support].par_iter_mut().enumerate().for_each(|(v, m)| {
            let mut acc = 0.0;
            for e in offsets[v]..offsets[v + 1] {
                let u = cols[e] as usize;
                if u < old_support {
                    acc += weights[e] * scaled[u];
                }
            }
            *m = acc;
        });
        self.steps += 1;
        Ok(())
    }

    pub fn mass_at_root(&self) -> f64 {
        self.mass[0]
    }

    pub fn total_mass(&self) -> f64 {
        let support = self.layer_end[self.steps];
        self.mass[..support].iter().sum()
    }

    pub fn distribution(&self) -> &[f64] {
        &self.mass
    }
}

/// `p_n(root, root)` for `n = 1..=n_max`, by exact operator iteration.
pub fn return_probability(graph: &MatedCrtGraph, root: u32, n_max: u32) -> Result<Vec<f64>> {
    let mut flow = HeatFlow::new(graph, root, n_max)?;
    let mut out = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        flow.step()?;
        out.push(flow.mass_at_root());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphalgo::step_from;
    use crate::graphalgo::test_graphs::*;

    #[test]
    fn two_cells_alternate() {
        let p = return_probability(&path(2), 0, 10).unwrap();
        for (i, &x) in p.iter().enumerate() {
            let n = i + 1;
            assert_eq!(x, if n % 2 == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn no_return_in_one_step() {
        let g = mated(500, 3);
        assert_eq!(return_probability(&g, g.root(), 1).unwrap(), vec![0.0]);
    }

    #[test]
    fn conservation_per_step() {
        let g = mated(5000, 8);
        let mut flow = HeatFlow::new(&g, g.root(), 200).unwrap();
        for _ in 0..200 {
            flow.step().unwrap();
            assert!((flow.total_mass() - 1.0).abs() < 1e-12);
        }
        assert!(flow.step().is_err());
    }

    #[test]
    fn capacity_limit() {
        let g = mated(5000, 8);
        let err = HeatFlow::with_capacity_limit(&g, g.root(), 50, 10).err().unwrap();
        assert!(matches!(err, Error::Capacity(_)));
    }

    #[test]
    fn agrees_with_monte_carlo() {
        // Small Monte Carlo cross-check here; the full-size version lives in
        // the acceptance suite.
        let g = mated(200, 21);
        let n_max = 20;
        let exact = return_probability(&g, g.root(), n_max).unwrap();
        let trials = 200_000u32;
        let mut hits = vec![0u32; n_max as usize];
        let mut rng = crate::seed::rng(5);
        for _ in 0..trials {
            let mut v = g.root();
            for n in 0..n_max as usize {
                v = step_from(&g, v, &mut rng);
                if v == g.root() {
                    hits[n] += 1;
                }
            }
        }
        for n in 0..n_max as usize {
            let p = exact[n];
            let est = hits[n] as f64 / trials as f64;
            let se = (p * (1.0 - p) / trials as f64).sqrt().max(1e-9);
            assert!((est - p).abs() <= 4.0 * se, "n={} exact {p} mc {est}", n + 1);
        }
    }
}

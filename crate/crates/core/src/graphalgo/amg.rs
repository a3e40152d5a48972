//! Smoothed-aggregation multigrid, used as a symmetric preconditioner for
//! the grounded-Laplacian solves.

/// Square sparse matrix: diagonal kept apart, off-diagonal entries in CSR.
#[derive(Clone, Debug)]
pub(crate) struct SymMatrix {
    pub diag: Vec<f64>,
    pub offsets: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl SymMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    /// `y = A x`, returning `x . y`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) -> f64 {
        let mut xy = 0.0;
        for i in 0..self.len() {
            let acc = self.diag[i] * x[i] + self.row_sum_off(i, x);
            y[i] = acc;
            xy += x[i] * acc;
        }
        xy
    }

    #[inline]
    fn row_sum_off(&self, i: usize, x: &[f64]) -> f64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()]
            .iter()
            .zip(&self.vals[r])
            .map(|(&c, &v)| v * x[c as usize])
            .sum()
    }

    fn gauss_seidel_forward(&self, inv_diag: &[f64], x: &mut [f64], b: &[f64]) {
        for i in 0..self.len() {
            x[i] = (b[i] - self.row_sum_off(i, x)) * inv_diag[i];
        }
    }

    fn gauss_seidel_backward(&self, inv_diag: &[f64], x: &mut [f64], b: &[f64]) {
        for i in (0..self.len()).rev() {
            x[i] = (b[i] - self.row_sum_off(i, x)) * inv_diag[i];
        }
    }
}

/// Rectangular CSR (rows x cols).
#[derive(Clone, Debug)]
struct Csr {
    offsets: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().map(|&c| c as usize).zip(self.vals[r].iter().copied())
    }

    fn transpose(&self, ncols: usize) -> Csr {
        let mut counts = vec![0usize; ncols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 0..ncols {
            counts[i + 1] += counts[i];
        }
        let mut cursor = counts.clone();
        let mut cols = vec![0u32; self.cols.len()];
        let mut vals = vec![0.0; self.cols.len()];
        for i in 0..self.rows() {
            for (c, v) in self.row(i) {
                let slot = cursor[c];
                cursor[c] += 1;
                cols[slot] = i as u32;
                vals[slot] = v;
            }
        }
        Csr {
            offsets: counts,
            cols,
            vals,
        }
    }
}

const UNASSIGNED: u32 = u32::MAX;

/// Standard three-pass aggregation over all off-diagonal connections.
fn aggregate(a: &SymMatrix) -> (Vec<u32>, usize) {
    let n = a.len();
    let mut agg = vec![UNASSIGNED; n];
    let mut count = 0u32;
    let nbrs = |i: usize| a.cols[a.offsets[i]..a.offsets[i + 1]].iter().map(|&c| c as usize);
    for i in 0..n {
        if agg[i] == UNASSIGNED && nbrs(i).all(|j| agg[j] == UNASSIGNED) {
            agg[i] = count;
            for j in nbrs(i) {
                agg[j] = count;
            }
            count += 1;
        }
    }
    let first_pass = agg.clone();
    for i in 0..n {
        if agg[i] == UNASSIGNED {
            if let Some(j) = nbrs(i).find(|&j| first_pass[j] != UNASSIGNED) {
                agg[i] = first_pass[j];
            }
        }
    }
    for i in 0..n {
        if agg[i] == UNASSIGNED {
            agg[i] = count;
            for j in nbrs(i) {
                if agg[j] == UNASSIGNED {
                    agg[j] = count;
                }
            }
            count += 1;
        }
    }
    (agg, count as usize)
}

/// `P = (I - omega D^-1 A) T` for the piecewise-constant tentative `T`.
fn smoothed_prolongator(a: &SymMatrix, agg: &[u32], nc: usize) -> Csr {
    let n = a.len();
    let rho = (0..n)
        .map(|i| {
            let off: f64 = a.vals[a.offsets[i]..a.offsets[i + 1]].iter().map(|v| v.abs()).sum();
            1.0 + off / a.diag[i]
        })
        .fold(0.0, f64::max);
    let omega = 4.0 / (3.0 * rho);
    let mut acc = vec![0.0; nc];
    let mut seen = vec![false; nc];
    let mut touched: Vec<u32> = Vec::new();
    let mut p = Csr {
        offsets: Vec::with_capacity(n + 1),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    p.offsets.push(0);
    for i in 0..n {
        let mut add = |c: u32, v: f64| {
            if !seen[c as usize] {
                seen[c as usize] = true;
                touched.push(c);
            }
            acc[c as usize] += v;
        };
        add(agg[i], 1.0 - omega);
        let scale = omega / a.diag[i];
        for e in a.offsets[i]..a.offsets[i + 1] {
            add(agg[a.cols[e] as usize], -scale * a.vals[e]);
        }
        touched.sort_unstable();
        for &c in &touched {
            p.cols.push(c);
            p.vals.push(acc[c as usize]);
            acc[c as usize] = 0.0;
            seen[c as usize] = false;
        }
        touched.clear();
        p.offsets.push(p.cols.len());
    }
    p
}

/// Galerkin product `R A P` with `R = P^T`, one coarse row at a time.
fn galerkin(a: &SymMatrix, p: &Csr, r: &Csr, nc: usize) -> SymMatrix {
    let mut acc = vec![0.0; nc];
    let mut seen = vec![false; nc];
    let mut touched: Vec<u32> = Vec::new();
    let mut out = SymMatrix {
        diag: vec![0.0; nc],
        offsets: Vec::with_capacity(nc + 1),
        cols: Vec::new(),
        vals: Vec::new(),
    };
    out.offsets.push(0);
    for ci in 0..nc {
        for (i, w) in r.row(ci) {
            let mut push = |j: usize, v: f64| {
                for (cj, pv) in p.row(j) {
                    if !seen[cj] {
                        seen[cj] = true;
                        touched.push(cj as u32);
                    }
                    acc[cj] += v * pv;
                }
            };
            push(i, w * a.diag[i]);
            for e in a.offsets[i]..a.offsets[i + 1] {
                push(a.cols[e] as usize, w * a.vals[e]);
            }
        }
        touched.sort_unstable();
        for &cj in &touched {
            let cj = cj as usize;
            if cj == ci {
                out.diag[ci] = acc[cj];
            } else if acc[cj] != 0.0 {
                out.cols.push(cj as u32);
                out.vals.push(acc[cj]);
            }
            acc[cj] = 0.0;
            seen[cj] = false;
        }
        touched.clear();
        out.offsets.push(out.cols.len());
    }
    out
}

struct Level {
    a: SymMatrix,
    inv_diag: Vec<f64>,
    p: Csr,
    coarse_len: usize,
}

/// Dense Cholesky factor of the coarsest operator.
struct Dense {
    a: SymMatrix,
    n: usize,
    l: Vec<f64>,
}

impl Dense {
    fn factor(a: SymMatrix) -> Result<Self, SymMatrix> {
        let n = a.len();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            l[i * n + i] = a.diag[i];
            for e in a.offsets[i]..a.offsets[i + 1] {
                l[i * n + a.cols[e] as usize] = a.vals[e];
            }
        }
        for j in 0..n {
            let mut d = l[j * n + j];
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > 0.0) {
                return Err(a);
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = l[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { a, n, l })
    }

    fn solve(&self, b: &[f64], x: &mut [f64]) {
        let (n, l) = (self.n, &self.l);
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[i * n + k] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
    }
}

enum Coarsest {
    Direct(Dense),
    /// Fallback when the coarse factorization breaks down numerically.
    Smooth(SymMatrix),
}

/// Multigrid preconditioner: a V-cycle on the finest level and W-cycles
/// below, with forward Gauss-Seidel before and backward Gauss-Seidel after
/// each coarse correction so the operator stays symmetric.
pub(crate) struct Multigrid {
    levels: Vec<Level>,
    coarsest: Coarsest,
}

const COARSE_SIZE: usize = 400;

impl Multigrid {
    pub fn new(a: SymMatrix) -> Self {
        let mut levels = Vec::new();
        let mut cur = a;
        while cur.len() > COARSE_SIZE {
            let (agg, nc) = aggregate(&cur);
            if nc == 0 || nc * 10 > cur.len() * 9 {
                break;
            }
            let p = smoothed_prolongator(&cur, &agg, nc);
            drop(agg);
            let r = p.transpose(nc);
            let coarse = galerkin(&cur, &p, &r, nc);
            drop(r);
            let inv_diag = cur.diag.iter().map(|d| 1.0 / d).collect();
            levels.push(Level {
                a: cur,
                inv_diag,
                p,
                coarse_len: nc,
            });
            cur = coarse;
        }
        let coarsest = if cur.len() <= 4 * COARSE_SIZE {
            match Dense::factor(cur) {
                Ok(d) => Coarsest::Direct(d),
                Err(cur) => Coarsest::Smooth(cur),
            }
        } else {
            Coarsest::Smooth(cur)
        };
        Self { levels, coarsest }
    }

    #[cfg(test)]
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// The operator the hierarchy was built for.
    pub fn fine(&self) -> &SymMatrix {
        match (self.levels.first(), &self.coarsest) {
            (Some(level), _) => &level.a,
            (None, Coarsest::Direct(d)) => &d.a,
            (None, Coarsest::Smooth(a)) => a,
        }
    }

    /// `x = M^-1 b`.
    pub fn apply(&self, b: &[f64], x: &mut [f64]) {
        self.cycle(0, b, x);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let Some(level) = self.levels.get(l) else {
            match &self.coarsest {
                Coarsest::Direct(d) => d.solve(b, x),
                Coarsest::Smooth(a) => {
                    let inv_diag: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
                    x.fill(0.0);
                    for _ in 0..20 {
                        a.gauss_seidel_forward(&inv_diag, x, b);
                        a.gauss_seidel_backward(&inv_diag, x, b);
                    }
                }
            }
            return;
        };
        let a = &level.a;
        let n = a.len();
        x.fill(0.0);
        a.gauss_seidel_forward(&level.inv_diag, x, b);
        let mut res = vec![0.0; n];
        a.apply(x, &mut res);
        for i in 0..n {
            res[i] = b[i] - res[i];
        }
        let nc = level.coarse_len;
        let mut bc = vec![0.0; nc];
        for i in 0..n {
            for (c, w) in level.p.row(i) {
                bc[c] += w * res[i];
            }
        }
        drop(res);
        let mut xc = vec![0.0; nc];
        self.cycle(l + 1, &bc, &mut xc);
        if let Some(next) = self.levels.get(l + 1) {
            // Second coarse pass (W-cycle): one more cycle on the residual.
            let mut rc = vec![0.0; nc];
            next.a.apply(&xc, &mut rc);
            for i in 0..nc {
                rc[i] = bc[i] - rc[i];
            }
            let mut dc = vec![0.0; nc];
            self.cycle(l + 1, &rc, &mut dc);
            for i in 0..nc {
                xc[i] += dc[i];
            }
        }
        for i in 0..n {
            x[i] += level.p.row(i).map(|(c, w)| w * xc[c]).sum::<f64>();
        }
        a.gauss_seidel_backward(&level.inv_diag, x, b);
    }
}

//! Encoding walks `(L, R)`.
//!
//! A walk is either a lattice walk with i.i.d. increments drawn from a finite
//! law with rational probabilities, or a discretized correlated Brownian
//! motion whose increments are standard bivariate normals with correlation
//! `-cos(pi * gamma^2 / 4)`.

use std::fmt;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::seed;
use crate::{Error, Result};

/// Largest walk `sample_walk` will allocate without an explicit limit.
pub const DEFAULT_MAX_STEPS: u64 = 1 << 28;

pub type Prob = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeStep {
    pub dl: i64,
    pub dr: i64,
    #[serde(serialize_with = "ser_ratio")]
    pub prob: Prob,
}

fn ser_ratio<S: serde::Serializer>(p: &Prob, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", p.numer(), p.denom()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StepLaw {
    Lattice { id: String, support: Vec<LatticeStep> },
    Gaussian { gamma: f64 },
}

impl StepLaw {
    /// Validated lattice law: probabilities in `[0, 1]` summing to one and
    /// zero mean in both coordinates.
    pub fn lattice(id: impl Into<String>, support: Vec<LatticeStep>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("lattice law has empty support"));
        }
        let one = Prob::from_integer(1);
        let mut total = Prob::zero();
        let mut mean_l = Prob::zero();
        let mut mean_r = Prob::zero();
        for s in &support {
            if s.prob < Prob::zero() || s.prob > one {
                return Err(Error::invalid(format!(
                    "step ({}, {}) has probability {} outside [0, 1]",
                    s.dl, s.dr, s.prob
                )));
            }
            total += s.prob;
            mean_l += s.prob * s.dl;
            mean_r += s.prob * s.dr;
        }
        if total != one {
            return Err(Error::invalid(format!("probabilities sum to {total}, not 1")));
        }
        if !mean_l.is_zero() || !mean_r.is_zero() {
            return Err(Error::invalid(format!(
                "lattice law has nonzero mean ({mean_l}, {mean_r})"
            )));
        }
        Ok(StepLaw::Lattice {
            id: id.into(),
            support,
        })
    }

    pub fn gaussian(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(StepLaw::Gaussian { gamma })
    }

    /// Uniform on `{(1,0), (0,1), (-1,-1)}`: the triangulation walk.
    pub fn uipt() -> Self {
        let third = Prob::new(1, 3);
        Self::lattice(
            "uipt",
            vec![
                LatticeStep { dl: 1, dr: 0, prob: third },
                LatticeStep { dl: 0, dr: 1, prob: third },
                LatticeStep { dl: -1, dr: -1, prob: third },
            ],
        )
        .expect("uipt preset is valid")
    }

    /// Uniform on `{(±1,0), (0,±1)}`: the spanning-tree-decorated map walk.
    pub fn four_direction() -> Self {
        let quarter = Prob::new(1, 4);
        Self::lattice(
            "four-direction",
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .into_iter()
                .map(|(dl, dr)| LatticeStep { dl, dr, prob: quarter })
                .collect(),
        )
        .expect("four-direction preset is valid")
    }

    /// Names a preset or a Gaussian law: `uipt`, `four-direction`
    /// (alias `spanning-tree`) or `gamma:<float>`.
    pub fn parse(selector: &str) -> Result<Self> {
        match selector {
            "uipt" => Ok(Self::uipt()),
            "four-direction" | "spanning-tree" => Ok(Self::four_direction()),
            other => match other.strip_prefix("gamma:") {
                Some(g) => {
                    let gamma: f64 = g
                        .parse()
                        .map_err(|_| Error::invalid(format!("cannot parse gamma from `{g}`")))?;
                    Self::gaussian(gamma)
                }
                None => Err(Error::invalid(format!(
                    "unknown step law `{other}` (expected uipt, four-direction or gamma:<float>)"
                ))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            StepLaw::Lattice { id, .. } => id.clone(),
            StepLaw::Gaussian { gamma } => format!("gamma:{gamma}"),
        }
    }

    /// LQG parameter of the universality class the law belongs to, when known.
    pub fn class_gamma(&self) -> Option<f64> {
        match self {
            StepLaw::Gaussian { gamma } => Some(*gamma),
            StepLaw::Lattice { id, .. } => match id.as_str() {
                "uipt" => Some((8.0f64 / 3.0).sqrt()),
                "four-direction" => Some(std::f64::consts::SQRT_2),
                _ => None,
            },
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, StepLaw::Lattice { .. })
    }
}

impl fmt::Display for StepLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 2.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "(0, 2)",
        })
    }
}

/// `-cos(pi * gamma^2 / 4)`, the correlation of the two walk coordinates.
pub fn gamma_to_correlation(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(-(std::f64::consts::PI * gamma * gamma / 4.0).cos())
}

/// Correlation of one increment's coordinates. Exact rational arithmetic
/// for lattice laws up to the final square root (skipped when the two
/// variances agree).
pub fn correlation_of(law: &StepLaw) -> Result<f64> {
    match law {
        StepLaw::Gaussian { gamma } => gamma_to_correlation(*gamma),
        StepLaw::Lattice { support, .. } => {
            let mut var_l = Prob::zero();
            let mut var_r = Prob::zero();
            let mut cov = Prob::zero();
            for s in support {
                var_l += s.prob * (s.dl * s.dl);
                var_r += s.prob * (s.dr * s.dr);
                cov += s.prob * (s.dl * s.dr);
            }
            if var_l.is_zero() || var_r.is_zero() {
                return Err(Error::DegenerateLaw(
                    "zero variance in one coordinate".to_string(),
                ));
            }
            let to_f = |r: Prob| r.to_f64().expect("finite ratio");
            if var_l == var_r {
                Ok(to_f(cov / var_l))
            } else {
                Ok(to_f(cov) / (to_f(var_l) * to_f(var_r)).sqrt())
            }
        }
    }
}

/// Increments of the walk. Positions are always recomputed as sequential
/// prefix sums so that a walk read back from disk reproduces them bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub enum WalkValues {
    Integer { dl: Vec<i64>, dr: Vec<i64> },
    Real { dl: Vec<f64>, dr: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Integer,
    Real,
}

/// Encoding walk with `L[0] = R[0] = 0`, stored by its increments.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingWalk {
    pub values: WalkValues,
    pub step_law_id: String,
    pub seed: u64,
}

/// Position arrays `L[0..=m]`, `R[0..=m]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Positions {
    Integer { l: Vec<i64>, r: Vec<i64> },
    Real { l: Vec<f64>, r: Vec<f64> },
}

impl EncodingWalk {
    pub fn from_integer_increments(
        dl: Vec<i64>,
        dr: Vec<i64>,
        step_law_id: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        if dl.len() != dr.len() || dl.is_empty() {
            return Err(Error::invalid("increment arrays must be nonempty and equal-length"));
        }
        Ok(Self {
            values: WalkValues::Integer { dl, dr },
            step_law_id: step_law_id.into(),
            seed,
        })
    }

    pub fn from_real_increments(
        dl: Vec<f64>,
        dr: Vec<f64>,
        step_law_id: impl Into<String>,
        seed: u64,
    ) -> Result<Self> {
        if dl.len() != dr.len() || dl.is_empty() {
            return Err(Error::invalid("increment arrays must be nonempty and equal-length"));
        }
        if dl.iter().chain(&dr).any(|v| !v.is_finite()) {
            return Err(Error::invalid("walk increments must be finite"));
        }
        Ok(Self {
            values: WalkValues::Real { dl, dr },
            step_law_id: step_law_id.into(),
            seed,
        })
    }

    /// Walk through the given integer positions; both arrays must start at 0.
    pub fn from_integer_positions(l: &[i64], r: &[i64]) -> Result<Self> {
        if l.len() != r.len() || l.len() < 2 || l[0] != 0 || r[0] != 0 {
            return Err(Error::invalid(
                "position arrays must have equal length >= 2 and start at 0",
            ));
        }
        let diff = |v: &[i64]| v.windows(2).map(|w| w[1] - w[0]).collect();
        Self::from_integer_increments(diff(l), diff(r), "explicit", 0)
    }

    pub fn m_steps(&self) -> u64 {
        match &self.values {
            WalkValues::Integer { dl, .. } => dl.len() as u64,
            WalkValues::Real { dl, .. } => dl.len() as u64,
        }
    }

    pub fn value_kind(&self) -> ValueKind {
        match self.values {
            WalkValues::Integer { .. } => ValueKind::Integer,
            WalkValues::Real { .. } => ValueKind::Real,
        }
    }

    pub fn positions(&self) -> Positions {
        match &self.values {
            WalkValues::Integer { dl, dr } => Positions::Integer {
                l: prefix_sums(dl),
                r: prefix_sums(dr),
            },
            WalkValues::Real { dl, dr } => Positions::Real {
                l: prefix_sums(dl),
                r: prefix_sums(dr),
            },
        }
    }

    /// Empirical correlation of the increments.
    pub fn increment_correlation(&self) -> f64 {
        let pairs: Vec<(f64, f64)> = match &self.values {
            WalkValues::Integer { dl, dr } => dl
                .iter()
                .zip(dr)
                .map(|(&a, &b)| (a as f64, b as f64))
                .collect(),
            WalkValues::Real { dl, dr } => dl.iter().copied().zip(dr.iter().copied()).collect(),
        };
        let n = pairs.len() as f64;
        let (mx, my) = pairs
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for &(x, y) in &pairs {
            sxx += (x - mx) * (x - mx);
            syy += (y - my) * (y - my);
            sxy += (x - mx) * (y - my);
        }
        sxy / (sxx * syy).sqrt()
    }

    /// Per-coordinate increment means.
    pub fn increment_means(&self) -> (f64, f64) {
        let mean = |it: &mut dyn Iterator<Item = f64>, n: usize| it.sum::<f64>() / n as f64;
        match &self.values {
            WalkValues::Integer { dl, dr } => (
                mean(&mut dl.iter().map(|&v| v as f64), dl.len()),
                mean(&mut dr.iter().map(|&v| v as f64), dr.len()),
            ),
            WalkValues::Real { dl, dr } => (
                mean(&mut dl.iter().copied(), dl.len()),
                mean(&mut dr.iter().copied(), dr.len()),
            ),
        }
    }
}

pub(crate) fn prefix_sums<T: Copy + Default + std::ops::Add<Output = T>>(inc: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(inc.len() + 1);
    let mut acc = T::default();
    out.push(acc);
    for &d in inc {
        acc = acc + d;
        out.push(acc);
    }
    out
}

pub fn sample_walk(law: &StepLaw, m_steps: u64, seed: u64) -> Result<EncodingWalk> {
    sample_walk_with_limit(law, m_steps, seed, DEFAULT_MAX_STEPS)
}

/// Deterministic in `(law, m_steps, seed)`.
///
/// Lattice steps are chosen by an exact integer draw against the laws'
/// common denominator. Gaussian steps use one Box-Muller pair `(z1, z2)`
/// per step: `dL = z1`, `dR = rho * z1 + sqrt(1 - rho^2) * z2`.
pub fn sample_walk_with_limit(law: &StepLaw, m_steps: u64, seed: u64, max_steps: u64) -> Result<EncodingWalk> {
    if m_steps == 0 {
        return Err(Error::invalid("m_steps must be at least 1"));
    }
    if m_steps > max_steps {
        return Err(Error::Capacity(format!(
            "{m_steps} steps requested, budget is {max_steps}"
        )));
    }
    let n = m_steps as usize;
    let mut rng = seed::rng(seed);
    match law {
        StepLaw::Lattice { id, support } => {
            let denom = support
                .iter()
                .fold(1i64, |acc, s| num_integer_lcm(acc, *s.prob.denom()));
            let mut cumulative = Vec::with_capacity(support.len());
            let mut acc = 0u64;
            for s in support {
                acc += (s.prob * denom).to_integer() as u64;
                cumulative.push(acc);
            }
            let mut dl = Vec::with_capacity(n);
            let mut dr = Vec::with_capacity(n);
            for _ in 0..n {
                let u = seed::below(&mut rng, denom as u64);
                let idx = cumulative.partition_point(|&c| c <= u);
                dl.push(support[idx].dl);
                dr.push(support[idx].dr);
            }
            Ok(EncodingWalk {
                values: WalkValues::Integer { dl, dr },
                step_law_id: id.clone(),
                seed,
            })
        }
        StepLaw::Gaussian { gamma } => {
            let rho = gamma_to_correlation(*gamma)?;
            let rho_c = (1.0 - rho * rho).sqrt();
            let mut dl = Vec::with_capacity(n);
            let mut dr = Vec::with_capacity(n);
            for _ in 0..n {
                let (z1, z2) = seed::box_muller(&mut rng);
                dl.push(z1);
                dr.push(rho * z1 + rho_c * z2);
            }
            Ok(EncodingWalk {
                values: WalkValues::Real { dl, dr },
                step_law_id: law.id(),
                seed,
            })
        }
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    fn gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a.abs()
    }
    a / gcd(a, b) * b
}

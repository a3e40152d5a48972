use serde::Serialize;

use crate::{Error, Result};

/// `sqrt(8/3)`, the class of uniform triangulations.
pub const GAMMA_UIPT: f64 = 1.632_993_161_855_452;

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

fn cubic_branch(g: f64) -> f64 {
    let g2 = g * g;
    (4.0 + g2 + (16.0 + 2.0 * g2 + g2 * g2).sqrt()) / 3.0
}

/// Lower bound on the ball-growth exponent, branch `gamma <= sqrt(8/3)`.
pub fn d_lower_below(g: f64) -> f64 {
    let g2 = g * g;
    let second = 2.0 * g2 / (4.0 + g2 - (16.0 + g2 * g2).sqrt());
    (6f64.sqrt() * g).max(second)
}

/// Lower bound, branch `gamma >= sqrt(8/3)`.
pub fn d_lower_above(g: f64) -> f64 {
    cubic_branch(g)
}

/// Upper bound, branch `gamma <= sqrt(8/3)`.
pub fn d_upper_below(g: f64) -> f64 {
    cubic_branch(g).min(2.0 + g * g / 2.0 + std::f64::consts::SQRT_2 * g)
}

/// Upper bound, branch `gamma >= sqrt(8/3)`.
pub fn d_upper_above(g: f64) -> f64 {
    6f64.sqrt() * g
}

/// `(d_lower, d_upper)` bracketing the ball-growth exponent `d_gamma`.
pub fn d_gamma_bounds(gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    if gamma <= GAMMA_UIPT {
        Ok((d_lower_below(gamma), d_upper_below(gamma)))
    } else {
        Ok((d_lower_above(gamma), d_upper_above(gamma)))
    }
}

/// Euclidean displacement exponent `1 / (2 - gamma^2 / 2)` of the walk under
/// the LQG embedding.
pub fn euclid_exponent(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(1.0 / (2.0 - gamma * gamma / 2.0))
}

/// Cell-diameter tail exponent
/// `q / (2 gamma^2) * (1/q - 2 - gamma^2/2)^2 - 2q` on
/// `0 < q <= 2 / (2 + gamma)^2`.
pub fn cell_diam_exponent(q: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let q_max = 2.0 / ((2.0 + gamma) * (2.0 + gamma));
    if !(q > 0.0 && q <= q_max) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            range: "(0, 2/(2+gamma)^2]",
        });
    }
    let g2 = gamma * gamma;
    let t = 1.0 / q - 2.0 - g2 / 2.0;
    Ok(q / (2.0 * g2) * t * t - 2.0 * q)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryConstants {
    pub gamma: f64,
    pub d_lower: f64,
    pub d_upper: f64,
    /// Bounds on the graph-distance walk exponent `1 / d_gamma`.
    pub walk_exponent_lower: f64,
    pub walk_exponent_upper: f64,
    pub euclid_exponent: f64,
    /// `Q = 2/gamma + gamma/2`.
    #[serde(rename = "Q")]
    pub q: f64,
    pub correlation: f64,
}

pub fn theory_constants(gamma: f64) -> Result<TheoryConstants> {
    let (d_lower, d_upper) = d_gamma_bounds(gamma)?;
    Ok(TheoryConstants {
        gamma,
        d_lower,
        d_upper,
        walk_exponent_lower: 1.0 / d_upper,
        walk_exponent_upper: 1.0 / d_lower,
        euclid_exponent: euclid_exponent(gamma)?,
        q: 2.0 / gamma + gamma / 2.0,
        correlation: crate::walkgen::gamma_to_correlation(gamma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uipt_constant() {
        assert_eq!(GAMMA_UIPT, (8.0f64 / 3.0).sqrt());
    }

    #[test]
    fn spanning_tree_reciprocals() {
        let g = 2f64.sqrt();
        let (lo, hi) = d_gamma_bounds(g).unwrap();
        assert!((lo - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!((hi - (6.0 + 2.0 * 6f64.sqrt()) / 3.0).abs() < 1e-12);
        assert!((1.0 / lo - 0.288675).abs() < 5e-7);
        assert!((1.0 / hi - 0.275255).abs() < 5e-7);
    }

    #[test]
    fn bounds_meet_at_uipt() {
        let g = GAMMA_UIPT;
        let (lo, hi) = d_gamma_bounds(g).unwrap();
        assert!((lo - 4.0).abs() < 1e-9 && (hi - 4.0).abs() < 1e-9);
        for f in [d_lower_below, d_lower_above, d_upper_below, d_upper_above] {
            assert!((f(g) - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn small_gamma_limit() {
        let (lo, _) = d_gamma_bounds(0.01).unwrap();
        // Second lower term rationalizes to (4 + g^2 + sqrt(16 + g^4)) / 4.
        let g2: f64 = 1e-4;
        let stable = (4.0 + g2 + (16.0 + g2 * g2).sqrt()) / 4.0;
        assert!((lo - stable).abs() < 1e-9);
        assert!(lo > 2.0 && lo < 2.0001);
    }

    #[test]
    fn euclid_values() {
        assert!((euclid_exponent(2f64.sqrt()).unwrap() - 1.0).abs() < 1e-12);
        assert!((euclid_exponent(GAMMA_UIPT).unwrap() - 1.5).abs() < 1e-12);
        assert!((euclid_exponent(1e-6).unwrap() - 0.5).abs() < 1e-9);
        assert!(euclid_exponent(2.0).is_err());
    }

    #[test]
    fn cell_diam_values() {
        let g = 2f64.sqrt();
        assert!((cell_diam_exponent(0.1, g).unwrap() - 1.025).abs() < 1e-12);
        assert!(cell_diam_exponent(1e-6, g).unwrap() > 1e5);
        let q_max = 2.0 / ((2.0 + g) * (2.0 + g));
        assert!(cell_diam_exponent(q_max, g).unwrap().is_finite());
        assert!(cell_diam_exponent(q_max * 1.01, g).is_err());
        assert!(cell_diam_exponent(0.0, g).is_err());
    }

    #[test]
    fn constants_record() {
        let t = theory_constants(GAMMA_UIPT).unwrap();
        assert!((t.q - (2.0 / GAMMA_UIPT + GAMMA_UIPT / 2.0)).abs() < 1e-15);
        assert!((t.correlation - 0.5).abs() < 1e-12);
        assert!(t.d_lower <= t.d_upper + 1e-12);
    }
}

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Closed abscissa window `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FitWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid(format!("invalid fit window [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Default window for a curve observed up to `horizon`: drop abscissae
    /// below 8 and the top quartile of the range.
    pub fn default_for(horizon: f64) -> Self {
        Self {
            lo: 8.0,
            hi: 0.75 * horizon,
        }
    }

    /// Parses `LO:HI`.
    pub fn parse(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("window `{s}` is not LO:HI")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("cannot parse `{t}` in window `{s}`")))
        };
        Self::new(num(lo)?, num(hi)?)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    pub points: usize,
    pub window: FitWindow,
}

pub fn fit_loglog(xs: &[f64], ys: &[f64], window: FitWindow) -> Result<ExponentFit> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("xs and ys differ in length"));
    }
    let mut pts = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if window.contains(x) {
            if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
                return Err(Error::invalid(format!("non-positive point ({x}, {y}) in window")));
            }
            pts.push((x.ln(), y.ln()));
        }
    }
    if pts.len() < 3 {
        return Err(Error::invalid(format!(
            "{} points in window [{}, {}], need at least 3",
            pts.len(),
            window.lo,
            window.hi
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("all abscissae in the window coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let flat = pts.iter().all(|p| p.1 == pts[0].1);
    let r_squared = if flat || syy == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    let slope_stderr = if pts.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(ExponentFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        points: pts.len(),
        window,
    })
}

/// One fit through the concatenated points of several curves.
pub fn pooled_fit(curves: &[(Vec<f64>, Vec<f64>)], window: FitWindow) -> Result<ExponentFit> {
    let xs: Vec<f64> = curves.iter().flat_map(|c| c.0.iter().copied()).collect();
    let ys: Vec<f64> = curves.iter().flat_map(|c| c.1.iter().copied()).collect();
    fit_loglog(&xs, &ys, window)
}

//! Log-log slope fits of error versus total sweep time.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::record::BenchRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Exponent `p` in `error ∝ T^p`.
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares fit of `log error = intercept + slope · log T`.
///
/// Points with non-positive or non-finite error are skipped; at least three
/// usable points are required.
pub fn fit_slope(t: &[f64], err: &[f64]) -> Result<SlopeFit> {
    if t.len() != err.len() {
        return Err(BenchError::Fit(format!("{} times but {} errors", t.len(), err.len())));
    }
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(err)
        .filter(|(t, e)| **t > 0.0 && **e > 0.0 && t.is_finite() && e.is_finite())
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(BenchError::Fit(format!("slope fit needs at least 3 points with positive error, got {n}")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(BenchError::Fit("slope fit needs at least two distinct times".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = (rss / (nf - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        stderr,
        intercept,
        points: n,
    })
}

/// Inclusive window on `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min * (1.0 - 1e-12) && t <= self.t_max * (1.0 + 1e-12)
    }

    /// Default window: the top half-decade of the sampled `T` range.
    pub fn default_for(records: &[BenchRecord]) -> Option<Self> {
        let t_max = records.iter().map(|r| r.t).fold(f64::NAN, f64::max);
        t_max.is_finite().then(|| Window {
            t_min: t_max / 10f64.sqrt(),
            t_max,
        })
    }
}

impl std::str::FromStr for Window {
    type Err = BenchError;

    /// `tmin:tmax`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || BenchError::Config(format!("window `{s}` must be `tmin:tmax` with 0 < tmin < tmax"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let t_min: f64 = a.trim().parse().map_err(|_| bad())?;
        let t_max: f64 = b.trim().parse().map_err(|_| bad())?;
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(bad());
        }
        Ok(Window { t_min, t_max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveFit {
    pub curve: String,
    pub window: Window,
    #[serde(flatten)]
    pub fit: Option<SlopeFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Fits every curve (see [`BenchRecord::curve`]) inside `window`.
pub fn fit_curves(records: &[BenchRecord], window: Window) -> Vec<CurveFit> {
    let mut curves: BTreeMap<String, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok() && window.contains(r.t)) {
        if let Some(e) = r.abs_error {
            let c = curves.entry(r.curve()).or_default();
            c.0.push(r.t);
            c.1.push(e);
        }
    }
    curves
        .into_iter()
        .map(|(curve, (t, e))| match fit_slope(&t, &e) {
            Ok(fit) => CurveFit {
                curve,
                window,
                fit: Some(fit),
                error: None,
            },
            Err(err) => CurveFit {
                curve,
                window,
                fit: None,
                error: Some(err.to_string()),
            },
        })
        .collect()
}

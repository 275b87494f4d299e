//! Ensemble ratio statistics shared by every inequality check.
//!
//! Inequalities with unspecified constants are verified by reporting ratios
//! `LHS / RHS` and checking that they stay bounded across scales.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One row of a sweep: a scale parameter (dilation, time, grid size, index gap)
/// with the ratio statistics measured at that scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleRow {
    pub scale: f64,
    pub max_ratio: f64,
    pub median_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub check: String,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub q95_ratio: f64,
    pub per_scale: Vec<ScaleRow>,
    pub fitted_exponents: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub sample_count: usize,
    pub grid: String,
    /// Samples dropped because the denominator was numerically zero.
    pub skipped: usize,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Denominators below this are treated as zero.
pub const TINY: f64 = 1e-300;

impl RatioReport {
    pub fn new(check: impl Into<String>, grid: impl Into<String>) -> Self {
        RatioReport {
            check: check.into(),
            max_ratio: 0.0,
            median_ratio: 0.0,
            q95_ratio: 0.0,
            per_scale: Vec::new(),
            fitted_exponents: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            seed: None,
            sample_count: 0,
            grid: grid.into(),
            skipped: 0,
            verdict: Verdict::Pass,
            notes: Vec::new(),
        }
    }

    /// Fills the summary statistics from a list of ratios.
    pub fn with_ratios(mut self, ratios: &[f64]) -> Self {
        let s = Summary::of(ratios);
        self.max_ratio = s.max;
        self.median_ratio = s.median;
        self.q95_ratio = s.q95;
        self.sample_count = ratios.len();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn push_scale(&mut self, scale: f64, ratios: &[f64]) {
        let s = Summary::of(ratios);
        self.per_scale.push(ScaleRow { scale, max_ratio: s.max, median_ratio: s.median });
    }

    pub fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), value);
    }

    pub fn exponent(&mut self, key: &str, value: f64) {
        self.fitted_exponents.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn fail(&mut self, reason: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.notes.push(reason.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Applies the boundedness protocol to the per-scale maxima: the check fails
    /// only if they increase monotonically by more than 10x across at least
    /// three scales.
    pub fn apply_growth_protocol(&mut self) {
        let maxima: Vec<f64> = self.per_scale.iter().map(|r| r.max_ratio).collect();
        if unbounded_growth(&maxima) {
            self.fail("ratios grow monotonically by more than 10x across the sweep");
        }
        if let Some(v) = sweep_variation(&maxima) {
            self.diag("sweep_variation", v);
        }
    }
}

/// Max, median and 95th percentile (linear interpolation between order statistics).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub max: f64,
    pub median: f64,
    pub q95: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Summary { max: 0.0, median: 0.0, q95: 0.0 };
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Summary { max: v[v.len() - 1], median: quantile_sorted(&v, 0.5), q95: quantile_sorted(&v, 0.95) }
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    v[lo] + (v[hi] - v[lo]) * w
}

/// `num / den`, with `0/0 = 0` and `None` when only the denominator vanishes.
pub fn safe_ratio(num: f64, den: f64) -> Option<f64> {
    if den.abs() < TINY {
        if num.abs() < TINY {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some(num / den)
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Slope of `ln y` against `ln x`, skipping non-positive entries.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    fit_slope(&lx, &ly)
}

/// True when `values` has at least three entries, is non-decreasing and its
/// last entry exceeds ten times its first.
pub fn unbounded_growth(values: &[f64]) -> bool {
    values.len() >= 3
        && values.windows(2).all(|w| w[1] >= w[0])
        && values[values.len() - 1] > 10.0 * values[0]
}

/// `max / min` of a sweep, when all entries are positive.
pub fn sweep_variation(values: &[f64]) -> Option<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(0.0, f64::max);
    (min > 0.0 && min.is_finite()).then(|| max / min)
}

use serde::{Deserialize, Serialize};

use super::DecayTrace;
use crate::error::{Error, Result};
use crate::grid::{NormKind, SampledField, Spectrum};
use crate::propagator::{evolve_spectrum, GUARD_THRESHOLD};
use crate::report::loglog_slope;

/// Remainder decay rate claimed for the continuum problem.
pub const TARGET_REMAINDER_SLOPE: f64 = -5.0;

const TORUS_NOTE: &str = "L1 norms are lattice quadratures on the torus; they stand in for norms on R^d only while the guard window holds";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub t_window: (f64, f64),
    pub points: usize,
    /// Rows inside the time window dropped because the guard was exceeded.
    pub dropped: usize,
    /// Log-log slope of `sup|u|` against `t`; `None` for a degenerate (zero) trace.
    pub slope: Option<f64>,
    /// `sup_t t^{d/2} sup_x |u|` over the window.
    pub plateau: f64,
    pub plateau_min: f64,
    pub plateau_mean: f64,
}

impl DecayFit {
    /// `plateau / plateau_min`.
    pub fn variation(&self) -> f64 {
        if self.plateau_min > 0.0 {
            self.plateau / self.plateau_min
        } else {
            f64::INFINITY
        }
    }
}

/// Fits the decay of `sup|u|` over rows with `t` in `window` that respect the guard.
pub fn decay_trace_analysis(trace: &DecayTrace, window: (f64, f64)) -> Result<DecayFit> {
    let in_window: Vec<_> = trace.rows.iter().filter(|r| r.t >= window.0 && r.t <= window.1).collect();
    let rows: Vec<_> = in_window.iter().filter(|r| r.guard_mass <= GUARD_THRESHOLD).copied().collect();
    if rows.is_empty() {
        return Err(Error::EmptyWindow(format!(
            "no guarded trace rows in t ∈ [{}, {}] ({} rows before the guard)",
            window.0,
            window.1,
            in_window.len()
        )));
    }
    let (ts, sups): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.sup_abs_u > 0.0 && r.t > 0.0).map(|r| (r.t, r.sup_abs_u)).unzip();
    let slope = if ts.len() >= 2 { loglog_slope(&ts, &sups) } else { None };
    let w: Vec<f64> = rows.iter().map(|r| r.weighted_sup).collect();
    Ok(DecayFit {
        t_window: window,
        points: rows.len(),
        dropped: in_window.len() - rows.len(),
        slope,
        plateau: w.iter().copied().fold(0.0, f64::max),
        plateau_min: w.iter().copied().fold(f64::INFINITY, f64::min),
        plateau_mean: w.iter().sum::<f64>() / w.len() as f64,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub t: f64,
    /// `sup_{t₁,t₂ >= t} ‖e^{-it₁Δ}u(t₁) - e^{-it₂Δ}u(t₂)‖₁`.
    pub l1: f64,
    /// `sup_{t₁ >= t} ‖J³(e^{-it₁Δ}u(t₁) - φ₊)‖₂`.
    pub h3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderRow {
    pub t: f64,
    /// `‖u(t) - e^{itΔ}φ₊‖_∞`.
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScatterReport {
    pub t_last: f64,
    #[serde(skip)]
    pub phi_plus: Option<SampledField<f64>>,
    pub phi_plus_l1: f64,
    pub initial_l1: f64,
    pub cauchy_table: Vec<CauchyRow>,
    pub remainder_table: Vec<RemainderRow>,
    pub remainder_slope: Option<f64>,
    pub target_remainder_slope: f64,
    pub exact_scattering: bool,
    /// Cauchy column non-increasing up to 5% slack.
    pub cauchy_monotone: bool,
    pub notes: Vec<String>,
}

impl ScatterReport {
    /// Cauchy value at the first row with `t >= at`.
    pub fn cauchy_at(&self, at: f64) -> Option<f64> {
        self.cauchy_table.iter().find(|r| r.t >= at - 1e-12).map(|r| r.l1)
    }
}

/// Builds `φ₊ = e^{-it_last Δ} u(t_last)` and the Cauchy and remainder tables from
/// solution samples in increasing time order.
pub fn scattering_extract(samples: &[(f64, SampledField<f64>)]) -> Result<ScatterReport> {
    if samples.iter().filter(|(t, _)| *t > 1.0).count() < 3 {
        return Err(Error::Precondition("scattering extraction needs at least 3 sample times beyond t = 1".into()));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Config("sample times must increase".into()));
        }
        w[1].1.grid().same_as(w[0].1.grid())?;
    }
    for (t, u) in samples {
        let g = u.guard_mass();
        if g > GUARD_THRESHOLD {
            return Err(Error::GuardViolated { t: *t, fraction: g });
        }
    }
    let grid = *samples[0].1.grid();
    let (t_last, u_last) = samples.last().expect("non-empty");
    let phi_spec = Spectrum::of(&evolve_spectrum(&Spectrum::of(u_last), -t_last));
    let phi = evolve_spectrum(&phi_spec, 0.0);
    let j3: Vec<f64> = grid.frequency_magnitudes().iter().map(|r| (1.0 + r * r).powi(3)).collect();
    let scale = grid.cell_volume() / grid.len() as f64;

    let mut profiles = Vec::with_capacity(samples.len());
    let mut h3 = Vec::with_capacity(samples.len());
    let mut remainder_table = Vec::with_capacity(samples.len());
    for (t, u) in samples {
        let spec = Spectrum::of(u);
        let v = evolve_spectrum(&spec, -t);
        let vc = v.dft();
        let d: f64 = vc.iter().zip(phi_spec.coeffs()).zip(&j3).map(|((a, b), w)| w * (a - b).norm_sqr()).sum();
        h3.push((d * scale).sqrt());
        let free = evolve_spectrum(&phi_spec, *t);
        remainder_table.push(RemainderRow { t: *t, sup: u.sub(&free)?.max_abs() });
        profiles.push(v);
    }
    let k = profiles.len();
    let mut cauchy_table = vec![CauchyRow { t: 0.0, l1: 0.0, h3: 0.0 }; k];
    let mut l1_sup = 0.0f64;
    let mut h3_sup = 0.0f64;
    for i in (0..k).rev() {
        for j in i + 1..k {
            l1_sup = l1_sup.max(profiles[i].sub(&profiles[j])?.norm(NormKind::Lp(1.0)));
        }
        h3_sup = h3_sup.max(h3[i]);
        cauchy_table[i] = CauchyRow { t: samples[i].0, l1: l1_sup, h3: h3_sup };
    }
    let cauchy_monotone = cauchy_table.windows(2).all(|w| w[1].l1 <= 1.05 * w[0].l1 + 1e-300);
    let peak = samples.iter().map(|(_, u)| u.max_abs()).fold(0.0, f64::max);
    let worst = remainder_table.iter().map(|r| r.sup).fold(0.0, f64::max);
    let mut report = ScatterReport {
        t_last: *t_last,
        phi_plus_l1: phi.norm(NormKind::Lp(1.0)),
        phi_plus: Some(phi),
        initial_l1: samples[0].1.norm(NormKind::Lp(1.0)),
        cauchy_table,
        remainder_table,
        remainder_slope: None,
        target_remainder_slope: TARGET_REMAINDER_SLOPE,
        exact_scattering: worst <= 1e-12 * peak,
        cauchy_monotone,
        notes: vec![TORUS_NOTE.to_string()],
    };
    if let Ok(fit) = remainder_fit(&report, (1.0, t_last / 2.0)) {
        report.remainder_slope = fit.slope;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    pub t_window: (f64, f64),
    pub points: usize,
    pub slope: Option<f64>,
    pub exact_scattering: bool,
    pub target_slope: f64,
}

/// Log-log slope of the remainder over `window`. A finite horizon forces the
/// remainder to zero at `t_last`, so windows should end well before it.
pub fn remainder_fit(report: &ScatterReport, window: (f64, f64)) -> Result<RemainderFit> {
    let mut fit = RemainderFit {
        t_window: window,
        points: 0,
        slope: None,
        exact_scattering: report.exact_scattering,
        target_slope: TARGET_REMAINDER_SLOPE,
    };
    if report.exact_scattering {
        return Ok(fit);
    }
    let (ts, rs): (Vec<f64>, Vec<f64>) = report
        .remainder_table
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1 && r.t > 0.0 && r.sup > 0.0)
        .map(|r| (r.t, r.sup))
        .unzip();
    if ts.len() < 2 {
        return Err(Error::EmptyWindow(format!("fewer than two remainder rows in t ∈ [{}, {}]", window.0, window.1)));
    }
    fit.points = ts.len();
    fit.slope = loglog_slope(&ts, &rs);
    Ok(fit)
}

//! The free Schrödinger group `e^{itΔ} = F⁻¹ e^{-it|ξ|²} F` and checks of its
//! dispersive, Hardy-space and asymptotic behaviour.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, NormKind, SampledField, Spectrum};
use crate::lp::{function_space_norm_of, DyadicLadder, Projection, SpaceSpec};
use crate::report::{loglog_slope, RatioReport};
use crate::scalar::{cis, Complex, Real};

/// Mass fraction above which a periodic field no longer stands in for one on `ℝ^d`.
pub const GUARD_THRESHOLD: f64 = 1e-6;

/// Precomputed `e^{-iτ|ξ|²}` for a fixed step `τ`, applied to DFT coefficients.
#[derive(Clone, Debug)]
pub struct FreeFlight<T> {
    grid: GridSpec<T>,
    tau: T,
    phase: Vec<Complex<T>>,
}

impl<T: Real> FreeFlight<T> {
    pub fn new(grid: GridSpec<T>, tau: T) -> Self {
        let phase = grid
            .frequency_magnitudes()
            .into_iter()
            .map(|r| cis(-tau * r * r))
            .collect();
        FreeFlight { grid, tau, phase }
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// Multiplies DFT coefficients in place.
    pub fn apply_coeffs(&self, coeffs: &mut [Complex<T>]) {
        for (c, p) in coeffs.iter_mut().zip(&self.phase) {
            *c = *c * *p;
        }
    }

    pub fn apply(&self, f: &SampledField<T>) -> SampledField<T> {
        let mut c = f.dft();
        self.apply_coeffs(&mut c);
        SampledField::from_dft(self.grid, c)
    }
}

/// `e^{itΔ} f`.
pub fn evolve<T: Real>(f: &SampledField<T>, t: T) -> SampledField<T> {
    let spec = Spectrum::of(f);
    evolve_spectrum(&spec, t)
}

/// `e^{itΔ} f` from a precomputed spectrum, for evaluating many times.
pub fn evolve_spectrum<T: Real>(spec: &Spectrum<T>, t: T) -> SampledField<T> {
    spec.radial_complex(|r| cis(-t * r * r))
}

fn check_guard(u: &SampledField<f64>, t: f64) -> Result<f64> {
    let g = u.guard_mass();
    if g > GUARD_THRESHOLD {
        return Err(Error::GuardViolated { t, fraction: g });
    }
    Ok(g)
}

/// Per-`t` ratio `‖e^{itΔ}f‖_∞ |t|^{d/2} / ‖f‖₁` and the fitted log-log slope of
/// `‖e^{itΔ}f‖_∞`. The guard-mass fraction is reported, not enforced.
pub fn dispersive_ratio(f: &SampledField<f64>, t_grid: &[f64]) -> Result<RatioReport> {
    let grid = *f.grid();
    let l1 = f.norm(NormKind::Lp(1.0));
    if !(l1 > 0.0) {
        return Err(Error::UndefinedRatio("dispersive ratio needs ‖f‖₁ > 0".into()));
    }
    let half_d = grid.dim() as f64 / 2.0;
    let spec = Spectrum::of(f);
    let mut sups = Vec::with_capacity(t_grid.len());
    let mut ratios = Vec::with_capacity(t_grid.len());
    let mut report = RatioReport::new("dispersive", grid.describe());
    let mut guard = 0.0f64;
    for &t in t_grid {
        let u = evolve_spectrum(&spec, t);
        guard = guard.max(u.guard_mass());
        let sup = u.max_abs();
        let ratio = sup * t.abs().powf(half_d) / l1;
        report.push_scale(t, &[ratio]);
        sups.push(sup);
        ratios.push(ratio);
    }
    let mut report = report.with_ratios(&ratios);
    let ts: Vec<f64> = t_grid.to_vec();
    if let Some(s) = loglog_slope(&ts, &sups) {
        report.exponent("decay_slope", s);
    }
    report.diag("expected_slope", -half_d);
    report.diag("max_guard_mass", guard);
    report.diag("l1_norm", l1);
    if guard > GUARD_THRESHOLD {
        report.note(format!("guard mass {guard:.3e} exceeds {GUARD_THRESHOLD:.0e}; periodic images may affect late times"));
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiyachiVariant {
    /// `‖e^{itΔ}f‖_{F⁰_{1,2}} / ((1+|t|)^{d/2} ‖f‖_{F^d_{1,2}})`.
    Inhomog,
    /// `‖e^{itΔ}P_{<=0}f‖_{Ḟ⁰_{1,2}} / ((1+|t|)^{d/2} ‖f‖_{Ḟ⁰_{1,2}})`.
    LowfreqHomog,
}

/// Per-`t` Hardy-space propagator ratios and the fitted growth exponent of the
/// left-hand norm against `1 + |t|`.
pub fn miyachi_ratio(
    f: &SampledField<f64>,
    t_grid: &[f64],
    variant: MiyachiVariant,
    ladder: &DyadicLadder<f64>,
) -> Result<RatioReport> {
    let grid = *f.grid();
    grid.same_as(ladder.grid())?;
    let d = grid.dim() as f64;
    let spec = Spectrum::of(f);
    let (left_space, right_space) = match variant {
        MiyachiVariant::Inhomog => (SpaceSpec::local_hardy(), SpaceSpec::triebel(false, d, 1.0, 2.0)),
        MiyachiVariant::LowfreqHomog => (SpaceSpec::hardy(), SpaceSpec::hardy()),
    };
    let rhs = function_space_norm_of(&spec, &right_space, ladder);
    let low = match variant {
        MiyachiVariant::Inhomog => spec.clone(),
        MiyachiVariant::LowfreqHomog => Spectrum::of(&spec.radial(|r| Projection::LowPass(0).symbol(r))),
    };
    let mut report = RatioReport::new(
        match variant {
            MiyachiVariant::Inhomog => "miyachi_inhomog",
            MiyachiVariant::LowfreqHomog => "miyachi_lowfreq_homog",
        },
        grid.describe(),
    );
    let (mut growth_x, mut lefts, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    let mut skipped = 0;
    for &t in t_grid {
        let u = evolve_spectrum(&low, t);
        let lhs = function_space_norm_of(&Spectrum::of(&u), &left_space, ladder);
        let bound = (1.0 + t.abs()).powf(d / 2.0) * rhs;
        match crate::report::safe_ratio(lhs, bound) {
            Some(r) => {
                ratios.push(r);
                report.push_scale(t, &[r]);
            }
            None => skipped += 1,
        }
        growth_x.push(1.0 + t.abs());
        lefts.push(lhs);
    }
    let mut report = report.with_ratios(&ratios);
    report.skipped = skipped;
    if let Some(s) = loglog_slope(&growth_x, &lefts) {
        report.exponent("growth", s);
    }
    report.diag("rhs_norm", rhs);
    report.diag("expected_growth", d / 2.0);
    Ok(report)
}

/// Seeded wave-packet ensemble for the Hardy-space propagator bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiyachiEnsemble {
    pub seed: u64,
    pub samples: usize,
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub packets: usize,
    pub spread: f64,
    pub width: f64,
    pub k_max: f64,
    pub t_grid: Vec<f64>,
    pub variant: MiyachiVariant,
}

/// Runs [`miyachi_ratio`] on every member. Per-`t` rows hold the ensemble
/// statistics; `growth_max` is the largest member growth exponent.
pub fn miyachi_ensemble(ens: &MiyachiEnsemble) -> Result<RatioReport> {
    if ens.samples == 0 || ens.t_grid.is_empty() {
        return Err(Error::Config("ensemble needs samples >= 1 and a nonempty t_grid".into()));
    }
    let grid = GridSpec::new(ens.dim, ens.n, ens.half_width)?;
    let ladder = DyadicLadder::for_grid(&grid);
    let members: Vec<Result<RatioReport>> = crate::ensemble::run(ens.seed, ens.samples, |_, rng| {
        let f = crate::ensemble::PacketField::random(ens.dim, rng, ens.packets, ens.spread, ens.width, ens.k_max, false)
            .sample(grid, 1.0, false);
        miyachi_ratio(&f, &ens.t_grid, ens.variant, &ladder)
    });
    let mut per_t: Vec<Vec<f64>> = vec![Vec::new(); ens.t_grid.len()];
    let (mut all, mut growth) = (Vec::new(), Vec::new());
    let mut skipped = 0;
    for m in members {
        let m = m?;
        skipped += m.skipped;
        for row in &m.per_scale {
            if let Some(i) = ens.t_grid.iter().position(|t| *t == row.scale) {
                per_t[i].push(row.max_ratio);
                all.push(row.max_ratio);
            }
        }
        if let Some(g) = m.fitted_exponents.get("growth") {
            growth.push(*g);
        }
    }
    let name = match ens.variant {
        MiyachiVariant::Inhomog => "miyachi_inhomog",
        MiyachiVariant::LowfreqHomog => "miyachi_lowfreq_homog",
    };
    let mut report = RatioReport::new(name, grid.describe()).with_seed(ens.seed).with_ratios(&all);
    report.sample_count = ens.samples;
    report.skipped = skipped;
    for (t, rs) in ens.t_grid.iter().zip(&per_t) {
        report.push_scale(*t, rs);
    }
    if !growth.is_empty() {
        report.exponent("growth_max", growth.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        report.exponent("growth_median", crate::report::Summary::of(&growth).median);
    }
    report.diag("expected_growth", ens.dim as f64 / 2.0);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheckConfig {
    /// Decay surplus `β > 0`.
    pub beta: f64,
    /// Weight exponent, `γ > d/2 + 2β`.
    pub gamma: f64,
    pub t_grid: Vec<f64>,
}

impl AsymptoticCheckConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let d = dim as f64;
        if !(self.beta > 0.0) || !(self.gamma > d / 2.0 + 2.0 * self.beta) {
            return Err(Error::Config(format!(
                "need beta > 0 and gamma > d/2 + 2 beta (d = {dim}, beta = {}, gamma = {})",
                self.beta, self.gamma
            )));
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0)) || self.t_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("t_grid must be positive and strictly increasing".into()));
        }
        Ok(())
    }
}

/// Unitary-normalized transform `(2π)^{-d/2} dx^d Σ_j f(x_j) e^{-i x_j·ζ}` of the
/// lattice samples, evaluated at `ζ = x / (2t)` for every lattice point `x`.
/// This is the exact trigonometric interpolant of the discrete spectrum; the sum
/// is separable and applied one axis at a time.
pub fn rescaled_transform(f: &SampledField<f64>, t: f64) -> SampledField<f64> {
    let grid = *f.grid();
    let n = grid.n();
    let coords: Vec<f64> = (0..n).map(|i| grid.coord(i)).collect();
    let kernel: Vec<Complex<f64>> = (0..n * n)
        .map(|pi| {
            let (p, i) = (pi / n, pi % n);
            cis(-coords[i] * coords[p] / (2.0 * t))
        })
        .collect();
    let mut data = f.values().to_vec();
    let mut line = vec![Complex::new(0.0, 0.0); n];
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        let block = n * stride;
        for base in (0..data.len()).step_by(block) {
            for off in 0..stride {
                for (p, out) in line.iter_mut().enumerate() {
                    let row = &kernel[p * n..(p + 1) * n];
                    *out = (0..n).fold(Complex::new(0.0, 0.0), |acc, i| acc + row[i] * data[base + off + i * stride]);
                }
                for (p, v) in line.iter().enumerate() {
                    data[base + off + p * stride] = *v;
                }
            }
        }
    }
    let w = grid.cell_volume() * (2.0 * std::f64::consts::PI).powf(-(grid.dim() as f64) / 2.0);
    SampledField::from_raw(grid, data.into_iter().map(|v| v * w).collect())
}

/// Leading-order profile `(2it)^{-d/2} e^{i|x|²/(4t)} f̂(x/(2t))` with the
/// principal branch of the power.
pub fn asymptotic_profile(f: &SampledField<f64>, t: f64) -> SampledField<f64> {
    let grid = *f.grid();
    let fhat = rescaled_transform(f, t);
    let pref = Complex::new(0.0, 2.0 * t).powf(-(grid.dim() as f64) / 2.0);
    let mut out = fhat;
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        let x = grid.position(i);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        *v = *v * pref * cis(r2 / (4.0 * t));
    }
    out
}

/// Per-`t` value `‖e^{itΔ}f − profile(t)‖_∞ t^{d/2+β} / ‖⟨x⟩^γ f‖₂` and the fitted
/// decay exponent of the residual.
pub fn asymptotic_residual(f: &SampledField<f64>, cfg: &AsymptoticCheckConfig) -> Result<RatioReport> {
    let grid = *f.grid();
    cfg.validate(grid.dim())?;
    let gamma = cfg.gamma;
    let weighted = SampledField::from_raw(
        grid,
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let x = grid.position(i);
                v * (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(gamma / 2.0)
            })
            .collect(),
    );
    let wnorm = weighted.norm(NormKind::Lp(2.0));
    let expo = grid.dim() as f64 / 2.0 + cfg.beta;
    let spec = Spectrum::of(f);
    let mut report = RatioReport::new("asymptotic_profile", grid.describe());
    let (mut residuals, mut ratios) = (Vec::new(), Vec::new());
    let mut guard = 0.0f64;
    for &t in &cfg.t_grid {
        let u = evolve_spectrum(&spec, t);
        guard = guard.max(check_guard(&u, t)?);
        let res = u.sub(&asymptotic_profile(f, t))?.max_abs();
        let ratio = if wnorm > 0.0 { res * t.powf(expo) / wnorm } else { 0.0 };
        report.push_scale(t, &[ratio]);
        residuals.push(res);
        ratios.push(ratio);
    }
    let mut report = report.with_ratios(&ratios);
    match loglog_slope(&cfg.t_grid, &residuals) {
        Some(s) => report.exponent("residual_slope", s),
        None => report.note("residual identically zero"),
    }
    report.diag("expected_slope_bound", -expo);
    report.diag("weighted_norm", wnorm);
    report.diag("max_guard_mass", guard);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_and_group_law() {
        let grid = GridSpec::<f64>::new(2, 32, 6.0).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex::new((-(x[0] * x[0] + x[1] * x[1])).exp(), x[0].sin() * 0.1));
        assert!(evolve(&f, 0.0).sub(&f).unwrap().max_abs() < 1e-14);
        let a = evolve(&evolve(&f, 0.3), 0.45);
        let b = evolve(&f, 0.75);
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        let flight = FreeFlight::new(grid, 0.75);
        assert!(flight.apply(&f).sub(&b).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn zero_field_is_an_undefined_dispersive_ratio() {
        let grid = GridSpec::<f64>::new(1, 64, 10.0).unwrap();
        assert!(matches!(dispersive_ratio(&SampledField::zeros(grid), &[1.0]), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn asymptotic_config_validation() {
        let cfg = AsymptoticCheckConfig { beta: 0.5, gamma: 1.0, t_grid: vec![1.0] };
        assert!(cfg.validate(1).is_err());
        let cfg = AsymptoticCheckConfig { beta: 0.5, gamma: 2.0, t_grid: vec![2.0, 1.0] };
        assert!(cfg.validate(1).is_err());
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let grid = GridSpec::<f64>::new(1, 64, 10.0).unwrap();
        let cfg = AsymptoticCheckConfig { beta: 0.5, gamma: 2.0, t_grid: vec![1.0, 2.0] };
        let rep = asymptotic_residual(&SampledField::zeros(grid), &cfg).unwrap();
        assert_eq!(rep.max_ratio, 0.0);
    }
}

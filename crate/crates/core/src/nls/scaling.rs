use super::{gradient_energy, simulate_from, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::{SampledField, Spectrum};
use crate::report::RatioReport;

const TAIL: f64 = 1e-16;

fn dilate_unchecked(u: &SampledField<f64>, lambda: usize) -> SampledField<f64> {
    let grid = *u.grid();
    let (n, d) = (grid.n() as isize, grid.dim());
    let amp = (lambda as f64).sqrt();
    let mut out = SampledField::zeros(grid);
    for (i, v) in out.values_mut().iter_mut().enumerate() {
        let idx = grid.multi_index(i);
        let mut src = [0usize; 3];
        let mut inside = true;
        for a in 0..d {
            let s = lambda as isize * (idx[a] as isize - n / 2) + n / 2;
            if s < 0 || s >= n {
                inside = false;
                break;
            }
            src[a] = s as usize;
        }
        if inside {
            *v = u.values()[grid.flat_index(&src)] * amp;
        }
    }
    out
}

/// `λ^{1/2} u(λx)` on the same lattice, for integer `λ >= 1`. Samples whose
/// preimage leaves the box are zero, so `u` must be negligible outside
/// `|x_i| < L/λ` and band-limited below `Nyquist/λ`.
pub fn dilate(u: &SampledField<f64>, lambda: usize) -> Result<SampledField<f64>> {
    if lambda == 0 {
        return Err(Error::Config("dilation factor must be at least 1".into()));
    }
    let grid = *u.grid();
    let spec = Spectrum::of(u);
    let beyond = spec.energy_fraction_beyond(grid.nyquist() / lambda as f64);
    if beyond > TAIL {
        return Err(Error::Precondition(format!(
            "dilation by {lambda} exceeds Nyquist: spectral energy fraction {beyond:.3e} above Nyquist/{lambda}"
        )));
    }
    let edge = grid.half_width() / lambda as f64;
    let (mut outside, mut total) = (0.0, 0.0);
    for (i, v) in u.values().iter().enumerate() {
        let x = grid.position(i);
        let m = v.norm_sqr();
        total += m;
        if x[..grid.dim()].iter().any(|c| c.abs() >= edge) {
            outside += m;
        }
    }
    if total > 0.0 && outside / total > TAIL {
        return Err(Error::Precondition(format!(
            "field carries mass fraction {:.3e} outside |x_i| < L/{lambda}",
            outside / total
        )));
    }
    Ok(dilate_unchecked(u, lambda))
}

/// Checks `‖∇(λ^{1/2}u₀(λ·))‖₂ = λ^{(3-d)/2}‖∇u₀‖₂` (invariance in 3D) and that
/// evolving the rescaled datum for `t/λ²` matches the rescaled evolution at `t`
/// within ten times the one-run error `‖u_dt(t) - u_{dt/2}(t)‖_∞`.
pub fn scaling_check(u0: &SampledField<f64>, lambda: usize, cfg: &SolverConfig, t: f64) -> Result<RatioReport> {
    let g0 = dilate(u0, lambda)?;
    let l = lambda as f64;
    let d = u0.grid().dim() as f64;
    let mut report = RatioReport::new("scaling", u0.grid().describe());

    let expect = l.powf((3.0 - d) / 2.0) * gradient_energy(u0).sqrt();
    let got = gradient_energy(&g0).sqrt();
    let h1 = if expect > 0.0 { (got - expect).abs() / expect } else { got };
    report.diag("h1_relative_error", h1);

    let run = |f: &SampledField<f64>, t: f64, dt: f64| -> Result<SampledField<f64>> {
        let c = SolverConfig { t_final: t, dt, sample_every: usize::MAX, ..cfg.clone() };
        Ok(simulate_from(&c, f.clone())?.0.u)
    };
    let ((ut, ut_half), gt) = rayon::join(
        || rayon::join(|| run(u0, t, cfg.dt), || run(u0, t, cfg.dt / 2.0)),
        || run(&g0, t / (l * l), cfg.dt / (l * l)),
    );
    let (ut, ut_half, gt) = (ut?, ut_half?, gt?);
    let peak = gt.max_abs().max(1e-300);
    let commutation = dilate_unchecked(&ut, lambda).sub(&gt)?.max_abs() / peak;
    let one_run = ut.sub(&ut_half)?.max_abs() / ut.max_abs().max(1e-300);
    report.diag("commutation_error", commutation);
    report.diag("one_run_error", one_run);
    report = report.with_ratios(&[commutation / (10.0 * one_run + 1e-12)]);
    if h1 > 1e-10 {
        report.fail(format!("H1 invariance off by {h1:.3e}"));
    }
    if commutation > 10.0 * one_run + 1e-12 {
        report.fail(format!("scaling and evolution fail to commute: {commutation:.3e} vs one-run error {one_run:.3e}"));
    }
    Ok(report)
}

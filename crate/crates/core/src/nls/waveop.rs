use serde::{Deserialize, Serialize};

use super::Dealias;
use crate::error::{Error, Result};
use crate::grid::{forward_fft, inverse_fft, NormKind, SampledField};
use crate::lp::{fractional_multiplier, Fractional};
use crate::scalar::{cis, Complex};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveOperatorConfig {
    pub mu: f64,
    /// Finite horizon `S` standing in for `∞`.
    pub horizon: f64,
    /// Quadrature step in `s`.
    pub ds: f64,
    pub max_iter: usize,
    /// Stop once successive iterates differ by less than this in `sup_t ‖·‖₂`.
    pub tol: f64,
    /// Upper bound on `‖φ₊‖₁` and `‖J³φ₊‖₂`.
    pub smallness: f64,
    pub dealias: Dealias,
}

impl Default for WaveOperatorConfig {
    fn default() -> Self {
        WaveOperatorConfig {
            mu: 1.0,
            horizon: 8.0,
            ds: 0.05,
            max_iter: 20,
            tol: 1e-8,
            smallness: 100.0,
            dealias: Dealias::Padded2xFilter,
        }
    }
}

impl WaveOperatorConfig {
    pub fn validate(&self) -> Result<()> {
        if ![-1.0, 0.0, 1.0].contains(&self.mu) {
            return Err(Error::Config(format!("mu must be -1, 0 or +1, got {}", self.mu)));
        }
        if !(self.horizon > 0.0 && self.ds > 0.0 && self.ds <= self.horizon) || self.max_iter == 0 {
            return Err(Error::Config("need 0 < ds <= horizon and max_iter >= 1".into()));
        }
        let k = self.horizon / self.ds;
        if (k - k.round()).abs() > 1e-9 * k {
            return Err(Error::Config(format!("horizon {} is not a multiple of ds {}", self.horizon, self.ds)));
        }
        Ok(())
    }

    fn steps(&self) -> usize {
        (self.horizon / self.ds).round() as usize
    }
}

#[derive(Clone, Debug)]
pub struct WaveOperatorSolution {
    pub times: Vec<f64>,
    /// `u(s_i)` on the quadrature nodes.
    pub states: Vec<SampledField<f64>>,
    pub iterations: usize,
    /// `sup_t ‖u⁽ᵏ⁺¹⁾ - u⁽ᵏ⁾‖₂` per iteration.
    pub differences: Vec<f64>,
    /// False when `max_iter` ran out before reaching `tol`.
    pub converged: bool,
}

impl WaveOperatorSolution {
    pub fn initial(&self) -> &SampledField<f64> {
        &self.states[0]
    }
}

/// Solves `u(t) = e^{itΔ}φ₊ + iμ∫_t^S e^{i(t-s)Δ}|u|⁴u(s) ds` on `[0, S]` by Picard
/// iteration. Profiles `e^{-itΔ}u(t)` are held as DFT coefficients and the integral
/// is accumulated backwards from `S` by the trapezoid rule.
pub fn wave_operator_solve(phi_plus: &SampledField<f64>, cfg: &WaveOperatorConfig) -> Result<WaveOperatorSolution> {
    cfg.validate()?;
    let l1 = phi_plus.norm(NormKind::Lp(1.0));
    let h3 = fractional_multiplier(phi_plus, Fractional::J(3.0)).norm(NormKind::Lp(2.0));
    if l1 > cfg.smallness || h3 > cfg.smallness {
        return Err(Error::Precondition(format!(
            "φ₊ is not small: ‖φ₊‖₁ = {l1:.3e}, ‖J³φ₊‖₂ = {h3:.3e}, threshold {:.3e}",
            cfg.smallness
        )));
    }
    let grid = *phi_plus.grid();
    let (n, d) = (grid.n(), grid.dim());
    let m = cfg.steps();
    let times: Vec<f64> = (0..=m).map(|i| i as f64 * cfg.ds).collect();
    let mask = cfg.dealias.mask(&grid);
    let r2: Vec<f64> = grid.frequency_magnitudes().iter().map(|r| r * r).collect();
    let phi_hat = phi_plus.dft();
    let scale = grid.cell_volume() / grid.len() as f64;

    let to_field = |profile: &[Complex<f64>], t: f64| -> Vec<Complex<f64>> {
        let mut c: Vec<Complex<f64>> = profile.iter().zip(&r2).map(|(v, r)| v * cis(-t * r)).collect();
        inverse_fft(&mut c, n, d);
        c
    };

    let mut profiles: Vec<Vec<Complex<f64>>> = vec![phi_hat.clone(); m + 1];
    let mut differences = Vec::new();
    let mut iterations = 0;
    let mut growth = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        // w(s) = e^{-isΔ} P(|u|⁴u)(s) in Fourier
        let w: Vec<Vec<Complex<f64>>> = profiles
            .iter()
            .zip(&times)
            .map(|(p, &t)| {
                let mut u = to_field(p, t);
                for v in u.iter_mut() {
                    let a = v.norm_sqr();
                    *v *= a * a;
                }
                forward_fft(&mut u, n, d);
                for ((v, mk), r) in u.iter_mut().zip(&mask).zip(&r2) {
                    *v *= cis(t * r) * mk;
                }
                u
            })
            .collect();
        let mut next = vec![phi_hat.clone(); m + 1];
        let mut acc = vec![Complex::new(0.0, 0.0); grid.len()];
        let factor = Complex::new(0.0, cfg.mu);
        for i in (0..m).rev() {
            for ((a, x), y) in acc.iter_mut().zip(&w[i]).zip(&w[i + 1]) {
                *a += (x + y) * (0.5 * cfg.ds);
            }
            for ((o, p), a) in next[i].iter_mut().zip(&phi_hat).zip(&acc) {
                *o = p + factor * a;
            }
        }
        let diff = next
            .iter()
            .zip(&profiles)
            .map(|(a, b)| (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * scale).sqrt())
            .fold(0.0, f64::max);
        profiles = next;
        if let Some(&prev) = differences.last() {
            growth = if diff > prev { growth + 1 } else { 0 };
        }
        differences.push(diff);
        if diff < cfg.tol {
            break;
        }
        if growth >= 3 {
            return Err(Error::Divergence { iterations, difference: diff });
        }
    }
    let converged = differences.last().is_some_and(|&dlast| dlast < cfg.tol);
    let states = profiles
        .iter()
        .zip(&times)
        .map(|(p, &t)| SampledField::from_raw(grid, to_field(p, t)))
        .collect();
    Ok(WaveOperatorSolution { times, states, iterations, differences, converged })
}

/// `‖u_ds(0) - u_{ds/2}(0)‖₂`: sensitivity of the fixed point to the quadrature step.
pub fn wave_operator_refinement(phi_plus: &SampledField<f64>, cfg: &WaveOperatorConfig) -> Result<f64> {
    let coarse = wave_operator_solve(phi_plus, cfg)?;
    let fine = wave_operator_solve(phi_plus, &WaveOperatorConfig { ds: cfg.ds / 2.0, ..cfg.clone() })?;
    Ok(coarse.initial().sub(fine.initial())?.norm(NormKind::Lp(2.0)))
}

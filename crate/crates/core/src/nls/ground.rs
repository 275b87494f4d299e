use serde::{Deserialize, Serialize};

use super::{energy, gradient_energy};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};

fn require_3d(grid: &GridSpec<f64>) -> Result<()> {
    if grid.dim() != 3 {
        return Err(Error::Precondition(format!("the ground state W is posed in 3D, got d = {}", grid.dim())));
    }
    Ok(())
}

/// `W(x) = (1 + |x|²/3)^{-1/2}`, which solves `ΔW + W⁵ = 0` on `ℝ³`.
pub fn ground_state_field(grid: &GridSpec<f64>) -> Result<SampledField<f64>> {
    require_3d(grid)?;
    Ok(SampledField::from_real_fn(*grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (1.0 + r2 / 3.0).powf(-0.5)
    }))
}

/// Box-truncated quantities of `W`. `W ∉ L²(ℝ³)`, so these depend on the box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundStateDiagnostics {
    pub half_width: f64,
    /// `‖∇W‖₂` over the box from the exact gradient.
    pub grad_l2: f64,
    /// `∫ W⁶` over the box.
    pub w6: f64,
    /// Focusing energy `½‖∇W‖₂² - ⅙∫W⁶` over the box.
    pub energy: f64,
}

pub fn ground_state_diagnostics(grid: &GridSpec<f64>) -> Result<GroundStateDiagnostics> {
    require_3d(grid)?;
    let (mut g2, mut w6) = (0.0, 0.0);
    for i in 0..grid.len() {
        let x = grid.position(i);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let base = 1.0 + r2 / 3.0;
        g2 += r2 / 9.0 * base.powi(-3);
        w6 += base.powi(-3);
    }
    let vol = grid.cell_volume();
    let (g2, w6) = (g2 * vol, w6 * vol);
    Ok(GroundStateDiagnostics { half_width: grid.half_width(), grad_l2: g2.sqrt(), w6, energy: 0.5 * g2 - w6 / 6.0 })
}

/// Focusing threshold comparison `E(u₀) < E(W)`, `‖∇u₀‖₂ < ‖∇W‖₂` against the
/// box-truncated `W`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub energy_u0: f64,
    pub grad_u0: f64,
    pub energy_w: f64,
    pub grad_w: f64,
    pub half_width: f64,
    pub below_threshold: bool,
    pub caveat: String,
}

pub fn threshold_diagnostics(u0: &SampledField<f64>) -> Result<ThresholdReport> {
    let w = ground_state_diagnostics(u0.grid())?;
    let energy_u0 = energy(u0, -1.0);
    let grad_u0 = gradient_energy(u0).sqrt();
    Ok(ThresholdReport {
        energy_u0,
        grad_u0,
        energy_w: w.energy,
        grad_w: w.grad_l2,
        half_width: w.half_width,
        below_threshold: energy_u0 < w.energy && grad_u0 < w.grad_l2,
        caveat: format!("W is truncated to the box [-{0}, {0})^3; its tail carries energy of order 1/L", w.half_width),
    })
}

//! Littlewood–Paley projections, fractional derivatives and Besov /
//! Triebel–Lizorkin norms on lattice fields.

mod bump;
mod norms;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{GridSpec, SampledField, Spectrum};
use crate::scalar::{ceil_log2, floor_log2, Real};

pub use bump::{chi, eta, smooth_step, BumpProfile};
pub use norms::{function_space_norm, function_space_norm_of, Family, SpaceSpec};

/// Dyadic index range that can act on a lattice.
///
/// `2^k_min <= π/L` (the lowest nonzero frequency) and `2^k_max` bounds every
/// lattice frequency, so `Σ_{k_min..=k_max} χ(ξ/2^k) = 1` for every nonzero
/// lattice `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicLadder<T> {
    grid: GridSpec<T>,
    k_min: i32,
    k_max: i32,
}

impl<T: Real> DyadicLadder<T> {
    pub fn for_grid(grid: &GridSpec<T>) -> Self {
        DyadicLadder {
            grid: *grid,
            k_min: floor_log2(grid.dxi()),
            k_max: ceil_log2(grid.max_frequency()),
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    /// Bands carrying lattice frequencies, `k_min..=k_max`.
    pub fn homogeneous_bands(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max
    }

    /// `0..=max(k_max, 0)`.
    pub fn inhomogeneous_bands(&self) -> std::ops::RangeInclusive<i32> {
        0..=self.k_max.max(0)
    }

    fn in_window(&self, k: i32) -> bool {
        k >= self.k_min - 2 && k <= self.k_max + 2
    }
}

/// Which Littlewood–Paley operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// `Ṗ_k`, symbol `χ(ξ/2^k)`.
    HomogBand(i32),
    /// `P_{<=k}`, symbol `η(ξ/2^k)`.
    LowPass(i32),
    /// `P_k`: `η(ξ)` at `k = 0`, `χ(ξ/2^k)` above, zero below.
    InhomogBand(i32),
}

impl Projection {
    /// Radial symbol at `|ξ| = r`.
    pub fn symbol<T: Real>(&self, r: T) -> T {
        match *self {
            Projection::HomogBand(k) => chi(r / T::pow2(k)),
            Projection::LowPass(k) => eta(r / T::pow2(k)),
            Projection::InhomogBand(k) if k < 0 => T::zero(),
            Projection::InhomogBand(0) => eta(r),
            Projection::InhomogBand(k) => chi(r / T::pow2(k)),
        }
    }

    /// True when the ladder convention forces the zero field.
    fn vanishes_on<T: Real>(&self, ladder: &DyadicLadder<T>) -> bool {
        match *self {
            Projection::HomogBand(k) => !ladder.in_window(k),
            Projection::InhomogBand(k) => k < 0 || k > ladder.k_max.max(0) + 2,
            Projection::LowPass(_) => false,
        }
    }
}

pub fn project<T: Real>(
    f: &SampledField<T>,
    kind: Projection,
    ladder: &DyadicLadder<T>,
) -> Result<SampledField<T>> {
    f.grid().same_as(ladder.grid())?;
    if kind.vanishes_on(ladder) {
        return Ok(SampledField::zeros(*f.grid()));
    }
    Ok(Spectrum::of(f).radial(|r| kind.symbol(r)))
}

/// Same as [`project`] but reusing an existing spectrum.
pub fn project_spectrum<T: Real>(
    spec: &Spectrum<T>,
    kind: Projection,
    ladder: &DyadicLadder<T>,
) -> SampledField<T> {
    if kind.vanishes_on(ladder) {
        return SampledField::zeros(*spec.grid());
    }
    spec.radial(|r| kind.symbol(r))
}

/// `D^s = F⁻¹|ξ|^s F` (zero mode removed) or `J^s = F⁻¹(1+|ξ|²)^{s/2} F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Fractional {
    D(f64),
    J(f64),
}

impl Fractional {
    pub fn symbol<T: Real>(&self, r: T) -> T {
        match *self {
            Fractional::D(s) => {
                if r == T::zero() {
                    T::zero()
                } else {
                    r.powf(T::of(s))
                }
            }
            Fractional::J(s) => (T::one() + r * r).powf(T::of(s / 2.0)),
        }
    }
}

pub fn fractional_multiplier<T: Real>(f: &SampledField<T>, op: Fractional) -> SampledField<T> {
    Spectrum::of(f).radial(|r| op.symbol(r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::NormKind;
    use crate::scalar::Complex;

    #[test]
    fn ladder_bounds() {
        let grid = GridSpec::<f64>::new(3, 64, 10.0).unwrap();
        let ladder = DyadicLadder::for_grid(&grid);
        assert!(f64::pow2(ladder.k_min()) <= grid.dxi());
        assert!(f64::pow2(ladder.k_min() + 1) > grid.dxi());
        assert!(f64::pow2(ladder.k_max()) >= grid.max_frequency());
        assert!(f64::pow2(ladder.k_max() - 1) < grid.max_frequency());
    }

    #[test]
    fn single_mode_lands_in_its_band() {
        // L = π so lattice frequencies are integers; ξ₀ = 8 = 2^3.
        let grid = GridSpec::<f64>::new(1, 64, std::f64::consts::PI).unwrap();
        let ladder = DyadicLadder::for_grid(&grid);
        let f = SampledField::plane_wave(grid, &[8], Complex::new(1.0, 0.5));
        let same = project(&f, Projection::HomogBand(3), &ladder).unwrap();
        assert!(same.sub(&f).unwrap().max_abs() < 1e-13);
        for k in [2, 4] {
            assert!(project(&f, Projection::HomogBand(k), &ladder).unwrap().max_abs() < 1e-13);
        }
        let low = project(&f, Projection::LowPass(2), &ladder).unwrap();
        assert!(low.max_abs() < 1e-13);
        assert!(project(&f, Projection::HomogBand(40), &ladder).unwrap().is_zero());
        assert!(project(&f, Projection::InhomogBand(-1), &ladder).unwrap().is_zero());
    }

    #[test]
    fn d_of_single_mode() {
        let grid = GridSpec::<f64>::new(2, 16, 2.0).unwrap();
        let f = SampledField::plane_wave(grid, &[3, -2], Complex::new(1.0, 0.0));
        let r = grid.dxi() * 13f64.sqrt();
        let g = fractional_multiplier(&f, Fractional::D(0.7));
        let expect = f.scale_real(r.powf(0.7));
        assert!(g.sub(&expect).unwrap().max_abs() < 1e-12);
        let id = fractional_multiplier(&f, Fractional::J(0.0));
        assert!(id.sub(&f).unwrap().max_abs() < 1e-13);
        assert!(fractional_multiplier(&SampledField::constant(grid, Complex::new(1.0, 0.0)), Fractional::D(1.0)).max_abs() < 1e-14);
        let _ = NormKind::Linf;
    }
}

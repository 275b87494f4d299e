use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lp_of_magnitudes, SampledField, Spectrum};
use crate::scalar::Real;

use super::{project_spectrum, DyadicLadder, Projection};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Besov,
    Triebel,
}

/// Norm selector `B^s_{p,q}` / `F^s_{p,q}`, homogeneous or not. `p` and `q` may be
/// `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub family: Family,
    pub homogeneous: bool,
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl SpaceSpec {
    pub fn new(family: Family, homogeneous: bool, s: f64, p: f64, q: f64) -> Result<Self> {
        if !(p >= 1.0) || !(q >= 1.0) {
            return Err(Error::Config(format!("exponents must satisfy p, q >= 1 (p = {p}, q = {q})")));
        }
        if !s.is_finite() {
            return Err(Error::Config(format!("regularity must be finite, got {s}")));
        }
        Ok(SpaceSpec { family, homogeneous, s, p, q })
    }

    /// `H¹ ~ Ḟ⁰_{1,2}`.
    pub const fn hardy() -> Self {
        SpaceSpec { family: Family::Triebel, homogeneous: true, s: 0.0, p: 1.0, q: 2.0 }
    }

    /// `h¹ ~ F⁰_{1,2}`.
    pub const fn local_hardy() -> Self {
        SpaceSpec { family: Family::Triebel, homogeneous: false, s: 0.0, p: 1.0, q: 2.0 }
    }

    pub const fn triebel(homogeneous: bool, s: f64, p: f64, q: f64) -> Self {
        SpaceSpec { family: Family::Triebel, homogeneous, s, p, q }
    }

    pub const fn besov(homogeneous: bool, s: f64, p: f64, q: f64) -> Self {
        SpaceSpec { family: Family::Besov, homogeneous, s, p, q }
    }
}

pub fn function_space_norm<T: Real>(
    f: &SampledField<T>,
    spec: &SpaceSpec,
    ladder: &DyadicLadder<T>,
) -> Result<T> {
    f.grid().same_as(ladder.grid())?;
    Ok(function_space_norm_of(&Spectrum::of(f), spec, ladder))
}

/// Norm from a precomputed spectrum. Bands are visited in increasing `k` and
/// accumulated in place, so memory stays at two fields regardless of ladder length.
pub fn function_space_norm_of<T: Real>(
    spectrum: &Spectrum<T>,
    spec: &SpaceSpec,
    ladder: &DyadicLadder<T>,
) -> T {
    let bands: Vec<i32> = if spec.homogeneous {
        ladder.homogeneous_bands().collect()
    } else {
        ladder.inhomogeneous_bands().collect()
    };
    let band = |k: i32| {
        let kind = if spec.homogeneous { Projection::HomogBand(k) } else { Projection::InhomogBand(k) };
        project_spectrum(spectrum, kind, ladder)
    };
    let weight = |k: i32| T::of(2f64.powf(k as f64 * spec.s));
    let grid = spectrum.grid();

    match spec.family {
        Family::Besov => {
            let per_band: Vec<T> =
                bands.iter().map(|&k| weight(k) * band_lp(&band(k), spec.p)).collect();
            lq(&per_band, spec.q)
        }
        Family::Triebel => {
            let mut acc = vec![T::zero(); grid.len()];
            let q = spec.q;
            let qt = T::of(q);
            for &k in &bands {
                let w = weight(k);
                let b = band(k);
                for (a, v) in acc.iter_mut().zip(b.values()) {
                    let m = w * v.norm();
                    if q == f64::INFINITY {
                        *a = a.max(m);
                    } else if q == 2.0 {
                        *a = *a + m * m;
                    } else if q == 1.0 {
                        *a = *a + m;
                    } else {
                        *a = *a + m.powf(qt);
                    }
                }
            }
            if q == 2.0 {
                acc.iter_mut().for_each(|a| *a = a.sqrt());
            } else if q != 1.0 && q != f64::INFINITY {
                let inv = qt.recip();
                acc.iter_mut().for_each(|a| *a = a.powf(inv));
            }
            lp_of_magnitudes(grid, &acc, spec.p)
        }
    }
}

fn band_lp<T: Real>(f: &SampledField<T>, p: f64) -> T {
    let mags: Vec<T> = f.values().iter().map(|v| v.norm()).collect();
    lp_of_magnitudes(f.grid(), &mags, p)
}

fn lq<T: Real>(v: &[T], q: f64) -> T {
    if q == f64::INFINITY {
        return v.iter().fold(T::zero(), |m, x| m.max(*x));
    }
    let qt = T::of(q);
    v.iter().map(|x| x.powf(qt)).sum::<T>().powf(qt.recip())
}

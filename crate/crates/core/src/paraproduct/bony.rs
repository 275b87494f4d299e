use crate::error::Result;
use crate::grid::{GridSpec, NormKind, SampledField, Spectrum};
use crate::lp::{chi, eta, DyadicLadder};
use crate::scalar::{czero, Complex, Real};

/// Pairing window `|j - m| <= 3` and low-frequency offset `m - 5` of the split.
pub const PAIR_WINDOW: i32 = 3;
pub const LOW_OFFSET: i32 = 5;

/// `fg = I + II + III`:
///
/// * `I   = Σ_m Ṗ_m Σ_{|j-m|<=3} (Ṗ_j f · P_{<=m-5} g)` (high-low),
/// * `II  = Σ_m Ṗ_m Σ_{|j-m|<=3} (P_{<=m-5} f · Ṗ_j g)` (low-high),
/// * `III = Σ_m Ṗ_m (P_{>m-5} f · P_{>m-5} g)` plus the mean of `fg` (high-high).
///
/// `Ṗ_m` of a product of two `P_{<=m-5}` pieces vanishes, and `Ṗ_m` of
/// `Ṗ_j f · P_{<=m-5} g` vanishes for `|j - m| > 3`, so the three pieces sum to
/// `Σ_m Ṗ_m(fg)` plus the mean, which is `fg` on the lattice.
#[derive(Clone, Debug)]
pub struct BonySplit<T> {
    pub high_low: SampledField<T>,
    pub low_high: SampledField<T>,
    pub high_high: SampledField<T>,
    /// `‖fg − (I + II + III)‖₂`.
    pub residual: T,
}

impl<T: Real> BonySplit<T> {
    pub fn sum(&self) -> SampledField<T> {
        self.high_low
            .add(&self.low_high)
            .and_then(|s| s.add(&self.high_high))
            .expect("pieces share a grid")
    }
}

fn window_symbol<T: Real>(r: T, lo: i32, hi: i32) -> T {
    // Σ_{j=lo..=hi} χ(r/2^j) = η(r/2^hi) − η(r/2^(lo-1))
    eta(r / T::pow2(hi)) - eta(r / T::pow2(lo - 1))
}

fn accumulate<T: Real>(acc: &mut [Complex<T>], product: &SampledField<T>, mags: &[T], m: i32) {
    let c = product.dft();
    let scale = T::pow2(m);
    for ((a, v), r) in acc.iter_mut().zip(c).zip(mags) {
        let w = chi(*r / scale);
        if w != T::zero() {
            *a = *a + v * w;
        }
    }
}

pub fn bony_split<T: Real>(
    f: &SampledField<T>,
    g: &SampledField<T>,
    ladder: &DyadicLadder<T>,
) -> Result<BonySplit<T>> {
    f.grid().same_as(g.grid())?;
    f.grid().same_as(ladder.grid())?;
    let grid: GridSpec<T> = *f.grid();
    let (sf, sg) = (Spectrum::of(f), Spectrum::of(g));
    let mags = sf.magnitudes().to_vec();
    let mut acc = [vec![czero::<T>(); grid.len()], vec![czero(); grid.len()], vec![czero(); grid.len()]];
    for m in ladder.homogeneous_bands() {
        let low_scale = T::pow2(m - LOW_OFFSET);
        let low = |r: T| eta(r / low_scale);
        let high = |r: T| T::one() - eta(r / low_scale);
        let pair = |r: T| window_symbol(r, m - PAIR_WINDOW, m + PAIR_WINDOW);

        let hl = sf.radial(pair).mul(&sg.radial(low))?;
        accumulate(&mut acc[0], &hl, &mags, m);
        let lh = sf.radial(low).mul(&sg.radial(pair))?;
        accumulate(&mut acc[1], &lh, &mags, m);
        let hh = sf.radial(high).mul(&sg.radial(high))?;
        accumulate(&mut acc[2], &hh, &mags, m);
    }
    let product = f.mul(g)?;
    // the mean of fg is the zero-frequency coefficient
    acc[2][0] = acc[2][0] + product.dft()[0];
    let [a, b, c] = acc;
    let split = BonySplit {
        high_low: SampledField::from_dft(grid, a),
        low_high: SampledField::from_dft(grid, b),
        high_high: SampledField::from_dft(grid, c),
        residual: T::zero(),
    };
    let residual = product.sub(&split.sum())?.norm(NormKind::Lp(2.0));
    Ok(BonySplit { residual, ..split })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{bandlimited_field, member_rng};

    fn pi_grid(n: usize) -> GridSpec<f64> {
        GridSpec::new(1, n, std::f64::consts::PI).unwrap()
    }

    #[test]
    fn high_low_modes_land_in_first_piece() {
        let grid = pi_grid(512);
        let ladder = DyadicLadder::for_grid(&grid);
        let f = SampledField::plane_wave(grid, &[128], Complex::new(1.0, 0.0));
        let g = SampledField::plane_wave(grid, &[2], Complex::new(1.0, 0.0));
        let split = bony_split(&f, &g, &ladder).unwrap();
        let fg = f.mul(&g).unwrap();
        assert!(split.high_low.sub(&fg).unwrap().max_abs() < 1e-12);
        assert!(split.low_high.max_abs() < 1e-12 && split.high_high.max_abs() < 1e-12);
        let swapped = bony_split(&g, &f, &ladder).unwrap();
        assert!(swapped.low_high.sub(&fg).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn equal_modes_land_in_high_high() {
        let grid = pi_grid(256);
        let ladder = DyadicLadder::for_grid(&grid);
        let f = SampledField::from_real_fn(grid, |x| (16.0 * x[0]).cos());
        let split = bony_split(&f, &f, &ladder).unwrap();
        let ff = f.mul(&f).unwrap();
        assert!(split.high_high.sub(&ff).unwrap().max_abs() < 1e-12);
        assert!(split.high_low.max_abs() < 1e-12 && split.low_high.max_abs() < 1e-12);
    }

    #[test]
    fn reconstruction_of_random_fields() {
        let grid = GridSpec::<f64>::new(2, 64, 5.0).unwrap();
        let ladder = DyadicLadder::for_grid(&grid);
        let cut = grid.nyquist() / 2.0;
        let f = bandlimited_field(grid, &mut member_rng(11, 0), cut, false, false);
        let g = bandlimited_field(grid, &mut member_rng(11, 1), cut, false, false);
        let split = bony_split(&f, &g, &ladder).unwrap();
        let norm = f.mul(&g).unwrap().norm(NormKind::Lp(2.0));
        assert!(split.residual <= 1e-10 * norm, "{} vs {}", split.residual, norm);
    }
}

//! Periodic lattices, sampled fields and Fourier multipliers.
//!
//! The box is `[-L, L)^d` with `n` samples per axis. The forward transform is
//! the unnormalized `F f(ξ) = ∫ e^{-ix·ξ} f(x) dx`, discretized as
//! `dx^d Σ_j f(x_j) e^{-i x_j·ξ}` on the lattice `ξ ∈ (π/L)·{-n/2, …, n/2-1}^d`;
//! the inverse carries the `(2π)^{-d}` factor, so Plancherel reads
//! `‖f‖₂² = (2L)^{-d} Σ_ξ |F f(ξ)|²` exactly on the lattice.

mod fft;
pub mod io;
mod multiplier;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, czero, Complex, Real};

pub use multiplier::{apply_multiplier, Multiplier};

pub(crate) use fft::{forward as forward_fft, inverse as inverse_fft};

/// Lattice geometry: dimension, samples per axis and box half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    dim: usize,
    n: usize,
    half_width: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(dim: usize, n: usize, half_width: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "samples per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        Ok(GridSpec { dim, n, half_width })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_width(&self) -> T {
        self.half_width
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dx(&self) -> T {
        T::of(2.0) * self.half_width / T::of_usize(self.n)
    }

    /// Quadrature weight `dx^d`.
    #[inline]
    pub fn cell_volume(&self) -> T {
        self.dx().powi(self.dim as i32)
    }

    /// Box volume `(2L)^d`.
    #[inline]
    pub fn volume(&self) -> T {
        (T::of(2.0) * self.half_width).powi(self.dim as i32)
    }

    /// Lattice frequency spacing `π/L`.
    #[inline]
    pub fn dxi(&self) -> T {
        T::PI() / self.half_width
    }

    /// Nyquist frequency `nπ/(2L)` along one axis.
    #[inline]
    pub fn nyquist(&self) -> T {
        self.dxi() * T::of_usize(self.n / 2)
    }

    /// Largest lattice frequency magnitude (the corner of the frequency cube).
    pub fn max_frequency(&self) -> T {
        self.nyquist() * T::of_usize(self.dim).sqrt()
    }

    /// Coordinate of sample `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + T::of_usize(i) * self.dx()
    }

    /// Signed frequency index in FFT order (`0, 1, …, n/2-1, -n/2, …, -1`).
    #[inline]
    pub fn freq_index(&self, i: usize) -> isize {
        if i < self.n / 2 {
            i as isize
        } else {
            i as isize - self.n as isize
        }
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> T {
        self.dxi() * T::of(self.freq_index(i) as f64)
    }

    /// Per-axis multi-index of a flat row-major index (unused axes are 0).
    #[inline]
    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut r = flat;
        for a in (0..self.dim).rev() {
            out[a] = r % self.n;
            r /= self.n;
        }
        out
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &i| acc * self.n + i)
    }

    /// Position of a lattice point (unused axes are 0).
    #[inline]
    pub fn position(&self, flat: usize) -> [T; 3] {
        let idx = self.multi_index(flat);
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = self.coord(idx[a]);
        }
        x
    }

    /// Frequency vector of the FFT-ordered coefficient at `flat`.
    #[inline]
    pub fn frequency(&self, flat: usize) -> [T; 3] {
        let idx = self.multi_index(flat);
        let mut xi = [T::zero(); 3];
        for a in 0..self.dim {
            xi[a] = self.wavenumber(idx[a]);
        }
        xi
    }

    /// Minimum-image displacement of a lattice offset index (periodic), used for
    /// convolution kernels stored with the origin at index 0.
    #[inline]
    pub fn displacement(&self, flat: usize) -> [T; 3] {
        let idx = self.multi_index(flat);
        let mut y = [T::zero(); 3];
        for a in 0..self.dim {
            y[a] = self.dx() * T::of(self.freq_index(idx[a]) as f64);
        }
        y
    }

    /// `|ξ|` for every coefficient, FFT order.
    pub fn frequency_magnitudes(&self) -> Vec<T> {
        let k: Vec<T> = (0..self.n).map(|i| self.wavenumber(i)).collect();
        let mut out = Vec::with_capacity(self.len());
        match self.dim {
            1 => out.extend(k.iter().map(|v| v.abs())),
            2 => {
                for a in &k {
                    for b in &k {
                        out.push((*a * *a + *b * *b).sqrt());
                    }
                }
            }
            _ => {
                for a in &k {
                    for b in &k {
                        for c in &k {
                            out.push((*a * *a + *b * *b + *c * *c).sqrt());
                        }
                    }
                }
            }
        }
        out
    }

    pub fn same_as(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{} vs {}", self.describe(), other.describe())))
        }
    }

    pub fn describe(&self) -> String {
        format!("d={} n={} L={}", self.dim, self.n, self.half_width)
    }

    /// The same lattice in another scalar type.
    pub fn cast<U: Real>(&self) -> GridSpec<U> {
        GridSpec { dim: self.dim, n: self.n, half_width: U::of(self.half_width.as_f64()) }
    }
}

/// `L^p` or sup norm selector for [`norm`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    Lp(f64),
    Linf,
}

/// Complex field sampled on a periodic lattice, physical-space representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField<T> {
    grid: GridSpec<T>,
    values: Vec<Complex<T>>,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch(format!(
                "{} values for a lattice of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(SampledField { grid, values })
    }

    /// Skips the finiteness scan; for values produced by this crate's own transforms.
    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        SampledField { grid, values }
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        SampledField { grid, values: vec![czero(); grid.len()] }
    }

    pub fn constant(grid: GridSpec<T>, c: Complex<T>) -> Self {
        SampledField { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at the lattice positions (trailing unused coordinates are 0).
    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(&[T]) -> Complex<T>) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.position(i)[..grid.dim()])).collect();
        SampledField { grid, values }
    }

    pub fn from_real_fn(grid: GridSpec<T>, f: impl Fn(&[T]) -> T) -> Self {
        Self::from_fn(grid, |x| cplx(f(x), T::zero()))
    }

    /// Plane wave `e^{i x·ξ}` for a lattice frequency given by signed indices.
    pub fn plane_wave(grid: GridSpec<T>, modes: &[isize], amplitude: Complex<T>) -> Self {
        let xi: Vec<T> = modes.iter().map(|&m| grid.dxi() * T::of(m as f64)).collect();
        Self::from_fn(grid, |x| {
            let phase = x.iter().zip(&xi).fold(T::zero(), |acc, (a, b)| acc + *a * *b);
            amplitude * cis(phase)
        })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        SampledField { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(SampledField { grid: self.grid, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map(|v| v * c)
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.map(|v| v * c)
    }

    /// `|f|` as a real-valued field.
    pub fn abs(&self) -> Self {
        self.map(|v| cplx(v.norm(), T::zero()))
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == T::zero() && v.im == T::zero())
    }

    /// Lattice quadrature of `∫ f dx`.
    pub fn integral(&self) -> Complex<T> {
        let sum = self.values.iter().fold(czero::<T>(), |a, v| a + v);
        sum * self.grid.cell_volume()
    }

    pub fn norm(&self, kind: NormKind) -> T {
        norm(self, kind)
    }

    /// Raw DFT coefficients in FFT order.
    pub fn dft(&self) -> Vec<Complex<T>> {
        let mut data = self.values.clone();
        fft::forward(&mut data, self.grid.n(), self.grid.dim());
        data
    }

    /// Inverse of [`SampledField::dft`].
    pub fn from_dft(grid: GridSpec<T>, mut coeffs: Vec<Complex<T>>) -> Self {
        fft::inverse(&mut coeffs, grid.n(), grid.dim());
        SampledField { grid, values: coeffs }
    }

    /// Fourier transform `F f(ξ)` at every lattice frequency, FFT order, in the
    /// unnormalized convention of the module docs.
    pub fn fourier_transform(&self) -> Vec<Complex<T>> {
        let mut coeffs = self.dft();
        let w = self.grid.cell_volume();
        for (flat, c) in coeffs.iter_mut().enumerate() {
            let idx = self.grid.multi_index(flat);
            let parity: isize = (0..self.grid.dim()).map(|a| self.grid.freq_index(idx[a])).sum();
            let sign = if parity.rem_euclid(2) == 0 { w } else { -w };
            *c = *c * sign;
        }
        coeffs
    }

    /// Fraction of `‖f‖₂²` carried outside the ball `|x| <= L/2`.
    pub fn guard_mass(&self) -> T {
        let r2 = (self.grid.half_width() / T::of(2.0)).powi(2);
        let mut outside = T::zero();
        let mut total = T::zero();
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.position(i);
            let m = v.norm_sqr();
            total = total + m;
            if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > r2 {
                outside = outside + m;
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            outside / total
        }
    }

    pub fn cast<U: Real>(&self) -> SampledField<U> {
        SampledField {
            grid: self.grid.cast(),
            values: self
                .values
                .iter()
                .map(|v| Complex::new(U::of(v.re.as_f64()), U::of(v.im.as_f64())))
                .collect(),
        }
    }

    /// Circular convolution `(k * f)(x) = ∫ k(y) f(x - y) dy` where `kernel` is
    /// sampled at the lattice positions (origin at the box centre).
    pub fn convolve_centered(&self, kernel: &Self) -> Result<Self> {
        self.grid.same_as(&kernel.grid)?;
        let shifted = kernel.recentered_to_origin();
        let mut a = shifted;
        fft::forward(&mut a, self.grid.n(), self.grid.dim());
        let mut b = self.dft();
        let w = self.grid.cell_volume();
        for (x, y) in b.iter_mut().zip(&a) {
            *x = *x * *y * w;
        }
        Ok(Self::from_dft(self.grid, b))
    }

    /// Values re-indexed so that the sample at position 0 sits at index 0.
    pub(crate) fn recentered_to_origin(&self) -> Vec<Complex<T>> {
        let n = self.grid.n();
        let half = n / 2;
        let mut out = vec![czero::<T>(); self.values.len()];
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.multi_index(flat);
            let mut shifted = [0usize; 3];
            for a in 0..self.grid.dim() {
                shifted[a] = (idx[a] + half) % n;
            }
            out[self.grid.flat_index(&shifted)] = *v;
        }
        out
    }
}

/// Riemann-sum `L^p` norm `(Σ |f|^p dx^d)^{1/p}`, or the lattice maximum.
pub fn norm<T: Real>(f: &SampledField<T>, kind: NormKind) -> T {
    match kind {
        NormKind::Linf => f.max_abs(),
        NormKind::Lp(p) => {
            assert!(p >= 1.0, "L^p norm needs p >= 1");
            if p == f64::INFINITY {
                return f.max_abs();
            }
            let w = f.grid().cell_volume();
            if p == 2.0 {
                let s: T = f.values().iter().map(|v| v.norm_sqr()).sum();
                return (s * w).sqrt();
            }
            if p == 1.0 {
                let s: T = f.values().iter().map(|v| v.norm()).sum();
                return s * w;
            }
            let pt = T::of(p);
            let s: T = f.values().iter().map(|v| v.norm().powf(pt)).sum();
            (s * w).powf(T::one() / pt)
        }
    }
}

/// `L^p` norm of a nonnegative sample vector with the grid's quadrature weight.
pub(crate) fn lp_of_magnitudes<T: Real>(grid: &GridSpec<T>, mags: &[T], p: f64) -> T {
    if p == f64::INFINITY {
        return mags.iter().fold(T::zero(), |m, v| m.max(*v));
    }
    let w = grid.cell_volume();
    if p == 1.0 {
        return mags.iter().copied().sum::<T>() * w;
    }
    let pt = T::of(p);
    let s: T = mags.iter().map(|v| v.powf(pt)).sum();
    (s * w).powf(T::one() / pt)
}

/// DFT of a field kept around so several multipliers can be applied to it
/// without repeating the forward transform.
#[derive(Clone, Debug)]
pub struct Spectrum<T> {
    grid: GridSpec<T>,
    coeffs: Vec<Complex<T>>,
    magnitudes: Vec<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn of(f: &SampledField<T>) -> Self {
        Spectrum {
            grid: *f.grid(),
            coeffs: f.dft(),
            magnitudes: f.grid().frequency_magnitudes(),
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn magnitudes(&self) -> &[T] {
        &self.magnitudes
    }

    /// `F^{-1} m(|ξ|) F f` for a real radial symbol.
    pub fn radial(&self, symbol: impl Fn(T) -> T) -> SampledField<T> {
        let coeffs =
            self.coeffs.iter().zip(&self.magnitudes).map(|(c, r)| *c * symbol(*r)).collect();
        SampledField::from_dft(self.grid, coeffs)
    }

    /// `F^{-1} m(|ξ|) F f` for a complex radial symbol.
    pub fn radial_complex(&self, symbol: impl Fn(T) -> Complex<T>) -> SampledField<T> {
        let coeffs =
            self.coeffs.iter().zip(&self.magnitudes).map(|(c, r)| *c * symbol(*r)).collect();
        SampledField::from_dft(self.grid, coeffs)
    }

    /// `F^{-1} m(ξ) F f` for a general symbol of the frequency vector.
    pub fn apply(&self, symbol: impl Fn(&[T]) -> Complex<T>) -> SampledField<T> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| *c * symbol(&self.grid.frequency(i)[..self.grid.dim()]))
            .collect();
        SampledField::from_dft(self.grid, coeffs)
    }

    /// `(2L)^{-d} Σ |F f|²`, the spectral side of Plancherel.
    pub fn energy(&self) -> T {
        let w = self.grid.cell_volume();
        let s: T = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        s * w * w / self.grid.volume()
    }

    /// Spectral energy fraction carried by frequencies with `|ξ| > radius`.
    pub fn energy_fraction_beyond(&self, radius: T) -> T {
        let mut outside = T::zero();
        let mut total = T::zero();
        for (c, r) in self.coeffs.iter().zip(&self.magnitudes) {
            total = total + c.norm_sqr();
            if *r > radius {
                outside = outside + c.norm_sqr();
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            outside / total
        }
    }
}

//! Seeded random inputs and deterministic parallel ensembles.
//!
//! Member `i` of an ensemble draws from a ChaCha stream selected by `i`, so
//! results do not depend on scheduling or on how many members are evaluated.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::grid::{GridSpec, SampledField};
use crate::scalar::{Complex, Real};

pub fn member_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Evaluates `job(i, rng_i)` for `i < count` in parallel; output order is by index.
pub fn run<R: Send>(
    seed: u64,
    count: usize,
    job: impl Fn(usize, &mut ChaCha8Rng) -> R + Sync,
) -> Vec<R> {
    (0..count)
        .into_par_iter()
        .map(|i| job(i, &mut member_rng(seed, i)))
        .collect()
}

fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::of(rng.sample::<f64, _>(StandardNormal))
}

/// Random field with independent Gaussian Fourier coefficients on `|ξ| <= cutoff`.
/// With `zero_mean` the `ξ = 0` coefficient is dropped; with `real` the field is
/// projected onto its real part (which keeps the band limit).
pub fn bandlimited_field<T: Real>(
    grid: GridSpec<T>,
    rng: &mut ChaCha8Rng,
    cutoff: T,
    zero_mean: bool,
    real: bool,
) -> SampledField<T> {
    let mags = grid.frequency_magnitudes();
    let coeffs: Vec<Complex<T>> = mags
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let (a, b) = (normal::<T>(rng), normal::<T>(rng));
            if r > cutoff || (zero_mean && i == 0) {
                Complex::new(T::zero(), T::zero())
            } else {
                Complex::new(a, b)
            }
        })
        .collect();
    let f = SampledField::from_dft(grid, coeffs);
    let f = if real { f.map(|v| Complex::new(v.re, T::zero())) } else { f };
    let peak = f.max_abs();
    if peak > T::zero() {
        f.scale_real(peak.recip())
    } else {
        f
    }
}

/// Nonnegative kernel whose spectrum is supported exactly in `|ξ| <= radius`: the
/// square of the field with DFT `max(0, 1 - 2|ξ|/radius)`.
pub fn jackson_kernel(grid: GridSpec<f64>, radius: f64) -> SampledField<f64> {
    let half = radius / 2.0;
    let coeffs = grid
        .frequency_magnitudes()
        .iter()
        .map(|r| Complex::new((1.0 - r / half).max(0.0), 0.0))
        .collect();
    let fejer = SampledField::from_dft(grid, coeffs);
    fejer.mul(&fejer).expect("same grid")
}

/// Centred Gaussian with unit integral and standard deviation `width`.
pub fn gaussian_kernel(grid: GridSpec<f64>, width: f64) -> SampledField<f64> {
    let d = grid.dim() as i32;
    let norm = (std::f64::consts::TAU.sqrt() * width).powi(d);
    SampledField::from_real_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * width * width)).exp() / norm)
}

/// A Gaussian wave packet `a·exp(-|x-c|²/(2w²))·e^{iξ·(x-c)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub amplitude: Complex<f64>,
    pub center: [f64; 3],
    pub width: f64,
    pub frequency: [f64; 3],
}

/// Finite sum of wave packets, evaluable anywhere so dilations `f(λx)` can be
/// sampled directly instead of interpolated.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketField {
    pub packets: Vec<Packet>,
}

impl PacketField {
    /// `count` packets with centres in `|c_i| <= spread`, widths in
    /// `[w_min, 2 w_min]` and frequencies `|ξ_i| <= k_max`.
    pub fn random(
        dim: usize,
        rng: &mut ChaCha8Rng,
        count: usize,
        spread: f64,
        w_min: f64,
        k_max: f64,
        real: bool,
    ) -> Self {
        let packets = (0..count)
            .map(|_| {
                let mut center = [0.0; 3];
                let mut frequency = [0.0; 3];
                for a in 0..dim {
                    center[a] = rng.gen_range(-spread..=spread);
                    frequency[a] = rng.gen_range(-k_max..=k_max) / (dim as f64).sqrt();
                }
                let amplitude = if real {
                    Complex::new(rng.gen_range(0.5..1.5), 0.0)
                } else {
                    Complex::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU))
                };
                Packet { amplitude, center, width: w_min * rng.gen_range(1.0..2.0), frequency }
            })
            .collect();
        PacketField { packets }
    }

    /// Value at `x`; real fields use `cos` carriers so the sum stays real.
    pub fn eval(&self, x: &[f64], real: bool) -> Complex<f64> {
        self.packets.iter().fold(Complex::new(0.0, 0.0), |acc, p| {
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for (a, xa) in x.iter().enumerate() {
                let y = xa - p.center[a];
                r2 += y * y;
                phase += p.frequency[a] * y;
            }
            let env = (-r2 / (2.0 * p.width * p.width)).exp();
            let carrier = if real { Complex::new(phase.cos(), 0.0) } else { Complex::from_polar(1.0, phase) };
            acc + p.amplitude * carrier * env
        })
    }

    /// Samples `x ↦ f(λx)` on the lattice.
    pub fn sample(&self, grid: GridSpec<f64>, lambda: f64, real: bool) -> SampledField<f64> {
        SampledField::from_fn(grid, |x| {
            let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            self.eval(&y, real)
        })
    }
}

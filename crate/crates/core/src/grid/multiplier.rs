use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

use super::SampledField;

type Symbol<T> = Arc<dyn Fn(&[T]) -> Complex<T> + Send + Sync>;

/// A named Fourier multiplier `m(ξ)`, evaluated pointwise on the frequency lattice.
///
/// A non-finite value at `ξ = 0` is replaced by 0 (homogeneous operators kill
/// constants); a non-finite value anywhere else is rejected.
#[derive(Clone)]
pub struct Multiplier<T> {
    name: String,
    symbol: Symbol<T>,
}

impl<T> fmt::Debug for Multiplier<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("name", &self.name).finish_non_exhaustive()
    }
}

impl<T: Real> Multiplier<T> {
    pub fn new(
        name: impl Into<String>,
        symbol: impl Fn(&[T]) -> Complex<T> + Send + Sync + 'static,
    ) -> Self {
        Multiplier { name: name.into(), symbol: Arc::new(symbol) }
    }

    /// Real symbol depending only on `|ξ|`.
    pub fn radial(name: impl Into<String>, symbol: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(name, move |xi: &[T]| {
            let r = xi.iter().fold(T::zero(), |a, v| a + *v * *v).sqrt();
            Complex::new(symbol(r), T::zero())
        })
    }

    pub fn identity() -> Self {
        Self::new("identity", |_| Complex::new(T::one(), T::zero()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, xi: &[T]) -> Complex<T> {
        (self.symbol)(xi)
    }

    /// Pointwise product `m₁·m₂`.
    pub fn then(&self, other: &Self) -> Self {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        Multiplier {
            name: format!("{}*{}", self.name, other.name),
            symbol: Arc::new(move |xi: &[T]| a(xi) * b(xi)),
        }
    }
}

/// `F⁻¹ m F f`.
pub fn apply_multiplier<T: Real>(f: &SampledField<T>, m: &Multiplier<T>) -> Result<SampledField<T>> {
    let grid = *f.grid();
    let mut coeffs = f.dft();
    for (i, c) in coeffs.iter_mut().enumerate() {
        let v = m.eval(&grid.frequency(i)[..grid.dim()]);
        let v = if v.re.is_finite() && v.im.is_finite() {
            v
        } else if i == 0 {
            Complex::new(T::zero(), T::zero())
        } else {
            return Err(Error::InvalidMultiplier { name: m.name().to_string(), index: i });
        };
        *c = *c * v;
    }
    Ok(SampledField::from_dft(grid, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn identity_and_zero_time_propagator_are_identity() {
        let grid = GridSpec::<f64>::new(2, 16, 3.0).unwrap();
        let f = SampledField::from_fn(grid, |x| Complex::new(x[0].cos(), x[1].sin() * x[0]));
        let t = 0.0;
        let prop = Multiplier::new("free", move |xi: &[f64]| {
            let k2: f64 = xi.iter().map(|v| v * v).sum();
            Complex::from_polar(1.0, -t * k2)
        });
        for m in [Multiplier::identity(), prop] {
            let g = apply_multiplier(&f, &m).unwrap();
            for (a, b) in g.values().iter().zip(f.values()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn negative_laplacian_of_gaussian() {
        let grid = GridSpec::<f64>::new(1, 256, 10.0).unwrap();
        let f = SampledField::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
        let m = Multiplier::radial("|xi|^2", |r: f64| r * r);
        let g = apply_multiplier(&f, &m).unwrap();
        for i in 0..grid.len() {
            let x = grid.position(i)[0];
            if x.abs() <= 5.0 {
                let expect = (2.0 - 4.0 * x * x) * (-x * x).exp();
                assert!((g.values()[i].re - expect).abs() < 1e-10, "x = {x}");
            }
        }
    }

    #[test]
    fn zero_mode_policy() {
        let grid = GridSpec::<f64>::new(1, 16, 1.0).unwrap();
        let f = SampledField::<f64>::constant(grid, Complex::new(2.0, 0.0));
        let inv = Multiplier::radial("1/|xi|", |r: f64| 1.0 / r);
        assert!(apply_multiplier(&f, &inv).unwrap().is_zero());
        let bad = Multiplier::new("bad", |xi: &[f64]| Complex::new(if xi[0] > 1.0 { f64::NAN } else { 1.0 }, 0.0));
        match apply_multiplier(&f, &bad) {
            Err(Error::InvalidMultiplier { name, index }) => {
                assert_eq!(name, "bad");
                assert!(index > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

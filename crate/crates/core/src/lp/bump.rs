use crate::scalar::Real;

/// The fixed cutoff pair: `η ≡ 1` on `[0, 1]`, `η ≡ 0` on `[1.1, ∞)`, joined by a
/// rescaled `C^∞` step; `χ(r) = η(r) − η(2r)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BumpProfile;

impl BumpProfile {
    pub const INNER: f64 = 1.0;
    pub const OUTER: f64 = 1.1;
}

/// `σ(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`, clamped to `[0, 1]` outside `(0, 1)`.
#[inline]
pub fn smooth_step<T: Real>(t: T) -> T {
    if t <= T::zero() {
        return T::zero();
    }
    if t >= T::one() {
        return T::one();
    }
    let a = (-t.recip()).exp();
    let b = (-(T::one() - t).recip()).exp();
    a / (a + b)
}

/// Radial profile of `η` at `r = |x|`.
#[inline]
pub fn eta<T: Real>(r: T) -> T {
    let inner = T::of(BumpProfile::INNER);
    let outer = T::of(BumpProfile::OUTER);
    if r <= inner {
        T::one()
    } else if r >= outer {
        T::zero()
    } else {
        T::one() - smooth_step((r - inner) / (outer - inner))
    }
}

#[inline]
pub fn chi<T: Real>(r: T) -> T {
    eta(r) - eta(r + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_shape() {
        assert_eq!(eta(0.0f64), 1.0);
        assert_eq!(eta(1.0), 1.0);
        assert_eq!(eta(1.1), 0.0);
        assert_eq!(eta(5.0), 0.0);
        let mut prev = 1.0;
        for i in 0..=200 {
            let v = eta(1.0 + 0.1 * i as f64 / 200.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
        assert!((eta(1.05f64) - 0.5).abs() < 1e-15);
        assert!((eta(1.05f32) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn chi_support_and_telescoping() {
        assert_eq!(chi(0.5), 0.0);
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(1.1), 0.0);
        assert_eq!(chi(0.3), 0.0);
        for i in 1..400 {
            let x = 0.013 * i as f64;
            let s: f64 = (-20..20).map(|k| chi(x / f64::pow2(k))).sum();
            assert!((s - 1.0).abs() < 1e-14, "x = {x}: {s}");
        }
    }
}

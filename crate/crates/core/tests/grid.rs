use dyadic::ensemble::{bandlimited_field, member_rng};
use dyadic::grid::io::{load, read_snapshot, save, write_snapshot};
use dyadic::{apply_multiplier, Complex, Error, Field64, Grid64, GridSpec, Multiplier, NormKind, SampledField};
use proptest::prelude::*;

fn plancherel_gap(f: &Field64) -> f64 {
    let grid = f.grid();
    let spectral: f64 = f.fourier_transform().iter().map(|c| c.norm_sqr()).sum::<f64>() / grid.volume();
    let direct = f.norm(NormKind::Lp(2.0)).powi(2);
    (spectral - direct).abs() / direct
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plancherel_holds(seed in 0u64..1000, dim in 1usize..=3, half_width in 0.5f64..40.0) {
        let n = [256, 32, 16][dim - 1];
        let grid = Grid64::new(dim, n, half_width).unwrap();
        let f = bandlimited_field(grid, &mut member_rng(seed, 0), grid.nyquist(), false, false);
        prop_assert!(plancherel_gap(&f) < 1e-12);
    }

    #[test]
    fn dft_round_trip(seed in 0u64..1000) {
        let grid = Grid64::new(2, 16, 3.0).unwrap();
        let f = bandlimited_field(grid, &mut member_rng(seed, 1), 100.0, false, false);
        let back = SampledField::from_dft(grid, f.dft());
        prop_assert!(back.sub(&f).unwrap().max_abs() < 1e-14);
    }
}

#[test]
fn gaussian_transform_matches_closed_form() {
    // ∫ e^{-x²/2} e^{-ixξ} dx = √(2π) e^{-ξ²/2}
    let grid = Grid64::new(1, 256, 20.0).unwrap();
    let f = SampledField::from_real_fn(grid, |x| (-x[0] * x[0] / 2.0).exp());
    for (i, c) in f.fourier_transform().iter().enumerate() {
        let xi = grid.frequency(i)[0];
        let exact = std::f64::consts::TAU.sqrt() * (-xi * xi / 2.0).exp();
        assert!((c - Complex::new(exact, 0.0)).norm() < 1e-12, "ξ = {xi}");
    }
}

#[test]
fn norms_of_a_constant() {
    let grid = Grid64::new(3, 8, 1.5).unwrap();
    let f = SampledField::constant(grid, Complex::new(0.0, 2.0));
    let vol: f64 = 27.0;
    assert!((f.norm(NormKind::Lp(1.0)) - 2.0 * vol).abs() < 1e-12);
    assert!((f.norm(NormKind::Lp(2.0)) - 2.0 * vol.sqrt()).abs() < 1e-12);
    assert_eq!(f.norm(NormKind::Linf), 2.0);
}

#[test]
fn single_precision_plancherel() {
    let grid = GridSpec::<f32>::new(2, 32, 4.0).unwrap();
    let f = bandlimited_field(grid, &mut member_rng(3, 0), 6.0f32, false, false);
    let spectral: f32 = f.fourier_transform().iter().map(|c| c.norm_sqr()).sum::<f32>() / grid.volume();
    let direct = f.norm(NormKind::Lp(2.0)).powi(2);
    assert!((spectral - direct).abs() / direct < 1e-5);
    let wide: Field64 = f.cast();
    assert!((wide.norm(NormKind::Lp(2.0)) - f.norm(NormKind::Lp(2.0)) as f64).abs() < 1e-5);
}

#[test]
fn multiplier_composition() {
    let grid = Grid64::new(1, 64, std::f64::consts::PI).unwrap();
    let f = SampledField::plane_wave(grid, &[5], Complex::new(1.0, 0.0));
    let sq = Multiplier::radial("square", |r| r * r);
    let both = sq.then(&Multiplier::radial("half", |_| 0.5));
    let out = apply_multiplier(&f, &both).unwrap();
    assert!(out.sub(&f.scale_real(12.5)).unwrap().max_abs() < 1e-12);
    assert!(apply_multiplier(&f, &Multiplier::identity()).unwrap().sub(&f).unwrap().max_abs() < 1e-14);
}

#[test]
fn snapshot_round_trip_is_bit_exact() {
    let grid = Grid64::new(3, 8, 12.5).unwrap();
    let f = bandlimited_field(grid, &mut member_rng(9, 0), 2.0, false, false);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.fld");
    save(&path, &f).unwrap();
    let g = load(&path).unwrap();
    assert_eq!(g.grid(), f.grid());
    assert_eq!(g.values(), f.values());
}

#[test]
fn corrupt_snapshots_are_rejected() {
    let grid = Grid64::new(1, 8, 1.0).unwrap();
    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, &SampledField::zeros(grid)).unwrap();
    assert!(matches!(read_snapshot(&bytes[..bytes.len() - 3]), Err(Error::Truncated { .. })));
    let mut longer = bytes.clone();
    longer.push(0);
    assert!(matches!(read_snapshot(&longer[..]), Err(Error::SizeMismatch(_))));
    bytes[0] = b'X';
    assert!(matches!(read_snapshot(&bytes[..]), Err(Error::BadMagic)));
}

#[test]
fn invalid_grids() {
    assert!(Grid64::new(0, 8, 1.0).is_err());
    assert!(Grid64::new(4, 8, 1.0).is_err());
    assert!(Grid64::new(1, 12, 1.0).is_err());
    assert!(Grid64::new(1, 8, -1.0).is_err());
    let a = Grid64::new(1, 8, 1.0).unwrap();
    let b = Grid64::new(1, 8, 2.0).unwrap();
    assert!(SampledField::zeros(a).add(&SampledField::zeros(b)).is_err());
}

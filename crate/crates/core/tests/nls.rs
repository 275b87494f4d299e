use dyadic::nls::{
    decay_trace_analysis, dilate, energy, ground_state_diagnostics, ground_state_field, initial_field, mass,
    richardson_ratio, scaling_check, scattering_extract, simulate, simulate_from, simulate_sampled,
    threshold_diagnostics, wave_operator_solve, Dealias, DecayTrace, InitialData, Simulation, SolverConfig,
    WaveOperatorConfig,
};
use dyadic::propagator::evolve;
use dyadic::{Complex, Error, Field64, Grid64, SampledField};

fn gaussian(grid: Grid64, amplitude: f64, a: f64) -> SolverConfig {
    SolverConfig::new(grid, InitialData::Gaussian { amplitude, a })
}

fn line() -> Grid64 {
    Grid64::new(1, 256, 20.0).unwrap()
}

#[test]
fn zero_data_stays_zero() {
    let cfg = SolverConfig { t_final: 1.0, dt: 0.1, ..SolverConfig::new(line(), InitialData::Zero) };
    let (state, trace) = simulate(&cfg).unwrap();
    assert!(state.u.is_zero());
    assert_eq!(trace.rows.len(), 11);
    assert!(trace.rows.iter().all(|r| r.sup_abs_u == 0.0 && r.mass == 0.0 && r.energy == 0.0));
}

#[test]
fn zero_step_is_the_identity() {
    let cfg = gaussian(line(), 0.5, 1.0);
    let u0 = initial_field(&cfg).unwrap();
    let mut sim = Simulation::new(&cfg, u0.clone()).unwrap();
    sim.step(0.0).unwrap();
    assert_eq!(sim.state().u.values(), u0.values());
}

#[test]
fn linear_run_is_the_free_flow() {
    let cfg = SolverConfig { mu: 0.0, dt: 0.1, t_final: 2.0, ..gaussian(line(), 0.5, 1.0) };
    let u0 = initial_field(&cfg).unwrap();
    let (state, _) = simulate_from(&cfg, u0.clone()).unwrap();
    assert_eq!(state.t, 2.0);
    assert!(state.u.sub(&evolve(&u0, 2.0)).unwrap().max_abs() <= 1e-12);
}

#[test]
fn tiny_data_is_nearly_linear() {
    // the nonlinear correction is O(ε⁵ T)
    let eps = 1e-3;
    let cfg = SolverConfig { dt: 0.05, t_final: 1.0, ..gaussian(line(), eps, 1.0) };
    let u0 = initial_field(&cfg).unwrap();
    let (nl, _) = simulate_from(&cfg, u0.clone()).unwrap();
    let (lin, _) = simulate_from(&cfg.with_mu(0.0), u0).unwrap();
    let gap = nl.u.sub(&lin.u).unwrap().max_abs();
    assert!(gap > 0.0 && gap <= 10.0 * eps.powi(5), "{gap}");
}

#[test]
fn conservation_in_three_dimensions() {
    let grid = Grid64::new(3, 16, 8.0).unwrap();
    let cfg = SolverConfig { dt: 0.1, t_final: 2.0, ..gaussian(grid, 0.3, 0.5) };
    let (_, trace) = simulate(&cfg).unwrap();
    let (dm, de) = trace.drifts();
    assert!(dm <= 1e-8 && de <= 1e-5, "{dm} {de}");
}

#[test]
fn strang_splitting_is_second_order() {
    let cfg = SolverConfig { dt: 0.05, t_final: 1.0, ..gaussian(line(), 0.5, 1.0) };
    let u0 = initial_field(&cfg).unwrap();
    let (_, _, ratio) = richardson_ratio(&cfg, &u0, 16).unwrap();
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn nan_input_blows_up_with_the_last_good_field() {
    let cfg = gaussian(line(), 0.5, 1.0);
    let mut u0 = initial_field(&cfg).unwrap();
    u0.values_mut()[10] = Complex::new(f64::NAN, 0.0);
    let mut sim = Simulation::new(&cfg, u0.clone()).unwrap();
    match sim.step(cfg.dt) {
        Err(Error::BlowUp { steps, last_good, .. }) => {
            assert_eq!(steps, 0);
            assert!(last_good.values()[10].re.is_nan());
        }
        other => panic!("expected blow-up, got {other:?}"),
    }
}

#[test]
fn config_validation() {
    let base = gaussian(line(), 0.5, 1.0);
    assert!(SolverConfig { mu: -1.0, ..base.clone() }.validate().is_err());
    assert!(SolverConfig { mu: -1.0, allow_focusing: true, ..base.clone() }.validate().is_ok());
    assert!(SolverConfig { mu: 0.5, ..base.clone() }.validate().is_err());
    assert!(SolverConfig { dt: 0.0, ..base.clone() }.validate().is_err());
    assert!(SolverConfig { sample_every: 0, ..base.clone() }.validate().is_err());
    assert_eq!(SolverConfig { dt: 0.3, t_final: 1.0, ..base.clone() }.step_count(), 4);
    assert!(initial_field(&gaussian(line(), 1.0, -1.0)).is_err());
    assert_eq!(Dealias::parse("cutoff_third").unwrap(), Dealias::CutoffThird);
    assert!(Dealias::parse("two_thirds").is_err());
}

#[test]
fn trace_csv_round_trip() {
    let cfg = SolverConfig { dt: 0.1, t_final: 0.5, ..gaussian(line(), 0.5, 1.0) };
    let (_, trace) = simulate(&cfg).unwrap();
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,sup_abs_u,weighted_sup,mass,energy,guard_mass,l10_accum");
    assert_eq!(DecayTrace::read_csv(&buf[..]).unwrap(), trace);
    let mut shuffled = trace.clone();
    shuffled.rows.swap(1, 2);
    let mut bad = Vec::new();
    shuffled.write_csv(&mut bad).unwrap();
    assert!(DecayTrace::read_csv(&bad[..]).is_err());
}

#[test]
fn decay_window_outside_the_trace() {
    let cfg = SolverConfig { dt: 0.1, t_final: 0.5, ..gaussian(line(), 0.5, 1.0) };
    let (_, trace) = simulate(&cfg).unwrap();
    assert!(matches!(decay_trace_analysis(&trace, (3.0, 4.0)), Err(Error::EmptyWindow(_))));
    assert!(decay_trace_analysis(&trace, (0.1, 0.5)).unwrap().points >= 4);
}

#[test]
fn linear_data_scatters_exactly() {
    let grid = Grid64::new(1, 1024, 100.0).unwrap();
    let cfg = SolverConfig { mu: 0.0, dt: 0.5, t_final: 4.0, ..gaussian(grid, 0.5, 1.0) };
    let u0 = initial_field(&cfg).unwrap();
    let (_, _, samples) = simulate_sampled(&cfg, u0).unwrap();
    let rep = scattering_extract(&samples).unwrap();
    assert!(rep.exact_scattering);
    assert!(rep.cauchy_table.iter().all(|r| r.l1 <= 1e-12 * rep.initial_l1));
    assert!(scattering_extract(&samples[..3]).is_err());
}

#[test]
fn ground_state_oracles() {
    let grid = Grid64::new(3, 64, 4.0).unwrap();
    let w = ground_state_field(&grid).unwrap();
    let c = grid.n() / 2;
    let at = |i: usize, j: usize, k: usize| w.values()[grid.flat_index(&[i, j, k])].re;
    assert_eq!(at(c, c, c), 1.0);
    // ΔW = -W⁵ by second differences near the origin
    let h2 = grid.dx() * grid.dx();
    for (i, j, k) in [(c, c, c), (c + 3, c - 2, c + 1), (c + 6, c, c)] {
        let lap = (at(i + 1, j, k) + at(i - 1, j, k) + at(i, j + 1, k) + at(i, j - 1, k) + at(i, j, k + 1) + at(i, j, k - 1)
            - 6.0 * at(i, j, k))
            / h2;
        let w5 = at(i, j, k).powi(5);
        assert!((lap + w5).abs() <= 1e-2 * w5, "{lap} {w5}");
    }
    let energies: Vec<f64> = [8.0, 12.0, 16.0]
        .iter()
        .map(|&l| ground_state_diagnostics(&Grid64::new(3, 64, l).unwrap()).unwrap().energy)
        .collect();
    assert!(energies.windows(2).all(|p| p[1] > p[0]), "{energies:?}");
    assert!(ground_state_field(&line()).is_err());
}

#[test]
fn small_gaussian_is_below_threshold() {
    let grid = Grid64::new(3, 32, 8.0).unwrap();
    let u0 = initial_field(&gaussian(grid, 0.3, 0.5)).unwrap();
    let rep = threshold_diagnostics(&u0).unwrap();
    assert!(rep.below_threshold);
    assert!((rep.energy_u0 - energy(&u0, -1.0)).abs() < 1e-14);
}

#[test]
fn wave_operator_trivial_cases() {
    let grid = Grid64::new(1, 128, 20.0).unwrap();
    let cfg = WaveOperatorConfig { horizon: 1.0, ds: 0.1, ..Default::default() };
    let zero = wave_operator_solve(&SampledField::zeros(grid), &cfg).unwrap();
    assert!(zero.converged && zero.states.iter().all(|s| s.is_zero()));

    let phi: Field64 = SampledField::from_real_fn(grid, |x| 0.2 * (-x[0] * x[0]).exp());
    let free = wave_operator_solve(&phi, &WaveOperatorConfig { mu: 0.0, ..cfg.clone() }).unwrap();
    assert!(free.converged);
    assert!(free.initial().sub(&phi).unwrap().max_abs() <= 1e-14);
    for (t, s) in free.times.iter().zip(&free.states) {
        assert!(s.sub(&evolve(&phi, *t)).unwrap().max_abs() <= 1e-13);
    }

    let big = phi.scale_real(1e4);
    assert!(matches!(wave_operator_solve(&big, &cfg), Err(Error::Precondition(_))));
    assert!(wave_operator_solve(&phi, &WaveOperatorConfig { ds: 0.3, ..cfg }).is_err());
}

#[test]
fn scaling_symmetry_in_one_dimension() {
    let grid = Grid64::new(1, 512, 40.0).unwrap();
    let u0 = SampledField::from_real_fn(grid, |x| 0.5 * (-0.05 * x[0] * x[0]).exp());
    let cfg = SolverConfig { dt: 0.01, t_final: 0.5, ..SolverConfig::new(grid, InitialData::Zero) };
    let rep = scaling_check(&u0, 2, &cfg, 0.5).unwrap();
    assert!(rep.passed(), "{:?}", rep.notes);
    assert!(rep.diagnostics["h1_relative_error"] <= 1e-10);
    let wide = SampledField::from_real_fn(grid, |x| (-x[0] * x[0] / 200.0).exp());
    assert!(matches!(dilate(&wide, 2), Err(Error::Precondition(_))));
    assert!((mass(&dilate(&u0, 2).unwrap()) - mass(&u0)).abs() <= 1e-12);
}

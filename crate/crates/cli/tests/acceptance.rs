//! Acceptance suite: every criterion at full scale, one PASS/FAIL line each.
//!
//! Runs without the test harness, so the table is always printed; the process
//! exits non-zero if any criterion fails. Verification criteria go through the `dyadic` binary so that the
//! reports checked here are the ones users get.

use std::process::Command;
use std::time::Instant;

use dyadic::ensemble::{bandlimited_field, member_rng};
use dyadic::lp::{fractional_multiplier, function_space_norm, project, DyadicLadder, Fractional, Projection, SpaceSpec};
use dyadic::nls::{
    decay_trace_analysis, initial_field, remainder_fit, richardson_ratio, scattering_extract, simulate_from,
    simulate_sampled, wave_operator_solve, Dealias, InitialData, SolverConfig, WaveOperatorConfig,
};
use dyadic::paraproduct::{chain_sides, ChainExponents};
use dyadic::propagator::evolve;
use dyadic::report::RatioReport;
use dyadic::{Complex, Field64, Grid64, NormKind, SampledField};
use serde_json::Value;

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
}

struct Suite {
    rows: Vec<Outcome>,
}

impl Suite {
    fn run(&mut self, id: u32, name: &'static str, check: impl FnOnce() -> (bool, String)) {
        let start = Instant::now();
        let (passed, detail) = check();
        let seconds = start.elapsed().as_secs_f64();
        println!("{} {id:>2} {name}: {detail} [{seconds:.1} s]", if passed { "PASS" } else { "FAIL" });
        self.rows.push(Outcome { id, name, passed, detail, seconds });
    }
}

/// Runs the binary; returns exit code and stdout.
fn dyadic(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).output().expect("binary runs");
    if !out.stderr.is_empty() {
        eprintln!("dyadic {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim());
    }
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn verify(lemma: &str, sets: &[&str]) -> (i32, Vec<u8>, Value) {
    let mut args = vec!["verify", lemma];
    for s in sets {
        args.extend(["--set", s]);
    }
    let (code, bytes) = dyadic(&args);
    let v = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (code, bytes, v)
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[k]).as_f64().unwrap_or(f64::NAN)
}

/// `e^{itΔ} e^{-a|x|²} = (1+4iat)^{-d/2} exp(-a|x|²/(1+4iat))`.
fn gaussian_solution(grid: Grid64, a: f64, t: f64) -> Field64 {
    let w = Complex::new(1.0, 4.0 * a * t);
    let pref = w.powf(-(grid.dim() as f64) / 2.0);
    SampledField::from_fn(grid, |x| pref * (-a * x.iter().map(|v| v * v).sum::<f64>() / w).exp())
}

fn l2(f: &Field64) -> f64 {
    f.norm(NormKind::Lp(2.0))
}

fn lp_resolution() -> (bool, String) {
    let grid = Grid64::new(3, 64, 10.0).unwrap();
    let ladder = DyadicLadder::for_grid(&grid);
    let start = Instant::now();
    let worst = (0..10u64)
        .map(|seed| {
            let f = bandlimited_field(grid, &mut member_rng(seed, 0), grid.max_frequency(), true, false);
            let sum = ladder.homogeneous_bands().fold(SampledField::zeros(grid), |acc, k| {
                acc.add(&project(&f, Projection::HomogBand(k), &ladder).unwrap()).unwrap()
            });
            l2(&sum.sub(&f).unwrap()) / l2(&f)
        })
        .fold(0.0f64, f64::max);
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-10 && secs < 10.0, format!("max relative residual {worst:.2e} over 10 fields in {secs:.1} s"))
}

fn propagator_exactness() -> (bool, String) {
    let grid = Grid64::new(1, 4096, 200.0).unwrap();
    let mut unitarity = 0.0f64;
    let mut group = 0.0f64;
    for seed in 0..4u64 {
        let f = bandlimited_field(grid, &mut member_rng(seed, 0), grid.nyquist(), false, false);
        for (t1, t2) in [(0.3, 1.7), (5.0, -2.5), (-11.0, 20.0)] {
            let u = evolve(&f, t1);
            unitarity = unitarity.max((l2(&u) - l2(&f)).abs() / l2(&f));
            let lhs = evolve(&u, t2);
            group = group.max(lhs.sub(&evolve(&f, t1 + t2)).unwrap().max_abs() / f.max_abs());
        }
    }
    let f = SampledField::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
    let mut closed = 0.0f64;
    for t in [0.5, 2.0, 10.0] {
        let u = evolve(&f, t);
        assert!(u.guard_mass() < 1e-6, "Gaussian left the guard window at t = {t}");
        let exact = gaussian_solution(grid, 1.0, t);
        closed = closed.max(u.sub(&exact).unwrap().max_abs() / exact.max_abs());
    }
    (
        unitarity <= 1e-12 && group <= 1e-12 && closed <= 1e-8,
        format!("unitarity {unitarity:.1e}, group law {group:.1e}, Gaussian closed form {closed:.1e}"),
    )
}

fn dispersive_decay() -> (bool, String) {
    let (c1, _, one) = verify("dispersive", &[]);
    let (c3, _, three) =
        verify("dispersive", &["grid.dim=3", "grid.n=128", "grid.half_width=53"]);
    let s1 = num(&one, &["report", "fitted_exponents", "decay_slope"]);
    let s3 = num(&three, &["report", "fitted_exponents", "decay_slope"]);
    (c1 == 0 && c3 == 0, format!("slopes {s1:.4} (d=1, target -0.5) and {s3:.4} (d=3, target -1.5)"))
}

fn miyachi() -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (dim, n) in [("1", "1024"), ("2", "256")] {
        for variant in ["inhomog", "lowfreq_homog"] {
            let d = format!("miyachi.dim={dim}");
            let nn = format!("miyachi.n={n}");
            let var = format!("miyachi.variant={variant}");
            let (code, _, v) = verify("miyachi", &[&d, &nn, &var]);
            ok &= code == 0;
            parts.push(format!(
                "d={dim} {variant}: growth {:.2}, max ratio {:.3}",
                num(&v, &["report", "fitted_exponents", "growth_max"]),
                num(&v, &["report", "max_ratio"])
            ));
        }
    }
    (ok, parts.join("; "))
}

fn key_lemma() -> (bool, String) {
    let (code, _, v) = verify("maximal", &[]);
    let slope = num(&v, &["report", "fitted_exponents", "slope"]);
    let expected = num(&v, &["report", "diagnostics", "expected_slope"]);
    (code == 0, format!("slope {slope:.3} against {expected:.3} ± 0.2"))
}

/// Synthetic sweep whose maxima grow tenfold per scale must be rejected.
fn growth_protocol_rejects() -> bool {
    let mut rep = RatioReport::new("synthetic", "none");
    for (i, m) in [1.0, 10.0, 100.0, 1000.0].into_iter().enumerate() {
        rep.push_scale(i as f64, &[m]);
    }
    rep.apply_growth_protocol();
    !rep.passed()
}

fn leibniz() -> (bool, String) {
    let (code, _, v) = verify("leibniz", &[]);
    let rejects = growth_protocol_rejects();
    (
        code == 0 && rejects,
        format!(
            "max ratio {:.3}, sweep variation {:.3}, protocol rejects growing sweep: {rejects}",
            num(&v, &["report", "max_ratio"]),
            num(&v, &["report", "diagnostics", "sweep_variation"])
        ),
    )
}

fn chain() -> (bool, String) {
    let (code, _, v) = verify("chain", &[]);
    let grid = Grid64::new(1, 256, 32.0).unwrap();
    let ladder = DyadicLadder::for_grid(&grid);
    let u = SampledField::from_real_fn(grid, |x| 1.0 / (1.0 + x[0] * x[0]).powi(2) + 0.3 * (-(x[0] - 5.0).powi(2)).exp());
    let sides = chain_sides(&u, &ChainExponents::with_q(1.0, 0.5, 1.0), &ladder).unwrap();
    let direct =
        function_space_norm(&fractional_multiplier(&u, Fractional::D(0.5)), &SpaceSpec::local_hardy(), &ladder).unwrap();
    let collapse = (sides.lhs - direct).abs() / direct;
    (
        code == 0 && collapse <= 1e-10,
        format!(
            "max ratio {:.3}, sweep variation {:.3}, p = 1 collapse {collapse:.1e}",
            num(&v, &["report", "max_ratio"]),
            num(&v, &["report", "diagnostics", "sweep_variation"])
        ),
    )
}

fn quintic() -> (bool, String) {
    let (c1, b1, v) = verify("quintic", &[]);
    let (c2, b2, _) = verify("quintic", &[]);
    let max = num(&v, &["report", "max_ratio"]);
    (c1 == 0 && c2 == 0 && max.is_finite() && b1 == b2, format!("max ratio {max:.4}, rerun identical: {}", b1 == b2))
}

fn hh() -> (bool, String) {
    let (code, _, v) = verify("hh", &[]);
    let g0 = num(&v, &["report", "product", "fitted_exponents", "gamma"]);
    let g1 = num(&v, &["report", "output_vanishing", "fitted_exponents", "gamma"]);
    (code == 0, format!("gamma {g0:.3} (m = 1, target 0 ± 0.15), {g1:.3} (vanishing, target 1 ± 0.25)"))
}

fn conservation() -> (bool, String) {
    let grid = Grid64::new(3, 32, 12.0).unwrap();
    let cfg = SolverConfig {
        dt: 0.1,
        t_final: 8.0,
        ..SolverConfig::new(grid, InitialData::Gaussian { amplitude: 0.3, a: 0.5 })
    };
    let u0 = initial_field(&cfg).unwrap();
    let (_, trace) = simulate_from(&cfg, u0.clone()).unwrap();
    let (dm, de) = trace.drifts();
    let (_, _, ratio) = richardson_ratio(&cfg, &u0, 32).unwrap();
    (
        dm <= 1e-8 && de <= 1e-5 && (3.5..=4.5).contains(&ratio),
        format!("mass drift {dm:.1e}, energy drift {de:.1e}, Richardson ratio {ratio:.3}"),
    )
}

struct LongRun {
    decay: (bool, String),
    scatter: (bool, String),
    remainder: (bool, String),
}

/// Nonlinear decay, scattering and remainder share one 128³ run.
fn long_run() -> LongRun {
    let grid = Grid64::new(3, 128, 67.0).unwrap();
    let cfg = SolverConfig {
        dt: 0.1,
        t_final: 8.0,
        dealias: Dealias::CutoffThird,
        sample_every: 5,
        ..SolverConfig::new(grid, InitialData::Gaussian { amplitude: 0.3, a: 0.125 })
    };
    let u0 = initial_field(&cfg).unwrap();
    let (_, linear) = simulate_from(&cfg.with_mu(0.0), u0.clone()).unwrap();
    let (_, trace, samples) = simulate_sampled(&cfg, u0).unwrap();

    let window = (1.0, cfg.t_final);
    let nl = decay_trace_analysis(&trace, window).unwrap();
    let lin = decay_trace_analysis(&linear, window).unwrap();
    let plateau = nl.plateau / lin.plateau;
    let decay = (
        (plateau - 1.0).abs() <= 0.1,
        format!("plateau {:.4} vs linear {:.4} (ratio {plateau:.4}) over {} guarded rows", nl.plateau, lin.plateau, nl.points),
    );

    let rep = scattering_extract(&samples).unwrap();
    drop(samples);
    let at4 = rep.cauchy_at(4.0).unwrap_or(f64::INFINITY);
    let bound = 1e-4 * rep.initial_l1;
    let scatter = (
        rep.cauchy_monotone && at4 <= bound,
        format!("Cauchy column monotone: {}, value at t = 4 {at4:.2e} vs bound {bound:.2e}", rep.cauchy_monotone),
    );

    let fit = remainder_fit(&rep, (1.0, rep.t_last / 2.0)).unwrap();
    let slope = fit.slope.unwrap_or(f64::NAN);
    let remainder =
        (slope <= -3.0, format!("fitted slope {slope:.2} (desk bound -3, target {} not claimed)", fit.target_slope));
    LongRun { decay, scatter, remainder }
}

fn wave_operator() -> (bool, String) {
    let grid = Grid64::new(3, 32, 12.0).unwrap();
    let wcfg = WaveOperatorConfig { horizon: 8.0, ds: 0.05, ..WaveOperatorConfig::default() };
    let scfg = SolverConfig {
        dt: wcfg.ds,
        t_final: wcfg.horizon,
        sample_every: usize::MAX,
        ..SolverConfig::new(grid, InitialData::Gaussian { amplitude: 0.3, a: 0.5 })
    };
    let phi = initial_field(&scfg).unwrap();
    let sol = wave_operator_solve(&phi, &wcfg).unwrap();
    let (end, _) = simulate_from(&scfg, sol.initial().clone()).unwrap();
    let back = evolve(&end.u, -wcfg.horizon);
    let err = back.sub(&phi).unwrap().norm(NormKind::Lp(1.0)) / phi.norm(NormKind::Lp(1.0));
    (
        sol.converged && sol.iterations <= 20 && err <= 1e-6,
        format!("{} Picard iterations, converged: {}, round trip L1 relative {err:.1e}", sol.iterations, sol.converged),
    )
}

fn determinism() -> (bool, String) {
    let verifies: [(&str, &[&str]); 9] = [
        ("maximal", &[]),
        ("leibniz", &[]),
        ("chain", &[]),
        ("quintic", &[]),
        ("hh", &[]),
        ("miyachi", &[]),
        ("miyachi", &["miyachi.dim=2", "miyachi.n=256"]),
        ("dispersive", &[]),
        ("profile", &[]),
    ];
    let mut differing = Vec::new();
    for (lemma, sets) in verifies {
        let (_, a, _) = verify(lemma, sets);
        let (_, b, _) = verify(lemma, sets);
        if a != b || a.is_empty() {
            differing.push(lemma.to_string());
        }
    }
    let sim = [
        "simulate", "--seed", "5", "--set", "grid.dim=3", "--set", "grid.n=16", "--set", "grid.half_width=6", "--set",
        "solver.initial=packets", "--set", "solver.t_final=2", "--set", "solver.dt=0.1",
    ];
    let (_, a) = dyadic(&sim);
    let (_, b) = dyadic(&sim);
    if a != b || a.is_empty() {
        differing.push("simulate".into());
    }
    (differing.is_empty(), format!("10 report pairs compared, differing: {differing:?}"))
}

fn main() {
    let mut suite = Suite { rows: Vec::new() };
    suite.run(1, "Littlewood-Paley resolution", lp_resolution);
    suite.run(2, "propagator exactness", propagator_exactness);
    suite.run(3, "dispersive decay", dispersive_decay);
    suite.run(4, "Miyachi bound", miyachi);
    suite.run(5, "key lemma regression", key_lemma);
    suite.run(6, "fractional Leibniz", leibniz);
    suite.run(7, "chain rule", chain);
    suite.run(8, "quintic Hardy estimate", quintic);
    suite.run(9, "HH cancellation", hh);
    suite.run(10, "NLS conservation", conservation);
    let start = Instant::now();
    let long = long_run();
    println!("(shared 128^3 run: {:.1} s)", start.elapsed().as_secs_f64());
    suite.run(11, "nonlinear decay", || long.decay);
    suite.run(12, "scattering", || long.scatter);
    suite.run(13, "remainder rate", || long.remainder);
    suite.run(14, "wave operator", wave_operator);
    suite.run(15, "determinism", determinism);

    println!();
    for r in &suite.rows {
        println!("{} {:>2} {} ({:.1} s)", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.seconds);
    }
    let failed: Vec<String> =
        suite.rows.iter().filter(|r| !r.passed).map(|r| format!("{} {}: {}", r.id, r.name, r.detail)).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria:\n{}", failed.join("\n"));
        std::process::exit(1);
    }
    println!("all {} criteria passed", suite.rows.len());
}

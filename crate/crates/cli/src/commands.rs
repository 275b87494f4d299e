use std::fmt;

use dyadic::ensemble::{gaussian_kernel, jackson_kernel};
use dyadic::lp::{function_space_norm, project, DyadicLadder, Family, Projection, SpaceSpec};
use dyadic::maximal::{key_lemma_regression, MaximalCheckConfig};
use dyadic::nls::{
    decay_trace_analysis, initial_field, mass, remainder_fit, scattering_extract, simulate_from, simulate_sampled,
    wave_operator_solve, Dealias, DecayTrace, InitialData, SolverConfig, WaveOperatorConfig,
};
use dyadic::paraproduct::{
    chain_ensemble, hh_regression, leibniz_ensemble, quintic_ensemble, BilinearSymbol, ChainExponents,
    LeibnizExponents, PacketEnsemble,
};
use dyadic::propagator::{
    asymptotic_residual, dispersive_ratio, evolve, miyachi_ensemble, AsymptoticCheckConfig, MiyachiEnsemble,
    MiyachiVariant,
};
use dyadic::report::{sweep_variation, RatioReport};
use dyadic::{Field64, Grid64, NormKind, SampledField};
use serde_json::{json, Value};

use crate::config::{key, required, ConfigError, Effective, Key};
use crate::output::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Lemma {
    Maximal,
    Leibniz,
    Chain,
    Quintic,
    Hh,
    Miyachi,
    Dispersive,
    Profile,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Norms,
    Project,
    Evolve,
    Simulate,
    Decay,
    Scatter,
    Waveop,
    Verify(Lemma),
}

pub enum RunError {
    /// Usage and configuration problems.
    Config(String),
    /// A module rejected a configured value; reported with the module's code.
    Rejected(dyadic::Error),
    Module(dyadic::Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Rejected(_) => 2,
            RunError::Module(_) | RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "error[E_CONFIG]: {m}"),
            RunError::Module(e) | RunError::Rejected(e) => write!(f, "error[{}]: {e}", e.code()),
            RunError::Io(e) => write!(f, "error[E_IO]: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e.0)
    }
}

impl From<dyadic::Error> for RunError {
    fn from(e: dyadic::Error) -> Self {
        match e {
            dyadic::Error::Config(m) => RunError::Config(m),
            other => RunError::Module(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// What a command produced.
pub struct Outcome {
    pub report: Value,
    pub table: Table,
    pub passed: bool,
    pub grid: String,
    pub snapshot: Option<Field64>,
}

const GRID_REQUIRED: [Key; 3] = [required("grid", "dim"), required("grid", "n"), required("grid", "half_width")];

fn output_keys(format: &'static str, snapshot: bool) -> Vec<Key> {
    let mut v = vec![key("output", "path", ""), key("output", "format", format)];
    if snapshot {
        v.push(key("output", "snapshot", ""));
    }
    v
}

/// Initial-data keys; `kind_key` selects zero, gaussian, packets or snapshot.
fn field_keys(section: &'static str, kind_key: &'static str, amplitude: &'static str, a: &'static str) -> Vec<Key> {
    vec![
        key(section, kind_key, "gaussian"),
        key(section, "amplitude", amplitude),
        key(section, "a", a),
        key(section, "count", "3"),
        key(section, "spread", "4"),
        key(section, "width", "1"),
        key(section, "k_max", "2"),
        key(section, "path", ""),
        key(section, "seed", "0"),
    ]
}

fn solver_keys(with_time: bool) -> Vec<Key> {
    let mut v = vec![key("solver", "mu", "1"), key("solver", "dealias", "padded2x_filter")];
    if with_time {
        v.extend([
            key("solver", "dt", "0.05"),
            key("solver", "t_final", "1"),
            key("solver", "sample_every", "1"),
            key("solver", "allow_focusing", "false"),
        ]);
    }
    v.extend(field_keys("solver", "initial", "0.3", "0.5"));
    v
}

fn ensemble_keys(d: [&'static str; 10]) -> Vec<Key> {
    let names = ["seed", "samples", "dim", "n", "half_width", "packets", "spread", "width", "k_max", "dilations"];
    names.iter().zip(d).map(|(n, v)| key("ensemble", n, v)).collect()
}

const PACKET_DEFAULTS: [&str; 10] = ["0", "100", "1", "256", "32", "3", "4", "1", "2", "0.5,1,2"];
const QUINTIC_DEFAULTS: [&str; 10] = ["11", "10", "3", "32", "12", "3", "3", "2", "0.5", "1"];

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Norms => "norms".into(),
            Command::Project => "project".into(),
            Command::Evolve => "evolve".into(),
            Command::Simulate => "simulate".into(),
            Command::Decay => "decay".into(),
            Command::Scatter => "scatter".into(),
            Command::Waveop => "waveop".into(),
            Command::Verify(l) => format!("verify {}", clap::ValueEnum::to_possible_value(l).expect("named").get_name()),
        }
    }

    /// Section whose `seed` key `--seed` sets.
    pub fn seed_section(&self) -> &'static str {
        match self {
            Command::Norms | Command::Project | Command::Evolve => "field",
            Command::Verify(Lemma::Dispersive | Lemma::Profile) => "field",
            Command::Simulate | Command::Decay | Command::Scatter | Command::Waveop => "solver",
            Command::Verify(Lemma::Leibniz | Lemma::Chain | Lemma::Quintic) => "ensemble",
            Command::Verify(Lemma::Maximal) => "maximal",
            Command::Verify(Lemma::Hh) => "hh",
            Command::Verify(Lemma::Miyachi) => "miyachi",
        }
    }

    pub fn schema(&self) -> Vec<Key> {
        let mut s: Vec<Key> = Vec::new();
        match self {
            Command::Norms => {
                s.extend(GRID_REQUIRED);
                s.extend(field_keys("field", "kind", "1", "1"));
                s.extend([
                    key("norms", "family", "triebel"),
                    key("norms", "homogeneous", "true"),
                    key("norms", "s", "0"),
                    key("norms", "p", "1"),
                    key("norms", "q", "2"),
                ]);
                s.extend(output_keys("json", false));
            }
            Command::Project => {
                s.extend(GRID_REQUIRED);
                s.extend(field_keys("field", "kind", "1", "1"));
                s.extend([key("project", "kind", "homog_band"), key("project", "k", "0")]);
                s.extend(output_keys("json", true));
            }
            Command::Evolve => {
                s.extend(GRID_REQUIRED);
                s.extend(field_keys("field", "kind", "1", "1"));
                s.push(key("evolve", "t", "1"));
                s.extend(output_keys("json", true));
            }
            Command::Simulate => {
                s.extend(GRID_REQUIRED);
                s.extend(solver_keys(true));
                s.extend(output_keys("csv", true));
            }
            Command::Decay => {
                s.extend(GRID_REQUIRED);
                s.extend(solver_keys(true));
                s.extend([
                    key("decay", "t_min", "1"),
                    key("decay", "t_max", ""),
                    key("decay", "linear_pair", "true"),
                    key("decay", "plateau_tol", "0.1"),
                ]);
                s.extend(output_keys("json", false));
            }
            Command::Scatter => {
                s.extend(GRID_REQUIRED);
                s.extend(solver_keys(true));
                s.extend([
                    key("scatter", "window_start", "1"),
                    key("scatter", "window_end", ""),
                    key("scatter", "cauchy_at", "4"),
                    key("scatter", "cauchy_tol", "1e-4"),
                    key("scatter", "remainder_slope_max", "-3"),
                ]);
                s.extend(output_keys("json", true));
            }
            Command::Waveop => {
                s.extend(GRID_REQUIRED);
                s.extend(solver_keys(false));
                s.extend([
                    key("waveop", "horizon", "8"),
                    key("waveop", "ds", "0.05"),
                    key("waveop", "max_iter", "20"),
                    key("waveop", "tol", "1e-8"),
                    key("waveop", "smallness", "100"),
                    key("waveop", "round_trip", "true"),
                    key("waveop", "round_trip_tol", "1e-6"),
                ]);
                s.extend(output_keys("json", true));
            }
            Command::Verify(lemma) => {
                match lemma {
                    Lemma::Maximal => s.extend([
                        key("grid", "dim", "1"),
                        key("grid", "n", "8192"),
                        key("grid", "half_width", "128"),
                        key("maximal", "seed", "0"),
                        key("maximal", "r", "0.6666666666666666"),
                        key("maximal", "k", "0"),
                        key("maximal", "gap_max", "5"),
                        key("maximal", "l_offset", "4"),
                        key("maximal", "a_const", "10"),
                        key("maximal", "band_const", "1.1"),
                        key("maximal", "psi_width", "8"),
                        key("maximal", "slope_tol", "0.2"),
                    ]),
                    Lemma::Leibniz => {
                        s.extend(ensemble_keys(PACKET_DEFAULTS));
                        s.extend([
                            key("leibniz", "s", "1"),
                            key("leibniz", "p1", "2"),
                            key("leibniz", "q1", "2"),
                            key("leibniz", "p2", "2"),
                            key("leibniz", "q2", "2"),
                            key("leibniz", "max_variation", "3"),
                        ]);
                    }
                    Lemma::Chain => {
                        s.extend(ensemble_keys(PACKET_DEFAULTS));
                        s.extend([
                            key("chain", "p", "1.5,2.5"),
                            key("chain", "q", "1.5,2"),
                            key("chain", "s", "0.3,0.7"),
                            key("chain", "max_variation", "3"),
                        ]);
                    }
                    Lemma::Quintic => s.extend(ensemble_keys(QUINTIC_DEFAULTS)),
                    Lemma::Hh => s.extend([
                        key("grid", "dim", "1"),
                        key("grid", "n", "8388608"),
                        key("grid", "half_width", "3.141592653589793"),
                        key("hh", "seed", "0"),
                        key("hh", "j", "21"),
                        key("hh", "l", "20"),
                        key("hh", "k", "4,5,6,7"),
                        key("hh", "f_scale", "0.23"),
                        key("hh", "g_offset", "0.7"),
                        key("hh", "g_stretch", "1.3"),
                        key("hh", "g_carrier", "0.4"),
                        key("hh", "tol_product", "0.15"),
                        key("hh", "tol_vanishing", "0.25"),
                    ]),
                    Lemma::Miyachi => s.extend([
                        key("miyachi", "seed", "4"),
                        key("miyachi", "samples", "32"),
                        key("miyachi", "dim", "1"),
                        key("miyachi", "n", "1024"),
                        key("miyachi", "half_width", "128"),
                        key("miyachi", "packets", "3"),
                        key("miyachi", "spread", "8"),
                        key("miyachi", "width", "2"),
                        key("miyachi", "k_max", "1"),
                        key("miyachi", "t_max", "20"),
                        key("miyachi", "t_step", "1"),
                        key("miyachi", "variant", "inhomog"),
                        key("miyachi", "growth_slack", "0.2"),
                        key("miyachi", "ratio_bound", "1.05"),
                    ]),
                    Lemma::Dispersive => {
                        s.extend([key("grid", "dim", "1"), key("grid", "n", "4096"), key("grid", "half_width", "200")]);
                        s.extend(field_keys("field", "kind", "1", "1"));
                        s.extend([
                            key("dispersive", "t_min", "1"),
                            key("dispersive", "t_max", "10"),
                            key("dispersive", "t_count", "10"),
                            key("dispersive", "slope_tol", "0.02"),
                        ]);
                    }
                    Lemma::Profile => {
                        s.extend([key("grid", "dim", "1"), key("grid", "n", "4096"), key("grid", "half_width", "400")]);
                        s.extend(field_keys("field", "kind", "1", "1"));
                        s.extend([
                            key("profile", "beta", "0.5"),
                            key("profile", "gamma", "2"),
                            key("profile", "t_min", "2"),
                            key("profile", "t_max", "10"),
                            key("profile", "t_count", "9"),
                            key("profile", "slope_slack", "0.1"),
                        ]);
                    }
                }
                s.extend(output_keys("json", false));
            }
        }
        s
    }

    pub fn run(&self, eff: &Effective) -> Result<Outcome> {
        match self {
            Command::Norms => norms(eff),
            Command::Project => project_cmd(eff),
            Command::Evolve => evolve_cmd(eff),
            Command::Simulate => simulate_cmd(eff),
            Command::Decay => decay_cmd(eff),
            Command::Scatter => scatter_cmd(eff),
            Command::Waveop => waveop_cmd(eff),
            Command::Verify(l) => match l {
                Lemma::Maximal => verify_maximal(eff),
                Lemma::Leibniz => verify_leibniz(eff),
                Lemma::Chain => verify_chain(eff),
                Lemma::Quintic => verify_quintic(eff),
                Lemma::Hh => verify_hh(eff),
                Lemma::Miyachi => verify_miyachi(eff),
                Lemma::Dispersive => verify_dispersive(eff),
                Lemma::Profile => verify_profile(eff),
            },
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn grid(eff: &Effective) -> Result<Grid64> {
    Grid64::new(eff.get("grid", "dim")?, eff.get("grid", "n")?, eff.get("grid", "half_width")?).map_err(RunError::Rejected)
}

fn initial_data(eff: &Effective, section: &str, kind_key: &str) -> Result<InitialData> {
    let f = |k: &str| eff.get::<f64>(section, k);
    Ok(match eff.str(section, kind_key) {
        "zero" => InitialData::Zero,
        "gaussian" => InitialData::Gaussian { amplitude: f("amplitude")?, a: f("a")? },
        "packets" => InitialData::Packets {
            amplitude: f("amplitude")?,
            count: eff.get(section, "count")?,
            spread: f("spread")?,
            width: f("width")?,
            k_max: f("k_max")?,
        },
        "snapshot" => InitialData::Snapshot {
            path: eff
                .path(section, "path")
                .ok_or_else(|| RunError::Config(format!("[{section}] {kind_key} = snapshot needs [{section}] path")))?,
        },
        other => {
            return Err(RunError::Config(format!(
                "[{section}] {kind_key}: unknown kind '{other}' (zero, gaussian, packets, snapshot)"
            )))
        }
    })
}

fn field(eff: &Effective) -> Result<(Grid64, Field64)> {
    let g = grid(eff)?;
    let f = initial_data(eff, "field", "kind")?.sample(g, eff.get("field", "seed")?)?;
    Ok((g, f))
}

fn solver_config(eff: &Effective) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        mu: eff.get("solver", "mu")?,
        grid: grid(eff)?,
        dt: eff.get("solver", "dt")?,
        t_final: eff.get("solver", "t_final")?,
        dealias: Dealias::parse(eff.str("solver", "dealias"))?,
        initial: initial_data(eff, "solver", "initial")?,
        seed: eff.get("solver", "seed")?,
        sample_every: eff.get("solver", "sample_every")?,
        allow_focusing: eff.get("solver", "allow_focusing")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn summary(report: &Value) -> Outcome {
    Outcome { table: Table::flatten(report), report: report.clone(), passed: true, grid: String::new(), snapshot: None }
}

fn norms(eff: &Effective) -> Result<Outcome> {
    let (g, f) = field(eff)?;
    let family = match eff.str("norms", "family") {
        "triebel" => Family::Triebel,
        "besov" => Family::Besov,
        other => return Err(RunError::Config(format!("[norms] family: unknown family '{other}' (triebel, besov)"))),
    };
    let spec = SpaceSpec::new(family, eff.get("norms", "homogeneous")?, eff.get("norms", "s")?, eff.get("norms", "p")?, eff.get("norms", "q")?)?;
    let value = function_space_norm(&f, &spec, &DyadicLadder::for_grid(&g))?;
    let report = json!({
        "l1": f.norm(NormKind::Lp(1.0)),
        "l2": f.norm(NormKind::Lp(2.0)),
        "linf": f.norm(NormKind::Linf),
        "space": to_value(&spec),
        "space_norm": value,
    });
    Ok(Outcome { grid: g.describe(), ..summary(&report) })
}

fn project_cmd(eff: &Effective) -> Result<Outcome> {
    let (g, f) = field(eff)?;
    let k: i32 = eff.get("project", "k")?;
    let kind = match eff.str("project", "kind") {
        "homog_band" => Projection::HomogBand(k),
        "low_pass" => Projection::LowPass(k),
        "inhomog_band" => Projection::InhomogBand(k),
        other => {
            return Err(RunError::Config(format!(
                "[project] kind: unknown projection '{other}' (homog_band, low_pass, inhomog_band)"
            )))
        }
    };
    let out = project(&f, kind, &DyadicLadder::for_grid(&g))?;
    let report = json!({
        "projection": to_value(&kind),
        "l2_in": f.norm(NormKind::Lp(2.0)),
        "l2_out": out.norm(NormKind::Lp(2.0)),
    });
    Ok(Outcome { grid: g.describe(), snapshot: Some(out), ..summary(&report) })
}

fn evolve_cmd(eff: &Effective) -> Result<Outcome> {
    let (g, f) = field(eff)?;
    let t: f64 = eff.get("evolve", "t")?;
    let u = evolve(&f, t);
    let report = json!({
        "t": t,
        "l2_in": f.norm(NormKind::Lp(2.0)),
        "l2_out": u.norm(NormKind::Lp(2.0)),
        "sup_out": u.max_abs(),
        "guard_mass": u.guard_mass(),
    });
    Ok(Outcome { grid: g.describe(), snapshot: Some(u), ..summary(&report) })
}

fn trace_table(trace: &DecayTrace) -> Table {
    Table::numeric(
        &["t", "sup_abs_u", "weighted_sup", "mass", "energy", "guard_mass", "l10_accum"],
        trace.rows.iter().map(|r| vec![r.t, r.sup_abs_u, r.weighted_sup, r.mass, r.energy, r.guard_mass, r.l10_accum]),
    )
}

fn simulate_cmd(eff: &Effective) -> Result<Outcome> {
    let cfg = solver_config(eff)?;
    let u0 = initial_field(&cfg)?;
    let (state, trace) = simulate_from(&cfg, u0)?;
    let (dm, de) = trace.drifts();
    let strichartz: Vec<Value> =
        state.strichartz.iter().map(|s| json!({"q": s.q, "r": s.r, "value": s.value()})).collect();
    let report = json!({
        "trace": to_value(&trace.rows),
        "final": {
            "t": state.t,
            "steps": state.steps,
            "mass_drift": dm,
            "energy_drift": de,
            "filter_loss": state.filter_loss,
            "l10_accum": state.l10.value(),
            "strichartz": strichartz,
        },
    });
    Ok(Outcome { table: trace_table(&trace), report, passed: true, grid: cfg.grid.describe(), snapshot: Some(state.u) })
}

fn decay_cmd(eff: &Effective) -> Result<Outcome> {
    let cfg = solver_config(eff)?;
    let t_max = match eff.str("decay", "t_max") {
        "" => cfg.t_final,
        _ => eff.get("decay", "t_max")?,
    };
    let window = (eff.get::<f64>("decay", "t_min")?, t_max);
    let u0 = initial_field(&cfg)?;
    let pair: bool = eff.get("decay", "linear_pair")?;
    let (nl, lin) = if pair {
        let lin = simulate_from(&cfg.with_mu(0.0), u0.clone())?;
        (simulate_from(&cfg, u0)?, Some(lin))
    } else {
        (simulate_from(&cfg, u0)?, None)
    };
    let fit = decay_trace_analysis(&nl.1, window)?;
    let (dm, de) = nl.1.drifts();
    let mut report = json!({
        "window": [window.0, window.1],
        "nonlinear": to_value(&fit),
        "mass_drift": dm,
        "energy_drift": de,
        "l10_accum": nl.0.l10.value(),
        "filter_loss": nl.0.filter_loss,
    });
    let mut passed = true;
    if let Some((_, lin_trace)) = &lin {
        let lfit = decay_trace_analysis(lin_trace, window)?;
        let ratio = fit.plateau / lfit.plateau;
        let tol: f64 = eff.get("decay", "plateau_tol")?;
        passed = (ratio - 1.0).abs() <= tol;
        report["linear"] = to_value(&lfit);
        report["plateau_ratio"] = json!(ratio);
        report["plateau_within_tol"] = json!(passed);
    }
    Ok(Outcome { table: trace_table(&nl.1), report, passed, grid: cfg.grid.describe(), snapshot: None })
}

fn scatter_cmd(eff: &Effective) -> Result<Outcome> {
    let cfg = solver_config(eff)?;
    let u0 = initial_field(&cfg)?;
    let (_, _, samples) = simulate_sampled(&cfg, u0)?;
    let mut rep = scattering_extract(&samples)?;
    let end = match eff.str("scatter", "window_end") {
        "" => rep.t_last / 2.0,
        _ => eff.get("scatter", "window_end")?,
    };
    let fit = remainder_fit(&rep, (eff.get("scatter", "window_start")?, end))?;
    rep.remainder_slope = fit.slope;
    let at: f64 = eff.get("scatter", "cauchy_at")?;
    let tol: f64 = eff.get("scatter", "cauchy_tol")?;
    let cauchy = rep.cauchy_at(at);
    let small = cauchy.is_some_and(|c| c <= tol * rep.initial_l1);
    let slope_max: f64 = eff.get("scatter", "remainder_slope_max")?;
    let slope_ok = rep.exact_scattering || fit.slope.is_some_and(|s| s <= slope_max);
    let passed = rep.cauchy_monotone && small && slope_ok;
    let mut report = to_value(&rep);
    report["remainder_fit"] = to_value(&fit);
    report["cauchy_at"] = json!({"t": at, "l1": cauchy, "bound": tol * rep.initial_l1, "within": small});
    let table = Table::numeric(
        &["t", "cauchy_l1", "cauchy_h3", "remainder_sup"],
        rep.cauchy_table.iter().zip(&rep.remainder_table).map(|(c, r)| vec![c.t, c.l1, c.h3, r.sup]),
    );
    Ok(Outcome { table, report, passed, grid: cfg.grid.describe(), snapshot: rep.phi_plus.take() })
}

fn waveop_cmd(eff: &Effective) -> Result<Outcome> {
    let g = grid(eff)?;
    let mu: f64 = eff.get("solver", "mu")?;
    let dealias = Dealias::parse(eff.str("solver", "dealias"))?;
    let wcfg = WaveOperatorConfig {
        mu,
        horizon: eff.get("waveop", "horizon")?,
        ds: eff.get("waveop", "ds")?,
        max_iter: eff.get("waveop", "max_iter")?,
        tol: eff.get("waveop", "tol")?,
        smallness: eff.get("waveop", "smallness")?,
        dealias,
    };
    let scfg = SolverConfig {
        mu,
        dealias,
        dt: wcfg.ds,
        t_final: wcfg.horizon,
        initial: initial_data(eff, "solver", "initial")?,
        seed: eff.get("solver", "seed")?,
        sample_every: usize::MAX,
        ..SolverConfig::new(g, InitialData::Zero)
    };
    let phi = initial_field(&scfg)?;
    let sol = wave_operator_solve(&phi, &wcfg)?;
    let mut report = json!({
        "iterations": sol.iterations,
        "differences": sol.differences,
        "converged": sol.converged,
        "phi_plus_l1": phi.norm(NormKind::Lp(1.0)),
        "u0_l1": sol.initial().norm(NormKind::Lp(1.0)),
        "u0_mass": mass(sol.initial()),
    });
    let mut passed = sol.converged;
    if eff.get::<bool>("waveop", "round_trip")? {
        let (end, _) = simulate_from(&scfg, sol.initial().clone())?;
        let back = evolve(&end.u, -wcfg.horizon);
        let err = back.sub(&phi)?.norm(NormKind::Lp(1.0)) / phi.norm(NormKind::Lp(1.0)).max(f64::MIN_POSITIVE);
        let tol: f64 = eff.get("waveop", "round_trip_tol")?;
        report["round_trip_l1_relative"] = json!(err);
        passed &= err <= tol;
    }
    Ok(Outcome { table: Table::flatten(&report), report, passed, grid: g.describe(), snapshot: Some(sol.states[0].clone()) })
}

fn ratio_table(reports: &[&RatioReport]) -> Table {
    Table {
        columns: ["check", "scale", "max_ratio", "median_ratio"].iter().map(|s| s.to_string()).collect(),
        rows: reports
            .iter()
            .flat_map(|r| {
                r.per_scale.iter().map(|row| {
                    vec![r.check.clone(), row.scale.to_string(), row.max_ratio.to_string(), row.median_ratio.to_string()]
                })
            })
            .collect(),
    }
}

fn ratio_outcome(mut rep: RatioReport, extra_ok: bool, why: &str) -> Outcome {
    if !extra_ok {
        rep.fail(why.to_string());
    }
    let passed = rep.passed();
    Outcome { table: ratio_table(&[&rep]), grid: rep.grid.clone(), report: to_value(&rep), passed, snapshot: None }
}

fn verify_maximal(eff: &Effective) -> Result<Outcome> {
    let g = grid(eff)?;
    let m = |k: &str| eff.get::<f64>("maximal", k);
    let k: i32 = eff.get("maximal", "k")?;
    let gap: i32 = eff.get("maximal", "gap_max")?;
    let cfg = MaximalCheckConfig {
        r: m("r")?,
        k,
        j: k,
        l_offset: eff.get("maximal", "l_offset")?,
        a_const: m("a_const")?,
        band_const: m("band_const")?,
        seed: eff.get("maximal", "seed")?,
        samples: 1,
    };
    let psi = gaussian_kernel(g, m("psi_width")? * 2f64.powi(-k));
    let members: Vec<(i32, Field64)> =
        (k..=k + gap).map(|j| (j, jackson_kernel(g, cfg.band_const * 2f64.powi(j)))).collect();
    let rep = key_lemma_regression(&psi, &members, &cfg)?;
    let expected = rep.diagnostics["expected_slope"];
    let tol = m("slope_tol")?;
    let ok = rep.fitted_exponents.get("slope").is_some_and(|s| (s - expected).abs() <= tol);
    Ok(ratio_outcome(rep, ok, "fitted slope outside tolerance of (1/r - 1)d"))
}

fn packet_ensemble(eff: &Effective) -> Result<PacketEnsemble> {
    let e = |k: &str| eff.get::<f64>("ensemble", k);
    Ok(PacketEnsemble {
        seed: eff.get("ensemble", "seed")?,
        samples: eff.get("ensemble", "samples")?,
        dim: eff.get("ensemble", "dim")?,
        n: eff.get("ensemble", "n")?,
        half_width: e("half_width")?,
        packets: eff.get("ensemble", "packets")?,
        spread: e("spread")?,
        width: e("width")?,
        k_max: e("k_max")?,
        dilations: eff.list("ensemble", "dilations")?,
    })
}

fn with_variation(rep: RatioReport, bound: f64) -> Outcome {
    let maxima: Vec<f64> = rep.per_scale.iter().map(|r| r.max_ratio).collect();
    let variation = sweep_variation(&maxima).unwrap_or(f64::INFINITY);
    let mut rep = rep;
    rep.diag("sweep_variation", variation);
    let ok = rep.max_ratio.is_finite() && variation < bound;
    ratio_outcome(rep, ok, "dilation sweep varies by more than the allowed factor")
}

fn verify_leibniz(eff: &Effective) -> Result<Outcome> {
    let l = |k: &str| eff.get::<f64>("leibniz", k);
    let ex = LeibnizExponents { s: l("s")?, p1: l("p1")?, q1: l("q1")?, p2: l("p2")?, q2: l("q2")? };
    let rep = leibniz_ensemble(&packet_ensemble(eff)?, &ex)?;
    Ok(with_variation(rep, l("max_variation")?))
}

fn verify_chain(eff: &Effective) -> Result<Outcome> {
    let ps: Vec<f64> = eff.list("chain", "p")?;
    let qs: Vec<f64> = eff.list("chain", "q")?;
    let ss: Vec<f64> = eff.list("chain", "s")?;
    if ps.len() != qs.len() {
        return Err(RunError::Config("[chain] p and q must list the same number of values".into()));
    }
    let exps: Vec<ChainExponents> =
        ps.iter().zip(&qs).flat_map(|(&p, &q)| ss.iter().map(move |&s| ChainExponents::with_q(p, s, q))).collect();
    let rep = chain_ensemble(&packet_ensemble(eff)?, &exps)?;
    Ok(with_variation(rep, eff.get("chain", "max_variation")?))
}

fn verify_quintic(eff: &Effective) -> Result<Outcome> {
    let rep = quintic_ensemble(&packet_ensemble(eff)?)?;
    let ok = rep.max_ratio.is_finite();
    Ok(ratio_outcome(rep, ok, "ratio is not finite"))
}

fn verify_hh(eff: &Effective) -> Result<Outcome> {
    let g = grid(eff)?;
    let ladder = DyadicLadder::for_grid(&g);
    let h = |k: &str| eff.get::<f64>("hh", k);
    let j: i32 = eff.get("hh", "j")?;
    let l: i32 = eff.get("hh", "l")?;
    let ks: Vec<i32> = eff.list("hh", "k")?;
    let w = 1.0 / (h("f_scale")? * 2f64.powi(j));
    let (offset, stretch, carrier) = (h("g_offset")? * w, h("g_stretch")? * w, h("g_carrier")? / w);
    let f = SampledField::from_real_fn(g, |x| (-x[0] * x[0] / (2.0 * w * w)).exp());
    let gg = SampledField::from_real_fn(g, |x| {
        let y = x[0] - offset;
        (carrier * y).cos() * (-y * y / (2.0 * stretch * stretch)).exp()
    });
    let mut reps = Vec::new();
    let mut ok = true;
    for (symbol, target, tol) in [
        (BilinearSymbol::product(), 0.0, h("tol_product")?),
        (BilinearSymbol::output_vanishing(), 1.0, h("tol_vanishing")?),
    ] {
        let mut rep = hh_regression(&symbol, &f, &gg, &ks, j, l, &ladder)?;
        let within = rep.fitted_exponents.get("gamma").is_some_and(|gm| (gm - target).abs() <= tol);
        if !within {
            rep.fail(format!("fitted gamma outside {target} ± {tol}"));
        }
        ok &= rep.passed();
        reps.push(rep);
    }
    let report = json!({ "product": to_value(&reps[0]), "output_vanishing": to_value(&reps[1]) });
    Ok(Outcome { table: ratio_table(&[&reps[0], &reps[1]]), report, passed: ok, grid: g.describe(), snapshot: None })
}

fn verify_miyachi(eff: &Effective) -> Result<Outcome> {
    let m = |k: &str| eff.get::<f64>("miyachi", k);
    let (t_max, t_step) = (m("t_max")?, m("t_step")?);
    if !(t_step > 0.0 && t_max >= 0.0) {
        return Err(RunError::Config("[miyachi] needs t_step > 0 and t_max >= 0".into()));
    }
    let count = (t_max / t_step).round() as usize;
    let variant = match eff.str("miyachi", "variant") {
        "inhomog" => MiyachiVariant::Inhomog,
        "lowfreq_homog" => MiyachiVariant::LowfreqHomog,
        other => return Err(RunError::Config(format!("[miyachi] variant: unknown '{other}' (inhomog, lowfreq_homog)"))),
    };
    let ens = MiyachiEnsemble {
        seed: eff.get("miyachi", "seed")?,
        samples: eff.get("miyachi", "samples")?,
        dim: eff.get("miyachi", "dim")?,
        n: eff.get("miyachi", "n")?,
        half_width: m("half_width")?,
        packets: eff.get("miyachi", "packets")?,
        spread: m("spread")?,
        width: m("width")?,
        k_max: m("k_max")?,
        t_grid: (0..=count).map(|i| i as f64 * t_step).collect(),
        variant,
    };
    let rep = miyachi_ensemble(&ens)?;
    let limit = ens.dim as f64 / 2.0 + m("growth_slack")?;
    let growth_ok = rep.fitted_exponents.get("growth_max").is_some_and(|g| *g <= limit);
    let ok = growth_ok && rep.max_ratio <= m("ratio_bound")?;
    Ok(ratio_outcome(rep, ok, "growth exponent or per-t ratio above its bound"))
}

fn t_grid(eff: &Effective, section: &str) -> Result<Vec<f64>> {
    let (a, b): (f64, f64) = (eff.get(section, "t_min")?, eff.get(section, "t_max")?);
    let n: usize = eff.get(section, "t_count")?;
    if n < 2 || b.partial_cmp(&a) != Some(std::cmp::Ordering::Greater) {
        return Err(RunError::Config(format!("[{section}] needs t_count >= 2 and t_max > t_min")));
    }
    Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
}

fn verify_dispersive(eff: &Effective) -> Result<Outcome> {
    let (g, f) = field(eff)?;
    let rep = dispersive_ratio(&f, &t_grid(eff, "dispersive")?)?;
    let half = g.dim() as f64 / 2.0;
    let tol: f64 = eff.get("dispersive", "slope_tol")?;
    let ok = rep.fitted_exponents.get("decay_slope").is_some_and(|s| (s + half).abs() <= tol * half);
    Ok(ratio_outcome(rep, ok, "decay slope outside tolerance of -d/2"))
}

fn verify_profile(eff: &Effective) -> Result<Outcome> {
    let (g, f) = field(eff)?;
    let cfg = AsymptoticCheckConfig {
        beta: eff.get("profile", "beta")?,
        gamma: eff.get("profile", "gamma")?,
        t_grid: t_grid(eff, "profile")?,
    };
    let rep = asymptotic_residual(&f, &cfg)?;
    let bound = -(g.dim() as f64 / 2.0 + cfg.beta) + eff.get::<f64>("profile", "slope_slack")?;
    let ok = match rep.fitted_exponents.get("residual_slope") {
        Some(s) => *s <= bound,
        None => true,
    };
    Ok(ratio_outcome(rep, ok, "residual decays slower than t^-(d/2+beta)"))
}

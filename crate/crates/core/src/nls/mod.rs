//! Split-step Fourier solver for `i∂_t u + Δu = μ|u|⁴u` on the periodic lattice,
//! with conservation and decay tracking, scattering-state extraction and the
//! backward Duhamel wave operator.

mod analysis;
mod ground;
mod scaling;
mod waveop;

use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ensemble::{self, PacketField};
use crate::error::{Error, Result};
use crate::grid::{forward_fft, inverse_fft, GridSpec, SampledField};
use crate::scalar::{cis, Complex};

pub use analysis::{
    decay_trace_analysis, remainder_fit, scattering_extract, CauchyRow, DecayFit, RemainderFit, RemainderRow,
    ScatterReport, TARGET_REMAINDER_SLOPE,
};
pub use ground::{ground_state_diagnostics, ground_state_field, threshold_diagnostics, GroundStateDiagnostics, ThresholdReport};
pub use scaling::{dilate, scaling_check};
pub use waveop::{wave_operator_refinement, wave_operator_solve, WaveOperatorConfig, WaveOperatorSolution};

/// Spectral filter applied after every nonlinear evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    /// Keeps `|ξ_i| <= Nyquist/3` per axis.
    Padded2xFilter,
    /// Keeps `|ξ_i| <= 2·Nyquist/3` per axis.
    CutoffThird,
}

impl Dealias {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "padded2x_filter" => Ok(Dealias::Padded2xFilter),
            "cutoff_third" => Ok(Dealias::CutoffThird),
            other => Err(Error::Config(format!("unknown dealias mode '{other}' (padded2x_filter, cutoff_third)"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dealias::Padded2xFilter => "padded2x_filter",
            Dealias::CutoffThird => "cutoff_third",
        }
    }

    fn fraction(self) -> f64 {
        match self {
            Dealias::Padded2xFilter => 1.0 / 3.0,
            Dealias::CutoffThird => 2.0 / 3.0,
        }
    }

    /// 0/1 mask over FFT-ordered coefficients.
    pub fn mask(self, grid: &GridSpec<f64>) -> Vec<f64> {
        let keep = self.fraction() * grid.nyquist() * (1.0 + 1e-12);
        (0..grid.len())
            .map(|i| {
                let xi = grid.frequency(i);
                if xi[..grid.dim()].iter().all(|v| v.abs() <= keep) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Named initial-data families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Zero,
    /// `ε e^{-a|x|²}`.
    Gaussian { amplitude: f64, a: f64 },
    /// Seeded sum of Gaussian wave packets scaled to `sup|u₀| = amplitude`.
    Packets { amplitude: f64, count: usize, spread: f64, width: f64, k_max: f64 },
    Snapshot { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// `+1` defocusing, `-1` focusing, `0` switches the nonlinearity off.
    pub mu: f64,
    pub grid: GridSpec<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: Dealias,
    pub initial: InitialData,
    pub seed: u64,
    /// Steps between trace rows.
    pub sample_every: usize,
    /// Focusing runs must opt in.
    pub allow_focusing: bool,
}

impl SolverConfig {
    pub fn new(grid: GridSpec<f64>, initial: InitialData) -> Self {
        SolverConfig {
            mu: 1.0,
            grid,
            dt: 0.05,
            t_final: 1.0,
            dealias: Dealias::Padded2xFilter,
            initial,
            seed: 0,
            sample_every: 1,
            allow_focusing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![-1.0, 0.0, 1.0].contains(&self.mu) {
            return Err(Error::Config(format!("mu must be -1, 0 or +1, got {}", self.mu)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!("T must be non-negative, got {}", self.t_final)));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        if self.mu < 0.0 && !self.allow_focusing {
            return Err(Error::Config("focusing runs (mu = -1) need allow_focusing = true".into()));
        }
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `T`.
    pub fn step_count(&self) -> usize {
        let k = self.t_final / self.dt;
        let r = k.round();
        if (k - r).abs() < 1e-9 * k.max(1.0) {
            r as usize
        } else {
            k.ceil() as usize
        }
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        SolverConfig { mu, ..self.clone() }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        SolverConfig { dt, ..self.clone() }
    }
}

impl InitialData {
    /// Samples the datum on `grid`; packet positions are drawn from `seed`.
    pub fn sample(&self, grid: GridSpec<f64>, seed: u64) -> Result<SampledField<f64>> {
        let raw = match self {
            InitialData::Zero => SampledField::zeros(grid),
            InitialData::Gaussian { amplitude, a } => {
                if !(*a > 0.0) {
                    return Err(Error::Config(format!("Gaussian needs a > 0, got {a}")));
                }
                SampledField::from_real_fn(grid, |x| amplitude * (-a * x.iter().map(|v| v * v).sum::<f64>()).exp())
            }
            InitialData::Packets { amplitude, count, spread, width, k_max } => {
                let mut rng = ensemble::member_rng(seed, 0);
                let field = PacketField::random(grid.dim(), &mut rng, *count, *spread, *width, *k_max, false).sample(grid, 1.0, false);
                let peak = field.max_abs();
                if peak > 0.0 {
                    field.scale_real(amplitude / peak)
                } else {
                    field
                }
            }
            InitialData::Snapshot { path } => {
                let f = crate::grid::io::load(path)?;
                f.grid().same_as(&grid)?;
                f
            }
        };
        if let Some(i) = raw.values().iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(raw)
    }
}

/// Samples the configured initial datum and passes it through the dealiasing filter.
pub fn initial_field(cfg: &SolverConfig) -> Result<SampledField<f64>> {
    Ok(filtered(&cfg.initial.sample(cfg.grid, cfg.seed)?, cfg.dealias))
}

pub fn filtered(f: &SampledField<f64>, dealias: Dealias) -> SampledField<f64> {
    let mask = dealias.mask(f.grid());
    let mut c = f.dft();
    for (v, m) in c.iter_mut().zip(&mask) {
        *v *= m;
    }
    SampledField::from_dft(*f.grid(), c)
}

/// `‖u‖₂²`.
pub fn mass(u: &SampledField<f64>) -> f64 {
    u.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * u.grid().cell_volume()
}

/// `‖∇u‖₂²` by Plancherel.
pub fn gradient_energy(u: &SampledField<f64>) -> f64 {
    let grid = u.grid();
    let c = u.dft();
    let s: f64 = grid.frequency_magnitudes().iter().zip(&c).map(|(r, v)| r * r * v.norm_sqr()).sum();
    s * grid.cell_volume() / grid.len() as f64
}

/// `E(u) = ∫ ½|∇u|² + (μ/6)|u|⁶`.
pub fn energy(u: &SampledField<f64>, mu: f64) -> f64 {
    let six: f64 = u.values().iter().map(|v| v.norm_sqr().powi(3)).sum::<f64>() * u.grid().cell_volume();
    0.5 * gradient_energy(u) + mu / 6.0 * six
}

fn lr_power(u: &SampledField<f64>, r: f64) -> f64 {
    u.values().iter().map(|v| v.norm().powf(r)).sum::<f64>() * u.grid().cell_volume()
}

/// Running `L^q_t L^r_x` norm accumulated by the trapezoid rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzAccumulator {
    pub q: f64,
    pub r: f64,
    sum: f64,
    last: Option<f64>,
}

impl StrichartzAccumulator {
    /// The pair with `2/q = d(1/2 - 1/r)`; `r = 2` gives `q = ∞`.
    pub fn admissible(dim: usize, r: f64) -> Self {
        let gap = dim as f64 * (0.5 - 1.0 / r);
        let q = if gap <= 0.0 { f64::INFINITY } else { 2.0 / gap };
        StrichartzAccumulator { q, r, sum: 0.0, last: None }
    }

    fn push(&mut self, u: &SampledField<f64>, dt: f64) {
        let lr = lr_power(u, self.r).powf(1.0 / self.r);
        if self.q.is_infinite() {
            self.sum = self.sum.max(lr);
        } else {
            let cur = lr.powf(self.q);
            if let Some(prev) = self.last {
                self.sum += 0.5 * dt * (prev + cur);
            }
            self.last = Some(cur);
        }
    }

    pub fn value(&self) -> f64 {
        if self.q.is_infinite() {
            self.sum
        } else {
            self.sum.powf(1.0 / self.q)
        }
    }
}

/// One row of a decay trace; field names are the CSV header.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub sup_abs_u: f64,
    pub weighted_sup: f64,
    pub mass: f64,
    pub energy: f64,
    pub guard_mass: f64,
    pub l10_accum: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub rows: Vec<TraceRow>,
}

impl DecayTrace {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row).map_err(|e| Error::Io(e.into()))?;
        }
        Ok(out.flush()?)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        // `#` lines carry the run header written by the command-line tool
        let mut input = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let rows = input
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRow>, _>>()
            .map_err(|e| Error::Config(format!("bad trace CSV: {e}")))?;
        let trace = DecayTrace { rows };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.rows.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::Config(format!("trace times not increasing at t = {}", w[1].t)));
            }
        }
        Ok(())
    }

    /// Largest relative drift of mass and energy against the first row.
    pub fn drifts(&self) -> (f64, f64) {
        let Some(first) = self.rows.first() else { return (0.0, 0.0) };
        let rel = |a: f64, b: f64| if b == 0.0 { (a - b).abs() } else { ((a - b) / b).abs() };
        self.rows.iter().fold((0.0f64, 0.0f64), |(m, e), r| {
            (m.max(rel(r.mass, first.mass)), e.max(rel(r.energy, first.energy)))
        })
    }
}

#[derive(Clone, Debug)]
pub struct SimulationState {
    pub t: f64,
    pub u: SampledField<f64>,
    pub steps: usize,
    pub l10: StrichartzAccumulator,
    pub strichartz: Vec<StrichartzAccumulator>,
    /// Mass removed by the dealiasing filter so far.
    pub filter_loss: f64,
}

impl SimulationState {
    fn new(u: SampledField<f64>) -> Self {
        let dim = u.grid().dim();
        let mut l10 = StrichartzAccumulator { q: 10.0, r: 10.0, sum: 0.0, last: None };
        let mut strichartz: Vec<_> = [2.0, 30.0 / 13.0, 6.0]
            .iter()
            .map(|&r| StrichartzAccumulator::admissible(dim, r))
            .collect();
        l10.push(&u, 0.0);
        for s in &mut strichartz {
            s.push(&u, 0.0);
        }
        SimulationState { t: 0.0, u, steps: 0, l10, strichartz, filter_loss: 0.0 }
    }

    fn row(&self, mu: f64) -> TraceRow {
        let sup = self.u.max_abs();
        TraceRow {
            t: self.t,
            sup_abs_u: sup,
            weighted_sup: self.t.powf(self.u.grid().dim() as f64 / 2.0) * sup,
            mass: mass(&self.u),
            energy: energy(&self.u, mu),
            guard_mass: self.u.guard_mass(),
            l10_accum: self.l10.value(),
        }
    }
}

/// Strang splitting: half kick, filter, free flight, half kick, filter.
pub struct Stepper {
    grid: GridSpec<f64>,
    mu: f64,
    mask: Vec<f64>,
    flights: Vec<(f64, Vec<Complex<f64>>)>,
}

impl Stepper {
    pub fn new(grid: GridSpec<f64>, mu: f64, dealias: Dealias) -> Self {
        Stepper { grid, mu, mask: dealias.mask(&grid), flights: Vec::new() }
    }

    fn flight(&mut self, dt: f64) -> usize {
        if let Some(i) = self.flights.iter().position(|(tau, _)| *tau == dt) {
            return i;
        }
        let phase = self
            .grid
            .frequency_magnitudes()
            .iter()
            .zip(&self.mask)
            .map(|(r, m)| if self.mu == 0.0 { cis(-dt * r * r) } else { cis(-dt * r * r) * m })
            .collect();
        self.flights.push((dt, phase));
        self.flights.len() - 1
    }

    fn kick(&self, u: &mut [Complex<f64>], dt: f64) {
        if self.mu == 0.0 {
            return;
        }
        for v in u.iter_mut() {
            let a = v.norm_sqr();
            *v *= cis(-self.mu * a * a * dt);
        }
    }

    fn filter(&self, u: &mut [Complex<f64>]) {
        let (n, d) = (self.grid.n(), self.grid.dim());
        forward_fft(u, n, d);
        for (v, m) in u.iter_mut().zip(&self.mask) {
            *v *= m;
        }
        inverse_fft(u, n, d);
    }

    /// Advances `u` by `dt` in place.
    pub fn step(&mut self, u: &mut [Complex<f64>], dt: f64) {
        if dt == 0.0 {
            return;
        }
        let (n, d) = (self.grid.n(), self.grid.dim());
        let fi = self.flight(dt);
        self.kick(u, dt / 2.0);
        forward_fft(u, n, d);
        for (v, p) in u.iter_mut().zip(&self.flights[fi].1) {
            *v *= p;
        }
        inverse_fft(u, n, d);
        if self.mu != 0.0 {
            self.kick(u, dt / 2.0);
            self.filter(u);
        }
    }
}

/// A run in progress.
pub struct Simulation {
    cfg: SolverConfig,
    stepper: Stepper,
    state: SimulationState,
    last_good: Vec<Complex<f64>>,
}

impl Simulation {
    pub fn new(cfg: &SolverConfig, u0: SampledField<f64>) -> Result<Self> {
        cfg.validate()?;
        u0.grid().same_as(&cfg.grid)?;
        Ok(Simulation {
            stepper: Stepper::new(cfg.grid, cfg.mu, cfg.dealias),
            last_good: u0.values().to_vec(),
            state: SimulationState::new(u0),
            cfg: cfg.clone(),
        })
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn into_state(self) -> SimulationState {
        self.state
    }

    pub fn row(&self) -> TraceRow {
        self.state.row(self.cfg.mu)
    }

    /// One step of size `dt`; non-finite values give a blow-up error carrying the last good field.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let before = if self.cfg.mu != 0.0 { mass(&self.state.u) } else { 0.0 };
        self.last_good.copy_from_slice(self.state.u.values());
        self.stepper.step(self.state.u.values_mut(), dt);
        if self.state.u.values().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::BlowUp {
                t: self.state.t + dt,
                steps: self.state.steps,
                last_good: Box::new(SampledField::from_raw(self.cfg.grid, self.last_good.clone())),
            });
        }
        if self.cfg.mu != 0.0 {
            self.state.filter_loss += (before - mass(&self.state.u)).max(0.0);
        }
        self.state.t += dt;
        self.state.steps += 1;
        self.state.l10.push(&self.state.u, dt);
        for s in &mut self.state.strichartz {
            s.push(&self.state.u, dt);
        }
        Ok(())
    }

    /// Runs to `T`, calling `observe` at `t = 0`, every `sample_every` steps and at `T`.
    pub fn run(mut self, mut observe: impl FnMut(&SimulationState, TraceRow)) -> Result<SimulationState> {
        let steps = self.cfg.step_count();
        observe(&self.state, self.row());
        for k in 1..=steps {
            let dt = if k == steps { self.cfg.t_final - self.cfg.dt * (steps - 1) as f64 } else { self.cfg.dt };
            self.step(dt)?;
            self.state.t = if k == steps { self.cfg.t_final } else { k as f64 * self.cfg.dt };
            if k % self.cfg.sample_every == 0 || k == steps {
                observe(&self.state, self.row());
            }
        }
        Ok(self.state)
    }
}

/// Runs the configured problem to `T`.
pub fn simulate(cfg: &SolverConfig) -> Result<(SimulationState, DecayTrace)> {
    simulate_from(cfg, initial_field(cfg)?)
}

pub fn simulate_from(cfg: &SolverConfig, u0: SampledField<f64>) -> Result<(SimulationState, DecayTrace)> {
    let mut trace = DecayTrace::default();
    let state = Simulation::new(cfg, u0)?.run(|_, row| trace.rows.push(row))?;
    Ok((state, trace))
}

/// `(t, u(t))` pairs in increasing time order.
pub type Samples = Vec<(f64, SampledField<f64>)>;

/// Like [`simulate_from`] but also keeps the field at every trace row.
pub fn simulate_sampled(
    cfg: &SolverConfig,
    u0: SampledField<f64>,
) -> Result<(SimulationState, DecayTrace, Samples)> {
    let mut trace = DecayTrace::default();
    let mut samples = Vec::new();
    let state = Simulation::new(cfg, u0)?.run(|s, row| {
        trace.rows.push(row);
        samples.push((s.t, s.u.clone()));
    })?;
    Ok((state, trace, samples))
}

/// `‖u_dt(T) - u_ref(T)‖₂` for `dt` and `dt/2` against a reference with
/// `dt/ref_factor`; returns `(err(dt), err(dt/2), ratio)`.
pub fn richardson_ratio(cfg: &SolverConfig, u0: &SampledField<f64>, ref_factor: usize) -> Result<(f64, f64, f64)> {
    let run = |dt: f64| -> Result<SampledField<f64>> { Ok(simulate_from(&cfg.with_dt(dt), u0.clone())?.0.u) };
    let (coarse, (fine, reference)) = rayon::join(
        || run(cfg.dt),
        || rayon::join(|| run(cfg.dt / 2.0), || run(cfg.dt / ref_factor as f64)),
    );
    let reference = reference?;
    let e1 = mass(&coarse?.sub(&reference)?).sqrt();
    let e2 = mass(&fine?.sub(&reference)?).sqrt();
    Ok((e1, e2, if e2 > 0.0 { e1 / e2 } else { f64::INFINITY }))
}

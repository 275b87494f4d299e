use serde::{Deserialize, Serialize};

use crate::ensemble::{self, PacketField};
use crate::error::{Error, Result};
use crate::grid::{lp_of_magnitudes, GridSpec, NormKind, SampledField, Spectrum};
use crate::lp::{
    fractional_multiplier, function_space_norm, function_space_norm_of, project_spectrum, DyadicLadder,
    Fractional, Projection, SpaceSpec,
};
use crate::maximal::MaximalOperator;
use crate::report::{safe_ratio, RatioReport};
use crate::scalar::Complex;

fn lp(f: &SampledField<f64>, p: f64) -> f64 {
    let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    lp_of_magnitudes(f.grid(), &mags, p)
}

fn conjugate_ok(p: f64, q: f64) -> bool {
    p > 1.0 && q > 1.0 && p < f64::INFINITY && q < f64::INFINITY && (1.0 / p + 1.0 / q - 1.0).abs() < 1e-12
}

/// Exponents of the Hardy-space Leibniz rule: `1/p_i + 1/q_i = 1`, all in `(1, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibnizExponents {
    pub s: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl LeibnizExponents {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0) {
            return Err(Error::Config(format!("need s > 0, got {}", self.s)));
        }
        if !conjugate_ok(self.p1, self.q1) || !conjugate_ok(self.p2, self.q2) {
            return Err(Error::Config(format!(
                "need 1/p_i + 1/q_i = 1 with p_i, q_i in (1, inf); got ({}, {}), ({}, {})",
                self.p1, self.q1, self.p2, self.q2
            )));
        }
        Ok(())
    }
}

/// Left and right sides of one Leibniz-type evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Sides {
    /// `0/0 = 0`; a vanishing right side under a nonzero left side is `None`.
    pub fn ratio(&self) -> Option<f64> {
        safe_ratio(self.lhs, self.rhs).or(if self.lhs <= 1e-12 { Some(0.0) } else { None })
    }
}

fn leibniz_rhs(f: &SampledField<f64>, g: &SampledField<f64>, s: f64, p1: f64, q1: f64, p2: f64, q2: f64) -> f64 {
    let dsf = fractional_multiplier(f, Fractional::D(s));
    let dsg = fractional_multiplier(g, Fractional::D(s));
    lp(&dsf, p1) * lp(g, q1) + lp(f, p2) * lp(&dsg, q2)
}

/// `‖D^s(fg)‖_{Ḟ⁰_{1,2}}` against `‖D^s f‖_{p1}‖g‖_{q1} + ‖f‖_{p2}‖D^s g‖_{q2}`.
pub fn leibniz_sides(
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    ex: &LeibnizExponents,
    ladder: &DyadicLadder<f64>,
) -> Result<Sides> {
    ex.validate()?;
    let dfg = fractional_multiplier(&f.mul(g)?, Fractional::D(ex.s));
    let lhs = function_space_norm(&dfg, &SpaceSpec::hardy(), ladder)?;
    Ok(Sides { lhs, rhs: leibniz_rhs(f, g, ex.s, ex.p1, ex.q1, ex.p2, ex.q2) })
}

fn single_report(check: &str, grid: &GridSpec<f64>, sides: Sides) -> RatioReport {
    let mut report = RatioReport::new(check, grid.describe());
    match sides.ratio() {
        Some(r) => report = report.with_ratios(&[r]),
        None => report.fail(format!("right side vanishes while left side is {:.3e}", sides.lhs)),
    }
    report.diag("lhs", sides.lhs);
    report.diag("rhs", sides.rhs);
    report
}

pub fn leibniz_ratio(
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    ex: &LeibnizExponents,
    ladder: &DyadicLadder<f64>,
) -> Result<RatioReport> {
    Ok(single_report("leibniz", f.grid(), leibniz_sides(f, g, ex, ladder)?))
}

/// Exponents of the classical rule: `1/r = 1/p_i + 1/q_i`, `1 < p_i, q_i <= ∞`,
/// `1/(1+s) < r <= ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalExponents {
    pub s: f64,
    pub r: f64,
    pub p1: f64,
    pub q1: f64,
    pub p2: f64,
    pub q2: f64,
}

impl ClassicalExponents {
    pub fn validate(&self) -> Result<()> {
        let inv = |v: f64| if v == f64::INFINITY { 0.0 } else { 1.0 / v };
        let pairs_ok = [(self.p1, self.q1), (self.p2, self.q2)]
            .iter()
            .all(|(p, q)| *p > 1.0 && *q > 1.0 && (inv(*p) + inv(*q) - inv(self.r)).abs() < 1e-12);
        if !(self.s > 0.0) || !pairs_ok || !(self.r > 1.0 / (1.0 + self.s)) {
            return Err(Error::Config(format!(
                "need s > 0, 1/r = 1/p_i + 1/q_i with p_i, q_i > 1, and r > 1/(1+s); got {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn classical_leibniz_sides(f: &SampledField<f64>, g: &SampledField<f64>, ex: &ClassicalExponents) -> Result<Sides> {
    ex.validate()?;
    let dfg = fractional_multiplier(&f.mul(g)?, Fractional::D(ex.s));
    Ok(Sides { lhs: lp(&dfg, ex.r), rhs: leibniz_rhs(f, g, ex.s, ex.p1, ex.q1, ex.p2, ex.q2) })
}

pub fn classical_leibniz_ratio(f: &SampledField<f64>, g: &SampledField<f64>, ex: &ClassicalExponents) -> Result<RatioReport> {
    Ok(single_report("classical_leibniz", f.grid(), classical_leibniz_sides(f, g, ex)?))
}

/// Exponents of the chain rule for `F(u) = |u|^p`: `s ∈ (0,1)`, `1 = (p-1)/t + 1/q`.
/// For `p = 1` the relation forces `q = 1` and `t` is unused.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainExponents {
    pub p: f64,
    pub s: f64,
    pub t: f64,
    pub q: f64,
}

impl ChainExponents {
    /// Solves the exponent relation for `t` given `q`.
    pub fn with_q(p: f64, s: f64, q: f64) -> Self {
        let t = if p == 1.0 { f64::INFINITY } else { (p - 1.0) / (1.0 - 1.0 / q) };
        ChainExponents { p, s, t, q }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) || !(self.p >= 1.0) {
            return Err(Error::Config(format!("need s in (0, 1) and p >= 1; got {self:?}")));
        }
        let tail = if self.p == 1.0 { 0.0 } else { (self.p - 1.0) / self.t };
        if (tail + 1.0 / self.q - 1.0).abs() > 1e-12 || !(self.q >= 1.0) {
            return Err(Error::Config(format!("need 1 = (p-1)/t + 1/q; got {self:?}")));
        }
        Ok(())
    }

    /// `r = max(2/3, 1/(1 + s/(2d)))`, so that `d(1/r - 1) < s`.
    pub fn pointwise_r(&self, dim: usize) -> f64 {
        (2.0f64 / 3.0).max(1.0 / (1.0 + self.s / (2.0 * dim as f64)))
    }
}

fn power_nonlinearity(u: &SampledField<f64>, p: f64) -> SampledField<f64> {
    u.map(|v| Complex::new(v.norm().powf(p), 0.0))
}

/// `‖D^s |u|^p‖_{F⁰_{1,2}}` against `‖u‖_t^{p-1} ‖D^s u‖_q`.
pub fn chain_sides(u: &SampledField<f64>, ex: &ChainExponents, ladder: &DyadicLadder<f64>) -> Result<Sides> {
    ex.validate()?;
    let dfu = fractional_multiplier(&power_nonlinearity(u, ex.p), Fractional::D(ex.s));
    let lhs = function_space_norm(&dfu, &SpaceSpec::local_hardy(), ladder)?;
    let lead = if ex.p == 1.0 { 1.0 } else { lp(u, ex.t).powf(ex.p - 1.0) };
    let rhs = lead * lp(&fractional_multiplier(u, Fractional::D(ex.s)), ex.q);
    Ok(Sides { lhs, rhs })
}

/// Largest ratio of `|Ṗ_j F(u)(x)|` to the right side of the pointwise bound
///
/// `Σ_k min(2^k, 1) [ A·M(Ṗ_{j+k}u) + 2^{kd(1/r-1)} (M|A·M(Ṗ_{j+k}u)|^r)^{1/r} ]`,
/// `A = M(|Mu|^{p-1})`, over every lattice point (every `stride`-th in 2D/3D) and band.
pub fn chain_pointwise_ratio(u: &SampledField<f64>, ex: &ChainExponents, ladder: &DyadicLadder<f64>) -> Result<f64> {
    ex.validate()?;
    let grid = *u.grid();
    let maximal = MaximalOperator::dyadic(grid);
    let r = ex.pointwise_r(grid.dim());
    let d = grid.dim() as f64;
    let mu: Vec<f64> = maximal.apply(u)?.values().iter().map(|v| v.re.powf(ex.p - 1.0)).collect();
    let a = maximal.apply_magnitudes(&mu);
    let su = Spectrum::of(u);
    let sf = Spectrum::of(&power_nonlinearity(u, ex.p));
    let bands: Vec<i32> = ladder.homogeneous_bands().collect();
    let mut s_b = Vec::with_capacity(bands.len());
    let mut t_b = Vec::with_capacity(bands.len());
    for &b in &bands {
        let pb = project_spectrum(&su, Projection::HomogBand(b), ladder);
        let s: Vec<f64> = maximal.apply(&pb)?.values().iter().zip(&a).map(|(m, a)| a * m.re).collect();
        let powered: Vec<f64> = s.iter().map(|v| v.powf(r)).collect();
        let t: Vec<f64> = maximal.apply_magnitudes(&powered).iter().map(|v| v.powf(1.0 / r)).collect();
        s_b.push(s);
        t_b.push(t);
    }
    let stride = if grid.dim() == 1 { 1 } else { 7 };
    let mut worst = 0.0f64;
    for &j in &bands {
        let lhs = project_spectrum(&sf, Projection::HomogBand(j), ladder);
        for x in (0..grid.len()).step_by(stride) {
            let mut rhs = 0.0;
            for (bi, &b) in bands.iter().enumerate() {
                let k = (b - j) as f64;
                rhs += 2f64.powf(k).min(1.0) * (s_b[bi][x] + 2f64.powf(k * d * (1.0 / r - 1.0)) * t_b[bi][x]);
            }
            if let Some(q) = safe_ratio(lhs.values()[x].norm(), rhs) {
                worst = worst.max(q);
            }
        }
    }
    Ok(worst)
}

pub fn chain_ratio(u: &SampledField<f64>, ex: &ChainExponents, ladder: &DyadicLadder<f64>) -> Result<RatioReport> {
    let mut report = single_report("chain", u.grid(), chain_sides(u, ex, ladder)?);
    report.diag("pointwise_max_ratio", chain_pointwise_ratio(u, ex, ladder)?);
    report.diag("pointwise_r", ex.pointwise_r(u.grid().dim()));
    Ok(report)
}

/// Quintic estimate on a 3D lattice: returns `(ratio, low-frequency ratio)` where
/// `ratio = ‖|u|⁴u‖_{F³_{1,2}} / (‖u‖_∞³ ‖J³u‖₂ ‖u‖₂)` and the low-frequency ratio
/// is `‖P_{<=0}(|u|⁴u)‖₁ / (‖u‖_∞³ ‖u‖₂²)`.
pub fn quintic_sides(u: &SampledField<f64>, ladder: &DyadicLadder<f64>) -> Result<(Sides, Sides)> {
    if u.grid().dim() != 3 {
        return Err(Error::Precondition(format!("the quintic estimate is posed in 3D, got d = {}", u.grid().dim())));
    }
    let n = u.map(|v| v * v.norm_sqr() * v.norm_sqr());
    let spec = Spectrum::of(&n);
    let lhs = function_space_norm_of(&spec, &SpaceSpec::triebel(false, 3.0, 1.0, 2.0), ladder);
    let sup3 = u.max_abs().powi(3);
    let l2 = u.norm(NormKind::Lp(2.0));
    let j3 = fractional_multiplier(u, Fractional::J(3.0)).norm(NormKind::Lp(2.0));
    let low = project_spectrum(&spec, Projection::LowPass(0), ladder).norm(NormKind::Lp(1.0));
    Ok((Sides { lhs, rhs: sup3 * j3 * l2 }, Sides { lhs: low, rhs: sup3 * l2 * l2 }))
}

pub fn quintic_hardy_ratio(u: &SampledField<f64>, ladder: &DyadicLadder<f64>) -> Result<RatioReport> {
    let (main, low) = quintic_sides(u, ladder)?;
    let mut report = single_report("quintic", u.grid(), main);
    report.diag("lowfreq_ratio", low.ratio().unwrap_or(f64::INFINITY));
    Ok(report)
}

/// Random-packet ensemble shared by the Leibniz and chain-rule sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketEnsemble {
    pub seed: u64,
    pub samples: usize,
    pub dim: usize,
    pub n: usize,
    pub half_width: f64,
    pub packets: usize,
    /// Centres lie in `|c_i| <= spread`.
    pub spread: f64,
    /// Smallest envelope width.
    pub width: f64,
    /// Largest carrier frequency.
    pub k_max: f64,
    pub dilations: Vec<f64>,
}

impl PacketEnsemble {
    fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.dim, self.n, self.half_width)
    }

    fn draw(&self, rng: &mut rand_chacha::ChaCha8Rng, real: bool) -> PacketField {
        PacketField::random(self.dim, rng, self.packets, self.spread, self.width, self.k_max, real)
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.dilations.is_empty() || self.dilations.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Config("ensemble needs samples >= 1 and positive dilations".into()));
        }
        Ok(())
    }
}

/// Runs `eval` on every member at every dilation and assembles the sweep report.
fn sweep(
    check: &str,
    ens: &PacketEnsemble,
    eval: impl Fn(&mut rand_chacha::ChaCha8Rng, GridSpec<f64>, &DyadicLadder<f64>, f64) -> Result<Vec<Sides>> + Sync,
) -> Result<RatioReport> {
    ens.validate()?;
    let grid = ens.grid()?;
    let ladder = DyadicLadder::for_grid(&grid);
    let dilations = ens.dilations.clone();
    let members: Vec<Result<Vec<Vec<Sides>>>> = ensemble::run(ens.seed, ens.samples, |_, rng| {
        let state = rng.clone();
        dilations
            .iter()
            .map(|&lambda| {
                let mut r = state.clone();
                eval(&mut r, grid, &ladder, lambda)
            })
            .collect()
    });
    let mut report = RatioReport::new(check, grid.describe()).with_seed(ens.seed);
    let mut all = Vec::new();
    let mut violations = 0usize;
    let mut per_sample_change = 1.0f64;
    let mut per_scale: Vec<Vec<f64>> = vec![Vec::new(); dilations.len()];
    for member in members {
        let member = member?;
        let mut sample_ratios = Vec::new();
        for (li, sides) in member.iter().enumerate() {
            for s in sides {
                match s.ratio() {
                    Some(r) => {
                        per_scale[li].push(r);
                        all.push(r);
                        sample_ratios.push(r);
                    }
                    None => violations += 1,
                }
            }
        }
        let lo = sample_ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sample_ratios.iter().copied().fold(0.0, f64::max);
        if lo > 0.0 && lo.is_finite() {
            per_sample_change = per_sample_change.max(hi / lo);
        }
    }
    let mut report_with = report.clone().with_ratios(&all);
    report_with.sample_count = ens.samples;
    report = report_with;
    for (li, lambda) in dilations.iter().enumerate() {
        report.push_scale(*lambda, &per_scale[li]);
    }
    report.apply_growth_protocol();
    report.diag("max_sample_dilation_change", per_sample_change);
    if violations > 0 {
        report.fail(format!("{violations} evaluations with vanishing right side and nonzero left side"));
    }
    Ok(report)
}

/// Hardy-space Leibniz rule over a packet ensemble and a dilation sweep.
pub fn leibniz_ensemble(ens: &PacketEnsemble, ex: &LeibnizExponents) -> Result<RatioReport> {
    ex.validate()?;
    let mut report = sweep("leibniz", ens, |rng, grid, ladder, lambda| {
        let f = ens.draw(rng, false).sample(grid, lambda, false);
        let g = ens.draw(rng, false).sample(grid, lambda, false);
        Ok(vec![leibniz_sides(&f, &g, ex, ladder)?])
    })?;
    report.diag("s", ex.s);
    Ok(report)
}

pub fn classical_leibniz_ensemble(ens: &PacketEnsemble, ex: &ClassicalExponents) -> Result<RatioReport> {
    ex.validate()?;
    sweep("classical_leibniz", ens, |rng, grid, _, lambda| {
        let f = ens.draw(rng, false).sample(grid, lambda, false);
        let g = ens.draw(rng, false).sample(grid, lambda, false);
        Ok(vec![classical_leibniz_sides(&f, &g, ex)?])
    })
}

/// Chain rule over a packet ensemble for each exponent set; one sweep row per dilation.
pub fn chain_ensemble(ens: &PacketEnsemble, exps: &[ChainExponents]) -> Result<RatioReport> {
    for ex in exps {
        ex.validate()?;
    }
    let mut report = sweep("chain", ens, |rng, grid, ladder, lambda| {
        let u = ens.draw(rng, false).sample(grid, lambda, false);
        exps.iter().map(|ex| chain_sides(&u, ex, ladder)).collect()
    })?;
    // pointwise diagnostic on the first member at unit scale
    let grid = ens.grid()?;
    let ladder = DyadicLadder::for_grid(&grid);
    let u = ens.draw(&mut ensemble::member_rng(ens.seed, 0), false).sample(grid, 1.0, false);
    for ex in exps {
        let key = format!("pointwise_max_ratio_p{}_s{}", ex.p, ex.s);
        report.diag(&key, chain_pointwise_ratio(&u, ex, &ladder)?);
    }
    Ok(report)
}

/// Quintic estimate over a seeded 3D packet ensemble.
pub fn quintic_ensemble(ens: &PacketEnsemble) -> Result<RatioReport> {
    ens.validate()?;
    let grid = ens.grid()?;
    let ladder = DyadicLadder::for_grid(&grid);
    let results: Vec<Result<(Sides, Sides)>> = ensemble::run(ens.seed, ens.samples, |_, rng| {
        quintic_sides(&ens.draw(rng, false).sample(grid, 1.0, false), &ladder)
    });
    let (mut ratios, mut low) = (Vec::new(), 0.0f64);
    let mut report = RatioReport::new("quintic", grid.describe()).with_seed(ens.seed);
    for r in results {
        let (main, lf) = r?;
        match main.ratio() {
            Some(v) => ratios.push(v),
            None => report.fail("right side vanishes under a nonzero left side"),
        }
        low = low.max(lf.ratio().unwrap_or(f64::INFINITY));
    }
    let verdict = report.verdict;
    let notes = report.notes.clone();
    let mut report = report.with_ratios(&ratios);
    report.verdict = verdict;
    report.notes = notes;
    report.diag("lowfreq_max_ratio", low);
    Ok(report)
}

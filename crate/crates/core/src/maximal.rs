//! Discrete Hardy–Littlewood maximal operator and the convolution-maximal
//! estimates built on it.
//!
//! `Mf(x)` is the maximum over a radius set of averages of `|f|` over the open
//! lattice balls `{y : |y| < r}` (minimum-image distance). With the default
//! dyadic radii `dx·2^m` the smallest ball is the centre alone, so `Mf >= |f|`
//! holds exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField};
use crate::lp::eta;
use crate::report::{fit_slope, safe_ratio, RatioReport};
use crate::scalar::{czero, Complex, Real};

/// Ball-average kernels for a fixed radius set, transformed once and reused.
#[derive(Clone, Debug)]
pub struct MaximalOperator<T> {
    grid: GridSpec<T>,
    radii: Vec<T>,
    /// DFT of the normalized ball indicator; `None` when the ball is a single point.
    kernels: Vec<Option<Vec<Complex<T>>>>,
}

/// `dx·2^m` for `m = 0, 1, …` up to `2L`.
pub fn dyadic_radii<T: Real>(grid: &GridSpec<T>) -> Vec<T> {
    let steps = grid.n().trailing_zeros() as i32;
    (0..=steps).map(|m| grid.dx() * T::pow2(m)).collect()
}

impl<T: Real> MaximalOperator<T> {
    pub fn new(grid: GridSpec<T>, radii: Vec<T>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::Config("maximal operator needs at least one radius".into()));
        }
        if radii.iter().any(|r| !(*r > T::zero())) || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("radii must be positive and strictly increasing".into()));
        }
        let dx = grid.dx();
        let offsets: Vec<i64> = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim())
                    .map(|a| {
                        let m = grid.freq_index(idx[a]) as i64;
                        m * m
                    })
                    .sum()
            })
            .collect();
        let kernels = radii
            .iter()
            .map(|r| {
                let rho = (*r / dx).as_f64();
                let rho2 = rho * rho;
                let inside: Vec<bool> = offsets.iter().map(|&s| (s as f64) < rho2).collect();
                let count = inside.iter().filter(|b| **b).count();
                if count <= 1 {
                    return None;
                }
                let w = T::of_usize(count).recip();
                let data: Vec<Complex<T>> = inside
                    .iter()
                    .map(|b| if *b { Complex::new(w, T::zero()) } else { czero() })
                    .collect();
                let mut k = data;
                crate::grid::forward_fft(&mut k, grid.n(), grid.dim());
                Some(k)
            })
            .collect();
        Ok(MaximalOperator { grid, radii, kernels })
    }

    pub fn dyadic(grid: GridSpec<T>) -> Self {
        let radii = dyadic_radii(&grid);
        Self::new(grid, radii).expect("dyadic radii are valid")
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    /// Average of `mags` over the ball with radius index `i`.
    pub fn ball_average(&self, mags: &[T], i: usize) -> Vec<T> {
        match &self.kernels[i] {
            None => mags.to_vec(),
            Some(k) => {
                let f = SampledField::from_raw(
                    self.grid,
                    mags.iter().map(|m| Complex::new(*m, T::zero())).collect(),
                );
                let mut c = f.dft();
                for (a, b) in c.iter_mut().zip(k) {
                    *a = *a * *b;
                }
                SampledField::from_dft(self.grid, c)
                    .into_values()
                    .into_iter()
                    .map(|v| v.re.max(T::zero()))
                    .collect()
            }
        }
    }

    /// `M` applied to nonnegative samples.
    pub fn apply_magnitudes(&self, mags: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); mags.len()];
        for i in 0..self.radii.len() {
            for (o, a) in out.iter_mut().zip(self.ball_average(mags, i)) {
                *o = o.max(a);
            }
        }
        out
    }

    /// `Mf`, returned as a real field.
    pub fn apply(&self, f: &SampledField<T>) -> Result<SampledField<T>> {
        f.grid().same_as(&self.grid)?;
        let mags: Vec<T> = f.values().iter().map(|v| v.norm()).collect();
        Ok(real_field(self.grid, &self.apply_magnitudes(&mags)))
    }

    /// `(M|f|^r)^{1/r}`.
    pub fn apply_power(&self, f: &SampledField<T>, r: f64) -> Vec<T> {
        let rt = T::of(r);
        let mags: Vec<T> = f.values().iter().map(|v| v.norm().powf(rt)).collect();
        self.apply_magnitudes(&mags).into_iter().map(|v| v.powf(rt.recip())).collect()
    }
}

fn real_field<T: Real>(grid: GridSpec<T>, v: &[T]) -> SampledField<T> {
    SampledField::from_raw(grid, v.iter().map(|x| Complex::new(*x, T::zero())).collect())
}

pub fn maximal_function<T: Real>(f: &SampledField<T>, radii: Vec<T>) -> Result<SampledField<T>> {
    MaximalOperator::new(*f.grid(), radii)?.apply(f)
}

/// Ratio statistics over lattice points; zero denominators with nonzero
/// numerators are counted as skipped.
fn pointwise_ratios<T: Real>(num: &[T], den: &[T]) -> (Vec<f64>, usize) {
    let mut out = Vec::with_capacity(num.len());
    let mut skipped = 0;
    for (a, b) in num.iter().zip(den) {
        match safe_ratio(a.as_f64(), b.as_f64()) {
            Some(r) => out.push(r),
            None => skipped += 1,
        }
    }
    (out, skipped)
}

/// `ψ_ε(x) = ε^{-d} ψ(x/ε)` for `ε = 2^{-m}`, sampled exactly from the lattice
/// values of `ψ` (points mapping outside the box get 0).
pub fn dilate_kernel<T: Real>(psi: &SampledField<T>, eps: f64) -> Result<SampledField<T>> {
    let m = (-eps.log2()).round();
    if !(m >= 0.0) || (2f64.powf(-m) - eps).abs() > 1e-12 * eps {
        return Err(Error::Precondition(format!("kernel dilation needs eps = 2^-m with m >= 0, got {eps}")));
    }
    let step = 1usize << (m as u32);
    let grid = *psi.grid();
    let n = grid.n() as isize;
    let c = n / 2;
    let scale = T::of(eps).powi(-(grid.dim() as i32));
    let values = (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let mut src = [0usize; 3];
            for a in 0..grid.dim() {
                let j = c + step as isize * (idx[a] as isize - c);
                if j < 0 || j >= n {
                    return czero();
                }
                src[a] = j as usize;
            }
            psi.values()[grid.flat_index(&src)] * scale
        })
        .collect();
    Ok(SampledField::from_raw(grid, values))
}

/// `max_{x, ε} |ψ_ε * f(x)| / (‖g‖₁ Mf(x))` for a radial majorant `|ψ| <= g`.
pub fn radial_majorant_check(
    psi: &SampledField<f64>,
    g: impl Fn(f64) -> f64,
    f: &SampledField<f64>,
    eps_list: &[f64],
) -> Result<RatioReport> {
    let grid = *f.grid();
    grid.same_as(psi.grid())?;
    let mut g_l1 = 0.0;
    for (i, v) in psi.values().iter().enumerate() {
        let x = grid.position(i);
        let gv = g((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt());
        if v.norm() > gv * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "|psi| exceeds the majorant at x = {:?}: {} > {gv}",
                &x[..grid.dim()],
                v.norm()
            )));
        }
        g_l1 += gv;
    }
    g_l1 *= grid.cell_volume();

    let maximal = MaximalOperator::dyadic(grid);
    let mf = maximal.apply(f)?;
    let den: Vec<f64> = mf.values().iter().map(|v| v.re * g_l1).collect();
    let mut report = RatioReport::new("radial_majorant", grid.describe());
    let mut all = Vec::new();
    for &eps in eps_list {
        let conv = f.convolve_centered(&dilate_kernel(psi, eps)?)?;
        let num: Vec<f64> = conv.values().iter().map(|v| v.norm()).collect();
        let (ratios, skipped) = pointwise_ratios(&num, &den);
        report.skipped += skipped;
        report.push_scale(eps, &ratios);
        all.extend(ratios);
    }
    report.diag("majorant_l1", g_l1);
    let skipped = report.skipped;
    let mut report = report.with_ratios(&all);
    report.skipped = skipped;
    Ok(report)
}

/// `‖(Σ_j (M f_j)^q)^{1/q}‖_p / ‖(Σ_j |f_j|^q)^{1/q}‖_p`.
pub fn vector_maximal_check(family: &[SampledField<f64>], p: f64, q: f64) -> Result<RatioReport> {
    let first = family.first().ok_or_else(|| Error::Precondition("empty family".into()))?;
    let both_inf = p == f64::INFINITY && q == f64::INFINITY;
    if !both_inf && !(p > 1.0 && p < f64::INFINITY && q > 1.0) {
        let why = if p == 1.0 { " (the inequality fails for p = 1)" } else { "" };
        return Err(Error::Config(format!(
            "vector maximal inequality needs 1 < p < inf and 1 < q <= inf, or p = q = inf; got p = {p}, q = {q}{why}"
        )));
    }
    let grid = *first.grid();
    let maximal = MaximalOperator::dyadic(grid);
    let mut lhs = vec![0.0; grid.len()];
    let mut rhs = vec![0.0; grid.len()];
    let add = |acc: &mut [f64], v: &[f64]| {
        for (a, x) in acc.iter_mut().zip(v) {
            if q == f64::INFINITY {
                *a = a.max(*x);
            } else {
                *a += x.powf(q);
            }
        }
    };
    for f in family {
        grid.same_as(f.grid())?;
        let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
        add(&mut lhs, &maximal.apply_magnitudes(&mags));
        add(&mut rhs, &mags);
    }
    let finish = |acc: Vec<f64>| {
        let v: Vec<f64> = if q == f64::INFINITY { acc } else { acc.iter().map(|a| a.powf(1.0 / q)).collect() };
        crate::grid::lp_of_magnitudes(&grid, &v, p)
    };
    let (l, r) = (finish(lhs), finish(rhs));
    let mut report = RatioReport::new("vector_maximal", grid.describe());
    let ratio = safe_ratio(l, r).unwrap_or(f64::INFINITY);
    report = report.with_ratios(&[ratio]);
    report.sample_count = family.len();
    report.diag("lhs", l);
    report.diag("rhs", r);
    Ok(report)
}

/// `max_x [sup_y |f(x-y)| / (1+R|y|)^{d/r}] / (M|f|^r(x))^{1/r}` after projecting
/// `f` onto `B(R)`. The supremum over `y` is exhaustive over the lattice.
pub fn peetre_check(f: &SampledField<f64>, big_r: f64, r: f64) -> Result<RatioReport> {
    if !(r > 0.0) || !(big_r > 0.0) {
        return Err(Error::Config(format!("need R > 0 and r > 0, got R = {big_r}, r = {r}")));
    }
    let grid = *f.grid();
    let f = crate::grid::Spectrum::of(f).radial(|xi| eta(1.1 * xi / big_r));
    let d = grid.dim() as f64;
    let weights: Vec<f64> = (0..grid.len())
        .map(|off| {
            let y = grid.displacement(off);
            let ry = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
            (1.0 + big_r * ry).powf(-d / r)
        })
        .collect();
    let mags: Vec<f64> = f.values().iter().map(|v| v.norm()).collect();
    let n = grid.n();
    let num: Vec<f64> = {
        use rayon::prelude::*;
        (0..grid.len())
            .into_par_iter()
            .map(|x| {
                let xi = grid.multi_index(x);
                let mut best = 0.0f64;
                for (off, w) in weights.iter().enumerate() {
                    let oi = grid.multi_index(off);
                    let mut src = [0usize; 3];
                    for a in 0..grid.dim() {
                        src[a] = (xi[a] + n - oi[a]) % n;
                    }
                    best = best.max(mags[grid.flat_index(&src)] * w);
                }
                best
            })
            .collect()
    };
    let den = MaximalOperator::dyadic(grid).apply_power(&f, r);
    let (ratios, skipped) = pointwise_ratios(&num, &den);
    let mut report = RatioReport::new("peetre", grid.describe()).with_ratios(&ratios);
    report.skipped = skipped;
    report.diag("R", big_r);
    report.diag("r", r);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalCheckConfig {
    pub r: f64,
    pub j: i32,
    pub k: i32,
    /// The lemma's `L`: admissible pairs satisfy `j > k - L`.
    pub l_offset: i32,
    /// Constant in the weighted-majorant hypothesis.
    pub a_const: f64,
    /// Band-limit constant `c` in `supp f̂ ⊂ B(c 2^j)`.
    pub band_const: f64,
    pub seed: u64,
    pub samples: usize,
}

impl Default for MaximalCheckConfig {
    fn default() -> Self {
        MaximalCheckConfig { r: 2.0 / 3.0, j: 0, k: 0, l_offset: 4, a_const: 10.0, band_const: 1.1, seed: 0, samples: 1 }
    }
}

impl MaximalCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::Config(format!("r must lie in (0, 1], got {}", self.r)));
        }
        if self.j <= self.k - self.l_offset {
            return Err(Error::Config(format!(
                "need j > k - L (j = {}, k = {}, L = {})",
                self.j, self.k, self.l_offset
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        Ok(())
    }

    fn exponent(&self, dim: usize) -> f64 {
        (1.0 / self.r - 1.0) * dim as f64
    }
}

/// Per-point quantities of the key lemma for one `(ψ_k, f)` pair.
struct KeyLemmaEval {
    /// `|ψ_k * f| / (M|f|^r)^{1/r}`, before the `2^{(j-k)(1/r-1)d}` normalization.
    raw: Vec<f64>,
    skipped: usize,
    hypothesis_ratio: f64,
}

fn key_lemma_eval(
    psi_k: &SampledField<f64>,
    f: &SampledField<f64>,
    cfg: &MaximalCheckConfig,
    maximal: &MaximalOperator<f64>,
) -> Result<KeyLemmaEval> {
    cfg.validate()?;
    let grid = *f.grid();
    grid.same_as(psi_k.grid())?;
    let limit = cfg.band_const * 2f64.powi(cfg.j);
    let outside = crate::grid::Spectrum::of(f).energy_fraction_beyond(limit * (1.0 + 1e-12));
    if outside > 1e-24 {
        return Err(Error::Precondition(format!(
            "f is not band-limited to B({limit}): energy fraction {outside:.3e} outside"
        )));
    }
    let expo = cfg.exponent(grid.dim());
    let scale = 2f64.powi(cfg.k);
    let weighted = psi_k.grid().len();
    let w: Vec<Complex<f64>> = (0..weighted)
        .map(|i| {
            let x = grid.position(i);
            let ry = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            Complex::new(psi_k.values()[i].norm() * (1.0 + scale * ry).powf(expo), 0.0)
        })
        .collect();
    let w = SampledField::new(grid, w)?;
    let abs_f = f.abs();
    let lhs = abs_f.convolve_centered(&w)?;
    let mf = maximal.apply(f)?;
    let mut hypothesis_ratio = 0.0f64;
    let mut worst = 0usize;
    for (i, (a, m)) in lhs.values().iter().zip(mf.values()).enumerate() {
        let bound = cfg.a_const * m.re;
        let excess = if bound > 0.0 { a.re / bound } else if a.re > 1e-300 { f64::INFINITY } else { 0.0 };
        if excess > hypothesis_ratio {
            hypothesis_ratio = excess;
            worst = i;
        }
    }
    if hypothesis_ratio > 1.0 + 1e-9 {
        return Err(Error::Precondition(format!(
            "weighted majorant hypothesis fails at x = {:?}: (w*|f|)/(A Mf) = {hypothesis_ratio:.4} with A = {}",
            &grid.position(worst)[..grid.dim()],
            cfg.a_const
        )));
    }
    let conv = f.convolve_centered(psi_k)?;
    let num: Vec<f64> = conv.values().iter().map(|v| v.norm()).collect();
    let den = maximal.apply_power(f, cfg.r);
    let (raw, skipped) = pointwise_ratios(&num, &den);
    Ok(KeyLemmaEval { raw, skipped, hypothesis_ratio })
}

/// `max_x |ψ_k * f(x)| / [2^{(j-k)(1/r-1)d} (M|f|^r(x))^{1/r}]`.
pub fn key_lemma_check(
    psi_k: &SampledField<f64>,
    f: &SampledField<f64>,
    cfg: &MaximalCheckConfig,
) -> Result<RatioReport> {
    let grid = *f.grid();
    let maximal = MaximalOperator::dyadic(grid);
    let eval = key_lemma_eval(psi_k, f, cfg, &maximal)?;
    let norm = 2f64.powf((cfg.j - cfg.k) as f64 * cfg.exponent(grid.dim()));
    let ratios: Vec<f64> = eval.raw.iter().map(|v| v / norm).collect();
    let mut report = RatioReport::new("key_lemma", grid.describe()).with_ratios(&ratios);
    report.skipped = eval.skipped;
    report.diag("hypothesis_ratio", eval.hypothesis_ratio);
    report.diag("band_const", cfg.band_const);
    report.diag("r", cfg.r);
    Ok(report)
}

/// Regression over `j` for fixed `k`: fits the slope of
/// `log₂ max_x |ψ_k*f_j| / (M|f_j|^r)^{1/r}` against `j - k`.
pub fn key_lemma_regression(
    psi_k: &SampledField<f64>,
    members: &[(i32, SampledField<f64>)],
    cfg: &MaximalCheckConfig,
) -> Result<RatioReport> {
    let first = members.first().ok_or_else(|| Error::Precondition("no regression members".into()))?;
    let grid = *first.1.grid();
    let maximal = MaximalOperator::dyadic(grid);
    let expo = cfg.exponent(grid.dim());
    let mut report = RatioReport::new("key_lemma_regression", grid.describe());
    let (mut xs, mut ys, mut all) = (Vec::new(), Vec::new(), Vec::new());
    let mut hyp = 0.0f64;
    for (j, f) in members {
        let c = MaximalCheckConfig { j: *j, ..cfg.clone() };
        let eval = key_lemma_eval(psi_k, f, &c, &maximal)?;
        hyp = hyp.max(eval.hypothesis_ratio);
        let peak = eval.raw.iter().copied().fold(0.0, f64::max);
        let gap = (*j - cfg.k) as f64;
        report.push_scale(gap, &eval.raw);
        report.skipped += eval.skipped;
        if peak > 0.0 {
            xs.push(gap);
            ys.push(peak.log2());
        }
        let norm = 2f64.powf(gap * expo);
        all.extend(eval.raw.iter().map(|v| v / norm));
    }
    let skipped = report.skipped;
    let mut report = report.with_ratios(&all);
    report.skipped = skipped;
    report.sample_count = members.len();
    report.diag("hypothesis_ratio", hyp);
    report.diag("expected_slope", expo);
    match fit_slope(&xs, &ys) {
        Some(s) => report.exponent("slope", s),
        None => report.note("fewer than two nonzero members; slope undefined"),
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{bandlimited_field, member_rng};

    fn brute_force_maximal(f: &SampledField<f64>, radii: &[f64], x: usize) -> f64 {
        let g = f.grid();
        let px = g.multi_index(x);
        let mut best = 0.0f64;
        for &r in radii {
            let (mut sum, mut count) = (0.0, 0usize);
            for y in 0..g.len() {
                let py = g.multi_index(y);
                let mut d2 = 0.0;
                for a in 0..g.dim() {
                    let mut m = (py[a] as isize - px[a] as isize).rem_euclid(g.n() as isize);
                    if m >= g.n() as isize / 2 {
                        m -= g.n() as isize;
                    }
                    d2 += (m as f64 * g.dx()).powi(2);
                }
                if d2.sqrt() < r - 1e-12 {
                    sum += f.values()[y].norm();
                    count += 1;
                }
            }
            best = best.max(sum / count as f64);
        }
        best
    }

    #[test]
    fn matches_brute_force_at_sampled_points() {
        let grid = GridSpec::<f64>::new(2, 16, 2.0).unwrap();
        let f = bandlimited_field(grid, &mut member_rng(3, 0), 4.0, false, false);
        let radii = dyadic_radii(&grid);
        let mf = maximal_function(&f, radii.clone()).unwrap();
        for x in (0..grid.len()).step_by(25).take(10) {
            let want = brute_force_maximal(&f, &radii, x);
            assert!((mf.values()[x].re - want).abs() < 1e-12, "{} vs {want}", mf.values()[x].re);
        }
    }

    #[test]
    fn constants_and_ball_indicator() {
        let grid = GridSpec::<f64>::new(2, 32, 4.0).unwrap();
        let c = SampledField::constant(grid, Complex::new(0.0, -3.0));
        let mc = MaximalOperator::dyadic(grid).apply(&c).unwrap();
        assert!(mc.values().iter().all(|v| (v.re - 3.0).abs() < 1e-12));

        let ball = SampledField::from_real_fn(grid, |x| if x[0].hypot(x[1]) < 1.0 { 1.0 } else { 0.0 });
        let mb = MaximalOperator::dyadic(grid).apply(&ball).unwrap();
        let centre = grid.flat_index(&[16, 16]);
        assert!((mb.values()[centre].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_radii() {
        let grid = GridSpec::<f64>::new(1, 16, 1.0).unwrap();
        assert!(MaximalOperator::new(grid, vec![]).is_err());
        assert!(MaximalOperator::new(grid, vec![0.5, 0.25]).is_err());
    }

    #[test]
    fn kernel_dilation_is_exact_resampling() {
        let grid = GridSpec::<f64>::new(1, 64, 8.0).unwrap();
        let psi = SampledField::from_real_fn(grid, |x| (-x[0] * x[0]).exp());
        let half = dilate_kernel(&psi, 0.5).unwrap();
        for i in 0..grid.len() {
            let x = grid.coord(i);
            let want = if (2.0 * x).abs() < 8.0 { 2.0 * (-4.0 * x * x).exp() } else { 0.0 };
            assert!((half.values()[i].re - want).abs() < 1e-14);
        }
        assert!(dilate_kernel(&psi, 0.3).is_err());
        assert!(dilate_kernel(&psi, 2.0).is_err());
    }

    #[test]
    fn majorant_trivial_cases() {
        let grid = GridSpec::<f64>::new(1, 128, 16.0).unwrap();
        let g = |r: f64| (-r * r).exp();
        let f = SampledField::from_real_fn(grid, |x| if x[0].abs() < 2.0 { 1.0 } else { 0.0 });
        let zero = radial_majorant_check(&SampledField::zeros(grid), g, &f, &[1.0]).unwrap();
        assert_eq!(zero.max_ratio, 0.0);

        let psi = SampledField::from_real_fn(grid, |x| g(x[0].abs()));
        let c = SampledField::constant(grid, Complex::new(2.0, 0.0));
        let rep = radial_majorant_check(&psi, g, &c, &[1.0]).unwrap();
        let integral = psi.integral().norm();
        assert!((rep.max_ratio - integral / rep.diagnostics["majorant_l1"]).abs() < 1e-12);
        assert!(rep.max_ratio <= 1.0 + 1e-12);

        let too_big = psi.scale_real(1.5);
        assert!(matches!(radial_majorant_check(&too_big, g, &f, &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn vector_maximal_rules() {
        let grid = GridSpec::<f64>::new(1, 64, 8.0).unwrap();
        let f = bandlimited_field(grid, &mut member_rng(5, 0), 3.0, false, false);
        assert!(vector_maximal_check(std::slice::from_ref(&f), 1.0, 2.0).is_err());
        assert!(vector_maximal_check(&[], 2.0, 2.0).is_err());
        let inf = vector_maximal_check(std::slice::from_ref(&f), f64::INFINITY, f64::INFINITY).unwrap();
        assert!(inf.max_ratio <= 1.0 + 1e-12);
        let two = vector_maximal_check(&[f], 2.0, 2.0).unwrap();
        assert!(two.max_ratio >= 1.0 && two.max_ratio.is_finite());
    }

    #[test]
    fn peetre_trivial_cases() {
        let grid = GridSpec::<f64>::new(1, 64, std::f64::consts::PI).unwrap();
        let zero = peetre_check(&SampledField::zeros(grid), 4.0, 0.5).unwrap();
        assert_eq!(zero.max_ratio, 0.0);
        let mode = SampledField::plane_wave(grid, &[2], Complex::new(0.7, 0.0));
        let rep = peetre_check(&mode, 4.0, 0.5).unwrap();
        assert!(rep.median_ratio >= 1.0 - 1e-12 && rep.max_ratio.is_finite());
    }
}

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, SampledField, Spectrum};
use crate::lp::{chi, project_spectrum, DyadicLadder, Projection};
use crate::report::{fit_slope, safe_ratio, RatioReport};
use crate::scalar::{floor_log2, Complex, Real};

type Symbol = Arc<dyn Fn(&[f64], &[f64]) -> Complex<f64> + Send + Sync>;

/// Frequency-interaction pieces of a bilinear symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interaction {
    /// `j >= k + 5` in `χ_j(ξ₁) χ_k(ξ₂)`.
    HighLow,
    /// `k >= j + 5`.
    LowHigh,
    /// `|j - k| <= 4`.
    HighHigh,
}

impl Interaction {
    fn contains(self, j: i32, k: i32) -> bool {
        match self {
            Interaction::HighLow => j >= k + 5,
            Interaction::LowHigh => k >= j + 5,
            Interaction::HighHigh => (j - k).abs() <= 4,
        }
    }
}

/// A bilinear Fourier symbol `m(ξ₁, ξ₂)` with its claimed cancellation exponent.
#[derive(Clone)]
pub struct BilinearSymbol {
    name: String,
    symbol: Symbol,
    pub gamma: f64,
}

impl fmt::Debug for BilinearSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BilinearSymbol").field("name", &self.name).field("gamma", &self.gamma).finish()
    }
}

fn magnitude(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Bands `j` with `χ(ξ/2^j) != 0` (at most two).
fn active_bands(r: f64) -> impl Iterator<Item = i32> {
    let k = if r > 0.0 { floor_log2(r) } else { 0 };
    (k..=k + 1).filter(move |&j| r > 0.0 && chi(r / f64::pow2(j)) != 0.0)
}


impl BilinearSymbol {
    pub fn new(
        name: impl Into<String>,
        gamma: f64,
        symbol: impl Fn(&[f64], &[f64]) -> Complex<f64> + Send + Sync + 'static,
    ) -> Self {
        BilinearSymbol { name: name.into(), symbol: Arc::new(symbol), gamma }
    }

    /// `m ≡ 1`: the plain product, no cancellation.
    pub fn product() -> Self {
        Self::new("product", 0.0, |_, _| Complex::new(1.0, 0.0))
    }

    /// `m = |ξ₁ + ξ₂| / (|ξ₁| + |ξ₂|)`, vanishing to first order at zero output frequency.
    pub fn output_vanishing() -> Self {
        Self::new("output_vanishing", 1.0, |a, b| {
            let sum = a.iter().zip(b).map(|(x, y)| (x + y) * (x + y)).sum::<f64>().sqrt();
            let den = magnitude(a) + magnitude(b);
            Complex::new(if den > 0.0 { sum / den } else { 0.0 }, 0.0)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, xi1: &[f64], xi2: &[f64]) -> Complex<f64> {
        (self.symbol)(xi1, xi2)
    }

    /// `m · Σ_{(j,k) ∈ window} χ_j(ξ₁) χ_k(ξ₂)`.
    pub fn part(&self, which: Interaction, xi1: &[f64], xi2: &[f64]) -> Complex<f64> {
        let (r1, r2) = (magnitude(xi1), magnitude(xi2));
        let mut w = 0.0;
        for j in active_bands(r1) {
            for k in active_bands(r2) {
                if which.contains(j, k) {
                    w += chi(r1 / f64::pow2(j)) * chi(r2 / f64::pow2(k));
                }
            }
        }
        self.eval(xi1, xi2) * w
    }
}

/// Output spectrum of `B_m(f, g)` by direct summation over pairs of nonzero input
/// coefficients whose frequency sum stays on the lattice without wrapping. With
/// `out_radius` only outputs with `|ξ₁ + ξ₂| <= out_radius` are formed, which keeps
/// the pair count proportional to the overlap of the two spectra. Returned as DFT
/// coefficients.
fn bilinear_coeffs(
    m: &BilinearSymbol,
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    out_radius: Option<f64>,
) -> Vec<Complex<f64>> {
    let grid: GridSpec<f64> = *f.grid();
    let n = grid.n() as isize;
    let dim = grid.dim();
    let (df, dg) = (f.dft(), g.dft());
    let peak = |c: &[Complex<f64>]| c.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    let (tf, tg) = (1e-14 * peak(&df), 1e-14 * peak(&dg));
    let signed = |flat: usize| -> [isize; 3] {
        let idx = grid.multi_index(flat);
        let mut s = [0isize; 3];
        for a in 0..dim {
            s[a] = grid.freq_index(idx[a]);
        }
        s
    };
    let unsigned = |s: &[isize; 3]| -> Option<usize> {
        let mut idx = [0usize; 3];
        for a in 0..dim {
            if s[a] < -n / 2 || s[a] >= n / 2 {
                return None;
            }
            idx[a] = s[a].rem_euclid(n) as usize;
        }
        Some(grid.flat_index(&idx))
    };
    let mags = grid.frequency_magnitudes();
    let cg: Vec<usize> = (0..grid.len()).filter(|&b| dg[b].norm() > tg).collect();
    let mut cf: Vec<usize> = (0..grid.len()).filter(|&a| df[a].norm() > tf).collect();
    let mut out = vec![Complex::new(0.0, 0.0); grid.len()];
    let norm = 1.0 / grid.len() as f64;
    let mut add = |a: usize, b: usize, o: usize| {
        let (xa, xb) = (grid.frequency(a), grid.frequency(b));
        out[o] += m.eval(&xa[..dim], &xb[..dim]) * df[a] * dg[b] * norm;
    };
    match out_radius {
        None => {
            for &a in &cf {
                let sa = signed(a);
                for &b in &cg {
                    let sb = signed(b);
                    let mut so = [0isize; 3];
                    for ax in 0..dim {
                        so[ax] = sa[ax] + sb[ax];
                    }
                    if let Some(o) = unsigned(&so) {
                        add(a, b, o);
                    }
                }
            }
        }
        Some(radius) => {
            let (lo, hi) = cg.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &b| (l.min(mags[b]), h.max(mags[b])));
            cf.retain(|&a| mags[a] + radius >= lo && mags[a] <= hi + radius);
            let reach = (radius / grid.dxi()).floor() as isize;
            let side = 2 * reach + 1;
            let offsets: Vec<[isize; 3]> = (0..side.pow(dim as u32))
                .filter_map(|mut c| {
                    let mut so = [0isize; 3];
                    for s in so.iter_mut().take(dim) {
                        *s = c % side - reach;
                        c /= side;
                    }
                    let r2: isize = so.iter().map(|v| v * v).sum();
                    ((r2 as f64).sqrt() * grid.dxi() <= radius).then_some(so)
                })
                .collect();
            for &a in &cf {
                let sa = signed(a);
                for so in &offsets {
                    let mut sb = [0isize; 3];
                    for ax in 0..dim {
                        sb[ax] = so[ax] - sa[ax];
                    }
                    if let (Some(b), Some(o)) = (unsigned(&sb), unsigned(so)) {
                        if dg[b].norm() > tg {
                            add(a, b, o);
                        }
                    }
                }
            }
        }
    }
    out
}

/// `B_m(f, g)(x)`, with `B_1(f, g) = fg` for band-limited inputs.
pub fn bilinear_apply(m: &BilinearSymbol, f: &SampledField<f64>, g: &SampledField<f64>) -> Result<SampledField<f64>> {
    f.grid().same_as(g.grid())?;
    Ok(SampledField::from_dft(*f.grid(), bilinear_coeffs(m, f, g, None)))
}

fn validate_window(k: i32, j: i32, l: i32) -> Result<()> {
    if (j - l).abs() != 1 || k > j - 5 {
        return Err(Error::Config(format!(
            "high-high window needs j = l ± 1 and k <= j - 5 (k = {k}, j = {j}, l = {l})"
        )));
    }
    Ok(())
}

struct HhTerms {
    /// `‖Ṗ_k B_m(Ṗ_j f, Ṗ_l g)‖₁` per requested `k`.
    lhs: Vec<f64>,
    scale: f64,
}

fn hh_terms(
    m: &BilinearSymbol,
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    ks: &[i32],
    j: i32,
    l: i32,
    ladder: &DyadicLadder<f64>,
) -> Result<HhTerms> {
    for &k in ks {
        validate_window(k, j, l)?;
    }
    f.grid().same_as(g.grid())?;
    let fj = project_spectrum(&Spectrum::of(f), Projection::HomogBand(j), ladder);
    let gl = project_spectrum(&Spectrum::of(g), Projection::HomogBand(l), ladder);
    let scale = fj.norm(crate::grid::NormKind::Lp(2.0)) * gl.norm(crate::grid::NormKind::Lp(2.0));
    let top = ks.iter().copied().max().unwrap_or(j);
    let out = bilinear_coeffs(m, &fj, &gl, Some(1.1 * f64::pow2(top)));
    let grid = *f.grid();
    let mags = grid.frequency_magnitudes();
    let lhs = ks
        .iter()
        .map(|&k| {
            let band: Vec<Complex<f64>> =
                out.iter().zip(&mags).map(|(c, r)| c * chi(r / f64::pow2(k))).collect();
            SampledField::from_dft(grid, band).norm(crate::grid::NormKind::Lp(1.0))
        })
        .collect();
    Ok(HhTerms { lhs, scale })
}

/// `‖Ṗ_k B_m(Ṗ_j f, Ṗ_l g)‖₁ / (2^{(k-j)γ} ‖Ṗ_j f‖₂ ‖Ṗ_l g‖₂)` for one window.
pub fn hh_cancellation_check(
    m: &BilinearSymbol,
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    k: i32,
    j: i32,
    l: i32,
    ladder: &DyadicLadder<f64>,
) -> Result<RatioReport> {
    let terms = hh_terms(m, f, g, &[k], j, l, ladder)?;
    let bound = 2f64.powf((k - j) as f64 * m.gamma) * terms.scale;
    let mut report = RatioReport::new(format!("hh_cancellation:{}", m.name()), f.grid().describe());
    match safe_ratio(terms.lhs[0], bound) {
        Some(r) => report = report.with_ratios(&[r]),
        None => report.skipped = 1,
    }
    report.diag("lhs", terms.lhs[0]);
    report.diag("gamma", m.gamma);
    Ok(report)
}

/// Fits `γ` as the slope of `log₂(‖Ṗ_k B_m(Ṗ_j f, Ṗ_l g)‖₁ / (‖Ṗ_j f‖₂‖Ṗ_l g‖₂))`
/// against `k - j`.
pub fn hh_regression(
    m: &BilinearSymbol,
    f: &SampledField<f64>,
    g: &SampledField<f64>,
    ks: &[i32],
    j: i32,
    l: i32,
    ladder: &DyadicLadder<f64>,
) -> Result<RatioReport> {
    let terms = hh_terms(m, f, g, ks, j, l, ladder)?;
    let mut report = RatioReport::new(format!("hh_regression:{}", m.name()), f.grid().describe());
    let (mut xs, mut ys, mut ratios) = (Vec::new(), Vec::new(), Vec::new());
    for (&k, &lhs) in ks.iter().zip(&terms.lhs) {
        let gap = (k - j) as f64;
        if let Some(r) = safe_ratio(lhs, terms.scale) {
            report.push_scale(gap, &[r]);
            if r > 0.0 {
                xs.push(gap);
                ys.push(r.log2());
            }
            ratios.push(r / 2f64.powf(gap * m.gamma));
        } else {
            report.skipped += 1;
        }
    }
    let skipped = report.skipped;
    let mut report = report.with_ratios(&ratios);
    report.skipped = skipped;
    report.diag("claimed_gamma", m.gamma);
    match fit_slope(&xs, &ys) {
        Some(s) => report.exponent("gamma", s),
        None => report.note("fewer than two nonzero windows; gamma undefined"),
    }
    Ok(report)
}

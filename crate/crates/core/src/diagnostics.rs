//! Resolvent growth along the imaginary axis, semigroup decay, exponent
//! fits, the frequency/time duality check and stability classification.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_power_law, ExponentFit, MIN_FIT_POINTS};
use crate::linalg::{self, CMatrix};
use crate::operators::{Generator, SINGULARITY_THRESHOLD};

/// Distance from the imaginary axis below which an eigenvalue counts as
/// lying on it, and the abscissa above which a generator is unstable.
pub const AXIS_TOLERANCE: f64 = 1e-8;

/// Fitted resolvent exponents below this are read as a bounded resolvent.
pub const UNIFORM_EXPONENT_CUTOFF: f64 = 0.1;

/// Allowed `|alpha * |beta| - 1|` in the duality check.
pub const DUALITY_TOLERANCE: f64 = 0.25;

/// A sampled curve `x -> norm` with a CSV header name for `x`.
pub trait Profile {
    fn samples(&self) -> &[(f64, f64)];
    fn coordinate(&self) -> &'static str;

    /// `x,norm` rows with 17 significant digits.
    fn to_csv(&self) -> String {
        let mut out = format!("{},norm\n", self.coordinate());
        for &(x, y) in self.samples() {
            let _ = writeln!(out, "{x:.16e},{y:.16e}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventProfile {
    pub samples: Vec<(f64, f64)>,
    /// Grid frequencies where `i s` was numerically in the spectrum.
    pub resonant: Vec<f64>,
    pub generator_label: String,
}

impl Profile for ResolventProfile {
    fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
    fn coordinate(&self) -> &'static str {
        "s"
    }
}

impl ResolventProfile {
    /// Interior local maxima of the sampled curve.
    pub fn local_maxima(&self) -> ResolventProfile {
        let s = &self.samples;
        let samples = (1..s.len().saturating_sub(1))
            .filter(|&i| s[i].1 >= s[i - 1].1 && s[i].1 >= s[i + 1].1)
            .map(|i| s[i])
            .collect();
        ResolventProfile {
            samples,
            resonant: self.resonant.clone(),
            generator_label: self.generator_label.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub samples: Vec<(f64, f64)>,
    pub generator_label: String,
}

impl Profile for DecayProfile {
    fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }
    fn coordinate(&self) -> &'static str {
        "t"
    }
}

impl DecayProfile {
    /// Smallest nonincreasing majorant: `env(t_i) = max_{j >= i} norm(t_j)`.
    pub fn upper_envelope(&self) -> DecayProfile {
        let mut samples = self.samples.clone();
        let mut running = 0.0f64;
        for entry in samples.iter_mut().rev() {
            running = running.max(entry.1);
            entry.1 = running;
        }
        DecayProfile {
            samples,
            generator_label: self.generator_label.clone(),
        }
    }
}

/// Fits `log(norm)` against `log(1 + |x|)` over `window`.
pub fn fit_exponent<P: Profile + ?Sized>(profile: &P, window: (f64, f64)) -> Result<ExponentFit> {
    fit_power_law(profile.samples(), window)
}

fn resolvent_from_sigma(g: &Generator, s: f64, sigma: f64) -> Result<f64> {
    if !(sigma >= SINGULARITY_THRESHOLD * g.weighted_norm()) {
        return Err(Error::ResonantFrequency {
            s,
            sigma_min: sigma,
        });
    }
    Ok(1.0 / sigma)
}

/// `||(i s I - A)^{-1}||_H`, as the reciprocal smallest singular value of
/// `i s I - C A C^{-1}`.
pub fn resolvent_norm(g: &Generator, s: f64) -> Result<f64> {
    let sigma = linalg::sigma_min(&linalg::shifted(g.weighted(), s));
    resolvent_from_sigma(g, s, sigma)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Resolvent norms over a sorted grid. Resonant grid points are recorded
/// separately and left out of the samples.
pub fn sample_resolvent(g: &Generator, grid: &[f64]) -> Result<ResolventProfile> {
    check_grid(grid)?;
    let values: Vec<(f64, Result<f64>)> = grid
        .par_iter()
        .map(|&s| (s, resolvent_norm(g, s)))
        .collect();
    let mut samples = Vec::with_capacity(values.len());
    let mut resonant = Vec::new();
    for (s, v) in values {
        match v {
            Ok(r) if r.is_finite() => samples.push((s, r)),
            Ok(_) | Err(Error::ResonantFrequency { .. }) => resonant.push(s),
            Err(e) => return Err(e),
        }
    }
    Ok(ResolventProfile {
        samples,
        resonant,
        generator_label: g.label().to_string(),
    })
}

/// Maximizes `s -> ||R(is)||` on `[lo, hi]` by golden-section search.
fn refine_peak(g: &Generator, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |s: f64| resolvent_norm(g, s).unwrap_or(f64::INFINITY);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..100 {
        if (b - a) <= 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Upper envelope of the resolvent on `[lo, hi]`: the grid is augmented with
/// the imaginary parts of the spectrum, every interior local maximum is
/// refined by golden-section search, and the refined peaks are returned.
pub fn resolvent_peaks(
    g: &Generator,
    lo: f64,
    hi: f64,
    grid_points: usize,
) -> Result<ResolventProfile> {
    if !(lo < hi) || grid_points < 3 {
        return Err(Error::InvalidInput(format!(
            "bad peak search range [{lo}, {hi}]"
        )));
    }
    let mut grid: Vec<f64> = (0..grid_points)
        .map(|k| lo + (hi - lo) * k as f64 / (grid_points - 1) as f64)
        .collect();
    grid.extend(
        g.eigenvalues()
            .iter()
            .map(|z| z.im)
            .filter(|&s| s > lo && s < hi),
    );
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));

    let profile = sample_resolvent(g, &grid)?;
    let s = &profile.samples;
    let brackets: Vec<(f64, f64)> = (1..s.len().saturating_sub(1))
        .filter(|&i| s[i].1 >= s[i - 1].1 && s[i].1 > s[i + 1].1)
        .map(|i| (s[i - 1].0, s[i + 1].0))
        .collect();
    let mut peaks: Vec<(f64, f64)> = brackets
        .par_iter()
        .map(|&(a, b)| refine_peak(g, a, b))
        .collect();
    peaks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    peaks.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-9 * (1.0 + b.0.abs()));
    let resonant = peaks
        .iter()
        .filter(|p| !p.1.is_finite())
        .map(|p| p.0)
        .chain(profile.resonant.iter().cloned())
        .collect();
    peaks.retain(|p| p.1.is_finite());
    Ok(ResolventProfile {
        samples: peaks,
        resonant,
        generator_label: g.label().to_string(),
    })
}

/// `||e^{tA} A^{-1}||_H` with `e^{tA}` from scaling and squaring.
pub fn semigroup_decay_norm(g: &Generator, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    let inverse = g.weighted_inverse()?;
    let e = linalg::expm(&(g.weighted() * num_complex::Complex64::new(t, 0.0)))
        .ok_or(Error::UnstableGrowth { t })?;
    let norm = linalg::sigma_max(&(e * inverse));
    if norm.is_finite() {
        Ok(norm)
    } else {
        Err(Error::UnstableGrowth { t })
    }
}

/// `||e^{tA}||_H`.
pub fn semigroup_norm(g: &Generator, t: f64) -> Result<f64> {
    let e = semigroup_matrix(g, t)?;
    Ok(linalg::sigma_max(&e))
}

/// `C e^{tA} C^{-1}`.
pub fn semigroup_matrix(g: &Generator, t: f64) -> Result<CMatrix> {
    linalg::expm(&(g.weighted() * num_complex::Complex64::new(t, 0.0)))
        .ok_or(Error::UnstableGrowth { t })
}

pub fn sample_decay(g: &Generator, times: &[f64]) -> Result<DecayProfile> {
    check_grid(times)?;
    g.weighted_inverse()?;
    let samples = times
        .par_iter()
        .map(|&t| semigroup_decay_norm(g, t).map(|v| (t, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DecayProfile {
        samples,
        generator_label: g.label().to_string(),
    })
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Frequency band in which growth of the resolvent is read off.
///
/// Grid models carry their Nyquist frequency and use `[1, s_nyq / 4]`;
/// beyond that the discrete spectrum runs out and the norm saturates.
/// Other models use `[1, max(10, 1.25 max |Im lambda|)]`.
pub fn default_frequency_window(g: &Generator) -> (f64, f64) {
    if let Some(nyq) = g.metadata_f64("nyquist_frequency") {
        return (1.0, (nyq / 4.0).max(2.0));
    }
    let top = g
        .eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max);
    (1.0, (1.25 * top).max(10.0))
}

/// Samples used for frequency-side fitting: the refined peak envelope when
/// it has enough points, otherwise the raw profile (no interior maxima means
/// a monotone, typically bounded, resolvent).
pub fn frequency_envelope(g: &Generator, window: (f64, f64)) -> Result<ResolventProfile> {
    const GRID: usize = 400;
    let peaks = resolvent_peaks(g, window.0, window.1, GRID)?;
    if peaks.samples.len() >= MIN_FIT_POINTS {
        return Ok(peaks);
    }
    sample_resolvent(g, &linspace(window.0, window.1, GRID))
}

/// Resolvent-side fit over `window` on the peak envelope.
pub fn fit_resolvent_growth(g: &Generator, window: (f64, f64)) -> Result<ExponentFit> {
    let envelope = frequency_envelope(g, window)?;
    fit_exponent(&envelope, window)
}

/// Decay-side fit over `window` on the nonincreasing envelope of a
/// log-spaced decay profile.
pub fn fit_decay(g: &Generator, window: (f64, f64)) -> Result<ExponentFit> {
    if !(window.0 > 0.0 && window.0 < window.1) {
        return Err(Error::InvalidInput(format!("bad time window {window:?}")));
    }
    let profile = sample_decay(g, &logspace(window.0, window.1, 80))?;
    fit_exponent(&profile.upper_envelope(), window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Uniform,
    Polynomial,
}

/// Outcome of the resolvent/decay duality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub alpha_freq: f64,
    pub beta_time: f64,
    pub product: f64,
    pub tolerance: f64,
    pub regime: Regime,
    pub passed: bool,
    pub frequency_fit: ExponentFit,
    pub time_fit: ExponentFit,
    pub note: String,
}

/// Measures the resolvent exponent `alpha` on `freq_window` and the decay
/// exponent `beta` of `||S(t) A^{-1}||` on `time_window`; polynomial
/// stability of order `1/alpha` predicts `alpha * |beta| = 1`.
pub fn check_borichev_tomilov(
    g: &Generator,
    freq_window: (f64, f64),
    time_window: (f64, f64),
) -> Result<DualityReport> {
    if !(g.flags().dissipative || g.is_numerically_dissipative()) {
        return Err(Error::InvalidInput(
            "duality check needs a dissipative generator".into(),
        ));
    }
    g.weighted_inverse()?;
    let frequency_fit = fit_resolvent_growth(g, freq_window)?;
    let time_fit = fit_decay(g, time_window)?;
    let alpha = frequency_fit.exponent;
    let beta = time_fit.exponent;
    let product = alpha * beta.abs();
    let (regime, passed, note) = if alpha < UNIFORM_EXPONENT_CUTOFF {
        (
            Regime::Uniform,
            true,
            "uniform regime, equivalence vacuous: resolvent bounded on the window".to_string(),
        )
    } else {
        let ok = (product - 1.0).abs() <= DUALITY_TOLERANCE;
        (
            Regime::Polynomial,
            ok,
            format!("alpha*|beta| = {product:.4} (target 1 +/- {DUALITY_TOLERANCE})"),
        )
    };
    Ok(DualityReport {
        alpha_freq: alpha,
        beta_time: beta,
        product,
        tolerance: DUALITY_TOLERANCE,
        regime,
        passed,
        frequency_fit,
        time_fit,
        note,
    })
}

/// Time window matched to a frequency window: a mode with resolvent peak
/// `R` decays on the time scale `R`, and the decay envelope at time `t` is
/// dominated by the modes with `R ~ 2t`. Uses the peak envelope at the
/// window ends.
pub fn matched_time_window(g: &Generator, freq_window: (f64, f64)) -> Result<(f64, f64)> {
    let envelope = frequency_envelope(g, freq_window)?;
    let inside: Vec<f64> = envelope
        .samples
        .iter()
        .filter(|p| p.0 >= freq_window.0 && p.0 <= freq_window.1)
        .map(|p| p.1)
        .collect();
    let (first, last) = match (inside.first(), inside.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => {
            return Err(Error::InvalidInput(
                "resolvent envelope does not grow on the window".into(),
            ))
        }
    };
    Ok((0.5 * first, 0.5 * last))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Uniform,
    Polynomial,
    Conservative,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub classification: Classification,
    pub alpha_hat: Option<f64>,
    pub abscissa: f64,
    pub fit: Option<ExponentFit>,
    pub evidence: String,
}

/// Stability type from the spectrum and the resolvent growth on the default
/// frequency window.
pub fn classify_stability(g: &Generator) -> StabilityReport {
    classify_stability_on(g, default_frequency_window(g))
}

pub fn classify_stability_on(g: &Generator, window: (f64, f64)) -> StabilityReport {
    let abscissa = g.spectral_abscissa();
    if abscissa > AXIS_TOLERANCE {
        return StabilityReport {
            classification: Classification::Unstable,
            alpha_hat: None,
            abscissa,
            fit: None,
            evidence: format!("spectral abscissa {abscissa:e} > {AXIS_TOLERANCE:e}"),
        };
    }
    if let Some(z) = g
        .eigenvalues()
        .iter()
        .find(|z| z.re.abs() <= AXIS_TOLERANCE)
    {
        return StabilityReport {
            classification: Classification::Conservative,
            alpha_hat: None,
            abscissa,
            fit: None,
            evidence: format!("eigenvalue {z} within {AXIS_TOLERANCE:e} of the imaginary axis"),
        };
    }
    let fit = match fit_resolvent_growth(g, window) {
        Ok(f) => f,
        Err(e) => {
            return StabilityReport {
                classification: Classification::Uniform,
                alpha_hat: None,
                abscissa,
                fit: None,
                evidence: format!(
                    "resolvent fit unavailable on [{}, {}]: {e}",
                    window.0, window.1
                ),
            }
        }
    };
    let evidence = format!(
        "resolvent fit on s in [{}, {}]: exponent {:.4}, r^2 {:.4}",
        fit.window_lo, fit.window_hi, fit.exponent, fit.r_squared
    );
    if fit.exponent < UNIFORM_EXPONENT_CUTOFF {
        StabilityReport {
            classification: Classification::Uniform,
            alpha_hat: None,
            abscissa,
            fit: Some(fit),
            evidence,
        }
    } else {
        StabilityReport {
            classification: Classification::Polynomial,
            alpha_hat: Some(fit.exponent),
            abscissa,
            fit: Some(fit),
            evidence,
        }
    }
}

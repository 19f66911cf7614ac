//! Time-periodic solutions of `U' = AU + F` by temporal Fourier modes.
//!
//! A `T`-periodic forcing `F(t) = sum F_n e^{i n w t}` (`w = 2 pi / T`) is
//! answered mode by mode with `U_n = (i n w I - A)^{-1} F_n`. Whenever the
//! resolvent grows at most like `M_T (1 + |n|)^alpha` on the lattice
//! `{i n w}`, the map `F -> U` loses exactly `alpha` time derivatives in the
//! periodic Sobolev scale `||F||_m^2 = sum (1 + |n|)^{2m} ||F_n||_H^2`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::LU;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::operators::{Generator, SINGULARITY_THRESHOLD};
use nalgebra::Dyn;
use num_complex::Complex64;

/// Temporal Fourier coefficients keyed by mode index.
pub type ModeMap = BTreeMap<i64, CVector>;

/// Tolerance for `F_{-n} = conj(F_n)`.
pub const CONJUGATE_TOLERANCE: f64 = 1e-12;

/// Per-mode relative residual bound.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Default truncation for generated forcings.
pub const DEFAULT_N_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct FourierForcing {
    period: f64,
    coeffs: ModeMap,
    real_flag: bool,
}

fn mode_dim(coeffs: &ModeMap) -> Result<Option<usize>> {
    let mut dim = None;
    for v in coeffs.values() {
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: v.len(),
                })
            }
            _ => {}
        }
    }
    Ok(dim)
}

/// Whether `c_{-n} = conj(c_n)` for every stored mode.
pub fn is_conjugate_symmetric(coeffs: &ModeMap, tol: f64) -> bool {
    coeffs.iter().all(|(&n, v)| match coeffs.get(&-n) {
        Some(w) => {
            let scale = v.norm().max(w.norm()).max(f64::MIN_POSITIVE);
            (v - w.conjugate()).norm() <= tol * scale
        }
        None => v.norm() == 0.0,
    })
}

impl FourierForcing {
    /// Validates a forcing. `real_flag` asserts conjugate symmetry; it is
    /// checked, not trusted.
    pub fn new(period: f64, coeffs: ModeMap, real_flag: bool) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(Error::InvalidInput(format!(
                "period must be > 0, got {period}"
            )));
        }
        mode_dim(&coeffs)?;
        if real_flag && !is_conjugate_symmetric(&coeffs, CONJUGATE_TOLERANCE) {
            return Err(Error::InvalidInput(
                "forcing flagged real but F_{-n} != conj(F_n)".into(),
            ));
        }
        Ok(FourierForcing {
            period,
            coeffs,
            real_flag,
        })
    }

    /// Sets `real_flag` whenever the coefficients happen to be conjugate
    /// symmetric.
    pub fn detect(period: f64, coeffs: ModeMap) -> Result<Self> {
        let real = is_conjugate_symmetric(&coeffs, CONJUGATE_TOLERANCE);
        Self::new(period, coeffs, real)
    }

    pub fn zero(period: f64, dim: usize) -> Result<Self> {
        let mut coeffs = ModeMap::new();
        coeffs.insert(0, CVector::zeros(dim));
        Self::new(period, coeffs, true)
    }

    /// `F(t) = f e^{i n w t}`.
    pub fn single_mode(period: f64, n: i64, f: CVector) -> Result<Self> {
        let mut coeffs = ModeMap::new();
        coeffs.insert(n, f);
        Self::detect(period, coeffs)
    }

    /// `F(t) = f cos(n w t)`, i.e. `F_{+-n} = f / 2`.
    pub fn cosine(period: f64, n: i64, f: CVector) -> Result<Self> {
        let half = f * Complex64::new(0.5, 0.0);
        let mut coeffs = ModeMap::new();
        if n == 0 {
            coeffs.insert(0, half * Complex64::new(2.0, 0.0));
        } else {
            coeffs.insert(n, half.clone());
            coeffs.insert(-n, half.conjugate());
        }
        Self::detect(period, coeffs)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn coeffs(&self) -> &ModeMap {
        &self.coeffs
    }

    pub fn real_flag(&self) -> bool {
        self.real_flag
    }

    pub fn dim(&self) -> Option<usize> {
        self.coeffs.values().next().map(|v| v.len())
    }

    /// Largest `|n|` in the support (0 for an empty forcing).
    pub fn n_max(&self) -> usize {
        self.coeffs
            .keys()
            .map(|n| n.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// `F(t)`.
    pub fn evaluate(&self, t: f64) -> CVector {
        evaluate_modes(&self.coeffs, self.omega(), t)
    }

    /// Same forcing with coefficients outside `|n| <= n_max` dropped.
    pub fn truncated(&self, n_max: usize) -> FourierForcing {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(n, _)| n.unsigned_abs() as usize <= n_max)
            .map(|(&n, v)| (n, v.clone()))
            .collect();
        FourierForcing {
            period: self.period,
            coeffs,
            real_flag: self.real_flag,
        }
    }

    /// `a F + b G` on the union of supports.
    pub fn combine(
        &self,
        a: Complex64,
        other: &FourierForcing,
        b: Complex64,
    ) -> Result<FourierForcing> {
        if self.period != other.period {
            return Err(Error::InvalidInput(
                "forcings have different periods".into(),
            ));
        }
        let mut coeffs = ModeMap::new();
        for (&n, v) in &self.coeffs {
            coeffs.insert(n, v * a);
        }
        for (&n, v) in &other.coeffs {
            let entry = coeffs.entry(n).or_insert_with(|| CVector::zeros(v.len()));
            if entry.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: entry.len(),
                    got: v.len(),
                });
            }
            *entry += v * b;
        }
        Self::detect(self.period, coeffs)
    }
}

pub fn evaluate_modes(coeffs: &ModeMap, omega: f64, t: f64) -> CVector {
    let dim = coeffs.values().next().map_or(0, |v| v.len());
    let mut out = CVector::zeros(dim);
    for (&n, v) in coeffs {
        out += v * Complex64::from_polar(1.0, n as f64 * omega * t);
    }
    out
}

/// Energy-sphere sampling with one independent ChaCha stream per
/// `(trial, mode)`, so a longer truncation extends a shorter one.
fn unit_energy_direction(g: &Generator, seed: u64, trial: u64, n: u64, real: bool) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 32) | n);
    let dim = g.dim();
    let z = CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = if real {
            0.0
        } else {
            StandardNormal.sample(&mut rng)
        };
        Complex64::new(re, im)
    });
    let z = &z / Complex64::new(z.norm(), 0.0);
    g.from_energy_coords(&z)
}

/// Real random forcing `F_n = (1 + |n|)^{-decay} v_n`, `|n| <= n_max`, with
/// `v_n` uniform on the unit sphere of H.
pub fn random_forcing(
    g: &Generator,
    period: f64,
    n_max: usize,
    decay: f64,
    seed: u64,
) -> Result<FourierForcing> {
    random_forcing_trial(g, period, n_max, decay, seed, 0)
}

fn random_forcing_trial(
    g: &Generator,
    period: f64,
    n_max: usize,
    decay: f64,
    seed: u64,
    trial: u64,
) -> Result<FourierForcing> {
    let mut coeffs = ModeMap::new();
    for n in 0..=n_max as i64 {
        let weight = (1.0 + n as f64).powf(-decay);
        let v =
            unit_energy_direction(g, seed, trial, n as u64, n == 0) * Complex64::new(weight, 0.0);
        if n > 0 {
            coeffs.insert(-n, v.conjugate());
        }
        coeffs.insert(n, v);
    }
    FourierForcing::new(period, coeffs, true)
}

/// `sqrt(sum (1 + |n|)^{2m} ||c_n||_H^2)`; `m` may be fractional.
pub fn sobolev_norm(g: &Generator, coeffs: &ModeMap, m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "Sobolev index must be >= 0, got {m}"
        )));
    }
    let mut sum = 0.0;
    for (&n, v) in coeffs {
        let e = g.energy_norm(v)?;
        sum += (1.0 + n.unsigned_abs() as f64).powf(2.0 * m) * e * e;
    }
    Ok(sum.sqrt())
}

/// `(i n w I - A)`, factored once, with its H-resolvent norm.
struct ModeFactor {
    lu: LU<Complex64, Dyn, Dyn>,
    matrix: CMatrix,
    resolvent_norm: f64,
}

/// Factorizations of `i n w I - A` over a set of lattice points, shared by
/// every forcing solved against the same generator and period.
pub struct ModeSolver<'g> {
    g: &'g Generator,
    omega: f64,
    factors: BTreeMap<i64, ModeFactor>,
}

impl<'g> ModeSolver<'g> {
    /// Factors every lattice point in `modes`. Fails with `LatticeResonance`
    /// listing every mode where `sigma_min(i n w I - A) < 1e-12 ||A||_H`.
    pub fn new(g: &'g Generator, omega: f64, modes: impl IntoIterator<Item = i64>) -> Result<Self> {
        let modes: Vec<i64> = modes.into_iter().collect();
        let built: Vec<(i64, Option<ModeFactor>)> = modes
            .par_iter()
            .map(|&n| {
                let s = n as f64 * omega;
                let sigma = linalg::sigma_min(&linalg::shifted(g.weighted(), s));
                if !(sigma >= SINGULARITY_THRESHOLD * g.weighted_norm()) {
                    return (n, None);
                }
                let matrix = linalg::shifted(g.matrix(), s);
                let lu = matrix.clone().lu();
                (
                    n,
                    Some(ModeFactor {
                        lu,
                        matrix,
                        resolvent_norm: 1.0 / sigma,
                    }),
                )
            })
            .collect();
        let mut factors = BTreeMap::new();
        let mut resonant = Vec::new();
        for (n, f) in built {
            match f {
                Some(f) => {
                    factors.insert(n, f);
                }
                None => resonant.push(n),
            }
        }
        if !resonant.is_empty() {
            return Err(Error::LatticeResonance { modes: resonant });
        }
        Ok(ModeSolver { g, omega, factors })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `||(i n w I - A)^{-1}||_H` for a factored mode.
    pub fn resolvent_norm(&self, n: i64) -> Option<f64> {
        self.factors.get(&n).map(|f| f.resolvent_norm)
    }

    /// Empirical lattice constant `max_n ||R(i n w)|| / (1 + |n|)^alpha`.
    pub fn lattice_constant(&self, alpha: f64) -> f64 {
        self.factors
            .iter()
            .map(|(&n, f)| f.resolvent_norm / (1.0 + n.unsigned_abs() as f64).powf(alpha))
            .fold(0.0, f64::max)
    }

    /// `U_n` and its H-residual, with up to three refinement sweeps.
    pub fn solve(&self, n: i64, f: &CVector) -> Result<(CVector, f64)> {
        self.g.check_len(f.len())?;
        let factor = self
            .factors
            .get(&n)
            .ok_or_else(|| Error::InvalidInput(format!("mode {n} was not factored")))?;
        let fnorm = self.g.energy_norm(f)?;
        let mut u = factor
            .lu
            .solve(f)
            .ok_or(Error::LatticeResonance { modes: vec![n] })?;
        let mut res = self.g.energy_norm(&(f - &factor.matrix * &u))?;
        for _ in 0..3 {
            if res <= RESIDUAL_TOLERANCE * fnorm {
                break;
            }
            let r = f - &factor.matrix * &u;
            u += factor
                .lu
                .solve(&r)
                .ok_or(Error::LatticeResonance { modes: vec![n] })?;
            res = self.g.energy_norm(&(f - &factor.matrix * &u))?;
        }
        if res > RESIDUAL_TOLERANCE * fnorm {
            return Err(Error::LatticeResonance { modes: vec![n] });
        }
        Ok((u, res))
    }
}

/// `U_n = (i n w I - A)^{-1} F_n`.
pub fn solve_mode(g: &Generator, n: i64, omega: f64, f: &CVector) -> Result<CVector> {
    let solver = ModeSolver::new(g, omega, [n])?;
    solver.solve(n, f).map(|(u, _)| u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEntry {
    pub m: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSolution {
    pub period: f64,
    pub coeffs: ModeMap,
    /// `||(i n w I - A) U_n - F_n||_H` per mode.
    pub residuals: BTreeMap<i64, f64>,
    /// `||U||_{H^m}` at the requested index (and 0).
    pub norms: Vec<NormEntry>,
    /// `||F||_{H^{m + alpha}}` when an exponent was supplied.
    pub forcing_norm: Option<NormEntry>,
    pub alpha: Option<f64>,
    /// `||U||_{H^m} / ||F||_{H^{m + alpha}}` (0 for zero forcing).
    pub loss_ratio: Option<f64>,
    /// `max_n ||R(i n w)|| / (1 + |n|)^alpha` over the support.
    pub lattice_constant: Option<f64>,
}

impl PeriodicSolution {
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `U(t)`.
    pub fn evaluate(&self, t: f64) -> CVector {
        evaluate_modes(&self.coeffs, self.omega(), t)
    }

    pub fn norm(&self, m: f64) -> Option<f64> {
        self.norms.iter().find(|e| e.m == m).map(|e| e.value)
    }
}

/// Solves the periodic problem for every mode of `forcing` and records
/// residuals and Sobolev norms. With `alpha`, also reports the data norm
/// `||F||_{H^{m+alpha}}`, the loss ratio and the lattice constant.
pub fn solve_periodic(
    g: &Generator,
    forcing: &FourierForcing,
    m: f64,
    alpha: Option<f64>,
) -> Result<PeriodicSolution> {
    if !(m >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "regularity m must be >= 1, got {m}"
        )));
    }
    if let Some(d) = forcing.dim() {
        g.check_len(d)?;
    }
    let solver = ModeSolver::new(g, forcing.omega(), forcing.coeffs().keys().cloned())?;
    solve_with(&solver, forcing, m, alpha)
}

fn solve_with(
    solver: &ModeSolver<'_>,
    forcing: &FourierForcing,
    m: f64,
    alpha: Option<f64>,
) -> Result<PeriodicSolution> {
    let g = solver.g;
    // Real A with real data: U_{-n} = conj(U_n) exactly, by construction.
    let mirror = g.is_real() && forcing.real_flag();
    let entries: Vec<(i64, &CVector)> = forcing
        .coeffs()
        .iter()
        .filter(|(&n, _)| !mirror || n >= 0)
        .map(|(&n, v)| (n, v))
        .collect();
    let solved = entries
        .par_iter()
        .map(|&(n, f)| solver.solve(n, f).map(|(u, r)| (n, u, r)))
        .collect::<Result<Vec<_>>>()?;
    let mut coeffs = ModeMap::new();
    let mut residuals = BTreeMap::new();
    for (n, u, r) in solved {
        if mirror && n > 0 {
            coeffs.insert(-n, u.conjugate());
            residuals.insert(-n, r);
        }
        coeffs.insert(n, u);
        residuals.insert(n, r);
    }
    let mut norms = vec![NormEntry {
        m: 0.0,
        value: sobolev_norm(g, &coeffs, 0.0)?,
    }];
    if m != 0.0 {
        norms.push(NormEntry {
            m,
            value: sobolev_norm(g, &coeffs, m)?,
        });
    }
    let (forcing_norm, loss_ratio, lattice_constant) = match alpha {
        Some(a) => {
            let fnorm = sobolev_norm(g, forcing.coeffs(), m + a)?;
            let unorm = sobolev_norm(g, &coeffs, m)?;
            let ratio = if fnorm > 0.0 { unorm / fnorm } else { 0.0 };
            (
                Some(NormEntry {
                    m: m + a,
                    value: fnorm,
                }),
                Some(ratio),
                Some(solver.lattice_constant(a)),
            )
        }
        None => (None, None, None),
    };
    Ok(PeriodicSolution {
        period: forcing.period(),
        coeffs,
        residuals,
        norms,
        forcing_norm,
        alpha,
        loss_ratio,
        lattice_constant,
    })
}

/// Bound on the contribution of modes `|n| > n_cut` to `||U||_{H^m}^2`:
/// `M_T^2 sum_{|n| > n_cut} (1 + |n|)^{2(m + alpha)} ||F_n||_H^2`.
pub fn tail_bound(
    g: &Generator,
    forcing: &FourierForcing,
    m: f64,
    alpha: f64,
    lattice_constant: f64,
    n_cut: usize,
) -> Result<f64> {
    let tail: ModeMap = forcing
        .coeffs()
        .iter()
        .filter(|(n, _)| n.unsigned_abs() as usize > n_cut)
        .map(|(&n, v)| (n, v.clone()))
        .collect();
    let s = sobolev_norm(g, &tail, m + alpha)?;
    Ok(lattice_constant * lattice_constant * s * s)
}

/// Trigonometric-interpolation coefficients of `S` equispaced samples on
/// `[0, T)`, for `|n| <= n_max`. Exact for band-limited data.
pub fn fourier_coefficients(samples: &[CVector], n_max: usize) -> Result<ModeMap> {
    let count = samples.len();
    if count < 2 * n_max + 2 {
        return Err(Error::TooFewPoints {
            need: 2 * n_max + 2,
            got: count,
        });
    }
    let dim = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(count);
    let mut coeffs: ModeMap = (-(n_max as i64)..=n_max as i64)
        .map(|n| (n, CVector::zeros(dim)))
        .collect();
    let scale = 1.0 / count as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); count];
    for comp in 0..dim {
        for (b, s) in buf.iter_mut().zip(samples) {
            *b = s[comp];
        }
        fft.process(&mut buf);
        for (n, v) in coeffs.iter_mut() {
            let bin = n.rem_euclid(count as i64) as usize;
            v[comp] = buf[bin] * scale;
        }
    }
    Ok(coeffs)
}

/// `U(t_j) = sum U_n e^{i n w t_j}` at `t_j = j T / S`.
pub fn synthesize_time_series(coeffs: &ModeMap, sample_count: usize) -> Result<Vec<CVector>> {
    let n_max = coeffs
        .keys()
        .map(|n| n.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    if sample_count < 2 * n_max + 2 {
        return Err(Error::TooFewPoints {
            need: 2 * n_max + 2,
            got: sample_count,
        });
    }
    let dim = mode_dim(coeffs)?.unwrap_or(0);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(sample_count);
    let mut out = vec![CVector::zeros(dim); sample_count];
    let mut buf = vec![Complex64::new(0.0, 0.0); sample_count];
    for comp in 0..dim {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for (&n, v) in coeffs {
            buf[n.rem_euclid(sample_count as i64) as usize] += v[comp];
        }
        fft.process(&mut buf);
        for (o, b) in out.iter_mut().zip(&buf) {
            o[comp] = *b;
        }
    }
    Ok(out)
}

/// Drops imaginary parts after checking they are below `tol` relative to
/// the largest entry; `None` if the series is genuinely complex.
pub fn real_series(series: &[CVector], tol: f64) -> Option<Vec<Vec<f64>>> {
    let scale = series
        .iter()
        .flat_map(|v| v.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    let worst = series
        .iter()
        .flat_map(|v| v.iter().map(|z| z.im.abs()))
        .fold(0.0, f64::max);
    if worst > tol * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(
        series
            .iter()
            .map(|v| v.iter().map(|z| z.re).collect())
            .collect(),
    )
}

/// Configuration of a loss-estimate certification run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub m: f64,
    pub trials: usize,
    pub seed: u64,
    pub period: f64,
    pub n_max: usize,
}

impl LossConfig {
    pub fn new(alpha: f64, m: f64, trials: usize, seed: u64) -> Self {
        LossConfig {
            alpha,
            m,
            trials,
            seed,
            period: 2.0,
            n_max: DEFAULT_N_MAX,
        }
    }
}

/// Empirical `C_T` in `||U||_{H^m} <= C_T ||F||_{H^{m+alpha}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossCertificate {
    pub m: f64,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub period: f64,
    pub n_max: usize,
    pub max_ratio: f64,
    pub ratios: Vec<f64>,
    pub lattice_constant: f64,
}

/// Draws `trials` real forcings with coefficients
/// `F_n = (1 + |n|)^{-(m + alpha) - 0.51} v_n` (`v_n` uniform on the unit
/// sphere of H), normalizes each to `||F||_{H^{m+alpha}} = 1`, solves and
/// records `||U||_{H^m} / ||F||_{H^{m+alpha}}`.
pub fn verify_loss_estimate(g: &Generator, config: &LossConfig) -> Result<LossCertificate> {
    if !(config.alpha >= 0.0) {
        return Err(Error::InvalidInput("alpha must be >= 0".into()));
    }
    if config.trials < 1 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let omega = 2.0 * PI / config.period;
    let k = config.n_max as i64;
    let solver = ModeSolver::new(g, omega, -k..=k)?;
    let decay = config.m + config.alpha + 0.51;
    let ratios = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let forcing =
                random_forcing_trial(g, config.period, config.n_max, decay, config.seed, trial)?;
            let fnorm = sobolev_norm(g, forcing.coeffs(), config.m + config.alpha)?;
            let unit = forcing.combine(
                Complex64::new(1.0 / fnorm, 0.0),
                &FourierForcing::zero(config.period, g.dim())?,
                Complex64::new(0.0, 0.0),
            )?;
            let sol = solve_with(&solver, &unit, config.m, Some(config.alpha))?;
            Ok(sol.loss_ratio.unwrap_or(f64::NAN))
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(bad) = ratios.iter().find(|r| !r.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite loss ratio {bad}")));
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(LossCertificate {
        m: config.m,
        alpha: config.alpha,
        trials: config.trials,
        seed: config.seed,
        period: config.period,
        n_max: config.n_max,
        max_ratio,
        ratios,
        lattice_constant: solver.lattice_constant(config.alpha),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModeRecord {
    n: i64,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomForcingSpec {
    pub seed: u64,
    pub n_max: usize,
    pub decay: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForcingFile {
    period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modes: Option<Vec<ModeRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    random: Option<RandomForcingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    real: Option<bool>,
}

fn split_vector(v: &CVector) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|z| z.re).collect(),
        v.iter().map(|z| z.im).collect(),
    )
}

fn join_vector(n: i64, re: &[f64], im: &[f64]) -> Result<CVector> {
    if re.len() != im.len() {
        return Err(Error::InvalidInput(format!(
            "mode {n}: re has {} entries, im has {}",
            re.len(),
            im.len()
        )));
    }
    Ok(CVector::from_iterator(
        re.len(),
        re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)),
    ))
}

fn records(coeffs: &ModeMap) -> Vec<ModeRecord> {
    coeffs
        .iter()
        .map(|(&n, v)| {
            let (re, im) = split_vector(v);
            ModeRecord { n, re, im }
        })
        .collect()
}

fn mode_map(records: &[ModeRecord]) -> Result<ModeMap> {
    let mut coeffs = ModeMap::new();
    for r in records {
        if coeffs
            .insert(r.n, join_vector(r.n, &r.re, &r.im)?)
            .is_some()
        {
            return Err(Error::InvalidInput(format!("mode {} listed twice", r.n)));
        }
    }
    Ok(coeffs)
}

impl FourierForcing {
    /// Parses either an explicit `modes` list or a seeded `random` recipe;
    /// the latter is realized against `g`.
    pub fn from_json(text: &str, g: &Generator) -> Result<Self> {
        let file: ForcingFile = serde_json::from_str(text)?;
        let forcing = match (&file.modes, &file.random) {
            (Some(modes), None) => {
                let coeffs = mode_map(modes)?;
                match file.real {
                    Some(flag) => FourierForcing::new(file.period, coeffs, flag)?,
                    None => FourierForcing::detect(file.period, coeffs)?,
                }
            }
            (None, Some(r)) => random_forcing(g, file.period, r.n_max, r.decay, r.seed)?,
            _ => {
                return Err(Error::InvalidSpec(
                    "forcing needs exactly one of \"modes\" or \"random\"".into(),
                ))
            }
        };
        if let Some(d) = forcing.dim() {
            g.check_len(d)?;
        }
        Ok(forcing)
    }

    pub fn to_json(&self) -> String {
        let file = ForcingFile {
            period: self.period,
            modes: Some(records(&self.coeffs)),
            random: None,
            real: Some(self.real_flag),
        };
        serde_json::to_string_pretty(&file).expect("forcing serializes")
    }
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    period: f64,
    omega: f64,
    modes: Vec<ModeRecord>,
    residuals: BTreeMap<String, f64>,
    norms: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    forcing_norm: Option<&'a NormEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loss_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lattice_constant: Option<f64>,
}

impl PeriodicSolution {
    /// JSON with `residuals` keyed by mode and `norms` keyed by index `m`.
    pub fn to_json(&self) -> String {
        let file = SolutionFile {
            period: self.period,
            omega: self.omega(),
            modes: records(&self.coeffs),
            residuals: self
                .residuals
                .iter()
                .map(|(n, r)| (n.to_string(), *r))
                .collect(),
            norms: self
                .norms
                .iter()
                .map(|e| (e.m.to_string(), e.value))
                .collect(),
            forcing_norm: self.forcing_norm.as_ref(),
            alpha: self.alpha,
            loss_ratio: self.loss_ratio,
            lattice_constant: self.lattice_constant,
        };
        serde_json::to_string_pretty(&file).expect("solution serializes")
    }

    /// `t,component_0,...` at `sample_count` equispaced times; real parts
    /// only when the series is real, otherwise `re_k,im_k` column pairs.
    pub fn time_series_csv(&self, sample_count: usize) -> Result<String> {
        let series = synthesize_time_series(&self.coeffs, sample_count)?;
        let dim = series.first().map_or(0, |v| v.len());
        let dt = self.period / sample_count as f64;
        let mut out = String::from("t");
        let real = real_series(&series, 1e-10);
        for k in 0..dim {
            match real {
                Some(_) => out.push_str(&format!(",component_{k}")),
                None => out.push_str(&format!(",re_{k},im_{k}")),
            }
        }
        out.push('\n');
        for (j, v) in series.iter().enumerate() {
            out.push_str(&format!("{:.16e}", j as f64 * dt));
            match &real {
                Some(rows) => rows[j]
                    .iter()
                    .for_each(|x| out.push_str(&format!(",{x:.16e}"))),
                None => v
                    .iter()
                    .for_each(|z| out.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im))),
            }
            out.push('\n');
        }
        Ok(out)
    }
}

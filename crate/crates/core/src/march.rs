//! Time-domain oracle for the forced system `U' = AU + F(t)`.
//!
//! Classical RK4 with step doubling: every step of size `dt` is taken once
//! whole and once as two halves; the halved result is kept and
//! `||y_half - y_full||_H / 15` is its local error estimate. The method is
//! deliberately generic so that agreement with the Fourier construction is
//! a genuine cross-check.

use std::f64::consts::PI;

use nalgebra::SVD;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, default_frequency_window};
use crate::error::{Error, Result};
use crate::fit::linear_regression;
use crate::linalg::{self, CVector};
use crate::operators::Generator;
use crate::periodic::{solve_periodic, FourierForcing, PeriodicSolution};

/// Default distance from `iR` below which an eigenvalue counts as imaginary.
pub const DEFAULT_AXIS_TOLERANCE: f64 = 1e-8;

/// Largest `dt |lambda|` allowed by `suggested_step`.
pub const STEP_SPECTRAL_BOUND: f64 = 1.0;

/// Sampled trajectory. `error_estimate[k]` is the accumulated local error
/// estimate up to `times[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub energy: Vec<f64>,
    pub error_estimate: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &CVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn total_error_estimate(&self) -> f64 {
        self.error_estimate.last().copied().unwrap_or(0.0)
    }

    /// `t,energy` rows.
    pub fn energy_csv(&self) -> String {
        let mut out = String::from("t,energy\n");
        for (t, e) in self.times.iter().zip(&self.energy) {
            out.push_str(&format!("{t:.16e},{e:.16e}\n"));
        }
        out
    }

    /// `t,re_0,im_0,...` rows.
    pub fn state_csv(&self) -> String {
        let dim = self.states.first().map_or(0, |v| v.len());
        let mut out = String::from("t");
        for k in 0..dim {
            out.push_str(&format!(",re_{k},im_{k}"));
        }
        out.push('\n');
        for (t, v) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:.16e}"));
            for z in v.iter() {
                out.push_str(&format!(",{:.16e},{:.16e}", z.re, z.im));
            }
            out.push('\n');
        }
        out
    }
}

/// `F` on the quarter-step grid, tabulated over one period when `T / dt`
/// is an integer.
struct ForcingSampler<'f> {
    forcing: &'f FourierForcing,
    quarter: f64,
    table: Option<Vec<CVector>>,
}

impl<'f> ForcingSampler<'f> {
    fn new(forcing: &'f FourierForcing, dt: f64) -> Self {
        let quarter = dt / 4.0;
        let ratio = forcing.period() / quarter;
        let count = ratio.round();
        let table =
            (count >= 1.0 && (ratio - count).abs() <= 1e-9 * ratio && count <= 1e6).then(|| {
                (0..count as usize)
                    .map(|k| forcing.evaluate(k as f64 * quarter))
                    .collect()
            });
        ForcingSampler {
            forcing,
            quarter,
            table,
        }
    }

    /// `F(q * dt / 4)`.
    fn at(&self, q: u64) -> CVector {
        match &self.table {
            Some(t) => t[(q % t.len() as u64) as usize].clone(),
            None => self.forcing.evaluate(q as f64 * self.quarter),
        }
    }
}

struct Stepper<'a> {
    g: &'a Generator,
    scratch: CVector,
}

impl Stepper<'_> {
    fn rhs(&mut self, y: &CVector, f: &CVector) -> CVector {
        self.g.sparse().mul_into(y, &mut self.scratch);
        &self.scratch + f
    }

    /// One RK4 step of size `h`, with forcing at start, middle and end.
    fn rk4(&mut self, y: &CVector, h: f64, f0: &CVector, fm: &CVector, f1: &CVector) -> CVector {
        let hc = Complex64::new(h, 0.0);
        let half = Complex64::new(h / 2.0, 0.0);
        let k1 = self.rhs(y, f0);
        let k2 = self.rhs(&(y + &k1 * half), fm);
        let k3 = self.rhs(&(y + &k2 * half), fm);
        let k4 = self.rhs(&(y + &k3 * hc), f1);
        y + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0)
    }
}

/// Largest step accepted for a forcing: `T / (20 N_max)`.
pub fn step_limit(forcing: &FourierForcing) -> f64 {
    forcing.period() / (20.0 * forcing.n_max().max(1) as f64)
}

/// A step dividing `T` evenly, below `step_limit` and below
/// `1 / max |lambda|`.
pub fn suggested_step(g: &Generator, forcing: &FourierForcing) -> f64 {
    let radius = g.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut cap = step_limit(forcing);
    if radius > 0.0 {
        cap = cap.min(STEP_SPECTRAL_BOUND / radius);
    }
    let period = forcing.period();
    period / (period / cap).ceil()
}

/// Integrates from `t = 0`, recording every `record_every`-th step (and the
/// final state).
pub fn integrate_sampled(
    g: &Generator,
    forcing: &FourierForcing,
    u0: &CVector,
    dt: f64,
    horizon: f64,
    record_every: usize,
) -> Result<Trajectory> {
    g.check_len(u0.len())?;
    if let Some(d) = forcing.dim() {
        g.check_len(d)?;
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidInput(format!(
            "horizon must be >= 0, got {horizon}"
        )));
    }
    let limit = step_limit(forcing);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, limit });
    }
    let record_every = record_every.max(1);
    let ratio = horizon / dt;
    let steps = if (ratio - ratio.round()).abs() <= 1e-9 * ratio.max(1.0) {
        ratio.round() as u64
    } else {
        ratio.ceil() as u64
    };

    let sampler = ForcingSampler::new(forcing, dt);
    let mut stepper = Stepper {
        g,
        scratch: CVector::zeros(g.dim()),
    };
    let mut y = u0.clone();
    let mut err = 0.0;
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![y.clone()],
        energy: vec![g.energy_norm(&y)?],
        error_estimate: vec![0.0],
    };
    for k in 0..steps {
        let t = k as f64 * dt;
        let h = if k + 1 == steps { horizon - t } else { dt };
        let (full, halved) = if h == dt {
            let q = 4 * k;
            let f: Vec<CVector> = (0..=4).map(|j| sampler.at(q + j)).collect();
            let full = stepper.rk4(&y, h, &f[0], &f[2], &f[4]);
            let mid = stepper.rk4(&y, h / 2.0, &f[0], &f[1], &f[2]);
            (full, stepper.rk4(&mid, h / 2.0, &f[2], &f[3], &f[4]))
        } else {
            let f: Vec<CVector> = (0..=4)
                .map(|j| forcing.evaluate(t + j as f64 * h / 4.0))
                .collect();
            let full = stepper.rk4(&y, h, &f[0], &f[2], &f[4]);
            let mid = stepper.rk4(&y, h / 2.0, &f[0], &f[1], &f[2]);
            (full, stepper.rk4(&mid, h / 2.0, &f[2], &f[3], &f[4]))
        };
        let t_next = t + h;
        if halved
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::UnstableGrowth { t: t_next });
        }
        err += g.energy_norm(&(&halved - &full))? / 15.0;
        y = halved;
        if (k + 1) % record_every as u64 == 0 || k + 1 == steps {
            traj.times.push(t_next);
            traj.energy.push(g.energy_norm(&y)?);
            traj.states.push(y.clone());
            traj.error_estimate.push(err);
        }
    }
    Ok(traj)
}

/// Integrates `U' = AU + F` from `U(0) = U0` up to `horizon`, recording
/// every step.
pub fn integrate_forced(
    g: &Generator,
    forcing: &FourierForcing,
    u0: &CVector,
    dt: f64,
    horizon: f64,
) -> Result<Trajectory> {
    integrate_sampled(g, forcing, u0, dt, horizon, 1)
}

/// Marched trajectory from `U_F(0)` against the Fourier solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub dt: f64,
    pub steps: usize,
    /// `max_t ||U_march(t) - U_F(t)||_H` over one period.
    pub max_deviation: f64,
    pub error_estimate: f64,
    /// `||U_march(T) - U_F(0)||_H`.
    pub poincare_gap: f64,
    /// `poincare_gap / ||U_F(0)||_H`.
    pub relative_gap: f64,
    /// `max_deviation <= 10 * error_estimate`.
    pub within_estimate: bool,
}

/// Marches one period from the periodic solution's initial value and
/// compares with `U_F(t)` at every step.
pub fn cross_check(
    g: &Generator,
    forcing: &FourierForcing,
    solution: &PeriodicSolution,
    dt: f64,
) -> Result<CrossCheck> {
    let start = solution.evaluate(0.0);
    let traj = integrate_forced(g, forcing, &start, dt, forcing.period())?;
    let mut max_deviation: f64 = 0.0;
    for (t, u) in traj.times.iter().zip(&traj.states) {
        max_deviation = max_deviation.max(g.energy_norm(&(u - solution.evaluate(*t)))?);
    }
    let poincare_gap = g.energy_norm(&(traj.final_state() - &start))?;
    let scale = g.energy_norm(&start)?;
    let error_estimate = traj.total_error_estimate();
    Ok(CrossCheck {
        dt,
        steps: traj.len() - 1,
        max_deviation,
        error_estimate,
        poincare_gap,
        relative_gap: if scale > 0.0 {
            poincare_gap / scale
        } else {
            poincare_gap
        },
        within_estimate: max_deviation <= 10.0 * error_estimate,
    })
}

/// Gaps `||U(jT) - U_F(0)||_H` for `j = 0..=k_periods`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub period: f64,
    pub dt: f64,
    pub gaps: Vec<f64>,
    /// `gaps[j + 1] / gaps[j]`.
    pub ratios: Vec<f64>,
    pub error_estimate: f64,
    /// First period after which the gaps never increase again.
    pub monotone_from: Option<usize>,
    /// `gaps.last() / gaps[0]`.
    pub reduction: f64,
}

impl ConvergenceReport {
    /// `period,gap` rows.
    pub fn gaps_csv(&self) -> String {
        let mut out = String::from("period,gap\n");
        for (j, g) in self.gaps.iter().enumerate() {
            out.push_str(&format!("{j},{g:.16e}\n"));
        }
        out
    }

    /// Whether the gap fell below `factor` times its initial value.
    pub fn converged(&self, factor: f64) -> bool {
        self.reduction < factor
    }
}

/// Marches `k_periods` periods from `U0` and records the Poincaré gaps to the
/// periodic solution's initial value.
pub fn converge_to_periodic(
    g: &Generator,
    forcing: &FourierForcing,
    u0: &CVector,
    k_periods: usize,
) -> Result<ConvergenceReport> {
    let solution = solve_periodic(g, forcing, 1.0, None)?;
    let dt = suggested_step(g, forcing);
    converge_with(g, forcing, &solution, u0, k_periods, dt)
}

/// `converge_to_periodic` with an explicit solution and step.
pub fn converge_with(
    g: &Generator,
    forcing: &FourierForcing,
    solution: &PeriodicSolution,
    u0: &CVector,
    k_periods: usize,
    dt: f64,
) -> Result<ConvergenceReport> {
    let period = forcing.period();
    let per_period = (period / dt).round() as usize;
    if per_period == 0 || ((per_period as f64) * dt - period).abs() > 1e-9 * period {
        return Err(Error::InvalidInput(format!(
            "dt = {dt} does not divide the period {period}"
        )));
    }
    let traj = integrate_sampled(g, forcing, u0, dt, k_periods as f64 * period, per_period)?;
    let target = solution.evaluate(0.0);
    let gaps = traj
        .states
        .iter()
        .map(|u| g.energy_norm(&(u - &target)))
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    let monotone_from = (0..gaps.len()).find(|&j| gaps[j..].windows(2).all(|w| w[1] <= w[0]));
    let reduction = match (gaps.first(), gaps.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        _ => 0.0,
    };
    Ok(ConvergenceReport {
        period,
        dt,
        gaps,
        ratios,
        error_estimate: traj.total_error_estimate(),
        monotone_from,
        reduction,
    })
}

/// Upper end of the band of well-resolved frequencies.
pub fn resolved_band(g: &Generator) -> f64 {
    default_frequency_window(g).1
}

/// Real unit-energy combination of eigenvectors with `|Im lambda| <= band`,
/// with seeded Gaussian weights.
pub fn resolved_band_state(g: &Generator, band: f64, seed: u64) -> Result<CVector> {
    let (values, vectors) = linalg::eigen_decomposition(g.matrix());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = CVector::zeros(g.dim());
    for (k, lambda) in values.iter().enumerate() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if lambda.im.abs() <= band {
            state += vectors.column(k) * Complex64::new(re, im);
        }
    }
    if g.is_real() {
        state = state.map(|z| Complex64::new(z.re, 0.0));
    }
    let norm = g.energy_norm(&state)?;
    if !(norm > 0.0) {
        return Err(Error::InvalidInput(format!(
            "no eigenvalue with |Im| <= {band}"
        )));
    }
    Ok(state / Complex64::new(norm, 0.0))
}

/// Temporal profile of a single-frequency forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingShape {
    /// `F(t) = f e^{i w t}`.
    Exponential,
    /// `F(t) = Re(f e^{i w t})`.
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceConfig {
    /// Forcing frequency; defaults to `|Im lambda|` of the eigenvalue
    /// closest to the axis.
    pub frequency: Option<f64>,
    /// Forcing direction; defaults to the worst-case direction at the
    /// forcing frequency.
    pub direction: Option<CVector>,
    pub shape: ForcingShape,
    pub horizon: f64,
    pub axis_tolerance: f64,
    /// Defaults to `suggested_step`, capped at 1/40 of a forcing period.
    pub dt: Option<f64>,
}

impl ResonanceConfig {
    pub fn new(horizon: f64) -> Self {
        ResonanceConfig {
            frequency: None,
            direction: None,
            shape: ForcingShape::Exponential,
            horizon,
            axis_tolerance: DEFAULT_AXIS_TOLERANCE,
            dt: None,
        }
    }
}

/// Response of a system driven at one frequency, started from rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub frequency: f64,
    pub nearest_eigenvalue: Complex64,
    pub axis_distance: f64,
    pub forcing_norm: f64,
    /// Time of the largest energy in each forcing period.
    pub peak_times: Vec<f64>,
    pub peak_energy: Vec<f64>,
    /// Exponent of `peak_energy ~ t^order` (first period excluded).
    pub growth_order: f64,
    /// Slope of the least-squares line through the peaks.
    pub amplitude_slope: f64,
    /// Last-period peak over the forcing amplitude.
    pub amplification: f64,
    /// `||(i w I - A)^{-1}||_H`, absent at an exact resonance.
    pub resolvent_norm: Option<f64>,
}

/// Left singular vector of `(i w I - A)` for its smallest singular value,
/// in original coordinates with unit energy: the forcing direction that
/// `R(i w)` amplifies most.
pub fn worst_case_direction(g: &Generator, frequency: f64) -> Result<CVector> {
    let m = linalg::shifted(g.weighted(), frequency);
    let svd = SVD::new(m, true, false);
    let u = svd.u.expect("requested left singular vectors");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
        )
        .0;
    let z: CVector = u.column(k).into_owned();
    let x = g.from_energy_coords(&z);
    let n = g.energy_norm(&x)?;
    Ok(x / Complex64::new(n, 0.0))
}

/// Drives the system at one frequency from rest and measures how the
/// per-period peak energy grows.
pub fn resonance_demo(g: &Generator, config: &ResonanceConfig) -> Result<GrowthReport> {
    let nearest = g
        .eigenvalues()
        .iter()
        .copied()
        .min_by(|a, b| a.re.abs().total_cmp(&b.re.abs()))
        .ok_or(Error::NoImaginaryEigenvalue {
            tol: config.axis_tolerance,
        })?;
    if nearest.re.abs() > config.axis_tolerance {
        return Err(Error::NoImaginaryEigenvalue {
            tol: config.axis_tolerance,
        });
    }
    let frequency = config.frequency.unwrap_or(nearest.im.abs());
    if !(frequency > 0.0) {
        return Err(Error::InvalidInput(format!(
            "forcing frequency must be > 0, got {frequency}"
        )));
    }
    let direction = match &config.direction {
        Some(d) => {
            g.check_len(d.len())?;
            d.clone()
        }
        None => worst_case_direction(g, frequency)?,
    };
    let period = 2.0 * PI / frequency;
    let forcing = match config.shape {
        ForcingShape::Exponential => FourierForcing::single_mode(period, 1, direction.clone())?,
        ForcingShape::Cosine => FourierForcing::cosine(period, 1, direction.clone())?,
    };
    let forcing_norm = match config.shape {
        ForcingShape::Exponential => g.energy_norm(&direction)?,
        ForcingShape::Cosine => (0..256)
            .map(|k| g.energy_norm(&forcing.evaluate(k as f64 * period / 256.0)))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max),
    };
    let dt = match config.dt {
        Some(dt) => dt,
        None => {
            let s = suggested_step(g, &forcing);
            period / (period / s).max(40.0).ceil()
        }
    };
    let traj = integrate_forced(g, &forcing, &CVector::zeros(g.dim()), dt, config.horizon)?;

    let periods = (config.horizon / period).round().max(1.0) as usize;
    let mut peak_times = vec![0.0; periods];
    let mut peak_energy = vec![f64::NEG_INFINITY; periods];
    for (&t, &e) in traj.times.iter().zip(&traj.energy) {
        let j = ((t / period - 1e-9).max(0.0) as usize).min(periods - 1);
        if e > peak_energy[j] {
            peak_energy[j] = e;
            peak_times[j] = t;
        }
    }
    let tail: Vec<(f64, f64)> = peak_times
        .iter()
        .zip(&peak_energy)
        .skip(1)
        .filter(|(t, e)| **t > 0.0 && **e > 0.0)
        .map(|(&t, &e)| (t, e))
        .collect();
    let (growth_order, amplitude_slope) = if tail.len() >= 2 {
        let lx: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
        let ly: Vec<f64> = tail.iter().map(|p| p.1.ln()).collect();
        let xs: Vec<f64> = tail.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = tail.iter().map(|p| p.1).collect();
        (linear_regression(&lx, &ly).0, linear_regression(&xs, &ys).0)
    } else {
        (0.0, 0.0)
    };
    let last = *peak_energy.last().unwrap_or(&0.0);
    let resolvent_norm = diagnostics::resolvent_norm(g, frequency).ok();
    Ok(GrowthReport {
        frequency,
        nearest_eigenvalue: nearest,
        axis_distance: nearest.re.abs(),
        forcing_norm,
        peak_times,
        peak_energy,
        growth_order,
        amplitude_slope,
        amplification: if forcing_norm > 0.0 {
            last / forcing_norm
        } else {
            0.0
        },
        resolvent_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_model, ModelSpec};
    use crate::periodic::{random_forcing, solve_periodic};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn scalar_decay_to_one() {
        let g = make_model(&ModelSpec::uniformly_damped(1)).unwrap();
        let f = FourierForcing::zero(1.0, 1).unwrap();
        let traj = integrate_forced(&g, &f, &CVector::from_element(1, c(1.0)), 0.01, 1.0).unwrap();
        assert!((traj.final_state()[0].re - (-1.0f64).exp()).abs() < 1e-8);
        assert_eq!(traj.len(), 101);
        assert!((traj.times[100] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_energy_is_conserved() {
        let g = make_model(&ModelSpec::conservative_oscillator()).unwrap();
        let f = FourierForcing::zero(2.0 * PI, 2).unwrap();
        let u0 = CVector::from_vec(vec![c(0.3), c(-1.2)]);
        let traj = integrate_forced(&g, &f, &u0, 2.0 * PI / 400.0, 2.0 * PI).unwrap();
        let e0 = traj.energy[0];
        assert!(traj.energy.iter().all(|e| (e - e0).abs() < 1e-8));
    }

    #[test]
    fn step_limit_is_enforced() {
        let g = make_model(&ModelSpec::uniformly_damped(1)).unwrap();
        let f = FourierForcing::single_mode(1.0, 5, CVector::from_element(1, c(1.0))).unwrap();
        assert!(matches!(
            integrate_forced(&g, &f, &CVector::zeros(1), 0.02, 1.0),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn unstable_step_is_reported() {
        let g = make_model(&ModelSpec::diagonal(&[Complex64::new(-1e4, 0.0)])).unwrap();
        let f = FourierForcing::zero(1.0, 1).unwrap();
        assert!(matches!(
            integrate_forced(&g, &f, &CVector::from_element(1, c(1.0)), 0.05, 100.0),
            Err(Error::UnstableGrowth { .. })
        ));
    }

    #[test]
    fn partial_final_step_lands_on_horizon() {
        let g = make_model(&ModelSpec::uniformly_damped(1)).unwrap();
        let f = FourierForcing::zero(1.0, 1).unwrap();
        let traj = integrate_forced(&g, &f, &CVector::from_element(1, c(1.0)), 0.03, 1.0).unwrap();
        assert!((traj.times.last().unwrap() - 1.0).abs() < 1e-15);
        assert!((traj.final_state()[0].re - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn scalar_gap_ratio() {
        let g = make_model(&ModelSpec::uniformly_damped(1)).unwrap();
        let f = FourierForcing::cosine(2.0 * PI, 1, CVector::from_element(1, c(1.0))).unwrap();
        let report = converge_to_periodic(&g, &f, &CVector::from_element(1, c(2.0)), 2).unwrap();
        let want = (-2.0 * PI).exp();
        assert!(
            (report.ratios[0] / want - 1.0).abs() < 0.05,
            "{:?}",
            report.ratios
        );
    }

    #[test]
    fn start_on_orbit_stays() {
        let g = make_model(&ModelSpec::weakly_damped_chain(2, 1.0, 1.0, 1.0)).unwrap();
        let f = random_forcing(&g, 2.0, 4, 2.0, 11).unwrap();
        let sol = solve_periodic(&g, &f, 1.0, None).unwrap();
        let report =
            converge_with(&g, &f, &sol, &sol.evaluate(0.0), 3, suggested_step(&g, &f)).unwrap();
        assert!(report
            .gaps
            .iter()
            .all(|&gap| gap <= 10.0 * report.error_estimate.max(1e-14)));
    }

    #[test]
    fn classical_resonance_slope() {
        let g = make_model(&ModelSpec::conservative_oscillator()).unwrap();
        let mut cfg = ResonanceConfig::new(40.0 * PI);
        cfg.frequency = Some(1.0);
        cfg.direction = Some(CVector::from_vec(vec![c(0.0), c(1.0)]));
        cfg.shape = ForcingShape::Cosine;
        let r = resonance_demo(&g, &cfg).unwrap();
        assert!(
            (r.amplitude_slope - 0.5).abs() < 0.01,
            "{}",
            r.amplitude_slope
        );
        assert!((r.growth_order - 1.0).abs() < 0.1, "{}", r.growth_order);
        assert!(r.resolvent_norm.is_none());

        cfg.frequency = Some(2.0);
        let off = resonance_demo(&g, &cfg).unwrap();
        assert!(off.growth_order.abs() < 0.2, "{}", off.growth_order);
        assert!(off.peak_energy.iter().all(|&e| e < 1.0));
    }

    #[test]
    fn damped_model_has_no_imaginary_eigenvalue() {
        let g = make_model(&ModelSpec::uniformly_damped(2)).unwrap();
        assert!(matches!(
            resonance_demo(&g, &ResonanceConfig::new(10.0)),
            Err(Error::NoImaginaryEigenvalue { .. })
        ));
    }

    #[test]
    fn worst_direction_attains_resolvent_norm() {
        let g = make_model(&ModelSpec::weakly_damped_chain(3, 1.0, 1.0, 1.0)).unwrap();
        let s = 2.5;
        let f = worst_case_direction(&g, s).unwrap();
        let r = diagnostics::resolvent_norm(&g, s).unwrap();
        let shifted = linalg::shifted(g.matrix(), s);
        let u = shifted.lu().solve(&f).unwrap();
        assert!((g.energy_norm(&u).unwrap() / r - 1.0).abs() < 1e-9);
    }
}

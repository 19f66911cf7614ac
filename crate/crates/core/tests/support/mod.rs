//! Strategies, independent oracles and property checks shared by the
//! property suite and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use polystab::linalg::{CMatrix, CVector};
use polystab::march::{integrate_forced, suggested_step};
use polystab::periodic::{
    fourier_coefficients, random_forcing, real_series, sobolev_norm, solve_periodic,
    synthesize_time_series, verify_loss_estimate, FourierForcing, LossConfig, ModeMap,
};
use polystab::{make_model, Generator, ModelSpec};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const CASES: u32 = 128;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `1 / min_k |i s - lambda_k|`.
pub fn diagonal_resolvent_oracle(lambdas: &[Complex64], s: f64) -> f64 {
    1.0 / lambdas
        .iter()
        .map(|l| (c(0.0, s) - l).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `e^M` by Taylor series on `M / 2^k` followed by `k` squarings.
pub fn taylor_expm(m: &CMatrix) -> CMatrix {
    let norm = m.iter().map(|z| z.norm()).sum::<f64>();
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / c(2f64.powi(k), 0.0);
    let n = m.nrows();
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for j in 1..40 {
        term = &term * &scaled / c(j as f64, 0.0);
        sum += &term;
    }
    for _ in 0..k {
        sum = &sum * &sum;
    }
    sum
}

/// A zoo model drawn from small parameter ranges.
pub fn arb_spec() -> impl Strategy<Value = ModelSpec> {
    prop_oneof![
        (2usize..6, 2usize..6).prop_map(|(h, w)| ModelSpec::heat_wave(h, w)),
        (1usize..4, 0.2f64..2.0, 0.2f64..2.0, 0.5f64..2.0)
            .prop_map(|(n, d, g, k)| ModelSpec::weakly_damped_chain(n, d, g, k)),
        (1usize..5).prop_map(ModelSpec::uniformly_damped),
        prop::collection::vec((0.05f64..2.0, 0.0f64..5.0), 1..4).prop_map(|ps| {
            let lambdas: Vec<Complex64> = ps
                .iter()
                .flat_map(|&(d, w)| [c(-d, w), c(-d, -w)])
                .collect();
            ModelSpec::diagonal(&lambdas)
        }),
    ]
}

/// Complex vector with entries in `[-1, 1] + i [-1, 1]`.
pub fn arb_vector(dim: usize) -> impl Strategy<Value = CVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_map(|v| CVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b))))
}

/// Coefficients on `-n_max..=n_max`.
pub fn arb_modes(dim: usize, n_max: i64) -> impl Strategy<Value = ModeMap> {
    prop::collection::vec(arb_vector(dim), (2 * n_max + 1) as usize)
        .prop_map(move |vs| (-n_max..=n_max).zip(vs).collect::<BTreeMap<_, _>>())
}

fn close(a: &CVector, b: &CVector, rel: f64, scale: f64) -> bool {
    (a - b).norm() <= rel * scale.max(f64::MIN_POSITIVE)
}

pub fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

/// `solve(aF + bG) = a solve(F) + b solve(G)` coefficient-wise.
pub fn check_linearity(
    spec: &ModelSpec,
    f: &ModeMap,
    h: &ModeMap,
    a: Complex64,
    b: Complex64,
) -> Result<(), TestCaseError> {
    let g = make_model(spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let period = 2.3;
    let ff = FourierForcing::detect(period, f.clone()).unwrap();
    let hh = FourierForcing::detect(period, h.clone()).unwrap();
    let combo = ff.combine(a, &hh, b).unwrap();
    let solve = |x: &FourierForcing| solve_periodic(&g, x, 1.0, None).unwrap();
    let (uf, uh, uc) = (solve(&ff), solve(&hh), solve(&combo));
    for (n, u) in &uc.coeffs {
        let want = &uf.coeffs[n] * a + &uh.coeffs[n] * b;
        let scale =
            (&uf.coeffs[n] * c(a.norm(), 0.0)).norm() + (&uh.coeffs[n] * c(b.norm(), 0.0)).norm();
        prop_assert!(
            close(u, &want, 1e-10, scale),
            "mode {n}: {}",
            (u - &want).norm()
        );
    }
    Ok(())
}

/// Real `A` and real forcing give `U_{-n} = conj(U_n)` and a real series.
pub fn check_conjugate_symmetry(
    spec: &ModelSpec,
    seed: u64,
    n_max: usize,
) -> Result<(), TestCaseError> {
    let g = make_model(spec).unwrap();
    prop_assume!(g.is_real());
    let f = random_forcing(&g, 1.7, n_max, 2.0, seed).unwrap();
    let sol = solve_periodic(&g, &f, 1.0, None).unwrap();
    for n in 1..=n_max as i64 {
        let (p, m) = (&sol.coeffs[&n], &sol.coeffs[&-n]);
        prop_assert!(close(m, &p.conjugate(), 1e-12, p.norm()));
    }
    let series = synthesize_time_series(&sol.coeffs, 4 * n_max + 4).unwrap();
    prop_assert!(real_series(&series, 1e-10).is_some());
    Ok(())
}

/// `m1 <= m2` implies `||.||_{m1} <= ||.||_{m2}`, with equality iff the
/// support is `{0}`.
pub fn check_sobolev_monotone(coeffs: &ModeMap, m1: f64, m2: f64) -> Result<(), TestCaseError> {
    let g = make_model(&ModelSpec::uniformly_damped(
        coeffs.values().next().unwrap().len(),
    ))
    .unwrap();
    let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
    let a = sobolev_norm(&g, coeffs, lo).unwrap();
    let b = sobolev_norm(&g, coeffs, hi).unwrap();
    prop_assert!(a <= b * (1.0 + 1e-14), "{a} > {b}");
    let off_zero = coeffs.iter().any(|(&n, v)| n != 0 && v.norm() > 0.0);
    if off_zero && hi > lo + 1e-6 {
        prop_assert!(a < b, "strict growth expected: {a} vs {b}");
    }
    let zero_only: ModeMap = coeffs
        .iter()
        .filter(|(n, _)| **n == 0)
        .map(|(&n, v)| (n, v.clone()))
        .collect();
    let z1 = sobolev_norm(&g, &zero_only, lo).unwrap();
    let z2 = sobolev_norm(&g, &zero_only, hi).unwrap();
    prop_assert!((z1 - z2).abs() <= 1e-15 * z1.max(1.0));
    Ok(())
}

/// Dissipative models: `GA + A^T G` is negative semidefinite and unforced
/// energy never grows by more than `1e-10` per step.
pub fn check_dissipativity(spec: &ModelSpec, x0: &CVector) -> Result<(), TestCaseError> {
    let g = make_model(spec).unwrap();
    prop_assume!(g.flags().dissipative);
    prop_assume!(x0.len() >= g.dim());
    let gram = polystab::linalg::to_complex(g.gram());
    let ga = &gram * g.matrix();
    let sym = &ga + ga.adjoint();
    let herm = DMatrix::from_fn(sym.nrows(), sym.ncols(), |i, j| {
        0.5 * (sym[(i, j)] + sym[(j, i)].conj())
    });
    let top = herm
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = ga.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    prop_assert!(top <= 1e-10 * scale, "top eigenvalue {top}");

    let u0 = x0.rows(0, g.dim()).into_owned();
    let u0 = &u0 / c(g.energy_norm(&u0).unwrap().max(1e-300), 0.0);
    let zero = FourierForcing::zero(1.0, g.dim()).unwrap();
    let dt = suggested_step(&g, &zero);
    let traj = integrate_forced(&g, &zero, &u0, dt, 200.0 * dt).unwrap();
    for w in traj.energy.windows(2) {
        prop_assert!(w[1] <= w[0] + 1e-10, "energy grew {} -> {}", w[0], w[1]);
    }
    Ok(())
}

/// `fourier_coefficients(synthesize(c, S), N) = c` for `S >= 2N + 2`.
pub fn check_dft_roundtrip(coeffs: &ModeMap, extra: usize) -> Result<(), TestCaseError> {
    let n_max = coeffs
        .keys()
        .map(|n| n.unsigned_abs() as usize)
        .max()
        .unwrap();
    let samples = 2 * n_max + 2 + extra;
    let series = synthesize_time_series(coeffs, samples).unwrap();
    let back = fourier_coefficients(&series, n_max).unwrap();
    let scale = coeffs.values().map(|v| v.norm()).fold(0.0, f64::max);
    for (n, v) in coeffs {
        prop_assert!(close(&back[n], v, 1e-12, scale), "mode {n}");
    }
    Ok(())
}

/// Same seed, same bits; also independent of the worker count.
pub fn check_determinism(spec: &ModelSpec, seed: u64) -> Result<(), TestCaseError> {
    let g = make_model(spec).unwrap();
    let f1 = random_forcing(&g, 2.0, 3, 2.0, seed).unwrap();
    let f2 = random_forcing(&g, 2.0, 3, 2.0, seed).unwrap();
    prop_assert_eq!(&f1, &f2);
    let mut config = LossConfig::new(0.5, 1.0, 3, seed);
    config.n_max = 3;
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap();
    let a = serial
        .install(|| verify_loss_estimate(&g, &config))
        .unwrap();
    let b = wide.install(|| verify_loss_estimate(&g, &config)).unwrap();
    prop_assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    Ok(())
}

pub fn model(spec: &ModelSpec) -> Generator {
    make_model(spec).unwrap()
}

pub fn arb_complex() -> impl Strategy<Value = Complex64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c(a, b))
}

pub type LinearityCase = (ModelSpec, ModeMap, ModeMap, Complex64, Complex64);

pub fn linearity_cases() -> impl Strategy<Value = LinearityCase> {
    arb_spec().prop_flat_map(|spec| {
        let dim = model(&spec).dim();
        (
            Just(spec),
            arb_modes(dim, 2),
            arb_modes(dim, 2),
            arb_complex(),
            arb_complex(),
        )
    })
}

pub fn conjugate_cases() -> impl Strategy<Value = (ModelSpec, u64, usize)> {
    (arb_spec(), any::<u64>(), 1usize..6)
}

pub fn sobolev_cases() -> impl Strategy<Value = (ModeMap, f64, f64)> {
    ((1usize..4), (0i64..5)).prop_flat_map(|(d, n)| (arb_modes(d, n), 0.0f64..4.0, 0.0f64..4.0))
}

pub fn dissipativity_cases() -> impl Strategy<Value = (ModelSpec, CVector)> {
    (arb_spec(), arb_vector(64))
}

pub fn dft_cases() -> impl Strategy<Value = (ModeMap, usize)> {
    ((1usize..4), (0i64..9), 0usize..12)
        .prop_flat_map(|(d, n, extra)| (arb_modes(d, n), Just(extra)))
}

pub fn determinism_cases() -> impl Strategy<Value = (ModelSpec, u64)> {
    (arb_spec(), any::<u64>())
}

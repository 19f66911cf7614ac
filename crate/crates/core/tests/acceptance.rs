//! Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails.

mod support;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use polystab::diagnostics::{
    check_borichev_tomilov, default_frequency_window, fit_resolvent_growth, matched_time_window,
    resolvent_norm,
};
use polystab::fit::fit_power_law;
use polystab::linalg::CVector;
use polystab::march::{
    converge_to_periodic, converge_with, cross_check, resolved_band, resolved_band_state,
    resonance_demo, suggested_step, ForcingShape, ResonanceConfig,
};
use polystab::periodic::{
    random_forcing, solve_mode, solve_periodic, verify_loss_estimate, FourierForcing, LossConfig,
};
use polystab::{make_model, Error, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn resolvent_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mut lambdas = Vec::new();
        for _ in 0..rng.random_range(1..5) {
            let (d, w) = (rng.random_range(0.01..3.0), rng.random_range(0.0..20.0));
            lambdas.extend([c(-d, w), c(-d, -w)]);
        }
        lambdas.push(c(-rng.random_range(0.1..2.0), 0.0));
        let g = make_model(&ModelSpec::diagonal(&lambdas)).map_err(err)?;
        for _ in 0..10 {
            let s = rng.random_range(-25.0..25.0);
            let got = resolvent_norm(&g, s).map_err(err)?;
            let want = diagonal_resolvent_oracle(&lambdas, s);
            worst = worst.max((got - want).abs() / want);
        }
    }
    ensure(
        worst <= 1e-10,
        format!("50 frequencies, worst relative error {worst:.2e} (tol 1e-10)"),
    )
}

fn scalar_modes() -> Outcome {
    let g = make_model(&ModelSpec::uniformly_damped(1)).map_err(err)?;
    let one = CVector::from_element(1, c(1.0, 0.0));
    let u0 = solve_mode(&g, 0, 1.0, &one).map_err(err)?[0];
    let u1 = solve_mode(&g, 1, 1.0, &one).map_err(err)?[0];
    let e0 = (u0 - c(1.0, 0.0)).norm();
    let e1 = (u1 - c(0.5, -0.5)).norm();
    ensure(
        e0 <= 1e-12 && e1 <= 1e-12,
        format!("U_0 = {u0}, U_1 = {u1}, errors {e0:.1e}, {e1:.1e}"),
    )
}

fn exact_fits() -> Outcome {
    let grid: Vec<f64> = (0..60).map(|k| 0.5 * k as f64).collect();
    let growth: Vec<(f64, f64)> = grid.iter().map(|&s| (s, (1.0 + s).powi(2))).collect();
    let decay: Vec<(f64, f64)> = grid.iter().map(|&t| (t, (1.0 + t).powf(-0.5))).collect();
    let a = fit_power_law(&growth, (0.0, 30.0)).map_err(err)?;
    let b = fit_power_law(&decay, (0.0, 30.0)).map_err(err)?;
    let ok = (a.exponent - 2.0).abs() <= 1e-9
        && (b.exponent + 0.5).abs() <= 1e-9
        && (a.r_squared - 1.0).abs() <= 1e-12
        && (b.r_squared - 1.0).abs() <= 1e-12;
    ensure(
        ok,
        format!(
            "exponents {:.12} and {:.12}, r^2 {} and {}",
            a.exponent, b.exponent, a.r_squared, b.r_squared
        ),
    )
}

fn duality() -> Outcome {
    let toy: Vec<Complex64> = (1..=20)
        .flat_map(|k| {
            let k = k as f64;
            [c(-1.0 / (k * k), k), c(-1.0 / (k * k), -k)]
        })
        .collect();
    let cases = [
        (
            make_model(&ModelSpec::diagonal(&toy)).map_err(err)?,
            (4.0, 20.5),
        ),
        (
            make_model(&ModelSpec::weakly_damped_chain(16, 1.0, 1.0, 1.0)).map_err(err)?,
            (6.0, 25.0),
        ),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (g, freq) in &cases {
        let time = matched_time_window(g, *freq).map_err(err)?;
        let r = check_borichev_tomilov(g, *freq, time).map_err(err)?;
        ok &= (r.product - 1.0).abs() <= 0.25 && r.alpha_freq >= 0.1;
        lines.push(format!(
            "{}: alpha {:.3} beta {:.3} product {:.3}",
            g.label(),
            r.alpha_freq,
            r.beta_time,
            r.product
        ));
    }
    ensure(ok, lines.join("; "))
}

fn loss_certificate() -> Outcome {
    let g = make_model(&ModelSpec::heat_wave(32, 32)).map_err(err)?;
    let alpha = fit_resolvent_growth(&g, default_frequency_window(&g))
        .map_err(err)?
        .exponent;
    let mut maxima = Vec::new();
    for n_max in [64, 128] {
        let mut config = LossConfig::new(alpha, 1.0, 100, 5);
        config.period = 2.0;
        config.n_max = n_max;
        let cert = verify_loss_estimate(&g, &config).map_err(err)?;
        if cert.ratios.len() != 100 || cert.ratios.iter().any(|r| !r.is_finite()) {
            return Err(format!("non-finite or missing ratios at N_max = {n_max}"));
        }
        maxima.push(cert.max_ratio);
    }
    let change = (maxima[1] - maxima[0]).abs() / maxima[0];
    ensure(
        change < 0.2,
        format!(
            "alpha_hat {alpha:.4}; max ratio {:.5} (N=64) vs {:.5} (N=128), change {:.1}%",
            maxima[0],
            maxima[1],
            100.0 * change
        ),
    )
}

fn mild_solution() -> Outcome {
    let g = make_model(&ModelSpec::heat_wave(32, 32)).map_err(err)?;
    let forcing = random_forcing(&g, 2.0, 16, 2.0, 33).map_err(err)?;
    if forcing.coeffs().len() != 33 {
        return Err(format!("forcing has {} modes", forcing.coeffs().len()));
    }
    let sol = solve_periodic(&g, &forcing, 1.0, None).map_err(err)?;
    let check = cross_check(&g, &forcing, &sol, suggested_step(&g, &forcing)).map_err(err)?;
    ensure(
        check.within_estimate && check.relative_gap <= 1e-6,
        format!(
            "max deviation {:.2e} vs 10 x estimate {:.2e}; relative Poincare gap {:.2e}",
            check.max_deviation,
            10.0 * check.error_estimate,
            check.relative_gap
        ),
    )
}

fn non_resonance() -> Outcome {
    let scalar = make_model(&ModelSpec::uniformly_damped(1)).map_err(err)?;
    let f =
        FourierForcing::cosine(2.0 * PI, 1, CVector::from_element(1, c(1.0, 0.0))).map_err(err)?;
    let report = converge_to_periodic(&scalar, &f, &CVector::from_element(1, c(3.0, 0.0)), 2)
        .map_err(err)?;
    let want = (-2.0 * PI).exp();
    let ratio = report.ratios[0];
    let scalar_ok = (ratio / want - 1.0).abs() <= 0.05;

    let g = make_model(&ModelSpec::heat_wave(32, 32)).map_err(err)?;
    let forcing = random_forcing(&g, 2.0, 16, 2.0, 7).map_err(err)?;
    let sol = solve_periodic(&g, &forcing, 1.0, None).map_err(err)?;
    let kick = resolved_band_state(&g, resolved_band(&g), 11).map_err(err)?;
    let u0 = sol.evaluate(0.0) + kick;
    let conv =
        converge_with(&g, &forcing, &sol, &u0, 50, suggested_step(&g, &forcing)).map_err(err)?;
    let reached = conv.gaps.iter().position(|&gap| gap < 1e-3 * conv.gaps[0]);
    ensure(
        scalar_ok && reached.is_some(),
        format!(
            "scalar ratio {ratio:.5e} vs e^(-2pi) {want:.5e}; heat-wave gap < 1e-3 x initial after {} periods (final {:.2e})",
            reached.map_or("no".to_string(), |j| j.to_string()),
            conv.reduction
        ),
    )
}

fn genuine_resonance() -> Outcome {
    let g = make_model(&ModelSpec::conservative_oscillator()).map_err(err)?;
    let push = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
    let mut config = ResonanceConfig::new(40.0 * PI);
    config.frequency = Some(1.0);
    config.direction = Some(push.clone());
    config.shape = ForcingShape::Cosine;
    let r = resonance_demo(&g, &config).map_err(err)?;
    let slope_ok = (r.amplitude_slope / 0.5 - 1.0).abs() <= 0.02;
    let forcing = FourierForcing::cosine(2.0 * PI, 1, push).map_err(err)?;
    let lattice = match solve_periodic(&g, &forcing, 1.0, None) {
        Err(Error::LatticeResonance { modes }) => modes,
        other => return Err(format!("expected LatticeResonance, got {other:?}")),
    };
    ensure(
        slope_ok && lattice == vec![-1, 1],
        format!(
            "amplitude slope {:.5}; LatticeResonance {lattice:?}",
            r.amplitude_slope
        ),
    )
}

fn property_suites() -> Outcome {
    let mut lines = Vec::new();
    let mut failed = false;
    let mut record = |name: &str, result: Result<(), String>| match result {
        Ok(()) => lines.push(format!("{name} ok")),
        Err(e) => {
            failed = true;
            lines.push(format!("{name} FAILED: {e}"));
        }
    };
    record(
        "linearity",
        runner()
            .run(&linearity_cases(), |(s, f, h, a, b)| {
                check_linearity(&s, &f, &h, a, b)
            })
            .map_err(err),
    );
    record(
        "conjugate symmetry",
        runner()
            .run(&conjugate_cases(), |(s, seed, n)| {
                check_conjugate_symmetry(&s, seed, n)
            })
            .map_err(err),
    );
    record(
        "sobolev monotonicity",
        runner()
            .run(&sobolev_cases(), |(cs, a, b)| {
                check_sobolev_monotone(&cs, a, b)
            })
            .map_err(err),
    );
    record(
        "dissipativity",
        runner()
            .run(&dissipativity_cases(), |(s, x)| check_dissipativity(&s, &x))
            .map_err(err),
    );
    record(
        "dft roundtrip",
        runner()
            .run(&dft_cases(), |(cs, extra)| check_dft_roundtrip(&cs, extra))
            .map_err(err),
    );
    record(
        "determinism",
        runner()
            .run(&determinism_cases(), |(s, seed)| {
                check_determinism(&s, seed)
            })
            .map_err(err),
    );
    let detail = format!("{CASES} cases each: {}", lines.join(", "));
    ensure(!failed, detail)
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 analytic resolvent oracle",
            resolvent_oracle,
            Duration::from_secs(1),
        ),
        (
            "2 scalar periodic oracle",
            scalar_modes,
            Duration::from_secs(1),
        ),
        (
            "3 exponent-fit exactness",
            exact_fits,
            Duration::from_secs(1),
        ),
        (
            "4 resolvent/decay duality",
            duality,
            Duration::from_secs(30),
        ),
        (
            "5 loss-estimate certification",
            loss_certificate,
            Duration::from_secs(120),
        ),
        (
            "6 cross-oracle mild solution",
            mild_solution,
            Duration::from_secs(60),
        ),
        (
            "7 non-resonance convergence",
            non_resonance,
            Duration::from_secs(120),
        ),
        (
            "8 genuine resonance",
            genuine_resonance,
            Duration::from_secs(60),
        ),
        (
            "9 property suites",
            property_suites,
            Duration::from_secs(120),
        ),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failures += 1;
        }
        let slow = if elapsed > budget {
            " [over time budget]"
        } else {
            ""
        };
        println!(
            "{tag} {name} ({:.2}s){slow}: {detail}",
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {}/9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

//! Periodic response of the heat-wave model to a seeded 33-mode forcing,
//! mode by mode.

use polystab::diagnostics::{default_frequency_window, fit_resolvent_growth};
use polystab::periodic::{
    fourier_coefficients, random_forcing, solve_periodic, synthesize_time_series, tail_bound,
};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let g = make_model(&ModelSpec::heat_wave(32, 32))?;
    let alpha = fit_resolvent_growth(&g, default_frequency_window(&g))?.exponent;
    let forcing = random_forcing(&g, 2.0, 16, 3.0, 2024)?;
    let sol = solve_periodic(&g, &forcing, 1.0, Some(alpha))?;

    let worst = sol
        .residuals
        .iter()
        .map(|(n, r)| r / g.energy_norm(&forcing.coeffs()[n]).unwrap())
        .fold(0.0, f64::max);
    println!(
        "modes: {}, worst relative residual: {worst:.2e}",
        sol.coeffs.len()
    );
    println!(
        "||U||_H^0 = {:.6}, ||U||_H^1 = {:.6}",
        sol.norm(0.0).unwrap(),
        sol.norm(1.0).unwrap()
    );
    let fnorm = sol.forcing_norm.unwrap();
    println!("||F||_H^{:.3} = {:.6}", fnorm.m, fnorm.value);
    println!(
        "loss ratio {:.6}, lattice constant {:.6}",
        sol.loss_ratio.unwrap(),
        sol.lattice_constant.unwrap()
    );
    let tail = tail_bound(&g, &forcing, 1.0, alpha, sol.lattice_constant.unwrap(), 8)?;
    println!("bound on the |n| > 8 share of ||U||_H^1^2: {tail:.3e}");

    let series = synthesize_time_series(&sol.coeffs, 64)?;
    let back = fourier_coefficients(&series, 16)?;
    let drift = back
        .iter()
        .map(|(n, v)| (v - &sol.coeffs[n]).norm())
        .fold(0.0, f64::max);
    println!("DFT roundtrip error: {drift:.2e}");
    Ok(())
}

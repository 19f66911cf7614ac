//! Resolvent norm of the heat-wave model along the imaginary axis, its
//! peak envelope, and the fitted growth exponent.
//!
//! `cargo run --release --example resolvent_profile [nx] > profile.csv`

use polystab::diagnostics::{
    default_frequency_window, fit_exponent, frequency_envelope, linspace, sample_resolvent, Profile,
};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let nx: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(32);
    let g = make_model(&ModelSpec::heat_wave(nx, nx))?;
    let window = default_frequency_window(&g);
    let profile = sample_resolvent(&g, &linspace(0.0, window.1, 600))?;
    print!("{}", profile.to_csv());

    let envelope = frequency_envelope(&g, window)?;
    let fit = fit_exponent(&envelope, window)?;
    eprintln!("{}: window [{:.2}, {:.2}]", g.label(), window.0, window.1);
    for (s, r) in &envelope.samples {
        eprintln!("  peak s = {s:8.4}  |R| = {r:10.4}");
    }
    eprintln!(
        "alpha_hat = {:.4} (constant {:.4}, r^2 {:.4})",
        fit.exponent, fit.constant, fit.r_squared
    );
    Ok(())
}

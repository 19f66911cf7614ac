//! Empirical constant in `||U||_{H^m} <= C ||F||_{H^{m+alpha}}` for the
//! heat-wave model, and its stability under a longer truncation.
//!
//! `cargo run --release --example loss_certificate [trials] [seed]`

use polystab::diagnostics::{default_frequency_window, fit_resolvent_growth};
use polystab::periodic::{verify_loss_estimate, LossConfig};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let g = make_model(&ModelSpec::heat_wave(32, 32))?;
    let alpha = fit_resolvent_growth(&g, default_frequency_window(&g))?.exponent;
    println!("alpha_hat = {alpha:.4}");
    for n_max in [64, 128] {
        let mut config = LossConfig::new(alpha, 1.0, trials, seed);
        config.n_max = n_max;
        let cert = verify_loss_estimate(&g, &config)?;
        println!(
            "N_max = {n_max:3}: max ratio {:.6}, lattice constant {:.6}",
            cert.max_ratio, cert.lattice_constant
        );
    }
    Ok(())
}

//! Secular growth of `u'' + u = cos t`, the bounded off-resonant response,
//! and the large but finite response of a damped chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use polystab::linalg::CVector;
use polystab::march::{resonance_demo, ForcingShape, ResonanceConfig};
use polystab::periodic::{solve_periodic, FourierForcing};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let osc = make_model(&ModelSpec::conservative_oscillator())?;
    let push = CVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let mut config = ResonanceConfig::new(40.0 * PI);
    config.direction = Some(push.clone());
    config.shape = ForcingShape::Cosine;
    for w in [1.0, 2.0] {
        config.frequency = Some(w);
        let r = resonance_demo(&osc, &config)?;
        println!(
            "u'' + u = cos({w} t): growth order {:.3}, amplitude slope {:.4}",
            r.growth_order, r.amplitude_slope
        );
    }
    let forcing = FourierForcing::cosine(2.0 * PI, 1, push)?;
    match solve_periodic(&osc, &forcing, 1.0, None) {
        Err(e) => println!("periodic solve: {e}"),
        Ok(_) => println!("periodic solve unexpectedly succeeded"),
    }

    let chain = make_model(&ModelSpec::weakly_damped_chain(4, 1.0, 1.0, 1.0))?;
    let slowest = chain
        .eigenvalues()
        .iter()
        .map(|z| z.re.abs())
        .fold(f64::INFINITY, f64::min);
    let mut config = ResonanceConfig::new(12.0 / slowest);
    config.axis_tolerance = 1.0;
    let r = resonance_demo(&chain, &config)?;
    println!(
        "chain at s = {:.4} (Re lambda = {:.2e}): amplification {:.3}, resolvent norm {:.3}",
        r.frequency,
        -r.axis_distance,
        r.amplification,
        r.resolvent_norm.unwrap_or(f64::INFINITY)
    );
    Ok(())
}

//! Builds every model family and prints its size, spectral abscissa and
//! stability class.

use num_complex::Complex64;
use polystab::diagnostics::classify_stability;
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let specs = [
        ModelSpec::heat_wave(16, 16),
        ModelSpec::weakly_damped_chain(4, 1.0, 1.0, 1.0),
        ModelSpec::weakly_damped_chain(4, 1.0, 0.0, 1.0),
        ModelSpec::uniformly_damped(3),
        ModelSpec::conservative_oscillator(),
        ModelSpec::diagonal(&[Complex64::new(-0.5, 2.0), Complex64::new(-0.5, -2.0)]),
    ];
    println!(
        "{:<44} {:>4} {:>12} {:>12}  class",
        "model", "dim", "abscissa", "num. absc."
    );
    for spec in &specs {
        let g = make_model(spec)?;
        let report = classify_stability(&g);
        println!(
            "{:<44} {:>4} {:>12.4e} {:>12.4e}  {:?}",
            g.label(),
            g.dim(),
            g.spectral_abscissa(),
            g.numerical_abscissa(),
            report.classification
        );
    }
    Ok(())
}

//! Resolvent growth `(1 + |s|)^alpha` against decay `t^beta` on matched
//! windows: polynomial stability predicts `alpha |beta| = 1`.

use num_complex::Complex64;
use polystab::diagnostics::{check_borichev_tomilov, matched_time_window};
use polystab::{make_model, Generator, ModelSpec};

fn report(g: &Generator, freq: (f64, f64)) -> polystab::Result<()> {
    let time = matched_time_window(g, freq)?;
    let r = check_borichev_tomilov(g, freq, time)?;
    println!("{}", g.label());
    println!(
        "  s in [{:.1}, {:.1}]  ->  alpha = {:.4}",
        freq.0, freq.1, r.alpha_freq
    );
    println!(
        "  t in [{:.1}, {:.1}]  ->  beta  = {:.4}",
        time.0, time.1, r.beta_time
    );
    println!(
        "  {} ({})",
        r.note,
        if r.passed {
            "consistent"
        } else {
            "inconsistent"
        }
    );
    Ok(())
}

fn main() -> polystab::Result<()> {
    let toy: Vec<Complex64> = (1..=20)
        .flat_map(|k| {
            let k = k as f64;
            [
                Complex64::new(-1.0 / (k * k), k),
                Complex64::new(-1.0 / (k * k), -k),
            ]
        })
        .collect();
    report(&make_model(&ModelSpec::diagonal(&toy))?, (4.0, 20.5))?;
    report(
        &make_model(&ModelSpec::weakly_damped_chain(16, 1.0, 1.0, 1.0))?,
        (6.0, 25.0),
    )?;
    Ok(())
}

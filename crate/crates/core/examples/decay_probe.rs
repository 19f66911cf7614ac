//! `||S(t) A^{-1}||_H` for the weakly damped chain: the decay envelope and
//! its fitted rate.

use polystab::diagnostics::{fit_decay, logspace, sample_decay};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let g = make_model(&ModelSpec::weakly_damped_chain(8, 1.0, 1.0, 1.0))?;
    let profile = sample_decay(&g, &logspace(0.5, 400.0, 24))?;
    println!("{:>10}  {:>12}  {:>12}", "t", "norm", "envelope");
    let envelope = profile.upper_envelope();
    for ((t, n), (_, e)) in profile.samples.iter().zip(&envelope.samples) {
        println!("{t:10.3}  {n:12.6}  {e:12.6}");
    }
    let fit = fit_decay(&g, (20.0, 400.0))?;
    println!(
        "decay exponent on t in [20, 400]: {:.4} (r^2 {:.4})",
        fit.exponent, fit.r_squared
    );
    Ok(())
}

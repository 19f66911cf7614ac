//! Time marching against the Fourier solution: one period from `U_F(0)`,
//! then 50 periods from a perturbed start.

use num_complex::Complex64;
use polystab::march::{
    converge_with, cross_check, resolved_band, resolved_band_state, suggested_step,
};
use polystab::periodic::{random_forcing, solve_periodic};
use polystab::{make_model, ModelSpec};

fn main() -> polystab::Result<()> {
    let g = make_model(&ModelSpec::heat_wave(32, 32))?;
    let forcing = random_forcing(&g, 2.0, 16, 2.0, 42)?;
    let sol = solve_periodic(&g, &forcing, 1.0, None)?;
    let dt = suggested_step(&g, &forcing);

    let check = cross_check(&g, &forcing, &sol, dt)?;
    println!("dt = {dt:.3e} ({} steps per period)", check.steps);
    println!(
        "max deviation {:.3e}, error estimate {:.3e}, relative Poincare gap {:.3e}",
        check.max_deviation, check.error_estimate, check.relative_gap
    );

    let kick = resolved_band_state(&g, resolved_band(&g), 7)?;
    let u0 = sol.evaluate(0.0) + kick * Complex64::new(1.0, 0.0);
    let report = converge_with(&g, &forcing, &sol, &u0, 50, dt)?;
    for (j, gap) in report.gaps.iter().enumerate().step_by(5) {
        println!("period {j:2}: gap {gap:.3e}");
    }
    println!("final / initial = {:.3e}", report.reduction);
    Ok(())
}

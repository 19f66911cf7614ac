mod support;

use num_complex::Complex64;
use polystab::diagnostics::{semigroup_decay_norm, semigroup_matrix};
use polystab::linalg::{sigma_max, CMatrix};
use polystab::march::{integrate_forced, suggested_step};
use polystab::periodic::{random_forcing, solve_periodic, tail_bound, FourierForcing, ModeMap};
use polystab::ModelSpec;
use support::*;

#[test]
fn decay_norm_matches_eigenvalue_formula_on_normal_models() {
    let lambdas = [
        c(-0.1, 3.0),
        c(-0.1, -3.0),
        c(-2.0, 0.0),
        c(-0.02, 7.0),
        c(-0.02, -7.0),
    ];
    let g = model(&ModelSpec::diagonal(&lambdas));
    for t in [0.0, 0.5, 3.0, 40.0, 300.0] {
        let want = lambdas
            .iter()
            .map(|l| (l * t).exp().norm() / l.norm())
            .fold(0.0, f64::max);
        let got = semigroup_decay_norm(&g, t).unwrap();
        assert!((got / want - 1.0).abs() < 1e-10, "t = {t}: {got} vs {want}");
    }
}

#[test]
fn semigroup_matches_taylor_oracle_on_nonnormal_models() {
    for spec in [
        ModelSpec::heat_wave(4, 5),
        ModelSpec::weakly_damped_chain(3, 1.0, 0.7, 1.0),
    ] {
        let g = model(&spec);
        for t in [0.01, 0.7, 5.0] {
            let got = semigroup_matrix(&g, t).unwrap();
            let want = taylor_expm(&(g.weighted() * c(t, 0.0)));
            let scale = sigma_max(&want);
            assert!(
                sigma_max(&(&got - &want)) < 1e-11 * scale,
                "{} t = {t}",
                g.label()
            );
        }
    }
}

#[test]
fn march_reproduces_semigroup_columns() {
    let g = model(&ModelSpec::weakly_damped_chain(2, 1.0, 1.0, 1.0));
    let zero = FourierForcing::zero(1.0, g.dim()).unwrap();
    let dt = suggested_step(&g, &zero) / 4.0;
    let t = 2.0;
    let s = semigroup_matrix(&g, t).unwrap();
    for j in 0..g.dim() {
        let mut e = polystab::linalg::CVector::zeros(g.dim());
        e[j] = c(1.0, 0.0);
        let x0 = g.from_energy_coords(&e);
        let traj = integrate_forced(&g, &zero, &x0, dt, t).unwrap();
        let marched = g.to_energy_coords(traj.final_state());
        let col: polystab::linalg::CVector = s.column(j).into_owned();
        let gap = (&marched - &col).norm();
        assert!(
            gap <= 10.0 * traj.total_error_estimate(),
            "{gap} vs {}",
            traj.total_error_estimate()
        );
        assert!(gap < 1e-6 * col.norm().max(1.0));
    }
}

#[test]
fn heat_wave_residuals_meet_tolerance() {
    let g = model(&ModelSpec::heat_wave(32, 32));
    let f = random_forcing(&g, 2.0, 16, 2.0, 9).unwrap();
    let sol = solve_periodic(&g, &f, 1.0, None).unwrap();
    assert_eq!(sol.coeffs.len(), 33);
    for (n, r) in &sol.residuals {
        let fn_norm = g.energy_norm(&f.coeffs()[n]).unwrap();
        assert!(*r <= 1e-9 * fn_norm, "mode {n}");
        // independent dense solve
        let shifted = polystab::linalg::shifted(g.matrix(), *n as f64 * f.omega());
        let direct = shifted.lu().solve(&f.coeffs()[n]).unwrap();
        assert!((&direct - &sol.coeffs[n]).norm() <= 1e-9 * direct.norm());
    }
}

#[test]
fn tail_share_is_bounded_by_lattice_constant() {
    let g = model(&ModelSpec::heat_wave(16, 16));
    let (m, alpha) = (1.0, 0.6);
    let mut coeffs = ModeMap::new();
    let base = random_forcing(&g, 2.0, 40, 0.0, 3).unwrap();
    for (&n, v) in base.coeffs() {
        coeffs.insert(
            n,
            v * Complex64::new(
                (1.0 + n.unsigned_abs() as f64).powf(-(m + alpha + 1.0)),
                0.0,
            ),
        );
    }
    let forcing = FourierForcing::new(2.0, coeffs, true).unwrap();
    let sol = solve_periodic(&g, &forcing, m, Some(alpha)).unwrap();
    let lattice = sol.lattice_constant.unwrap();
    for cut in [0usize, 5, 10, 20] {
        let tail: ModeMap = sol
            .coeffs
            .iter()
            .filter(|(n, _)| n.unsigned_abs() as usize > cut)
            .map(|(&n, v)| (n, v.clone()))
            .collect();
        let share = polystab::periodic::sobolev_norm(&g, &tail, m)
            .unwrap()
            .powi(2);
        let bound = tail_bound(&g, &forcing, m, alpha, lattice, cut).unwrap();
        assert!(
            share <= bound * (1.0 + 1e-12),
            "cut {cut}: {share} > {bound}"
        );
    }
}

#[test]
fn semigroup_property_of_the_march() {
    let g = model(&ModelSpec::heat_wave(6, 6));
    let zero = FourierForcing::zero(1.0, g.dim()).unwrap();
    let dt = suggested_step(&g, &zero);
    let x0 = g.from_energy_coords(&polystab::linalg::CVector::from_element(
        g.dim(),
        c(0.3, 0.0),
    ));
    let whole = integrate_forced(&g, &zero, &x0, dt, 200.0 * dt).unwrap();
    let first = integrate_forced(&g, &zero, &x0, dt, 80.0 * dt).unwrap();
    let second = integrate_forced(&g, &zero, first.final_state(), dt, 120.0 * dt).unwrap();
    let gap = g
        .energy_norm(&(whole.final_state() - second.final_state()))
        .unwrap();
    assert!(gap <= 1e-12 + whole.total_error_estimate());
}

#[test]
fn rotation_is_an_isometry() {
    let g = model(&ModelSpec::conservative_oscillator());
    let m: CMatrix = semigroup_matrix(&g, 1.3).unwrap();
    let gram = m.adjoint() * &m;
    assert!((gram - CMatrix::identity(2, 2)).norm() < 1e-14);
}

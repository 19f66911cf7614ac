mod support;

use proptest::prelude::*;
use support::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: CASES, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn periodic_solve_is_linear((spec, f, h, a, b) in linearity_cases()) {
        check_linearity(&spec, &f, &h, a, b)?;
    }

    #[test]
    fn real_data_gives_conjugate_symmetric_solution((spec, seed, n) in conjugate_cases()) {
        check_conjugate_symmetry(&spec, seed, n)?;
    }

    #[test]
    fn sobolev_norm_is_monotone_in_index((coeffs, m1, m2) in sobolev_cases()) {
        check_sobolev_monotone(&coeffs, m1, m2)?;
    }

    #[test]
    fn dissipative_models_do_not_gain_energy((spec, x0) in dissipativity_cases()) {
        check_dissipativity(&spec, &x0)?;
    }

    #[test]
    fn dft_roundtrip_is_identity((coeffs, extra) in dft_cases()) {
        check_dft_roundtrip(&coeffs, extra)?;
    }

    #[test]
    fn seeded_runs_are_bit_identical((spec, seed) in determinism_cases()) {
        check_determinism(&spec, seed)?;
    }
}

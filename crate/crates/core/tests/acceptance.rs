//! Acceptance gate: every exit criterion as its own test, one pass/fail
//! line each. The expensive linear runs are shared across criteria through
//! the validation suite's process-wide cache.

use scaledrive_core::validate;

macro_rules! criterion {
    ($test_name:ident, $check:path) => {
        #[test]
        fn $test_name() {
            let result = $check();
            println!("{}", result.line());
            assert!(result.passed, "{}", result.line());
        }
    };
}

criterion!(criterion_1_figure1_curves, validate::check_criterion_1);
criterion!(criterion_2_cd_exactness, validate::check_criterion_2);
criterion!(criterion_3_bare_contrast, validate::check_criterion_3);
criterion!(criterion_4_oracle_equivalence, validate::check_criterion_4);
criterion!(criterion_5_gamma_tracking, validate::check_criterion_5);
criterion!(criterion_6_tf_decompression, validate::check_criterion_6);
criterion!(criterion_7_identity_suite, validate::check_criterion_7);
criterion!(criterion_8_derivative_convergence, validate::check_criterion_8);
criterion!(criterion_9_powerlaw_piston, validate::check_criterion_9);
